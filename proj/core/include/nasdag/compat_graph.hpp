#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "nasdag/block_graph.hpp"
#include "nasdag/clique.hpp"

namespace nasdag {

struct CertKey {
    Slot slot{};
    BlockId endorsed{};
    auto operator<=>(const CertKey&) const = default;
    bool operator==(const CertKey&) const = default;
};

struct CompatVertex {
    bool is_cert = false;
    BlockId block{};  // the block itself, or the endorsed block of a certificate
    CertKey cert{};
};

/// Snapshot of G_C with its maximal cliques and fitness bookkeeping.
struct CliqueReport {
    std::vector<CompatVertex> vertices;
    std::vector<VertexSet> adjacency;
    std::vector<VertexSet> cliques;
    std::vector<std::uint64_t> clique_fitness;
    std::vector<boost::multiprecision::cpp_int> tie_sums;
    std::size_t best = 0;
    /// Per vertex: the vertices whose fitness counts toward its descendant
    /// fitness (empty for certificate vertices).
    std::vector<VertexSet> credit;

    bool empty() const { return cliques.empty(); }
    std::optional<std::size_t> index_of(const BlockId& id) const;
    const VertexSet& blockclique() const { return cliques.at(best); }
    std::uint64_t blockclique_fitness() const { return clique_fitness.at(best); }
    std::uint64_t fitness_of(std::size_t vertex, std::size_t clique) const {
        return (credit[vertex] & cliques[clique]).count();
    }
    std::vector<BlockId> blocks_in(const VertexSet& clique) const;
    bool in_blockclique(const BlockId& id) const;

private:
    friend class CompatGraph;
    std::unordered_map<BlockId, std::size_t> block_index_;
};

/// Sum of block digests read as 256-bit big-endian integers.
boost::multiprecision::cpp_int digest_sum(const std::vector<BlockId>& ids);

/// Index of the preferred clique: maximum fitness, then smallest digest sum,
/// then smallest member list.
std::size_t select_blockclique(const std::vector<VertexSet>& cliques,
                               const std::vector<std::uint64_t>& fitness,
                               const std::vector<boost::multiprecision::cpp_int>& sums);

/// Compatibility graph over active blocks and certificate vertices.
class CompatGraph {
public:
    CompatGraph(std::uint32_t threads, TimeMs t0, std::size_t clique_cap);

    /// Links b against every active block by the ancestor and parallel rules.
    /// b must already be in g and all its active ancestors in this graph.
    void add_block(const Block& b, const BlockGraph& g);
    bool has_block(const BlockId& id) const { return row_of_.count(id) != 0; }
    bool adjacent(const BlockId& a, const BlockId& b) const;

    /// Registers a certificate as included in container. Idempotent.
    void include_certificate(const CertKey& key, const BlockId& container);
    /// Registers a formable, not yet included certificate. Idempotent.
    void add_speculative(const CertKey& key);
    bool has_certificate(const CertKey& key) const { return certs_.count(key) != 0; }
    bool is_speculative_only(const CertKey& key) const;

    /// Removes a block vertex. Finalized anchors take their certificates with
    /// them; stale containers only drop out of the anchor set.
    void remove_block(const BlockId& id, bool finalized);

    CliqueReport report(const BlockGraph& g) const;

    std::size_t block_count() const { return row_of_.size(); }
    std::size_t certificate_count() const { return certs_.size(); }
    std::size_t edge_count() const;

    /// Textual dump (DOT) of the current snapshot.
    std::string to_dot(const BlockGraph& g) const;

private:
    struct CertEntry {
        std::set<BlockId> containers;
        bool speculative = false;
    };

    std::size_t new_row(const BlockId& id);
    bool parent_connected(const ParentRef& p, std::size_t row, const BlockId& bj,
                          const BlockGraph& g) const;
    std::vector<BlockId> anchors(const CertEntry& c, const CertKey& key) const;

    std::uint32_t threads_;
    TimeMs t0_;
    std::size_t cap_;
    std::unordered_map<BlockId, std::size_t> row_of_;
    std::vector<VertexSet> rows_;
    std::vector<std::size_t> free_rows_;
    std::map<CertKey, CertEntry> certs_;
};

}  // namespace nasdag
