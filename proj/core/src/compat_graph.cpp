#include "nasdag/compat_graph.hpp"

#include <algorithm>
#include <sstream>

namespace nasdag {

using boost::multiprecision::cpp_int;

std::optional<std::size_t> CliqueReport::index_of(const BlockId& id) const {
    auto it = block_index_.find(id);
    if (it == block_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<BlockId> CliqueReport::blocks_in(const VertexSet& clique) const {
    std::vector<BlockId> out;
    for (auto v = clique.find_first(); v != VertexSet::npos; v = clique.find_next(v))
        if (!vertices[v].is_cert) out.push_back(vertices[v].block);
    return out;
}

bool CliqueReport::in_blockclique(const BlockId& id) const {
    auto v = index_of(id);
    return v && !cliques.empty() && blockclique().test(*v);
}

cpp_int digest_sum(const std::vector<BlockId>& ids) {
    cpp_int sum = 0;
    for (const auto& id : ids) {
        cpp_int x;
        import_bits(x, id.bytes.begin(), id.bytes.end(), 8, true);
        sum += x;
    }
    return sum;
}

std::size_t select_blockclique(const std::vector<VertexSet>& cliques,
                               const std::vector<std::uint64_t>& fitness,
                               const std::vector<cpp_int>& sums) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < cliques.size(); ++i) {
        if (fitness[i] != fitness[best]) {
            if (fitness[i] > fitness[best]) best = i;
            continue;
        }
        if (sums[i] != sums[best]) {
            if (sums[i] < sums[best]) best = i;
            continue;
        }
        if (members_less(cliques[i], cliques[best])) best = i;
    }
    return best;
}

CompatGraph::CompatGraph(std::uint32_t threads, TimeMs t0, std::size_t clique_cap)
    : threads_(threads), t0_(t0), cap_(clique_cap) {}

std::size_t CompatGraph::new_row(const BlockId& id) {
    std::size_t r;
    if (!free_rows_.empty()) {
        r = free_rows_.back();
        free_rows_.pop_back();
        rows_[r].reset();
    } else {
        r = rows_.size();
        std::size_t cap = rows_.empty() ? 64 : rows_.front().size();
        if (r >= cap) {
            cap *= 2;
            for (auto& row : rows_) row.resize(cap);
        }
        rows_.emplace_back(cap);
    }
    row_of_[id] = r;
    return r;
}

bool CompatGraph::adjacent(const BlockId& a, const BlockId& b) const {
    auto ia = row_of_.find(a);
    auto ib = row_of_.find(b);
    if (ia == row_of_.end() || ib == row_of_.end()) return false;
    return rows_[ia->second].test(ib->second);
}

bool CompatGraph::parent_connected(const ParentRef& p, std::size_t row, const BlockId& bj,
                                   const BlockGraph& g) const {
    if (p.id == bj) return true;
    if (g.is_final(p.id)) return true;
    auto it = row_of_.find(p.id);
    return it != row_of_.end() && rows_[it->second].test(row);
}

void CompatGraph::add_block(const Block& b, const BlockGraph& g) {
    if (has_block(b.id)) return;
    const TimeMs tb = static_cast<TimeMs>(b.slot.period) * t0_ +
                      static_cast<TimeMs>(b.slot.thread) * (t0_ / threads_);
    std::vector<std::pair<BlockId, std::size_t>> existing(row_of_.begin(), row_of_.end());
    const std::size_t rb = new_row(b.id);
    for (const auto& [bj, rj] : existing) {
        const auto* pj = g.parents_of(bj);
        const auto sj = g.slot_of(bj);
        if (pj == nullptr || !sj) continue;
        bool linked = false;
        if (b.is_genesis() && pj->empty()) {
            linked = true;
        } else {
            bool parents_ok = true;
            for (const auto& p : b.parents) {
                if (!parent_connected(p, rj, bj, g)) {
                    parents_ok = false;
                    break;
                }
            }
            if (parents_ok) {
                if (g.is_ancestor(bj, b.id)) {
                    linked = true;
                } else {
                    const TimeMs tj = static_cast<TimeMs>(sj->period) * t0_ +
                                      static_cast<TimeMs>(sj->thread) * (t0_ / threads_);
                    const TimeMs dt = tb > tj ? tb - tj : tj - tb;
                    const bool same_thread_parent =
                        !b.is_genesis() && !pj->empty() &&
                        b.parents[b.slot.thread].id == (*pj)[sj->thread].id;
                    linked = dt < t0_ && !same_thread_parent;
                }
            }
        }
        if (linked) {
            rows_[rb].set(rj);
            rows_[rj].set(rb);
        }
    }
}

void CompatGraph::include_certificate(const CertKey& key, const BlockId& container) {
    auto& c = certs_[key];
    c.containers.insert(container);
}

void CompatGraph::add_speculative(const CertKey& key) {
    certs_[key].speculative = true;
}

bool CompatGraph::is_speculative_only(const CertKey& key) const {
    auto it = certs_.find(key);
    if (it == certs_.end()) return false;
    for (const auto& c : it->second.containers)
        if (has_block(c)) return false;
    return it->second.speculative;
}

void CompatGraph::remove_block(const BlockId& id, bool finalized) {
    auto it = row_of_.find(id);
    if (it != row_of_.end()) {
        const std::size_t r = it->second;
        for (auto& row : rows_) row.reset(r);
        rows_[r].reset();
        free_rows_.push_back(r);
        row_of_.erase(it);
    }
    for (auto c = certs_.begin(); c != certs_.end();) {
        auto& entry = c->second;
        const bool contained = entry.containers.count(id) != 0;
        const bool endorses = c->first.endorsed == id;
        if (finalized && (contained || endorses)) {
            c = certs_.erase(c);
            continue;
        }
        if (contained) entry.containers.erase(id);
        if (endorses) entry.speculative = false;
        bool any_container = false;
        for (const auto& k : entry.containers)
            if (has_block(k)) any_container = true;
        if (!any_container && !(entry.speculative && has_block(c->first.endorsed))) {
            c = certs_.erase(c);
            continue;
        }
        ++c;
    }
}

std::vector<BlockId> CompatGraph::anchors(const CertEntry& c, const CertKey& key) const {
    std::vector<BlockId> out;
    for (const auto& k : c.containers)
        if (has_block(k)) out.push_back(k);
    if (out.empty() && c.speculative && has_block(key.endorsed)) out.push_back(key.endorsed);
    return out;
}

std::size_t CompatGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& [id, r] : row_of_) n += rows_[r].count();
    return n / 2;
}

CliqueReport CompatGraph::report(const BlockGraph& g) const {
    CliqueReport rep;
    const std::vector<BlockId> order = g.topological_order();
    std::vector<BlockId> blocks;
    for (const auto& id : order)
        if (has_block(id)) blocks.push_back(id);

    struct CertView {
        CertKey key;
        std::vector<std::size_t> anchors;
    };
    std::vector<CertView> certs;
    const std::size_t nb = blocks.size();
    for (std::size_t i = 0; i < nb; ++i) rep.block_index_[blocks[i]] = i;
    for (const auto& [key, entry] : certs_) {
        auto as = anchors(entry, key);
        if (as.empty()) continue;
        CertView cv{key, {}};
        for (const auto& a : as) cv.anchors.push_back(rep.block_index_.at(a));
        certs.push_back(std::move(cv));
    }
    const std::size_t n = nb + certs.size();
    rep.vertices.resize(n);
    rep.adjacency.assign(n, VertexSet(n));
    for (std::size_t i = 0; i < nb; ++i) rep.vertices[i] = CompatVertex{false, blocks[i], {}};
    for (std::size_t i = 0; i < nb; ++i) {
        const auto& row = rows_[row_of_.at(blocks[i])];
        for (std::size_t j = i + 1; j < nb; ++j) {
            if (row.test(row_of_.at(blocks[j]))) {
                rep.adjacency[i].set(j);
                rep.adjacency[j].set(i);
            }
        }
    }
    // Certificates inherit the closed neighbourhoods of their anchors.
    std::vector<VertexSet> anchor_sets(certs.size(), VertexSet(n));
    for (std::size_t c = 0; c < certs.size(); ++c) {
        const std::size_t v = nb + c;
        rep.vertices[v] = CompatVertex{true, certs[c].key.endorsed, certs[c].key};
        for (auto a : certs[c].anchors) {
            anchor_sets[c].set(a);
            for (std::size_t j = 0; j < nb; ++j)
                if (j == a || rep.adjacency[a].test(j)) {
                    rep.adjacency[v].set(j);
                    rep.adjacency[j].set(v);
                }
        }
    }
    for (std::size_t c1 = 0; c1 < certs.size(); ++c1) {
        for (std::size_t c2 = c1 + 1; c2 < certs.size(); ++c2) {
            if ((rep.adjacency[nb + c1] & anchor_sets[c2]).any()) {
                rep.adjacency[nb + c1].set(nb + c2);
                rep.adjacency[nb + c2].set(nb + c1);
            }
        }
    }

    // Descendant credit: strict block descendants plus certificates endorsing
    // the block itself or one of those descendants.
    rep.credit.assign(n, VertexSet(n));
    for (std::size_t i = nb; i-- > 0;) {
        for (const auto& child : g.children(blocks[i])) {
            auto it = rep.block_index_.find(child);
            if (it == rep.block_index_.end()) continue;
            rep.credit[i].set(it->second);
            rep.credit[i] |= rep.credit[it->second];
        }
    }
    for (std::size_t i = 0; i < nb; ++i) {
        VertexSet covered = rep.credit[i];
        covered.set(i);
        for (std::size_t c = 0; c < certs.size(); ++c) {
            auto it = rep.block_index_.find(certs[c].key.endorsed);
            if (it != rep.block_index_.end() && covered.test(it->second)) rep.credit[i].set(nb + c);
        }
    }
    rep.cliques = maximal_cliques(rep.adjacency, cap_);
    rep.clique_fitness.reserve(rep.cliques.size());
    rep.tie_sums.reserve(rep.cliques.size());
    for (const auto& c : rep.cliques) {
        rep.clique_fitness.push_back(c.count());
        rep.tie_sums.push_back(digest_sum(rep.blocks_in(c)));
    }
    if (!rep.cliques.empty())
        rep.best = select_blockclique(rep.cliques, rep.clique_fitness, rep.tie_sums);
    return rep;
}

std::string CompatGraph::to_dot(const BlockGraph& g) const {
    const CliqueReport rep = report(g);
    std::ostringstream os;
    os << "graph compat {\n";
    for (std::size_t v = 0; v < rep.vertices.size(); ++v) {
        const auto& x = rep.vertices[v];
        os << "  v" << v << " [label=\"";
        if (x.is_cert)
            os << "cert " << x.cert.slot.str() << ' ' << x.block.hex().substr(0, 8) << "\" shape=box";
        else
            os << "block " << g.slot_of(x.block)->str() << ' ' << x.block.hex().substr(0, 8) << '"';
        if (!rep.cliques.empty() && rep.blockclique().test(v)) os << " style=bold";
        os << "];\n";
    }
    for (std::size_t v = 0; v < rep.vertices.size(); ++v)
        for (auto u = rep.adjacency[v].find_next(v); u != VertexSet::npos;
             u = rep.adjacency[v].find_next(u))
            os << "  v" << v << " -- v" << u << ";\n";
    os << "}\n";
    return os.str();
}

}  // namespace nasdag
