#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace nasdag {

using VertexSet = boost::dynamic_bitset<>;

class CliqueOverflow : public std::runtime_error {
public:
    explicit CliqueOverflow(std::size_t cap);
};

/// All maximal cliques of an undirected graph given as symmetric adjacency
/// rows without self loops. Bron-Kerbosch with Tomita pivoting; cliques are
/// returned sorted by their lowest differing vertex. Throws CliqueOverflow
/// when more than cap cliques exist.
std::vector<VertexSet> maximal_cliques(const std::vector<VertexSet>& adj, std::size_t cap = 1024);

std::vector<std::size_t> members(const VertexSet& s);

/// Lexicographic comparison of member lists (ascending indices).
bool members_less(const VertexSet& a, const VertexSet& b);

}  // namespace nasdag
