#include "nasdag/clique.hpp"

#include <algorithm>
#include <string>

namespace nasdag {

CliqueOverflow::CliqueOverflow(std::size_t cap)
    : std::runtime_error("maximal clique count exceeds cap of " + std::to_string(cap)) {}

std::vector<std::size_t> members(const VertexSet& s) {
    std::vector<std::size_t> out;
    out.reserve(s.count());
    for (auto i = s.find_first(); i != VertexSet::npos; i = s.find_next(i)) out.push_back(i);
    return out;
}

bool members_less(const VertexSet& a, const VertexSet& b) {
    auto i = a.find_first();
    auto j = b.find_first();
    while (i != VertexSet::npos && j != VertexSet::npos) {
        if (i != j) return i < j;
        i = a.find_next(i);
        j = b.find_next(j);
    }
    return i == VertexSet::npos && j != VertexSet::npos;
}

namespace {

struct Enumerator {
    const std::vector<VertexSet>& adj;
    std::size_t cap;
    std::vector<VertexSet> out;

    void run(VertexSet& r, VertexSet p, VertexSet x) {
        if (p.none()) {
            if (x.none()) {
                if (out.size() >= cap) throw CliqueOverflow(cap);
                out.push_back(r);
            }
            return;
        }
        // Pivot: vertex of P or X with most neighbours in P.
        std::size_t pivot = VertexSet::npos;
        std::size_t best = 0;
        const VertexSet px = p | x;
        for (auto u = px.find_first(); u != VertexSet::npos; u = px.find_next(u)) {
            const std::size_t c = (adj[u] & p).count();
            if (pivot == VertexSet::npos || c > best) {
                pivot = u;
                best = c;
            }
        }
        const VertexSet candidates = p - adj[pivot];
        for (auto v = candidates.find_first(); v != VertexSet::npos; v = candidates.find_next(v)) {
            r.set(v);
            run(r, p & adj[v], x & adj[v]);
            r.reset(v);
            p.reset(v);
            x.set(v);
        }
    }
};

}  // namespace

std::vector<VertexSet> maximal_cliques(const std::vector<VertexSet>& adj, std::size_t cap) {
    const std::size_t n = adj.size();
    if (n == 0) return {};
    Enumerator e{adj, cap, {}};
    VertexSet r(n), p(n), x(n);
    p.set();
    e.run(r, p, x);
    std::sort(e.out.begin(), e.out.end(), members_less);
    return std::move(e.out);
}

}  // namespace nasdag
