#pragma once

#include <vector>

#include "nasdag/compat_graph.hpp"

namespace nasdag {

struct FinalizeResult {
    std::vector<BlockId> finalized;  // topological order
    std::vector<BlockId> stale;

    bool empty() const { return finalized.empty() && stale.empty(); }
};

/// Classifies active blocks against a fresh report and prunes them:
/// stale when every clique holding the block trails the blockclique by more
/// than delta_f; final when the block is in every maximal clique, its
/// descendants carry fitness above delta_f in one of them, and its parents are
/// final. Descendants of stale blocks are stale too.
FinalizeResult finalize_step(BlockGraph& g, CompatGraph& gc, const CliqueReport& rep,
                             std::uint64_t delta_f);

/// Pure classification without mutation, used by tests and the step above.
FinalizeResult classify(const BlockGraph& g, const CliqueReport& rep, std::uint64_t delta_f);

/// True when b cannot coexist with an already finalized block: some final
/// block newer than b's parent in its thread is neither an ancestor of b nor
/// parallel-compatible with it.
bool conflicts_with_final(const Block& b, const BlockGraph& g, std::uint32_t threads, TimeMs t0);

}  // namespace nasdag
