#pragma once

#include "sparseprov/analysis.hpp"
#include "sparseprov/learning.hpp"
#include "sparseprov/topology.hpp"

#include <cstdint>
#include <vector>

namespace sparseprov {

inline constexpr std::uint16_t kDefaultMaxK = 32;

struct SsmpBudget {
    std::uint64_t m_sum = 0;
    std::uint32_t granularity = 16;
    std::uint32_t min_per_node = 16;
    std::uint16_t k_max = kDefaultMaxK;
};

struct ScanPoint {
    std::uint16_t k = 0;
    double value = 0.0; // unclamped
};

struct MsspOptimum {
    std::uint32_t m = 0;
    std::uint16_t k = 0;
    Prob objective;
    std::vector<ScanPoint> scan;
};

struct SsmpOptimum {
    SsmpParams params;
    Prob objective;               // topology-free bound at params
    std::vector<ScanPoint> scan;  // equal allocation only: bound vs shared k
    std::uint64_t leftover_bits = 0;
    std::uint64_t evaluated = 0;  // allocations evaluated
    bool exhaustive = false;
};

// Smallest k in [1, min(m, k_max)] minimizing mssp_fpr.
MsspOptimum solve_mssp(const NeighborProfile& profile, std::uint32_t m,
                       std::uint16_t k_max = kDefaultMaxK);

// m_i = floor(m_sum / (n-1)) for all nodes, one shared k minimizing the bound.
// Unassigned bits are reported in leftover_bits. Throws InfeasibleError if
// m_i < 1.
SsmpOptimum solve_ssmp_equal(const NeighborProfile& profile, const SsmpBudget& budget);

// Per-node sizes in multiples of the granularity (at least min_per_node), any
// bits left below one granularity step placed on whichever node gives the
// lowest bound, per-node k minimizing its own false-positive factor. Exhaustive
// over all compositions when there are at most `exhaustive_cap` of them,
// otherwise greedy seeding proportional to the neighbor counts followed by
// single-step transfers between nodes until no transfer improves the bound.
// The equal-size allocation is always evaluated as a candidate as well.
// Throws InfeasibleError when the budget cannot give every node min_per_node.
SsmpOptimum solve_ssmp_variable(const NeighborProfile& profile, const SsmpBudget& budget,
                                std::uint64_t exhaustive_cap = 200'000);

// k minimizing a single node's p_edge_recovered(m, k, gamma) (smallest on ties).
std::uint16_t best_node_k(std::uint32_t m, std::uint64_t gamma, std::uint16_t k_max = kDefaultMaxK);

} // namespace sparseprov
