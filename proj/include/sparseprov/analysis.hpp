#pragma once

#include "sparseprov/learning.hpp"
#include "sparseprov/provenance.hpp"
#include "sparseprov/topology.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <vector>

namespace sparseprov {

// Probability clamped to [0, 1]; `excess` keeps how far the unclamped value
// overshot 1 (0 when in range).
struct Prob {
    double value = 0.0;
    double excess = 0.0;

    static Prob clamp(double raw);
    operator double() const { return value; }
};

using BigInt = boost::multiprecision::cpp_int;

// Stirling number of the second kind, S(k, n).
BigInt stirling2(unsigned k, unsigned n);

// P(S_i) for i = 0..min(m, inserted): probability that exactly i distinct cells
// are hit by `inserted` uniform draws over m cells. Cached; thread-safe.
const std::vector<double>& set_bits_distribution(std::uint32_t m, std::uint64_t inserted);

// Throws ConfigError unless 1 <= i <= min(m, inserted).
Prob p_set_bits(std::uint32_t i, std::uint32_t m, std::uint64_t inserted);

// Probability that a never-inserted item passes a filter holding gamma items.
Prob p_edge_recovered(std::uint32_t m, std::uint16_t k, std::uint64_t gamma);

// Learning-phase false-positive rate of SSMP on a known topology.
Prob ssmp_fpr_exact(const Topology& t, const SsmpParams& params);

// Topology-free upper bound from the neighbor counts only.
Prob ssmp_fpr_bound(const NeighborProfile& profile, const SsmpParams& params);

struct ComplementCount {
    std::uint64_t edges_embedded = 0; // 2|E|
    std::uint64_t complement_size = 0;
};

// Throws ConfigError if the degree sum is odd.
ComplementCount complement_count(const NeighborProfile& profile);

Prob mssp_fpr(const NeighborProfile& profile, std::uint32_t m, std::uint16_t k);
// Unreduced binomial double sum of the same quantity (cross-check only).
double mssp_fpr_double_sum(const NeighborProfile& profile, std::uint32_t m, std::uint16_t k);

// Lower bound on the success rate of a random-insertion impersonation.
Prob impersonation_success_bound(const NeighborProfile& profile, std::uint32_t m, std::uint16_t k);

// Union-bound ingredients for the payload schemes: for every choice of beta
// alternative paths, the number of their distinct identities (edges or
// double-edges) missing from the actual path. `histogram[s]` counts choices
// with s such identities.
struct PathBoundProfile {
    std::size_t lambda = 0;
    std::size_t beta = 0;
    std::vector<std::uint64_t> histogram;

    // Sum over choices of p^s.
    double evaluate(double p) const;
};

inline constexpr std::uint64_t kDefaultCombinationCap = 1'000'000;

// Throws ConfigError if `actual` is not an h-hop path from `source`, and
// CapExceededError when C(lambda-1, beta) exceeds `cap`.
PathBoundProfile path_bound_profile(const Topology& t, NodeId source, std::size_t h,
                                    std::size_t beta, EmbedMode mode, const DirectedPath& actual,
                                    std::uint64_t cap = kDefaultCombinationCap);

// Per-identity recovery probability with theta = h (DE) or floor(h/2) (DDE)
// items in the filter.
Prob payload_identity_fp(std::uint32_t m, std::uint16_t k, std::size_t h, EmbedMode mode);

Prob de_dde_fpr_bound(const Topology& t, NodeId source, std::size_t h, std::uint32_t m,
                      std::uint16_t k, std::size_t beta, EmbedMode mode,
                      const DirectedPath& actual, std::uint64_t cap = kDefaultCombinationCap);

} // namespace sparseprov
