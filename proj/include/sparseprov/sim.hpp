#pragma once

#include "sparseprov/identity.hpp"
#include "sparseprov/learning.hpp"
#include "sparseprov/provenance.hpp"
#include "sparseprov/topology.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace sparseprov {

struct FprEstimate {
    std::uint64_t errors = 0;
    std::uint64_t trials = 0;

    double rate() const { return trials ? static_cast<double>(errors) / trials : 0.0; }
    // sqrt(p(1-p)/trials)
    double std_error() const;
};

enum class Scheme { SSMP, MSSP, DE, DDE };
enum class TopologyMode { Learned, Complete };
enum class PathSampling { Uniform, Fixed };

struct TrialPlan {
    Scheme scheme = Scheme::SSMP;
    std::size_t trials = 1;
    std::uint64_t seed = 1;
    std::uint64_t key_seed = 1;
    Topology topology{2, {Edge(0, 1)}};

    // SSMP
    SsmpParams ssmp;
    // MSSP and payload
    std::uint32_t m = 0;
    std::uint16_t k = 0;
    NodeId walk_start = 0;

    // payload
    NodeId source = 0;
    std::size_t h = 0;
    PathSampling sampling = PathSampling::Uniform;
    std::optional<DirectedPath> fixed_path; // Fixed sampling; first DFS path if unset
    RecoveryOptions recovery;
    TopologyMode topology_mode = TopologyMode::Learned;

    // Throws ConfigError on inconsistent fields.
    void validate() const;
};

// Trial i draws everything (seq, path) from substream(seed, i), so results do
// not depend on how trials are split across threads.
FprEstimate run_trials(const TrialPlan& plan);
// Single-threaded reference; must agree with run_trials exactly.
FprEstimate run_trials_serial(const TrialPlan& plan);

// One pass over many (k, beta, context-graph) combinations with shared packets:
// every trial draws one path and seq, transmits once per k and recovers against
// both the true topology and the complete graph.
struct PayloadSweep {
    Topology topology{2, {Edge(0, 1)}};
    NodeId source = 0;
    std::size_t h = 0;
    EmbedMode mode = EmbedMode::DE;
    std::uint32_t m = 0;
    std::vector<std::uint16_t> ks;
    std::size_t beta_max = 1;
    BetaRule rule = BetaRule::Attempts;
    bool no_chain = false;
    PathSampling sampling = PathSampling::Uniform;
    std::optional<DirectedPath> fixed_path;
    bool learned = true;
    bool complete = true;
    std::size_t trials = 1;
    std::uint64_t seed = 1;
    std::uint64_t key_seed = 1;
};

struct PayloadSweepResult {
    std::vector<std::uint16_t> ks;
    std::size_t beta_max = 0;
    std::size_t trials = 0;
    std::vector<DirectedPath> paths;        // all h-hop paths from the source
    std::vector<std::uint64_t> path_draws;  // how often each was the true path
    // errors[ki][mode][beta - 1], mode 0 = learned, 1 = complete
    std::vector<std::array<std::vector<std::uint64_t>, 2>> errors;

    FprEstimate estimate(std::size_t ki, TopologyMode mode, std::size_t beta) const;
    friend bool operator==(const PayloadSweepResult&, const PayloadSweepResult&) = default;
};

PayloadSweepResult run_payload_sweep(const PayloadSweep& sweep);
PayloadSweepResult run_payload_sweep_serial(const PayloadSweep& sweep);

struct AttackOutcome {
    FprEstimate success;
    Edge target;      // absent edge the attacker tries to create
    NodeId attacker = 0;
};

// Legitimate MSSP filter plus `insertions` uniformly random bits set by an
// attacker; success when both directions of the target edge pass. With
// `fooled_peer`, the target's second endpoint also embeds the reverse direction
// honestly (it believes the fake link exists). Target is the first complement
// edge; the attacker is the lowest node outside it.
AttackOutcome run_impersonation_attack(const Topology& t, const IdentityTable& ids, std::uint32_t m,
                                       std::uint16_t k, std::size_t insertions, std::size_t trials,
                                       std::uint64_t seed, bool fooled_peer = false);

} // namespace sparseprov
