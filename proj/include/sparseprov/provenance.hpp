#pragma once

#include "sparseprov/bloom_filter.hpp"
#include "sparseprov/identity.hpp"
#include "sparseprov/topology.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sparseprov {

enum class EmbedMode { DE, DDE };

struct PayloadPacket {
    NodeId source = 0;
    std::uint32_t seq = 0;
    std::uint16_t hop_counter = 0;
    BloomFilter bloom{1, 1};
    HashChain chain;

    // be16 source, be32 seq, be16 hop, filter, 32-byte chain.
    Bytes serialize() const;
    static PayloadPacket deserialize(std::span<const std::uint8_t> data);

    friend bool operator==(const PayloadPacket&, const PayloadPacket&) = default;
};

// Every relay i_j (j = 1..h) embeds EID(i_j, i_{j+1}) and extends the chain.
// Throws ConfigError if the path is not a valid path of t.
PayloadPacket de_transmit(const Topology& t, const IdentityTable& ids, const DirectedPath& path,
                          std::uint32_t m, std::uint16_t k, std::uint32_t seq);

// Relays at even positions i_2, i_4, ... embed DEID(i_{j-1}, i_j, i_{j+1}).
// For odd h the last hop carries no embedding. Throws ConfigError if h < 2.
PayloadPacket dde_transmit(const Topology& t, const IdentityTable& ids, const DirectedPath& path,
                           std::uint32_t m, std::uint16_t k, std::uint32_t seq);

PayloadPacket transmit(EmbedMode mode, const Topology& t, const IdentityTable& ids,
                       const DirectedPath& path, std::uint32_t m, std::uint16_t k,
                       std::uint32_t seq);

// Identity sequence a packet following `path` folds into its chain.
std::vector<Digest> path_identities(EmbedMode mode, const IdentityTable& ids,
                                    const DirectedPath& path);

// Graph the destination searches: either a learned topology or the complete
// graph on n nodes.
class ContextGraph {
public:
    static ContextGraph learned(const Topology& t);
    static ContextGraph learned(std::size_t n, const std::vector<Edge>& edges);
    static ContextGraph complete(std::size_t n);

    std::size_t node_count() const { return n_; }
    NodeId destination() const { return static_cast<NodeId>(n_ - 1); }
    bool is_complete() const { return complete_; }
    const std::vector<NodeId>& neighbors(NodeId u) const { return adj_[u]; }
    bool has_edge(NodeId u, NodeId v) const { return u != v && matrix_[u * n_ + v] != 0; }
    // Hop distance to the destination; n for unreachable nodes.
    int distance(NodeId u) const { return dist_[u]; }

    // Directed edges and directed double-edges the destination would test.
    // Edges leaving the destination are not counted, nor double-edges whose
    // center is the destination or that start at it.
    std::uint64_t directed_edge_count() const;
    std::uint64_t directed_double_edge_count() const;

private:
    ContextGraph(std::size_t n, const std::vector<Edge>& edges, bool complete);

    std::size_t n_;
    bool complete_;
    std::vector<std::vector<NodeId>> adj_;
    std::vector<std::uint8_t> matrix_;
    std::vector<int> dist_;
};

// How beta is charged.
//   Attempts: beta bounds all chain verifications, so the true path must be among
//     the first beta candidates.
//   Failures: beta bounds failed verifications only; one more attempt is allowed.
enum class BetaRule { Attempts, Failures };

struct RecoveryOptions {
    std::size_t beta = 1;
    BetaRule rule = BetaRule::Attempts;
    // Accept only a unique candidate; never verify chains.
    bool no_chain = false;
};

enum class Outcome { Recovered, FalsePositive, Exhausted };

struct RecoveryResult {
    Outcome outcome = Outcome::Exhausted;
    std::optional<DirectedPath> path;
    std::size_t paths_checked = 0;   // chain verifications performed
    std::size_t candidate_paths = 0; // candidates enumerated before stopping
    // 0-based DFS rank of the accepted candidate, if any.
    std::optional<std::size_t> matched_index;
};

// Reusable recovery engine for one context graph; holds scratch state, so one
// instance per thread.
class Recoverer {
public:
    Recoverer(const ContextGraph& graph, const IdentityTable& ids);

    RecoveryResult recover(const PayloadPacket& packet, EmbedMode mode,
                           const RecoveryOptions& options);

    // Membership tests issued by the last recover() call.
    std::size_t membership_queries() const { return queries_; }

private:
    struct Search;

    bool edge_member(NodeId u, NodeId v);
    bool double_member(NodeId a, NodeId b, NodeId c);

    const ContextGraph& graph_;
    const IdentityTable& ids_;
    const PayloadPacket* packet_ = nullptr;
    std::uint32_t generation_ = 0;
    std::vector<std::uint32_t> edge_stamp_;
    std::vector<std::uint8_t> edge_value_;
    std::vector<std::uint32_t> triple_stamp_;
    std::vector<std::uint8_t> triple_value_;
    std::size_t queries_ = 0;
};

RecoveryResult recover(const PayloadPacket& packet, const IdentityTable& ids,
                       const ContextGraph& graph, EmbedMode mode, const RecoveryOptions& options);

// Whether a run with these results counts as a false positive under `beta`,
// given the rank of the true path among candidates. Ranks come from a single
// recovery with the largest beta of interest.
bool is_false_positive(const RecoveryResult& r, std::size_t beta, BetaRule rule, bool no_chain);

} // namespace sparseprov
