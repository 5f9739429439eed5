#pragma once

#include "sparseprov/bloom_filter.hpp"
#include "sparseprov/identity.hpp"
#include "sparseprov/topology.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sparseprov {

// Per-node filter sizes and hash counts for nodes 0..n-2.
struct SsmpParams {
    std::vector<std::uint32_t> m;
    std::vector<std::uint16_t> k;

    static SsmpParams equal(std::size_t n, std::uint32_t m, std::uint16_t k);
    std::size_t node_count() const { return m.size() + 1; }
    std::uint64_t m_sum() const;
    // Throws ConfigError unless both vectors have n-1 entries with 1 <= k_i <= m_i.
    void validate(std::size_t n) const;
};

struct LearningPacket {
    NodeId source = 0;
    std::uint32_t seq = 0;
    BloomFilter bloom{1, 1};
    std::vector<std::uint8_t> visited; // MSSP only: node has embedded
};

// n x n 0/1 matrix. Row i holds what node i's filter claims about its neighbors.
class AdjacencyMatrix {
public:
    explicit AdjacencyMatrix(std::size_t n) : n_(n), cells_(n * n, 0) {}

    std::size_t size() const { return n_; }
    bool get(NodeId i, NodeId j) const { return cells_[i * n_ + j] != 0; }
    void set(NodeId i, NodeId j, bool v = true) { cells_[i * n_ + j] = v ? 1 : 0; }

    // Clears every entry whose transpose is clear.
    void reinforce();
    bool symmetric() const;

    friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

private:
    std::size_t n_;
    std::vector<std::uint8_t> cells_;
};

struct LearnedTopology {
    std::size_t n = 0;
    std::vector<Edge> edges; // sorted
    AdjacencyMatrix adjacency{0};

    // Throws ConfigError if the learned graph is disconnected.
    Topology to_topology() const { return Topology(n, edges); }
};

// Inserts EID(i, j) for every neighbor j of node i into a fresh m_i-bit filter.
LearningPacket ssmp_embed(const Topology& t, const IdentityTable& ids, NodeId i,
                          const SsmpParams& params, std::uint32_t seq);

// One packet per non-destination node, in any order. `destination_neighbors` is
// the destination's own neighbor knowledge; those edges are added as-is.
// Throws ConfigError on a missing or duplicate packet.
LearnedTopology ssmp_recover(const std::vector<LearningPacket>& packets, const IdentityTable& ids,
                             const SsmpParams& params,
                             const std::vector<NodeId>& destination_neighbors);

// Node sequence of the single MSSP packet, from `start` to the destination.
// Nodes are first visited in the depth-first order of a BFS spanning tree
// rooted at `start`, built without the destination unless it is a cut vertex;
// the branch ending next to the destination is toured last. Consecutive first
// visits are joined by shortest paths of t. Edge traversals = size() - 1, at
// most 2(n-1) - dist(start, destination). The destination appears only at the
// end unless it is a cut vertex.
std::vector<NodeId> mssp_walk(const Topology& t, NodeId start = 0);

// Carries one m-bit filter along mssp_walk; each non-destination node embeds
// all its neighbors on its first visit.
LearningPacket mssp_embed_walk(const Topology& t, const IdentityTable& ids, std::uint32_t m,
                               std::uint16_t k, std::uint32_t seq, NodeId start = 0);

// Number of directed edges embedded into an MSSP packet (2|E| - gamma_RSU).
std::size_t mssp_embedded_count(const LearningPacket& packet, const Topology& t);

LearnedTopology mssp_recover(const LearningPacket& packet, const IdentityTable& ids,
                             const std::vector<NodeId>& destination_neighbors);

// Hop count of each non-destination node's packet on a shortest path.
std::vector<std::size_t> ssmp_route_schedule(const Topology& t);

// Edges of `learned` absent from `truth`.
std::vector<Edge> surplus_edges(const Topology& truth, const LearnedTopology& learned);

// Fast trial checks: true iff recovery would yield at least one surplus edge.
// Only complement pairs are queried; true edges are recovered by construction.
// packets[i] must be node i's packet.
bool ssmp_has_false_edge(const std::vector<LearningPacket>& packets, const IdentityTable& ids,
                         const std::vector<Edge>& complement);
bool mssp_has_false_edge(const LearningPacket& packet, const IdentityTable& ids,
                         const std::vector<Edge>& complement);

} // namespace sparseprov
