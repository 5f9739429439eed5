#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace sparseprov {

using NodeId = std::uint32_t;

// Unordered node pair, stored with first < second.
struct Edge {
    NodeId a = 0;
    NodeId b = 0;

    Edge() = default;
    Edge(NodeId u, NodeId v) : a(u < v ? u : v), b(u < v ? v : u) {}

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Undirected, connected network graph over nodes 0..n-1. The destination
// (road-side unit) is always node n-1. Immutable after construction.
class Topology {
public:
    // Throws ConfigError on self-loops, out-of-range endpoints, duplicate edges,
    // n < 2, n > 65536 or a disconnected graph.
    Topology(std::size_t n, std::vector<Edge> edges);

    std::size_t node_count() const { return n_; }
    NodeId destination() const { return static_cast<NodeId>(n_ - 1); }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }

    // Sorted ascending.
    const std::vector<NodeId>& neighbors(NodeId u) const { return adj_[u]; }
    std::size_t degree(NodeId u) const { return adj_[u].size(); }
    bool has_edge(NodeId u, NodeId v) const { return u != v && matrix_[u * n_ + v] != 0; }

    // Hop distance from every node to the destination (BFS).
    const std::vector<int>& hops_to_destination() const { return dist_; }

    friend bool operator==(const Topology& x, const Topology& y)
    {
        return x.n_ == y.n_ && x.edges_ == y.edges_;
    }

private:
    std::size_t n_;
    std::vector<Edge> edges_;
    std::vector<std::vector<NodeId>> adj_;
    std::vector<std::uint8_t> matrix_;
    std::vector<int> dist_;
};

// Degree of every non-destination node plus the destination's degree.
struct NeighborProfile {
    std::vector<std::size_t> gamma; // gamma[i] for node i, i = 0..n-2
    std::size_t gamma_rsu = 0;

    std::size_t node_count() const { return gamma.size() + 1; }
    std::size_t degree_sum() const;
};

// Ordered node sequence ending at the destination; hops() edges.
struct DirectedPath {
    std::vector<NodeId> nodes;

    std::size_t hops() const { return nodes.empty() ? 0 : nodes.size() - 1; }
    friend auto operator<=>(const DirectedPath&, const DirectedPath&) = default;
};

NeighborProfile neighbor_profile(const Topology& t);

// Node pairs absent from t, excluding pairs that contain the destination.
std::vector<Edge> complement_edges(const Topology& t);

inline constexpr std::size_t kDefaultPathCap = 1'000'000;

// All simple paths from `source` to the destination with exactly `hops` edges,
// in DFS order with ascending neighbor index. Intermediate nodes never include
// the destination. Throws CapExceededError beyond `cap` paths, ConfigError on a
// bad source or hops == 0.
std::vector<DirectedPath> enumerate_paths(const Topology& t, NodeId source, std::size_t hops,
                                          std::size_t cap = kDefaultPathCap);

// True iff `path` is simple, ends at the destination and follows edges of t.
bool is_valid_path(const Topology& t, const DirectedPath& path);

// Random spanning tree followed by uniformly chosen extra edges. Deterministic per
// seed. Throws InfeasibleError unless n-1 <= e <= n(n-1)/2.
Topology random_sparse_topology(std::size_t n, std::size_t e, std::uint64_t seed);

// Random connected graph whose node i has degree degrees[i] (destination last).
// Havel-Hakimi realization followed by seeded degree-preserving edge swaps.
// Throws InfeasibleError if the sequence is not realizable as a connected graph.
Topology topology_with_degrees(const std::vector<std::size_t>& degrees, std::uint64_t seed);

// Edge-list text format: first line "n <count> dest <index>", then "u v" per edge.
// '#' starts a comment. Throws ConfigError with a line number on malformed input.
Topology read_topology(std::istream& in);
Topology load_topology(const std::string& path);
void write_topology(std::ostream& out, const Topology& t);

} // namespace sparseprov
