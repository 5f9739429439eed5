#include "sparseprov/topology.hpp"

#include "sparseprov/errors.hpp"
#include "sparseprov/rng.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

namespace sparseprov {

namespace {

std::vector<int> bfs_from(const std::vector<std::vector<NodeId>>& adj, NodeId root)
{
    std::vector<int> dist(adj.size(), -1);
    std::deque<NodeId> queue{root};
    dist[root] = 0;
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop_front();
        for (NodeId v : adj[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

} // namespace

Topology::Topology(std::size_t n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges))
{
    if (n_ < 2)
        throw ConfigError("topology needs at least 2 nodes");
    if (n_ > 65536)
        throw ConfigError("topology supports at most 65536 nodes");
    std::sort(edges_.begin(), edges_.end());
    adj_.resize(n_);
    matrix_.assign(n_ * n_, 0);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const Edge& e = edges_[i];
        if (e.a == e.b)
            throw ConfigError("self-loop on node " + std::to_string(e.a));
        if (e.b >= n_)
            throw ConfigError("edge endpoint " + std::to_string(e.b) + " out of range");
        if (i > 0 && edges_[i - 1] == e)
            throw ConfigError("duplicate edge " + std::to_string(e.a) + "-" + std::to_string(e.b));
        adj_[e.a].push_back(e.b);
        adj_[e.b].push_back(e.a);
        matrix_[e.a * n_ + e.b] = matrix_[e.b * n_ + e.a] = 1;
    }
    for (auto& list : adj_)
        std::sort(list.begin(), list.end());
    dist_ = bfs_from(adj_, destination());
    if (std::any_of(dist_.begin(), dist_.end(), [](int d) { return d < 0; }))
        throw ConfigError("topology is not connected");
}

std::size_t NeighborProfile::degree_sum() const
{
    return std::accumulate(gamma.begin(), gamma.end(), gamma_rsu);
}

NeighborProfile neighbor_profile(const Topology& t)
{
    NeighborProfile p;
    p.gamma.resize(t.node_count() - 1);
    for (NodeId i = 0; i + 1 < t.node_count(); ++i)
        p.gamma[i] = t.degree(i);
    p.gamma_rsu = t.degree(t.destination());
    return p;
}

std::vector<Edge> complement_edges(const Topology& t)
{
    std::vector<Edge> out;
    const auto dest = t.destination();
    for (NodeId a = 0; a < dest; ++a)
        for (NodeId b = a + 1; b < dest; ++b)
            if (!t.has_edge(a, b))
                out.emplace_back(a, b);
    return out;
}

namespace {

void extend_paths(const Topology& t, std::vector<NodeId>& stack, std::vector<char>& on_path,
                  std::size_t hops, std::size_t cap, std::vector<DirectedPath>& out)
{
    const NodeId u = stack.back();
    const std::size_t remaining = hops - (stack.size() - 1);
    const NodeId dest = t.destination();
    const auto& dist = t.hops_to_destination();
    if (remaining == 1) {
        if (t.has_edge(u, dest)) {
            if (out.size() == cap)
                throw CapExceededError("path enumeration exceeded cap of " + std::to_string(cap));
            DirectedPath p{stack};
            p.nodes.push_back(dest);
            out.push_back(std::move(p));
        }
        return;
    }
    for (NodeId v : t.neighbors(u)) {
        if (v == dest || on_path[v] || static_cast<std::size_t>(dist[v]) > remaining - 1)
            continue;
        on_path[v] = 1;
        stack.push_back(v);
        extend_paths(t, stack, on_path, hops, cap, out);
        stack.pop_back();
        on_path[v] = 0;
    }
}

} // namespace

std::vector<DirectedPath> enumerate_paths(const Topology& t, NodeId source, std::size_t hops,
                                          std::size_t cap)
{
    if (source >= t.destination())
        throw ConfigError("path source must be a non-destination node");
    if (hops == 0)
        throw ConfigError("hop count must be at least 1");
    std::vector<DirectedPath> out;
    std::vector<NodeId> stack{source};
    std::vector<char> on_path(t.node_count(), 0);
    on_path[source] = 1;
    extend_paths(t, stack, on_path, hops, cap, out);
    return out;
}

bool is_valid_path(const Topology& t, const DirectedPath& path)
{
    if (path.nodes.size() < 2 || path.nodes.back() != t.destination())
        return false;
    std::vector<char> seen(t.node_count(), 0);
    for (std::size_t i = 0; i < path.nodes.size(); ++i) {
        const NodeId u = path.nodes[i];
        if (u >= t.node_count() || seen[u])
            return false;
        seen[u] = 1;
        if (i > 0 && !t.has_edge(path.nodes[i - 1], u))
            return false;
    }
    return true;
}

Topology random_sparse_topology(std::size_t n, std::size_t e, std::uint64_t seed)
{
    if (n < 2 || e < n - 1 || e > n * (n - 1) / 2)
        throw InfeasibleError("no connected graph with " + std::to_string(n) + " nodes and " +
                              std::to_string(e) + " edges");
    Rng rng(mix64(seed));
    std::vector<NodeId> order(n);
    std::iota(order.begin(), order.end(), NodeId{0});
    shuffle(order, rng);

    std::vector<Edge> edges;
    std::vector<char> used(n * n, 0);
    auto mark = [&](NodeId u, NodeId v) {
        used[u * n + v] = used[v * n + u] = 1;
        edges.emplace_back(u, v);
    };
    for (std::size_t i = 1; i < n; ++i)
        mark(order[i], order[rng.below(i)]);

    std::vector<Edge> rest;
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b)
            if (!used[a * n + b])
                rest.emplace_back(a, b);
    shuffle(rest, rng);
    for (std::size_t i = 0; i + (n - 1) < e; ++i)
        edges.push_back(rest[i]);
    return Topology(n, std::move(edges));
}

namespace {

bool connected(std::size_t n, const std::vector<Edge>& edges)
{
    std::vector<std::vector<NodeId>> adj(n);
    for (const auto& e : edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    const auto dist = bfs_from(adj, 0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

} // namespace

Topology topology_with_degrees(const std::vector<std::size_t>& degrees, std::uint64_t seed)
{
    const std::size_t n = degrees.size();
    if (n < 2)
        throw InfeasibleError("degree sequence needs at least 2 nodes");
    const std::size_t total = std::accumulate(degrees.begin(), degrees.end(), std::size_t{0});
    if (total % 2 != 0)
        throw InfeasibleError("degree sum is odd");
    if (total / 2 < n - 1)
        throw InfeasibleError("too few edges for a connected graph");

    // Havel-Hakimi.
    std::vector<std::pair<std::size_t, NodeId>> residual;
    for (NodeId i = 0; i < n; ++i)
        residual.emplace_back(degrees[i], i);
    std::vector<Edge> edges;
    while (true) {
        std::sort(residual.begin(), residual.end(), [](const auto& x, const auto& y) {
            return x.first != y.first ? x.first > y.first : x.second < y.second;
        });
        if (residual.front().first == 0)
            break;
        auto [d, u] = residual.front();
        residual.front().first = 0;
        if (d >= residual.size())
            throw InfeasibleError("degree sequence is not graphical");
        for (std::size_t i = 1; i <= d; ++i) {
            if (residual[i].first == 0)
                throw InfeasibleError("degree sequence is not graphical");
            --residual[i].first;
            edges.emplace_back(u, residual[i].second);
        }
    }

    // Degree-preserving double-edge swaps; only connected states are kept.
    Rng rng(mix64(seed ^ 0x5bd1e995ULL));
    std::vector<char> used(n * n, 0);
    for (const auto& e : edges)
        used[e.a * n + e.b] = used[e.b * n + e.a] = 1;
    bool ok = connected(n, edges);
    const std::size_t swaps = 20 * edges.size() + 100;
    for (std::size_t s = 0; s < swaps && edges.size() >= 2; ++s) {
        const std::size_t i = rng.below(edges.size());
        const std::size_t j = rng.below(edges.size());
        if (i == j)
            continue;
        NodeId a = edges[i].a, b = edges[i].b, c = edges[j].a, d = edges[j].b;
        if (rng.below(2))
            std::swap(c, d);
        // (a,b),(c,d) -> (a,c),(b,d)
        if (a == c || b == d || a == d || b == c || used[a * n + c] || used[b * n + d])
            continue;
        auto candidate = edges;
        candidate[i] = Edge(a, c);
        candidate[j] = Edge(b, d);
        const bool cand_ok = connected(n, candidate);
        if (ok && !cand_ok)
            continue;
        used[a * n + b] = used[b * n + a] = used[c * n + d] = used[d * n + c] = 0;
        used[a * n + c] = used[c * n + a] = used[b * n + d] = used[d * n + b] = 1;
        edges = std::move(candidate);
        ok = cand_ok;
    }
    if (!ok)
        throw InfeasibleError("could not realize degree sequence as a connected graph");
    return Topology(n, std::move(edges));
}

Topology read_topology(std::istream& in)
{
    std::string line;
    std::size_t lineno = 0;
    std::size_t n = 0;
    bool have_header = false;
    std::vector<Edge> edges;
    auto fail = [&](const std::string& what) {
        throw ConfigError("topology line " + std::to_string(lineno) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ss(line);
        std::string first;
        if (!(ss >> first))
            continue;
        if (!have_header) {
            std::string dest_kw;
            long long count = -1, dest = -1;
            if (first != "n" || !(ss >> count >> dest_kw >> dest) || dest_kw != "dest")
                fail("expected header 'n <count> dest <index>'");
            if (count < 2)
                fail("node count must be at least 2");
            if (dest != count - 1)
                fail("destination must be the highest node index (" + std::to_string(count - 1) + ")");
            n = static_cast<std::size_t>(count);
            have_header = true;
            continue;
        }
        long long u = -1, v = -1;
        std::istringstream es(line);
        std::string extra;
        if (!(es >> u >> v) || (es >> extra))
            fail("expected 'u v'");
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n)
            fail("node index out of range");
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    if (!have_header)
        throw ConfigError("topology: missing header");
    return Topology(n, std::move(edges));
}

Topology load_topology(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open topology file '" + path + "'");
    return read_topology(in);
}

void write_topology(std::ostream& out, const Topology& t)
{
    out << "n " << t.node_count() << " dest " << t.destination() << '\n';
    for (const auto& e : t.edges())
        out << e.a << ' ' << e.b << '\n';
}

} // namespace sparseprov
