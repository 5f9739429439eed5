#include "sparseprov/learning.hpp"

#include "sparseprov/errors.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <string>

namespace sparseprov {

SsmpParams SsmpParams::equal(std::size_t n, std::uint32_t m, std::uint16_t k)
{
    SsmpParams p;
    p.m.assign(n - 1, m);
    p.k.assign(n - 1, k);
    return p;
}

std::uint64_t SsmpParams::m_sum() const
{
    std::uint64_t s = 0;
    for (auto v : m)
        s += v;
    return s;
}

void SsmpParams::validate(std::size_t n) const
{
    if (m.size() != n - 1 || k.size() != n - 1)
        throw ConfigError("SSMP params need " + std::to_string(n - 1) + " entries, got m=" +
                          std::to_string(m.size()) + " k=" + std::to_string(k.size()));
    for (std::size_t i = 0; i < m.size(); ++i)
        if (k[i] < 1 || k[i] > m[i])
            throw ConfigError("node " + std::to_string(i) + ": need 1 <= k <= m");
}

void AdjacencyMatrix::reinforce()
{
    for (NodeId i = 0; i < n_; ++i)
        for (NodeId j = i + 1; j < n_; ++j)
            if (!get(i, j) || !get(j, i)) {
                set(i, j, false);
                set(j, i, false);
            }
}

bool AdjacencyMatrix::symmetric() const
{
    for (NodeId i = 0; i < n_; ++i) {
        if (get(i, i))
            return false;
        for (NodeId j = i + 1; j < n_; ++j)
            if (get(i, j) != get(j, i))
                return false;
    }
    return true;
}

LearningPacket ssmp_embed(const Topology& t, const IdentityTable& ids, NodeId i,
                          const SsmpParams& params, std::uint32_t seq)
{
    if (i >= t.destination())
        throw ConfigError("SSMP embedding node must be a non-destination node");
    LearningPacket p{i, seq, BloomFilter(params.m.at(i), params.k.at(i)), {}};
    for (NodeId j : t.neighbors(i))
        p.bloom.insert_item(ids.edge(i, j), seq);
    return p;
}

namespace {

LearnedTopology finish(AdjacencyMatrix adj, const std::vector<NodeId>& destination_neighbors)
{
    const std::size_t n = adj.size();
    const NodeId dest = static_cast<NodeId>(n - 1);
    adj.reinforce();
    for (NodeId x : destination_neighbors) {
        if (x >= dest)
            throw ConfigError("destination neighbor out of range");
        adj.set(x, dest);
        adj.set(dest, x);
    }
    LearnedTopology out;
    out.n = n;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            if (adj.get(i, j))
                out.edges.emplace_back(i, j);
    out.adjacency = std::move(adj);
    return out;
}

} // namespace

LearnedTopology ssmp_recover(const std::vector<LearningPacket>& packets, const IdentityTable& ids,
                             const SsmpParams& params,
                             const std::vector<NodeId>& destination_neighbors)
{
    const std::size_t n = ids.node_count();
    params.validate(n);
    const NodeId dest = static_cast<NodeId>(n - 1);
    std::vector<const LearningPacket*> by_source(n - 1, nullptr);
    for (const auto& p : packets) {
        if (p.source >= dest)
            throw ConfigError("packet from invalid source " + std::to_string(p.source));
        if (by_source[p.source])
            throw ConfigError("duplicate packet from node " + std::to_string(p.source));
        by_source[p.source] = &p;
    }
    AdjacencyMatrix adj(n);
    for (NodeId i = 0; i < dest; ++i) {
        if (!by_source[i])
            throw ConfigError("missing packet from node " + std::to_string(i));
        const auto& p = *by_source[i];
        for (NodeId j = 0; j < dest; ++j)
            if (j != i && p.bloom.contains_item(ids.edge(i, j), p.seq))
                adj.set(i, j);
    }
    return finish(std::move(adj), destination_neighbors);
}

std::vector<NodeId> mssp_walk(const Topology& t, NodeId start)
{
    const std::size_t n = t.node_count();
    const NodeId dest = t.destination();
    if (start >= dest)
        throw ConfigError("MSSP walk must start at a non-destination node");

    // BFS tree over the other nodes when the destination is not a cut vertex,
    // so the packet reaches it only at the end; otherwise over all of t.
    std::vector<NodeId> parent(n, start);
    std::vector<int> depth(n, -1);
    std::vector<std::vector<NodeId>> children(n);
    auto grow = [&](bool through_dest) {
        std::fill(depth.begin(), depth.end(), -1);
        for (auto& c : children)
            c.clear();
        std::queue<NodeId> q;
        q.push(start);
        depth[start] = 0;
        std::size_t reached = 1;
        while (!q.empty()) {
            const NodeId u = q.front();
            q.pop();
            for (NodeId v : t.neighbors(u))
                if (depth[v] < 0 && (through_dest || v != dest)) {
                    depth[v] = depth[u] + 1;
                    parent[v] = u;
                    children[u].push_back(v);
                    q.push(v);
                    ++reached;
                }
        }
        return reached;
    };
    const bool avoid = grow(false) == n - 1;
    if (!avoid)
        grow(true);

    // The branch toward `last` is toured last: the destination itself, or
    // its deepest neighbor in the tree without it.
    NodeId last = dest;
    if (avoid) {
        last = t.neighbors(dest).front();
        for (NodeId v : t.neighbors(dest))
            if (depth[v] > depth[last])
                last = v;
    }
    std::vector<std::uint8_t> on_branch(n, 0);
    for (NodeId v = last; v != start; v = parent[v])
        on_branch[v] = 1;
    for (auto& c : children)
        std::stable_partition(c.begin(), c.end(), [&](NodeId v) { return !on_branch[v]; });

    // First-visit order of the tree's depth-first tour.
    std::vector<NodeId> visits;
    std::function<void(NodeId)> visit = [&](NodeId u) {
        if (u != dest)
            visits.push_back(u);
        for (NodeId c : children[u])
            visit(c);
    };
    visit(start);
    visits.push_back(dest);

    // Consecutive visits are joined by shortest paths (off the destination
    // when the tree avoids it) rather than by retracing tree edges; each leg
    // is no longer than the tree segment it replaces.
    std::vector<NodeId> tour = {start};
    std::vector<int> dist(n);
    for (std::size_t i = 1; i < visits.size(); ++i) {
        const NodeId target = visits[i];
        if (tour.back() == target)
            continue;
        std::fill(dist.begin(), dist.end(), -1);
        std::queue<NodeId> bq;
        bq.push(target);
        dist[target] = 0;
        while (!bq.empty()) {
            const NodeId u = bq.front();
            bq.pop();
            for (NodeId v : t.neighbors(u))
                if (dist[v] < 0 && (!avoid || v != dest)) {
                    dist[v] = dist[u] + 1;
                    bq.push(v);
                }
        }
        NodeId u = tour.back();
        while (u != target) {
            for (NodeId v : t.neighbors(u))
                if (dist[v] == dist[u] - 1) {
                    u = v;
                    break;
                }
            tour.push_back(u);
        }
    }
    return tour;
}

LearningPacket mssp_embed_walk(const Topology& t, const IdentityTable& ids, std::uint32_t m,
                               std::uint16_t k, std::uint32_t seq, NodeId start)
{
    LearningPacket p{start, seq, BloomFilter(m, k), std::vector<std::uint8_t>(t.node_count(), 0)};
    for (NodeId u : mssp_walk(t, start)) {
        if (u == t.destination() || p.visited[u])
            continue;
        p.visited[u] = 1;
        for (NodeId j : t.neighbors(u))
            p.bloom.insert_item(ids.edge(u, j), seq);
    }
    return p;
}

std::size_t mssp_embedded_count(const LearningPacket& packet, const Topology& t)
{
    std::size_t c = 0;
    for (NodeId u = 0; u < packet.visited.size(); ++u)
        if (packet.visited[u])
            c += t.degree(u);
    return c;
}

LearnedTopology mssp_recover(const LearningPacket& packet, const IdentityTable& ids,
                             const std::vector<NodeId>& destination_neighbors)
{
    const std::size_t n = ids.node_count();
    const NodeId dest = static_cast<NodeId>(n - 1);
    AdjacencyMatrix adj(n);
    for (NodeId i = 0; i < dest; ++i)
        for (NodeId j = 0; j < dest; ++j)
            if (i != j && packet.bloom.contains_item(ids.edge(i, j), packet.seq))
                adj.set(i, j);
    return finish(std::move(adj), destination_neighbors);
}

std::vector<std::size_t> ssmp_route_schedule(const Topology& t)
{
    const auto& dist = t.hops_to_destination();
    return std::vector<std::size_t>(dist.begin(), dist.end() - 1);
}

std::vector<Edge> surplus_edges(const Topology& truth, const LearnedTopology& learned)
{
    std::vector<Edge> out;
    for (const Edge& e : learned.edges)
        if (!truth.has_edge(e.a, e.b))
            out.push_back(e);
    return out;
}

bool ssmp_has_false_edge(const std::vector<LearningPacket>& packets, const IdentityTable& ids,
                         const std::vector<Edge>& complement)
{
    for (const Edge& e : complement) {
        const auto& pa = packets[e.a];
        const auto& pb = packets[e.b];
        if (pa.bloom.contains_item(ids.edge(e.a, e.b), pa.seq) &&
            pb.bloom.contains_item(ids.edge(e.b, e.a), pb.seq))
            return true;
    }
    return false;
}

bool mssp_has_false_edge(const LearningPacket& packet, const IdentityTable& ids,
                         const std::vector<Edge>& complement)
{
    for (const Edge& e : complement)
        if (packet.bloom.contains_item(ids.edge(e.a, e.b), packet.seq) &&
            packet.bloom.contains_item(ids.edge(e.b, e.a), packet.seq))
            return true;
    return false;
}

} // namespace sparseprov
