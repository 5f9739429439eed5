#include "sparseprov/provenance.hpp"

#include "sparseprov/errors.hpp"

#include <algorithm>
#include <queue>

namespace sparseprov {

Bytes PayloadPacket::serialize() const
{
    Bytes out;
    append_be16(out, static_cast<std::uint16_t>(source));
    append_be32(out, seq);
    append_be16(out, hop_counter);
    const Bytes bf = bloom.serialize();
    out.insert(out.end(), bf.begin(), bf.end());
    out.insert(out.end(), chain.value.begin(), chain.value.end());
    return out;
}

PayloadPacket PayloadPacket::deserialize(std::span<const std::uint8_t> data)
{
    if (data.size() < 8)
        throw ConfigError("payload packet truncated");
    PayloadPacket p;
    p.source = (NodeId{data[0]} << 8) | data[1];
    p.seq = (std::uint32_t{data[2]} << 24) | (std::uint32_t{data[3]} << 16) |
            (std::uint32_t{data[4]} << 8) | data[5];
    p.hop_counter = static_cast<std::uint16_t>((data[6] << 8) | data[7]);
    std::size_t used = 0;
    p.bloom = BloomFilter::deserialize(data.subspan(8), &used);
    const auto rest = data.subspan(8 + used);
    if (rest.size() != kDigestBytes)
        throw ConfigError("payload packet chain field must be 32 bytes");
    std::copy(rest.begin(), rest.end(), p.chain.value.begin());
    return p;
}

std::vector<Digest> path_identities(EmbedMode mode, const IdentityTable& ids,
                                    const DirectedPath& path)
{
    std::vector<Digest> out;
    const auto& v = path.nodes;
    const std::size_t h = path.hops();
    if (mode == EmbedMode::DE) {
        for (std::size_t j = 0; j < h; ++j)
            out.push_back(ids.edge(v[j], v[j + 1]));
    } else {
        // 0-based index j = 1, 3, ... is 1-based position 2, 4, ...
        for (std::size_t j = 1; j + 1 <= h; j += 2)
            out.push_back(ids.double_edge(v[j - 1], v[j], v[j + 1]));
    }
    return out;
}

PayloadPacket transmit(EmbedMode mode, const Topology& t, const IdentityTable& ids,
                       const DirectedPath& path, std::uint32_t m, std::uint16_t k,
                       std::uint32_t seq)
{
    if (!is_valid_path(t, path))
        throw ConfigError("payload path is not a valid path to the destination");
    if (mode == EmbedMode::DDE && path.hops() < 2)
        throw ConfigError("DDE needs at least 2 hops");
    if (path.hops() > 0xffff)
        throw ConfigError("path too long for the hop counter");
    PayloadPacket p{path.nodes.front(), seq, static_cast<std::uint16_t>(path.hops()),
                    BloomFilter(m, k), ids.keys().chain_seed()};
    for (const Digest& id : path_identities(mode, ids, path)) {
        p.bloom.insert_item(id, seq);
        p.chain = chain_update(p.chain, id, seq);
    }
    return p;
}

PayloadPacket de_transmit(const Topology& t, const IdentityTable& ids, const DirectedPath& path,
                          std::uint32_t m, std::uint16_t k, std::uint32_t seq)
{
    return transmit(EmbedMode::DE, t, ids, path, m, k, seq);
}

PayloadPacket dde_transmit(const Topology& t, const IdentityTable& ids, const DirectedPath& path,
                           std::uint32_t m, std::uint16_t k, std::uint32_t seq)
{
    return transmit(EmbedMode::DDE, t, ids, path, m, k, seq);
}

ContextGraph::ContextGraph(std::size_t n, const std::vector<Edge>& edges, bool complete)
    : n_(n), complete_(complete), adj_(n), matrix_(n * n, 0), dist_(n, static_cast<int>(n))
{
    if (n < 2)
        throw ConfigError("context graph needs at least 2 nodes");
    for (const Edge& e : edges) {
        if (e.a == e.b || e.b >= n)
            throw ConfigError("context graph edge out of range");
        if (matrix_[e.a * n + e.b])
            continue;
        matrix_[e.a * n + e.b] = matrix_[e.b * n + e.a] = 1;
        adj_[e.a].push_back(e.b);
        adj_[e.b].push_back(e.a);
    }
    for (auto& a : adj_)
        std::sort(a.begin(), a.end());
    std::queue<NodeId> q;
    dist_[destination()] = 0;
    q.push(destination());
    while (!q.empty()) {
        const NodeId u = q.front();
        q.pop();
        for (NodeId v : adj_[u])
            if (dist_[v] == static_cast<int>(n)) {
                dist_[v] = dist_[u] + 1;
                q.push(v);
            }
    }
}

ContextGraph ContextGraph::learned(const Topology& t)
{
    return ContextGraph(t.node_count(), t.edges(), false);
}

ContextGraph ContextGraph::learned(std::size_t n, const std::vector<Edge>& edges)
{
    return ContextGraph(n, edges, false);
}

ContextGraph ContextGraph::complete(std::size_t n)
{
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            edges.emplace_back(i, j);
    return ContextGraph(n, edges, true);
}

std::uint64_t ContextGraph::directed_edge_count() const
{
    std::uint64_t c = 0;
    for (NodeId u = 0; u < destination(); ++u)
        c += adj_[u].size();
    return c;
}

std::uint64_t ContextGraph::directed_double_edge_count() const
{
    std::uint64_t c = 0;
    for (NodeId b = 0; b < destination(); ++b) {
        const std::uint64_t d = adj_[b].size();
        if (d < 2)
            continue;
        c += d * (d - 1);
        if (has_edge(b, destination()))
            c -= d - 1;
    }
    return c;
}

Recoverer::Recoverer(const ContextGraph& graph, const IdentityTable& ids) : graph_(graph), ids_(ids)
{
    if (ids.node_count() != graph.node_count())
        throw ConfigError("identity table and context graph disagree on node count");
    const std::size_t n = graph.node_count();
    edge_stamp_.assign(n * n, 0);
    edge_value_.assign(n * n, 0);
    if (n <= IdentityTable::kMaxCachedTriples) {
        triple_stamp_.assign(n * n * n, 0);
        triple_value_.assign(n * n * n, 0);
    }
}

bool Recoverer::edge_member(NodeId u, NodeId v)
{
    const std::size_t key = u * graph_.node_count() + v;
    if (edge_stamp_[key] == generation_)
        return edge_value_[key] != 0;
    ++queries_;
    const bool hit = packet_->bloom.contains_item(ids_.edge(u, v), packet_->seq);
    edge_stamp_[key] = generation_;
    edge_value_[key] = hit ? 1 : 0;
    return hit;
}

bool Recoverer::double_member(NodeId a, NodeId b, NodeId c)
{
    const std::size_t n = graph_.node_count();
    const bool memo = !triple_stamp_.empty();
    const std::size_t key = memo ? (a * n + b) * n + c : 0;
    if (memo && triple_stamp_[key] == generation_)
        return triple_value_[key] != 0;
    ++queries_;
    const bool hit = packet_->bloom.contains_item(ids_.double_edge(a, b, c), packet_->seq);
    if (memo) {
        triple_stamp_[key] = generation_;
        triple_value_[key] = hit ? 1 : 0;
    }
    return hit;
}

struct Recoverer::Search {
    Recoverer& self;
    EmbedMode mode;
    const RecoveryOptions& opt;
    std::size_t limit;
    std::vector<NodeId> stack;
    std::vector<std::uint8_t> on_path;
    std::optional<DirectedPath> pending;
    RecoveryResult result;
    bool stop = false;

    bool verify(const DirectedPath& p, std::size_t rank)
    {
        ++result.paths_checked;
        const auto ids = path_identities(mode, self.ids_, p);
        const HashChain hc = chain_over(self.ids_.keys().chain_seed(), ids, self.packet_->seq);
        if (hc == self.packet_->chain) {
            result.outcome = Outcome::Recovered;
            result.path = p;
            result.matched_index = rank;
            return true;
        }
        return false;
    }

    void emit()
    {
        DirectedPath p{stack};
        const std::size_t count = ++result.candidate_paths;
        if (count == 1) {
            pending = std::move(p);
            return;
        }
        if (opt.no_chain) {
            stop = true;
            return;
        }
        if (count == 2) {
            if (verify(*pending, 0) || result.paths_checked >= limit) {
                stop = true;
                return;
            }
        }
        if (verify(p, count - 1) || result.paths_checked >= limit)
            stop = true;
    }

    void walk_edges(NodeId u, std::size_t remaining)
    {
        const ContextGraph& g = self.graph_;
        const NodeId dest = g.destination();
        if (remaining == 1) {
            if (g.has_edge(u, dest) && self.edge_member(u, dest)) {
                stack.push_back(dest);
                emit();
                stack.pop_back();
            }
            return;
        }
        for (NodeId v : g.neighbors(u)) {
            if (v == dest || on_path[v] || g.distance(v) > static_cast<int>(remaining - 1))
                continue;
            if (!self.edge_member(u, v))
                continue;
            stack.push_back(v);
            on_path[v] = 1;
            walk_edges(v, remaining - 1);
            on_path[v] = 0;
            stack.pop_back();
            if (stop)
                return;
        }
    }

    void walk_double_edges(NodeId u, std::size_t remaining)
    {
        const ContextGraph& g = self.graph_;
        const NodeId dest = g.destination();
        if (remaining == 1) {
            if (g.has_edge(u, dest)) {
                stack.push_back(dest);
                emit();
                stack.pop_back();
            }
            return;
        }
        for (NodeId v : g.neighbors(u)) {
            if (v == dest || on_path[v] || g.distance(v) > static_cast<int>(remaining - 1))
                continue;
            for (NodeId w : g.neighbors(v)) {
                if (w == u || on_path[w])
                    continue;
                if (w == dest ? remaining != 2
                              : remaining <= 2 || g.distance(w) > static_cast<int>(remaining - 2))
                    continue;
                if (!self.double_member(u, v, w))
                    continue;
                stack.push_back(v);
                stack.push_back(w);
                on_path[v] = on_path[w] = 1;
                if (w == dest)
                    emit();
                else
                    walk_double_edges(w, remaining - 2);
                on_path[v] = on_path[w] = 0;
                stack.pop_back();
                stack.pop_back();
                if (stop)
                    return;
            }
        }
    }
};

RecoveryResult Recoverer::recover(const PayloadPacket& packet, EmbedMode mode,
                                  const RecoveryOptions& options)
{
    if (options.beta < 1)
        throw ConfigError("beta must be at least 1");
    const std::size_t n = graph_.node_count();
    if (packet.source >= graph_.destination())
        throw ConfigError("packet source must be a non-destination node");
    const std::size_t h = packet.hop_counter;
    if (h == 0 || (mode == EmbedMode::DDE && h < 2))
        throw ConfigError("hop counter too small for the embedding mode");

    packet_ = &packet;
    queries_ = 0;
    if (++generation_ == 0) {
        std::fill(edge_stamp_.begin(), edge_stamp_.end(), 0);
        std::fill(triple_stamp_.begin(), triple_stamp_.end(), 0);
        generation_ = 1;
    }

    Search s{*this, mode, options,
             options.rule == BetaRule::Attempts ? options.beta : options.beta + 1,
             {packet.source}, std::vector<std::uint8_t>(n, 0), std::nullopt, {}, false};
    s.on_path[packet.source] = 1;
    if (graph_.distance(packet.source) <= static_cast<int>(h)) {
        if (mode == EmbedMode::DE)
            s.walk_edges(packet.source, h);
        else
            s.walk_double_edges(packet.source, h);
    }

    RecoveryResult& r = s.result;
    if (r.candidate_paths == 1) {
        r.outcome = Outcome::Recovered;
        r.path = std::move(s.pending);
        r.matched_index = 0;
    } else if (r.outcome != Outcome::Recovered) {
        r.outcome = (!options.no_chain && r.paths_checked < s.limit) || r.candidate_paths == 0
                        ? Outcome::Exhausted
                        : Outcome::FalsePositive;
    }
    packet_ = nullptr;
    return r;
}

RecoveryResult recover(const PayloadPacket& packet, const IdentityTable& ids,
                       const ContextGraph& graph, EmbedMode mode, const RecoveryOptions& options)
{
    Recoverer rec(graph, ids);
    return rec.recover(packet, mode, options);
}

bool is_false_positive(const RecoveryResult& r, std::size_t beta, BetaRule rule, bool no_chain)
{
    if (no_chain)
        return r.candidate_paths != 1;
    if (!r.matched_index)
        return true;
    const std::size_t limit = rule == BetaRule::Attempts ? beta : beta + 1;
    return *r.matched_index >= limit;
}

} // namespace sparseprov
