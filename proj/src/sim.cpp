#include "sparseprov/sim.hpp"

#include "sparseprov/errors.hpp"
#include "sparseprov/rng.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace sparseprov {

double FprEstimate::std_error() const
{
    if (trials == 0)
        return 0.0;
    const double p = rate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

void TrialPlan::validate() const
{
    if (trials < 1)
        throw ConfigError("trials must be at least 1");
    const std::size_t n = topology.node_count();
    switch (scheme) {
    case Scheme::SSMP:
        ssmp.validate(n);
        break;
    case Scheme::MSSP:
        if (k < 1 || k > m)
            throw ConfigError("need 1 <= k <= m");
        if (walk_start >= topology.destination())
            throw ConfigError("walk start must be a non-destination node");
        break;
    case Scheme::DE:
    case Scheme::DDE:
        if (k < 1 || k > m)
            throw ConfigError("need 1 <= k <= m");
        if (source >= topology.destination())
            throw ConfigError("payload source must be a non-destination node");
        if (h < 1 || (scheme == Scheme::DDE && h < 2))
            throw ConfigError("hop count too small for the embedding mode");
        if (recovery.beta < 1)
            throw ConfigError("beta must be at least 1");
        if (fixed_path && (fixed_path->nodes.front() != source || fixed_path->hops() != h ||
                           !is_valid_path(topology, *fixed_path)))
            throw ConfigError("fixed path does not match source, hop count and topology");
        break;
    }
}

namespace {

EmbedMode embed_mode(Scheme s)
{
    return s == Scheme::DDE ? EmbedMode::DDE : EmbedMode::DE;
}

struct PlanContext {
    const TrialPlan& plan;
    IdentityTable ids;
    std::vector<Edge> complement;
    std::vector<DirectedPath> paths;
    std::unique_ptr<ContextGraph> graph;

    explicit PlanContext(const TrialPlan& p)
        : plan(p),
          ids(KeyRing::generate(p.topology.node_count(), p.key_seed), p.scheme == Scheme::DDE),
          complement(complement_edges(p.topology))
    {
        p.validate();
        if (p.scheme == Scheme::DE || p.scheme == Scheme::DDE) {
            if (p.sampling == PathSampling::Fixed && p.fixed_path)
                paths.push_back(*p.fixed_path);
            else
                paths = enumerate_paths(p.topology, p.source, p.h);
            if (paths.empty())
                throw InfeasibleError("no " + std::to_string(p.h) + "-hop path from node " +
                                      std::to_string(p.source));
            if (p.sampling == PathSampling::Fixed)
                paths.resize(1);
            graph = std::make_unique<ContextGraph>(
                p.topology_mode == TopologyMode::Learned
                    ? ContextGraph::learned(p.topology)
                    : ContextGraph::complete(p.topology.node_count()));
        }
    }
};

bool trial_error(const PlanContext& ctx, std::unique_ptr<Recoverer>& rec, std::uint64_t i)
{
    const TrialPlan& plan = ctx.plan;
    Rng rng = substream(plan.seed, i);
    const std::uint32_t seq = rng.next_u32();
    switch (plan.scheme) {
    case Scheme::SSMP: {
        std::vector<LearningPacket> packets;
        for (NodeId v = 0; v < plan.topology.destination(); ++v)
            packets.push_back(ssmp_embed(plan.topology, ctx.ids, v, plan.ssmp, seq));
        return ssmp_has_false_edge(packets, ctx.ids, ctx.complement);
    }
    case Scheme::MSSP: {
        const auto packet =
            mssp_embed_walk(plan.topology, ctx.ids, plan.m, plan.k, seq, plan.walk_start);
        return mssp_has_false_edge(packet, ctx.ids, ctx.complement);
    }
    case Scheme::DE:
    case Scheme::DDE: {
        const auto& path = ctx.paths[ctx.paths.size() == 1 ? 0 : rng.below(ctx.paths.size())];
        const EmbedMode mode = embed_mode(plan.scheme);
        const auto packet = transmit(mode, plan.topology, ctx.ids, path, plan.m, plan.k, seq);
        if (!rec)
            rec = std::make_unique<Recoverer>(*ctx.graph, ctx.ids);
        return rec->recover(packet, mode, plan.recovery).outcome != Outcome::Recovered;
    }
    }
    return false;
}

} // namespace

FprEstimate run_trials(const TrialPlan& plan)
{
    const PlanContext ctx(plan);
    const auto total = static_cast<long long>(plan.trials);
    std::uint64_t errors = 0;
#pragma omp parallel reduction(+ : errors)
    {
        std::unique_ptr<Recoverer> rec;
#pragma omp for schedule(dynamic, 256)
        for (long long i = 0; i < total; ++i)
            errors += trial_error(ctx, rec, static_cast<std::uint64_t>(i)) ? 1 : 0;
    }
    return FprEstimate{errors, plan.trials};
}

FprEstimate run_trials_serial(const TrialPlan& plan)
{
    const PlanContext ctx(plan);
    std::unique_ptr<Recoverer> rec;
    FprEstimate est{0, plan.trials};
    for (std::uint64_t i = 0; i < plan.trials; ++i)
        if (trial_error(ctx, rec, i))
            ++est.errors;
    return est;
}

FprEstimate PayloadSweepResult::estimate(std::size_t ki, TopologyMode mode, std::size_t beta) const
{
    const auto& v = errors.at(ki)[mode == TopologyMode::Learned ? 0 : 1];
    if (beta < 1 || beta > v.size())
        throw ConfigError("beta outside the swept range");
    return FprEstimate{v[beta - 1], trials};
}

namespace {

struct SweepContext {
    const PayloadSweep& sweep;
    IdentityTable ids;
    std::vector<DirectedPath> paths;
    std::size_t fixed_index = 0;
    ContextGraph learned;
    ContextGraph complete;

    explicit SweepContext(const PayloadSweep& s)
        : sweep(s),
          ids(KeyRing::generate(s.topology.node_count(), s.key_seed), s.mode == EmbedMode::DDE),
          paths(enumerate_paths(s.topology, s.source, s.h)),
          learned(ContextGraph::learned(s.topology)),
          complete(ContextGraph::complete(s.topology.node_count()))
    {
        if (s.trials < 1 || s.beta_max < 1 || s.ks.empty())
            throw ConfigError("sweep needs trials, beta_max and at least one k");
        for (auto k : s.ks)
            if (k < 1 || k > s.m)
                throw ConfigError("need 1 <= k <= m");
        if (paths.empty())
            throw InfeasibleError("no " + std::to_string(s.h) + "-hop path from node " +
                                  std::to_string(s.source));
        if (s.fixed_path) {
            auto it = std::find(paths.begin(), paths.end(), *s.fixed_path);
            if (it == paths.end())
                throw ConfigError("fixed path is not an h-hop path from the source");
            fixed_index = static_cast<std::size_t>(it - paths.begin());
        }
    }
};

struct SweepCounts {
    std::vector<std::array<std::vector<std::uint64_t>, 2>> errors;
    std::vector<std::uint64_t> draws;

    SweepCounts(std::size_t ks, std::size_t beta_max, std::size_t paths)
        : errors(ks, {std::vector<std::uint64_t>(beta_max, 0),
                      std::vector<std::uint64_t>(beta_max, 0)}),
          draws(paths, 0)
    {
    }

    void merge(const SweepCounts& o)
    {
        for (std::size_t i = 0; i < errors.size(); ++i)
            for (int g = 0; g < 2; ++g)
                for (std::size_t b = 0; b < errors[i][g].size(); ++b)
                    errors[i][g][b] += o.errors[i][g][b];
        for (std::size_t i = 0; i < draws.size(); ++i)
            draws[i] += o.draws[i];
    }
};

void sweep_trial(const SweepContext& ctx, Recoverer& learned, Recoverer& complete,
                 SweepCounts& counts, std::uint64_t i)
{
    const PayloadSweep& s = ctx.sweep;
    Rng rng = substream(s.seed, i);
    const std::uint32_t seq = rng.next_u32();
    const std::size_t pi =
        s.sampling == PathSampling::Fixed ? ctx.fixed_index : rng.below(ctx.paths.size());
    ++counts.draws[pi];
    const RecoveryOptions opt{s.beta_max, s.rule, s.no_chain};
    for (std::size_t ki = 0; ki < s.ks.size(); ++ki) {
        const auto packet = transmit(s.mode, s.topology, ctx.ids, ctx.paths[pi], s.m, s.ks[ki], seq);
        for (int g = 0; g < 2; ++g) {
            if ((g == 0 && !s.learned) || (g == 1 && !s.complete))
                continue;
            Recoverer& rec = g == 0 ? learned : complete;
            const auto r = rec.recover(packet, s.mode, opt);
            for (std::size_t b = 1; b <= s.beta_max; ++b)
                if (is_false_positive(r, b, s.rule, s.no_chain))
                    ++counts.errors[ki][g][b - 1];
        }
    }
}

PayloadSweepResult finish(const SweepContext& ctx, SweepCounts&& counts)
{
    PayloadSweepResult r;
    r.ks = ctx.sweep.ks;
    r.beta_max = ctx.sweep.beta_max;
    r.trials = ctx.sweep.trials;
    r.paths = ctx.paths;
    r.path_draws = std::move(counts.draws);
    r.errors = std::move(counts.errors);
    return r;
}

} // namespace

PayloadSweepResult run_payload_sweep(const PayloadSweep& sweep)
{
    const SweepContext ctx(sweep);
    SweepCounts total(sweep.ks.size(), sweep.beta_max, ctx.paths.size());
    const auto n_trials = static_cast<long long>(sweep.trials);
#pragma omp parallel
    {
        SweepCounts local(sweep.ks.size(), sweep.beta_max, ctx.paths.size());
        Recoverer learned(ctx.learned, ctx.ids);
        Recoverer complete(ctx.complete, ctx.ids);
#pragma omp for schedule(dynamic, 64)
        for (long long i = 0; i < n_trials; ++i)
            sweep_trial(ctx, learned, complete, local, static_cast<std::uint64_t>(i));
#pragma omp critical
        total.merge(local);
    }
    return finish(ctx, std::move(total));
}

PayloadSweepResult run_payload_sweep_serial(const PayloadSweep& sweep)
{
    const SweepContext ctx(sweep);
    SweepCounts total(sweep.ks.size(), sweep.beta_max, ctx.paths.size());
    Recoverer learned(ctx.learned, ctx.ids);
    Recoverer complete(ctx.complete, ctx.ids);
    for (std::uint64_t i = 0; i < sweep.trials; ++i)
        sweep_trial(ctx, learned, complete, total, i);
    return finish(ctx, std::move(total));
}

AttackOutcome run_impersonation_attack(const Topology& t, const IdentityTable& ids, std::uint32_t m,
                                       std::uint16_t k, std::size_t insertions, std::size_t trials,
                                       std::uint64_t seed, bool fooled_peer)
{
    const auto complement = complement_edges(t);
    if (complement.empty())
        throw InfeasibleError("topology has no absent edge to forge");
    AttackOutcome out;
    out.target = complement.front();
    const NodeId x = out.target.a, y = out.target.b;
    out.attacker = 0;
    while (out.attacker == x || out.attacker == y)
        ++out.attacker;
    if (out.attacker >= t.destination())
        throw InfeasibleError("no node left to act as the attacker");

    const auto total = static_cast<long long>(trials);
    std::uint64_t wins = 0;
#pragma omp parallel for reduction(+ : wins) schedule(dynamic, 1024)
    for (long long i = 0; i < total; ++i) {
        Rng rng = substream(seed, static_cast<std::uint64_t>(i));
        const std::uint32_t seq = rng.next_u32();
        auto packet = mssp_embed_walk(t, ids, m, k, seq);
        if (fooled_peer)
            packet.bloom.insert_item(ids.edge(y, x), seq);
        for (std::size_t r = 0; r < insertions; ++r)
            packet.bloom.set(static_cast<std::uint32_t>(rng.below(m)));
        if (packet.bloom.contains_item(ids.edge(x, y), seq) &&
            packet.bloom.contains_item(ids.edge(y, x), seq))
            ++wins;
    }
    out.success = FprEstimate{wins, trials};
    return out;
}

} // namespace sparseprov
