#include "sparseprov/analysis.hpp"
#include "sparseprov/delay.hpp"
#include "sparseprov/errors.hpp"
#include "sparseprov/experiment.hpp"
#include "sparseprov/identity.hpp"
#include "sparseprov/learning.hpp"
#include "sparseprov/optimize.hpp"
#include "sparseprov/provenance.hpp"
#include "sparseprov/sim.hpp"
#include "sparseprov/topology.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace sparseprov;

namespace {

enum Exit { kOk = 0, kConfig = 1, kInfeasible = 2, kCheckFailed = 3 };

struct Network {
    std::string topology;
    std::vector<std::size_t> degrees;
    std::uint64_t topology_seed = 1;
    std::string keys;
    std::uint64_t key_seed = 1;

    void add(CLI::App* app, bool allow_degrees = false)
    {
        auto* t = app->add_option("-t,--topology", topology, "edge-list file");
        if (allow_degrees) {
            auto* d = app->add_option("--degrees", degrees,
                                      "degree sequence, destination last (random realization)")
                         ->delimiter(',');
            app->add_option("--topology-seed", topology_seed, "seed for --degrees")
                ->capture_default_str();
            t->excludes(d);
        } else {
            t->required();
        }
    }
    void add_keys(CLI::App* app)
    {
        auto* k = app->add_option("--keys", keys, "key file, one hex key per line");
        app->add_option("--key-seed", key_seed, "seed for generated keys")
            ->capture_default_str()
            ->excludes(k);
    }

    Topology load() const
    {
        if (!topology.empty())
            return load_topology(topology);
        if (degrees.empty())
            throw ConfigError("give --topology or --degrees");
        return topology_with_degrees(degrees, topology_seed);
    }
    KeyRing ring(std::size_t n) const
    {
        return keys.empty() ? KeyRing::generate(n, key_seed) : load_keys(keys, n);
    }
};

DirectedPath parse_path(const std::string& s)
{
    DirectedPath p;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        try {
            p.nodes.push_back(static_cast<NodeId>(std::stoul(item)));
        } catch (const std::exception&) {
            throw ConfigError("bad node id '" + item + "' in --path");
        }
    return p;
}

EmbedMode parse_mode(const std::string& s)
{
    if (s == "DE" || s == "de")
        return EmbedMode::DE;
    if (s == "DDE" || s == "dde")
        return EmbedMode::DDE;
    throw ConfigError("mode must be DE or DDE");
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void print_learned(const Topology& truth, const LearnedTopology& learned, const std::string& out)
{
    const auto extra = surplus_edges(truth, learned);
    std::cout << "learned " << learned.edges.size() << " edges, " << extra.size()
              << " not in the topology\n";
    for (const auto& e : extra)
        std::cout << "false edge " << e.a << " " << e.b << "\n";
    if (!out.empty()) {
        std::ofstream f(out);
        write_topology(f, learned.to_topology());
        if (!f)
            throw std::runtime_error("cannot write " + out);
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bloom-filter topology learning and provenance recovery"};
    app.require_subcommand(1);

    // learn-ssmp
    Network ls_net;
    std::uint32_t ls_m = 32;
    std::uint16_t ls_k = 4;
    std::uint32_t ls_seq = 1;
    std::string ls_out;
    auto* ls = app.add_subcommand("learn-ssmp", "one packet per node, then mutual reinforcement");
    ls_net.add(ls);
    ls_net.add_keys(ls);
    ls->add_option("-m,--m", ls_m, "filter bits per node")->capture_default_str();
    ls->add_option("-k,--k", ls_k, "hash count per node")->capture_default_str();
    ls->add_option("--seq", ls_seq, "sequence number")->capture_default_str();
    ls->add_option("-o,--out", ls_out, "write the learned topology here");

    // learn-mssp
    Network lm_net;
    std::uint32_t lm_m = 224;
    std::uint16_t lm_k = 4;
    std::uint32_t lm_seq = 1;
    std::string lm_out;
    auto* lm = app.add_subcommand("learn-mssp", "one packet walking every node");
    lm_net.add(lm);
    lm_net.add_keys(lm);
    lm->add_option("-m,--m", lm_m, "filter bits")->capture_default_str();
    lm->add_option("-k,--k", lm_k, "hash count")->capture_default_str();
    lm->add_option("--seq", lm_seq, "sequence number")->capture_default_str();
    lm->add_option("-o,--out", lm_out, "write the learned topology here");

    // payload
    Network pl_net;
    std::string pl_path, pl_mode = "DE", pl_context = "learned";
    std::uint32_t pl_m = 20, pl_seq = 1;
    std::uint16_t pl_k = 4;
    std::size_t pl_beta = 1;
    bool pl_failures = false, pl_no_chain = false;
    auto* pl = app.add_subcommand("payload", "embed a path into one packet and recover it");
    pl_net.add(pl);
    pl_net.add_keys(pl);
    pl->add_option("--path", pl_path, "comma-separated node ids ending at the destination")
        ->required();
    pl->add_option("--mode", pl_mode, "DE or DDE")->capture_default_str();
    pl->add_option("-m,--m", pl_m, "filter bits")->capture_default_str();
    pl->add_option("-k,--k", pl_k, "hash count")->capture_default_str();
    pl->add_option("--beta", pl_beta, "hash-chain verification budget")->capture_default_str();
    pl->add_flag("--beta-counts-failures", pl_failures,
                 "beta bounds failed verifications only");
    pl->add_flag("--no-chain", pl_no_chain, "accept only a unique candidate");
    pl->add_option("--context", pl_context, "learned or complete")->capture_default_str();
    pl->add_option("--seq", pl_seq, "sequence number")->capture_default_str();

    // analyze
    Network an_net;
    std::uint32_t an_m = 32;
    std::vector<std::uint16_t> an_k = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    auto* an = app.add_subcommand("analyze", "closed-form learning false-positive rates");
    an_net.add(an, true);
    an->add_option("-m,--m", an_m, "SSMP bits per node; MSSP uses m*(n-1)")
        ->capture_default_str();
    an->add_option("-k,--k", an_k, "hash counts")->delimiter(',');

    // optimize
    Network op_net;
    std::uint64_t op_sum = 280;
    std::uint32_t op_gran = 16, op_min = 16;
    std::uint16_t op_kmax = kDefaultMaxK;
    std::string op_scheme = "ssmp-variable";
    auto* op = app.add_subcommand("optimize", "choose filter sizes and hash counts");
    op_net.add(op, true);
    op->add_option("--m-sum", op_sum, "total bits")->capture_default_str();
    op->add_option("--granularity", op_gran, "allocation step in bits")->capture_default_str();
    op->add_option("--min-per-node", op_min, "smallest filter per node")->capture_default_str();
    op->add_option("--k-max", op_kmax, "largest hash count tried")->capture_default_str();
    op->add_option("--scheme", op_scheme, "ssmp-variable, ssmp-equal or mssp")
        ->capture_default_str();

    // simulate
    Network si_net;
    std::string si_scheme = "ssmp", si_context = "learned";
    std::uint32_t si_m = 32;
    std::vector<std::uint16_t> si_k = {4};
    std::size_t si_trials = 10000, si_hops = 4, si_beta = 1, si_min_paths = 4;
    std::uint64_t si_seed = 1;
    long si_source = -1;
    auto* si = app.add_subcommand("simulate", "Monte Carlo false-positive rate");
    si_net.add(si);
    si->add_option("--key-seed", si_net.key_seed, "seed for generated keys")
        ->capture_default_str();
    si->add_option("--scheme", si_scheme, "ssmp, mssp, de or dde")->capture_default_str();
    si->add_option("-m,--m", si_m, "filter bits (per node for ssmp)")->capture_default_str();
    si->add_option("-k,--k", si_k, "hash counts")->delimiter(',');
    si->add_option("--trials", si_trials)->capture_default_str();
    si->add_option("--seed", si_seed)->capture_default_str();
    si->add_option("--source", si_source, "payload source; default picks one");
    si->add_option("--min-paths", si_min_paths, "paths the picked source must have")
        ->capture_default_str();
    si->add_option("--hops", si_hops)->capture_default_str();
    si->add_option("--beta", si_beta)->capture_default_str();
    si->add_option("--context", si_context, "learned or complete")->capture_default_str();

    // delay
    Network de_net;
    std::uint32_t de_m = 32;
    std::uint16_t de_k = 4;
    std::size_t de_hops = 4, de_beta = 1;
    DelayParams de_p{42e-6, 10e-6, 70e-6, 70e-6, 0.5e-3, 0.0};
    auto* dl = app.add_subcommand("delay", "analytic delay model");
    de_net.add(dl);
    dl->add_option("-m,--m", de_m, "SSMP bits per node")->capture_default_str();
    dl->add_option("-k,--k", de_k)->capture_default_str();
    dl->add_option("--hops", de_hops, "payload path length")->capture_default_str();
    dl->add_option("--beta", de_beta)->capture_default_str();
    dl->add_option("--t-hN", de_p.t_hN, "seconds per node hash")->capture_default_str();
    dl->add_option("--t-hR", de_p.t_hR, "seconds per destination hash")->capture_default_str();
    dl->add_option("--t-qN", de_p.t_qN, "relay queueing")->capture_default_str();
    dl->add_option("--t-qR", de_p.t_qR, "destination queueing")->capture_default_str();
    dl->add_option("--t-pr", de_p.t_pr, "per-hop propagation")->capture_default_str();
    dl->add_option("--t-cmp-R", de_p.t_cmp_R, "per reinforcement comparison")
        ->capture_default_str();

    // experiment
    std::string ex_config, ex_out;
    bool ex_check = false;
    auto* ex = app.add_subcommand("experiment", "run a figure recipe from a config file");
    ex->add_option("-c,--config", ex_config)->required();
    ex->add_option("-o,--out", ex_out, "output directory (overrides the config)");
    ex->add_flag("--check", ex_check, "exit 3 if any recipe check fails");

    // gen-topology
    std::size_t gt_nodes = 8, gt_edges = 14;
    std::vector<std::size_t> gt_degrees;
    std::uint64_t gt_seed = 1;
    std::string gt_out;
    auto* gt = app.add_subcommand("gen-topology", "random connected sparse graph");
    gt->add_option("--nodes", gt_nodes)->capture_default_str();
    gt->add_option("--edges", gt_edges)->capture_default_str();
    gt->add_option("--degrees", gt_degrees, "degree sequence instead of nodes/edges")
        ->delimiter(',');
    gt->add_option("--seed", gt_seed)->capture_default_str();
    gt->add_option("-o,--out", gt_out, "file; stdout if absent");

    // gen-keys
    std::size_t gk_nodes = 8;
    std::uint64_t gk_seed = 1;
    std::string gk_out;
    auto* gk = app.add_subcommand("gen-keys", "deterministic key file");
    gk->add_option("--nodes", gk_nodes)->capture_default_str();
    gk->add_option("--seed", gk_seed)->capture_default_str();
    gk->add_option("-o,--out", gk_out, "file; stdout if absent");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*ls) {
            const auto t = ls_net.load();
            const std::size_t n = t.node_count();
            const IdentityTable ids(ls_net.ring(n));
            const auto params = SsmpParams::equal(n, ls_m, ls_k);
            std::vector<LearningPacket> packets;
            for (NodeId i = 0; i + 1 < n; ++i)
                packets.push_back(ssmp_embed(t, ids, i, params, ls_seq));
            print_learned(t, ssmp_recover(packets, ids, params, t.neighbors(t.destination())),
                          ls_out);
        } else if (*lm) {
            const auto t = lm_net.load();
            const IdentityTable ids(lm_net.ring(t.node_count()));
            const auto packet = mssp_embed_walk(t, ids, lm_m, lm_k, lm_seq);
            std::cout << "walk of " << mssp_walk(t).size() - 1 << " hops\n";
            print_learned(t, mssp_recover(packet, ids, t.neighbors(t.destination())), lm_out);
        } else if (*pl) {
            const auto t = pl_net.load();
            const auto mode = parse_mode(pl_mode);
            const IdentityTable ids(pl_net.ring(t.node_count()), mode == EmbedMode::DDE);
            const auto path = parse_path(pl_path);
            const auto packet = transmit(mode, t, ids, path, pl_m, pl_k, pl_seq);
            if (pl_context != "learned" && pl_context != "complete")
                throw ConfigError("context must be learned or complete");
            const auto graph = pl_context == "learned" ? ContextGraph::learned(t)
                                                        : ContextGraph::complete(t.node_count());
            RecoveryOptions opt{pl_beta, pl_failures ? BetaRule::Failures : BetaRule::Attempts,
                                pl_no_chain};
            const auto r = recover(packet, ids, graph, mode, opt);
            static const char* names[] = {"recovered", "false-positive", "exhausted"};
            std::cout << "outcome " << names[static_cast<int>(r.outcome)] << "\n"
                      << "candidates " << r.candidate_paths << "\n"
                      << "chain checks " << r.paths_checked << "\n";
            if (r.path) {
                std::cout << "path";
                for (auto v : r.path->nodes)
                    std::cout << " " << v;
                std::cout << "\n";
            }
        } else if (*an) {
            const auto t = an_net.load();
            const auto prof = neighbor_profile(t);
            const std::size_t n = t.node_count();
            const std::uint32_t m_total = an_m * static_cast<std::uint32_t>(n - 1);
            const auto cc = complement_count(prof);
            std::cout << "# n=" << n << " edges=" << t.edge_count()
                      << " complement=" << cc.complement_size << "\n";
            std::cout << "k,ssmp_exact,ssmp_bound,mssp,impersonation_bound\n";
            for (auto k : an_k) {
                if (k == 0 || k > an_m)
                    throw ConfigError("k must lie in [1, m]");
                const auto p = SsmpParams::equal(n, an_m, k);
                std::cout << k << "," << fmt(ssmp_fpr_exact(t, p)) << ","
                          << fmt(ssmp_fpr_bound(prof, p)) << "," << fmt(mssp_fpr(prof, m_total, k))
                          << "," << fmt(impersonation_success_bound(prof, m_total, k)) << "\n";
            }
        } else if (*op) {
            const auto t = op_net.load();
            const auto prof = neighbor_profile(t);
            if (op_scheme == "mssp") {
                const auto o = solve_mssp(prof, static_cast<std::uint32_t>(op_sum), op_kmax);
                std::cout << "m " << o.m << "\nk " << o.k << "\nfpr " << fmt(o.objective) << "\n";
            } else {
                SsmpBudget b{op_sum, op_gran, op_min, op_kmax};
                SsmpOptimum o;
                if (op_scheme == "ssmp-equal")
                    o = solve_ssmp_equal(prof, b);
                else if (op_scheme == "ssmp-variable")
                    o = solve_ssmp_variable(prof, b);
                else
                    throw ConfigError("unknown scheme " + op_scheme);
                std::cout << "m";
                for (auto v : o.params.m)
                    std::cout << " " << v;
                std::cout << "\nk";
                for (auto v : o.params.k)
                    std::cout << " " << v;
                std::cout << "\nbound " << fmt(o.objective) << "\nexact "
                          << fmt(ssmp_fpr_exact(t, o.params)) << "\nleftover_bits "
                          << o.leftover_bits << "\nevaluated " << o.evaluated
                          << (o.exhaustive ? " (exhaustive)" : " (local search)") << "\n";
            }
        } else if (*si) {
            const auto t = si_net.load();
            const std::size_t n = t.node_count();
            std::cout << "k,fpr,stderr\n";
            for (auto k : si_k) {
                TrialPlan plan;
                plan.trials = si_trials;
                plan.seed = si_seed;
                plan.key_seed = si_net.key_seed;
                plan.topology = t;
                plan.m = si_m;
                plan.k = k;
                if (si_scheme == "ssmp") {
                    plan.scheme = Scheme::SSMP;
                    plan.ssmp = SsmpParams::equal(n, si_m, k);
                } else if (si_scheme == "mssp") {
                    plan.scheme = Scheme::MSSP;
                } else {
                    plan.scheme = parse_mode(si_scheme) == EmbedMode::DE ? Scheme::DE : Scheme::DDE;
                    plan.h = si_hops;
                    plan.source = si_source >= 0 ? static_cast<NodeId>(si_source)
                                                 : pick_source(t, si_hops, si_min_paths);
                    plan.recovery.beta = si_beta;
                    if (si_context == "complete")
                        plan.topology_mode = TopologyMode::Complete;
                    else if (si_context != "learned")
                        throw ConfigError("context must be learned or complete");
                }
                const auto est = run_trials(plan);
                std::cout << k << "," << fmt(est.rate()) << "," << fmt(est.std_error()) << "\n";
            }
        } else if (*dl) {
            const auto t = de_net.load();
            const std::size_t n = t.node_count();
            std::vector<DelayComponent> rows;
            for (auto& c : delay_ssmp(t, SsmpParams::equal(n, de_m, de_k), de_p).components())
                rows.push_back(c);
            for (auto& c : delay_mssp(t, de_k, de_p).components())
                rows.push_back(c);
            const auto learned = ContextGraph::learned(t);
            const auto complete = ContextGraph::complete(n);
            for (auto mode : {EmbedMode::DE, EmbedMode::DDE}) {
                const std::string base = mode == EmbedMode::DE ? "payload-de" : "payload-dde";
                for (auto& c : delay_payload(mode, de_hops, de_k, de_beta, learned, de_p)
                                   .components(base + "-learned"))
                    rows.push_back(c);
                for (auto& c : delay_payload(mode, de_hops, de_k, de_beta, complete, de_p)
                                   .components(base + "-complete"))
                    rows.push_back(c);
            }
            std::cout << "phase,component,seconds\n";
            for (const auto& r : rows)
                std::cout << r.phase << "," << r.component << "," << fmt(r.seconds) << "\n";
        } else if (*ex) {
            auto cfg = load_config(ex_config);
            if (!ex_out.empty())
                cfg.output = ex_out;
            if (cfg.output.empty())
                throw ConfigError("no output directory: set 'output' or pass --out");
            const auto report = run_experiment(cfg);
            write_report(report, cfg.output);
            for (const auto& c : report.checks)
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name
                          << (c.detail.empty() ? "" : "  [" + c.detail + "]") << "\n";
            std::cout << "wrote " << cfg.output << " in " << fmt(report.wall_seconds) << " s\n";
            if (ex_check && !report.all_passed())
                return kCheckFailed;
        } else if (*gt) {
            const auto t = gt_degrees.empty() ? random_sparse_topology(gt_nodes, gt_edges, gt_seed)
                                              : topology_with_degrees(gt_degrees, gt_seed);
            if (gt_out.empty()) {
                write_topology(std::cout, t);
            } else {
                std::ofstream f(gt_out);
                write_topology(f, t);
                if (!f)
                    throw std::runtime_error("cannot write " + gt_out);
            }
        } else if (*gk) {
            const auto ring = KeyRing::generate(gk_nodes, gk_seed);
            if (gk_out.empty()) {
                write_keys(std::cout, ring);
            } else {
                std::ofstream f(gk_out);
                write_keys(f, ring);
                if (!f)
                    throw std::runtime_error("cannot write " + gk_out);
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const CapExceededError& e) {
        std::cerr << "cap exceeded: " << e.what() << "\n";
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfig;
    }
    return kOk;
}
