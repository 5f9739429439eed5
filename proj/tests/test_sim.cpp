#include "sparseprov/analysis.hpp"
#include "sparseprov/errors.hpp"
#include "sparseprov/sim.hpp"

#include <doctest.h>

#include <cmath>

using namespace sparseprov;

namespace {

const std::vector<std::size_t> kDegrees = {5, 3, 4, 1, 4, 2, 4, 5};

TrialPlan ssmp_plan(std::size_t trials)
{
    TrialPlan p;
    p.scheme = Scheme::SSMP;
    p.topology = topology_with_degrees(kDegrees, 1);
    p.ssmp = SsmpParams::equal(8, 16, 2);
    p.trials = trials;
    p.seed = 7;
    return p;
}

TrialPlan payload_plan(Scheme s, std::size_t beta)
{
    TrialPlan p;
    p.scheme = s;
    p.topology = random_sparse_topology(20, 34, 1);
    p.m = 20;
    p.k = 3;
    p.h = 4;
    p.source = 0;
    p.trials = 3000;
    p.seed = 11;
    p.recovery.beta = beta;
    return p;
}

} // namespace

TEST_SUITE("sim")
{
    TEST_CASE("parallel and serial runners agree exactly")
    {
        auto p = ssmp_plan(3000);
        auto a = run_trials(p), b = run_trials_serial(p);
        CHECK(a.errors == b.errors);

        p.scheme = Scheme::MSSP;
        p.m = 40;
        p.k = 3;
        a = run_trials(p);
        b = run_trials_serial(p);
        CHECK(a.errors == b.errors);

        for (Scheme s : {Scheme::DE, Scheme::DDE}) {
            auto q = payload_plan(s, 2);
            q.trials = 1500;
            CHECK(run_trials(q).errors == run_trials_serial(q).errors);
            q.topology_mode = TopologyMode::Complete;
            CHECK(run_trials(q).errors == run_trials_serial(q).errors);
        }
    }

    TEST_CASE("results depend only on the seed")
    {
        auto p = ssmp_plan(2000);
        const auto a = run_trials(p);
        CHECK(run_trials(p).errors == a.errors);
        p.seed = 8;
        const auto b = run_trials(p);
        CHECK(b.trials == a.trials);
        CHECK(a.errors + b.errors > 0);
    }

    TEST_CASE("standard error")
    {
        CHECK(FprEstimate{0, 100}.std_error() == 0.0);
        CHECK(FprEstimate{25, 100}.std_error() == doctest::Approx(std::sqrt(0.25 * 0.75 / 100)));
        CHECK(FprEstimate{25, 100}.std_error() ==
              doctest::Approx(2 * FprEstimate{100, 400}.std_error()));
        CHECK(FprEstimate{}.rate() == 0.0);
    }

    TEST_CASE("learning simulation agrees with the closed forms")
    {
        auto p = ssmp_plan(20000);
        const double exact = ssmp_fpr_exact(p.topology, p.ssmp);
        const auto est = run_trials(p);
        const double sigma = std::sqrt(exact * (1 - exact) / est.trials);
        CHECK(std::fabs(est.rate() - exact) <= 4 * sigma);

        p.scheme = Scheme::MSSP;
        p.m = 48;
        p.k = 3;
        const double mexact = mssp_fpr(neighbor_profile(p.topology), p.m, p.k);
        const auto mest = run_trials(p);
        const double msigma = std::sqrt(mexact * (1 - mexact) / mest.trials);
        CHECK(std::fabs(mest.rate() - mexact) <= 4 * msigma);
    }

    TEST_CASE("sweep reproduces single-configuration runs")
    {
        for (EmbedMode mode : {EmbedMode::DE, EmbedMode::DDE}) {
            PayloadSweep s;
            s.topology = random_sparse_topology(20, 34, 1);
            s.h = 4;
            s.mode = mode;
            s.m = 20;
            s.ks = {2, 4};
            s.beta_max = 3;
            s.trials = 2000;
            s.seed = 5;
            const auto r = run_payload_sweep(s);
            CHECK(r == run_payload_sweep_serial(s));
            std::uint64_t drawn = 0;
            for (auto d : r.path_draws)
                drawn += d;
            CHECK(drawn == s.trials);
            CHECK(r.paths == enumerate_paths(s.topology, 0, 4));

            for (std::size_t ki = 0; ki < 2; ++ki)
                for (std::size_t beta = 1; beta <= 3; ++beta) {
                    TrialPlan p = payload_plan(mode == EmbedMode::DE ? Scheme::DE : Scheme::DDE, beta);
                    p.topology = s.topology;
                    p.k = s.ks[ki];
                    p.trials = s.trials;
                    p.seed = s.seed;
                    CHECK(r.estimate(ki, TopologyMode::Learned, beta).errors == run_trials(p).errors);
                    p.topology_mode = TopologyMode::Complete;
                    CHECK(r.estimate(ki, TopologyMode::Complete, beta).errors == run_trials(p).errors);

                    // learned candidates are a subset of the complete graph's,
                    // in the same order
                    CHECK(r.estimate(ki, TopologyMode::Learned, beta).errors <=
                          r.estimate(ki, TopologyMode::Complete, beta).errors);
                    if (beta > 1)
                        CHECK(r.estimate(ki, TopologyMode::Learned, beta).errors <=
                              r.estimate(ki, TopologyMode::Learned, beta - 1).errors);
                }
            CHECK_THROWS_AS(r.estimate(0, TopologyMode::Learned, 4), ConfigError);
        }
    }

    TEST_CASE("no_chain and beta rules in the runner")
    {
        auto p = payload_plan(Scheme::DE, 1);
        p.trials = 2000;
        const auto attempts = run_trials(p);
        p.recovery.no_chain = true;
        const auto unique = run_trials(p);
        // at beta = 1 both accept only a first candidate that is also the
        // true path, and a unique candidate is the true path
        CHECK(unique.errors >= attempts.errors);
        p.recovery.no_chain = false;
        p.recovery.rule = BetaRule::Failures;
        CHECK(run_trials(p).errors <= attempts.errors);
    }

    TEST_CASE("fixed path sampling")
    {
        auto p = payload_plan(Scheme::DE, 1);
        p.sampling = PathSampling::Fixed;
        const auto paths = enumerate_paths(p.topology, 0, 4);
        p.fixed_path = paths.back();
        p.trials = 500;
        const auto est = run_trials(p);
        CHECK(est.trials == 500);
        p.fixed_path = DirectedPath{{0, 19}};
        CHECK_THROWS_AS(run_trials(p), ConfigError);
    }

    TEST_CASE("plan validation")
    {
        auto p = ssmp_plan(0);
        CHECK_THROWS_AS(run_trials(p), ConfigError);
        p = ssmp_plan(10);
        p.ssmp.k[0] = 0;
        CHECK_THROWS_AS(run_trials(p), ConfigError);
        auto q = payload_plan(Scheme::DDE, 1);
        q.h = 1;
        CHECK_THROWS_AS(run_trials(q), ConfigError);
        q = payload_plan(Scheme::DE, 0);
        CHECK_THROWS_AS(run_trials(q), ConfigError);
        q = payload_plan(Scheme::DE, 1);
        q.topology = Topology(4, {{0, 1}, {1, 2}, {2, 3}});
        q.h = 2;
        CHECK_THROWS_AS(run_trials(q), InfeasibleError);
    }

    TEST_CASE("impersonation attack")
    {
        const auto t = topology_with_degrees(kDegrees, 1);
        const IdentityTable ids(KeyRing::generate(8, 1));
        const auto none = run_impersonation_attack(t, ids, 256, 4, 0, 2000, 3);
        CHECK(none.success.errors <= 2);
        CHECK(t.has_edge(none.target.a, none.target.b) == false);
        CHECK(none.attacker != none.target.a);
        CHECK(none.attacker != none.target.b);

        const auto flood = run_impersonation_attack(t, ids, 32, 4, 32 * 12, 2000, 3);
        CHECK(flood.success.rate() > 0.95);

        const auto some = run_impersonation_attack(t, ids, 64, 4, 20, 4000, 3);
        const auto some_fooled = run_impersonation_attack(t, ids, 64, 4, 20, 4000, 3, true);
        CHECK(some_fooled.success.errors >= some.success.errors);

        const Topology full(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}});
        CHECK_THROWS_AS(run_impersonation_attack(full, IdentityTable(KeyRing::generate(4, 1)), 32,
                                                 2, 1, 10, 1),
                        InfeasibleError);
    }
}
