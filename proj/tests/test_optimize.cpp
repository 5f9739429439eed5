#include "oracles.hpp"

#include "sparseprov/errors.hpp"
#include "sparseprov/optimize.hpp"

#include <doctest.h>

#include <functional>

using namespace sparseprov;

namespace {

const std::vector<std::size_t> kDegrees = {5, 3, 4, 1, 4, 2, 4, 5};

std::uint16_t oracle_node_k(std::uint32_t m, std::uint64_t gamma, std::uint16_t k_max)
{
    std::uint16_t best = 1;
    long double best_f = 2;
    for (std::uint16_t k = 1; k <= std::min<std::uint32_t>(m, k_max); ++k) {
        const long double f = oracle::item_fp(m, k, gamma);
        if (f < best_f * (1 - 1e-12L)) {
            best_f = f;
            best = k;
        }
    }
    return best;
}

} // namespace

TEST_SUITE("optimize")
{
    TEST_CASE("MSSP optimum scans every k")
    {
        const auto prof = neighbor_profile(topology_with_degrees(kDegrees, 1));
        const auto c = complement_count(prof);
        for (std::uint32_t m : {24u, 32u, 64u}) {
            const auto opt = solve_mssp(prof, m, 16);
            REQUIRE(opt.scan.size() == 16);
            std::uint16_t want = 1;
            long double best = 2;
            for (std::uint16_t k = 1; k <= 16; ++k) {
                const long double v = oracle::mssp_double_sum(m, k, c.edges_embedded - prof.gamma_rsu,
                                                              static_cast<unsigned>(c.complement_size));
                CHECK(opt.scan[k - 1].value == doctest::Approx(static_cast<double>(v)).epsilon(1e-8));
                if (v < best * (1 - 1e-9L)) {
                    best = v;
                    want = k;
                }
            }
            CHECK(opt.k == want);
            CHECK(opt.m == m);
        }
        CHECK(solve_mssp(prof, 4).scan.size() == 4);
        CHECK_THROWS_AS(solve_mssp(prof, 0), ConfigError);
    }

    TEST_CASE("per-node k")
    {
        for (std::uint32_t m : {16u, 32u, 48u})
            for (std::uint64_t g : {1u, 2u, 5u})
                CHECK(best_node_k(m, g, 20) == oracle_node_k(m, g, 20));
        // near the ln 2 * m / items rule of thumb
        CHECK(std::abs(int(best_node_k(64, 4)) - 11) <= 2);
    }

    TEST_CASE("equal split")
    {
        const auto prof = neighbor_profile(topology_with_degrees(kDegrees, 1));
        SsmpBudget b;
        b.m_sum = 230;
        const auto opt = solve_ssmp_equal(prof, b);
        CHECK(opt.leftover_bits == 230 - 7 * 32);
        CHECK(opt.params.m == std::vector<std::uint32_t>(7, 32));
        double best = 2;
        for (const auto& s : opt.scan)
            best = std::min(best, s.value);
        CHECK(opt.objective.value + opt.objective.excess == doctest::Approx(best));
        b.m_sum = 6;
        CHECK_THROWS_AS(solve_ssmp_equal(prof, b), InfeasibleError);
    }

    TEST_CASE("variable allocation matches brute force on a small budget")
    {
        const Topology t(5, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {3, 4}, {2, 4}});
        const auto prof = neighbor_profile(t);
        for (std::uint64_t m_sum : {96u, 100u, 128u}) {
            SsmpBudget b;
            b.m_sum = m_sum;
            b.k_max = 12;
            const auto opt = solve_ssmp_variable(prof, b);
            CHECK(opt.exhaustive);

            // every composition, with the sub-granularity remainder on each node
            long double best = 10;
            const std::uint64_t units = m_sum / 16, rem = m_sum % 16;
            std::vector<std::uint32_t> m(4);
            std::function<void(std::size_t, std::uint64_t)> rec = [&](std::size_t i, std::uint64_t left) {
                if (i == 3) {
                    m[3] = static_cast<std::uint32_t>(16 * (1 + left));
                    for (std::size_t r = 0; r < 4; ++r) {
                        auto mm = m;
                        mm[r] += static_cast<std::uint32_t>(rem);
                        std::vector<std::uint16_t> k(4);
                        for (std::size_t x = 0; x < 4; ++x)
                            k[x] = oracle_node_k(mm[x], prof.gamma[x], 12);
                        best = std::min(best, oracle::ssmp_bound(prof.gamma, mm, k));
                        if (rem == 0)
                            break;
                    }
                    return;
                }
                for (std::uint64_t x = 0; x <= left; ++x) {
                    m[i] = static_cast<std::uint32_t>(16 * (1 + x));
                    rec(i + 1, left - x);
                }
            };
            rec(0, units - 4);
            // the equal split is a candidate too
            {
                std::vector<std::uint32_t> eq(4, static_cast<std::uint32_t>(m_sum / 4));
                std::vector<std::uint16_t> k(4);
                for (std::size_t x = 0; x < 4; ++x)
                    k[x] = oracle_node_k(eq[x], prof.gamma[x], 12);
                best = std::min(best, oracle::ssmp_bound(prof.gamma, eq, k));
            }
            CHECK(opt.objective.value + opt.objective.excess ==
                  doctest::Approx(static_cast<double>(best)).epsilon(1e-9));
            CHECK(opt.params.m_sum() <= m_sum);
            CHECK(opt.leftover_bits == m_sum - opt.params.m_sum());
            opt.params.validate(5);
        }
    }

    TEST_CASE("variable allocation never loses to the equal split")
    {
        const auto prof = neighbor_profile(topology_with_degrees(kDegrees, 1));
        for (std::uint64_t m_sum : {160u, 224u, 280u, 400u}) {
            SsmpBudget b;
            b.m_sum = m_sum;
            const auto eq = solve_ssmp_equal(prof, b);
            const auto var = solve_ssmp_variable(prof, b);
            CHECK(var.objective.value + var.objective.excess <=
                  eq.objective.value + eq.objective.excess + 1e-15);
            for (std::size_t i = 0; i < 7; ++i)
                CHECK(var.params.m[i] >= 16);
        }
        // greedy path on a larger network
        const auto big = neighbor_profile(random_sparse_topology(20, 34, 1));
        SsmpBudget b;
        b.m_sum = 19 * 48;
        const auto var = solve_ssmp_variable(big, b, 1000);
        CHECK_FALSE(var.exhaustive);
        CHECK(var.objective.value <= solve_ssmp_equal(big, b).objective.value + 1e-15);
        b.m_sum = 19 * 16 - 1;
        CHECK_THROWS_AS(solve_ssmp_variable(big, b), InfeasibleError);
    }
}
