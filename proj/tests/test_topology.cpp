#include "oracles.hpp"

#include "sparseprov/analysis.hpp"
#include "sparseprov/errors.hpp"
#include "sparseprov/topology.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace sparseprov;

namespace {

Topology path_graph(std::size_t n)
{
    std::vector<Edge> e;
    for (NodeId i = 0; i + 1 < n; ++i)
        e.emplace_back(i, i + 1);
    return Topology(n, e);
}

Topology complete_graph(std::size_t n)
{
    std::vector<Edge> e;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j)
            e.emplace_back(i, j);
    return Topology(n, e);
}

} // namespace

TEST_SUITE("topology")
{
    TEST_CASE("neighbor profiles")
    {
        auto p = neighbor_profile(path_graph(4));
        CHECK(p.gamma == std::vector<std::size_t>{1, 2, 2});
        CHECK(p.gamma_rsu == 1);

        p = neighbor_profile(complete_graph(4));
        CHECK(p.gamma == std::vector<std::size_t>{3, 3, 3});
        CHECK(p.gamma_rsu == 3);

        const Topology star(5, {{0, 4}, {1, 4}, {2, 4}, {3, 4}});
        p = neighbor_profile(star);
        CHECK(p.gamma == std::vector<std::size_t>{1, 1, 1, 1});
        CHECK(p.gamma_rsu == 4);
    }

    TEST_CASE("complement edges")
    {
        const Topology cyc(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
        CHECK(complement_edges(cyc) == std::vector<Edge>{{0, 2}});
        CHECK(complement_edges(complete_graph(6)).empty());

        // gamma = [2, 1, 1], gamma_rsu = 2
        const Topology w(4, {{0, 1}, {0, 3}, {2, 3}});
        const auto prof = neighbor_profile(w);
        CHECK(prof.gamma == std::vector<std::size_t>{2, 1, 1});
        CHECK(prof.gamma_rsu == 2);
        CHECK(complement_edges(w).size() == 2);
        CHECK(complement_count(prof).complement_size == 2);
    }

    TEST_CASE("complement size agrees with the degree formula on random graphs")
    {
        for (std::uint64_t seed = 1; seed <= 200; ++seed) {
            const std::size_t n = 4 + seed % 17;
            const std::size_t lo = n - 1, hi = n * (n - 1) / 2;
            const std::size_t e = lo + (seed * 7919) % (hi - lo + 1);
            const auto t = random_sparse_topology(n, e, seed);
            const auto prof = neighbor_profile(t);
            const auto c = complement_edges(t);
            REQUIRE(c.size() == oracle::prop1_complement(n, prof.gamma, prof.gamma_rsu));
            CHECK(c == oracle::complement(t));
        }
    }

    TEST_CASE("path enumeration against exhaustive search")
    {
        auto t = path_graph(4);
        auto p = enumerate_paths(t, 0, 3);
        REQUIRE(p.size() == 1);
        CHECK(p[0].nodes == std::vector<NodeId>{0, 1, 2, 3});
        CHECK(enumerate_paths(t, 0, 2).empty());

        const Topology chord(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}});
        for (NodeId s = 0; s < 3; ++s)
            for (std::size_t h = 1; h <= 3; ++h) {
                auto got = enumerate_paths(chord, s, h);
                std::sort(got.begin(), got.end());
                CHECK(got == oracle::paths(chord, s, h));
            }

        p = enumerate_paths(chord, 2, 1);
        REQUIRE(p.size() == 1);
        CHECK(p[0].nodes == std::vector<NodeId>{2, 3});

        for (std::uint64_t seed = 1; seed <= 25; ++seed) {
            const auto r = random_sparse_topology(9, 12 + seed % 10, seed);
            for (std::size_t h = 1; h <= 5; ++h) {
                auto got = enumerate_paths(r, static_cast<NodeId>(seed % 8), h);
                for (const auto& q : got) {
                    CHECK(is_valid_path(r, q));
                    CHECK(q.hops() == h);
                }
                std::sort(got.begin(), got.end());
                CHECK(std::adjacent_find(got.begin(), got.end()) == got.end());
                CHECK(got == oracle::paths(r, static_cast<NodeId>(seed % 8), h));
            }
        }
    }

    TEST_CASE("path enumeration cap and argument errors")
    {
        const auto k = complete_graph(9);
        CHECK_THROWS_AS(enumerate_paths(k, 0, 6, 10), CapExceededError);
        CHECK_THROWS_AS(enumerate_paths(k, 8, 2), ConfigError);
        CHECK_THROWS_AS(enumerate_paths(k, 0, 0), ConfigError);
    }

    TEST_CASE("random sparse graphs")
    {
        for (auto [n, e] : {std::pair<std::size_t, std::size_t>{8, 14}, {20, 34}, {20, 54}, {2, 1},
                            {10, 45}}) {
            const auto t = random_sparse_topology(n, e, 1);
            CHECK(t.node_count() == n);
            CHECK(t.edge_count() == e);
            CHECK(oracle::connected(t));
            std::size_t degsum = 0;
            for (NodeId v = 0; v < n; ++v)
                degsum += t.degree(v);
            CHECK(degsum == 2 * e);
        }
        CHECK(random_sparse_topology(20, 34, 5) == random_sparse_topology(20, 34, 5));
        CHECK_FALSE(random_sparse_topology(20, 34, 5) == random_sparse_topology(20, 34, 6));
        CHECK_THROWS_AS(random_sparse_topology(8, 6, 1), InfeasibleError);
        CHECK_THROWS_AS(random_sparse_topology(8, 29, 1), InfeasibleError);
    }

    TEST_CASE("graphs with a prescribed degree sequence")
    {
        const std::vector<std::size_t> deg = {5, 3, 4, 1, 4, 2, 4, 5};
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            const auto t = topology_with_degrees(deg, seed);
            CHECK(oracle::connected(t));
            for (NodeId v = 0; v < deg.size(); ++v)
                CHECK(t.degree(v) == deg[v]);
        }
        CHECK_THROWS_AS(topology_with_degrees({3, 3, 1}, 1), InfeasibleError);
        CHECK_THROWS_AS(topology_with_degrees({1, 1, 1, 1}, 1), InfeasibleError);
    }

    TEST_CASE("hop distances against relaxation")
    {
        for (std::uint64_t seed = 1; seed <= 30; ++seed) {
            const auto t = random_sparse_topology(15, 14 + seed, seed);
            CHECK(t.hops_to_destination() == oracle::distances(t));
        }
    }

    TEST_CASE("construction rejects invalid graphs")
    {
        CHECK_THROWS_AS(Topology(3, {{0, 0}, {1, 2}}), ConfigError);
        CHECK_THROWS_AS(Topology(3, {{0, 5}}), ConfigError);
        CHECK_THROWS_AS(Topology(3, {{0, 1}, {1, 0}, {1, 2}}), ConfigError);
        CHECK_THROWS_AS(Topology(4, {{0, 1}, {2, 3}}), ConfigError);
        CHECK_THROWS_AS(Topology(1, {}), ConfigError);
    }

    TEST_CASE("edge-list file format")
    {
        const auto t = random_sparse_topology(12, 20, 3);
        std::stringstream ss;
        write_topology(ss, t);
        CHECK(read_topology(ss) == t);

        std::stringstream commented("# fixture\nn 3 dest 2\n0 1  # first\n\n1 2\n");
        CHECK(read_topology(commented).edge_count() == 2);

        auto line_of = [](const std::string& text) {
            std::stringstream in(text);
            try {
                read_topology(in);
            } catch (const ConfigError& e) {
                return std::string(e.what());
            }
            return std::string();
        };
        CHECK(line_of("n 3 dest 2\n0 1\n1 x\n").find("line 3") != std::string::npos);
        CHECK(line_of("n 3 dest 1\n").find("line 1") != std::string::npos);
        CHECK(line_of("nodes 3\n").find("line 1") != std::string::npos);
        CHECK(line_of("n 3 dest 2\n0 1 2\n").find("line 2") != std::string::npos);
        CHECK_FALSE(line_of("").empty());
    }
}
