#include "sparseprov/errors.hpp"
#include "sparseprov/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

using namespace sparseprov;
namespace fs = std::filesystem;

namespace {

std::string parse_error(const std::string& text)
{
    std::istringstream in(text);
    try {
        parse_config(in);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

ExperimentConfig parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

fs::path scratch_dir(const std::string& name)
{
    const auto p = fs::temp_directory_path() /
                   ("sparseprov-test-" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p.parent_path());
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::vector<std::string>> cells(const std::string& csv)
{
    std::vector<std::vector<std::string>> out;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            row.push_back(cell);
        if (!line.empty() && line.back() == ',')
            row.emplace_back();
        out.push_back(row);
    }
    return out;
}

bool same_cell(const std::string& a, const std::string& b)
{
    if (a == b)
        return true;
    char* ea = nullptr;
    char* eb = nullptr;
    const double x = std::strtod(a.c_str(), &ea);
    const double y = std::strtod(b.c_str(), &eb);
    if (*ea || *eb || a.empty() || b.empty())
        return false;
    return std::fabs(x - y) <= 1e-8 * std::max(std::fabs(x), std::fabs(y)) + 1e-300;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(SPARSEPROV_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_SUITE("experiment")
{
    TEST_CASE("config syntax")
    {
        const auto c = parse("# fig 7 style run\n"
                             "experiment = fig7\n"
                             "nodes = 20   # twenty\n"
                             "edges = 34, 54\n"
                             "k = 1..4, 7\n"
                             "beta = 1..2\n"
                             "trials = 100\n");
        CHECK(c.recipe == Recipe::Fig7);
        CHECK(c.fixture.nodes == 20);
        CHECK(c.fixture.edges == std::vector<std::size_t>{34, 54});
        CHECK(c.k == std::vector<std::uint16_t>{1, 2, 3, 4, 7});
        CHECK(c.beta == std::vector<std::size_t>{1, 2});
        CHECK(c.trials == 100);
        CHECK(c.m == std::vector<std::uint32_t>{20});

        const auto d = parse("experiment = delay\nt_pr = 2ms\nt_hN = 40us\nt_qR = 0.25\n");
        CHECK(d.delay.t_pr == doctest::Approx(2e-3));
        CHECK(d.delay.t_hN == doctest::Approx(40e-6));
        CHECK(d.delay.t_qR == doctest::Approx(0.25));
        CHECK_FALSE(d.delay_fixtures.empty());

        const auto f = parse("experiment = fig4\ndegrees = 2, 2, 2\n");
        CHECK(f.fixture.degrees == std::vector<std::size_t>{2, 2, 2});
        CHECK(f.fixture.edges.empty());
    }

    TEST_CASE("config errors name the line")
    {
        auto has = [](const std::string& err, const std::string& part) {
            return err.find(part) != std::string::npos;
        };
        CHECK(has(parse_error("experiment = fig4\nk = 1..3\nk = 4\n"), "line 3"));
        CHECK(has(parse_error("experiment = fig4\nk = 1..3\nk = 4\n"), "duplicate"));
        CHECK(has(parse_error("experiment = fig4\n\ntrials = 5\n"), "line 3"));
        CHECK(has(parse_error("experiment = fig4\nk = 5..2\n"), "line 2"));
        CHECK(has(parse_error("experiment = fig4\nm = 24, x\n"), "line 2"));
        CHECK(has(parse_error("experiment = fig4\njust words\n"), "line 2"));
        CHECK(has(parse_error("experiment = fig4\nk =\n"), "line 2"));
        CHECK(has(parse_error("experiment = fig10\n"), "line 1"));
        CHECK(has(parse_error("experiment = fig7\nm = 20, 24\n"), "line 2"));
        CHECK(has(parse_error("experiment = fig7\ntrials = 0\n"), "line 2"));
        CHECK(has(parse_error("experiment = fig7\nbeta = 0\n"), "line 2"));
        CHECK(has(parse_error("experiment = delay\nt_pr = -3ms\n"), "line 2"));
        CHECK(has(parse_error("experiment = fig4\ndegrees = 2,2,2\nnodes = 3\nedges = 3\n"),
                  "exactly one"));
        CHECK(has(parse_error("experiment = custom\nnodes = 20\n"), "together"));
        CHECK(has(parse_error("experiment = custom\nscheme = quantum\n"), "line 2"));
        CHECK_FALSE(parse_error("k = 3\n").empty());
        CHECK_THROWS_AS(load_config("/nonexistent/sparseprov.conf"), ConfigError);
    }

    TEST_CASE("fig4 tables and checks")
    {
        auto c = parse("experiment = fig4\nm = 24\nk = 1..10\n");
        const auto rep = run_experiment(c);
        REQUIRE(rep.tables.size() == 1);
        const auto& t = rep.tables[0];
        CHECK(t.header == std::vector<std::string>{"m", "k", "exact", "bound"});
        CHECK(t.rows.size() == 10);
        CHECK(rep.checks.size() >= 2);
        bool has_version = false;
        for (const auto& [k, v] : rep.manifest)
            has_version = has_version || (k == "library_version" && v == kLibraryVersion);
        CHECK(has_version);
        CHECK(t.csv().rfind("m,k,exact,bound\n24,1,", 0) == 0);
    }

    TEST_CASE("infeasible and capped runs surface as errors")
    {
        CHECK_THROWS_AS(run_experiment(parse("experiment = fig5\nm_sum = 40\n")), InfeasibleError);
        CHECK_THROWS_AS(run_experiment(parse("experiment = custom\nnodes = 6\nedges = 30\n")),
                        InfeasibleError);
        CHECK_THROWS_AS(run_experiment(parse("experiment = fig7\nnodes = 5\nedges = 4\n"
                                             "hops = 4\ntrials = 10\n")),
                        InfeasibleError);
    }

    TEST_CASE("reports are written atomically")
    {
        const auto dir = scratch_dir("report");
        auto rep = run_experiment(parse("experiment = fig4\nm = 24\nk = 1..4\n"));
        write_report(rep, dir);
        CHECK(fs::exists(dir / "fig4.csv"));
        CHECK(fs::exists(dir / "manifest.txt"));
        CHECK(slurp(dir / "fig4.csv") == rep.tables[0].csv());
        const auto manifest = slurp(dir / "manifest.txt");
        CHECK(manifest.find("experiment = fig4") != std::string::npos);
        CHECK(manifest.find("config_sha256 = ") != std::string::npos);
        CHECK(manifest.find("check = ") != std::string::npos);

        // replacing an existing report drops stale files
        std::ofstream(dir / "stale.csv") << "x\n";
        write_report(rep, dir);
        CHECK_FALSE(fs::exists(dir / "stale.csv"));

        // a failing write leaves the previous report and no staging debris
        auto broken = rep;
        broken.tables.push_back({"missing/sub", {"a"}, {{"1"}}});
        CHECK_THROWS(write_report(broken, dir));
        CHECK(slurp(dir / "fig4.csv") == rep.tables[0].csv());
        std::size_t entries = 0;
        for (const auto& e : fs::directory_iterator(dir.parent_path())) {
            (void)e;
            ++entries;
        }
        CHECK(entries == 1);
        fs::remove_all(dir.parent_path());
    }

    TEST_CASE("golden outputs")
    {
        const fs::path golden = SPARSEPROV_GOLDEN_DIR;
        std::size_t compared = 0;
        for (const auto& e : fs::directory_iterator(golden)) {
            if (e.path().extension() != ".conf")
                continue;
            const auto expected_dir = golden / e.path().stem();
            REQUIRE(fs::is_directory(expected_dir));
            const auto rep = run_experiment(load_config(e.path()));
            for (const auto& t : rep.tables) {
                const auto want_file = expected_dir / (t.name + ".csv");
                REQUIRE_MESSAGE(fs::exists(want_file), want_file.string());
                const auto want = cells(slurp(want_file));
                const auto got = cells(t.csv());
                REQUIRE(want.size() == got.size());
                for (std::size_t r = 0; r < want.size(); ++r) {
                    REQUIRE(want[r].size() == got[r].size());
                    for (std::size_t col = 0; col < want[r].size(); ++col)
                        CHECK_MESSAGE(same_cell(got[r][col], want[r][col]),
                                      t.name << " row " << r << " col " << col << ": "
                                             << got[r][col] << " vs " << want[r][col]);
                }
                ++compared;
            }
        }
        CHECK(compared >= 3);
    }

    TEST_CASE("command-line exit codes")
    {
        const auto dir = scratch_dir("cli");
        fs::create_directories(dir);
        const auto conf = dir / "ok.conf";
        std::ofstream(conf) << "experiment = fig4\nm = 24\nk = 1..12\n";
        const auto bad = dir / "bad.conf";
        std::ofstream(bad) << "experiment = fig4\nk = 1..\n";
        const auto red = dir / "red.conf";
        std::ofstream(red) << "experiment = fig4\nm = 40\nk = 1..16\n";

        CHECK(run_cli("analyze --degrees 5,3,4,1,4,2,4,5 -m 24 -k 1,2,3") == 0);
        CHECK(run_cli("gen-topology --nodes 10 --edges 14 -o " + (dir / "t.txt").string()) == 0);
        CHECK(run_cli("learn-mssp --topology " + (dir / "t.txt").string() + " -m 64 -k 3") == 0);
        CHECK(run_cli("experiment -c " + conf.string() + " -o " + (dir / "out").string()) == 0);
        CHECK(fs::exists(dir / "out" / "fig4.csv"));
        CHECK(run_cli("experiment -c " + bad.string()) == 1);
        CHECK(run_cli("experiment -c " + (dir / "absent.conf").string()) == 1);
        CHECK(run_cli("optimize --degrees 5,3,4,1,4,2,4,5 --m-sum 40") == 2);
        CHECK(run_cli("experiment --check -c " + red.string() + " -o " + (dir / "red").string()) ==
              3);
        CHECK(run_cli("no-such-command") != 0);
        fs::remove_all(dir.parent_path());
    }
}
