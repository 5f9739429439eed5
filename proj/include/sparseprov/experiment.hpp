#pragma once

#include "sparseprov/delay.hpp"
#include "sparseprov/provenance.hpp"
#include "sparseprov/sim.hpp"
#include "sparseprov/topology.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sparseprov {

inline constexpr const char* kLibraryVersion = "1.0.0";

enum class Recipe { Fig4, Fig5, Fig6, Fig7, Fig8, Fig9, Delay, Custom };

const char* recipe_name(Recipe r);

// Where the experiment's network(s) come from. Exactly one of: a file, a degree
// sequence, or (nodes, edges) for random sparse graphs (one fixture per entry
// of `edges`).
struct FixtureSpec {
    std::optional<std::string> file;
    std::vector<std::size_t> degrees;
    std::size_t nodes = 0;
    std::vector<std::size_t> edges;
    std::uint64_t seed = 1;
};

struct ExperimentConfig {
    Recipe recipe = Recipe::Custom;
    std::string text; // config source, hashed into the manifest

    FixtureSpec fixture;
    std::vector<std::pair<std::size_t, std::size_t>> delay_fixtures; // (nodes, edges)

    std::vector<std::uint32_t> m;
    std::vector<std::uint16_t> k;
    std::vector<std::size_t> beta;

    std::uint64_t m_sum = 0;
    std::uint32_t granularity = 16;
    std::uint32_t min_per_node = 16;
    std::vector<std::uint32_t> variable_m;
    std::vector<std::uint16_t> variable_k;

    Scheme scheme = Scheme::SSMP;
    std::vector<EmbedMode> modes;
    std::size_t hops = 4;
    std::optional<NodeId> source;
    std::size_t min_paths = 4; // automatic source: first node with this many h-hop paths
    BetaRule rule = BetaRule::Attempts;
    bool chain = true;
    TopologyMode context = TopologyMode::Learned; // custom payload runs

    std::size_t trials = 0;
    std::uint64_t seed = 1;
    std::uint64_t key_seed = 1;
    DelayParams delay;

    std::string output;
};

// Line-oriented config:
//
//   # comment
//   experiment = fig7
//   edges      = 34, 54
//   k          = 1..8
//
// One `key = value` per line; lists are comma separated and integer ranges are
// written a..b. Relative file names resolve against `base_dir`. Keys a recipe
// does not use are rejected. Throws ConfigError naming the offending line.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct Table {
    std::string name; // file stem
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string csv() const;
};

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ExperimentReport {
    Recipe recipe = Recipe::Custom;
    std::vector<Table> tables;
    std::vector<std::pair<std::string, std::string>> scripts; // file name, gnuplot text
    std::vector<Check> checks;
    std::vector<std::pair<std::string, std::string>> manifest;
    double wall_seconds = 0;

    bool all_passed() const;
};

// Throws ConfigError, InfeasibleError or CapExceededError.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Writes every table as <name>.csv, the plot scripts and manifest.txt into
// `dir`. Output is staged in a sibling temporary directory and renamed into
// place, so `dir` either holds a complete report or is left untouched.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

// First node (ascending id) with at least `min_paths` simple h-hop paths to the
// destination. Throws InfeasibleError if none exists.
NodeId pick_source(const Topology& t, std::size_t h, std::size_t min_paths);

} // namespace sparseprov
