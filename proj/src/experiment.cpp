#include "sparseprov/experiment.hpp"

#include "sparseprov/analysis.hpp"
#include "sparseprov/digest.hpp"
#include "sparseprov/errors.hpp"
#include "sparseprov/optimize.hpp"

#include <omp.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace sparseprov {

const char* recipe_name(Recipe r)
{
    switch (r) {
    case Recipe::Fig4: return "fig4";
    case Recipe::Fig5: return "fig5";
    case Recipe::Fig6: return "fig6";
    case Recipe::Fig7: return "fig7";
    case Recipe::Fig8: return "fig8";
    case Recipe::Fig9: return "fig9";
    case Recipe::Delay: return "delay";
    case Recipe::Custom: return "custom";
    }
    return "?";
}

namespace {

// ---------------------------------------------------------------- parsing

struct Entry {
    std::string value;
    int line = 0;
};

[[noreturn]] void fail(int line, const std::string& key, const std::string& what)
{
    std::ostringstream os;
    if (line > 0)
        os << "line " << line << ": ";
    if (!key.empty())
        os << "'" << key << "': ";
    os << what;
    throw ConfigError(os.str());
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

std::uint64_t to_u64(const std::string& s, const std::string& key, int line)
{
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc() || p != end)
        fail(line, key, "expected a non-negative integer, got '" + s + "'");
    return v;
}

std::vector<std::uint64_t> to_u64_list(const std::string& s, const std::string& key, int line)
{
    std::vector<std::uint64_t> out;
    for (const auto& item : split(s, ',')) {
        if (item.empty())
            fail(line, key, "empty list element");
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(to_u64(item, key, line));
            continue;
        }
        const auto lo = to_u64(trim(item.substr(0, dots)), key, line);
        const auto hi = to_u64(trim(item.substr(dots + 2)), key, line);
        if (hi < lo)
            fail(line, key, "empty range '" + item + "'");
        if (hi - lo > 100000)
            fail(line, key, "range '" + item + "' is too long");
        for (auto v = lo; v <= hi; ++v)
            out.push_back(v);
    }
    return out;
}

// Number with an optional unit: s, ms, us.
double to_seconds(const std::string& s, const std::string& key, int line)
{
    double v = 0;
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, v);
    if (s.empty() || ec != std::errc())
        fail(line, key, "expected a duration, got '" + s + "'");
    const std::string unit = trim(std::string_view(p, static_cast<std::size_t>(end - p)));
    double scale = 1.0;
    if (unit == "ms")
        scale = 1e-3;
    else if (unit == "us")
        scale = 1e-6;
    else if (!unit.empty() && unit != "s")
        fail(line, key, "unknown time unit '" + unit + "'");
    if (!(v >= 0) || !std::isfinite(v))
        fail(line, key, "durations must be non-negative");
    return v * scale;
}

template <typename T>
T narrow(std::uint64_t v, const std::string& key, int line)
{
    if (v > std::numeric_limits<T>::max())
        fail(line, key, "value " + std::to_string(v) + " is out of range");
    return static_cast<T>(v);
}

template <typename T>
std::vector<T> narrow_list(const std::vector<std::uint64_t>& v, const std::string& key, int line)
{
    std::vector<T> out;
    for (auto x : v)
        out.push_back(narrow<T>(x, key, line));
    return out;
}

const std::set<std::string> kFixtureKeys = {"topology", "degrees", "nodes", "edges",
                                            "topology_seed"};

std::set<std::string> allowed_keys(Recipe r)
{
    std::set<std::string> keys = {"experiment", "seed", "output"};
    auto add = [&](std::initializer_list<const char*> list) {
        for (const char* k : list)
            keys.insert(k);
    };
    const std::initializer_list<const char*> payload = {
        "m", "k", "beta", "hops", "source", "min_paths", "trials", "key_seed", "rule", "chain"};
    switch (r) {
    case Recipe::Fig4:
        keys.insert(kFixtureKeys.begin(), kFixtureKeys.end());
        add({"m", "k"});
        break;
    case Recipe::Fig5:
        keys.insert(kFixtureKeys.begin(), kFixtureKeys.end());
        add({"m_sum", "k", "granularity", "min_per_node", "variable_m", "variable_k"});
        break;
    case Recipe::Fig6:
        keys.insert(kFixtureKeys.begin(), kFixtureKeys.end());
        add({"m", "k", "trials", "key_seed"});
        break;
    case Recipe::Fig7:
    case Recipe::Fig8:
        keys.insert(kFixtureKeys.begin(), kFixtureKeys.end());
        add(payload);
        break;
    case Recipe::Fig9:
        keys.insert(kFixtureKeys.begin(), kFixtureKeys.end());
        add(payload);
        add({"modes"});
        break;
    case Recipe::Delay:
        add({"fixtures", "topology_seed", "m", "k", "hops", "beta", "t_hN", "t_hR", "t_qN",
             "t_qR", "t_pr", "t_cmp_R"});
        break;
    case Recipe::Custom:
        keys.insert(kFixtureKeys.begin(), kFixtureKeys.end());
        add(payload);
        add({"scheme", "context"});
        break;
    }
    return keys;
}

const std::vector<std::size_t> kLearningDegrees = {5, 3, 4, 1, 4, 2, 4, 5};

std::vector<std::uint16_t> k_range(std::uint16_t lo, std::uint16_t hi)
{
    std::vector<std::uint16_t> out;
    for (auto k = lo; k <= hi; ++k)
        out.push_back(k);
    return out;
}

void apply_defaults(ExperimentConfig& c)
{
    c.delay = DelayParams{42e-6, 10e-6, 70e-6, 70e-6, 0.5e-3, 0.0};
    switch (c.recipe) {
    case Recipe::Fig4:
        c.fixture.degrees = kLearningDegrees;
        c.m = {24, 32, 40};
        c.k = k_range(1, 16);
        break;
    case Recipe::Fig5:
        c.fixture.degrees = kLearningDegrees;
        c.m_sum = 280;
        c.k = k_range(1, 16);
        c.variable_m = {48, 48, 48, 16, 48, 32, 48};
        c.variable_k = {8, 10, 8, 7, 8, 9, 8};
        break;
    case Recipe::Fig6:
        c.fixture.degrees = kLearningDegrees;
        c.m = {32};
        c.k = k_range(1, 10);
        c.trials = 10000;
        break;
    case Recipe::Fig7:
    case Recipe::Fig8:
    case Recipe::Fig9:
    case Recipe::Custom:
        c.fixture.nodes = 20;
        c.fixture.edges = {34, 54};
        c.m = {20};
        c.k = k_range(1, 8);
        c.beta = {1, 2, 3};
        c.trials = 100000;
        if (c.recipe == Recipe::Fig7)
            c.modes = {EmbedMode::DE};
        else if (c.recipe == Recipe::Fig8)
            c.modes = {EmbedMode::DDE};
        else if (c.recipe == Recipe::Fig9) {
            c.modes = {EmbedMode::DE, EmbedMode::DDE};
            c.beta = {1};
        } else {
            c.fixture.edges = {34};
            c.trials = 10000;
        }
        break;
    case Recipe::Delay:
        c.delay_fixtures = {{10, 26}, {20, 23}, {20, 34}};
        c.m = {32};
        c.k = {4};
        c.beta = {1};
        break;
    }
}

Recipe recipe_from(const std::string& s, int line)
{
    for (Recipe r : {Recipe::Fig4, Recipe::Fig5, Recipe::Fig6, Recipe::Fig7, Recipe::Fig8,
                     Recipe::Fig9, Recipe::Delay, Recipe::Custom})
        if (s == recipe_name(r))
            return r;
    fail(line, "experiment", "unknown experiment '" + s + "'");
}

EmbedMode mode_from(const std::string& s, const std::string& key, int line)
{
    if (s == "DE" || s == "de")
        return EmbedMode::DE;
    if (s == "DDE" || s == "dde")
        return EmbedMode::DDE;
    fail(line, key, "expected DE or DDE, got '" + s + "'");
}

bool bool_from(const std::string& s, const std::string& key, int line)
{
    if (s == "on" || s == "true" || s == "yes" || s == "1")
        return true;
    if (s == "off" || s == "false" || s == "no" || s == "0")
        return false;
    fail(line, key, "expected on or off, got '" + s + "'");
}

} // namespace

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir)
{
    std::map<std::string, Entry> entries;
    std::ostringstream text;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        text << raw << '\n';
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            fail(line, "", "expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            fail(line, "", "missing key");
        if (value.empty())
            fail(line, key, "missing value");
        if (entries.count(key))
            fail(line, key, "duplicate key (first set on line " +
                                std::to_string(entries[key].line) + ")");
        entries[key] = {value, line};
    }

    const auto exp = entries.find("experiment");
    if (exp == entries.end())
        fail(0, "experiment", "missing required key");

    ExperimentConfig c;
    c.recipe = recipe_from(exp->second.value, exp->second.line);
    c.text = text.str();
    apply_defaults(c);

    const auto allowed = allowed_keys(c.recipe);
    bool fixture_given = false;
    for (const auto& [key, e] : entries) {
        if (!allowed.count(key))
            fail(e.line, key, std::string("unknown key for experiment ") + recipe_name(c.recipe));
        if (kFixtureKeys.count(key) && key != "topology_seed")
            fixture_given = true;
    }
    if (fixture_given)
        c.fixture = FixtureSpec{};

    for (const auto& [key, e] : entries) {
        const std::string& v = e.value;
        const int ln = e.line;
        if (key == "experiment") {
        } else if (key == "seed") {
            c.seed = to_u64(v, key, ln);
        } else if (key == "key_seed") {
            c.key_seed = to_u64(v, key, ln);
        } else if (key == "output") {
            c.output = (base_dir / v).string();
        } else if (key == "topology") {
            const auto path = base_dir / v;
            if (!std::filesystem::exists(path))
                fail(ln, key, "file not found: " + path.string());
            c.fixture.file = path.string();
        } else if (key == "degrees") {
            c.fixture.degrees = narrow_list<std::size_t>(to_u64_list(v, key, ln), key, ln);
        } else if (key == "nodes") {
            c.fixture.nodes = to_u64(v, key, ln);
        } else if (key == "edges") {
            c.fixture.edges = narrow_list<std::size_t>(to_u64_list(v, key, ln), key, ln);
        } else if (key == "topology_seed") {
            c.fixture.seed = to_u64(v, key, ln);
        } else if (key == "fixtures") {
            c.delay_fixtures.clear();
            for (const auto& item : split(v, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos)
                    fail(ln, key, "expected nodes:edges, got '" + item + "'");
                c.delay_fixtures.emplace_back(to_u64(trim(item.substr(0, colon)), key, ln),
                                              to_u64(trim(item.substr(colon + 1)), key, ln));
            }
        } else if (key == "m") {
            c.m = narrow_list<std::uint32_t>(to_u64_list(v, key, ln), key, ln);
        } else if (key == "k") {
            c.k = narrow_list<std::uint16_t>(to_u64_list(v, key, ln), key, ln);
        } else if (key == "beta") {
            c.beta = narrow_list<std::size_t>(to_u64_list(v, key, ln), key, ln);
        } else if (key == "m_sum") {
            c.m_sum = to_u64(v, key, ln);
        } else if (key == "granularity") {
            c.granularity = narrow<std::uint32_t>(to_u64(v, key, ln), key, ln);
        } else if (key == "min_per_node") {
            c.min_per_node = narrow<std::uint32_t>(to_u64(v, key, ln), key, ln);
        } else if (key == "variable_m") {
            c.variable_m = narrow_list<std::uint32_t>(to_u64_list(v, key, ln), key, ln);
        } else if (key == "variable_k") {
            c.variable_k = narrow_list<std::uint16_t>(to_u64_list(v, key, ln), key, ln);
        } else if (key == "scheme") {
            if (v == "ssmp")
                c.scheme = Scheme::SSMP;
            else if (v == "mssp")
                c.scheme = Scheme::MSSP;
            else if (v == "de" || v == "DE")
                c.scheme = Scheme::DE;
            else if (v == "dde" || v == "DDE")
                c.scheme = Scheme::DDE;
            else
                fail(ln, key, "expected ssmp, mssp, de or dde");
        } else if (key == "modes") {
            c.modes.clear();
            for (const auto& item : split(v, ','))
                c.modes.push_back(mode_from(item, key, ln));
        } else if (key == "context") {
            if (v == "learned")
                c.context = TopologyMode::Learned;
            else if (v == "complete")
                c.context = TopologyMode::Complete;
            else
                fail(ln, key, "expected learned or complete");
        } else if (key == "hops") {
            c.hops = to_u64(v, key, ln);
        } else if (key == "source") {
            if (v != "auto")
                c.source = narrow<NodeId>(to_u64(v, key, ln), key, ln);
        } else if (key == "min_paths") {
            c.min_paths = to_u64(v, key, ln);
        } else if (key == "rule") {
            if (v == "attempts")
                c.rule = BetaRule::Attempts;
            else if (v == "failures")
                c.rule = BetaRule::Failures;
            else
                fail(ln, key, "expected attempts or failures");
        } else if (key == "chain") {
            c.chain = bool_from(v, key, ln);
        } else if (key == "trials") {
            c.trials = to_u64(v, key, ln);
        } else if (key == "t_hN") {
            c.delay.t_hN = to_seconds(v, key, ln);
        } else if (key == "t_hR") {
            c.delay.t_hR = to_seconds(v, key, ln);
        } else if (key == "t_qN") {
            c.delay.t_qN = to_seconds(v, key, ln);
        } else if (key == "t_qR") {
            c.delay.t_qR = to_seconds(v, key, ln);
        } else if (key == "t_pr") {
            c.delay.t_pr = to_seconds(v, key, ln);
        } else if (key == "t_cmp_R") {
            c.delay.t_cmp_R = to_seconds(v, key, ln);
        }
    }

    auto line_of = [&](const char* key) {
        const auto it = entries.find(key);
        return it == entries.end() ? 0 : it->second.line;
    };
    auto require_nonempty = [&](const auto& v, const char* key) {
        if (v.empty())
            fail(line_of(key), key, "sweep range is empty");
    };

    if (c.recipe != Recipe::Delay) {
        const int kinds = (c.fixture.file ? 1 : 0) + (c.fixture.degrees.empty() ? 0 : 1) +
                          (c.fixture.nodes || !c.fixture.edges.empty() ? 1 : 0);
        if (kinds != 1)
            fail(line_of("topology"), "topology",
                 "give exactly one of: topology, degrees, or nodes with edges");
        if ((c.fixture.nodes == 0) != c.fixture.edges.empty())
            fail(line_of(c.fixture.nodes ? "nodes" : "edges"), c.fixture.nodes ? "edges" : "nodes",
                 "nodes and edges must be given together");
    }
    switch (c.recipe) {
    case Recipe::Fig5:
        require_nonempty(c.k, "k");
        if (c.m_sum == 0)
            fail(line_of("m_sum"), "m_sum", "must be positive");
        if (c.granularity == 0)
            fail(line_of("granularity"), "granularity", "must be positive");
        if (c.variable_m.size() != c.variable_k.size())
            fail(line_of("variable_k"), "variable_k", "must have as many entries as variable_m");
        break;
    case Recipe::Fig4:
    case Recipe::Fig6:
    case Recipe::Delay:
        require_nonempty(c.m, "m");
        require_nonempty(c.k, "k");
        break;
    default:
        require_nonempty(c.m, "m");
        require_nonempty(c.k, "k");
        require_nonempty(c.beta, "beta");
        if (c.recipe == Recipe::Fig9 || c.recipe == Recipe::Fig7 || c.recipe == Recipe::Fig8)
            require_nonempty(c.modes, "modes");
        if (c.m.size() != 1)
            fail(line_of("m"), "m", "payload experiments take a single filter size");
        if (c.trials == 0)
            fail(line_of("trials"), "trials", "must be at least 1");
        break;
    }
    for (auto k : c.k)
        if (k == 0)
            fail(line_of("k"), "k", "hash counts start at 1");
    for (auto m : c.m)
        if (m == 0)
            fail(line_of("m"), "m", "filter sizes start at 1");
    for (auto b : c.beta)
        if (b == 0)
            fail(line_of("beta"), "beta", "beta starts at 1");
    if (c.recipe == Recipe::Delay)
        require_nonempty(c.delay_fixtures, "fixtures");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path.string());
    return parse_config(in, path.parent_path());
}

// ---------------------------------------------------------------- running

namespace {

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

template <typename T>
std::string str(T v)
{
    return std::to_string(v);
}

template <typename Vec>
std::string joined(const Vec& v)
{
    std::string out;
    for (const auto& x : v) {
        if (!out.empty())
            out += ' ';
        out += std::to_string(x);
    }
    return out;
}

const char* mode_name(EmbedMode m)
{
    return m == EmbedMode::DE ? "DE" : "DDE";
}

std::vector<Topology> build_fixtures(const FixtureSpec& f)
{
    if (f.file)
        return {load_topology(*f.file)};
    if (!f.degrees.empty())
        return {topology_with_degrees(f.degrees, f.seed)};
    std::vector<Topology> out;
    for (auto e : f.edges)
        out.push_back(random_sparse_topology(f.nodes, e, f.seed));
    return out;
}

const Topology& single_fixture(const std::vector<Topology>& fx, Recipe r)
{
    if (fx.size() != 1)
        throw ConfigError(std::string(recipe_name(r)) + " takes a single fixture");
    return fx.front();
}

// Unclamped value: the clamped part plus whatever overshot 1.
double raw(const Prob& p)
{
    return p.value + p.excess;
}

template <typename Values>
std::size_t argmin(const Values& v)
{
    return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

long distance(std::size_t a, std::size_t b)
{
    return std::labs(static_cast<long>(a) - static_cast<long>(b));
}

std::string plot_header(const std::string& title, const std::string& ylabel, bool logy)
{
    std::string s = "set datafile separator ','\n"
                    "set terminal pngcairo size 900,600\n"
                    "set key outside right\n"
                    "set grid\n"
                    "set xlabel 'k'\n";
    s += "set ylabel '" + ylabel + "'\n";
    s += "set title '" + title + "'\n";
    if (logy)
        s += "set logscale y\n";
    return s;
}

// ------------------------------------------------------------------ fig4

void run_fig4(const ExperimentConfig& c, ExperimentReport& rep)
{
    const auto fx = build_fixtures(c.fixture);
    const Topology& t = single_fixture(fx, c.recipe);
    const auto prof = neighbor_profile(t);
    const std::size_t n = t.node_count();

    Table tab{"fig4", {"m", "k", "exact", "bound"}, {}};
    std::string plot = plot_header("SSMP false-positive rate, equal filters", "FPR", true);
    plot += "set output 'fig4.png'\nplot ";
    for (auto m : c.m) {
        std::vector<double> exact, bound;
        bool valid = true;
        for (auto k : c.k) {
            if (k > m)
                continue;
            const auto p = SsmpParams::equal(n, m, k);
            const auto e = ssmp_fpr_exact(t, p);
            const auto b = ssmp_fpr_bound(prof, p);
            exact.push_back(raw(e));
            bound.push_back(raw(b));
            valid = valid && raw(b) >= raw(e);
            tab.rows.push_back({str(m), str(k), num(e.value), num(raw(b))});
        }
        if (exact.empty())
            continue;
        const auto ae = argmin(exact), ab = argmin(bound);
        rep.checks.push_back({"bound above exact, m=" + str(m), valid, ""});
        rep.checks.push_back({"argmin within 1, m=" + str(m), distance(ae, ab) <= 1,
                              "exact argmin k=" + str(c.k[ae]) + ", bound argmin k=" +
                                  str(c.k[ab])});
        plot += "'fig4.csv' using 2:($1==" + str(m) + "?$3:1/0) with linespoints title 'exact m=" +
                str(m) + "', 'fig4.csv' using 2:($1==" + str(m) +
                "?$4:1/0) with lines dashtype 2 title 'bound m=" + str(m) + "', ";
    }
    plot.resize(plot.size() - 2);
    plot += "\n";
    rep.tables.push_back(std::move(tab));
    rep.scripts.emplace_back("fig4.gp", plot);
}

// ------------------------------------------------------------------ fig5

void run_fig5(const ExperimentConfig& c, ExperimentReport& rep)
{
    const auto fx = build_fixtures(c.fixture);
    const Topology& t = single_fixture(fx, c.recipe);
    const auto prof = neighbor_profile(t);
    const std::size_t n = t.node_count();

    SsmpBudget budget;
    budget.m_sum = c.m_sum;
    budget.granularity = c.granularity;
    budget.min_per_node = c.min_per_node;
    const auto equal = solve_ssmp_equal(prof, budget);
    const std::uint32_t m_eq = equal.params.m.front();

    std::vector<std::pair<std::string, SsmpParams>> variable;
    if (!c.variable_m.empty()) {
        SsmpParams given{c.variable_m, c.variable_k};
        given.validate(n);
        variable.emplace_back("given", given);
    }
    const auto opt = solve_ssmp_variable(prof, budget);
    variable.emplace_back("optimized", opt.params);

    std::vector<double> var_exact;
    Table alloc{"fig5_allocations", {"label", "m_sum", "m", "k", "exact", "bound"}, {}};
    for (const auto& [label, p] : variable) {
        const auto e = ssmp_fpr_exact(t, p);
        var_exact.push_back(e.value);
        alloc.rows.push_back({label, str(p.m_sum()), joined(p.m), joined(p.k), num(e.value),
                              num(raw(ssmp_fpr_bound(prof, p)))});
    }

    std::vector<std::string> header = {"k", "equal_exact", "equal_bound"};
    for (const auto& v : variable)
        header.push_back(v.first + "_exact");
    Table tab{"fig5", header, {}};
    double equal_min = 1.0;
    for (auto k : c.k) {
        if (k > m_eq)
            continue;
        const auto p = SsmpParams::equal(n, m_eq, k);
        const auto e = ssmp_fpr_exact(t, p);
        equal_min = std::min(equal_min, e.value);
        std::vector<std::string> row = {str(k), num(e.value), num(raw(ssmp_fpr_bound(prof, p)))};
        for (double v : var_exact)
            row.push_back(num(v));
        tab.rows.push_back(std::move(row));
    }
    for (std::size_t i = 0; i < variable.size(); ++i)
        rep.checks.push_back({variable[i].first + " allocation below equal minimum",
                              var_exact[i] < equal_min,
                              num(var_exact[i]) + " vs " + num(equal_min) + " (m_i=" + str(m_eq) +
                                  ")"});

    std::string plot = plot_header("SSMP, equal vs variable filter sizes", "FPR", true);
    plot += "set output 'fig5.png'\nplot 'fig5.csv' using 1:2 skip 1 with linespoints title "
            "'equal m_i=" + str(m_eq) + "'";
    for (std::size_t i = 0; i < variable.size(); ++i)
        plot += ", 'fig5.csv' using 1:" + str(4 + i) + " skip 1 with lines title '" +
                variable[i].first + "'";
    plot += "\n";
    rep.tables.push_back(std::move(tab));
    rep.tables.push_back(std::move(alloc));
    rep.scripts.emplace_back("fig5.gp", plot);
}

// ------------------------------------------------------------------ fig6

void run_fig6(const ExperimentConfig& c, ExperimentReport& rep)
{
    const auto fx = build_fixtures(c.fixture);
    const Topology& t = single_fixture(fx, c.recipe);
    const auto prof = neighbor_profile(t);
    const std::size_t n = t.node_count();

    std::vector<std::string> header = {"m", "k", "ssmp_exact", "mssp_exact"};
    if (c.trials)
        for (const char* h : {"ssmp_sim", "ssmp_stderr", "mssp_sim", "mssp_stderr"})
            header.push_back(h);
    Table tab{"fig6", header, {}};

    for (auto m : c.m) {
        const std::uint32_t m_total = m * static_cast<std::uint32_t>(n - 1);
        bool ordered = true;
        bool agree = true;
        std::string worst;
        double worst_z = 0;
        for (auto k : c.k) {
            if (k > m)
                continue;
            const auto ssmp = ssmp_fpr_exact(t, SsmpParams::equal(n, m, k));
            const auto mssp = mssp_fpr(prof, m_total, k);
            ordered = ordered && ssmp.value < mssp.value;
            std::vector<std::string> row = {str(m), str(k), num(ssmp.value), num(mssp.value)};
            if (c.trials) {
                TrialPlan plan;
                plan.trials = c.trials;
                plan.seed = c.seed;
                plan.key_seed = c.key_seed;
                plan.topology = t;
                plan.scheme = Scheme::SSMP;
                plan.ssmp = SsmpParams::equal(n, m, k);
                const auto s = run_trials(plan);
                plan.scheme = Scheme::MSSP;
                plan.m = m_total;
                plan.k = k;
                const auto ms = run_trials(plan);
                row.insert(row.end(), {num(s.rate()), num(s.std_error()), num(ms.rate()),
                                       num(ms.std_error())});
                for (auto [est, p] : {std::pair{s, ssmp.value}, std::pair{ms, mssp.value}}) {
                    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(c.trials));
                    const double diff = std::abs(est.rate() - p);
                    const double z = sigma > 0 ? diff / sigma : (diff > 0 ? 1e9 : 0);
                    if (z > worst_z) {
                        worst_z = z;
                        worst = "k=" + str(k);
                    }
                    agree = agree && diff <= 3 * sigma;
                }
            }
            tab.rows.push_back(std::move(row));
        }
        rep.checks.push_back({"SSMP below MSSP at every k, m_i=" + str(m), ordered, ""});
        if (c.trials)
            rep.checks.push_back({"simulation within 3 sigma of exact, m_i=" + str(m), agree,
                                  "largest deviation " + num(worst_z) + " sigma at " + worst});
    }
    std::string plot = plot_header("SSMP vs MSSP", "FPR", true);
    plot += "set output 'fig6.png'\nplot 'fig6.csv' using 2:3 skip 1 with linespoints title "
            "'SSMP exact', 'fig6.csv' using 2:4 skip 1 with linespoints title 'MSSP exact'";
    if (c.trials)
        plot += ", 'fig6.csv' using 2:5:6 skip 1 with yerrorbars title 'SSMP sim', 'fig6.csv' "
                "using 2:7:8 skip 1 with yerrorbars title 'MSSP sim'";
    plot += "\n";
    rep.tables.push_back(std::move(tab));
    rep.scripts.emplace_back("fig6.gp", plot);
}

// ------------------------------------------------------------ fig7..fig9

struct PayloadRun {
    const Topology* t = nullptr;
    EmbedMode mode = EmbedMode::DE;
    NodeId source = 0;
    PayloadSweepResult result;
};

PayloadRun payload_run(const ExperimentConfig& c, const Topology& t, EmbedMode mode,
                       bool learned, bool complete)
{
    PayloadSweep sw;
    sw.topology = t;
    sw.source = c.source ? *c.source : pick_source(t, c.hops, c.min_paths);
    sw.h = c.hops;
    sw.mode = mode;
    sw.m = c.m.front();
    sw.ks = c.k;
    sw.beta_max = *std::max_element(c.beta.begin(), c.beta.end());
    sw.rule = c.rule;
    sw.no_chain = !c.chain;
    sw.learned = learned;
    sw.complete = complete;
    sw.trials = c.trials;
    sw.seed = c.seed;
    sw.key_seed = c.key_seed;
    return {&t, mode, sw.source, run_payload_sweep(sw)};
}

// Bound averaged over uniformly drawn true paths; nullopt past the cap.
std::optional<double> average_bound(const Topology& t, NodeId source, std::size_t h,
                                     std::uint32_t m, std::uint16_t k, std::size_t beta,
                                     EmbedMode mode, const std::vector<DirectedPath>& paths)
{
    double sum = 0;
    try {
        for (const auto& p : paths)
            sum += de_dde_fpr_bound(t, source, h, m, k, beta, mode, p).value;
    } catch (const CapExceededError&) {
        return std::nullopt;
    }
    return sum / static_cast<double>(paths.size());
}

void run_fig78(const ExperimentConfig& c, ExperimentReport& rep)
{
    const auto fx = build_fixtures(c.fixture);
    const std::string name = recipe_name(c.recipe);
    Table tab{name, {"edges", "mode", "source", "lambda", "k", "beta", "sim", "stderr", "bound"},
              {}};
    for (const auto& t : fx) {
        for (auto mode : c.modes) {
            const auto run = payload_run(c, t, mode, true, false);
            const auto& r = run.result;
            const std::string tag = "e=" + str(t.edge_count()) + " " + mode_name(mode);
            bool monotone = true, valid = true;
            std::string violation;
            for (std::size_t ki = 0; ki < c.k.size(); ++ki) {
                double prev = 2.0;
                for (auto b : c.beta) {
                    const auto est = r.estimate(ki, TopologyMode::Learned, b);
                    const auto bound = average_bound(t, run.source, c.hops, c.m.front(), c.k[ki],
                                                     b, mode, r.paths);
                    if (est.rate() > prev)
                        monotone = false;
                    prev = est.rate();
                    if (bound && *bound + 3 * est.std_error() < est.rate()) {
                        if (valid)
                            violation = "k=" + str(c.k[ki]) + " beta=" + str(b) + ": bound " +
                                        num(*bound) + " < sim " + num(est.rate());
                        valid = false;
                    }
                    tab.rows.push_back({str(t.edge_count()), mode_name(mode), str(run.source),
                                        str(r.paths.size()), str(c.k[ki]), str(b),
                                        num(est.rate()), num(est.std_error()),
                                        bound ? num(*bound) : std::string()});
                }
            }
            rep.checks.push_back({"sim non-increasing in beta, " + tag, monotone, ""});
            rep.checks.push_back({"bound above sim, " + tag, valid, violation});
            for (auto b : c.beta) {
                if (b > 2)
                    continue;
                std::vector<double> sim, bnd;
                bool capped = false;
                for (std::size_t ki = 0; ki < c.k.size(); ++ki) {
                    sim.push_back(r.estimate(ki, TopologyMode::Learned, b).rate());
                    const auto bound = average_bound(t, run.source, c.hops, c.m.front(),
                                                     c.k[ki], b, mode, r.paths);
                    capped = capped || !bound;
                    bnd.push_back(bound.value_or(0));
                }
                if (capped)
                    continue;
                const auto as = argmin(sim), ab = argmin(bnd);
                rep.checks.push_back({"argmin within 1, " + tag + " beta=" + str(b),
                                      distance(as, ab) <= 1,
                                      "sim k=" + str(c.k[as]) + ", bound k=" + str(c.k[ab])});
            }
        }
    }
    std::string plot = plot_header(name + ": simulation vs bound", "FPR", true);
    plot += "set output '" + name + ".png'\nplot ";
    for (const auto& t : fx)
        for (auto b : c.beta) {
            const std::string sel = "($1==" + str(t.edge_count()) + "&&$6==" + str(b);
            plot += "'" + name + ".csv' using 5:" + sel + "?$7:1/0) skip 1 with linespoints title "
                    "'sim e=" + str(t.edge_count()) + " beta=" + str(b) + "', '" + name +
                    ".csv' using 5:" + sel + "?$9:1/0) skip 1 with lines dashtype 2 title "
                    "'bound e=" + str(t.edge_count()) + " beta=" + str(b) + "', ";
        }
    plot.resize(plot.size() - 2);
    plot += "\n";
    rep.tables.push_back(std::move(tab));
    rep.scripts.emplace_back(name + ".gp", plot);
}

void run_fig9(const ExperimentConfig& c, ExperimentReport& rep)
{
    const auto fx = build_fixtures(c.fixture);
    Table tab{"fig9",
              {"edges", "mode", "beta", "k", "learned", "learned_stderr", "complete",
               "complete_stderr"},
              {}};
    // Average (complete - learned) per (nodes, mode, edges), first beta only.
    std::map<std::pair<std::size_t, int>, std::vector<std::pair<std::size_t, double>>> gaps;
    for (const auto& t : fx) {
        for (auto mode : c.modes) {
            const auto run = payload_run(c, t, mode, true, true);
            const auto& r = run.result;
            bool ordered = true;
            double gap = 0;
            for (auto b : c.beta)
                for (std::size_t ki = 0; ki < c.k.size(); ++ki) {
                    const auto l = r.estimate(ki, TopologyMode::Learned, b);
                    const auto x = r.estimate(ki, TopologyMode::Complete, b);
                    ordered = ordered && l.errors <= x.errors;
                    if (b == c.beta.front())
                        gap += x.rate() - l.rate();
                    tab.rows.push_back({str(t.edge_count()), mode_name(mode), str(b),
                                        str(c.k[ki]), num(l.rate()), num(l.std_error()),
                                        num(x.rate()), num(x.std_error())});
                }
            gap /= static_cast<double>(c.k.size());
            gaps[{t.node_count(), static_cast<int>(mode)}].emplace_back(t.edge_count(), gap);
            rep.checks.push_back({"learned at or below complete, e=" + str(t.edge_count()) + " " +
                                      mode_name(mode),
                                  ordered, "mean gap " + num(gap)});
        }
    }
    for (auto& [key, list] : gaps) {
        if (list.size() < 2)
            continue;
        std::sort(list.begin(), list.end());
        bool decreasing = true;
        std::string detail;
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (i && list[i].second >= list[i - 1].second)
                decreasing = false;
            detail += (i ? ", e=" : "e=") + str(list[i].first) + ": " + num(list[i].second);
        }
        rep.checks.push_back({std::string("topology benefit larger on sparser graph, ") +
                                  mode_name(static_cast<EmbedMode>(key.second)),
                              decreasing, detail});
    }
    std::string plot = plot_header("learned topology vs complete graph", "FPR", true);
    plot += "set output 'fig9.png'\nplot ";
    for (const auto& t : fx)
        for (auto mode : c.modes) {
            const std::string sel = "(($1==" + str(t.edge_count()) + "&&strcol(2) eq '" +
                                    mode_name(mode) + "')?";
            const std::string tag = std::string(mode_name(mode)) + " e=" + str(t.edge_count());
            plot += "'fig9.csv' using 4:" + sel + "$5:1/0) skip 1 with linespoints title '" + tag +
                    " learned', 'fig9.csv' using 4:" + sel +
                    "$7:1/0) skip 1 with linespoints dashtype 2 title '" + tag + " complete', ";
        }
    plot.resize(plot.size() - 2);
    plot += "\n";
    rep.tables.push_back(std::move(tab));
    rep.scripts.emplace_back("fig9.gp", plot);
}

// ----------------------------------------------------------------- delay

void run_delay(const ExperimentConfig& c, ExperimentReport& rep)
{
    c.delay.validate();
    Table tab{"delay", {"nodes", "edges", "phase", "component", "seconds"}, {}};
    const std::uint32_t m = c.m.front();
    const std::uint16_t k = c.k.front();
    const std::size_t beta = c.beta.front();
    std::map<std::size_t, std::vector<std::pair<std::size_t, double>>> mssp_prop;
    bool ssmp_faster = true, learned_faster = true;
    std::string detail;
    for (const auto& [n, e] : c.delay_fixtures) {
        const Topology t = random_sparse_topology(n, e, c.fixture.seed);
        std::vector<DelayComponent> rows;
        const auto ssmp = delay_ssmp(t, SsmpParams::equal(n, m, k), c.delay);
        const auto mssp = delay_mssp(t, k, c.delay);
        for (auto& x : ssmp.components())
            rows.push_back(x);
        for (auto& x : mssp.components())
            rows.push_back(x);
        ssmp_faster = ssmp_faster && ssmp.total < mssp.total;
        mssp_prop[n].emplace_back(e, mssp.propagation);
        detail += "n=" + str(n) + " e=" + str(e) + ": ssmp " + num(ssmp.total) + " s, mssp " +
                  num(mssp.total) + " s; ";
        const auto learned = ContextGraph::learned(t);
        const auto complete = ContextGraph::complete(n);
        for (auto mode : {EmbedMode::DE, EmbedMode::DDE}) {
            const std::string base = std::string("payload-") + (mode == EmbedMode::DE ? "de" : "dde");
            const auto dl = delay_payload(mode, c.hops, k, beta, learned, c.delay);
            const auto dc = delay_payload(mode, c.hops, k, beta, complete, c.delay);
            learned_faster = learned_faster && dl.recover < dc.recover;
            for (auto& x : dl.components(base + "-learned"))
                rows.push_back(x);
            for (auto& x : dc.components(base + "-complete"))
                rows.push_back(x);
        }
        for (const auto& x : rows)
            tab.rows.push_back({str(n), str(e), x.phase, x.component, num(x.seconds)});
    }
    rep.checks.push_back({"SSMP total below MSSP total on every fixture", ssmp_faster, detail});
    for (auto& [n, list] : mssp_prop) {
        if (list.size() < 2)
            continue;
        std::sort(list.begin(), list.end());
        bool decreasing = true;
        std::string values;
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (i)
                decreasing = decreasing && list[i].second < list[i - 1].second;
            values += (i ? ", e=" : "e=") + str(list[i].first) + ": " + num(list[i].second) + " s";
        }
        rep.checks.push_back({"MSSP propagation decreases with edges, n=" + str(n), decreasing,
                              values});
    }
    rep.checks.push_back({"learned recovery faster than complete", learned_faster, ""});

    std::string plot = "set datafile separator ','\nset terminal pngcairo size 900,600\n"
                       "set style data histograms\nset style fill solid\nset ylabel 'seconds'\n"
                       "set xtics rotate by -45\nset output 'delay.png'\n"
                       "plot 'delay.csv' using (strcol(4) eq 'total' ? $5 : 1/0):xtic(strcol(1).'/'."
                       "strcol(2).' '.strcol(3)) skip 1 title 'total'\n";
    rep.tables.push_back(std::move(tab));
    rep.scripts.emplace_back("delay.gp", plot);
}

// ---------------------------------------------------------------- custom

void run_custom(const ExperimentConfig& c, ExperimentReport& rep)
{
    const auto fx = build_fixtures(c.fixture);
    const std::uint32_t m = c.m.front();
    Table tab{"custom", {"edges", "k", "beta", "fpr", "stderr", "analytic"}, {}};
    for (const auto& t : fx) {
        const std::size_t n = t.node_count();
        if (c.scheme == Scheme::SSMP || c.scheme == Scheme::MSSP) {
            const auto prof = neighbor_profile(t);
            for (auto k : c.k) {
                if (k > m)
                    continue;
                TrialPlan plan;
                plan.scheme = c.scheme;
                plan.trials = c.trials;
                plan.seed = c.seed;
                plan.key_seed = c.key_seed;
                plan.topology = t;
                plan.ssmp = SsmpParams::equal(n, m, k);
                plan.m = m;
                plan.k = k;
                const auto est = run_trials(plan);
                const double analytic = c.scheme == Scheme::SSMP
                                            ? ssmp_fpr_exact(t, plan.ssmp).value
                                            : mssp_fpr(prof, m, k).value;
                tab.rows.push_back({str(t.edge_count()), str(k), "", num(est.rate()),
                                    num(est.std_error()), num(analytic)});
            }
            continue;
        }
        const auto mode = c.scheme == Scheme::DE ? EmbedMode::DE : EmbedMode::DDE;
        const bool learned = c.context == TopologyMode::Learned;
        const auto run = payload_run(c, t, mode, learned, !learned);
        for (std::size_t ki = 0; ki < c.k.size(); ++ki)
            for (auto b : c.beta) {
                const auto est = run.result.estimate(ki, c.context, b);
                const auto bound = learned ? average_bound(t, run.source, c.hops, m, c.k[ki], b,
                                                           mode, run.result.paths)
                                           : std::nullopt;
                tab.rows.push_back({str(t.edge_count()), str(c.k[ki]), str(b), num(est.rate()),
                                    num(est.std_error()), bound ? num(*bound) : std::string()});
            }
    }
    std::string plot = plot_header("custom run", "FPR", true);
    plot += "set output 'custom.png'\nplot 'custom.csv' using 2:4:5 skip 1 with yerrorbars title "
            "'simulation', 'custom.csv' using 2:6 skip 1 with linespoints title 'analytic'\n";
    rep.tables.push_back(std::move(tab));
    rep.scripts.emplace_back("custom.gp", plot);
}

} // namespace

std::string Table::csv() const
{
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows)
        line(r);
    return out;
}

bool ExperimentReport::all_passed() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

NodeId pick_source(const Topology& t, std::size_t h, std::size_t min_paths)
{
    for (NodeId s = 0; s + 1 < t.node_count(); ++s)
        if (enumerate_paths(t, s, h).size() >= std::max<std::size_t>(min_paths, 1))
            return s;
    throw InfeasibleError("no source has " + std::to_string(min_paths) + " paths of " +
                          std::to_string(h) + " hops");
}

ExperimentReport run_experiment(const ExperimentConfig& cfg)
{
    const auto start = std::chrono::steady_clock::now();
    ExperimentReport rep;
    rep.recipe = cfg.recipe;
    switch (cfg.recipe) {
    case Recipe::Fig4: run_fig4(cfg, rep); break;
    case Recipe::Fig5: run_fig5(cfg, rep); break;
    case Recipe::Fig6: run_fig6(cfg, rep); break;
    case Recipe::Fig7:
    case Recipe::Fig8: run_fig78(cfg, rep); break;
    case Recipe::Fig9: run_fig9(cfg, rep); break;
    case Recipe::Delay: run_delay(cfg, rep); break;
    case Recipe::Custom: run_custom(cfg, rep); break;
    }
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto hash = sha256(std::span(reinterpret_cast<const std::uint8_t*>(cfg.text.data()),
                                       cfg.text.size()));
    rep.manifest = {{"experiment", recipe_name(cfg.recipe)},
                    {"config_sha256", to_hex(hash)},
                    {"seed", std::to_string(cfg.seed)},
                    {"key_seed", std::to_string(cfg.key_seed)},
                    {"trials", std::to_string(cfg.trials)},
                    {"library_version", kLibraryVersion},
                    {"compiler", __VERSION__},
                    {"threads", std::to_string(omp_get_max_threads())},
                    {"wall_seconds", num(rep.wall_seconds)}};
    std::size_t passed = 0;
    for (const auto& c : rep.checks)
        passed += c.passed;
    rep.manifest.emplace_back("checks_passed",
                              std::to_string(passed) + "/" + std::to_string(rep.checks.size()));
    return rep;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    static std::atomic<unsigned> counter{0};
    const fs::path target = fs::absolute(dir).lexically_normal();
    const fs::path parent = target.parent_path();
    fs::create_directories(parent);
    const std::string tag = std::to_string(::getpid()) + "-" + std::to_string(counter++);
    const fs::path staging = parent / ("." + target.filename().string() + ".tmp-" + tag);
    const fs::path backup = parent / ("." + target.filename().string() + ".old-" + tag);

    auto put = [&](const std::string& name, const std::string& body) {
        std::ofstream out(staging / name, std::ios::binary);
        out << body;
        if (!out)
            throw std::runtime_error("cannot write " + (staging / name).string());
    };
    try {
        fs::create_directory(staging);
        std::string listing;
        for (const auto& t : report.tables) {
            put(t.name + ".csv", t.csv());
            listing += t.name + ".csv ";
        }
        for (const auto& [name, body] : report.scripts) {
            put(name, body);
            listing += name + " ";
        }
        std::string manifest;
        for (const auto& [k, v] : report.manifest)
            manifest += k + " = " + v + "\n";
        if (!listing.empty())
            listing.pop_back();
        manifest += "files = " + listing + "\n";
        for (const auto& c : report.checks)
            manifest += std::string("check = ") + (c.passed ? "PASS " : "FAIL ") + c.name +
                        (c.detail.empty() ? "" : " (" + c.detail + ")") + "\n";
        put("manifest.txt", manifest);

        if (fs::exists(target)) {
            fs::rename(target, backup);
            fs::rename(staging, target);
            fs::remove_all(backup);
        } else {
            fs::rename(staging, target);
        }
    } catch (...) {
        std::error_code ec;
        fs::remove_all(staging, ec);
        throw;
    }
}

} // namespace sparseprov
