// Copyright 2026 The SHA Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Experiment matrix runner for the coloring benchmark: config parsing, per-cell
 * execution on a worker pool, JSONL run records with a checksummed index for
 * resume, CSV aggregation and SVG plots.
 *
 * Output layout under the resolved output directory:
 *
 *   records/<cell>.jsonl   one run: a "run" line, one "stage" line per stage, a "params" line
 *   index.tsv              append-only; `<cell> TAB ok TAB <fnv1a64>` or `<cell> TAB fail TAB <msg>`
 *   rows.csv               one MetricRow per cell, matrix order
 *   summary.csv            per strategy (pooled and per architecture) statistics
 *   plots/<kind>.svg       written by plot_summary()
 */
#pragma once

#include "sha/strategies.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace sha::bench {

namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char *kOutputEnv = "SHA_BENCH_OUTPUT";
inline constexpr const char *kFixtureExtension = ".graph";

enum class MetricMode { Exact, Shots };

struct ExperimentConfig {
    std::vector<GraphInstance> instances;
    std::vector<ArchitectureId> architectures;
    std::vector<StrategySpec> strategies;
    std::vector<std::uint64_t> seeds;
    std::uint64_t shots{200};
    std::size_t n_layers{3};
    std::size_t max_iters{4000};
    double coarse_threshold{0.8};
    double fine_threshold{1e-6};
    double initial_step{0.5};
    double trailing_fraction{0.02};
    MetricMode metric_mode{MetricMode::Exact};
    fs::path output{"results"};
    std::size_t parallel{1};

    [[nodiscard]] std::size_t n_cells() const {
        return instances.size() * architectures.size() * strategies.size() * seeds.size();
    }

    void validate() const {
        if (instances.empty() || architectures.empty() || strategies.empty() || seeds.empty()) {
            throw ConfigError("config: instances, architectures, strategies and seeds must be "
                              "non-empty");
        }
        if (n_layers < 1 || max_iters < 1 || parallel < 1) {
            throw ConfigError("config: layers, max_iters and parallel must be >= 1");
        }
        if (!(trailing_fraction > 0.0 && trailing_fraction <= 1.0)) {
            throw ConfigError("config: trailing_fraction must lie in (0, 1]");
        }
        if (!(coarse_threshold >= 0.0 && fine_threshold >= 0.0 && initial_step > 0.0)) {
            throw ConfigError("config: thresholds must be >= 0 and initial_step > 0");
        }
    }
};

// ---------------------------------------------------------------- config

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        auto item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
        if (!item.empty()) {
            out.push_back(std::move(item));
        }
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

template <typename T> T parse_value(const std::string &key, const std::string &text) {
    T v{};
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) {
        throw ConfigError("config: bad value for '" + key + "': '" + text + "'");
    }
    return v;
}

/// `a..b` expands to a, a+1, ..., b.
inline std::vector<std::uint64_t> parse_seeds(const std::string &text) {
    std::vector<std::uint64_t> out;
    for (const auto &item : split_list(text)) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(parse_value<std::uint64_t>("seeds", item));
            continue;
        }
        const auto lo = parse_value<std::uint64_t>("seeds", trim(item.substr(0, dots)));
        const auto hi = parse_value<std::uint64_t>("seeds", trim(item.substr(dots + 2)));
        if (hi < lo) {
            throw ConfigError("config: empty seed range '" + item + "'");
        }
        for (auto s = lo; s <= hi; ++s) {
            out.push_back(s);
        }
    }
    return out;
}

/// `gen:<n>:<p>:<seed>[:<k>]` generation spec.
inline GraphInstance generated_instance(const std::string &spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ':')) {
        parts.push_back(part);
    }
    if (parts.size() < 4 || parts.size() > 5) {
        throw ConfigError("config: bad generation spec '" + spec + "' (gen:<n>:<p>:<seed>[:<k>])");
    }
    const auto n = parse_value<std::size_t>("instances", parts[1]);
    const auto p = parse_value<double>("instances", parts[2]);
    const auto seed = parse_value<std::uint64_t>("instances", parts[3]);
    const std::size_t k = parts.size() == 5 ? parse_value<std::size_t>("instances", parts[4]) : 4;
    try {
        GraphInstance g = generate_graph(n, p, seed, k);
        annotate_solutions(g);
        g.id = "gen-" + parts[1] + "-" + parts[2] + "-" + parts[3];
        return g;
    } catch (const std::exception &e) {
        throw ConfigError("config: " + spec + ": " + e.what());
    }
}

inline void load_instances(const std::string &item, const fs::path &base,
                           std::vector<GraphInstance> &out) {
    if (item.rfind("gen:", 0) == 0) {
        out.push_back(generated_instance(item));
        return;
    }
    const fs::path path = fs::path(item).is_absolute() ? fs::path(item) : base / item;
    if (fs::is_directory(path)) {
        std::vector<fs::path> files;
        for (const auto &e : fs::directory_iterator(path)) {
            if (e.is_regular_file() && e.path().extension() == kFixtureExtension) {
                files.push_back(e.path());
            }
        }
        if (files.empty()) {
            throw ConfigError("config: no " + std::string(kFixtureExtension) + " fixtures in " +
                              path.string());
        }
        std::sort(files.begin(), files.end());
        for (const auto &f : files) {
            out.push_back(load_fixture(f));
        }
        return;
    }
    if (!fs::exists(path)) {
        throw ConfigError("config: fixture not found: " + path.string());
    }
    out.push_back(load_fixture(path));
}

} // namespace detail

/**
 * Parses the `key = value` format. `#` starts a comment; list values are
 * comma separated. Relative instance paths resolve against `base_dir`.
 */
inline ExperimentConfig parse_config(std::istream &in, const fs::path &base_dir = ".") {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        if (detail::trim(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (!seen.insert(key).second) {
            throw ConfigError("config: duplicate key '" + key + "'");
        }
        if (key == "instances") {
            for (const auto &item : detail::split_list(value)) {
                detail::load_instances(item, base_dir, cfg.instances);
            }
        } else if (key == "architectures") {
            for (const auto &item : detail::split_list(value)) {
                try {
                    cfg.architectures.push_back(parse_architecture(item));
                } catch (const std::invalid_argument &e) {
                    throw ConfigError(std::string("config: ") + e.what());
                }
            }
        } else if (key == "strategies") {
            for (const auto &item : detail::split_list(value)) {
                try {
                    cfg.strategies.push_back(parse_strategy(item));
                } catch (const std::invalid_argument &e) {
                    throw ConfigError(std::string("config: ") + e.what());
                }
            }
        } else if (key == "seeds") {
            cfg.seeds = detail::parse_seeds(value);
        } else if (key == "shots") {
            cfg.shots = detail::parse_value<std::uint64_t>(key, value);
        } else if (key == "layers") {
            cfg.n_layers = detail::parse_value<std::size_t>(key, value);
        } else if (key == "max_iters") {
            cfg.max_iters = detail::parse_value<std::size_t>(key, value);
        } else if (key == "coarse_threshold") {
            cfg.coarse_threshold = detail::parse_value<double>(key, value);
        } else if (key == "fine_threshold") {
            cfg.fine_threshold = detail::parse_value<double>(key, value);
        } else if (key == "initial_step") {
            cfg.initial_step = detail::parse_value<double>(key, value);
        } else if (key == "trailing_fraction") {
            cfg.trailing_fraction = detail::parse_value<double>(key, value);
        } else if (key == "metric_mode") {
            if (value == "exact") {
                cfg.metric_mode = MetricMode::Exact;
            } else if (value == "shots") {
                cfg.metric_mode = MetricMode::Shots;
            } else {
                throw ConfigError("config: metric_mode must be exact or shots");
            }
        } else if (key == "output") {
            cfg.output = value;
        } else if (key == "parallel") {
            cfg.parallel = detail::parse_value<std::size_t>(key, value);
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    std::set<std::string> ids;
    for (const auto &g : cfg.instances) {
        if (!ids.insert(g.id).second) {
            throw ConfigError("config: duplicate instance id '" + g.id + "'");
        }
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const fs::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    try {
        return parse_config(in, path.parent_path().empty() ? fs::path(".") : path.parent_path());
    } catch (const ConfigError &) {
        throw;
    } catch (const std::exception &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

/// Absolute output paths are kept; relative ones resolve against $SHA_BENCH_OUTPUT if set.
inline fs::path resolve_output(const fs::path &output) {
    if (output.is_absolute()) {
        return output;
    }
    if (const char *root = std::getenv(kOutputEnv); root != nullptr && *root != '\0') {
        return fs::path(root) / output;
    }
    return output;
}

// ---------------------------------------------------------------- cells

struct Cell {
    std::size_t instance;
    std::size_t architecture;
    std::size_t strategy;
    std::uint64_t seed;
};

struct MetricRow {
    std::string cell;
    std::string graph;
    std::string architecture;
    std::string strategy;
    std::uint64_t seed{0};
    double final_accuracy{0.0};
    double most_likely_accuracy{0.0};
    std::size_t total_iterations{0};
    double final_energy{0.0};
};

/// Matrix order: instance, architecture, strategy, seed (outermost first).
inline std::vector<Cell> cells(const ExperimentConfig &cfg) {
    std::vector<Cell> out;
    out.reserve(cfg.n_cells());
    for (std::size_t i = 0; i < cfg.instances.size(); ++i) {
        for (std::size_t a = 0; a < cfg.architectures.size(); ++a) {
            for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
                for (auto seed : cfg.seeds) {
                    out.push_back({i, a, s, seed});
                }
            }
        }
    }
    return out;
}

inline std::string cell_id(const ExperimentConfig &cfg, const Cell &c) {
    std::string label = cfg.strategies[c.strategy].label();
    std::replace(label.begin(), label.end(), ':', '-');
    return cfg.instances[c.instance].id + "__" +
           std::string(architecture_name(cfg.architectures[c.architecture])) + "__" + label +
           "__s" + std::to_string(c.seed);
}

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string read_file(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Runs one cell and returns its JSONL record text.
inline std::string run_cell(const ExperimentConfig &cfg, const Cell &c) {
    const GraphInstance &g = cfg.instances[c.instance];
    const ArchitectureId arch = cfg.architectures[c.architecture];
    const StrategySpec &spec = cfg.strategies[c.strategy];
    TrainingConfig tc;
    tc.max_iters = cfg.max_iters;
    tc.shots = cfg.shots;
    tc.coarse_threshold = cfg.coarse_threshold;
    tc.fine_threshold = cfg.fine_threshold;
    tc.initial_step = cfg.initial_step;
    tc.seed = c.seed;
    const RunRecord rec = train(spec, g, arch, cfg.n_layers, tc, true);

    const auto state = run_circuit(rec.circuit, rec.final_params);
    double final_accuracy = 0.0;
    if (cfg.metric_mode == MetricMode::Exact || cfg.shots == 0) {
        final_accuracy = accuracy(state, g);
    } else {
        final_accuracy = accuracy(sample_shots(state, cfg.shots, derive_seed(c.seed, 0xF1A1)), g);
    }
    std::vector<char> flags;
    flags.reserve(rec.metric_trace.size());
    for (const auto &m : rec.metric_trace) {
        flags.push_back(m.most_likely_correct ? 1 : 0);
    }
    const double ml = most_likely_accuracy(flags, cfg.trailing_fraction);

    using nlohmann::json;
    json head = {{"schema", kSchemaVersion},
                 {"type", "run"},
                 {"cell", cell_id(cfg, c)},
                 {"graph", g.id},
                 {"architecture", rec.architecture},
                 {"strategy", spec.label()},
                 {"seed", c.seed},
                 {"shots", cfg.shots},
                 {"layers", cfg.n_layers},
                 {"max_iters", cfg.max_iters},
                 {"metric_mode", cfg.metric_mode == MetricMode::Exact ? "exact" : "shots"},
                 {"trailing_fraction", cfg.trailing_fraction},
                 {"final_accuracy", final_accuracy},
                 {"most_likely_accuracy", ml},
                 {"total_iterations", rec.total_iterations},
                 {"final_energy", expectation_exact(state, coloring_hamiltonian(g))},
                 {"warnings", rec.warnings}};
    std::string out = head.dump() + '\n';
    for (std::size_t i = 0; i < rec.stages.size(); ++i) {
        const auto &st = rec.stages[i];
        json line = {{"type", "stage"},
                     {"index", i},
                     {"label", st.label},
                     {"n_layers", st.n_layers},
                     {"n_terms", st.term_indices.size()},
                     {"n_trainable", st.trainable.size()},
                     {"threshold", st.threshold},
                     {"max_iters", st.max_iters},
                     {"iterations", st.result.iterations_used},
                     {"best_value", st.result.best_value},
                     {"final_radius", st.result.final_radius},
                     {"start_fidelity", st.start_fidelity ? json(*st.start_fidelity) : json()}};
        out += line.dump() + '\n';
    }
    out += json{{"type", "params"}, {"values", rec.final_params}}.dump() + '\n';
    return out;
}

inline MetricRow parse_record(const std::string &text) {
    const auto nl = text.find('\n');
    const auto head = nlohmann::json::parse(text.substr(0, nl));
    if (head.at("schema").get<int>() != kSchemaVersion || head.at("type") != "run") {
        throw std::runtime_error("record: unsupported schema or missing run line");
    }
    MetricRow r;
    r.cell = head.at("cell").get<std::string>();
    r.graph = head.at("graph").get<std::string>();
    r.architecture = head.at("architecture").get<std::string>();
    r.strategy = head.at("strategy").get<std::string>();
    r.seed = head.at("seed").get<std::uint64_t>();
    r.final_accuracy = head.at("final_accuracy").get<double>();
    r.most_likely_accuracy = head.at("most_likely_accuracy").get<double>();
    r.total_iterations = head.at("total_iterations").get<std::size_t>();
    r.final_energy = head.at("final_energy").get<double>();
    return r;
}

// ---------------------------------------------------------------- index

struct IndexEntry {
    bool ok{false};
    std::string detail; // checksum or failure message
};

/// Last entry per cell wins.
inline std::map<std::string, IndexEntry> read_index(const fs::path &path) {
    std::map<std::string, IndexEntry> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) {
            continue; // torn write
        }
        out[line.substr(0, t1)] = {line.substr(t1 + 1, t2 - t1 - 1) == "ok", line.substr(t2 + 1)};
    }
    return out;
}

// ---------------------------------------------------------------- aggregation

struct Stats {
    double mean{0.0};
    double median{0.0};
    double q1{0.0};
    double q3{0.0};
    double min{0.0};
    double max{0.0};
};

/// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> sorted, double q) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile: empty sample");
    }
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline Stats stats(const std::vector<double> &values) {
    if (values.empty()) {
        throw std::invalid_argument("stats: empty sample");
    }
    Stats s;
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    s.mean = sum / static_cast<double>(values.size());
    s.median = quantile(values, 0.5);
    s.q1 = quantile(values, 0.25);
    s.q3 = quantile(values, 0.75);
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    return s;
}

struct SummaryRow {
    std::string strategy;
    std::string architecture; // "all" for the pooled row
    std::size_t n{0};
    Stats accuracy;
    Stats most_likely;
    Stats iterations;
    std::optional<double> improvement_pp; // mean accuracy minus SVQE's, in percentage points
};

/**
 * Per-strategy statistics pooled over graphs, architectures and seeds, then
 * per (strategy, architecture). Strategy order follows first appearance.
 */
inline std::vector<SummaryRow> aggregate(const std::vector<MetricRow> &rows) {
    if (rows.empty()) {
        throw std::invalid_argument("aggregate: no rows");
    }
    std::vector<std::string> strategies;
    std::vector<std::string> archs;
    for (const auto &r : rows) {
        if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end()) {
            strategies.push_back(r.strategy);
        }
        if (std::find(archs.begin(), archs.end(), r.architecture) == archs.end()) {
            archs.push_back(r.architecture);
        }
    }
    std::vector<std::string> groups{"all"};
    if (archs.size() > 1) {
        groups.insert(groups.end(), archs.begin(), archs.end());
    }
    std::vector<SummaryRow> out;
    for (const auto &group : groups) {
        std::optional<double> baseline;
        const std::size_t first = out.size();
        for (const auto &s : strategies) {
            std::vector<double> acc;
            std::vector<double> ml;
            std::vector<double> it;
            for (const auto &r : rows) {
                if (r.strategy == s && (group == "all" || r.architecture == group)) {
                    acc.push_back(r.final_accuracy);
                    ml.push_back(r.most_likely_accuracy);
                    it.push_back(static_cast<double>(r.total_iterations));
                }
            }
            if (acc.empty()) {
                continue;
            }
            SummaryRow row{s, group, acc.size(), stats(acc), stats(ml), stats(it), std::nullopt};
            if (s == "SVQE") {
                baseline = row.accuracy.mean;
            }
            out.push_back(std::move(row));
        }
        if (baseline) {
            for (std::size_t i = first; i < out.size(); ++i) {
                out[i].improvement_pp = 100.0 * (out[i].accuracy.mean - *baseline);
            }
        }
    }
    return out;
}

inline const char *kRowsHeader = "cell,graph,architecture,strategy,seed,final_accuracy,"
                                 "most_likely_accuracy,total_iterations,final_energy";
inline const char *kSummaryHeader =
    "strategy,architecture,n,acc_mean,acc_median,acc_q1,acc_q3,acc_min,acc_max,ml_mean,"
    "ml_median,ml_q1,ml_q3,ml_min,ml_max,iter_mean,iter_median,iter_q1,iter_q3,iter_min,"
    "iter_max,improvement_pp";

inline void write_rows_csv(std::ostream &os, const std::vector<MetricRow> &rows) {
    os << "# sha-bench rows v" << kSchemaVersion << '\n' << kRowsHeader << '\n';
    for (const auto &r : rows) {
        os << r.cell << ',' << r.graph << ',' << r.architecture << ',' << r.strategy << ','
           << r.seed << ',' << format_double(r.final_accuracy) << ','
           << format_double(r.most_likely_accuracy) << ',' << r.total_iterations << ','
           << format_double(r.final_energy) << '\n';
    }
}

inline void write_summary_csv(std::ostream &os, const std::vector<SummaryRow> &rows) {
    const auto put = [&](const Stats &s) {
        os << ',' << format_double(s.mean) << ',' << format_double(s.median) << ','
           << format_double(s.q1) << ',' << format_double(s.q3) << ',' << format_double(s.min)
           << ',' << format_double(s.max);
    };
    os << "# sha-bench summary v" << kSchemaVersion << '\n' << kSummaryHeader << '\n';
    for (const auto &r : rows) {
        os << r.strategy << ',' << r.architecture << ',' << r.n;
        put(r.accuracy);
        put(r.most_likely);
        put(r.iterations);
        os << ',' << (r.improvement_pp ? format_double(*r.improvement_pp) : std::string()) << '\n';
    }
}

inline std::vector<SummaryRow> read_summary_csv(std::istream &is) {
    std::vector<SummaryRow> out;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        if (!header) {
            if (line != kSummaryHeader) {
                throw ConfigError("summary: unexpected header");
            }
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (f.size() == 21) {
            f.emplace_back();
        }
        if (f.size() != 22) {
            throw ConfigError("summary: bad row '" + line + "'");
        }
        const auto num = [&](std::size_t i) { return detail::parse_value<double>("summary", f[i]); };
        const auto st = [&](std::size_t i) {
            return Stats{num(i), num(i + 1), num(i + 2), num(i + 3), num(i + 4), num(i + 5)};
        };
        SummaryRow r;
        r.strategy = f[0];
        r.architecture = f[1];
        r.n = detail::parse_value<std::size_t>("summary", f[2]);
        r.accuracy = st(3);
        r.most_likely = st(9);
        r.iterations = st(15);
        if (!f[21].empty()) {
            r.improvement_pp = num(21);
        }
        out.push_back(std::move(r));
    }
    if (!header) {
        throw ConfigError("summary: missing header");
    }
    return out;
}

// ---------------------------------------------------------------- matrix

struct MatrixOptions {
    bool resume{false};
    std::optional<std::size_t> parallel; // overrides the config
    /// Called after each cell with (index, total, cell id, ok).
    std::function<void(std::size_t, std::size_t, const std::string &, bool)> progress;
    /// Test hook: stop after this many newly executed cells (simulates an interruption).
    std::optional<std::size_t> stop_after;
};

struct MatrixResult {
    fs::path output;
    std::vector<MetricRow> rows;
    std::vector<std::pair<std::string, std::string>> failures; // cell, message
    std::size_t executed{0};
    std::size_t skipped{0};
    bool complete{false};
};

/**
 * Executes every cell not already present (with a matching checksum, under
 * `resume`) and rewrites rows.csv / summary.csv from the record files. The
 * aggregate only depends on record contents, so it is identical whatever the
 * thread count or resume history.
 */
inline MatrixResult run_matrix(const ExperimentConfig &cfg, const MatrixOptions &opt = {}) {
    cfg.validate();
    MatrixResult res;
    res.output = resolve_output(cfg.output);
    const fs::path records = res.output / "records";
    const fs::path index_path = res.output / "index.tsv";
    fs::create_directories(records);

    const auto all = cells(cfg);
    std::map<std::string, IndexEntry> index;
    if (opt.resume) {
        index = read_index(index_path);
    } else {
        std::ofstream(index_path, std::ios::trunc);
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const std::string id = cell_id(cfg, all[i]);
        const auto it = index.find(id);
        const fs::path file = records / (id + ".jsonl");
        if (opt.resume && it != index.end() && it->second.ok && fs::exists(file) &&
            hex64(fnv1a64(read_file(file))) == it->second.detail) {
            ++res.skipped;
            continue;
        }
        todo.push_back(i);
    }
    if (opt.stop_after && *opt.stop_after < todo.size()) {
        todo.resize(*opt.stop_after);
    }

    std::mutex mu;
    std::ofstream index_out(index_path, std::ios::app);
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    const auto worker = [&] {
        while (true) {
            const std::size_t k = next.fetch_add(1);
            if (k >= todo.size()) {
                return;
            }
            const Cell &c = all[todo[k]];
            const std::string id = cell_id(cfg, c);
            std::string line;
            bool ok = true;
            try {
                const std::string text = run_cell(cfg, c);
                const fs::path tmp = records / (id + ".jsonl.tmp");
                {
                    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
                    out << text;
                    if (!out) {
                        throw std::runtime_error("cannot write " + tmp.string());
                    }
                }
                fs::rename(tmp, records / (id + ".jsonl"));
                line = id + "\tok\t" + hex64(fnv1a64(text));
            } catch (const std::exception &e) {
                ok = false;
                std::string msg = e.what();
                std::replace(msg.begin(), msg.end(), '\t', ' ');
                std::replace(msg.begin(), msg.end(), '\n', ' ');
                line = id + "\tfail\t" + msg;
            }
            std::lock_guard lock(mu);
            index_out << line << '\n' << std::flush;
            ++done;
            if (opt.progress) {
                opt.progress(done, todo.size(), id, ok);
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(opt.parallel.value_or(cfg.parallel), 1,
                                                        std::max<std::size_t>(todo.size(), 1));
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t + 1 < threads; ++t) {
            pool.emplace_back(worker);
        }
        worker();
    }
    index_out.close();
    res.executed = todo.size();

    // Rebuild rows from disk in matrix order.
    const auto final_index = read_index(index_path);
    bool missing = false;
    for (const auto &c : all) {
        const std::string id = cell_id(cfg, c);
        const auto it = final_index.find(id);
        if (it != final_index.end() && !it->second.ok) {
            res.failures.emplace_back(id, it->second.detail);
            continue;
        }
        const fs::path file = records / (id + ".jsonl");
        if (it == final_index.end() || !fs::exists(file)) {
            missing = true;
            continue;
        }
        res.rows.push_back(parse_record(read_file(file)));
    }
    res.complete = !missing && res.failures.empty();
    if (!res.rows.empty()) {
        std::ofstream rows_out(res.output / "rows.csv", std::ios::binary | std::ios::trunc);
        write_rows_csv(rows_out, res.rows);
        std::ofstream sum_out(res.output / "summary.csv", std::ios::binary | std::ios::trunc);
        write_summary_csv(sum_out, aggregate(res.rows));
    }
    return res;
}

/// Rows recomputed from the record files named in the index (matrix order not required).
inline std::vector<MetricRow> rows_from_records(const fs::path &output) {
    std::vector<MetricRow> out;
    for (const auto &[id, entry] : read_index(output / "index.tsv")) {
        if (entry.ok) {
            out.push_back(parse_record(read_file(output / "records" / (id + ".jsonl"))));
        }
    }
    return out;
}

// ---------------------------------------------------------------- report

/// Plain-text table of the pooled and per-architecture summaries.
inline std::string format_report(const std::vector<SummaryRow> &rows) {
    std::ostringstream os;
    std::string group;
    char buf[256];
    for (const auto &r : rows) {
        if (r.architecture != group) {
            group = r.architecture;
            os << (os.tellp() > 0 ? "\n" : "") << "architecture: " << group << '\n';
            std::snprintf(buf, sizeof buf, "%-18s %5s %9s %9s %9s %10s %10s\n", "strategy", "n",
                          "acc_mean", "acc_med", "ml_mean", "iter_mean", "vs_SVQE_pp");
            os << buf;
        }
        std::string imp = "-";
        if (r.improvement_pp) {
            std::snprintf(buf, sizeof buf, "%+.2f", *r.improvement_pp);
            imp = buf;
        }
        std::snprintf(buf, sizeof buf, "%-18s %5zu %9.4f %9.4f %9.4f %10.1f %10s\n",
                      r.strategy.c_str(), r.n, r.accuracy.mean, r.accuracy.median,
                      r.most_likely.mean, r.iterations.mean, imp.c_str());
        os << buf;
    }
    return os.str();
}

// ---------------------------------------------------------------- plots

enum class PlotKind { AccuracyBox, MostLikelyBox, IterationsBar };

inline std::string_view plot_name(PlotKind k) {
    switch (k) {
    case PlotKind::AccuracyBox: return "accuracy_box";
    case PlotKind::MostLikelyBox: return "most_likely_box";
    case PlotKind::IterationsBar: return "iterations_bar";
    }
    return "?";
}

inline PlotKind parse_plot_kind(std::string_view s) {
    for (auto k : {PlotKind::AccuracyBox, PlotKind::MostLikelyBox, PlotKind::IterationsBar}) {
        if (plot_name(k) == s) {
            return k;
        }
    }
    throw ConfigError("unknown plot kind '" + std::string(s) + "'");
}

namespace detail {

inline std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace detail

/**
 * SVG rendering of the pooled ("all") summary rows: one group per strategy.
 * Box plots draw q1..q3 boxes, a median bar, min/max whiskers and a mean dot
 * on a fixed [0, 1] axis; the bar chart shows mean total iterations with the
 * interquartile range as an error bar. Output is a pure function of `rows`.
 */
inline std::string render_svg(const std::vector<SummaryRow> &rows, PlotKind kind) {
    std::vector<const SummaryRow *> pooled;
    for (const auto &r : rows) {
        if (r.architecture == "all") {
            pooled.push_back(&r);
        }
    }
    if (pooled.empty()) {
        throw std::invalid_argument("plot: empty summary");
    }
    const double left = 70;
    const double top = 40;
    const double plot_h = 300;
    const double slot = 70;
    const double width = left + slot * static_cast<double>(pooled.size()) + 30;
    const double height = top + plot_h + 110;
    double y_max = 1.0;
    if (kind == PlotKind::IterationsBar) {
        y_max = 0.0;
        for (const auto *r : pooled) {
            y_max = std::max(y_max, r->iterations.q3);
        }
        y_max = y_max <= 0.0 ? 1.0 : y_max * 1.1;
    }
    const auto y = [&](double v) { return top + plot_h * (1.0 - v / y_max); };
    using detail::fmt;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt("%.0f", width)
       << "\" height=\"" << fmt("%.0f", height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const char *title = kind == PlotKind::AccuracyBox     ? "Final accuracy per strategy"
                        : kind == PlotKind::MostLikelyBox ? "Most-likely-shot accuracy per strategy"
                                                          : "Total optimization iterations per strategy";
    os << "<text x=\"" << fmt("%.1f", width / 2) << "\" y=\"20\" text-anchor=\"middle\" "
       << "font-size=\"14\">" << title << "</text>\n";
    // axis and gridlines
    for (int t = 0; t <= 5; ++t) {
        const double v = y_max * t / 5.0;
        os << "<line x1=\"" << fmt("%.1f", left) << "\" x2=\"" << fmt("%.1f", width - 20)
           << "\" y1=\"" << fmt("%.1f", y(v)) << "\" y2=\"" << fmt("%.1f", y(v))
           << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << fmt("%.1f", left - 6) << "\" y=\"" << fmt("%.1f", y(v) + 4)
           << "\" text-anchor=\"end\">"
           << (kind == PlotKind::IterationsBar ? fmt("%.0f", v) : fmt("%.1f", v)) << "</text>\n";
    }
    os << "<line x1=\"" << fmt("%.1f", left) << "\" x2=\"" << fmt("%.1f", left) << "\" y1=\""
       << fmt("%.1f", top) << "\" y2=\"" << fmt("%.1f", top + plot_h) << "\" stroke=\"black\"/>\n";

    for (std::size_t i = 0; i < pooled.size(); ++i) {
        const auto &r = *pooled[i];
        const double cx = left + slot * (static_cast<double>(i) + 0.5);
        const double half = slot * 0.3;
        os << "<g class=\"group\" data-strategy=\"" << detail::xml_escape(r.strategy) << "\">\n";
        if (kind == PlotKind::IterationsBar) {
            const Stats &s = r.iterations;
            os << "<rect x=\"" << fmt("%.1f", cx - half) << "\" y=\"" << fmt("%.1f", y(s.mean))
               << "\" width=\"" << fmt("%.1f", 2 * half) << "\" height=\""
               << fmt("%.1f", top + plot_h - y(s.mean)) << "\" fill=\"#4c72b0\"/>\n";
            os << "<line x1=\"" << fmt("%.1f", cx) << "\" x2=\"" << fmt("%.1f", cx) << "\" y1=\""
               << fmt("%.1f", y(s.q1)) << "\" y2=\"" << fmt("%.1f", y(s.q3))
               << "\" stroke=\"black\"/>\n";
        } else {
            const Stats &s = kind == PlotKind::AccuracyBox ? r.accuracy : r.most_likely;
            os << "<line x1=\"" << fmt("%.1f", cx) << "\" x2=\"" << fmt("%.1f", cx) << "\" y1=\""
               << fmt("%.1f", y(s.min)) << "\" y2=\"" << fmt("%.1f", y(s.max))
               << "\" stroke=\"black\"/>\n";
            os << "<rect x=\"" << fmt("%.1f", cx - half) << "\" y=\"" << fmt("%.1f", y(s.q3))
               << "\" width=\"" << fmt("%.1f", 2 * half) << "\" height=\""
               << fmt("%.1f", std::max(y(s.q1) - y(s.q3), 0.5))
               << "\" fill=\"#a1c9f4\" stroke=\"black\"/>\n";
            os << "<line x1=\"" << fmt("%.1f", cx - half) << "\" x2=\"" << fmt("%.1f", cx + half)
               << "\" y1=\"" << fmt("%.1f", y(s.median)) << "\" y2=\""
               << fmt("%.1f", y(s.median)) << "\" stroke=\"#c44e52\" stroke-width=\"2\"/>\n";
            os << "<circle cx=\"" << fmt("%.1f", cx) << "\" cy=\"" << fmt("%.1f", y(s.mean))
               << "\" r=\"3\" fill=\"black\"/>\n";
        }
        os << "<text transform=\"translate(" << fmt("%.1f", cx) << ','
           << fmt("%.1f", top + plot_h + 12) << ") rotate(40)\">"
           << detail::xml_escape(r.strategy) << "</text>\n</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

/// Writes plots/<kind>.svg for each kind; returns the written paths.
inline std::vector<fs::path> plot_summary(const std::vector<SummaryRow> &rows, const fs::path &dir,
                                          const std::vector<PlotKind> &kinds) {
    fs::create_directories(dir);
    std::vector<fs::path> out;
    for (auto k : kinds) {
        const fs::path p = dir / (std::string(plot_name(k)) + ".svg");
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        f << render_svg(rows, k);
        out.push_back(p);
    }
    return out;
}

} // namespace sha::bench
