#include "hysrl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "hysrl/csv.hpp"
#include "hysrl/dp.hpp"
#include "hysrl/mdp_io.hpp"

namespace hysrl {

using nlohmann::json;

namespace {

double parse_number(std::string_view tok, std::string_view what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw InvalidInput("environment spec: bad " + std::string(what) + " '" + std::string(tok) + "'");
    return v;
}

int parse_int(std::string_view tok, std::string_view what) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw InvalidInput("environment spec: bad " + std::string(what) + " '" + std::string(tok) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

NamedEnv named(TabularMDP mdp, std::string descriptor) {
    return {std::move(mdp), std::move(descriptor)};
}

NamedEnv gridworld_env(const GridWorldSpec& spec) {
    return named(build_gridworld(spec), spec.to_json());
}

NamedEnv hard_env(const HardInstanceSpec& spec) {
    return named(build_hard_instance(spec), spec.to_json());
}

NamedEnv file_env(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::string generator = generator_from_json(text);
    if (generator.empty()) generator = json{{"kind", "file"}, {"path", path.generic_string()}}.dump();
    return named(mdp_from_json(text), std::move(generator));
}

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

/// Runs fn(i) for i in [0,n) on a small pool; the first exception is rethrown after joining.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal();
}

bool budget_exhausted(const ExperimentConfig& cfg, const RunResult& r) {
    return cfg.episodes && r.total_episodes() >= *cfg.episodes;
}

bool run_hit_cap(const ExperimentConfig& cfg, const RunResult& r) {
    return r.shift_cap_hit || (r.vi_cap_hit && !budget_exhausted(cfg, r));
}

std::string double_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

std::optional<double> parse_optional_double(const std::string& cell) {
    if (cell.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (cell == "inf") return std::numeric_limits<double>::infinity();
        throw FormatError("metrics csv: bad number '" + cell + "'");
    }
    return v;
}

template <class Int>
Int parse_integer_cell(const std::string& cell) {
    Int v{};
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw FormatError("metrics csv: bad integer '" + cell + "'");
    return v;
}

json curve_json(const std::vector<CurvePoint>& curve) {
    json out = json::array();
    for (const auto& p : curve)
        out.push_back({{"samples", p.samples}, {"mean", p.mean}, {"lo", p.lo}, {"hi", p.hi}, {"n", p.n}});
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// environments and evaluation

NamedEnv parse_env_spec(std::string_view spec) {
    if (spec.empty()) throw InvalidInput("environment spec is empty");
    const auto parts = split(spec, ':');
    const std::string_view head = parts.front();
    if (head == "gridworld-source" || head == "gridworld-target") {
        if (parts.size() > 2) throw InvalidInput("environment spec: expected " + std::string(head) + "[:p]");
        const double p = parts.size() == 2 ? parse_number(parts[1], "success probability") : 0.95;
        return gridworld_env(head == "gridworld-source" ? GridWorldSpec::source(p) : GridWorldSpec::target(p));
    }
    if (head == "hard") {
        if (parts.size() < 2 || parts.size() > 3)
            throw InvalidInput("environment spec: expected hard:S,A,H,gamma[:a0;a1;...]");
        const auto nums = split(parts[1], ',');
        if (nums.size() != 4) throw InvalidInput("environment spec: hard needs S,A,H,gamma");
        HardInstanceSpec hs;
        hs.bandit_states = parse_int(nums[0], "S");
        hs.actions = parse_int(nums[1], "A");
        hs.horizon = parse_int(nums[2], "H");
        hs.gamma = parse_number(nums[3], "gamma");
        if (parts.size() == 3)
            for (auto tok : split(parts[2], ';')) hs.optimal_actions.push_back(parse_int(tok, "optimal action"));
        return hard_env(hs);
    }
    return file_env(std::filesystem::path(std::string(spec)));
}

std::string to_string(EvalMode mode) {
    switch (mode) {
        case EvalMode::Exact: return "exact";
        case EvalMode::MonteCarlo: return "monte_carlo_100";
        case EvalMode::Both: return "both";
    }
    return "exact";
}

EvalMode eval_mode_from_string(std::string_view name) {
    if (name == "exact") return EvalMode::Exact;
    if (name == "mc" || name == "monte_carlo_100") return EvalMode::MonteCarlo;
    if (name == "both") return EvalMode::Both;
    throw InvalidInput("unknown evaluation mode '" + std::string(name) + "' (expected exact, mc or both)");
}

GapEvaluation evaluate_policy(const TabularMDP& env, const Policy& pi, EvalMode mode, Rng& rng,
                              std::optional<double> optimal_value) {
    const double vstar = optimal_value ? *optimal_value : optimal_values(env).values.initial_value(env.rho());
    GapEvaluation out;
    if (mode != EvalMode::MonteCarlo) out.exact = optimality_gap(env, pi, vstar);
    if (mode != EvalMode::Exact) {
        double total = 0.0;
        for (int i = 0; i < kMonteCarloEpisodes; ++i) total += episode_return(sample_episode(env, pi, rng, i));
        out.mc = vstar - total / kMonteCarloEpisodes;
    }
    return out;
}

SourceDataset gen_source_dataset(const TabularMDP& env, long long episodes, double delta, double bonus_scale,
                                 Rng& rng) {
    if (episodes < 1) throw InvalidInput("gen_source_dataset: episodes must be >= 1");
    EmpiricalModel counts(env.dims());
    explore_reward_free(env, counts, ExplorationSettings{delta, bonus_scale, episodes, std::nullopt}, rng);
    return SourceDataset{SourceMetadata{1, env.dims(), fingerprint(env), episodes}, std::move(counts)};
}

// ---------------------------------------------------------------------------
// configuration

void ExperimentConfig::validate() const {
    try {
        hysrl.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    if (seeds.empty()) throw ConfigError("config: seeds must be nonempty");
    auto sorted = seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ConfigError("config: seeds must be distinct");
    if (algorithms.empty()) throw ConfigError("config: algorithms must be nonempty");
    for (std::size_t i = 0; i < algorithms.size(); ++i)
        for (std::size_t j = i + 1; j < algorithms.size(); ++j)
            if (algorithms[i] == algorithms[j]) throw ConfigError("config: algorithm listed twice");
    if (eval_interval < 1) throw ConfigError("config: eval_interval must be >= 1");
    if (episodes && *episodes < 1) throw ConfigError("config: episodes must be >= 1");
    if (threads < 0) throw ConfigError("config: threads must be >= 0");
    if (source_episodes < 1) throw ConfigError("config: source episodes must be >= 1");
    if (sweep_target_success.empty()) throw ConfigError("config: sweep grid must be nonempty");
    for (double p : sweep_target_success)
        if (!(p > 0.0 && p <= 1.0)) throw ConfigError("config: sweep success probabilities must lie in (0,1]");
    for (double p : {gridworld_source_success, gridworld_target_success})
        if (!(p > 0.0 && p <= 1.0)) throw ConfigError("config: gridworld success probabilities must lie in (0,1]");
    if (env == EnvKind::Files && (source_env_path.empty() || target_env_path.empty()))
        throw ConfigError("config: [files] needs both source and target");
}

ExperimentConfig parse_experiment_config(std::string_view toml_text, const std::filesystem::path& base_dir) {
    const TomlDocument doc = parse_toml(toml_text);
    static const std::vector<std::string> known{"",         "experiment",    "hysrl", "source",
                                                "gridworld", "hard_instance", "files", "sweep"};
    for (const auto& [name, table] : doc)
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw ConfigError("config: unknown table [" + name + "]");
    auto section = [&](const std::string& name) {
        auto it = doc.find(name);
        return ConfigSection(name, it == doc.end() ? nullptr : &it->second);
    };

    ExperimentConfig cfg;
    try {
        auto root = section("");
        root.reject_unused();

        auto ex = section("experiment");
        const std::string env = ex.get_string("env", "gridworld");
        if (env == "gridworld") {
            cfg.env = EnvKind::GridWorld;
        } else if (env == "hard_instance") {
            cfg.env = EnvKind::HardInstance;
        } else if (env == "files") {
            cfg.env = EnvKind::Files;
        } else {
            throw ConfigError("config: env must be gridworld, hard_instance or files");
        }
        cfg.algorithms.clear();
        for (const auto& name : ex.get_string_array("algorithms", {"hysrl", "bpi_ucbvi"}))
            cfg.algorithms.push_back(algorithm_from_string(name));
        cfg.seeds.clear();
        for (auto s : ex.get_int_array("seeds", {0})) {
            if (s < 0) throw ConfigError("config: seeds must be nonnegative");
            cfg.seeds.push_back(static_cast<std::uint64_t>(s));
        }
        if (ex.has("episodes")) cfg.episodes = ex.get_int("episodes", 0);
        cfg.eval_interval = ex.get_int("eval_interval", cfg.eval_interval);
        cfg.eval_mode = eval_mode_from_string(ex.get_string("eval_mode", "exact"));
        cfg.output_dir = resolve(base_dir, ex.get_string("output_dir", "results"));
        cfg.threads = static_cast<int>(ex.get_int("threads", 0));
        ex.reject_unused();

        auto hy = section("hysrl");
        auto& h = cfg.hysrl;
        h.epsilon = hy.get_double("epsilon", h.epsilon);
        h.delta = hy.get_double("delta", h.delta);
        h.beta = hy.get_double("beta", h.beta);
        h.sigma = hy.get_double("sigma", h.sigma);
        h.shift_bonus_scale = hy.get_double("shift_bonus_scale", h.shift_bonus_scale);
        h.vi_bonus_scale = hy.get_double("vi_bonus_scale", h.vi_bonus_scale);
        h.shift_max_episodes = hy.get_int("shift_max_episodes", h.shift_max_episodes);
        h.vi_max_episodes = hy.get_int("vi_max_episodes", h.vi_max_episodes);
        if (hy.has("min_source_count")) h.min_source_count = hy.get_int("min_source_count", 0);
        h.augment_insufficient = hy.get_bool("augment_insufficient", h.augment_insufficient);
        h.reuse_shift_counts = hy.get_bool("reuse_shift_counts", h.reuse_shift_counts);
        hy.reject_unused();

        auto src = section("source");
        cfg.source_episodes = src.get_int("episodes", cfg.source_episodes);
        const auto source_seed = src.get_int("seed", 0);
        if (source_seed < 0) throw ConfigError("config: source seed must be nonnegative");
        cfg.source_seed = static_cast<std::uint64_t>(source_seed);
        if (src.has("path")) cfg.source_path = resolve(base_dir, src.get_string("path", ""));
        src.reject_unused();

        auto gw = section("gridworld");
        cfg.gridworld_source_success = gw.get_double("source_success", cfg.gridworld_source_success);
        cfg.gridworld_target_success = gw.get_double("target_success", cfg.gridworld_target_success);
        cfg.gridworld_once_only = gw.get_bool("once_only", cfg.gridworld_once_only);
        gw.reject_unused();

        auto hi = section("hard_instance");
        cfg.hard.bandit_states = static_cast<int>(hi.get_int("bandit_states", cfg.hard.bandit_states));
        cfg.hard.actions = static_cast<int>(hi.get_int("actions", cfg.hard.actions));
        cfg.hard.horizon = static_cast<int>(hi.get_int("horizon", cfg.hard.horizon));
        cfg.hard.gamma = hi.get_double("gamma", cfg.hard.gamma);
        for (auto a : hi.get_int_array("optimal_actions", {})) cfg.hard.optimal_actions.push_back(static_cast<int>(a));
        hi.reject_unused();

        auto files = section("files");
        if (files.has("source")) cfg.source_env_path = resolve(base_dir, files.get_string("source", ""));
        if (files.has("target")) cfg.target_env_path = resolve(base_dir, files.get_string("target", ""));
        files.reject_unused();

        auto sw = section("sweep");
        cfg.sweep_target_success = sw.get_double_array("target_success", cfg.sweep_target_success);
        sw.reject_unused();
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("cannot read config: ") + e.what());
    }
    return parse_experiment_config(text, path.parent_path());
}

EnvPair make_env_pair(const ExperimentConfig& cfg, std::optional<double> target_success) {
    switch (cfg.env) {
        case EnvKind::GridWorld: {
            const double p = target_success.value_or(cfg.gridworld_target_success);
            return {gridworld_env(GridWorldSpec::source(cfg.gridworld_source_success, cfg.gridworld_once_only)),
                    gridworld_env(GridWorldSpec::target(p, cfg.gridworld_once_only))};
        }
        case EnvKind::HardInstance: {
            HardInstanceSpec reference = cfg.hard;
            reference.optimal_actions.clear();
            return {hard_env(reference), hard_env(cfg.hard)};
        }
        case EnvKind::Files: {
            auto source = file_env(cfg.source_env_path);
            auto target = file_env(cfg.target_env_path);
            if (source.mdp.dims() != target.mdp.dims())
                throw DimensionError("source " + to_string(source.mdp.dims()) + " and target " +
                                     to_string(target.mdp.dims()) + " differ in shape");
            return {std::move(source), std::move(target)};
        }
    }
    throw InvalidInput("unknown environment kind");
}

// ---------------------------------------------------------------------------
// metrics

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream os;
    os << kMetricsHeader << '\n';
    for (const auto& r : rows)
        os << r.seed << ',' << r.phase << ',' << r.episode << ',' << r.samples << ',' << format_double(r.stat) << ','
           << double_cell(r.exact_gap) << ',' << double_cell(r.mc_gap) << '\n';
    return os.str();
}

std::vector<MetricsRow> parse_metrics_csv(std::string_view text) {
    const CsvTable table = parse_csv(text);
    static const std::vector<std::string> required{"seed", "phase", "episode", "samples",
                                                   "stat", "exact_gap", "mc_gap"};
    for (const auto& col : required)
        if (table.column(col) < 0) throw FormatError("metrics csv: missing column '" + col + "'");
    auto cell = [&](const std::vector<std::string>& row, const char* name) -> const std::string& {
        const auto i = static_cast<std::size_t>(table.column(name));
        if (i >= row.size()) throw FormatError("metrics csv: short row");
        return row[i];
    };
    std::vector<MetricsRow> out;
    for (const auto& row : table.rows) {
        MetricsRow r;
        r.seed = parse_integer_cell<std::uint64_t>(cell(row, "seed"));
        r.phase = cell(row, "phase");
        r.episode = parse_integer_cell<long long>(cell(row, "episode"));
        r.samples = parse_integer_cell<long long>(cell(row, "samples"));
        r.stat = parse_optional_double(cell(row, "stat")).value_or(0.0);
        r.exact_gap = parse_optional_double(cell(row, "exact_gap"));
        r.mc_gap = parse_optional_double(cell(row, "mc_gap"));
        out.push_back(std::move(r));
    }
    return out;
}

MeanCi mean_ci95(const std::vector<double>& xs) {
    if (xs.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    return {mean, 1.96 * sd / std::sqrt(n)};
}

std::vector<CurvePoint> aggregate_curve(const std::vector<MetricsRow>& rows, std::string_view column) {
    const bool exact = column == "exact_gap";
    if (!exact && column != "mc_gap" && column != "stat")
        throw InvalidInput("aggregate_curve: unsupported column '" + std::string(column) + "'");
    auto value = [&](const MetricsRow& r) -> std::optional<double> {
        if (column == "stat") return r.stat;
        return exact ? r.exact_gap : r.mc_gap;
    };
    std::map<std::uint64_t, std::vector<std::pair<long long, double>>> per_seed;
    std::vector<long long> grid;
    for (const auto& r : rows) {
        const auto v = value(r);
        if (!v) continue;
        per_seed[r.seed].emplace_back(r.samples, *v);
        grid.push_back(r.samples);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (auto& [seed, series] : per_seed)
        std::stable_sort(series.begin(), series.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<CurvePoint> out;
    std::vector<double> xs;
    for (long long x : grid) {
        xs.clear();
        for (const auto& [seed, series] : per_seed) {
            // last entry with samples <= x
            auto it = std::upper_bound(series.begin(), series.end(), x,
                                       [](long long v, const auto& e) { return v < e.first; });
            if (it == series.begin()) continue;
            xs.push_back(std::prev(it)->second);
        }
        if (xs.empty()) continue;
        const auto [mean, half] = mean_ci95(xs);
        out.push_back({x, mean, mean - half, mean + half, static_cast<int>(xs.size())});
    }
    return out;
}

// ---------------------------------------------------------------------------
// runs

SeedRun run_seed(const EnvPair& envs, const SourceDataset* source, const ExperimentConfig& cfg, Algorithm algo,
                 std::uint64_t seed, double optimal_value) {
    const TabularMDP& target = envs.target.mdp;
    const long long H = target.horizon();
    const long long interval = cfg.eval_interval;
    HySRLConfig hc = cfg.hysrl;
    hc.algorithm = algo;
    if (cfg.episodes) hc.total_episode_budget = *cfg.episodes;

    Rng rng = make_rng(seed, 0);
    Rng eval_rng = make_rng(seed, 1);

    SeedRun run;
    run.seed = seed;
    auto log = [&](const char* phase, long long episode, double stat, const Policy& pi) {
        // a row for the same episode (phase hand-over) is superseded
        if (!run.rows.empty() && run.rows.back().episode == episode) run.rows.pop_back();
        const auto gap = evaluate_policy(target, pi, cfg.eval_mode, eval_rng, optimal_value);
        run.rows.push_back({seed, phase, episode, episode * H, stat, gap.exact, gap.mc});
    };

    long long shift_offset = 0;
    RunObserver obs;
    obs.on_shift = [&](const ShiftIdIteration& it) {
        shift_offset = it.episode;
        if (it.episode % interval == 0) log("shift", it.episode, it.statistic, it.backup.greedy);
    };
    obs.on_vi = [&](const VIIteration& it) {
        const long long global = shift_offset + it.episode;
        if (global % interval == 0 || it.episode == 0) log("vi", global, it.rho_pi_G, it.backup.greedy);
    };

    if (algo == Algorithm::HySRL) {
        if (!source) throw InvalidInput("run_seed: HySRL needs a source dataset");
        run.result = run_hysrl(target, *source, hc, rng, obs);
    } else {
        run.result = run_baseline(target, hc, rng, obs);
    }
    run.result.seed = seed;

    const long long total = run.result.total_episodes();
    if (run.rows.empty() || run.rows.back().episode != total) {
        const double stat = run.result.vi_trace.empty() ? 0.0 : run.result.vi_trace.back().rho_pi_G;
        log("vi", total, stat, run.result.policy);
    }
    run.final_gap = {run.rows.back().exact_gap, run.rows.back().mc_gap};
    return run;
}

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HYSRL_THREADS")) {
        int v = 0;
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size() && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SourceDataset obtain_source_dataset(const ExperimentConfig& cfg, const NamedEnv& source_env) {
    const std::string expected = fingerprint(source_env.mdp);
    if (cfg.source_path && std::filesystem::exists(*cfg.source_path)) {
        auto ds = load_source(*cfg.source_path, source_env.mdp.dims());
        if (ds.meta.env_fingerprint != expected)
            throw ConfigError("source dataset " + cfg.source_path->generic_string() + " was collected on environment " +
                              ds.meta.env_fingerprint + ", but the configured source is " + expected);
        return ds;
    }
    Rng rng = make_rng(cfg.source_seed, 7);
    auto ds = gen_source_dataset(source_env.mdp, cfg.source_episodes, cfg.hysrl.delta, cfg.hysrl.shift_bonus_scale,
                                 rng);
    save_source(cfg.source_path.value_or(cfg.output_dir / "source_dataset.txt"), ds);
    return ds;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const EnvPair envs = make_env_pair(cfg);
    if (envs.source.mdp.dims() != envs.target.mdp.dims())
        throw DimensionError("source " + to_string(envs.source.mdp.dims()) + " and target " +
                             to_string(envs.target.mdp.dims()) + " differ in shape");
    std::optional<SourceDataset> source;
    if (std::find(cfg.algorithms.begin(), cfg.algorithms.end(), Algorithm::HySRL) != cfg.algorithms.end())
        source = obtain_source_dataset(cfg, envs.source);

    ExperimentOutcome outcome;
    outcome.optimal_value = optimal_values(envs.target.mdp).values.initial_value(envs.target.mdp.rho());

    auto seeds = cfg.seeds;
    std::sort(seeds.begin(), seeds.end());
    const std::size_t per_algo = seeds.size();
    std::vector<SeedRun> runs(cfg.algorithms.size() * per_algo);
    parallel_for(runs.size(), resolve_thread_count(cfg.threads), [&](std::size_t job) {
        const Algorithm algo = cfg.algorithms[job / per_algo];
        runs[job] = run_seed(envs, source ? &*source : nullptr, cfg, algo, seeds[job % per_algo],
                             outcome.optimal_value);
    });

    json summary{{"target_environment", json::parse(envs.target.descriptor)},
                 {"source_environment", json::parse(envs.source.descriptor)},
                 {"optimal_value", outcome.optimal_value},
                 {"episodes", cfg.episodes ? json(*cfg.episodes) : json(nullptr)},
                 {"eval_interval", cfg.eval_interval},
                 {"eval_mode", to_string(cfg.eval_mode)},
                 {"horizon", envs.target.mdp.horizon()}};
    json algos = json::object();
    for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai) {
        AlgorithmOutcome ao;
        ao.algorithm = cfg.algorithms[ai];
        ao.csv_path = cfg.output_dir / (to_string(ao.algorithm) + ".csv");
        std::vector<MetricsRow> rows;
        json seeds_json = json::array();
        for (std::size_t k = 0; k < per_algo; ++k) {
            auto& run = runs[ai * per_algo + k];
            rows.insert(rows.end(), run.rows.begin(), run.rows.end());
            const auto& r = run.result;
            const long long H = envs.target.mdp.horizon();
            const bool cap = run_hit_cap(cfg, r);
            outcome.cap_hit = outcome.cap_hit || cap;
            seeds_json.push_back({{"seed", run.seed},
                                  {"shift_episodes", r.shift_episodes},
                                  {"vi_episodes", r.vi_episodes},
                                  {"total_samples", r.total_samples},
                                  {"shift_samples", r.shift_episodes * H},
                                  {"stopping_samples", r.vi_stopped ? json(r.total_samples) : json(nullptr)},
                                  {"vi_stopped", r.vi_stopped},
                                  {"source_abandoned", r.source_abandoned},
                                  {"region_size", r.region.size()},
                                  {"cap_hit", cap},
                                  {"final_exact_gap", optional_number(run.final_gap.exact)},
                                  {"final_mc_gap", optional_number(run.final_gap.mc)}});
        }
        write_file(ao.csv_path, metrics_csv(rows));
        json curves{{"exact_gap", curve_json(aggregate_curve(rows, "exact_gap"))}};
        if (cfg.eval_mode != EvalMode::Exact) curves["mc_gap"] = curve_json(aggregate_curve(rows, "mc_gap"));
        algos[to_string(ao.algorithm)] = {{"csv", ao.csv_path.filename().generic_string()},
                                          {"seeds", seeds_json},
                                          {"curves", curves}};
        for (std::size_t k = 0; k < per_algo; ++k) ao.runs.push_back(std::move(runs[ai * per_algo + k]));
        outcome.algorithms.push_back(std::move(ao));
    }
    summary["algorithms"] = algos;
    summary["cap_hit"] = outcome.cap_hit;
    outcome.summary_path = cfg.output_dir / "summary.json";
    write_file(outcome.summary_path, summary.dump(1) + "\n");
    return outcome;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
    std::ostringstream os;
    os << kSweepHeader << '\n';
    for (const auto& r : records)
        os << format_double(r.target_success) << ',' << format_double(r.true_beta) << ','
           << format_double(r.effective_beta) << ',' << to_string(r.algorithm) << ',' << r.seed << ','
           << format_double(r.optimal_value) << ',' << format_double(r.final_gap) << ','
           << format_double(r.percentage_gap) << ',' << r.total_samples << '\n';
    return os.str();
}

SweepOutcome sweep_beta(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.env != EnvKind::GridWorld) throw ConfigError("sweep: only the gridworld environment has a success grid");
    ExperimentConfig quiet = cfg;
    quiet.eval_interval = std::numeric_limits<long long>::max();

    const auto& grid = cfg.sweep_target_success;
    std::vector<EnvPair> envs;
    std::vector<double> vstar;
    std::vector<double> effective;
    for (double p : grid) {
        envs.push_back(make_env_pair(cfg, p));
        const auto& tar = envs.back().target.mdp;
        vstar.push_back(optimal_values(tar).values.initial_value(tar.rho()));
        effective.push_back(true_shift_region(envs.back().source.mdp, tar).effective_beta);
    }
    std::optional<SourceDataset> source;
    if (std::find(cfg.algorithms.begin(), cfg.algorithms.end(), Algorithm::HySRL) != cfg.algorithms.end())
        source = obtain_source_dataset(cfg, envs.front().source);

    auto seeds = cfg.seeds;
    std::sort(seeds.begin(), seeds.end());
    const std::size_t per_point = cfg.algorithms.size() * seeds.size();
    std::vector<SweepRecord> records(grid.size() * per_point);
    std::vector<char> caps(records.size(), 0);
    parallel_for(records.size(), resolve_thread_count(cfg.threads), [&](std::size_t job) {
        const std::size_t gi = job / per_point;
        const std::size_t rest = job % per_point;
        const Algorithm algo = cfg.algorithms[rest / seeds.size()];
        const std::uint64_t seed = seeds[rest % seeds.size()];
        auto run = run_seed(envs[gi], source ? &*source : nullptr, quiet, algo, seed, vstar[gi]);
        const double gap = run.final_gap.exact ? *run.final_gap.exact : *run.final_gap.mc;
        records[job] = {grid[gi],  cfg.gridworld_source_success - grid[gi], effective[gi], algo, seed, vstar[gi], gap,
                        100.0 * gap / vstar[gi], run.result.total_samples};
        caps[job] = run_hit_cap(cfg, run.result) ? 1 : 0;
    });

    SweepOutcome out;
    out.records = records;
    out.cap_hit = std::any_of(caps.begin(), caps.end(), [](char c) { return c != 0; });
    out.csv_path = cfg.output_dir / "sweep.csv";
    write_file(out.csv_path, sweep_csv(records));

    json points = json::array();
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        json per_algo = json::object();
        for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai) {
            std::vector<double> pct;
            for (std::size_t k = 0; k < seeds.size(); ++k)
                pct.push_back(records[gi * per_point + ai * seeds.size() + k].percentage_gap);
            const auto [mean, half] = mean_ci95(pct);
            per_algo[to_string(cfg.algorithms[ai])] = {{"mean_percentage_gap", mean}, {"ci95_half_width", half}};
        }
        points.push_back({{"target_success", grid[gi]},
                          {"true_beta", cfg.gridworld_source_success - grid[gi]},
                          {"effective_beta", effective[gi]},
                          {"optimal_value", vstar[gi]},
                          {"algorithms", per_algo}});
    }
    const json summary{{"points", points}, {"input_beta", cfg.hysrl.beta}, {"cap_hit", out.cap_hit}};
    write_file(cfg.output_dir / "sweep_summary.json", summary.dump(1) + "\n");
    return out;
}

}  // namespace hysrl
