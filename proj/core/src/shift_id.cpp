#include "hysrl/shift_id.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hysrl/csv.hpp"

namespace hysrl {

void ShiftIdConfig::validate() const {
    if (!(beta > 0.0 && beta <= 1.0)) throw InvalidInput("shift identification: beta must lie in (0,1]");
    if (!(sigma > 0.0 && sigma <= 1.0)) throw InvalidInput("shift identification: sigma must lie in (0,1]");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("shift identification: delta must lie in (0,1)");
    if (!(bonus_scale >= 0.0)) throw InvalidInput("shift identification: negative bonus scale");
    if (max_episodes < 1) throw InvalidInput("shift identification: max_episodes must be >= 1");
}

UncertaintyBackup backup_W(const EmpiricalModel& target, int horizon, const BonusFunctions& bonus) {
    const Dims d{target.dims().S, target.dims().A, horizon};
    const auto [S, A, H] = d;
    UncertaintyBackup out{UncertaintyTable(d), Policy{}};

    // 4H g1(n)/n does not depend on h; +inf marks unvisited pairs
    std::vector<double> width(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const auto n = static_cast<double>(target.n(s, a));
            width[static_cast<std::size_t>(s) * A + a] =
                n > 0 ? 4.0 * H * bonus.g1(n) / n : std::numeric_limits<double>::infinity();
        }

    std::vector<ActionId> actions(static_cast<std::size_t>(H) * S);
    std::vector<double> next_max(static_cast<std::size_t>(S), 0.0);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            int best = 0;
            for (int a = 0; a < A; ++a) {
                const double wd = width[static_cast<std::size_t>(s) * A + a];
                double value = 1.0;
                if (std::isfinite(wd)) {
                    const auto row = target.row(s, a);
                    double propagated = 0.0;
                    for (int n = 0; n < S; ++n)
                        propagated += row[static_cast<std::size_t>(n)] * next_max[static_cast<std::size_t>(n)];
                    value = std::min(1.0, wd + propagated);
                }
                out.W.at(h, s, a) = value;
                if (value > out.W.at(h, s, best)) best = a;
            }
            actions[static_cast<std::size_t>(h) * S + s] = best;
        }
        for (int s = 0; s < S; ++s)
            next_max[static_cast<std::size_t>(s)] = out.W.at(h, s, actions[static_cast<std::size_t>(h) * S + s]);
    }
    out.greedy = Policy::deterministic(d, std::move(actions));
    return out;
}

double stopping_statistic(const UncertaintyTable& W, const Policy& pi, std::span<const double> rho) {
    double m = 0.0;
    for (int s = 0; s < W.dims.S; ++s) m += rho[static_cast<std::size_t>(s)] * W.at(0, s, pi.action(0, s));
    m = std::max(0.0, m);
    return 3.0 * std::sqrt(m) + m;
}

ShiftRegion estimate_shift_region(const EmpiricalModel& source, const EmpiricalModel& target, double beta) {
    if (source.dims().S != target.dims().S || source.dims().A != target.dims().A)
        throw DimensionError("shift region: source " + to_string(source.dims()) + " vs target " +
                             to_string(target.dims()));
    const int S = source.dims().S;
    const int A = source.dims().A;
    ShiftRegion region{PairSet(S, A), std::vector<double>(static_cast<std::size_t>(S) * A), 1.0};
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const double tv = tv_distance(source.row(s, a), target.row(s, a));
            region.tv[static_cast<std::size_t>(s) * A + a] = tv;
            if (tv > beta / 2.0) region.members.insert(s, a);
        }
    return region;
}

ShiftRegion true_shift_region(const TabularMDP& src, const TabularMDP& tar) {
    if (src.dims() != tar.dims())
        throw DimensionError("true shift region: " + to_string(src.dims()) + " vs " + to_string(tar.dims()));
    const auto [S, A, H] = src.dims();
    ShiftRegion region{PairSet(S, A), std::vector<double>(static_cast<std::size_t>(S) * A), 1.0};
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            const auto p = src.row(s, a);
            const auto q = tar.row(s, a);
            const bool differs = !std::equal(p.begin(), p.end(), q.begin());
            const double tv = differs ? tv_distance(p, q) : 0.0;
            region.tv[static_cast<std::size_t>(s) * A + a] = tv;
            if (differs) {
                region.members.insert(s, a);
                region.effective_beta = std::min(region.effective_beta, tv);
            }
        }
    (void)H;
    return region;
}

ExplorationOutcome explore_reward_free(const TabularMDP& env, EmpiricalModel& counts,
                                       const ExplorationSettings& settings, Rng& rng,
                                       const ShiftIdObserver& observer) {
    const Dims d = env.dims();
    if (counts.dims().S != d.S || counts.dims().A != d.A)
        throw DimensionError("reward-free exploration: counts " + to_string(counts.dims()) +
                             " do not match environment " + to_string(d));
    const BonusFunctions bonus(d, settings.delta, settings.bonus_scale);
    const double threshold = settings.stop_threshold.value_or(0.0);

    ExplorationOutcome out;
    for (long long t = 0;; ++t) {
        const auto backup = backup_W(counts, d.H, bonus);
        const double stat = stopping_statistic(backup.W, backup.greedy, env.rho());
        out.trace.push_back({t, t * d.H, stat, threshold});
        out.final_statistic = stat;
        out.episodes = t;
        if (observer) observer({t, stat, backup});
        if (settings.stop_threshold && stat <= *settings.stop_threshold) {
            out.stopped = true;
            break;
        }
        if (t >= settings.max_episodes) break;
        counts.update(sample_episode(env, backup.greedy, rng, t));
    }
    return out;
}

ShiftIdResult run_shift_identification(const TabularMDP& target_env, const SourceDataset& source,
                                       const ShiftIdConfig& cfg, Rng& rng,
                                       const ShiftIdObserver& observer) {
    cfg.validate();
    const Dims d = target_env.dims();
    if (source.model.dims().S != d.S || source.model.dims().A != d.A)
        throw DimensionError("shift identification: source " + to_string(source.model.dims()) +
                             " does not match target " + to_string(d));

    ShiftIdResult result;
    result.target = EmpiricalModel(d);
    ExplorationSettings settings{cfg.delta, cfg.bonus_scale, cfg.max_episodes, cfg.threshold()};
    auto outcome = explore_reward_free(target_env, result.target, settings, rng, observer);

    result.episodes_used = outcome.episodes;
    result.final_statistic = outcome.final_statistic;
    result.cap_hit = !outcome.stopped;
    result.trace = std::move(outcome.trace);
    result.region = estimate_shift_region(source.model, result.target, cfg.beta);
    return result;
}

std::string shift_trace_csv(const std::vector<ShiftIdStep>& trace) {
    std::ostringstream os;
    os << "episode,samples,stopping_statistic,threshold\n";
    for (const auto& step : trace)
        os << step.episode << ',' << step.samples << ',' << format_double(step.statistic) << ','
           << format_double(step.threshold) << '\n';
    return os.str();
}

}  // namespace hysrl
