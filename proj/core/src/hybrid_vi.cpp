#include "hysrl/hybrid_vi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hysrl/csv.hpp"

namespace hysrl {

HybridModel::HybridModel(PairSet region, EmpiricalModel target,
                         std::vector<std::shared_ptr<const EmpiricalModel>> sources,
                         std::vector<int> chosen_source)
    : region_(std::move(region)),
      target_(std::move(target)),
      sources_(std::move(sources)),
      chosen_(std::move(chosen_source)) {
    const auto& d = target_.dims();
    if (region_.num_states() != d.S || region_.num_actions() != d.A)
        throw DimensionError("HybridModel: region shape does not match target " + to_string(d));
    if (chosen_.size() != static_cast<std::size_t>(d.S) * d.A)
        throw DimensionError("HybridModel: need one source choice per pair");
    for (const auto& src : sources_)
        if (!src || src->dims().S != d.S || src->dims().A != d.A)
            throw DimensionError("HybridModel: source model shape does not match target " + to_string(d));
    for (int s = 0; s < d.S; ++s)
        for (int a = 0; a < d.A; ++a) {
            int& c = chosen_[static_cast<std::size_t>(s) * d.A + a];
            if (region_.contains(s, a)) {
                c = -1;
            } else if (c < 0 || c >= static_cast<int>(sources_.size())) {
                throw InvalidInput("HybridModel: pair (" + std::to_string(s) + "," + std::to_string(a) +
                                   ") lies outside the region but no source serves it");
            }
        }
}

HybridModel HybridModel::with_source(PairSet region, EmpiricalModel target,
                                     std::shared_ptr<const EmpiricalModel> source) {
    const auto& d = target.dims();
    std::vector<int> chosen(static_cast<std::size_t>(d.S) * d.A, 0);
    std::vector<std::shared_ptr<const EmpiricalModel>> sources;
    if (source) sources.push_back(std::move(source));
    return HybridModel(std::move(region), std::move(target), std::move(sources), std::move(chosen));
}

HybridModel HybridModel::online_only(Dims dims) {
    return HybridModel(PairSet::all(dims.S, dims.A), EmpiricalModel(dims), {},
                       std::vector<int>(static_cast<std::size_t>(dims.S) * dims.A, -1));
}

BoundTables::BoundTables(Dims d)
    : dims(d),
      q_upper(static_cast<std::size_t>(d.H + 1) * d.S * d.A, 0.0),
      q_lower(static_cast<std::size_t>(d.H + 1) * d.S * d.A, 0.0),
      v_upper(static_cast<std::size_t>(d.H + 1) * d.S, 0.0),
      v_lower(static_cast<std::size_t>(d.H + 1) * d.S, 0.0) {}

void VIConfig::validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidInput("value iteration: epsilon must lie in (0,1]");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("value iteration: delta must lie in (0,1)");
    if (!(bonus_scale >= 0.0)) throw InvalidInput("value iteration: negative bonus scale");
    if (max_episodes < 0) throw InvalidInput("value iteration: negative episode cap");
}

namespace {

/// Per-pair g/n terms, constant across h within one backup.
struct Widths {
    std::vector<char> visited;
    std::vector<double> g1_over_n;
    std::vector<double> g2_over_n;
};

Widths pair_widths(const HybridModel& model, const BonusFunctions& bonus) {
    const auto& d = model.dims();
    const auto SA = static_cast<std::size_t>(d.S) * d.A;
    Widths w{std::vector<char>(SA, 0), std::vector<double>(SA, 0.0), std::vector<double>(SA, 0.0)};
    for (int s = 0; s < d.S; ++s)
        for (int a = 0; a < d.A; ++a) {
            const auto n = static_cast<double>(model.n(s, a));
            if (n <= 0) continue;
            const std::size_t i = static_cast<std::size_t>(s) * d.A + a;
            w.visited[i] = 1;
            w.g1_over_n[i] = bonus.g1(n) / n;
            w.g2_over_n[i] = bonus.g2(n) / n;
        }
    return w;
}

void require_task_shape(const HybridModel& model, const TabularMDP& task) {
    if (model.dims().S != task.num_states() || model.dims().A != task.num_actions())
        throw DimensionError("hybrid VI: model " + to_string(model.dims()) + " does not match task " +
                             to_string(task.dims()));
}

}  // namespace

BoundsBackup backup_bounds(const HybridModel& model, const TabularMDP& task, const BonusFunctions& bonus) {
    require_task_shape(model, task);
    const Dims d{task.num_states(), task.num_actions(), task.horizon()};
    const auto [S, A, H] = d;
    const double Hd = H;
    const auto widths = pair_widths(model, bonus);

    BoundsBackup out{BoundTables(d), Policy{}};
    auto& b = out.bounds;
    std::vector<ActionId> actions(static_cast<std::size_t>(H) * S);

    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            int best = 0;
            double best_lower = 0.0;
            for (int a = 0; a < A; ++a) {
                const std::size_t i = static_cast<std::size_t>(s) * A + a;
                double qu = Hd;
                double ql = 0.0;
                if (widths.visited[i]) {
                    const auto row = model.row(s, a);
                    double pu = 0.0, pu2 = 0.0, pl = 0.0;
                    for (int n = 0; n < S; ++n) {
                        const double p = row[static_cast<std::size_t>(n)];
                        if (p == 0.0) continue;
                        const double vu = b.Vu(h + 1, n);
                        pu += p * vu;
                        pu2 += p * vu * vu;
                        pl += p * b.Vl(h + 1, n);
                    }
                    const double var = std::max(0.0, pu2 - pu * pu);
                    const double width = 3.0 * std::sqrt(var * widths.g2_over_n[i]) +
                                         14.0 * Hd * Hd * widths.g1_over_n[i] + (pu - pl) / Hd;
                    const double r = task.r(s, a);
                    qu = std::min(Hd, r + pu + width);
                    ql = std::max(0.0, r + pl - width);
                }
                if (ql > qu) throw std::logic_error("hybrid VI: lower bound exceeds upper bound");
                b.Qu(h, s, a) = qu;
                b.Ql(h, s, a) = ql;
                if (qu > b.Qu(h, s, best)) best = a;
                best_lower = std::max(best_lower, ql);
            }
            actions[static_cast<std::size_t>(h) * S + s] = best;
            b.Vu(h, s) = b.Qu(h, s, best);
            b.Vl(h, s) = best_lower;
        }
    }
    out.greedy = Policy::deterministic(d, std::move(actions));
    return out;
}

GapTable backup_G(const HybridModel& model, const BoundTables& bounds, const Policy& pi,
                  const BonusFunctions& bonus) {
    const Dims d = bounds.dims;
    const auto [S, A, H] = d;
    if (pi.dims() != d) throw DimensionError("backup_G: policy does not match bound tables");
    const double Hd = H;
    const double growth = 1.0 + 3.0 / Hd;
    const auto widths = pair_widths(model, bonus);

    GapTable G(d);
    std::vector<double> next_on_policy(static_cast<std::size_t>(S), 0.0);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const std::size_t i = static_cast<std::size_t>(s) * A + a;
                if (!widths.visited[i]) {
                    G.at(h, s, a) = Hd;
                    continue;
                }
                const auto row = model.row(s, a);
                double pu = 0.0, pu2 = 0.0, pg = 0.0;
                for (int n = 0; n < S; ++n) {
                    const double p = row[static_cast<std::size_t>(n)];
                    if (p == 0.0) continue;
                    const double vu = bounds.Vu(h + 1, n);
                    pu += p * vu;
                    pu2 += p * vu * vu;
                    pg += p * next_on_policy[static_cast<std::size_t>(n)];
                }
                const double var = std::max(0.0, pu2 - pu * pu);
                const double value = 6.0 * std::sqrt(var * widths.g2_over_n[i]) +
                                     35.0 * Hd * Hd * widths.g1_over_n[i] + growth * pg;
                G.at(h, s, a) = std::min(Hd, value);
            }
        for (int s = 0; s < S; ++s) next_on_policy[static_cast<std::size_t>(s)] = G.at(h, s, pi.action(h, s));
    }
    return G;
}

double rho_pi_G(const GapTable& G, const Policy& pi, std::span<const double> rho) {
    double total = 0.0;
    for (int s = 0; s < G.dims.S; ++s) total += rho[static_cast<std::size_t>(s)] * G.at(0, s, pi.action(0, s));
    return total;
}

VIResult run_hybrid_ucbvi(const TabularMDP& target_env, HybridModel& model, const VIConfig& cfg, Rng& rng,
                          const VIObserver& observer) {
    cfg.validate();
    require_task_shape(model, target_env);
    const int H = target_env.horizon();
    const BonusFunctions bonus(target_env.dims(), cfg.delta, cfg.bonus_scale);

    VIResult result;
    Count collected = 0;
    for (long long t = 0;; ++t) {
        auto backup = backup_bounds(model, target_env, bonus);
        const auto G = backup_G(model, backup.bounds, backup.greedy, bonus);
        const double stat = rho_pi_G(G, backup.greedy, target_env.rho());
        result.trace.push_back({t, collected, stat});
        result.final_rho_pi_G = stat;
        result.episodes = t;
        if (observer) observer({t, stat, backup, G});
        if (stat <= cfg.epsilon) {
            result.stopped = true;
            result.policy = std::move(backup.greedy);
            break;
        }
        if (t >= cfg.max_episodes) {
            result.cap_hit = true;
            result.policy = std::move(backup.greedy);
            break;
        }
        model.observe(sample_episode(target_env, backup.greedy, rng, t));
        collected += H;
    }
    return result;
}

std::string vi_trace_csv(const std::vector<VIStep>& trace, double epsilon,
                         const std::vector<double>& exact_gap, const std::vector<double>& mc_gap) {
    std::ostringstream os;
    os << "episode,target_samples_cumulative,rho_pi_G,epsilon,exact_gap,mc_gap\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& step = trace[i];
        os << step.episode << ',' << step.samples << ',' << format_double(step.rho_pi_G) << ','
           << format_double(epsilon) << ',';
        if (i < exact_gap.size() && !std::isnan(exact_gap[i])) os << format_double(exact_gap[i]);
        os << ',';
        if (i < mc_gap.size() && !std::isnan(mc_gap[i])) os << format_double(mc_gap[i]);
        os << '\n';
    }
    return os.str();
}

}  // namespace hysrl
