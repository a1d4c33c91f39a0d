#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "hysrl/estimation.hpp"
#include "hysrl/sampling.hpp"
#include "hysrl/shift_id.hpp"

namespace hysrl {

/**
Switched statistics for value iteration. Inside the exploration region the
counts and kernel come from live target data; outside it they come from a
frozen source model (per pair, one of possibly several sources). Target
updates are masked to the region, so source-served rows never change.
*/
class HybridModel {
public:
    HybridModel(PairSet region, EmpiricalModel target,
                std::vector<std::shared_ptr<const EmpiricalModel>> sources,
                std::vector<int> chosen_source);

    static HybridModel with_source(PairSet region, EmpiricalModel target,
                                   std::shared_ptr<const EmpiricalModel> source);
    /// Every pair explored online; no source data.
    static HybridModel online_only(Dims dims);

    const Dims& dims() const { return target_.dims(); }
    const PairSet& region() const { return region_; }
    bool in_region(StateId s, ActionId a) const { return region_.contains(s, a); }

    Count n(StateId s, ActionId a) const { return model_for(s, a).n(s, a); }
    std::span<const double> row(StateId s, ActionId a) const { return model_for(s, a).row(s, a); }

    void observe(const EpisodeTrace& trace) { target_.update(trace, &region_); }
    const EmpiricalModel& target() const { return target_; }

private:
    const EmpiricalModel& model_for(StateId s, ActionId a) const {
        const int src = chosen_[static_cast<std::size_t>(s) * target_.dims().A + static_cast<std::size_t>(a)];
        return src < 0 ? target_ : *sources_[static_cast<std::size_t>(src)];
    }

    PairSet region_;
    EmpiricalModel target_;
    std::vector<std::shared_ptr<const EmpiricalModel>> sources_;
    std::vector<int> chosen_;
};

/// Upper and lower confidence tables over h in [0,H]; row H is zero.
struct BoundTables {
    Dims dims;
    std::vector<double> q_upper, q_lower;  // (H+1)*S*A
    std::vector<double> v_upper, v_lower;  // (H+1)*S

    explicit BoundTables(Dims d = {});

    double& Qu(int h, StateId s, ActionId a) { return q_upper[qi(h, s, a)]; }
    double Qu(int h, StateId s, ActionId a) const { return q_upper[qi(h, s, a)]; }
    double& Ql(int h, StateId s, ActionId a) { return q_lower[qi(h, s, a)]; }
    double Ql(int h, StateId s, ActionId a) const { return q_lower[qi(h, s, a)]; }
    double& Vu(int h, StateId s) { return v_upper[static_cast<std::size_t>(h) * dims.S + s]; }
    double Vu(int h, StateId s) const { return v_upper[static_cast<std::size_t>(h) * dims.S + s]; }
    double& Vl(int h, StateId s) { return v_lower[static_cast<std::size_t>(h) * dims.S + s]; }
    double Vl(int h, StateId s) const { return v_lower[static_cast<std::size_t>(h) * dims.S + s]; }

private:
    std::size_t qi(int h, StateId s, ActionId a) const {
        return (static_cast<std::size_t>(h) * dims.S + static_cast<std::size_t>(s)) * dims.A +
               static_cast<std::size_t>(a);
    }
};

/// G_h(s,a) in [0,H]; row H is zero.
struct GapTable {
    Dims dims;
    std::vector<double> g;

    explicit GapTable(Dims d = {}) : dims(d), g(static_cast<std::size_t>(d.H + 1) * d.S * d.A, 0.0) {}
    double& at(int h, StateId s, ActionId a) { return g[qi(h, s, a)]; }
    double at(int h, StateId s, ActionId a) const { return g[qi(h, s, a)]; }

private:
    std::size_t qi(int h, StateId s, ActionId a) const {
        return (static_cast<std::size_t>(h) * dims.S + static_cast<std::size_t>(s)) * dims.A +
               static_cast<std::size_t>(a);
    }
};

struct BoundsBackup {
    BoundTables bounds;
    Policy greedy;
};

/**
Backward recursion for h = H-1..0 with
  b(s,a)  = 3 sqrt(Var_p(Vu_{h+1}) g2(n)/n) + 14 H^2 g1(n)/n + p(Vu_{h+1} - Vl_{h+1})/H
  Qu      = min(H, r + p Vu_{h+1} + b)
  Ql      = max(0, r + p Vl_{h+1} - b)
where n, p are the switched statistics. Unvisited pairs get Qu = H, Ql = 0.
Throws std::logic_error if Ql > Qu anywhere.
*/
BoundsBackup backup_bounds(const HybridModel& model, const TabularMDP& task, const BonusFunctions& bonus);

/**
G_h(s,a) = min(H, 6 sqrt(Var_p(Vu_{h+1}) g2(n)/n) + 35 H^2 g1(n)/n
                  + (1 + 3/H) sum_s' p(s'|s,a) G_{h+1}(s', pi_{h+1}(s')))
with G = H on unvisited pairs.
*/
GapTable backup_G(const HybridModel& model, const BoundTables& bounds, const Policy& pi,
                  const BonusFunctions& bonus);

/// sum_s rho(s) G_1(s, pi_1(s)).
double rho_pi_G(const GapTable& G, const Policy& pi, std::span<const double> rho);

struct VIConfig {
    double epsilon = 0.1;
    double delta = 0.1;
    double bonus_scale = 2e-3;
    long long max_episodes = 200'000;

    void validate() const;
};

struct VIStep {
    long long episode;
    long long samples;  // cumulative target transitions collected in this phase
    double rho_pi_G;
};

struct VIIteration {
    long long episode;
    double rho_pi_G;
    const BoundsBackup& backup;
    const GapTable& gap;
};
using VIObserver = std::function<void(const VIIteration&)>;

struct VIResult {
    Policy policy;
    long long episodes = 0;
    bool stopped = false;  // rho pi G <= epsilon was reached
    bool cap_hit = false;
    double final_rho_pi_G = 0.0;
    std::vector<VIStep> trace;
};

/**
Hybrid UCB value iteration. Rewards and rho are read from the task MDP; its
kernel is only used through sample_episode.
*/
VIResult run_hybrid_ucbvi(const TabularMDP& target_env, HybridModel& model, const VIConfig& cfg,
                          Rng& rng, const VIObserver& observer = {});

/// VI trace as CSV: episode,target_samples_cumulative,rho_pi_G,epsilon,exact_gap,mc_gap.
/// Gap columns are filled from the optional per-step vectors (empty cells otherwise).
std::string vi_trace_csv(const std::vector<VIStep>& trace, double epsilon,
                         const std::vector<double>& exact_gap = {},
                         const std::vector<double>& mc_gap = {});

}  // namespace hysrl
