#pragma once

#include <vector>

#include "hysrl/mdp.hpp"

namespace hysrl {

/// Q_h(s,a) and V_h(s) for h in [0,H]; row H is the terminal zero row.
struct ValueTables {
    Dims dims;
    std::vector<double> q;  // (H+1)*S*A
    std::vector<double> v;  // (H+1)*S

    explicit ValueTables(Dims d = {})
        : dims(d),
          q(static_cast<std::size_t>(d.H + 1) * d.S * d.A, 0.0),
          v(static_cast<std::size_t>(d.H + 1) * d.S, 0.0) {}

    double& Q(int h, StateId s, ActionId a) { return q[qi(h, s, a)]; }
    double Q(int h, StateId s, ActionId a) const { return q[qi(h, s, a)]; }
    double& V(int h, StateId s) { return v[static_cast<std::size_t>(h) * dims.S + s]; }
    double V(int h, StateId s) const { return v[static_cast<std::size_t>(h) * dims.S + s]; }

    /// rho-weighted value at the first step.
    double initial_value(std::span<const double> rho) const;

private:
    std::size_t qi(int h, StateId s, ActionId a) const {
        return (static_cast<std::size_t>(h) * dims.S + static_cast<std::size_t>(s)) * dims.A +
               static_cast<std::size_t>(a);
    }
};

struct OptimalSolution {
    ValueTables values;
    Policy greedy;  // lowest-index tie-breaking
};

/// Backward induction V*_{H}=0, Q*_h = r + p V*_{h+1}, V*_h = max_a Q*_h.
OptimalSolution optimal_values(const TabularMDP& mdp);

/// Exact evaluation of a (possibly stochastic) policy by backward DP.
ValueTables policy_values(const TabularMDP& mdp, const Policy& pi);

/// V*_1(rho) - V^pi_1(rho).
double optimality_gap(const TabularMDP& mdp, const Policy& pi);
double optimality_gap(const TabularMDP& mdp, const Policy& pi, double optimal_initial_value);

/// Forward recursion of the state-action occupancy starting from rho.
OccupancyTable occupancy_measures(const TabularMDP& mdp, const Policy& pi);

/**
Variance of the episode return under pi and its decomposition
  Var(sum_h r_h) = Var_rho(V_1) + sum_h E[Var_pi(Q_h(s_h,.))] + sum_h E[Var_p(V_{h+1})(s_h,a_h)].
return_variance comes from a second-moment recursion; the three terms from
values and occupancies. The policy term vanishes for deterministic policies.
*/
struct ReturnVariance {
    double return_variance = 0.0;
    double initial_term = 0.0;
    double policy_term = 0.0;
    double transition_term = 0.0;

    double decomposed() const { return initial_term + policy_term + transition_term; }
};

ReturnVariance return_variance(const TabularMDP& mdp, const Policy& pi);

struct Reachability {
    Dims dims;
    /// sigma(s,a) = max over policies and steps of p_h^pi(s,a); index s*A + a.
    std::vector<double> per_pair;
    double sigma = 0.0;

    double at(StateId s, ActionId a) const {
        return per_pair[static_cast<std::size_t>(s) * dims.A + static_cast<std::size_t>(a)];
    }
};

Reachability reachability_sigma(const TabularMDP& mdp);

/// Index of the largest entry, lowest index on ties.
inline int argmax_first(std::span<const double> xs) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(xs.size()); ++i)
        if (xs[static_cast<std::size_t>(i)] > xs[static_cast<std::size_t>(best)]) best = i;
    return best;
}

}  // namespace hysrl
