#pragma once

// Brute-force reference computations used to check the DP code paths.
// Everything here works on explicit trajectories or policy enumeration and
// shares no code with the library's recursions.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "hysrl/mdp.hpp"

namespace oracle {

using hysrl::Dims;
using hysrl::Policy;
using hysrl::TabularMDP;

/// Random MDP; about a third of kernel entries are zeroed to exercise sparse rows.
inline TabularMDP random_mdp(std::mt19937_64& gen, int S, int A, int H, bool point_mass_rho = false) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> kernel(static_cast<std::size_t>(S) * A * S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            double total = 0.0;
            const std::size_t base = (static_cast<std::size_t>(s) * A + a) * S;
            for (int n = 0; n < S; ++n) {
                const double w = u(gen) < 0.33 ? 0.0 : -std::log(1.0 - u(gen));
                kernel[base + n] = w;
                total += w;
            }
            if (total == 0.0) {
                kernel[base + static_cast<std::size_t>(gen() % S)] = 1.0;
                continue;
            }
            for (int n = 0; n < S; ++n) kernel[base + n] /= total;
        }
    std::vector<double> reward(static_cast<std::size_t>(S) * A);
    for (auto& r : reward) r = u(gen);
    std::vector<double> rho(static_cast<std::size_t>(S), 0.0);
    if (point_mass_rho) {
        rho[gen() % S] = 1.0;
    } else {
        double total = 0.0;
        for (auto& p : rho) total += (p = 0.05 + u(gen));
        for (auto& p : rho) p /= total;
    }
    return TabularMDP({S, A, H}, std::move(kernel), std::move(reward), std::move(rho));
}

inline Policy random_deterministic_policy(std::mt19937_64& gen, Dims d) {
    std::vector<int> actions(static_cast<std::size_t>(d.H) * d.S);
    for (auto& a : actions) a = static_cast<int>(gen() % static_cast<unsigned>(d.A));
    return Policy::deterministic(d, std::move(actions));
}

inline Policy random_stochastic_policy(std::mt19937_64& gen, Dims d) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> probs(static_cast<std::size_t>(d.H) * d.S * d.A);
    for (std::size_t i = 0; i < probs.size(); i += static_cast<std::size_t>(d.A)) {
        double total = 0.0;
        for (int a = 0; a < d.A; ++a) total += (probs[i + a] = u(gen));
        for (int a = 0; a < d.A; ++a) probs[i + a] /= total;
    }
    return Policy::stochastic(d, std::move(probs));
}

/// Visits every trajectory (s_h, a_h, ..., s_{H-1}, a_{H-1}) from state s at step h with its probability.
inline void for_each_path(const TabularMDP& m, const Policy& pi, int h, int s, double prob, double ret,
                          const std::function<void(double prob, double ret)>& visit) {
    const int H = m.horizon();
    if (h == H) {
        visit(prob, ret);
        return;
    }
    for (int a = 0; a < m.num_actions(); ++a) {
        const double pa = pi.prob(h, s, a);
        if (pa == 0.0) continue;
        for (int n = 0; n < m.num_states(); ++n) {
            const double pn = m.p(s, a, n);
            if (pn == 0.0) continue;
            for_each_path(m, pi, h + 1, n, prob * pa * pn, ret + m.r(s, a), visit);
        }
    }
}

/// Expected return from s at step h, summed over explicit paths.
inline double path_value(const TabularMDP& m, const Policy& pi, int h, int s) {
    double total = 0.0;
    for_each_path(m, pi, h, s, 1.0, 0.0, [&](double p, double r) { total += p * r; });
    return total;
}

/// Second central moment of the return from s at step 0 around `center`.
inline double path_second_moment(const TabularMDP& m, const Policy& pi, int s, double center) {
    double total = 0.0;
    for_each_path(m, pi, 0, s, 1.0, 0.0, [&](double p, double r) { total += p * (r - center) * (r - center); });
    return total;
}

/// Calls fn on every deterministic time-dependent policy (A^(S*H) of them).
inline void for_each_deterministic_policy(Dims d, const std::function<void(const Policy&)>& fn) {
    const std::size_t cells = static_cast<std::size_t>(d.H) * d.S;
    std::vector<int> actions(cells, 0);
    while (true) {
        fn(Policy::deterministic(d, actions));
        std::size_t i = 0;
        while (i < cells && ++actions[i] == d.A) actions[i++] = 0;
        if (i == cells) return;
    }
}

/// max over deterministic policies of the path value from (h, s): one table entry per (h, s).
inline std::vector<double> enumerated_optimal_values(const TabularMDP& m) {
    const Dims d = m.dims();
    std::vector<double> best(static_cast<std::size_t>(d.H) * d.S, -1.0);
    for_each_deterministic_policy(d, [&](const Policy& pi) {
        for (int h = 0; h < d.H; ++h)
            for (int s = 0; s < d.S; ++s) {
                auto& b = best[static_cast<std::size_t>(h) * d.S + s];
                b = std::max(b, path_value(m, pi, h, s));
            }
    });
    return best;
}

/// max over policies and steps of P(s_h = s, a_h = a), by enumeration.
inline std::vector<double> enumerated_reachability(const TabularMDP& m) {
    const Dims d = m.dims();
    std::vector<double> best(static_cast<std::size_t>(d.S) * d.A, 0.0);
    for_each_deterministic_policy(d, [&](const Policy& pi) {
        std::vector<double> state(m.rho().begin(), m.rho().end());
        for (int h = 0; h < d.H; ++h) {
            std::vector<double> next(static_cast<std::size_t>(d.S), 0.0);
            for (int s = 0; s < d.S; ++s) {
                const int a = pi.action(h, s);
                auto& b = best[static_cast<std::size_t>(s) * d.A + a];
                b = std::max(b, state[static_cast<std::size_t>(s)]);
                for (int n = 0; n < d.S; ++n) next[static_cast<std::size_t>(n)] += state[static_cast<std::size_t>(s)] * m.p(s, a, n);
            }
            state = std::move(next);
        }
    });
    return best;
}

}  // namespace oracle
