#include "hysrl/dp.hpp"

#include <algorithm>

namespace hysrl {

namespace {

void require_policy_shape(const TabularMDP& mdp, const Policy& pi) {
    if (pi.dims() != mdp.dims())
        throw DimensionError("policy dims " + to_string(pi.dims()) + " do not match MDP dims " +
                             to_string(mdp.dims()));
}

double dot(std::span<const double> p, const double* f, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += p[static_cast<std::size_t>(i)] * f[i];
    return acc;
}

double variance_of(std::span<const double> p, const double* f, int n) {
    const double mean = dot(p, f, n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += p[static_cast<std::size_t>(i)] * (f[i] - mean) * (f[i] - mean);
    return acc;
}

}  // namespace

double ValueTables::initial_value(std::span<const double> rho) const {
    double total = 0.0;
    for (int s = 0; s < dims.S; ++s) total += rho[static_cast<std::size_t>(s)] * V(0, s);
    return total;
}

OptimalSolution optimal_values(const TabularMDP& mdp) {
    require_valid(mdp);
    const auto [S, A, H] = mdp.dims();
    ValueTables t(mdp.dims());
    std::vector<ActionId> actions(static_cast<std::size_t>(H) * S);
    for (int h = H - 1; h >= 0; --h) {
        const double* next = &t.v[static_cast<std::size_t>(h + 1) * S];
        for (int s = 0; s < S; ++s) {
            int best = 0;
            for (int a = 0; a < A; ++a) {
                const double q = mdp.r(s, a) + dot(mdp.row(s, a), next, S);
                t.Q(h, s, a) = q;
                if (q > t.Q(h, s, best)) best = a;
            }
            actions[static_cast<std::size_t>(h) * S + s] = best;
            t.V(h, s) = t.Q(h, s, best);
        }
    }
    return {std::move(t), Policy::deterministic(mdp.dims(), std::move(actions))};
}

ValueTables policy_values(const TabularMDP& mdp, const Policy& pi) {
    require_policy_shape(mdp, pi);
    const auto [S, A, H] = mdp.dims();
    ValueTables t(mdp.dims());
    for (int h = H - 1; h >= 0; --h) {
        const double* next = &t.v[static_cast<std::size_t>(h + 1) * S];
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) t.Q(h, s, a) = mdp.r(s, a) + dot(mdp.row(s, a), next, S);
            if (pi.is_deterministic()) {
                t.V(h, s) = t.Q(h, s, pi.action(h, s));
            } else {
                double v = 0.0;
                for (int a = 0; a < A; ++a) v += pi.prob(h, s, a) * t.Q(h, s, a);
                t.V(h, s) = v;
            }
        }
    }
    return t;
}

double optimality_gap(const TabularMDP& mdp, const Policy& pi, double optimal_initial_value) {
    return optimal_initial_value - policy_values(mdp, pi).initial_value(mdp.rho());
}

double optimality_gap(const TabularMDP& mdp, const Policy& pi) {
    return optimality_gap(mdp, pi, optimal_values(mdp).values.initial_value(mdp.rho()));
}

OccupancyTable occupancy_measures(const TabularMDP& mdp, const Policy& pi) {
    require_policy_shape(mdp, pi);
    const auto [S, A, H] = mdp.dims();
    OccupancyTable occ{mdp.dims(), std::vector<double>(static_cast<std::size_t>(H) * S * A, 0.0)};
    std::vector<double> state(mdp.rho().begin(), mdp.rho().end());
    std::vector<double> next(static_cast<std::size_t>(S));
    for (int h = 0; h < H; ++h) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < S; ++s) {
            if (state[static_cast<std::size_t>(s)] == 0.0) continue;
            for (int a = 0; a < A; ++a) {
                const double mass = state[static_cast<std::size_t>(s)] * pi.prob(h, s, a);
                occ.prob[(static_cast<std::size_t>(h) * S + s) * A + a] = mass;
                if (mass == 0.0) continue;
                const auto row = mdp.row(s, a);
                for (int n = 0; n < S; ++n) next[static_cast<std::size_t>(n)] += mass * row[static_cast<std::size_t>(n)];
            }
        }
        state.swap(next);
    }
    return occ;
}

ReturnVariance return_variance(const TabularMDP& mdp, const Policy& pi) {
    const ValueTables vt = policy_values(mdp, pi);
    const OccupancyTable occ = occupancy_measures(mdp, pi);
    const auto [S, A, H] = mdp.dims();
    ReturnVariance out;

    // m_h(s) = E[(sum_{k>=h} r_k)^2 | s_h = s]
    std::vector<double> m(static_cast<std::size_t>(S), 0.0), m_next(static_cast<std::size_t>(S), 0.0);
    for (int h = H - 1; h >= 0; --h) {
        const double* v_next = &vt.v[static_cast<std::size_t>(h + 1) * S];
        for (int s = 0; s < S; ++s) {
            double acc = 0.0;
            for (int a = 0; a < A; ++a) {
                const double pa = pi.prob(h, s, a);
                if (pa == 0.0) continue;
                const double r = mdp.r(s, a);
                acc += pa * (r * r + 2.0 * r * dot(mdp.row(s, a), v_next, S) + dot(mdp.row(s, a), m_next.data(), S));
            }
            m[static_cast<std::size_t>(s)] = acc;
        }
        m_next.swap(m);
    }
    const double mean = vt.initial_value(mdp.rho());
    out.return_variance = std::max(0.0, dot(mdp.rho(), m_next.data(), S) - mean * mean);
    out.initial_term = variance_of(mdp.rho(), &vt.v[0], S);

    std::vector<double> q(static_cast<std::size_t>(A)), pa(static_cast<std::size_t>(A));
    for (int h = 0; h < H; ++h) {
        const double* v_next = &vt.v[static_cast<std::size_t>(h + 1) * S];
        for (int s = 0; s < S; ++s) {
            const double mass = occ.state_marginal(h, s);
            if (mass == 0.0) continue;
            for (int a = 0; a < A; ++a) {
                q[static_cast<std::size_t>(a)] = vt.Q(h, s, a);
                pa[static_cast<std::size_t>(a)] = pi.prob(h, s, a);
            }
            out.policy_term += mass * variance_of(pa, q.data(), A);
            for (int a = 0; a < A; ++a)
                if (occ.at(h, s, a) > 0.0) out.transition_term += occ.at(h, s, a) * variance_of(mdp.row(s, a), v_next, S);
        }
    }
    return out;
}

Reachability reachability_sigma(const TabularMDP& mdp) {
    require_valid(mdp);
    const auto [S, A, H] = mdp.dims();
    // reach[k](s) = max probability of sitting on the target exactly k steps after s.
    // Choosing the action at the target is free, so sigma(s,a) does not depend on a.
    std::vector<double> per_state(static_cast<std::size_t>(S), 0.0);
    std::vector<double> reach(static_cast<std::size_t>(S)), prev(static_cast<std::size_t>(S));
    for (int target = 0; target < S; ++target) {
        std::fill(reach.begin(), reach.end(), 0.0);
        reach[static_cast<std::size_t>(target)] = 1.0;
        double best = 0.0;
        for (int k = 0; k < H; ++k) {
            best = std::max(best, dot(mdp.rho(), reach.data(), S));
            prev.swap(reach);
            for (int s = 0; s < S; ++s) {
                double m = 0.0;
                for (int a = 0; a < A; ++a) m = std::max(m, dot(mdp.row(s, a), prev.data(), S));
                reach[static_cast<std::size_t>(s)] = m;
            }
        }
        per_state[static_cast<std::size_t>(target)] = best;
    }
    Reachability out{mdp.dims(), std::vector<double>(static_cast<std::size_t>(S) * A), 1.0};
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            out.per_pair[static_cast<std::size_t>(s) * A + a] = per_state[static_cast<std::size_t>(s)];
            out.sigma = std::min(out.sigma, per_state[static_cast<std::size_t>(s)]);
        }
    return out;
}

}  // namespace hysrl
