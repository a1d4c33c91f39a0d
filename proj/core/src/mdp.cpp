#include "hysrl/mdp.hpp"

#include <cmath>
#include <sstream>

namespace hysrl {

std::string to_string(const Dims& d) {
    std::ostringstream os;
    os << "(S=" << d.S << ", A=" << d.A << ", H=" << d.H << ")";
    return os.str();
}

TabularMDP::TabularMDP(Dims dims, std::vector<double> kernel, std::vector<double> reward,
                       std::vector<double> rho)
    : dims_(dims), kernel_(std::move(kernel)), reward_(std::move(reward)), rho_(std::move(rho)) {
    if (dims_.S <= 0 || dims_.A <= 0 || dims_.H <= 0)
        throw InvalidInput("TabularMDP: S, A and H must be positive, got " + to_string(dims_));
    const auto S = static_cast<std::size_t>(dims_.S);
    const auto A = static_cast<std::size_t>(dims_.A);
    if (kernel_.size() != S * A * S)
        throw DimensionError("TabularMDP: kernel has " + std::to_string(kernel_.size()) +
                             " entries, expected S*A*S = " + std::to_string(S * A * S));
    if (reward_.size() != S * A)
        throw DimensionError("TabularMDP: reward has " + std::to_string(reward_.size()) +
                             " entries, expected S*A = " + std::to_string(S * A));
    if (rho_.size() != S)
        throw DimensionError("TabularMDP: rho has " + std::to_string(rho_.size()) +
                             " entries, expected S = " + std::to_string(S));
}

std::string ValidationReport::summary() const {
    if (ok()) return "ok";
    std::ostringstream os;
    os << violations.size() << " violation(s):";
    for (const auto& v : violations) os << "\n  " << v.message;
    return os.str();
}

ValidationReport validate_mdp(const TabularMDP& mdp) {
    ValidationReport report;
    const auto [S, A, H] = mdp.dims();
    auto add = [&](Violation::Kind kind, int s, int a, double value, std::string msg) {
        report.violations.push_back({kind, s, a, value, std::move(msg)});
    };

    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            double sum = 0.0;
            for (int n = 0; n < S; ++n) {
                const double p = mdp.p(s, a, n);
                if (!(p >= 0.0) || !std::isfinite(p)) {
                    std::ostringstream os;
                    os << "kernel entry p(" << n << "|" << s << "," << a << ") = " << p
                       << " is negative or not finite";
                    add(Violation::Kind::KernelEntry, s, a, p, os.str());
                }
                sum += p;
            }
            const double deficit = 1.0 - sum;
            if (!(std::abs(deficit) <= kNormTolerance)) {
                std::ostringstream os;
                os << "kernel row (" << s << "," << a << ") sums to " << sum << " (deficit "
                   << deficit << ")";
                add(Violation::Kind::KernelRow, s, a, deficit, os.str());
            }
            const double r = mdp.r(s, a);
            if (!(r >= 0.0 && r <= 1.0)) {
                std::ostringstream os;
                os << "reward r(" << s << "," << a << ") = " << r << " outside [0,1]";
                add(Violation::Kind::Reward, s, a, r, os.str());
            }
        }
    }

    double mass = 0.0;
    for (int s = 0; s < S; ++s) {
        const double p = mdp.rho()[static_cast<std::size_t>(s)];
        if (!(p >= 0.0)) {
            std::ostringstream os;
            os << "rho(" << s << ") = " << p << " is negative";
            add(Violation::Kind::Rho, s, -1, p, os.str());
        }
        mass += p;
    }
    if (!(std::abs(1.0 - mass) <= kNormTolerance)) {
        std::ostringstream os;
        os << "rho sums to " << mass << " (deficit " << 1.0 - mass << ")";
        add(Violation::Kind::Rho, -1, -1, 1.0 - mass, os.str());
    }
    (void)H;
    return report;
}

void require_valid(const TabularMDP& mdp) {
    auto report = validate_mdp(mdp);
    if (!report.ok()) throw InvalidInput("invalid MDP: " + report.summary());
}

// ---------------------------------------------------------------------------
// Policy

Policy Policy::deterministic(Dims dims, std::vector<ActionId> actions) {
    const auto expected = static_cast<std::size_t>(dims.H) * dims.S;
    if (actions.size() != expected)
        throw DimensionError("Policy: expected H*S = " + std::to_string(expected) +
                             " actions, got " + std::to_string(actions.size()));
    for (auto a : actions)
        if (a < 0 || a >= dims.A)
            throw InvalidInput("Policy: action " + std::to_string(a) + " outside [0," +
                               std::to_string(dims.A) + ")");
    Policy pi;
    pi.kind_ = Kind::Deterministic;
    pi.dims_ = dims;
    pi.actions_ = std::move(actions);
    return pi;
}

Policy Policy::stochastic(Dims dims, std::vector<double> probs) {
    const auto expected = static_cast<std::size_t>(dims.H) * dims.S * dims.A;
    if (probs.size() != expected)
        throw DimensionError("Policy: expected H*S*A = " + std::to_string(expected) +
                             " probabilities, got " + std::to_string(probs.size()));
    for (std::size_t row = 0; row < expected / dims.A; ++row) {
        double sum = 0.0;
        for (int a = 0; a < dims.A; ++a) {
            const double p = probs[row * dims.A + a];
            if (!(p >= 0.0)) throw InvalidInput("Policy: negative action probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > kNormTolerance)
            throw InvalidInput("Policy: action distribution sums to " + std::to_string(sum));
    }
    Policy pi;
    pi.kind_ = Kind::Stochastic;
    pi.dims_ = dims;
    pi.probs_ = std::move(probs);
    return pi;
}

Policy Policy::uniform(Dims dims) {
    std::vector<double> probs(static_cast<std::size_t>(dims.H) * dims.S * dims.A, 1.0 / dims.A);
    return stochastic(dims, std::move(probs));
}

Policy Policy::stationary(Dims dims, std::span<const ActionId> per_state) {
    if (per_state.size() != static_cast<std::size_t>(dims.S))
        throw DimensionError("Policy: stationary table needs S entries");
    std::vector<ActionId> actions;
    actions.reserve(static_cast<std::size_t>(dims.H) * dims.S);
    for (int h = 0; h < dims.H; ++h) actions.insert(actions.end(), per_state.begin(), per_state.end());
    return deterministic(dims, std::move(actions));
}

ActionId Policy::action(int h, StateId s) const {
    if (kind_ != Kind::Deterministic)
        throw std::logic_error("Policy::action called on a stochastic policy");
    return actions_[static_cast<std::size_t>(h) * dims_.S + static_cast<std::size_t>(s)];
}

double Policy::prob(int h, StateId s, ActionId a) const {
    if (kind_ == Kind::Deterministic) return action(h, s) == a ? 1.0 : 0.0;
    return probs_[(static_cast<std::size_t>(h) * dims_.S + static_cast<std::size_t>(s)) * dims_.A +
                  static_cast<std::size_t>(a)];
}

double OccupancyTable::state_marginal(int h, StateId s) const {
    double total = 0.0;
    for (int a = 0; a < dims.A; ++a) total += at(h, s, a);
    return total;
}

}  // namespace hysrl
