#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hysrl {

using StateId = int;
using ActionId = int;

/// Thrown when tables of different shapes are combined.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when an input violates a documented range or normalization.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Dims {
    int S = 0;
    int A = 0;
    int H = 0;

    friend bool operator==(const Dims&, const Dims&) = default;
};

std::string to_string(const Dims& d);

/**
Finite-horizon episodic MDP with a time-independent kernel, a deterministic
known reward r(s,a) in [0,1] and an initial distribution rho.

Storage is dense and row-major: kernel index ((s*A)+a)*S + s', reward index
s*A + a. The object is immutable after construction.
*/
class TabularMDP {
public:
    TabularMDP() = default;
    TabularMDP(Dims dims, std::vector<double> kernel, std::vector<double> reward,
               std::vector<double> rho);

    const Dims& dims() const { return dims_; }
    int num_states() const { return dims_.S; }
    int num_actions() const { return dims_.A; }
    int horizon() const { return dims_.H; }

    double p(StateId s, ActionId a, StateId next) const {
        return kernel_[row_offset(s, a) + static_cast<std::size_t>(next)];
    }
    std::span<const double> row(StateId s, ActionId a) const {
        return {kernel_.data() + row_offset(s, a), static_cast<std::size_t>(dims_.S)};
    }
    double r(StateId s, ActionId a) const {
        return reward_[static_cast<std::size_t>(s) * dims_.A + static_cast<std::size_t>(a)];
    }
    std::span<const double> rho() const { return rho_; }

    const std::vector<double>& kernel_data() const { return kernel_; }
    const std::vector<double>& reward_data() const { return reward_; }

private:
    std::size_t row_offset(StateId s, ActionId a) const {
        return (static_cast<std::size_t>(s) * dims_.A + static_cast<std::size_t>(a)) * dims_.S;
    }

    Dims dims_;
    std::vector<double> kernel_;
    std::vector<double> reward_;
    std::vector<double> rho_;
};

struct Violation {
    enum class Kind { KernelRow, KernelEntry, Reward, Rho, Shape };
    Kind kind;
    StateId s = -1;
    ActionId a = -1;
    /// For normalization failures: 1 - sum; for range failures: the offending value.
    double value = 0.0;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

inline constexpr double kNormTolerance = 1e-9;

ValidationReport validate_mdp(const TabularMDP& mdp);

/// Throws InvalidInput with the report summary if the MDP is malformed.
void require_valid(const TabularMDP& mdp);

/**
Time-dependent Markov policy. Deterministic policies store one action per
(h,s); stochastic ones a distribution over actions. Step index h is 0-based.
*/
class Policy {
public:
    enum class Kind { Deterministic, Stochastic };

    static Policy deterministic(Dims dims, std::vector<ActionId> actions);
    static Policy stochastic(Dims dims, std::vector<double> probs);
    static Policy uniform(Dims dims);
    /// Same action table at every step.
    static Policy stationary(Dims dims, std::span<const ActionId> per_state);

    Kind kind() const { return kind_; }
    bool is_deterministic() const { return kind_ == Kind::Deterministic; }
    const Dims& dims() const { return dims_; }

    /// Only valid for deterministic policies.
    ActionId action(int h, StateId s) const;
    double prob(int h, StateId s, ActionId a) const;

    const std::vector<ActionId>& actions() const { return actions_; }

    friend bool operator==(const Policy&, const Policy&) = default;

private:
    Kind kind_ = Kind::Deterministic;
    Dims dims_;
    std::vector<ActionId> actions_;
    std::vector<double> probs_;
};

struct Transition {
    StateId s;
    ActionId a;
    double r;
    StateId next;

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct EpisodeTrace {
    std::vector<Transition> steps;
    long long episode = 0;
    unsigned long long lineage = 0;

    friend bool operator==(const EpisodeTrace&, const EpisodeTrace&) = default;
};

/// p_h^pi(s,a) for h in [0,H); flat index (h*S + s)*A + a.
struct OccupancyTable {
    Dims dims;
    std::vector<double> prob;

    double at(int h, StateId s, ActionId a) const {
        return prob[(static_cast<std::size_t>(h) * dims.S + static_cast<std::size_t>(s)) * dims.A +
                    static_cast<std::size_t>(a)];
    }
    double state_marginal(int h, StateId s) const;
};

}  // namespace hysrl
