#include "hysrl/envs.hpp"

#include <algorithm>
#include <array>

#include <nlohmann/json.hpp>

#include "hysrl/dp.hpp"

namespace hysrl {

using nlohmann::json;

namespace {

json cells_json(const std::vector<Cell>& cells) {
    json out = json::array();
    for (const auto& c : cells) out.push_back({c.row, c.col});
    return out;
}

bool contains(const std::vector<Cell>& cells, Cell c) {
    return std::find(cells.begin(), cells.end(), c) != cells.end();
}

}  // namespace

GridWorldSpec GridWorldSpec::source(double success_prob, bool once_only) {
    GridWorldSpec spec;
    spec.success_prob = success_prob;
    spec.rewards = {{{1, 4}, 1.0}, {{2, 3}, 0.1}, {{3, 2}, 0.01}, {{3, 4}, 1.5}};
    spec.absorbing = {{1, 4}};
    spec.start = {3, 2};
    spec.once_only_reward = once_only;
    spec.once_only_cell = {1, 4};
    return spec;
}

GridWorldSpec GridWorldSpec::target(double success_prob, bool once_only) {
    GridWorldSpec spec = source(success_prob, once_only);
    spec.traps = {{2, 2}, {2, 4}, {3, 3}};
    return spec;
}

std::string GridWorldSpec::to_json() const {
    json rewards_json = json::array();
    for (const auto& r : rewards) rewards_json.push_back({{"cell", {r.cell.row, r.cell.col}}, {"value", r.value}});
    const json doc{{"kind", "gridworld"},
                   {"width", width},
                   {"height", height},
                   {"horizon", horizon},
                   {"success_prob", success_prob},
                   {"rewards", rewards_json},
                   {"absorbing", cells_json(absorbing)},
                   {"traps", cells_json(traps)},
                   {"start", {start.row, start.col}},
                   {"once_only_reward", once_only_reward},
                   {"once_only_cell", {once_only_cell.row, once_only_cell.col}},
                   {"normalize_rewards", normalize_rewards}};
    return doc.dump();
}

TabularMDP build_gridworld(const GridWorldSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0 || spec.horizon <= 0)
        throw InvalidInput("gridworld: width, height and horizon must be positive");
    if (!(spec.success_prob > 0.0 && spec.success_prob <= 1.0))
        throw InvalidInput("gridworld: success_prob must lie in (0,1]");
    auto inside = [&](Cell c) { return c.row >= 1 && c.row <= spec.height && c.col >= 1 && c.col <= spec.width; };
    auto require_inside = [&](Cell c, const char* what) {
        if (!inside(c))
            throw InvalidInput(std::string("gridworld: ") + what + " (" + std::to_string(c.row) + "," +
                               std::to_string(c.col) + ") lies outside the grid");
    };
    require_inside(spec.start, "start cell");
    for (const auto& c : spec.absorbing) require_inside(c, "absorbing cell");
    for (const auto& c : spec.traps) require_inside(c, "trap cell");
    if (spec.once_only_reward) require_inside(spec.once_only_cell, "once-only cell");
    double max_reward = 0.0;
    for (const auto& r : spec.rewards) {
        require_inside(r.cell, "reward cell");
        if (contains(spec.traps, r.cell))
            throw InvalidInput("gridworld: reward placement at (" + std::to_string(r.cell.row) + "," +
                               std::to_string(r.cell.col) + ") overlaps a trap");
        if (!(r.value >= 0.0)) throw InvalidInput("gridworld: negative reward placement");
        max_reward = std::max(max_reward, r.value);
    }
    const double reward_norm = (spec.normalize_rewards && max_reward > 0.0) ? max_reward : 1.0;

    const int S = spec.num_states();
    constexpr int A = 4;
    const Dims dims{S, A, spec.horizon};
    std::vector<double> kernel(static_cast<std::size_t>(S) * A * S, 0.0);
    std::vector<double> reward(static_cast<std::size_t>(S) * A, 0.0);
    auto P = [&](int s, int a, int n) -> double& {
        return kernel[(static_cast<std::size_t>(s) * A + static_cast<std::size_t>(a)) * S + static_cast<std::size_t>(n)];
    };

    constexpr std::array<std::array<int, 2>, 4> kMoves{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};
    auto move = [&](Cell c, int dir) {
        const Cell next{c.row + kMoves[static_cast<std::size_t>(dir)][0], c.col + kMoves[static_cast<std::size_t>(dir)][1]};
        return inside(next) ? next : c;
    };

    for (int row = 1; row <= spec.height; ++row)
        for (int col = 1; col <= spec.width; ++col) {
            const Cell c{row, col};
            const int s = spec.state_of(c);
            double cell_reward = 0.0;
            for (const auto& r : spec.rewards)
                if (r.cell == c) cell_reward += r.value / reward_norm;
            for (int a = 0; a < A; ++a) reward[static_cast<std::size_t>(s) * A + a] = cell_reward;

            if (spec.once_only_reward && c == spec.once_only_cell) {
                for (int a = 0; a < A; ++a) P(s, a, spec.spent_state()) = 1.0;
                continue;
            }
            if (contains(spec.absorbing, c) || contains(spec.traps, c)) {
                for (int a = 0; a < A; ++a) P(s, a, s) = 1.0;
                continue;
            }
            const double slip = (1.0 - spec.success_prob) / 3.0;
            for (int a = 0; a < A; ++a)
                for (int dir = 0; dir < A; ++dir)
                    P(s, a, spec.state_of(move(c, dir))) += dir == a ? spec.success_prob : slip;
        }
    if (spec.once_only_reward)
        for (int a = 0; a < A; ++a) P(spec.spent_state(), a, spec.spent_state()) = 1.0;

    std::vector<double> rho(static_cast<std::size_t>(S), 0.0);
    rho[static_cast<std::size_t>(spec.state_of(spec.start))] = 1.0;
    TabularMDP mdp(dims, std::move(kernel), std::move(reward), std::move(rho));
    require_valid(mdp);
    return mdp;
}

std::string HardInstanceSpec::to_json() const {
    const json doc{{"kind", "hard_instance"},
                   {"bandit_states", bandit_states},
                   {"actions", actions},
                   {"horizon", horizon},
                   {"gamma", gamma},
                   {"optimal_actions", optimal_actions}};
    return doc.dump();
}

TabularMDP build_hard_instance(const HardInstanceSpec& spec) {
    if (spec.bandit_states < 1 || spec.actions < 1) throw InvalidInput("hard instance: need S >= 1 and A >= 1");
    if (spec.horizon < 3) throw InvalidInput("hard instance: horizon must be >= 3");
    // gamma = 48 eps / H lands on 1/3 up to rounding at the boundary
    if (!(spec.gamma >= 0.0 && spec.gamma <= 1.0 / 3.0 + 1e-12))
        throw InvalidInput("hard instance: gamma must lie in [0,1/3], got " + std::to_string(spec.gamma));
    const bool reference = spec.optimal_actions.empty();
    if (!reference && spec.optimal_actions.size() != static_cast<std::size_t>(spec.bandit_states))
        throw DimensionError("hard instance: optimal action vector needs one entry per bandit state");
    for (int a : spec.optimal_actions)
        if (a < 0 || a >= spec.actions) throw InvalidInput("hard instance: optimal action out of range");

    const int n = spec.bandit_states;
    const int S = n + 2;
    const int A = spec.actions;
    const double H = spec.horizon;
    const int good = spec.good_state();
    const int bad = spec.bad_state();
    std::vector<double> kernel(static_cast<std::size_t>(S) * A * S, 0.0);
    std::vector<double> reward(static_cast<std::size_t>(S) * A, 0.0);
    auto P = [&](int s, int a, int next) -> double& {
        return kernel[(static_cast<std::size_t>(s) * A + static_cast<std::size_t>(a)) * S + static_cast<std::size_t>(next)];
    };

    for (int i = 0; i < n; ++i)
        for (int a = 0; a < A; ++a) {
            const double tilt = (!reference && spec.optimal_actions[static_cast<std::size_t>(i)] == a) ? spec.gamma : 0.0;
            P(i, a, i) = 1.0 - 1.0 / H;
            P(i, a, good) = (0.5 + tilt) / H;
            P(i, a, bad) = (0.5 - tilt) / H;
        }
    for (int a = 0; a < A; ++a) {
        P(good, a, good) = 1.0;
        P(bad, a, bad) = 1.0;
        reward[static_cast<std::size_t>(good) * A + a] = 1.0;
    }
    std::vector<double> rho(static_cast<std::size_t>(S), 0.0);
    for (int i = 0; i < n; ++i) rho[static_cast<std::size_t>(i)] = 1.0 / n;

    TabularMDP mdp({S, A, spec.horizon}, std::move(kernel), std::move(reward), std::move(rho));
    require_valid(mdp);
    return mdp;
}

EffectiveParameters effective_beta_sigma(const TabularMDP& src, const TabularMDP& tar) {
    const auto region = true_shift_region(src, tar);
    return {region.effective_beta, reachability_sigma(tar).sigma};
}

}  // namespace hysrl
