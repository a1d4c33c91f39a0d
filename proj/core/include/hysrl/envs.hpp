#pragma once

#include <string>
#include <vector>

#include "hysrl/mdp.hpp"
#include "hysrl/shift_id.hpp"

namespace hysrl {

/// 1-indexed (row, col); row 1 is the top row.
struct Cell {
    int row;
    int col;
    friend bool operator==(const Cell&, const Cell&) = default;
};

struct RewardPlacement {
    Cell cell;
    double value;
};

enum class GridAction : int { Up = 0, Down = 1, Left = 2, Right = 3 };

/**
4x4 room with slippery moves. The intended move succeeds with success_prob,
otherwise one of the other three directions is taken uniformly; moves off the
grid leave the agent in place. Absorbing cells and traps self-loop.

With once_only_reward the cell `once_only_cell` is split into a paying
"fresh" state and a zero-reward absorbing "spent" state (index width*height),
so the reward there is collected once. Rewards are divided by the largest
placement value when normalize_rewards is set, keeping r in [0,1].
*/
struct GridWorldSpec {
    int width = 4;
    int height = 4;
    int horizon = 20;
    double success_prob = 0.95;
    std::vector<RewardPlacement> rewards;
    std::vector<Cell> absorbing;
    std::vector<Cell> traps;
    Cell start{3, 2};
    bool once_only_reward = true;
    Cell once_only_cell{1, 4};
    bool normalize_rewards = true;

    /// Room, rewards and start shared by both environments of the experiment.
    static GridWorldSpec source(double success_prob = 0.95, bool once_only = true);
    /// Source plus absorbing traps at (2,2), (2,4), (3,3).
    static GridWorldSpec target(double success_prob = 0.95, bool once_only = true);

    int num_states() const { return width * height + (once_only_reward ? 1 : 0); }
    int state_of(Cell c) const { return (c.row - 1) * width + (c.col - 1); }
    int spent_state() const { return width * height; }

    std::string to_json() const;
};

TabularMDP build_gridworld(const GridWorldSpec& spec);

/**
Lower-bound family: bandit states s_0..s_{n-1}, then s_g (index n) and s_b
(index n+1). At s_i every action stays with prob 1 - 1/H and exits to s_g /
s_b with (1/2 +- gamma*[a == a*_i]) / H. An empty optimal-action vector
gives the reference MDP with exits 1/(2H) each. s_g pays 1, everything else
0; rho is uniform over the bandit states.
*/
struct HardInstanceSpec {
    int bandit_states = 1;
    int actions = 2;
    int horizon = 3;
    double gamma = 0.1;
    std::vector<int> optimal_actions;

    int good_state() const { return bandit_states; }
    int bad_state() const { return bandit_states + 1; }
    std::string to_json() const;
};

TabularMDP build_hard_instance(const HardInstanceSpec& spec);

struct EffectiveParameters {
    double beta;   // min exact TV over shifted pairs, 1 when none differ
    double sigma;  // reachability of the target
};

EffectiveParameters effective_beta_sigma(const TabularMDP& src, const TabularMDP& tar);

}  // namespace hysrl
