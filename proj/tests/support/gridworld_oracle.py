"""Independent numpy construction of the 4x4 GridWorld pair.

Writes tests/data/gridworld_golden.json with both kernels, rewards, the optimal
value at the start state, the exact shift region and the reachability constant.
Run from the repository root: python3 tests/support/gridworld_oracle.py
"""
import json
import numpy as np

W = HGT = 4
H = 20
S = W * HGT + 1
SPENT = W * HGT
MOVES = [(-1, 0), (1, 0), (0, -1), (0, 1)]  # up, down, left, right
REWARDS = {(1, 4): 1.0, (2, 3): 0.1, (3, 2): 0.01, (3, 4): 1.5}
START = (3, 2)
TRAPS = [(2, 2), (2, 4), (3, 3)]


def idx(r, c):
    return (r - 1) * W + (c - 1)


def build(success, traps):
    P = np.zeros((S, 4, S))
    R = np.zeros((S, 4))
    top = max(REWARDS.values())
    for r in range(1, HGT + 1):
        for c in range(1, W + 1):
            s = idx(r, c)
            R[s, :] = REWARDS.get((r, c), 0.0) / top
            if (r, c) == (1, 4):
                P[s, :, SPENT] = 1.0
                continue
            if (r, c) in traps:
                P[s, :, s] = 1.0
                continue
            for a in range(4):
                for d, (dr, dc) in enumerate(MOVES):
                    nr, nc = r + dr, c + dc
                    if not (1 <= nr <= HGT and 1 <= nc <= W):
                        nr, nc = r, c
                    P[s, a, idx(nr, nc)] += success if d == a else (1 - success) / 3
    P[SPENT, :, SPENT] = 1.0
    return P, R


def optimal_value(P, R):
    V = np.zeros(S)
    for _ in range(H):
        V = (R + P @ V).max(axis=1)
    return V[idx(*START)]


def sigma(P):
    rho = np.zeros(S)
    rho[idx(*START)] = 1.0
    best = np.zeros(S)
    for target in range(S):
        reach = np.zeros(S)
        reach[target] = 1.0
        for _ in range(H):
            best[target] = max(best[target], rho @ reach)
            reach = (P @ reach).max(axis=1)
    return best.min()


def main():
    Ps, Rs = build(0.95, [])
    Pt, Rt = build(0.95, TRAPS)
    diff = [[s, a, 0.5 * float(np.abs(Ps[s, a] - Pt[s, a]).sum())]
            for s in range(S) for a in range(4) if not np.array_equal(Ps[s, a], Pt[s, a])]
    out = {
        "source_kernel": Ps.tolist(),
        "target_kernel": Pt.tolist(),
        "reward": Rs.tolist(),
        "source_optimal_value": optimal_value(Ps, Rs),
        "target_optimal_value": optimal_value(Pt, Rt),
        "shift_region": diff,
        "effective_beta": min(d[2] for d in diff),
        "target_sigma": sigma(Pt),
    }
    with open("tests/data/gridworld_golden.json", "w") as f:
        json.dump(out, f)
    print({k: v for k, v in out.items() if not isinstance(v, list)}, len(diff))


if __name__ == "__main__":
    main()
