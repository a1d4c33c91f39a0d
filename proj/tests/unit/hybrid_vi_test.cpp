#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <gtest/gtest.h>

#include "hysrl/dp.hpp"
#include "hysrl/hybrid_vi.hpp"
#include "oracles.hpp"

using namespace hysrl;

namespace {

constexpr double kQUpperExample = 1.002199150526867235836666849806826155306;
constexpr double kGExample = 0.005497876317168089591667124517065388265546;

std::vector<Count> counts_from_kernel(const TabularMDP& m, double per_pair) {
    const auto [S, A, H] = m.dims();
    std::vector<Count> counts(static_cast<std::size_t>(S) * A * S);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (int n = 0; n < S; ++n)
                counts[(static_cast<std::size_t>(s) * A + a) * S + n] = std::llround(m.p(s, a, n) * per_pair);
    return counts;
}

HybridModel live_model(const TabularMDP& m, std::vector<Count> counts) {
    const Dims d = m.dims();
    return HybridModel::with_source(PairSet::all(d.S, d.A), EmpiricalModel::from_counts(d, std::move(counts)), nullptr);
}

struct NaiveBounds {
    std::vector<double> qu, ql, g;
};

// Direct transcription of the recursions over explicit loops, used as a second route.
NaiveBounds naive_bounds(const EmpiricalModel& model, const TabularMDP& task, double delta, double scale) {
    const auto [S, A, H] = task.dims();
    const auto idx = [&](int h, int s, int a) { return (static_cast<std::size_t>(h) * S + s) * A + a; };
    NaiveBounds out{std::vector<double>((H + 1) * S * A, 0.0), std::vector<double>((H + 1) * S * A, 0.0),
                    std::vector<double>((H + 1) * S * A, 0.0)};
    std::vector<double> vu((H + 1) * S, 0.0), vl((H + 1) * S, 0.0);
    std::vector<int> greedy(H * S, 0);
    const double logsah = std::log(6.0 * S * A * H / delta);
    for (int h = H - 1; h >= 0; --h) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const double n = static_cast<double>(model.n(s, a));
                if (n == 0) {
                    out.qu[idx(h, s, a)] = H;
                    out.ql[idx(h, s, a)] = 0;
                    continue;
                }
                const double g1 = scale * (logsah + S * std::log(8.0 * std::exp(1.0) * (n + 1)));
                const double g2 = scale * (logsah + std::log(8.0 * std::exp(1.0) * (n + 1)));
                double pu = 0, pl = 0, pu2 = 0;
                for (int k = 0; k < S; ++k) {
                    const double p = model.row(s, a)[k];
                    pu += p * vu[(h + 1) * S + k];
                    pl += p * vl[(h + 1) * S + k];
                    pu2 += p * vu[(h + 1) * S + k] * vu[(h + 1) * S + k];
                }
                const double var = std::max(0.0, pu2 - pu * pu);
                const double b = 3 * std::sqrt(var * g2 / n) + 14.0 * H * H * g1 / n + (pu - pl) / H;
                out.qu[idx(h, s, a)] = std::min<double>(H, task.r(s, a) + pu + b);
                out.ql[idx(h, s, a)] = std::max(0.0, task.r(s, a) + pl - b);
            }
            int best = 0;
            for (int a = 1; a < A; ++a)
                if (out.qu[idx(h, s, a)] > out.qu[idx(h, s, best)]) best = a;
            greedy[h * S + s] = best;
            vu[h * S + s] = out.qu[idx(h, s, best)];
            vl[h * S + s] = *std::max_element(out.ql.begin() + idx(h, s, 0), out.ql.begin() + idx(h, s, 0) + A);
        }
    }
    for (int h = H - 1; h >= 0; --h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const double n = static_cast<double>(model.n(s, a));
                if (n == 0) {
                    out.g[idx(h, s, a)] = H;
                    continue;
                }
                const double g1 = scale * (logsah + S * std::log(8.0 * std::exp(1.0) * (n + 1)));
                const double g2 = scale * (logsah + std::log(8.0 * std::exp(1.0) * (n + 1)));
                double pu = 0, pu2 = 0, pg = 0;
                for (int k = 0; k < S; ++k) {
                    const double p = model.row(s, a)[k];
                    pu += p * vu[(h + 1) * S + k];
                    pu2 += p * vu[(h + 1) * S + k] * vu[(h + 1) * S + k];
                    if (h + 1 < H) pg += p * out.g[idx(h + 1, k, greedy[(h + 1) * S + k])];
                }
                const double var = std::max(0.0, pu2 - pu * pu);
                out.g[idx(h, s, a)] = std::min<double>(
                    H, 6 * std::sqrt(var * g2 / n) + 35.0 * H * H * g1 / n + (1.0 + 3.0 / H) * pg);
            }
    return out;
}

TabularMDP constant_reward_pair(double r, int H) {
    return TabularMDP({2, 1, H}, {0.5, 0.5, 0.5, 0.5}, {r, r}, {1.0, 0.0});
}

}  // namespace

TEST(BackupBounds, NoDataGivesTrivialBounds) {
    std::mt19937_64 gen(41);
    const auto m = oracle::random_mdp(gen, 3, 2, 4);
    const auto model = HybridModel::online_only(m.dims());
    const BonusFunctions bonus(m.dims(), 0.1);
    const auto out = backup_bounds(model, m, bonus);
    const auto G = backup_G(model, out.bounds, out.greedy, bonus);
    for (int h = 0; h < 4; ++h)
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 2; ++a) {
                EXPECT_EQ(out.bounds.Qu(h, s, a), 4.0);
                EXPECT_EQ(out.bounds.Ql(h, s, a), 0.0);
                EXPECT_EQ(G.at(h, s, a), 4.0);
            }
}

TEST(BackupBounds, LastStepClosedForm) {
    const auto m = constant_reward_pair(1.0, 2);
    const auto model = live_model(m, {500'000, 500'000, 500'000, 500'000});
    const BonusFunctions bonus(m.dims(), 0.1);
    const auto out = backup_bounds(model, m, bonus);
    EXPECT_NEAR(out.bounds.Qu(1, 0, 0), kQUpperExample, 1e-14);
    EXPECT_NEAR(out.bounds.Ql(1, 0, 0), 2.0 - kQUpperExample, 1e-14);
    const auto G = backup_G(model, out.bounds, out.greedy, bonus);
    EXPECT_NEAR(G.at(1, 0, 0), kGExample, 1e-16);
}

TEST(BackupBounds, BonusVanishesWithHugeCounts) {
    const auto m = constant_reward_pair(0.7, 3);
    const auto model = live_model(m, {500'000'000'000, 500'000'000'000, 500'000'000'000, 500'000'000'000});
    const BonusFunctions bonus(m.dims(), 0.1);
    const auto out = backup_bounds(model, m, bonus);
    for (int h = 0; h < 3; ++h) {
        const double exact = 0.7 * (3 - h);
        EXPECT_LE(out.bounds.Qu(h, 0, 0) - exact, 1e-6 * (3 - h));
        EXPECT_GE(out.bounds.Ql(h, 0, 0), exact - 1e-6 * (3 - h));
        EXPECT_LE(out.bounds.Qu(h, 0, 0) - (0.7 + out.bounds.Vu(h + 1, 0)), 1e-6);
    }
    const auto one_step = constant_reward_pair(0.7, 1);
    const auto G = backup_G(live_model(one_step, {500'000'000'000, 500'000'000'000, 1, 1}),
                            backup_bounds(live_model(one_step, {500'000'000'000, 500'000'000'000, 1, 1}), one_step,
                                          BonusFunctions(one_step.dims(), 0.1))
                                .bounds,
                            Policy::deterministic(one_step.dims(), {0, 0}), BonusFunctions(one_step.dims(), 0.1));
    EXPECT_LE(G.at(0, 0, 0), 1e-6);
}

TEST(BackupBounds, MatchesNaiveTranscriptionOnRandomModels) {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 40; ++trial) {
        const int S = 2 + static_cast<int>(gen() % 3), A = 1 + static_cast<int>(gen() % 3),
                  H = 1 + static_cast<int>(gen() % 5);
        const auto m = oracle::random_mdp(gen, S, A, H);
        std::vector<Count> counts(static_cast<std::size_t>(S) * A * S);
        for (auto& c : counts) c = gen() % 4 == 0 ? 0 : static_cast<Count>(gen() % 5000);
        const auto target = EmpiricalModel::from_counts(m.dims(), counts);
        const double scale = trial % 2 ? 2e-3 : 1e-5;
        const auto model = HybridModel::with_source(PairSet::all(S, A), target, nullptr);
        const BonusFunctions bonus(m.dims(), 0.1, scale);
        const auto out = backup_bounds(model, m, bonus);
        const auto G = backup_G(model, out.bounds, out.greedy, bonus);
        const auto ref = naive_bounds(target, m, 0.1, scale);
        for (std::size_t i = 0; i < ref.qu.size(); ++i) {
            EXPECT_NEAR(out.bounds.q_upper[i], ref.qu[i], 1e-12);
            EXPECT_NEAR(out.bounds.q_lower[i], ref.ql[i], 1e-12);
            EXPECT_NEAR(G.g[i], ref.g[i], 1e-11);
        }
    }
}

TEST(BackupBounds, SandwichAndRangesOnRandomModels) {
    std::mt19937_64 gen(43);
    for (int trial = 0; trial < 60; ++trial) {
        const int S = 1 + static_cast<int>(gen() % 5), A = 1 + static_cast<int>(gen() % 3),
                  H = 1 + static_cast<int>(gen() % 8);
        const auto m = oracle::random_mdp(gen, S, A, H);
        std::vector<Count> counts(static_cast<std::size_t>(S) * A * S);
        for (auto& c : counts) c = gen() % 3 == 0 ? 0 : static_cast<Count>(gen() % 100);
        const auto model = live_model(m, counts);
        const BonusFunctions bonus(m.dims(), 0.1, 1e-4);
        const auto out = backup_bounds(model, m, bonus);
        const auto G = backup_G(model, out.bounds, out.greedy, bonus);
        for (std::size_t i = 0; i < out.bounds.q_upper.size(); ++i) {
            EXPECT_LE(out.bounds.q_lower[i], out.bounds.q_upper[i]);
            EXPECT_GE(out.bounds.q_lower[i], 0.0);
            EXPECT_LE(out.bounds.q_upper[i], H);
            EXPECT_GE(G.g[i], 0.0);
            EXPECT_LE(G.g[i], H);
        }
    }
}

TEST(BackupBounds, SourceServedPairsUseSourceStatistics) {
    std::mt19937_64 gen(44);
    const auto m = oracle::random_mdp(gen, 3, 2, 3);
    auto source = std::make_shared<const EmpiricalModel>(EmpiricalModel::from_counts(m.dims(), counts_from_kernel(m, 1e6)));
    PairSet region(3, 2);
    region.insert(1, 0);
    const HybridModel hybrid = HybridModel::with_source(region, EmpiricalModel(m.dims()), source);
    EXPECT_EQ(hybrid.n(1, 0), 0);
    EXPECT_EQ(hybrid.n(0, 0), source->n(0, 0));
    EXPECT_EQ(hybrid.n(2, 1), source->n(2, 1));
    const auto out = backup_bounds(hybrid, m, BonusFunctions(m.dims(), 0.1, 1e-3));
    EXPECT_EQ(out.bounds.Qu(0, 1, 0), 3.0);
    EXPECT_LT(out.bounds.Qu(2, 2, 1), 3.0);
}

TEST(HybridModel, OutsidePairsWithoutSourceAreRejected) {
    PairSet region(2, 2);
    region.insert(0, 0);
    EXPECT_THROW(HybridModel::with_source(region, EmpiricalModel({2, 2, 2}), nullptr), InvalidInput);
}

TEST(HybridUcbvi, EmptyRegionWithExactSourceStopsImmediately) {
    std::mt19937_64 gen(45);
    for (int trial = 0; trial < 5; ++trial) {
        const auto m = oracle::random_mdp(gen, 3, 2, 3);
        auto source = std::make_shared<const EmpiricalModel>(
            EmpiricalModel::from_counts(m.dims(), counts_from_kernel(m, 1e10)));
        auto model = HybridModel::with_source(PairSet(3, 2), EmpiricalModel(m.dims()), source);
        Rng rng = make_rng(static_cast<std::uint64_t>(trial));
        VIConfig cfg;
        cfg.bonus_scale = 1.0;
        const auto r = run_hybrid_ucbvi(m, model, cfg, rng);
        EXPECT_TRUE(r.stopped);
        EXPECT_EQ(r.episodes, 0);
        EXPECT_EQ(r.trace.back().samples, 0);
        EXPECT_LE(optimality_gap(m, r.policy), cfg.epsilon);
    }
}

TEST(HybridUcbvi, OneStateMdpStopsAtClosedFormThreshold) {
    const int H = 2;
    const double eps = 0.1, delta = 0.1, scale = 1e-2;
    const TabularMDP m({1, 1, H}, {1.0}, {0.5}, {1.0});
    // With one next state the variance term vanishes and G_h = min(H, c + (1+3/H) G_{h+1}).
    long long expected = -1;
    for (long long t = 1; expected < 0; ++t) {
        const double n = static_cast<double>(H * t);
        const double g1 = scale * (std::log(6.0 * H / delta) + std::log(8.0 * std::exp(1.0) * (n + 1)));
        const double c = 35.0 * H * H * g1 / n;
        double G = 0.0;
        for (int h = 0; h < H; ++h) G = std::min<double>(H, c + (1.0 + 3.0 / H) * G);
        if (G <= eps) expected = t;
    }
    auto model = HybridModel::online_only(m.dims());
    Rng rng = make_rng(1);
    const auto r = run_hybrid_ucbvi(m, model, {eps, delta, scale, 1'000'000}, rng);
    EXPECT_TRUE(r.stopped);
    EXPECT_EQ(r.episodes, expected);
    EXPECT_EQ(r.trace.back().samples, H * expected);
}

TEST(HybridUcbvi, CapHitIsFlaggedWithPolicy) {
    std::mt19937_64 gen(46);
    const auto m = oracle::random_mdp(gen, 3, 2, 3);
    auto model = HybridModel::online_only(m.dims());
    Rng rng = make_rng(2);
    const auto r = run_hybrid_ucbvi(m, model, {0.1, 0.1, 1.0, 5}, rng);
    EXPECT_TRUE(r.cap_hit);
    EXPECT_FALSE(r.stopped);
    EXPECT_EQ(r.episodes, 5);
    EXPECT_EQ(r.policy.dims(), m.dims());
    EXPECT_EQ(model.target().total_transitions(), 15);
}

TEST(HybridUcbvi, SameSeedSameTrace) {
    std::mt19937_64 gen(47);
    const auto m = oracle::random_mdp(gen, 4, 2, 4);
    auto a = HybridModel::online_only(m.dims()), b = HybridModel::online_only(m.dims());
    Rng ra = make_rng(9), rb = make_rng(9);
    const VIConfig cfg{0.1, 0.1, 2e-3, 300};
    const auto x = run_hybrid_ucbvi(m, a, cfg, ra);
    const auto y = run_hybrid_ucbvi(m, b, cfg, rb);
    EXPECT_EQ(x.episodes, y.episodes);
    EXPECT_EQ(x.policy, y.policy);
    EXPECT_EQ(a.target(), b.target());
    EXPECT_EQ(vi_trace_csv(x.trace, 0.1), vi_trace_csv(y.trace, 0.1));
}

TEST(HybridUcbvi, SourceServedRowsNeverChange) {
    std::mt19937_64 gen(48);
    const auto m = oracle::random_mdp(gen, 3, 2, 4);
    auto source = std::make_shared<const EmpiricalModel>(EmpiricalModel::from_counts(m.dims(), counts_from_kernel(m, 1e3)));
    const EmpiricalModel snapshot = *source;
    PairSet region(3, 2);
    region.insert(0, 1);
    region.insert(2, 0);
    auto model = HybridModel::with_source(region, EmpiricalModel(m.dims()), source);
    std::vector<std::vector<double>> rows_before;
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a)
            if (!region.contains(s, a)) rows_before.emplace_back(model.row(s, a).begin(), model.row(s, a).end());
    Rng rng = make_rng(3);
    run_hybrid_ucbvi(m, model, {0.1, 0.1, 1.0, 200}, rng, [&](const VIIteration&) {
        std::size_t k = 0;
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 2; ++a) {
                if (region.contains(s, a)) continue;
                const auto row = model.row(s, a);
                EXPECT_TRUE(std::equal(row.begin(), row.end(), rows_before[k++].begin()));
                EXPECT_EQ(model.target().n(s, a), 0);
            }
    });
    EXPECT_EQ(*source, snapshot);
    EXPECT_GT(model.target().n(0, 1) + model.target().n(2, 0), 0);
}

TEST(HybridUcbvi, OptimismHoldsWithRawBonuses) {
    std::mt19937_64 gen(49);
    int violations = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto m = oracle::random_mdp(gen, 3, 2, 3);
        const auto star = optimal_values(m).values;
        auto model = HybridModel::online_only(m.dims());
        Rng rng = make_rng(seed);
        bool ok = true;
        run_hybrid_ucbvi(m, model, {0.1, 0.1, 1.0, 300}, rng, [&](const VIIteration& it) {
            const auto& b = it.backup.bounds;
            for (std::size_t i = 0; i < b.q_upper.size(); ++i) {
                EXPECT_LE(b.q_lower[i], b.q_upper[i]);
                ok &= b.q_lower[i] <= star.q[i] + 1e-12 && star.q[i] <= b.q_upper[i] + 1e-12;
            }
        });
        violations += !ok;
    }
    EXPECT_EQ(violations, 0);
}

TEST(HybridUcbvi, InvalidConfigThrows) {
    const auto m = constant_reward_pair(0.5, 2);
    auto model = HybridModel::online_only(m.dims());
    Rng rng = make_rng(0);
    EXPECT_THROW(run_hybrid_ucbvi(m, model, {0.0, 0.1, 1.0, 10}, rng), InvalidInput);
    EXPECT_THROW(run_hybrid_ucbvi(m, model, {1.5, 0.1, 1.0, 10}, rng), InvalidInput);
    EXPECT_THROW(run_hybrid_ucbvi(m, model, {0.1, 1.0, 1.0, 10}, rng), InvalidInput);
}

TEST(ViTraceCsv, HeaderAndOptionalColumns) {
    const std::vector<VIStep> trace{{0, 0, 4.0}, {1, 3, 2.5}};
    const auto csv = vi_trace_csv(trace, 0.1, {0.5});
    EXPECT_EQ(csv.rfind("episode,target_samples_cumulative,rho_pi_G,epsilon,exact_gap,mc_gap\n", 0), 0u);
    EXPECT_NE(csv.find("\n0,0,4,0.1,0.5,\n"), std::string::npos) << csv;
    EXPECT_NE(csv.find("\n1,3,2.5,0.1,,\n"), std::string::npos) << csv;
}
