#include "hysrl/sampling.hpp"

namespace hysrl {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
    const double u = uniform01(rng);
    double cumulative = 0.0;
    int last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        cumulative += probs[i];
        last_positive = static_cast<int>(i);
        if (u < cumulative) return last_positive;
    }
    // rounding left u above the accumulated mass
    return last_positive;
}

EpisodeTrace sample_episode(const TabularMDP& mdp, const Policy& pi, Rng& rng, long long episode) {
    const auto [S, A, H] = mdp.dims();
    EpisodeTrace trace;
    trace.episode = episode;
    trace.steps.reserve(static_cast<std::size_t>(H));
    std::vector<double> action_probs(static_cast<std::size_t>(A));
    int s = sample_categorical(mdp.rho(), rng);
    for (int h = 0; h < H; ++h) {
        int a;
        if (pi.is_deterministic()) {
            a = pi.action(h, s);
        } else {
            for (int b = 0; b < A; ++b) action_probs[static_cast<std::size_t>(b)] = pi.prob(h, s, b);
            a = sample_categorical(action_probs, rng);
        }
        const int next = sample_categorical(mdp.row(s, a), rng);
        trace.steps.push_back({s, a, mdp.r(s, a), next});
        s = next;
    }
    (void)S;
    return trace;
}

double episode_return(const EpisodeTrace& trace) {
    double total = 0.0;
    for (const auto& t : trace.steps) total += t.r;
    return total;
}

}  // namespace hysrl
