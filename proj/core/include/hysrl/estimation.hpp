#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hysrl/mdp.hpp"

namespace hysrl {

using Count = std::int64_t;

/// Membership set over state-action pairs, index s*A + a.
class PairSet {
public:
    PairSet() = default;
    PairSet(int S, int A, bool fill = false)
        : S_(S), A_(A), member_(static_cast<std::size_t>(S) * A, fill ? 1 : 0) {}
    static PairSet all(int S, int A) { return PairSet(S, A, true); }

    bool contains(StateId s, ActionId a) const { return member_[idx(s, a)] != 0; }
    void insert(StateId s, ActionId a) { member_[idx(s, a)] = 1; }
    void erase(StateId s, ActionId a) { member_[idx(s, a)] = 0; }

    int num_states() const { return S_; }
    int num_actions() const { return A_; }
    std::size_t size() const;
    bool empty() const { return size() == 0; }
    std::vector<std::pair<StateId, ActionId>> pairs() const;

    PairSet united(const PairSet& other) const;
    PairSet intersected(const PairSet& other) const;

    friend bool operator==(const PairSet&, const PairSet&) = default;

private:
    std::size_t idx(StateId s, ActionId a) const {
        return static_cast<std::size_t>(s) * A_ + static_cast<std::size_t>(a);
    }
    int S_ = 0;
    int A_ = 0;
    std::vector<std::uint8_t> member_;
};

/**
Visitation counts n(s,a), n(s,a,s') and the empirical kernel derived from
them. Rows with n(s,a) = 0 are uniform 1/S. Rows are recomputed only when
their counts change.
*/
class EmpiricalModel {
public:
    EmpiricalModel() = default;
    explicit EmpiricalModel(Dims dims);
    /// Builds from a dense S*A*S table of transition counts.
    static EmpiricalModel from_counts(Dims dims, std::vector<Count> transition_counts);

    const Dims& dims() const { return dims_; }

    Count n(StateId s, ActionId a) const { return pair_counts_[pi(s, a)]; }
    Count n(StateId s, ActionId a, StateId next) const {
        return transition_counts_[pi(s, a) * static_cast<std::size_t>(dims_.S) + static_cast<std::size_t>(next)];
    }
    std::span<const double> row(StateId s, ActionId a) const {
        return {kernel_.data() + pi(s, a) * static_cast<std::size_t>(dims_.S), static_cast<std::size_t>(dims_.S)};
    }

    /// Adds one transition and refreshes its kernel row.
    void add(StateId s, ActionId a, StateId next, Count times = 1);
    /// Adds every transition of the trace whose (s,a) is in the mask (all when null).
    void update(const EpisodeTrace& trace, const PairSet* mask = nullptr);
    /// Zeroes counts of every pair outside the region.
    void restrict_to(const PairSet& region);

    Count total_transitions() const;
    const std::vector<Count>& transition_counts() const { return transition_counts_; }

    friend bool operator==(const EmpiricalModel&, const EmpiricalModel&) = default;

private:
    std::size_t pi(StateId s, ActionId a) const {
        return static_cast<std::size_t>(s) * dims_.A + static_cast<std::size_t>(a);
    }
    void refresh_row(StateId s, ActionId a);
    void check_index(StateId s, ActionId a, StateId next) const;

    Dims dims_;
    std::vector<Count> pair_counts_;
    std::vector<Count> transition_counts_;
    std::vector<double> kernel_;
};

/// Update helper mirroring the functional form; returns the updated copy.
EmpiricalModel update_counts(EmpiricalModel model, const EpisodeTrace& trace,
                             const PairSet* mask = nullptr);

/// Smallest n(s,a) over the region (all pairs when absent). Throws on an empty region.
Count min_count(const EmpiricalModel& model, const std::optional<PairSet>& region = std::nullopt);

/// Half L1 distance. Throws on length mismatch or non-normalized input.
double tv_distance(std::span<const double> p, std::span<const double> q);
/// sum p log(p/q); +inf when p is not absolutely continuous w.r.t. q.
double kl_divergence(std::span<const double> p, std::span<const double> q);
/// p(f^2) - (pf)^2 clamped at zero.
double variance_under(std::span<const double> p, std::span<const double> f);

/**
Confidence-width functions
  g1(n) = log(6SAH/delta) + S log(8e(n+1))
  g2(n) = log(6SAH/delta) + log(8e(n+1))
  g3    = log(6SA/delta)
each multiplied by a configurable scale (1 for the raw formulas).
*/
class BonusFunctions {
public:
    BonusFunctions(Dims dims, double delta, double scale = 1.0);

    double g1(double n) const;
    double g2(double n) const;
    double g3() const { return scale_ * log_sa_; }

    double delta() const { return delta_; }
    double scale() const { return scale_; }
    const Dims& dims() const { return dims_; }

private:
    Dims dims_;
    double delta_;
    double scale_;
    double log_sah_;
    double log_sa_;
};

inline double g1(double n, double delta, Dims dims, double scale = 1.0) {
    return BonusFunctions(dims, delta, scale).g1(n);
}
inline double g2(double n, double delta, Dims dims, double scale = 1.0) {
    return BonusFunctions(dims, delta, scale).g2(n);
}
inline double g3(double delta, Dims dims, double scale = 1.0) {
    return BonusFunctions(dims, delta, scale).g3();
}

// ---------------------------------------------------------------------------
// Source dataset persistence

struct SourceMetadata {
    int version = 1;
    Dims dims;
    std::string env_fingerprint;
    long long episodes = 0;

    friend bool operator==(const SourceMetadata&, const SourceMetadata&) = default;
};

struct SourceDataset {
    SourceMetadata meta;
    EmpiricalModel model;

    friend bool operator==(const SourceDataset&, const SourceDataset&) = default;
};

/// JSON header line, a "---" separator, then CSV s,a,s_next,count for nonzero triples.
std::string serialize_source(const SourceDataset& dataset);
SourceDataset parse_source(std::string_view text);

void save_source(const std::filesystem::path& path, const SourceDataset& dataset);
/// When expected dims are given, a mismatch raises DimensionError naming both.
SourceDataset load_source(const std::filesystem::path& path,
                          const std::optional<Dims>& expected = std::nullopt);

}  // namespace hysrl
