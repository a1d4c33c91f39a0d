#include "hysrl/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace hysrl {

std::size_t PairSet::size() const {
    return static_cast<std::size_t>(std::count(member_.begin(), member_.end(), 1));
}

std::vector<std::pair<StateId, ActionId>> PairSet::pairs() const {
    std::vector<std::pair<StateId, ActionId>> out;
    for (int s = 0; s < S_; ++s)
        for (int a = 0; a < A_; ++a)
            if (contains(s, a)) out.emplace_back(s, a);
    return out;
}

PairSet PairSet::united(const PairSet& other) const {
    if (other.S_ != S_ || other.A_ != A_) throw DimensionError("PairSet union: shape mismatch");
    PairSet out = *this;
    for (std::size_t i = 0; i < member_.size(); ++i) out.member_[i] = member_[i] | other.member_[i];
    return out;
}

PairSet PairSet::intersected(const PairSet& other) const {
    if (other.S_ != S_ || other.A_ != A_) throw DimensionError("PairSet intersection: shape mismatch");
    PairSet out = *this;
    for (std::size_t i = 0; i < member_.size(); ++i) out.member_[i] = member_[i] & other.member_[i];
    return out;
}

// ---------------------------------------------------------------------------

EmpiricalModel::EmpiricalModel(Dims dims)
    : dims_(dims),
      pair_counts_(static_cast<std::size_t>(dims.S) * dims.A, 0),
      transition_counts_(static_cast<std::size_t>(dims.S) * dims.A * dims.S, 0),
      kernel_(static_cast<std::size_t>(dims.S) * dims.A * dims.S, 1.0 / dims.S) {
    if (dims.S <= 0 || dims.A <= 0) throw InvalidInput("EmpiricalModel: empty state or action space");
}

EmpiricalModel EmpiricalModel::from_counts(Dims dims, std::vector<Count> transition_counts) {
    EmpiricalModel m(dims);
    if (transition_counts.size() != m.transition_counts_.size())
        throw DimensionError("EmpiricalModel: expected S*A*S transition counts");
    m.transition_counts_ = std::move(transition_counts);
    for (int s = 0; s < dims.S; ++s)
        for (int a = 0; a < dims.A; ++a) {
            Count total = 0;
            for (int n = 0; n < dims.S; ++n) {
                const Count c = m.n(s, a, n);
                if (c < 0) throw InvalidInput("EmpiricalModel: negative count");
                total += c;
            }
            m.pair_counts_[m.pi(s, a)] = total;
            m.refresh_row(s, a);
        }
    return m;
}

void EmpiricalModel::check_index(StateId s, ActionId a, StateId next) const {
    if (s < 0 || s >= dims_.S || a < 0 || a >= dims_.A || next < 0 || next >= dims_.S) {
        std::ostringstream os;
        os << "EmpiricalModel: transition (" << s << "," << a << "," << next
           << ") out of range for " << to_string(dims_);
        throw DimensionError(os.str());
    }
}

void EmpiricalModel::refresh_row(StateId s, ActionId a) {
    const auto S = static_cast<std::size_t>(dims_.S);
    const std::size_t base = pi(s, a) * S;
    const Count total = pair_counts_[pi(s, a)];
    if (total == 0) {
        std::fill_n(kernel_.begin() + static_cast<std::ptrdiff_t>(base), S, 1.0 / dims_.S);
        return;
    }
    const double inv = 1.0 / static_cast<double>(total);
    for (std::size_t n = 0; n < S; ++n)
        kernel_[base + n] = static_cast<double>(transition_counts_[base + n]) * inv;
}

void EmpiricalModel::add(StateId s, ActionId a, StateId next, Count times) {
    check_index(s, a, next);
    pair_counts_[pi(s, a)] += times;
    transition_counts_[pi(s, a) * static_cast<std::size_t>(dims_.S) + static_cast<std::size_t>(next)] += times;
    refresh_row(s, a);
}

void EmpiricalModel::update(const EpisodeTrace& trace, const PairSet* mask) {
    for (const auto& t : trace.steps) check_index(t.s, t.a, t.next);
    for (const auto& t : trace.steps) {
        if (mask && !mask->contains(t.s, t.a)) continue;
        pair_counts_[pi(t.s, t.a)] += 1;
        transition_counts_[pi(t.s, t.a) * static_cast<std::size_t>(dims_.S) + static_cast<std::size_t>(t.next)] += 1;
    }
    // rows are refreshed once per touched pair
    for (const auto& t : trace.steps)
        if (!mask || mask->contains(t.s, t.a)) refresh_row(t.s, t.a);
}

void EmpiricalModel::restrict_to(const PairSet& region) {
    for (int s = 0; s < dims_.S; ++s)
        for (int a = 0; a < dims_.A; ++a) {
            if (region.contains(s, a)) continue;
            pair_counts_[pi(s, a)] = 0;
            std::fill_n(transition_counts_.begin() + static_cast<std::ptrdiff_t>(pi(s, a) * dims_.S),
                        dims_.S, Count{0});
            refresh_row(s, a);
        }
}

Count EmpiricalModel::total_transitions() const {
    Count total = 0;
    for (auto c : pair_counts_) total += c;
    return total;
}

EmpiricalModel update_counts(EmpiricalModel model, const EpisodeTrace& trace, const PairSet* mask) {
    model.update(trace, mask);
    return model;
}

Count min_count(const EmpiricalModel& model, const std::optional<PairSet>& region) {
    const auto& d = model.dims();
    Count best = std::numeric_limits<Count>::max();
    bool any = false;
    for (int s = 0; s < d.S; ++s)
        for (int a = 0; a < d.A; ++a) {
            if (region && !region->contains(s, a)) continue;
            any = true;
            best = std::min(best, model.n(s, a));
        }
    if (!any) throw InvalidInput("min_count: empty region");
    return best;
}

// ---------------------------------------------------------------------------

namespace {

void require_same_length(std::span<const double> p, std::span<const double> q, const char* what) {
    if (p.size() != q.size())
        throw DimensionError(std::string(what) + ": length mismatch " + std::to_string(p.size()) +
                             " vs " + std::to_string(q.size()));
}

void require_normalized(std::span<const double> p, const char* what) {
    double sum = 0.0;
    for (double x : p) {
        if (!(x >= 0.0)) throw InvalidInput(std::string(what) + ": negative probability");
        sum += x;
    }
    if (std::abs(sum - 1.0) > kNormTolerance)
        throw InvalidInput(std::string(what) + ": vector sums to " + std::to_string(sum));
}

}  // namespace

double tv_distance(std::span<const double> p, std::span<const double> q) {
    require_same_length(p, q, "tv_distance");
    require_normalized(p, "tv_distance");
    require_normalized(q, "tv_distance");
    double l1 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(p[i] - q[i]);
    return std::min(1.0, 0.5 * l1);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    require_same_length(p, q, "kl_divergence");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return std::max(0.0, kl);
}

double variance_under(std::span<const double> p, std::span<const double> f) {
    require_same_length(p, f, "variance_under");
    double mean = 0.0;
    double second = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        mean += p[i] * f[i];
        second += p[i] * f[i] * f[i];
    }
    return std::max(0.0, second - mean * mean);
}

BonusFunctions::BonusFunctions(Dims dims, double delta, double scale)
    : dims_(dims), delta_(delta), scale_(scale) {
    if (!(delta > 0.0 && delta < 1.0))
        throw InvalidInput("bonus functions: delta must lie in (0,1), got " + std::to_string(delta));
    if (!(scale >= 0.0)) throw InvalidInput("bonus functions: scale must be nonnegative");
    const double sa = static_cast<double>(dims.S) * dims.A;
    log_sah_ = std::log(6.0 * sa * dims.H / delta);
    log_sa_ = std::log(6.0 * sa / delta);
}

double BonusFunctions::g1(double n) const {
    return scale_ * (log_sah_ + dims_.S * std::log(8.0 * std::numbers::e * (n + 1.0)));
}

double BonusFunctions::g2(double n) const {
    return scale_ * (log_sah_ + std::log(8.0 * std::numbers::e * (n + 1.0)));
}

}  // namespace hysrl
