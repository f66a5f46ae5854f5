#include "pinlab/discrete_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pinlab/error.hpp"

namespace pinlab {

LatticeField LatticeField::sampled(EnvironmentSeed seed, StrengthDistribution dist) {
    if (!dist.is_discrete())
        throw InvalidDistribution("LatticeField: " + dist.describe() + " is not N0-valued");
    return LatticeField([seed, dist = std::move(dist)](std::int64_t i, std::int64_t j) {
        return sample_site_strength(seed, i, j, dist);
    });
}

LatticeField LatticeField::constant(std::int64_t c) {
    return LatticeField([c](std::int64_t, std::int64_t) { return c; });
}

LatticeField LatticeField::custom(Fn fn) { return LatticeField(std::move(fn)); }

RateFunction::RateFunction(Kind kind, double param) : kind_(kind), param_(param) {
    if (!(param > 0.0) || !std::isfinite(param)) throw InvalidRateFunction("rate function parameter must be > 0");
    if ((*this)(0) != 0.0) throw InvalidRateFunction("rate function must vanish at 0");
    const double b = bound();
    for (std::int64_t k = -50; k <= 50; ++k) {
        const double v = (*this)(k);
        if (std::abs(v) > b) throw InvalidRateFunction("rate function exceeds its bound");
        if (k > -50 && !(v > (*this)(k - 1)))
            throw InvalidRateFunction("rate function is not strictly increasing on [-50, 50]");
    }
}

RateFunction RateFunction::saturating(double scale) { return {Kind::saturating, scale}; }

RateFunction RateFunction::tanh_scaled(double beta) { return {Kind::tanh_scaled, beta}; }

double RateFunction::operator()(std::int64_t k) const {
    if (k == 0) return 0.0;
    switch (kind_) {
        case Kind::saturating: {
            const double mag = -std::expm1(-static_cast<double>(std::abs(k)) * std::log(2.0));
            return k > 0 ? param_ * mag : -param_ * mag;
        }
        case Kind::tanh_scaled: return std::tanh(param_ * static_cast<double>(k));
    }
    return 0.0;
}

double RateFunction::bound() const { return kind_ == Kind::saturating ? param_ : 1.0; }

InterfaceState InterfaceState::flat(std::size_t width) {
    if (width == 0) throw PreconditionViolation("interface window must be non-empty");
    InterfaceState s;
    s.heights.assign(width, 0);
    return s;
}

std::int64_t discrete_laplacian(std::span<const std::int64_t> u, std::size_t i) {
    const std::size_t w = u.size();
    const std::size_t left = i == 0 ? w - 1 : i - 1;
    const std::size_t right = i + 1 == w ? 0 : i + 1;
    return u[right] + u[left] - 2 * u[i];
}

double jump_rate(std::span<const std::int64_t> u, std::size_t i, const LatticeField& field,
                 const RateFunction& rate, DrivingForce F) {
    const auto site = static_cast<std::int64_t>(i);
    return rate(discrete_laplacian(u, i) - field(site, u[i]) + F.F);
}

namespace {

std::size_t pick_weighted(std::span<const double> rates, double target) {
    std::size_t last_nonzero = rates.size();
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double w = std::abs(rates[i]);
        if (w == 0.0) continue;
        last_nonzero = i;
        if (target < w) return i;
        target -= w;
    }
    return last_nonzero;  // rounding overshoot
}

}  // namespace

StepResult kmc_step(InterfaceState& state, const LatticeField& field, const RateFunction& rate,
                    DrivingForce F, std::uint64_t seed) {
    std::vector<double> rates(state.width());
    double total = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        rates[i] = jump_rate(state.heights, i, field, rate, F);
        total += std::abs(rates[i]);
    }
    if (total == 0.0) return {true, 0, 0};

    CounterRng rng(CounterKey({seed, Stream::dynamics}).with(state.event_count));
    const double dt = rng.exponential() / total;
    const std::size_t site = pick_weighted(rates, rng.uniform() * total);
    const int dir = rates[site] > 0.0 ? 1 : -1;
    state.heights[site] += dir;
    state.time += dt;
    ++state.event_count;
    return {false, site, dir};
}

InterfaceDynamics::InterfaceDynamics(InterfaceState state, LatticeField field, RateFunction rate,
                                     DrivingForce F, std::uint64_t seed)
    : state_(std::move(state)), field_(std::move(field)), rate_(rate), force_(F), seed_(seed) {
    if (state_.width() == 0) throw PreconditionViolation("interface window must be non-empty");
    rates_.resize(state_.width());
    block_sums_.assign((state_.width() + kBlock - 1) / kBlock, 0.0);
    for (std::size_t i = 0; i < rates_.size(); ++i) rates_[i] = site_rate(i);
    refresh_totals();
}

double InterfaceDynamics::site_rate(std::size_t i) const {
    return jump_rate(state_.heights, i, field_, rate_, force_);
}

void InterfaceDynamics::refresh_totals() {
    total_ = 0.0;
    for (std::size_t b = 0; b < block_sums_.size(); ++b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(lo + kBlock, rates_.size());
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += std::abs(rates_[i]);
        block_sums_[b] = s;
        total_ += s;
    }
}

void InterfaceDynamics::update_site(std::size_t i) {
    const double fresh = site_rate(i);
    const double delta = std::abs(fresh) - std::abs(rates_[i]);
    rates_[i] = fresh;
    block_sums_[i / kBlock] += delta;
    total_ += delta;
}

std::vector<double> InterfaceDynamics::recompute_rates() const {
    std::vector<double> out(rates_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = site_rate(i);
    return out;
}

StepResult InterfaceDynamics::step() {
    if (total_ <= 0.0) {
        refresh_totals();
        if (total_ <= 0.0) return {true, 0, 0};
    }
    CounterRng rng(CounterKey({seed_, Stream::dynamics}).with(state_.event_count));
    const double dt = rng.exponential() / total_;
    double target = rng.uniform() * total_;

    std::size_t block = block_sums_.size() - 1;
    for (std::size_t b = 0; b < block_sums_.size(); ++b) {
        if (block_sums_[b] <= 0.0) continue;
        block = b;
        if (target < block_sums_[b]) break;
        target -= block_sums_[b];
    }
    const std::size_t lo = block * kBlock;
    const std::size_t hi = std::min(lo + kBlock, rates_.size());
    const std::size_t site = lo + pick_weighted(std::span<const double>(rates_).subspan(lo, hi - lo), target);
    if (site >= hi || rates_[site] == 0.0) {
        // drifted partial sums pointed at an empty block
        refresh_totals();
        return step();
    }

    const int dir = rates_[site] > 0.0 ? 1 : -1;
    state_.heights[site] += dir;
    state_.time += dt;
    ++state_.event_count;

    const std::size_t w = rates_.size();
    update_site(site);
    update_site(site == 0 ? w - 1 : site - 1);
    update_site(site + 1 == w ? 0 : site + 1);
    if (state_.event_count % kRefreshPeriod == 0) refresh_totals();
    return {false, site, dir};
}

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::max_time: return "max_time";
        case StopReason::max_events: return "max_events";
        case StopReason::height_cap: return "height_cap";
        case StopReason::barrier_violation: return "violation";
        case StopReason::frozen: return "frozen";
    }
    return "unknown";
}

namespace {

TrajectorySample sample_of(const InterfaceState& s) {
    TrajectorySample out;
    out.time = s.time;
    out.events = s.event_count;
    out.max_height = *std::max_element(s.heights.begin(), s.heights.end());
    out.mean_height = static_cast<double>(std::accumulate(s.heights.begin(), s.heights.end(), std::int64_t{0})) /
                      static_cast<double>(s.heights.size());
    return out;
}

}  // namespace

TrajectorySummary run_until(InterfaceState state, const LatticeField& field, const RateFunction& rate,
                            DrivingForce F, std::uint64_t seed, const StopCondition& stop) {
    if (!stop.max_time && !stop.max_events && !stop.height_cap)
        throw PreconditionViolation("run_until: need max_time, max_events or height_cap");
    if (stop.barrier && stop.barrier->size() != state.width())
        throw PreconditionViolation("run_until: barrier width differs from the window");
    if (stop.sample_every <= 0) throw PreconditionViolation("run_until: sample_every must be positive");

    TrajectorySummary out;
    if (stop.barrier) {
        for (std::size_t i = 0; i < state.width(); ++i) {
            if (state.heights[i] > (*stop.barrier)[i]) {
                out.violation = BarrierViolation{i, state.time, state.event_count};
                out.reason = StopReason::barrier_violation;
                out.final_state = std::move(state);
                out.samples.push_back(sample_of(out.final_state));
                return out;
            }
        }
    }

    InterfaceDynamics sim(std::move(state), field, rate, F, seed);
    out.samples.push_back(sample_of(sim.state()));
    StopReason reason = StopReason::max_events;
    for (;;) {
        const auto& s = sim.state();
        if (stop.max_events && s.event_count >= *stop.max_events) {
            reason = StopReason::max_events;
            break;
        }
        const StepResult r = sim.step();
        if (r.frozen) {
            reason = StopReason::frozen;
            break;
        }
        if (stop.max_time && sim.state().time > *stop.max_time) {
            reason = StopReason::max_time;
            break;
        }
        const std::int64_t h = sim.state().heights[r.site];
        if (stop.barrier && h > (*stop.barrier)[r.site]) {
            out.violation = BarrierViolation{r.site, sim.state().time, sim.state().event_count};
            reason = StopReason::barrier_violation;
            break;
        }
        if (stop.height_cap && h >= *stop.height_cap) {
            reason = StopReason::height_cap;
            break;
        }
        if (sim.state().event_count % stop.sample_every == 0) out.samples.push_back(sample_of(sim.state()));
    }
    out.reason = reason;
    out.final_state = sim.state();
    if (out.samples.back().events != out.final_state.event_count) out.samples.push_back(sample_of(out.final_state));
    return out;
}

}  // namespace pinlab
