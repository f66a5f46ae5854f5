#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinlab/distribution.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

/// Quenched obstacle strengths f(i, j) on Z^2.
class LatticeField {
public:
    using Fn = std::function<std::int64_t(std::int64_t i, std::int64_t j)>;

    static LatticeField sampled(EnvironmentSeed seed, StrengthDistribution dist);
    static LatticeField constant(std::int64_t c);
    static LatticeField custom(Fn fn);

    std::int64_t operator()(std::int64_t i, std::int64_t j) const { return fn_(i, j); }

private:
    explicit LatticeField(Fn fn) : fn_(std::move(fn)) {}
    Fn fn_;
};

/// The jump-rate function: bounded, strictly increasing, zero at zero.
///
///   saturating(s):  k -> s * sign(k) * (1 - 2^-|k|)
///   tanh_scaled(b): k -> tanh(b k)
///
/// Construction checks the contract on the integer grid [-50, 50] and throws
/// InvalidRateFunction when it fails there (tanh with large b saturates to 1.0
/// in double precision and is rejected).
class RateFunction {
public:
    enum class Kind { saturating, tanh_scaled };

    static RateFunction saturating(double scale = 1.0);
    static RateFunction tanh_scaled(double beta);

    double operator()(std::int64_t k) const;
    double bound() const;
    Kind kind() const { return kind_; }
    double parameter() const { return param_; }

private:
    RateFunction(Kind kind, double param);
    Kind kind_;
    double param_;
};

/// Constant non-negative driving force.
struct DrivingForce {
    std::int64_t F = 0;
};

/// Periodic window [0, W) of the interface with its event clock.
struct InterfaceState {
    std::vector<std::int64_t> heights;
    double time = 0.0;
    std::int64_t event_count = 0;

    static InterfaceState flat(std::size_t width);
    std::size_t width() const { return heights.size(); }
};

/// u(i+1) + u(i-1) - 2 u(i) with periodic wrap.
std::int64_t discrete_laplacian(std::span<const std::int64_t> u, std::size_t i);

/// Lambda(lap(u)(i) - f(i, u(i)) + F).
double jump_rate(std::span<const std::int64_t> u, std::size_t i, const LatticeField& field,
                 const RateFunction& rate, DrivingForce F);

struct StepResult {
    bool frozen = false;  // total rate zero: stationary point, nothing moved
    std::size_t site = 0;
    int direction = 0;
};

/// One kinetic Monte Carlo event computed from scratch (O(W)). The random
/// draws are keyed by (seed, state.event_count), so the step is a pure
/// function of its inputs.
StepResult kmc_step(InterfaceState& state, const LatticeField& field, const RateFunction& rate,
                    DrivingForce F, std::uint64_t seed);

/// Event-driven simulator with an incrementally maintained rate cache.
///
/// Rates are stored in a flat array with per-block partial sums; a move at
/// site i refreshes only i-1, i, i+1. The cached totals are recomputed exactly
/// every 2^16 events.
class InterfaceDynamics {
public:
    InterfaceDynamics(InterfaceState state, LatticeField field, RateFunction rate, DrivingForce F,
                      std::uint64_t seed);

    StepResult step();

    const InterfaceState& state() const { return state_; }
    std::span<const double> rates() const { return rates_; }
    double total_rate() const { return total_; }
    /// Rates recomputed from scratch, for consistency checks.
    std::vector<double> recompute_rates() const;

private:
    double site_rate(std::size_t i) const;
    void update_site(std::size_t i);
    void refresh_totals();

    static constexpr std::size_t kBlock = 32;
    static constexpr std::int64_t kRefreshPeriod = std::int64_t{1} << 16;

    InterfaceState state_;
    LatticeField field_;
    RateFunction rate_;
    DrivingForce force_;
    std::uint64_t seed_;
    std::vector<double> rates_;
    std::vector<double> block_sums_;
    double total_ = 0.0;
};

struct StopCondition {
    std::optional<double> max_time;
    std::optional<std::int64_t> max_events;
    std::optional<std::int64_t> height_cap;
    std::optional<std::vector<std::int64_t>> barrier;
    std::int64_t sample_every = 1000;  // events between trajectory samples
};

enum class StopReason { max_time, max_events, height_cap, barrier_violation, frozen };

std::string to_string(StopReason reason);

struct TrajectorySample {
    double time = 0.0;
    std::int64_t max_height = 0;
    double mean_height = 0.0;
    std::int64_t events = 0;
};

struct BarrierViolation {
    std::size_t site = 0;
    double time = 0.0;
    std::int64_t event = 0;
};

struct TrajectorySummary {
    InterfaceState final_state;
    std::vector<TrajectorySample> samples;
    StopReason reason = StopReason::max_events;
    std::optional<BarrierViolation> violation;
};

/// Runs the dynamics until one of the stop conditions triggers. With a barrier
/// the run halts the first time some u(i) exceeds v(i).
TrajectorySummary run_until(InterfaceState state, const LatticeField& field, const RateFunction& rate,
                            DrivingForce F, std::uint64_t seed, const StopCondition& stop);

}  // namespace pinlab
