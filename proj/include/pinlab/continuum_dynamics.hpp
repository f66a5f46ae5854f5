#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "pinlab/continuum_field.hpp"

namespace pinlab {

class SupersolutionAssembly;

/// Periodic grid over the obstacle box base with node i at (i + 1/2) dx.
struct GridState {
    int n = 1;
    std::array<std::int64_t, 2> points{1, 1};
    BasePoint spacing{1.0, 1.0};
    std::vector<double> u;
    double t = 0.0;
    double dt = 0.0;
    std::int64_t steps = 0;

    std::size_t size() const { return u.size(); }
    BasePoint position(std::size_t node) const;
};

/// Grid with the given node counts per axis and u = 0.
GridState make_grid(const ObstacleBox& box, std::array<std::int64_t, 2> points);

/// Obstacles touching each grid column, with the base factors folded into
/// the strength, so that f(x_node, y) is a short sum over y offsets.
class ForceCache {
public:
    ForceCache(const ForceField& field, const GridState& grid);

    double eval(std::size_t node, double y) const;
    /// sup over nodes of a bound on |df/dy| for heights in [y_lo, y_hi].
    double lipschitz_y(double y_lo, double y_hi) const;

private:
    struct Entry {
        double y;
        double weight;
    };
    BumpShape shape_;
    std::vector<std::vector<Entry>> columns_;  // sorted by y
};

/// Largest step keeping forward Euler monotone: 1 / (sum_k 2/dx_k^2 + L).
double stable_dt(const GridState& grid, double lipschitz_y);

/// u <- u + dt (Laplacian u - f(x, u) + F). Throws NumericalBlowup on a
/// non-finite value and PreconditionViolation if dt breaks the diffusion bound.
void step(GridState& state, const ForceCache& forces, double F);

/// Time stepper that keeps dt monotone for the heights actually reached.
class ContinuumSolver {
public:
    ContinuumSolver(const ForceField& field, double F, GridState initial, double horizon);

    /// One step of at most max_dt (the horizon end is met exactly this way).
    void step(double max_dt = 1e300);
    const GridState& state() const { return state_; }
    const ForceCache& forces() const { return cache_; }
    double lipschitz() const { return lipschitz_; }

private:
    void refresh_dt();

    double F_;
    double horizon_;
    GridState state_;
    ForceCache cache_;
    double r1_;
    double band_lo_ = 0.0, band_hi_ = 0.0;
    double lipschitz_ = 0.0;
};

struct ContainmentOptions {
    double horizon = 100.0;
    double c = 1.0;             // tolerance c dx^2 on sup(u - v)
    int samples = 200;          // trajectory rows
};

struct ContainmentSample {
    double t = 0.0;
    double max_u = 0.0;
    double mean_u = 0.0;
    double sup_gap = 0.0;       // max over nodes of u - v
};

struct ContainmentReport {
    bool pass = false;          // sup(u - v) <= c dx^2 for all steps
    double sup_gap = -1e300;
    double tolerance = 0.0;
    std::optional<double> first_crossing;   // first time u > v somewhere
    std::optional<double> first_violation;  // first time u - v > tolerance
    bool plateau = false;       // max u grew by at most max(1%, 1e-3) over the last half
    double late_growth = 0.0;
    double final_max_u = 0.0;
    std::int64_t steps = 0;
    double dt_min = 0.0, dt_max = 0.0;
    std::vector<ContainmentSample> series;

    nlohmann::json to_json() const;
};

ContainmentReport containment_run(const ForceField& field, double F,
                                  const std::function<double(const BasePoint&)>& barrier, GridState initial,
                                  const ContainmentOptions& options = {});

ContainmentReport containment_run(const ForceField& field, double F, const SupersolutionAssembly& barrier,
                                  GridState initial, const ContainmentOptions& options = {});

}  // namespace pinlab
