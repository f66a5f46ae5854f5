#include "pinlab/continuum_dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "pinlab/error.hpp"
#include "pinlab/supersolution.hpp"

namespace pinlab {

BasePoint GridState::position(std::size_t node) const {
    BasePoint x{0.0, 0.0};
    if (n == 1) {
        x[0] = (static_cast<double>(node) + 0.5) * spacing[0];
    } else {
        const auto ny = static_cast<std::size_t>(points[1]);
        x[0] = (static_cast<double>(node / ny) + 0.5) * spacing[0];
        x[1] = (static_cast<double>(node % ny) + 0.5) * spacing[1];
    }
    return x;
}

GridState make_grid(const ObstacleBox& box, std::array<std::int64_t, 2> points) {
    if (box.n != 1 && box.n != 2) throw PreconditionViolation("make_grid: n must be 1 or 2");
    GridState g;
    g.n = box.n;
    if (g.n == 1) points[1] = 1;
    std::size_t total = 1;
    for (int k = 0; k < g.n; ++k) {
        if (points[k] < 3) throw PreconditionViolation("make_grid: need at least 3 nodes per axis");
        g.points[k] = points[k];
        g.spacing[k] = box.period[k] / static_cast<double>(points[k]);
        total *= static_cast<std::size_t>(points[k]);
    }
    g.u.assign(total, 0.0);
    return g;
}

ForceCache::ForceCache(const ForceField& field, const GridState& grid)
    : shape_(field.shape()), columns_(grid.size()) {
    const double reach = shape_.outer();
    const int n = grid.n;
    for (const Obstacle& o : field.obstacles().obstacles) {
        // node index ranges per axis whose centres fall within the base support
        std::array<std::vector<std::pair<std::int64_t, double>>, 2> axis;
        for (int k = 0; k < 2; ++k) {
            if (k >= n) {
                axis[k].push_back({0, 1.0});
                continue;
            }
            const double dx = grid.spacing[k];
            const std::int64_t N = grid.points[k];
            const auto lo = static_cast<std::int64_t>(std::ceil((o.x[k] - reach) / dx - 0.5));
            const auto hi = static_cast<std::int64_t>(std::floor((o.x[k] + reach) / dx - 0.5));
            for (std::int64_t i = lo; i <= hi && i - lo < N; ++i) {
                const double b = shape_.factor((static_cast<double>(i) + 0.5) * dx - o.x[k]);
                if (b > 0.0) axis[k].push_back({((i % N) + N) % N, b});
            }
        }
        for (const auto& [i, bi] : axis[0])
            for (const auto& [j, bj] : axis[1]) {
                const auto node = static_cast<std::size_t>(n == 1 ? i : i * grid.points[1] + j);
                columns_[node].push_back({o.y, o.strength * bi * bj});
            }
    }
    for (auto& c : columns_) std::sort(c.begin(), c.end(), [](const Entry& a, const Entry& b) { return a.y < b.y; });
}

double ForceCache::eval(std::size_t node, double y) const {
    const auto& c = columns_[node];
    const double reach = shape_.outer();
    auto it = std::lower_bound(c.begin(), c.end(), y - reach, [](const Entry& e, double v) { return e.y < v; });
    double total = 0.0;
    for (; it != c.end() && it->y < y + reach; ++it) total += it->weight * shape_.factor(y - it->y);
    return total;
}

double ForceCache::lipschitz_y(double y_lo, double y_hi) const {
    const double reach = shape_.outer();
    // smoothstep slope peaks at 15/8 in its own variable
    const double slope = 15.0 / 8.0 / (reach - shape_.r0());
    double worst = 0.0;
    for (const auto& c : columns_) {
        // heaviest window of width 2 reach among entries that can touch the band
        auto first = std::lower_bound(c.begin(), c.end(), y_lo - reach, [](const Entry& e, double v) { return e.y < v; });
        auto last = std::upper_bound(first, c.end(), y_hi + reach, [](double v, const Entry& e) { return v < e.y; });
        double s = 0.0;
        for (auto lo = first, hi = first; hi != last; ++hi) {
            s += hi->weight;
            while (hi->y - lo->y >= 2.0 * reach) s -= (lo++)->weight;
            worst = std::max(worst, s * slope);
        }
    }
    return worst;
}

double stable_dt(const GridState& grid, double lipschitz_y) {
    double denom = lipschitz_y;
    for (int k = 0; k < grid.n; ++k) denom += 2.0 / (grid.spacing[k] * grid.spacing[k]);
    return 1.0 / denom;
}

void step(GridState& s, const ForceCache& forces, double F) {
    double diffusion = 0.0;
    for (int k = 0; k < s.n; ++k) diffusion += 2.0 / (s.spacing[k] * s.spacing[k]);
    if (!(s.dt > 0.0) || s.dt * diffusion > 1.0 + 1e-12)
        throw PreconditionViolation("step: dt violates the explicit stability bound");
    const std::vector<double>& u = s.u;
    std::vector<double> next(u.size());
    const double ix2 = 1.0 / (s.spacing[0] * s.spacing[0]);
    if (s.n == 1) {
        const std::size_t N = u.size();
        for (std::size_t i = 0; i < N; ++i) {
            const double left = u[i == 0 ? N - 1 : i - 1];
            const double right = u[i + 1 == N ? 0 : i + 1];
            const double lap = (left - 2.0 * u[i] + right) * ix2;
            next[i] = u[i] + s.dt * (lap - forces.eval(i, u[i]) + F);
        }
    } else {
        const auto nx = static_cast<std::size_t>(s.points[0]);
        const auto ny = static_cast<std::size_t>(s.points[1]);
        const double iy2 = 1.0 / (s.spacing[1] * s.spacing[1]);
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t im = (i + nx - 1) % nx, ip = (i + 1) % nx;
            for (std::size_t j = 0; j < ny; ++j) {
                const std::size_t jm = (j + ny - 1) % ny, jp = (j + 1) % ny;
                const std::size_t c = i * ny + j;
                const double lap = (u[im * ny + j] - 2.0 * u[c] + u[ip * ny + j]) * ix2 +
                                   (u[i * ny + jm] - 2.0 * u[c] + u[i * ny + jp]) * iy2;
                next[c] = u[c] + s.dt * (lap - forces.eval(c, u[c]) + F);
            }
        }
    }
    for (double v : next)
        if (!std::isfinite(v)) throw NumericalBlowup("step: non-finite height");
    s.u = std::move(next);
    s.t += s.dt;
    ++s.steps;
}

ContinuumSolver::ContinuumSolver(const ForceField& field, double F, GridState initial, double horizon)
    : F_(F), horizon_(horizon), state_(std::move(initial)), cache_(field, state_), r1_(field.shape().r1()) {
    if (!(horizon > 0.0)) throw PreconditionViolation("ContinuumSolver: horizon must be positive");
    const auto [lo, hi] = std::minmax_element(state_.u.begin(), state_.u.end());
    // f >= 0, so heights never exceed the force-free solution max u0 + F t
    band_lo_ = *lo - r1_;
    band_hi_ = *hi + std::max(F, 0.0) * horizon + r1_;
    refresh_dt();
}

void ContinuumSolver::refresh_dt() {
    lipschitz_ = cache_.lipschitz_y(band_lo_, band_hi_);
    state_.dt = std::min(stable_dt(state_, lipschitz_), horizon_ / 100.0);
}

void ContinuumSolver::step(double max_dt) {
    const double dt = state_.dt;
    state_.dt = std::min(dt, max_dt);
    pinlab::step(state_, cache_, F_);
    state_.dt = dt;
    const auto [lo, hi] = std::minmax_element(state_.u.begin(), state_.u.end());
    if (*lo < band_lo_ || *hi > band_hi_) {
        const double span = band_hi_ - band_lo_;
        band_lo_ = std::min(band_lo_, *lo - span);
        band_hi_ = std::max(band_hi_, *hi + span);
        refresh_dt();
    }
}

ContainmentReport containment_run(const ForceField& field, double F,
                                  const std::function<double(const BasePoint&)>& barrier, GridState initial,
                                  const ContainmentOptions& options) {
    if (!(options.horizon > 0.0) || options.samples < 2)
        throw PreconditionViolation("containment_run: need a positive horizon and at least 2 samples");
    ContainmentReport r;
    double dx2 = 0.0;
    for (int k = 0; k < initial.n; ++k) dx2 = std::max(dx2, initial.spacing[k] * initial.spacing[k]);
    r.tolerance = options.c * dx2;

    std::vector<double> v(initial.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = barrier(initial.position(i));

    ContinuumSolver solver(field, F, std::move(initial), options.horizon);
    r.dt_min = r.dt_max = solver.state().dt;

    auto observe = [&](bool record) {
        const auto& s = solver.state();
        double gap = -1e300, top = -1e300, sum = 0.0;
        for (std::size_t i = 0; i < s.u.size(); ++i) {
            gap = std::max(gap, s.u[i] - v[i]);
            top = std::max(top, s.u[i]);
            sum += s.u[i];
        }
        r.sup_gap = std::max(r.sup_gap, gap);
        if (gap > 0.0 && !r.first_crossing) r.first_crossing = s.t;
        if (gap > r.tolerance && !r.first_violation) r.first_violation = s.t;
        if (record) r.series.push_back({s.t, top, sum / static_cast<double>(s.u.size()), gap});
        return top;
    };

    observe(true);
    int next_sample = 1;
    while (solver.state().t < options.horizon) {
        solver.step(options.horizon - solver.state().t);
        const GridState& s = solver.state();
        r.dt_min = std::min(r.dt_min, s.dt);
        r.dt_max = std::max(r.dt_max, s.dt);
        const double due = options.horizon * next_sample / (options.samples - 1);
        const bool record = s.t >= due - 1e-12 * options.horizon;
        if (record) ++next_sample;
        observe(record);
    }
    r.steps = solver.state().steps;
    r.pass = r.sup_gap <= r.tolerance;

    r.final_max_u = r.series.back().max_u;
    double at_half = r.series.front().max_u;
    double late_max = -1e300;
    for (const auto& row : r.series) {
        if (row.t <= 0.5 * options.horizon) at_half = row.max_u;
        else late_max = std::max(late_max, row.max_u);
    }
    r.late_growth = late_max - at_half;
    r.plateau = r.late_growth <= std::max(0.01 * std::abs(r.final_max_u), 1e-3);
    return r;
}

ContainmentReport containment_run(const ForceField& field, double F, const SupersolutionAssembly& barrier,
                                  GridState initial, const ContainmentOptions& options) {
    return containment_run(
        field, F, [&](const BasePoint& x) { return barrier.value(x); }, std::move(initial), options);
}

nlohmann::json ContainmentReport::to_json() const {
    nlohmann::json j;
    j["pass"] = pass;
    j["sup_gap"] = sup_gap;
    j["tolerance"] = tolerance;
    j["first_crossing"] = first_crossing ? nlohmann::json(*first_crossing) : nlohmann::json(nullptr);
    j["first_violation"] = first_violation ? nlohmann::json(*first_violation) : nlohmann::json(nullptr);
    j["plateau"] = plateau;
    j["late_growth"] = late_growth;
    j["final_max_u"] = final_max_u;
    j["steps"] = steps;
    j["dt_min"] = dt_min;
    j["dt_max"] = dt_max;
    return j;
}

}  // namespace pinlab
