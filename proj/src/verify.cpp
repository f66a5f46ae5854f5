#include <algorithm>
#include <cmath>
#include <limits>

#include "pinlab/supersolution.hpp"

namespace pinlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Sample {
    BasePoint off{0.0, 0.0};
};

double wrap_period(double diff, double period) { return diff - period * std::round(diff / period); }

class Verifier {
public:
    Verifier(const SupersolutionAssembly& a, const ForceField& f, const VerifyOptions& o)
        : asm_(a), field_(f), opt_(o), prof_(a.profile()) {
        report_.F = opt_.F_override >= 0.0 ? opt_.F_override : a.params().F;
        fine_ = a.params().r0 / opt_.fine_per_r0;
    }

    VerifyReport run() {
        const auto& anchors = asm_.anchors();
        for (std::size_t c = 0; c < anchors.size(); ++c) {
            check_radial_kink(c);
            if (asm_.n() == 1) cell_1d(c);
            else cell_2d(c);
        }
        report_.pass = report_.failure_count == 0 && report_.fd_mismatches == 0 && report_.kinks_pass && report_.checked > 0;
        if (report_.checked == 0) report_.note = "no grid point was checked";
        return std::move(report_);
    }

private:
    // Region of cell c in offsets from its anchor, per axis.
    std::pair<double, double> cell_range(std::size_t c, int k) const {
        const double pitch = asm_.lift().pitch();
        const double P = asm_.period()[k];
        const double t = wrap_period(asm_.anchors()[c].x[k] - asm_.lift().centre(c)[k], P);
        return {-0.5 * pitch - t, 0.5 * pitch - t};
    }

    double step_for(double r) const {
        return std::max(fine_, std::min(r, asm_.params().d) / 64.0);
    }

    void check_point(std::size_t c, const BasePoint& off) {
        const RelPoint p{c, off};
        const auto e0 = asm_.eval(p);
        const double delta = step_for(e0.radius);
        const int n = asm_.n();
        double lap1 = 0.0, lap2 = 0.0, vmax = std::abs(e0.value);
        for (int k = 0; k < n; ++k) {
            double vals[4];
            const double shifts[4] = {-2.0 * delta, -delta, delta, 2.0 * delta};
            for (int s = 0; s < 4; ++s) {
                RelPoint q = p;
                q.off[k] += shifts[s];
                const auto e = asm_.eval(q);
                if (e.argmin != e0.argmin || e.zone != e0.zone || e.lift_piece != e0.lift_piece) {
                    ++report_.excluded;
                    return;
                }
                vals[s] = e.value;
                vmax = std::max(vmax, std::abs(e.value));
            }
            lap1 += (vals[2] - 2.0 * e0.value + vals[1]) / (delta * delta);
            lap2 += (vals[3] - 2.0 * e0.value + vals[0]) / (4.0 * delta * delta);
        }
        const Anchor& a = asm_.anchors()[c];
        const double f = field_.eval_relative(a.x, a.y, off, e0.value);
        // the lift is only C2 across blend edges, so the Richardson factor 1/3 is too optimistic
        const double truncation = std::abs(lap1 - lap2);
        const double roundoff = 16.0 * kEps * vmax * 4.0 * n / (delta * delta);
        double lap = lap1;
        double tol = opt_.tolerance + truncation + roundoff;
        if (roundoff <= opt_.tolerance) {
            ++report_.fd_points;
            const double mismatch = std::abs(lap1 - e0.laplacian) - tol;
            report_.worst_fd_mismatch = std::max(report_.worst_fd_mismatch, mismatch);
            if (mismatch > 0.0) ++report_.fd_mismatches;
        } else {
            ++report_.closed_form_points;
            lap = e0.laplacian;
            tol = opt_.tolerance + 64.0 * kEps * (std::abs(lap) + std::abs(f) + std::abs(report_.F));
        }
        const double residual = lap - f + report_.F;
        ++report_.checked;
        report_.max_tolerance = std::max(report_.max_tolerance, tol);
        report_.worst_residual = std::max(report_.worst_residual, residual);
        if (residual - tol > report_.worst_excess) {
            report_.worst_excess = residual - tol;
            report_.worst = PointFailure{c, off, residual, tol};
        }
        if (residual > tol) {
            ++report_.failure_count;
            if (report_.failures.size() < 16) report_.failures.push_back({c, off, residual, tol});
        }
    }

    // Slope of the local profile of anchor b at offset off (relative to cell c) along dir.
    double directional(std::size_t c, std::size_t b, const BasePoint& off, const BasePoint& dir) const {
        const BasePoint ob = asm_.anchor_offset(c, b);
        const double dx = off[0] - ob[0];
        const double dy = asm_.n() == 2 ? off[1] - ob[1] : 0.0;
        const double r = std::hypot(dx, dy);
        if (r == 0.0) return 0.0;
        return prof_.d1(r) * (dx * dir[0] + dy * dir[1]) / r;
    }

    double local_value(std::size_t c, std::size_t b, const BasePoint& off) const {
        const BasePoint ob = asm_.anchor_offset(c, b);
        const double r = std::hypot(off[0] - ob[0], asm_.n() == 2 ? off[1] - ob[1] : 0.0);
        return prof_.value(r);
    }

    // The min of two local profiles switches between p and q along dir.
    void check_switch(std::size_t c, BasePoint p, BasePoint q, std::size_t bp, std::size_t bq) {
        const BasePoint dir0{q[0] - p[0], q[1] - p[1]};
        const double len = std::hypot(dir0[0], dir0[1]);
        if (len == 0.0) return;
        const BasePoint dir{dir0[0] / len, dir0[1] / len};
        auto g = [&](const BasePoint& x) { return local_value(c, bp, x) - local_value(c, bq, x); };
        // g <= 0 at p (bp is the min there), g >= 0 at q
        if (!(g(p) <= 0.0 && g(q) >= 0.0)) return;
        for (int it = 0; it < 200; ++it) {
            const BasePoint mid{0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])};
            if (mid == p || mid == q) break;
            if (g(mid) <= 0.0) p = mid;
            else q = mid;
        }
        const BasePoint x{0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])};
        const double left = directional(c, bp, x, dir);
        const double right = directional(c, bq, x, dir);
        const double jump = left - right;
        const double scale = std::max(std::abs(left), std::abs(right));
        ++report_.kink_checks;
        report_.worst_kink_jump = std::min(report_.worst_kink_jump, jump);
        if (jump < -1e-9 * scale - 1e-12) report_.kinks_pass = false;
    }

    void check_radial_kink(std::size_t) {
        const KinkReport k = kink_condition(prof_);
        ++report_.kink_checks;
        report_.worst_kink_jump = std::min(report_.worst_kink_jump, k.margin_slope);
        if (!(k.margin_slope >= 0.0)) report_.kinks_pass = false;
    }

    void scan_line(std::size_t c, const std::vector<BasePoint>& line) {
        std::size_t prev_arg = 0;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const auto e = asm_.eval({c, line[i]});
            if (i > 0 && e.argmin != prev_arg) check_switch(c, line[i - 1], line[i], prev_arg, e.argmin);
            prev_arg = e.argmin;
        }
    }

    void cell_1d(std::size_t c) {
        const auto [lo, hi] = cell_range(c, 0);
        std::vector<double> xs;
        for (double x = -2.0 * asm_.params().r1; x <= 2.0 * asm_.params().r1; x += fine_) xs.push_back(x);
        const double reach = std::max(std::abs(lo), std::abs(hi));
        for (int k = 0;; ++k) {
            const double r = 2.0 * asm_.params().r1 * std::exp2(static_cast<double>(k) / opt_.geometric_per_octave);
            if (r > reach) break;
            xs.push_back(r);
            xs.push_back(-r);
        }
        for (int i = 0; i < opt_.coarse_points; ++i) xs.push_back(lo + (hi - lo) * (i + 0.5) / opt_.coarse_points);
        xs.erase(std::remove_if(xs.begin(), xs.end(), [&](double x) { return x < lo || x > hi; }), xs.end());
        std::sort(xs.begin(), xs.end());
        std::vector<BasePoint> line;
        line.reserve(xs.size());
        for (double x : xs) {
            check_point(c, {x, 0.0});
            line.push_back({x, 0.0});
        }
        scan_line(c, line);
    }

    void cell_2d(std::size_t c) {
        const auto [lx, hx] = cell_range(c, 0);
        const auto [ly, hy] = cell_range(c, 1);
        auto inside = [&](const BasePoint& p) { return p[0] >= lx && p[0] <= hx && p[1] >= ly && p[1] <= hy; };
        const double r1 = asm_.params().r1;
        for (double x = -2.0 * r1; x <= 2.0 * r1; x += fine_)
            for (double y = -2.0 * r1; y <= 2.0 * r1; y += fine_)
                if (inside({x, y})) check_point(c, {x, y});
        const double reach = std::max({std::abs(lx), std::abs(hx), std::abs(ly), std::abs(hy)}) * std::sqrt(2.0);
        constexpr int kAngles = 24;
        for (int k = 0;; ++k) {
            const double r = 2.0 * r1 * std::exp2(static_cast<double>(k) / opt_.geometric_per_octave);
            if (r > reach) break;
            for (int t = 0; t < kAngles; ++t) {
                const double th = 2.0 * M_PI * (t + 0.5 * (k % 2)) / kAngles;
                const BasePoint p{r * std::cos(th), r * std::sin(th)};
                if (inside(p)) check_point(c, p);
            }
        }
        const int side = std::max(2, static_cast<int>(std::sqrt(static_cast<double>(opt_.coarse_points))));
        std::vector<std::vector<BasePoint>> rows(side), cols(side);
        for (int i = 0; i < side; ++i) {
            for (int k = 0; k < side; ++k) {
                const BasePoint p{lx + (hx - lx) * (i + 0.5) / side, ly + (hy - ly) * (k + 0.5) / side};
                check_point(c, p);
                rows[k].push_back(p);
                cols[i].push_back(p);
            }
        }
        for (const auto& r : rows) scan_line(c, r);
        for (const auto& col : cols) scan_line(c, col);
    }

    const SupersolutionAssembly& asm_;
    const ForceField& field_;
    VerifyOptions opt_;
    LocalProfile prof_;
    double fine_ = 0.0;
    VerifyReport report_;
};

}  // namespace

VerifyReport verify_supersolution(const SupersolutionAssembly& assembly, const ForceField& field,
                                  const VerifyOptions& options) {
    return Verifier(assembly, field, options).run();
}

nlohmann::json VerifyReport::to_json() const {
    nlohmann::json j;
    j["pass"] = pass;
    j["F"] = F;
    j["checked"] = checked;
    j["excluded"] = excluded;
    j["worst_residual"] = worst_residual;
    j["worst_excess"] = worst_excess;
    j["max_tolerance"] = max_tolerance;
    j["failure_count"] = failure_count;
    auto point = [](const PointFailure& p) {
        return nlohmann::json{{"cell", p.cell}, {"off", {p.off[0], p.off[1]}}, {"residual", p.residual},
                              {"tolerance", p.tolerance}};
    };
    j["worst"] = worst ? point(*worst) : nlohmann::json(nullptr);
    auto& fs = j["failures"] = nlohmann::json::array();
    for (const auto& f : failures) fs.push_back(point(f));
    j["fd_points"] = fd_points;
    j["closed_form_points"] = closed_form_points;
    j["fd_mismatches"] = fd_mismatches;
    j["worst_fd_mismatch"] = worst_fd_mismatch;
    j["kink_checks"] = kink_checks;
    j["kinks_pass"] = kinks_pass;
    j["worst_kink_jump"] = worst_kink_jump;
    j["note"] = note;
    return j;
}

}  // namespace pinlab
