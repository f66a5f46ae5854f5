#include <cmath>
#include <limits>

#include "pinlab/error.hpp"
#include "pinlab/supersolution.hpp"

namespace pinlab {

namespace {

double ratio_pow(double r, double r_in, double e) {
    if (r <= 0.0) return e == 0.0 ? 1.0 : 0.0;
    return std::pow(r / r_in, e);
}

}  // namespace

InnerProfile inner_profile(int n, double m, double r_in, double F_in) {
    if (n < 1) throw PreconditionViolation("inner_profile: n must be >= 1");
    if (!(m >= 0.0) || !(r_in > 0.0) || !(F_in > 0.0))
        throw PreconditionViolation("inner_profile: need m >= 0, r_in > 0, F_in > 0");
    return {n, m, r_in, F_in};
}

double InnerProfile::value(double r) const {
    // (m+n)(m+2) is formed as a product of the factors to keep huge m finite
    const double scale = F_in * r_in / (m + n) * (r_in / (m + 2.0));
    return scale * (ratio_pow(r, r_in, m + 2.0) - 1.0);
}

double InnerProfile::d1(double r) const { return F_in * r_in / (m + n) * ratio_pow(r, r_in, m + 1.0); }

double InnerProfile::d2(double r) const { return F_in * ((m + 1.0) / (m + n)) * ratio_pow(r, r_in, m); }

double InnerProfile::radial_laplacian(double r) const {
    if (r <= 0.0) return n == 1 ? d2(0.0) : F_in * ratio_pow(0.0, r_in, m);
    return d2(r) + (n - 1.0) / r * d1(r);
}

double InnerProfile::at_zero() const { return -F_in * r_in / (m + n) * (r_in / (m + 2.0)); }

double InnerProfile::slope_at_rin() const { return F_in * r_in / (m + n); }

OuterProfile outer_slope(int n, double r_in, double r_out, double F_out) {
    if (n < 1) throw PreconditionViolation("outer_slope: n must be >= 1");
    if (!(r_in > 0.0) || !(r_out > r_in) || !(F_out >= 0.0))
        throw PreconditionViolation("outer_slope: need 0 < r_in < r_out and F_out >= 0");
    return {n, r_in, r_out, F_out};
}

double OuterProfile::d1(double r) const {
    if (n == 1) return F_out * (r_out - r);
    const double rn = std::pow(r_out, n);
    return F_out / n * (rn * std::pow(r, 1.0 - n) - r);
}

double OuterProfile::d2(double r) const {
    if (n == 1) return -F_out;
    const double rn = std::pow(r_out, n);
    return F_out / n * ((1.0 - n) * rn * std::pow(r, -static_cast<double>(n)) - 1.0);
}

double OuterProfile::radial_laplacian(double r) const { return d2(r) + (n - 1.0) / r * d1(r); }

double OuterProfile::value(double r) const {
    // antiderivative of psi' from r_in
    if (n == 1) return F_out * (r - r_in) * (r_out - 0.5 * (r + r_in));
    const double quad = 0.5 * (r - r_in) * (r + r_in);
    if (n == 2) return 0.5 * F_out * (r_out * r_out * std::log1p((r - r_in) / r_in) - quad);
    const double rn = std::pow(r_out, n);
    const double e = 2.0 - n;
    return F_out / n * (rn * (std::pow(r, e) - std::pow(r_in, e)) / e - quad);
}

LocalProfile make_local_profile(int n, double m, double r_in, double r_out, double F_in, double F_out) {
    return {inner_profile(n, m, r_in, F_in), outer_slope(n, r_in, r_out, F_out)};
}

double LocalProfile::value(double r) const {
    if (r < inner.r_in) return inner.value(r);
    if (r <= outer.r_out) return outer.value(r);
    return std::numeric_limits<double>::infinity();
}

double LocalProfile::d1(double r) const {
    if (r < inner.r_in) return inner.d1(r);
    if (r <= outer.r_out) return outer.d1(r);
    return 0.0;
}

double LocalProfile::d2(double r) const {
    if (r < inner.r_in) return inner.d2(r);
    if (r <= outer.r_out) return outer.d2(r);
    return 0.0;
}

double LocalProfile::laplacian(double r) const {
    if (r < inner.r_in) return inner.F_in * ratio_pow(r, inner.r_in, inner.m);
    if (r <= outer.r_out) return -outer.F_out;
    return 0.0;
}

nlohmann::json LocalProfile::to_json() const {
    return {{"n", inner.n},        {"m", inner.m},         {"r_in", inner.r_in},
            {"r_out", outer.r_out}, {"F_in", inner.F_in},  {"F_out", outer.F_out}};
}

KinkReport kink_condition(const LocalProfile& p) {
    KinkReport k;
    const int n = p.n();
    k.lhs = p.inner.F_in / (p.inner.m + n);
    k.rhs = p.outer.F_out / n * (std::pow(p.outer.r_out / p.inner.r_in, n) - 1.0);
    k.margin_force = k.lhs - k.rhs;
    k.margin_slope = p.inner.slope_at_rin() - p.outer.d1(p.inner.r_in);
    k.satisfied = k.margin_force >= 0.0;
    return k;
}

}  // namespace pinlab
