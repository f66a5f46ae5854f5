#pragma once

namespace pinlab {

/// Hurwitz zeta sum_{k>=0} (k + a)^(-s) for real s > 1 and a > 0, accurate to
/// roughly 1e-14 relative (Euler-Maclaurin with a shifted head).
double hurwitz_zeta(double s, double a);

/// Riemann zeta for s > 1.
inline double riemann_zeta(double s) { return hurwitz_zeta(s, 1.0); }

}  // namespace pinlab
