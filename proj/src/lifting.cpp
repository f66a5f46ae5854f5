#include <algorithm>
#include <cmath>

#include "pinlab/error.hpp"
#include "pinlab/supersolution.hpp"

namespace pinlab {

double lifting_constant(int n) {
    // calibrated maxima: n = 1 gives 20/sqrt(3) = 11.547, n = 2 gives 40/sqrt(3) = 23.094
    switch (n) {
        case 1: return 11.55;
        case 2: return 23.10;
        default: throw PreconditionViolation("lifting_constant: only n = 1, 2 are calibrated");
    }
}

LiftingFunction::LiftingFunction(std::vector<std::int64_t> extents, std::vector<double> y, double l, double d,
                                 double h)
    : extents_(std::move(extents)), y_(std::move(y)), l_(l), d_(d), h_(h) {
    if (extents_.empty() || extents_.size() > 2) throw PreconditionViolation("LiftingFunction: n must be 1 or 2");
    std::size_t cells = 1;
    for (auto e : extents_) {
        if (e < 1) throw PreconditionViolation("LiftingFunction: extents must be positive");
        cells *= static_cast<std::size_t>(e);
    }
    if (y_.size() != cells) throw PreconditionViolation("LiftingFunction: one height per box required");
    if (!(l > 0.0) || !(d > 0.0) || !(h > 0.0)) throw PreconditionViolation("LiftingFunction: need l, d, h > 0");
    for (std::size_t c = 0; c < cells; ++c) {
        auto a = cell_coords(c);
        for (std::size_t k = 0; k < a.size(); ++k) {
            auto b = a;
            b[k] = (b[k] + 1) % extents_[k];
            const double gap = std::abs(y_[c] - y_[cell_index(b)]);
            if (!(gap < 2.0 * h))
                throw PreconditionViolation("LiftingFunction: neighbouring heights differ by >= 2h");
        }
    }
}

std::size_t LiftingFunction::cell_index(const std::vector<std::int64_t>& a) const {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < extents_.size(); ++k) {
        const std::int64_t e = extents_[k];
        idx = idx * static_cast<std::size_t>(e) + static_cast<std::size_t>(((a[k] % e) + e) % e);
    }
    return idx;
}

std::vector<std::int64_t> LiftingFunction::cell_coords(std::size_t cell) const {
    std::vector<std::int64_t> a(extents_.size());
    for (std::size_t k = extents_.size(); k-- > 0;) {
        const auto e = static_cast<std::size_t>(extents_[k]);
        a[k] = static_cast<std::int64_t>(cell % e);
        cell /= e;
    }
    return a;
}

BasePoint LiftingFunction::centre(std::size_t cell) const {
    const auto a = cell_coords(cell);
    BasePoint c{0.0, 0.0};
    for (std::size_t k = 0; k < a.size(); ++k) c[k] = static_cast<double>(a[k]) * pitch();
    return c;
}

namespace {

// Blend along one axis: weight w on box `hi`, 1 - w on box `lo`.
struct AxisBlend {
    std::int64_t lo = 0, hi = 0;
    double w = 0.0, w1 = 0.0, w2 = 0.0;
    std::int64_t piece() const { return lo + hi; }  // plateau of a gives 2a, the gap to a + 1 gives 2a + 1
};

AxisBlend blend(std::int64_t a, double t, double l, double d) {
    const double pitch = l + d;
    const double shift = std::round(t / pitch);
    a += static_cast<std::int64_t>(shift);
    t -= shift * pitch;
    AxisBlend b{a, a, 0.0, 0.0, 0.0};
    double s;
    if (t > 0.5 * l) {
        b.hi = a + 1;
        s = (t - 0.5 * l) / d;
    } else if (t < -0.5 * l) {
        b.lo = a - 1;
        s = (t + 0.5 * l + d) / d;
    } else {
        return b;
    }
    b.w = smoothstep5(s);
    b.w1 = smoothstep5_d1(s) / d;
    b.w2 = smoothstep5_d2(s) / (d * d);
    return b;
}

}  // namespace

LiftingFunction::Local LiftingFunction::at(std::size_t cell, const BasePoint& t) const {
    const auto a = cell_coords(cell);
    const double y0 = y_[cell];
    Local out;
    if (n() == 1) {
        const AxisBlend b = blend(a[0], t[0], l_, d_);
        const double ylo = y_[cell_index({b.lo})] - y0;
        const double yhi = y_[cell_index({b.hi})] - y0;
        const double dy = yhi - ylo;
        out.value = ylo + b.w * dy;
        out.grad[0] = b.w1 * dy;
        out.hess[0] = b.w2 * dy;
        out.piece[0] = b.piece();
        return out;
    }
    const AxisBlend bx = blend(a[0], t[0], l_, d_);
    const AxisBlend by = blend(a[1], t[1], l_, d_);
    const double y00 = y_[cell_index({bx.lo, by.lo})] - y0;
    const double y10 = y_[cell_index({bx.hi, by.lo})] - y0;
    const double y01 = y_[cell_index({bx.lo, by.hi})] - y0;
    const double y11 = y_[cell_index({bx.hi, by.hi})] - y0;
    // bilinear form in the two weights
    const double A = y00, B = y10 - y00, C = y01 - y00, D = y11 - y10 - y01 + y00;
    out.value = A + B * bx.w + C * by.w + D * bx.w * by.w;
    out.grad[0] = bx.w1 * (B + D * by.w);
    out.grad[1] = by.w1 * (C + D * bx.w);
    out.hess[0] = bx.w2 * (B + D * by.w);
    out.hess[1] = by.w2 * (C + D * bx.w);
    out.hess[2] = D * bx.w1 * by.w1;
    out.piece = {bx.piece(), by.piece()};
    return out;
}

double LiftingFunction::value(const BasePoint& x) const {
    std::vector<std::int64_t> a(extents_.size());
    BasePoint t{0.0, 0.0};
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double s = std::round(x[k] / pitch());
        a[k] = static_cast<std::int64_t>(s);
        t[k] = x[k] - s * pitch();
    }
    const std::size_t c = cell_index(a);
    return y_[c] + at(c, t).value;
}

LiftingFunction::Norms LiftingFunction::measure(int per_gap) const {
    if (per_gap < 2) throw PreconditionViolation("LiftingFunction::measure: per_gap must be >= 2");
    Norms out;
    std::vector<double> ts;
    for (int i = 0; i < per_gap; ++i) ts.push_back(0.5 * l_ + d_ * i / (per_gap - 1.0));
    auto record = [&](const Local& L) {
        const double g = std::hypot(L.grad[0], L.grad[1]);
        const double half = 0.5 * (L.hess[0] - L.hess[1]);
        const double spec = std::abs(0.5 * (L.hess[0] + L.hess[1])) + std::hypot(half, L.hess[2]);
        out.grad = std::max(out.grad, g * d_ / h_);
        out.hessian = std::max(out.hessian, spec * d_ * d_ / h_);
        out.laplacian = std::max(out.laplacian, std::abs(L.laplacian()) * d_ * d_ / h_);
        ++out.points;
    };
    for (std::size_t c = 0; c < cells(); ++c) {
        if (n() == 1) {
            for (double t : ts) record(at(c, {t, 0.0}));
            continue;
        }
        std::vector<double> axis = ts;
        for (double t : {0.0, 0.25 * l_, -0.25 * l_}) axis.push_back(t);
        for (double tx : axis)
            for (double ty : axis) record(at(c, {tx, ty}));
    }
    return out;
}

}  // namespace pinlab
