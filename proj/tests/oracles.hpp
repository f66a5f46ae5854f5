#pragma once

// Reference computations written independently of the library, used to check it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace oracle {

// Fourth-order central differences.
inline double d1(const std::function<double(double)>& f, double r, double h) {
    return (-f(r + 2 * h) + 8 * f(r + h) - 8 * f(r - h) + f(r - 2 * h)) / (12 * h);
}

inline double d2(const std::function<double(double)>& f, double r, double h) {
    return (-f(r + 2 * h) + 16 * f(r + h) - 30 * f(r) + 16 * f(r - h) - f(r - 2 * h)) / (12 * h * h);
}

// Radial Laplacian of x -> f(|x|) in dimension n.
inline double radial_laplacian(const std::function<double(double)>& f, int n, double r, double h) {
    return d2(f, r, h) + (n - 1) / r * d1(f, r, h);
}

// Riemann zeta by direct summation plus an Euler-Maclaurin tail.
inline double zeta(double s) {
    const int N = 2000;
    double sum = 0.0;
    for (int k = N - 1; k >= 1; --k) sum += std::pow(k, -s);
    const double n = N;
    sum += std::pow(n, 1 - s) / (s - 1) + 0.5 * std::pow(n, -s) + s / 12.0 * std::pow(n, -s - 1) -
           s * (s + 1) * (s + 2) / 720.0 * std::pow(n, -s - 3);
    return sum;
}

// E M for M = sup_j (-j + X_j) when X takes values in {0..cmax}, by enumerating
// (X_0, ..., X_cmax); sites j > cmax cannot beat X_0 >= 0.
inline double m_mean_enumerated(const std::vector<double>& pmf) {
    const int c = static_cast<int>(pmf.size()) - 1;
    const int sites = c + 1;
    double mean = 0.0;
    std::vector<int> x(sites, 0);
    while (true) {
        double p = 1.0;
        int m = 0;
        for (int j = 0; j < sites; ++j) {
            p *= pmf[x[j]];
            m = std::max(m, x[j] - j);
        }
        mean += p * m;
        int k = 0;
        while (k < sites && ++x[k] > c) x[k++] = 0;
        if (k == sites) break;
    }
    return mean;
}

// Pointwise minimum over every Lipschitz surface of a small periodic box,
// found by enumerating all surfaces column by column. open(col, j) for j = 1..H.
struct SmallBox {
    std::vector<std::int64_t> extents;
    std::int64_t H = 0;
    std::function<bool(std::size_t, std::int64_t)> open;
};

inline std::vector<std::vector<std::size_t>> neighbour_table(const std::vector<std::int64_t>& ext) {
    std::size_t cols = 1;
    for (auto e : ext) cols *= static_cast<std::size_t>(e);
    std::vector<std::vector<std::size_t>> nb(cols);
    for (std::size_t c = 0; c < cols; ++c) {
        std::vector<std::int64_t> a(ext.size());
        std::size_t rest = c;
        for (std::size_t k = ext.size(); k-- > 0;) {
            a[k] = static_cast<std::int64_t>(rest % ext[k]);
            rest /= ext[k];
        }
        for (std::size_t k = 0; k < ext.size(); ++k) {
            for (int s : {-1, 1}) {
                auto b = a;
                b[k] = ((b[k] + s) % ext[k] + ext[k]) % ext[k];
                std::size_t idx = 0;
                for (std::size_t q = 0; q < ext.size(); ++q) idx = idx * ext[q] + b[q];
                nb[c].push_back(idx);
            }
        }
    }
    return nb;
}

inline std::optional<std::vector<std::int64_t>> brute_minimal_surface(const SmallBox& box) {
    const auto nb = neighbour_table(box.extents);
    const std::size_t cols = nb.size();
    std::vector<std::int64_t> L(cols, 0), best(cols, box.H + 1);
    bool any = false;
    std::function<void(std::size_t)> rec = [&](std::size_t c) {
        if (c == cols) {
            any = true;
            for (std::size_t i = 0; i < cols; ++i) best[i] = std::min(best[i], L[i]);
            return;
        }
        for (std::int64_t v = 1; v <= box.H; ++v) {
            if (!box.open(c, v)) continue;
            bool ok = true;
            for (auto b : nb[c])
                if (b < c && std::abs(L[b] - v) > 1) ok = false;
            if (!ok) continue;
            L[c] = v;
            rec(c + 1);
        }
        L[c] = 0;
    };
    rec(0);
    if (!any) return std::nullopt;
    return best;
}

}  // namespace oracle
