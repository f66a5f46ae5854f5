#include "pinlab/special.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace pinlab {

double hurwitz_zeta(double s, double a) {
    if (!(s > 1.0) || !(a > 0.0)) throw std::domain_error("hurwitz_zeta: requires s > 1 and a > 0");

    // B_{2j} / (2j)!
    static constexpr std::array<double, 8> bernoulli_over_factorial = {
        1.0 / 6.0 / 2.0,
        -1.0 / 30.0 / 24.0,
        1.0 / 42.0 / 720.0,
        -1.0 / 30.0 / 40320.0,
        5.0 / 66.0 / 3628800.0,
        -691.0 / 2730.0 / 479001600.0,
        7.0 / 6.0 / 87178291200.0,
        -3617.0 / 510.0 / 20922789888000.0,
    };

    const int head = a >= 12.0 ? 0 : 12 - static_cast<int>(a);
    double sum = 0.0;
    for (int k = head - 1; k >= 0; --k) sum += std::pow(a + k, -s);

    const double x = a + head;
    const double xs = std::pow(x, -s);
    sum += x * xs / (s - 1.0) + 0.5 * xs;

    // rising factorial s (s+1) ... (s + 2j - 2), applied to x^(-s-2j+1)
    double rising = s;
    double power = xs / x;
    for (std::size_t j = 0; j < bernoulli_over_factorial.size(); ++j) {
        const double term = bernoulli_over_factorial[j] * rising * power;
        sum += term;
        if (std::abs(term) < 1e-17 * sum) break;
        const double k = 2.0 * static_cast<double>(j + 1);
        rising *= (s + k - 1.0) * (s + k);
        power /= x * x;
    }
    return sum;
}

}  // namespace pinlab
