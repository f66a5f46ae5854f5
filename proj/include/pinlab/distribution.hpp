#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinlab/rng.hpp"

namespace pinlab {

enum class DistributionKind {
    point_mass,
    two_point,
    geometric,
    zeta_tail,
    pareto,
    scaled_bernoulli,
};

std::string to_string(DistributionKind kind);

/// Law of a single obstacle strength.
///
/// Discrete kinds (point_mass, two_point, geometric, zeta_tail) live on N0 and
/// expose the integer tail alpha_k = P(X >= k). The real-valued kinds (pareto,
/// scaled_bernoulli) are only usable where a real strength is acceptable.
///
///   point_mass(c)             X = c
///   two_point(c, q)           X = c with probability q, else 0
///   geometric(p)              P(X = k) = p (1-p)^k, k >= 0
///   zeta_tail(s)              P(X = k) = k^-s / zeta(s), k >= 1, s > 1
///   pareto(x_min, alpha)      P(X >= x) = (x_min / x)^alpha, x >= x_min
///   scaled_bernoulli(lo,hi,q) X = hi with probability q, else lo (0 < lo <= hi)
class StrengthDistribution {
public:
    static StrengthDistribution point_mass(std::int64_t c);
    static StrengthDistribution two_point(std::int64_t c, double q);
    static StrengthDistribution geometric(double p);
    static StrengthDistribution zeta_tail(double s);
    static StrengthDistribution pareto(double x_min, double alpha);
    static StrengthDistribution scaled_bernoulli(double low, double high, double q);

    DistributionKind kind() const noexcept { return kind_; }
    bool is_discrete() const noexcept;

    /// P(X >= x) for real x.
    double tail(double x) const;
    /// alpha_k = P(X >= k).
    double alpha(std::int64_t k) const;
    /// P(X = k); zero for real-valued kinds.
    double pmf(std::int64_t k) const;
    /// sum_{j >= k} alpha_j for k >= 1; +inf when divergent. Discrete kinds only.
    double tail_sum(std::int64_t k) const;
    /// E X (may be +inf).
    double mean() const;
    /// Largest attainable value when the support is bounded.
    std::optional<double> support_max() const;
    /// Smallest attainable value.
    double support_min() const;

    /// Generalized inverse of the tail: the largest value v with P(X >= v) > u
    /// for discrete kinds, the v with P(X >= v) = u for continuous ones.
    /// Feeding u ~ Uniform(0,1) yields a draw from the law.
    double inverse_tail(double u) const;

    /// Draw X given u ~ Uniform(0,1).
    double sample(double u) const { return inverse_tail(u); }
    /// Draw X conditioned on X >= threshold.
    double sample_above(double u, double threshold) const;

    nlohmann::json to_json() const;
    static StrengthDistribution from_json(const nlohmann::json& j);
    std::string describe() const;

    double parameter(std::size_t i) const { return params_.at(i); }

private:
    StrengthDistribution(DistributionKind kind, std::vector<double> params);
    void require_discrete(const char* op) const;
    std::int64_t zeta_inverse_tail(double u) const;

    DistributionKind kind_;
    std::vector<double> params_;
    // zeta_tail only: normalization and alpha_k for k in [1, cap]
    double zeta_norm_ = 0.0;
    std::shared_ptr<const std::vector<double>> zeta_alpha_;
};

/// Counter-based draw of the obstacle strength f(i, j) of a lattice site.
/// Pure in (seed, i, j, dist); throws InvalidDistribution for real-valued kinds.
std::int64_t sample_site_strength(EnvironmentSeed seed, std::int64_t i, std::int64_t j,
                                  const StrengthDistribution& dist);

/// Exact closed-form P(X >= x).
inline double tail_probability(const StrengthDistribution& dist, double x) { return dist.tail(x); }

/// x^a * P(X >= x) along the grid.
std::vector<double> tail_divergence_probe(const StrengthDistribution& dist, double exponent,
                                          std::span<const double> x_grid);

enum class MomentStatus { finite, infinite, unknown };

struct SecondMoment {
    MomentStatus status = MomentStatus::unknown;
    double value = 0.0;  // meaningful when finite
};

/// E X^2 through sum_k (2k - 1) alpha_k with an exact remainder per kind.
SecondMoment second_moment_status(const StrengthDistribution& dist);

/// Partial sum sum_{k=1}^{K} (2k - 1) alpha_k.
double second_moment_partial_sum(const StrengthDistribution& dist, std::int64_t K);

}  // namespace pinlab
