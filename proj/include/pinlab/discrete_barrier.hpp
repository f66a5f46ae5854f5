#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinlab/discrete_dynamics.hpp"
#include "pinlab/distribution.hpp"

namespace pinlab {

// ---------------------------------------------------------------------------
// M = sup{ -j + X_j : j >= 0 } and its truncations M_J.

/// One draw of M_J from the definition: X_0..X_J drawn independently under
/// the key (seed, sample). Cost O(J) except for bounded supports, where terms
/// with j > sup X cannot win and are skipped.
std::int64_t sample_m_statistic(const StrengthDistribution& dist, std::int64_t J, std::uint64_t seed,
                                std::int64_t sample = 0);

/// Exact sampler for M_J at several truncations at once, coupled through the
/// same X sequence.
///
/// Only sites j >= 1 with X_j >= j + 1 can beat X_0, and those exceedances are
/// independent Bernoulli(alpha_{j+1}) events. Their positions are drawn from
/// the cumulative hazard, and X_j is then drawn conditionally on X_j >= j + 1.
/// The cost per draw is the number of exceedances plus a binary search each,
/// instead of J.
class NestedMSampler {
public:
    NestedMSampler(StrengthDistribution dist, std::vector<std::int64_t> checkpoints);

    /// M_J for every checkpoint J, in checkpoint order.
    std::vector<std::int64_t> draw(std::uint64_t seed, std::int64_t sample) const;

    std::span<const std::int64_t> checkpoints() const { return checkpoints_; }

private:
    StrengthDistribution dist_;
    std::vector<std::int64_t> checkpoints_;
    std::int64_t certain_prefix_ = 0;  // sites 1..prefix exceed with probability one
    std::vector<double> hazard_;       // hazard_[j] = sum_{i <= j} -log(1 - alpha_{i+1})
};

struct MMeanEstimate {
    std::int64_t J = 0;
    double mean = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo means of M_J over the checkpoints from the nested sampler.
/// increments[k] is the paired mean of M_{J_{k+1}} - M_{J_k} with its standard error.
struct MGrowthProfile {
    std::vector<MMeanEstimate> means;
    std::vector<MMeanEstimate> increments;
    std::int64_t samples = 0;
};

MGrowthProfile m_growth_profile(const StrengthDistribution& dist, std::vector<std::int64_t> checkpoints,
                                std::int64_t samples, std::uint64_t seed);

/// P(M_J >= n) = 1 - prod_{j=0}^{J} (1 - alpha_{n+j}); exact, with J = -1 meaning
/// the untruncated statistic (product run until the factors reach 1 in double).
double m_tail_exact(const StrengthDistribution& dist, std::int64_t n, std::int64_t J = -1);

struct MStatBounds {
    std::int64_t n = 0;
    double upper = 0.0;                 // sum_l (l + 1) P(X = n + l)
    std::optional<double> lower;        // (1/2) sum_{k >= n} alpha_k, only for n >= k0
    std::optional<std::int64_t> k0;     // absent when E X = inf
    std::string note;                   // why lower is absent
};

/// Smallest k >= 1 with sum_{j >= k} alpha_j <= 1/2, or none when E X = inf.
std::optional<std::int64_t> m_k0(const StrengthDistribution& dist);

MStatBounds m_bounds(const StrengthDistribution& dist, std::int64_t n);

// ---------------------------------------------------------------------------
// Stationary supersolutions of the lattice model.

enum class BarrierStrategy { lipschitz_surface, parabolic_bridge };

std::string to_string(BarrierStrategy s);
BarrierStrategy barrier_strategy_from_string(const std::string& s);

struct BarrierCertificate {
    std::vector<std::int64_t> v;
    std::int64_t F = 0;
    bool verified = false;
    std::vector<std::size_t> violations;
    std::string strategy = "manual";
    std::optional<std::uint64_t> seed;

    std::size_t window() const { return v.size(); }
    nlohmann::json to_json() const;
};

/// Exact integer check of lap(v)(i) <= f(i, v(i)) - F at every site.
BarrierCertificate verify_barrier(std::span<const std::int64_t> v, const LatticeField& field, std::int64_t F);

struct BarrierBudget {
    std::int64_t height_budget = 128;  // v takes values in [0, height_budget)
    int start_attempts = 16;           // cycle closures tried by parabolic_bridge
};

/// Searches for a certificate on the periodic window [0, W). Anything returned
/// has passed verify_barrier; none means the search failed, not that the
/// interface depins.
std::optional<BarrierCertificate> build_barrier(const LatticeField& field, std::size_t W, std::int64_t F,
                                                BarrierStrategy strategy, const BarrierBudget& budget = {});

}  // namespace pinlab
