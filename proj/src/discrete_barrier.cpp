#include "pinlab/discrete_barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pinlab/error.hpp"
#include "pinlab/percolation.hpp"

namespace pinlab {

std::int64_t sample_m_statistic(const StrengthDistribution& dist, std::int64_t J, std::uint64_t seed,
                                std::int64_t sample) {
    if (J < 0) throw PreconditionViolation("sample_m_statistic: J must be >= 0");
    if (!dist.is_discrete()) throw InvalidDistribution("sample_m_statistic: " + dist.describe() + " is not N0-valued");
    std::int64_t last = J;
    if (auto cap = dist.support_max()) last = std::min<std::int64_t>(J, static_cast<std::int64_t>(*cap));
    const CounterKey key = CounterKey({seed, Stream::m_statistic}).with(sample);
    std::int64_t best = std::numeric_limits<std::int64_t>::min();
    for (std::int64_t j = 0; j <= last; ++j) {
        const auto x = static_cast<std::int64_t>(dist.sample(unit_open(key.with(j).bits())));
        best = std::max(best, x - j);
    }
    return best;
}

NestedMSampler::NestedMSampler(StrengthDistribution dist, std::vector<std::int64_t> checkpoints)
    : dist_(std::move(dist)), checkpoints_(std::move(checkpoints)) {
    if (!dist_.is_discrete()) throw InvalidDistribution("NestedMSampler: " + dist_.describe() + " is not N0-valued");
    if (checkpoints_.empty()) throw PreconditionViolation("NestedMSampler: no checkpoints");
    if (!std::is_sorted(checkpoints_.begin(), checkpoints_.end()) || checkpoints_.front() < 0)
        throw PreconditionViolation("NestedMSampler: checkpoints must be non-negative and sorted");
    const std::int64_t Jmax = checkpoints_.back();
    hazard_.assign(static_cast<std::size_t>(Jmax) + 1, 0.0);
    double acc = 0.0;
    for (std::int64_t j = 1; j <= Jmax; ++j) {
        const double p = dist_.alpha(j + 1);
        if (p >= 1.0) {
            certain_prefix_ = j;
        } else {
            acc -= std::log1p(-p);
        }
        hazard_[static_cast<std::size_t>(j)] = acc;
    }
}

std::vector<std::int64_t> NestedMSampler::draw(std::uint64_t seed, std::int64_t sample) const {
    CounterRng rng(CounterKey({seed, Stream::m_statistic_nested}).with(sample));
    std::vector<std::int64_t> out;
    out.reserve(checkpoints_.size());
    const std::int64_t Jmax = checkpoints_.back();
    std::size_t next_cp = 0;

    std::int64_t best = static_cast<std::int64_t>(dist_.sample(rng.uniform()));
    auto flush_before = [&](std::int64_t site) {
        while (next_cp < checkpoints_.size() && checkpoints_[next_cp] < site) {
            out.push_back(best);
            ++next_cp;
        }
    };
    auto exceed = [&](std::int64_t j) {
        const auto x = static_cast<std::int64_t>(dist_.sample_above(rng.uniform(), static_cast<double>(j + 1)));
        best = std::max(best, x - j);
    };

    std::int64_t pos = 0;
    for (; pos < std::min(certain_prefix_, Jmax); ) {
        ++pos;
        flush_before(pos);
        exceed(pos);
    }
    for (;;) {
        const double target = hazard_[static_cast<std::size_t>(pos)] + rng.exponential();
        const auto it = std::lower_bound(hazard_.begin() + pos + 1, hazard_.end(), target);
        if (it == hazard_.end()) break;
        pos = static_cast<std::int64_t>(it - hazard_.begin());
        flush_before(pos);
        exceed(pos);
    }
    flush_before(Jmax + 1);
    return out;
}

MGrowthProfile m_growth_profile(const StrengthDistribution& dist, std::vector<std::int64_t> checkpoints,
                                std::int64_t samples, std::uint64_t seed) {
    if (samples < 2) throw PreconditionViolation("m_growth_profile: need at least two samples");
    NestedMSampler sampler(dist, std::move(checkpoints));
    const std::size_t K = sampler.checkpoints().size();
    std::vector<long double> sum(K, 0.0L), sum2(K, 0.0L), dsum(K, 0.0L), dsum2(K, 0.0L);
    for (std::int64_t s = 0; s < samples; ++s) {
        const auto m = sampler.draw(seed, s);
        for (std::size_t k = 0; k < K; ++k) {
            const auto x = static_cast<long double>(m[k]);
            sum[k] += x;
            sum2[k] += x * x;
            if (k + 1 < K) {
                const auto d = static_cast<long double>(m[k + 1] - m[k]);
                dsum[k] += d;
                dsum2[k] += d * d;
            }
        }
    }
    const auto N = static_cast<long double>(samples);
    auto estimate = [N](std::int64_t J, long double s, long double s2) {
        const long double mean = s / N;
        const long double var = std::max(0.0L, (s2 - N * mean * mean) / (N - 1));
        return MMeanEstimate{J, static_cast<double>(mean), static_cast<double>(std::sqrt(var / N))};
    };
    MGrowthProfile out;
    out.samples = samples;
    for (std::size_t k = 0; k < K; ++k) {
        out.means.push_back(estimate(sampler.checkpoints()[k], sum[k], sum2[k]));
        if (k + 1 < K) out.increments.push_back(estimate(sampler.checkpoints()[k + 1], dsum[k], dsum2[k]));
    }
    return out;
}

double m_tail_exact(const StrengthDistribution& dist, std::int64_t n, std::int64_t J) {
    if (!dist.is_discrete()) throw InvalidDistribution("m_tail_exact: " + dist.describe() + " is not N0-valued");
    if (n <= 0) return 1.0;
    constexpr std::int64_t kExplicit = 1 << 17;
    const std::int64_t last = J < 0 ? kExplicit : J;
    double log_none = 0.0;
    for (std::int64_t j = 0; j <= last; ++j) {
        const double a = dist.alpha(n + j);
        if (a >= 1.0) return 1.0;
        if (a == 0.0) return -std::expm1(log_none);
        log_none += std::log1p(-a);
    }
    if (J < 0) {
        // remaining factors are 1 - alpha with alpha < 1e-10 for every kind
        // that reaches here; log(1 - a) = -a to within a^2
        const double rest = dist.tail_sum(n + last + 1);
        if (std::isinf(rest)) return 1.0;
        log_none -= rest;
    }
    return -std::expm1(log_none);
}

std::optional<std::int64_t> m_k0(const StrengthDistribution& dist) {
    if (!dist.is_discrete()) throw InvalidDistribution("m_k0: " + dist.describe() + " is not N0-valued");
    if (std::isinf(dist.tail_sum(1))) return std::nullopt;
    if (dist.tail_sum(1) <= 0.5) return 1;
    std::int64_t lo = 1, hi = 2;  // tail_sum(lo) > 1/2
    while (dist.tail_sum(hi) > 0.5) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (dist.tail_sum(mid) > 0.5) lo = mid;
        else hi = mid;
    }
    return hi;
}

MStatBounds m_bounds(const StrengthDistribution& dist, std::int64_t n) {
    if (n < 1) throw PreconditionViolation("m_bounds: n must be >= 1");
    if (!dist.is_discrete()) throw InvalidDistribution("m_bounds: " + dist.describe() + " is not N0-valued");
    MStatBounds out;
    out.n = n;
    // sum_{l < L} (l + 1) P(X = n + l) plus the exact remainder
    // sum_{l >= L} (l + 1) P(X = n + l) = L alpha_{n+L} + sum_{k >= n+L} alpha_k
    constexpr std::int64_t L = 64;
    double head = 0.0;
    for (std::int64_t l = 0; l < L; ++l) head += static_cast<double>(l + 1) * dist.pmf(n + l);
    out.upper = head + static_cast<double>(L) * dist.alpha(n + L) + dist.tail_sum(n + L);

    out.k0 = m_k0(dist);
    if (!out.k0) {
        out.note = "E X = inf: the lower bound does not apply and E M = inf already";
    } else if (n < *out.k0) {
        out.note = "n < k0";
    } else {
        out.lower = 0.5 * dist.tail_sum(n);
    }
    return out;
}

std::string to_string(BarrierStrategy s) {
    return s == BarrierStrategy::lipschitz_surface ? "lipschitz_surface" : "parabolic_bridge";
}

BarrierStrategy barrier_strategy_from_string(const std::string& s) {
    if (s == "lipschitz_surface") return BarrierStrategy::lipschitz_surface;
    if (s == "parabolic_bridge") return BarrierStrategy::parabolic_bridge;
    throw ConfigError("unknown barrier strategy \"" + s + "\"");
}

nlohmann::json BarrierCertificate::to_json() const {
    nlohmann::json j;
    j["window"] = window();
    j["v"] = v;
    j["F"] = F;
    j["verified"] = verified;
    j["violations"] = violations;
    j["strategy"] = strategy;
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    return j;
}

BarrierCertificate verify_barrier(std::span<const std::int64_t> v, const LatticeField& field, std::int64_t F) {
    if (v.empty()) throw PreconditionViolation("verify_barrier: empty window");
    BarrierCertificate cert;
    cert.v.assign(v.begin(), v.end());
    cert.F = F;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < 0) throw PreconditionViolation("verify_barrier: heights must be non-negative");
        const auto site = static_cast<std::int64_t>(i);
        if (discrete_laplacian(v, i) > field(site, v[i]) - F) cert.violations.push_back(i);
    }
    cert.verified = cert.violations.empty();
    return cert;
}

namespace {

std::optional<std::vector<std::int64_t>> lipschitz_barrier(const LatticeField& field, std::size_t W, std::int64_t F,
                                                           std::int64_t H) {
    auto sites = SiteField::custom({static_cast<std::int64_t>(W)}, H,
                                   [&field, F](std::span<const std::int64_t> a, std::int64_t j) {
                                       return field(a[0], j - 1) >= F + 2;
                                   });
    auto surface = find_minimal_surface(sites);
    if (!surface) return std::nullopt;
    std::vector<std::int64_t> v(surface->L.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = surface->L[i] - 1;
    return v;
}

// Cycle search over states (height, incoming slope). A larger incoming slope
// never hurts, because the constraint at site i reads
//     s_out <= s_in + f(i, v(i)) - F,
// so per column it suffices to keep the largest reachable incoming slope per
// height. The reachable heights of the next column form a prefix [0, h + s_max],
// which makes one column O(H).
class BridgeSearch {
public:
    BridgeSearch(const LatticeField& field, std::size_t W, std::int64_t F, std::int64_t H)
        : W_(W), F_(F), H_(H), f_(W * static_cast<std::size_t>(H)) {
        for (std::size_t i = 0; i < W; ++i)
            for (std::int64_t h = 0; h < H; ++h)
                f_[i * static_cast<std::size_t>(H) + static_cast<std::size_t>(h)] =
                    field(static_cast<std::int64_t>(i), h);
        pred_.resize((W + 1) * static_cast<std::size_t>(H));
    }

    std::int64_t f(std::size_t i, std::int64_t h) const {
        return f_[i * static_cast<std::size_t>(H_) + static_cast<std::size_t>(h)];
    }

    // Strongest sites, at most one per column, strongest first.
    std::vector<std::pair<std::size_t, std::int64_t>> strong_sites(std::size_t count) const {
        std::vector<std::pair<std::size_t, std::int64_t>> best(W_);
        for (std::size_t i = 0; i < W_; ++i) {
            std::int64_t arg = 0;
            for (std::int64_t h = 1; h < H_; ++h)
                if (f(i, h) > f(i, arg)) arg = h;
            best[i] = {i, arg};
        }
        std::stable_sort(best.begin(), best.end(),
                         [this](const auto& a, const auto& b) { return f(a.first, a.second) > f(b.first, b.second); });
        best.resize(std::min(count, best.size()));
        return best;
    }

    std::optional<std::vector<std::int64_t>> close_cycle(std::size_t start, std::int64_t h0, std::int64_t s0) {
        constexpr std::int64_t kUnreached = std::numeric_limits<std::int64_t>::min();
        const auto Hs = static_cast<std::size_t>(H_);
        std::vector<std::int64_t> best(Hs, kUnreached), next(Hs);
        best[static_cast<std::size_t>(h0)] = s0;
        for (std::size_t k = 0; k < W_; ++k) {
            const std::size_t col = (start + k) % W_;
            std::fill(next.begin(), next.end(), kUnreached);
            std::int64_t filled = -1;
            for (std::int64_t h = 0; h < H_ && filled < H_ - 1; ++h) {
                const std::int64_t s_in = best[static_cast<std::size_t>(h)];
                if (s_in == kUnreached) continue;
                const std::int64_t lim = std::min(H_ - 1, h + s_in + f(col, h) - F_);
                for (std::int64_t hp = filled + 1; hp <= lim; ++hp) {
                    next[static_cast<std::size_t>(hp)] = hp - h;
                    pred_[(k + 1) * Hs + static_cast<std::size_t>(hp)] = static_cast<std::int32_t>(h);
                }
                filled = std::max(filled, lim);
            }
            best.swap(next);
        }
        if (best[static_cast<std::size_t>(h0)] == kUnreached || best[static_cast<std::size_t>(h0)] < s0)
            return std::nullopt;
        std::vector<std::int64_t> v(W_);
        std::int64_t h = h0;
        for (std::size_t k = W_; k-- > 0;) {
            // pred at layer k+1 is the height used at column start + k
            h = pred_[(k + 1) * Hs + static_cast<std::size_t>(h)];
            v[(start + k) % W_] = h;
        }
        if (v[start] != h0) return std::nullopt;
        return v;
    }

private:
    std::size_t W_;
    std::int64_t F_;
    std::int64_t H_;
    std::vector<std::int64_t> f_;
    std::vector<std::int32_t> pred_;
};

std::optional<std::vector<std::int64_t>> bridge_barrier(const LatticeField& field, std::size_t W, std::int64_t F,
                                                        const BarrierBudget& budget) {
    BridgeSearch search(field, W, F, budget.height_budget);
    const auto starts = search.strong_sites(static_cast<std::size_t>(std::max(budget.start_attempts, 1)));
    const std::int64_t H = budget.height_budget;
    for (const auto& [col, h0] : starts) {
        const std::int64_t slack = search.f(col, h0) - F;
        if (slack < 0) continue;
        // v(start - 1) = h0 - s0 must stay inside [0, H)
        const std::int64_t lo = std::max(-slack, h0 - H + 1);
        const std::int64_t hi = std::min<std::int64_t>(0, h0);
        if (lo > hi) continue;
        constexpr int kSlopeTrials = 5;
        for (int t = 0; t < kSlopeTrials; ++t) {
            const std::int64_t s0 = hi - (hi - lo) * t / (kSlopeTrials - 1);
            if (auto v = search.close_cycle(col, h0, s0)) return v;
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<BarrierCertificate> build_barrier(const LatticeField& field, std::size_t W, std::int64_t F,
                                                BarrierStrategy strategy, const BarrierBudget& budget) {
    if (W == 0) throw PreconditionViolation("build_barrier: empty window");
    if (budget.height_budget < 1) throw PreconditionViolation("build_barrier: height budget must be >= 1");
    if (F < 0) throw PreconditionViolation("build_barrier: F must be >= 0");
    std::optional<std::vector<std::int64_t>> v;
    switch (strategy) {
        case BarrierStrategy::lipschitz_surface: v = lipschitz_barrier(field, W, F, budget.height_budget); break;
        case BarrierStrategy::parabolic_bridge: v = bridge_barrier(field, W, F, budget); break;
    }
    if (!v) return std::nullopt;
    BarrierCertificate cert = verify_barrier(*v, field, F);
    cert.strategy = to_string(strategy);
    if (!cert.verified) return std::nullopt;
    return cert;
}

}  // namespace pinlab
