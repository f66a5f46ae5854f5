#include "pinlab/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pinlab/error.hpp"
#include "pinlab/special.hpp"

namespace pinlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::int64_t kZetaTableCap = 4096;
constexpr double kMaxDiscreteValue = 4.0e18;

}  // namespace

std::string to_string(DistributionKind kind) {
    switch (kind) {
        case DistributionKind::point_mass: return "point_mass";
        case DistributionKind::two_point: return "two_point";
        case DistributionKind::geometric: return "geometric";
        case DistributionKind::zeta_tail: return "zeta_tail";
        case DistributionKind::pareto: return "pareto";
        case DistributionKind::scaled_bernoulli: return "scaled_bernoulli";
    }
    return "unknown";
}

StrengthDistribution::StrengthDistribution(DistributionKind kind, std::vector<double> params)
    : kind_(kind), params_(std::move(params)) {}

StrengthDistribution StrengthDistribution::point_mass(std::int64_t c) {
    if (c < 0) throw InvalidDistribution("point_mass: c must be >= 0");
    return {DistributionKind::point_mass, {static_cast<double>(c)}};
}

StrengthDistribution StrengthDistribution::two_point(std::int64_t c, double q) {
    if (c < 0) throw InvalidDistribution("two_point: c must be >= 0");
    if (!(q > 0.0 && q <= 1.0)) throw InvalidDistribution("two_point: q must lie in (0, 1]");
    return {DistributionKind::two_point, {static_cast<double>(c), q}};
}

StrengthDistribution StrengthDistribution::geometric(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw InvalidDistribution("geometric: p must lie in (0, 1]");
    return {DistributionKind::geometric, {p}};
}

StrengthDistribution StrengthDistribution::zeta_tail(double s) {
    if (!(s > 1.0) || !std::isfinite(s)) throw InvalidDistribution("zeta_tail: s must be > 1");
    StrengthDistribution d{DistributionKind::zeta_tail, {s}};
    d.zeta_norm_ = riemann_zeta(s);
    auto table = std::make_shared<std::vector<double>>(kZetaTableCap + 1, 1.0);
    for (std::int64_t k = 2; k <= kZetaTableCap; ++k) {
        (*table)[k] = hurwitz_zeta(s, static_cast<double>(k)) / d.zeta_norm_;
    }
    d.zeta_alpha_ = std::move(table);
    return d;
}

StrengthDistribution StrengthDistribution::pareto(double x_min, double alpha) {
    if (!(x_min > 0.0) || !std::isfinite(x_min)) throw InvalidDistribution("pareto: x_min must be > 0");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidDistribution("pareto: alpha must be > 0");
    return {DistributionKind::pareto, {x_min, alpha}};
}

StrengthDistribution StrengthDistribution::scaled_bernoulli(double low, double high, double q) {
    if (!(low > 0.0 && low <= high) || !std::isfinite(high))
        throw InvalidDistribution("scaled_bernoulli: need 0 < low <= high");
    if (!(q > 0.0 && q <= 1.0)) throw InvalidDistribution("scaled_bernoulli: q must lie in (0, 1]");
    return {DistributionKind::scaled_bernoulli, {low, high, q}};
}

bool StrengthDistribution::is_discrete() const noexcept {
    return kind_ != DistributionKind::pareto && kind_ != DistributionKind::scaled_bernoulli;
}

void StrengthDistribution::require_discrete(const char* op) const {
    if (!is_discrete())
        throw InvalidDistribution(std::string(op) + ": " + to_string(kind_) + " is not an N0-valued law");
}

double StrengthDistribution::alpha(std::int64_t k) const {
    if (k <= 0) return 1.0;
    switch (kind_) {
        case DistributionKind::point_mass: return static_cast<double>(k) <= params_[0] ? 1.0 : 0.0;
        case DistributionKind::two_point: return static_cast<double>(k) <= params_[0] ? params_[1] : 0.0;
        case DistributionKind::geometric: return std::pow(1.0 - params_[0], static_cast<double>(k));
        case DistributionKind::zeta_tail:
            if (k <= kZetaTableCap) return (*zeta_alpha_)[static_cast<std::size_t>(k)];
            return hurwitz_zeta(params_[0], static_cast<double>(k)) / zeta_norm_;
        case DistributionKind::pareto:
        case DistributionKind::scaled_bernoulli: return tail(static_cast<double>(k));
    }
    return 0.0;
}

double StrengthDistribution::tail(double x) const {
    switch (kind_) {
        case DistributionKind::pareto:
            return x <= params_[0] ? 1.0 : std::pow(params_[0] / x, params_[1]);
        case DistributionKind::scaled_bernoulli:
            if (x <= params_[0]) return 1.0;
            return x <= params_[1] ? params_[2] : 0.0;
        default:
            break;
    }
    if (x <= 0.0) return 1.0;
    if (x > kMaxDiscreteValue) {
        if (kind_ == DistributionKind::zeta_tail) return hurwitz_zeta(params_[0], std::ceil(x)) / zeta_norm_;
        if (kind_ == DistributionKind::geometric) return std::pow(1.0 - params_[0], std::ceil(x));
        return 0.0;
    }
    return alpha(static_cast<std::int64_t>(std::ceil(x)));
}

double StrengthDistribution::pmf(std::int64_t k) const {
    if (!is_discrete() || k < 0) return 0.0;
    switch (kind_) {
        case DistributionKind::point_mass: return static_cast<double>(k) == params_[0] ? 1.0 : 0.0;
        case DistributionKind::two_point: {
            double p = 0.0;
            if (static_cast<double>(k) == params_[0]) p += params_[1];
            if (k == 0) p += 1.0 - params_[1];
            return p;
        }
        case DistributionKind::geometric:
            return params_[0] * std::pow(1.0 - params_[0], static_cast<double>(k));
        case DistributionKind::zeta_tail:
            return k == 0 ? 0.0 : std::pow(static_cast<double>(k), -params_[0]) / zeta_norm_;
        default: return 0.0;
    }
}

double StrengthDistribution::tail_sum(std::int64_t k) const {
    require_discrete("tail_sum");
    if (k < 1) throw PreconditionViolation("tail_sum: k must be >= 1");
    const double kk = static_cast<double>(k);
    switch (kind_) {
        case DistributionKind::point_mass: return std::max(0.0, params_[0] - kk + 1.0);
        case DistributionKind::two_point: return params_[1] * std::max(0.0, params_[0] - kk + 1.0);
        case DistributionKind::geometric: {
            const double r = 1.0 - params_[0];
            return std::pow(r, kk) / params_[0];
        }
        case DistributionKind::zeta_tail: {
            const double s = params_[0];
            if (s <= 2.0) return kInf;
            // sum_{j >= k} (j - k + 1) P(X = j)
            return (hurwitz_zeta(s - 1.0, kk) - (kk - 1.0) * hurwitz_zeta(s, kk)) / zeta_norm_;
        }
        default: return kInf;
    }
}

double StrengthDistribution::mean() const {
    switch (kind_) {
        case DistributionKind::pareto:
            return params_[1] > 1.0 ? params_[1] * params_[0] / (params_[1] - 1.0) : kInf;
        case DistributionKind::scaled_bernoulli:
            return params_[0] + params_[2] * (params_[1] - params_[0]);
        default: return tail_sum(1);
    }
}

std::optional<double> StrengthDistribution::support_max() const {
    switch (kind_) {
        case DistributionKind::point_mass:
        case DistributionKind::two_point: return params_[0];
        case DistributionKind::scaled_bernoulli: return params_[1];
        default: return std::nullopt;
    }
}

double StrengthDistribution::support_min() const {
    switch (kind_) {
        case DistributionKind::point_mass: return params_[0];
        case DistributionKind::two_point: return params_[1] < 1.0 ? 0.0 : params_[0];
        case DistributionKind::geometric: return 0.0;
        case DistributionKind::zeta_tail: return 1.0;
        case DistributionKind::pareto: return params_[0];
        case DistributionKind::scaled_bernoulli: return params_[2] < 1.0 ? params_[0] : params_[1];
    }
    return 0.0;
}

std::int64_t StrengthDistribution::zeta_inverse_tail(double u) const {
    const auto& table = *zeta_alpha_;
    if (u >= table[kZetaTableCap]) {
        // first index in [1, cap] with alpha <= u; alpha_1 = 1 > u always
        auto it = std::partition_point(table.begin() + 1, table.end(), [u](double a) { return a > u; });
        return static_cast<std::int64_t>(it - table.begin()) - 1;
    }
    // tail overflow: exponential search then bisection on exact Hurwitz tails
    std::int64_t lo = kZetaTableCap;  // alpha_lo > u
    std::int64_t hi = 2 * kZetaTableCap;
    constexpr std::int64_t limit = std::int64_t{1} << 62;
    while (alpha(hi) > u) {
        lo = hi;
        if (hi >= limit / 2) return hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (alpha(mid) > u) lo = mid;
        else hi = mid;
    }
    return lo;
}

double StrengthDistribution::inverse_tail(double u) const {
    switch (kind_) {
        case DistributionKind::point_mass: return params_[0];
        case DistributionKind::two_point: return u < params_[1] ? params_[0] : 0.0;
        case DistributionKind::geometric: {
            if (params_[0] >= 1.0) return 0.0;
            const double level = std::log(u) / std::log1p(-params_[0]);
            return std::min(std::ceil(level) - 1.0, kMaxDiscreteValue);
        }
        case DistributionKind::zeta_tail: return static_cast<double>(zeta_inverse_tail(u));
        case DistributionKind::pareto: return params_[0] * std::pow(u, -1.0 / params_[1]);
        case DistributionKind::scaled_bernoulli: return u < params_[2] ? params_[1] : params_[0];
    }
    return 0.0;
}

double StrengthDistribution::sample_above(double u, double threshold) const {
    const double t = tail(threshold);
    if (!(t > 0.0)) throw InvalidDistribution("sample_above: threshold lies beyond the support of " + describe());
    return inverse_tail(u * t);
}

nlohmann::json StrengthDistribution::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind_);
    switch (kind_) {
        case DistributionKind::point_mass: j["c"] = static_cast<std::int64_t>(params_[0]); break;
        case DistributionKind::two_point:
            j["c"] = static_cast<std::int64_t>(params_[0]);
            j["q"] = params_[1];
            break;
        case DistributionKind::geometric: j["p"] = params_[0]; break;
        case DistributionKind::zeta_tail: j["s"] = params_[0]; break;
        case DistributionKind::pareto:
            j["x_min"] = params_[0];
            j["alpha"] = params_[1];
            break;
        case DistributionKind::scaled_bernoulli:
            j["low"] = params_[0];
            j["high"] = params_[1];
            j["q"] = params_[2];
            break;
    }
    return j;
}

StrengthDistribution StrengthDistribution::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind")) throw InvalidDistribution("distribution: expected object with \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    auto num = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number())
            throw InvalidDistribution("distribution " + kind + ": missing numeric field \"" + key + "\"");
        return j.at(key).get<double>();
    };
    auto integer = [&](const char* key) {
        const double v = num(key);
        if (v != std::floor(v)) throw InvalidDistribution("distribution " + kind + ": \"" + key + "\" must be an integer");
        return static_cast<std::int64_t>(v);
    };
    if (kind == "point_mass") return point_mass(integer("c"));
    if (kind == "two_point") return two_point(integer("c"), num("q"));
    if (kind == "geometric") return geometric(num("p"));
    if (kind == "zeta_tail") return zeta_tail(num("s"));
    if (kind == "pareto") return pareto(num("x_min"), num("alpha"));
    if (kind == "scaled_bernoulli") return scaled_bernoulli(num("low"), num("high"), num("q"));
    throw InvalidDistribution("distribution: unknown kind \"" + kind + "\"");
}

std::string StrengthDistribution::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "(";
    for (std::size_t i = 0; i < params_.size(); ++i) os << (i ? ", " : "") << params_[i];
    os << ")";
    return os.str();
}

std::int64_t sample_site_strength(EnvironmentSeed seed, std::int64_t i, std::int64_t j,
                                  const StrengthDistribution& dist) {
    if (!dist.is_discrete())
        throw InvalidDistribution("sample_site_strength: " + dist.describe() + " is not N0-valued");
    const double u = unit_open(CounterKey(seed).with(i).with(j).bits());
    return static_cast<std::int64_t>(dist.inverse_tail(u));
}

std::vector<double> tail_divergence_probe(const StrengthDistribution& dist, double exponent,
                                          std::span<const double> x_grid) {
    if (!(exponent > 0.0)) throw PreconditionViolation("tail_divergence_probe: exponent must be > 0");
    if (x_grid.empty()) throw PreconditionViolation("tail_divergence_probe: empty grid");
    std::vector<double> out;
    out.reserve(x_grid.size());
    double previous = -kInf;
    for (double x : x_grid) {
        if (!(x > previous)) throw PreconditionViolation("tail_divergence_probe: grid must be increasing");
        previous = x;
        const double t = dist.tail(x);
        out.push_back(t == 0.0 ? 0.0 : std::exp(exponent * std::log(x) + std::log(t)));
    }
    return out;
}

double second_moment_partial_sum(const StrengthDistribution& dist, std::int64_t K) {
    double sum = 0.0;
    for (std::int64_t k = 1; k <= K; ++k) sum += static_cast<double>(2 * k - 1) * dist.alpha(k);
    return sum;
}

SecondMoment second_moment_status(const StrengthDistribution& dist) {
    const auto& kind = dist.kind();
    switch (kind) {
        case DistributionKind::point_mass:
        case DistributionKind::two_point: {
            // alpha_k vanishes past the support, so the identity sum is finite
            const auto K = static_cast<std::int64_t>(dist.parameter(0));
            return {MomentStatus::finite, second_moment_partial_sum(dist, K)};
        }
        case DistributionKind::geometric: {
            const double p = dist.parameter(0);
            const double r = 1.0 - p;
            if (r == 0.0) return {MomentStatus::finite, 0.0};
            std::int64_t K = 1;
            while (std::pow(r, static_cast<double>(K)) * static_cast<double>(K) > 1e-20 && K < 100000) K *= 2;
            const double head = second_moment_partial_sum(dist, K);
            const double kk = static_cast<double>(K);
            const double remainder = std::pow(r, kk + 1.0) * ((2.0 * kk + 1.0) / p + 2.0 * r / (p * p));
            return {MomentStatus::finite, head + remainder};
        }
        case DistributionKind::zeta_tail: {
            const double s = dist.parameter(0);
            // sum k^2 k^-s diverges iff s <= 3
            if (s <= 3.0) return {MomentStatus::infinite, kInf};
            constexpr std::int64_t K = 1000;
            const double head = second_moment_partial_sum(dist, K);
            const double kk = static_cast<double>(K);
            // sum_{k > K} (2k - 1) alpha_k = sum_{j > K} P(X = j) (j^2 - K^2)
            const double remainder =
                (hurwitz_zeta(s - 2.0, kk + 1.0) - kk * kk * hurwitz_zeta(s, kk + 1.0)) / riemann_zeta(s);
            return {MomentStatus::finite, head + remainder};
        }
        case DistributionKind::pareto: {
            const double xm = dist.parameter(0), a = dist.parameter(1);
            if (a <= 2.0) return {MomentStatus::infinite, kInf};
            return {MomentStatus::finite, a * xm * xm / (a - 2.0)};
        }
        case DistributionKind::scaled_bernoulli: {
            const double lo = dist.parameter(0), hi = dist.parameter(1), q = dist.parameter(2);
            return {MomentStatus::finite, (1.0 - q) * lo * lo + q * hi * hi};
        }
    }
    return {};
}

}  // namespace pinlab
