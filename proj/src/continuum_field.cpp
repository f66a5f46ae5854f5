#include "pinlab/continuum_field.hpp"

#include <algorithm>
#include <cmath>

#include "pinlab/error.hpp"

namespace pinlab {

double smoothstep5(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (s * (6.0 * s - 15.0) + 10.0);
}

double smoothstep5_d1(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double t = s * (1.0 - s);
    return 30.0 * t * t;
}

double smoothstep5_d2(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
}

BumpShape::BumpShape(double r0, double r1, int n)
    : r0_(r0), r1_(r1), outer_(r1 / std::sqrt(n + 1.0)), n_(n) {}

BumpShape BumpShape::make(double r0, double r1, int n) {
    if (n < 1 || n > 2) throw InvalidGeometry("BumpShape: only n = 1, 2 are supported");
    if (!(r0 > 0.0)) throw InvalidGeometry("BumpShape: r0 must be > 0");
    if (!(r1 > std::sqrt(n + 1.0) * r0))
        throw InvalidGeometry("BumpShape: need r1 > sqrt(n + 1) r0 for a plateau over the whole cylinder");
    return BumpShape(r0, r1, n);
}

double BumpShape::factor(double t) const {
    const double a = std::abs(t);
    if (a <= r0_) return 1.0;
    if (a >= outer_) return 0.0;
    return smoothstep5((outer_ - a) / (outer_ - r0_));
}

double BumpShape::factor_d1(double t) const {
    const double a = std::abs(t);
    if (a <= r0_ || a >= outer_) return 0.0;
    const double w = outer_ - r0_;
    const double d = -smoothstep5_d1((outer_ - a) / w) / w;
    return t < 0.0 ? -d : d;
}

double BumpShape::factor_d2(double t) const {
    const double a = std::abs(t);
    if (a <= r0_ || a >= outer_) return 0.0;
    const double w = outer_ - r0_;
    return smoothstep5_d2((outer_ - a) / w) / (w * w);
}

double BumpShape::operator()(const BasePoint& dx, double dy) const {
    double v = factor(dy);
    for (int k = 0; k < n_ && v != 0.0; ++k) v *= factor(dx[k]);
    return v;
}

nlohmann::json ObstacleBox::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["period"] = n == 1 ? nlohmann::json::array({period[0]}) : nlohmann::json::array({period[0], period[1]});
    j["y_min"] = y_min;
    j["y_max"] = y_max;
    return j;
}

ObstacleBox ObstacleBox::from_json(const nlohmann::json& j) {
    ObstacleBox b;
    b.n = j.at("n").get<int>();
    const auto& p = j.at("period");
    if (b.n < 1 || b.n > 2 || p.size() != static_cast<std::size_t>(b.n))
        throw ConfigError("obstacle box: n must be 1 or 2 with one period per axis");
    for (int k = 0; k < b.n; ++k) b.period[k] = p.at(k).get<double>();
    b.y_min = j.at("y_min").get<double>();
    b.y_max = j.at("y_max").get<double>();
    return b;
}

nlohmann::json ObstacleSet::to_json() const {
    nlohmann::json j;
    j["box"] = box.to_json();
    j["intensity"] = intensity;
    j["min_strength"] = min_strength;
    j["seed"] = seed;
    if (distribution) j["distribution"] = *distribution;
    auto& arr = j["obstacles"] = nlohmann::json::array();
    for (const auto& o : obstacles) {
        nlohmann::json e;
        e["x"] = box.n == 1 ? nlohmann::json::array({o.x[0]}) : nlohmann::json::array({o.x[0], o.x[1]});
        e["y"] = o.y;
        e["f"] = o.strength;
        arr.push_back(std::move(e));
    }
    return j;
}

ObstacleSet ObstacleSet::from_json(const nlohmann::json& j) {
    ObstacleSet s;
    s.box = ObstacleBox::from_json(j.at("box"));
    s.intensity = j.value("intensity", 0.0);
    s.min_strength = j.value("min_strength", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("distribution")) s.distribution = j.at("distribution");
    for (const auto& e : j.at("obstacles")) {
        Obstacle o;
        const auto& x = e.at("x");
        for (int k = 0; k < s.box.n; ++k) o.x[k] = x.at(k).get<double>();
        o.y = e.at("y").get<double>();
        o.strength = e.at("f").get<double>();
        if (!(o.strength >= 0.0)) throw ConfigError("obstacle set: strengths must be non-negative");
        s.obstacles.push_back(o);
    }
    return s;
}

ObstacleSet sample_obstacles(const ObstacleBox& box, double lambda, const StrengthDistribution& dist,
                             std::uint64_t seed, double min_strength) {
    if (box.n < 1 || box.n > 2) throw InvalidGeometry("sample_obstacles: n must be 1 or 2");
    if (!(box.y_max >= box.y_min) || !(box.period[0] > 0.0) || (box.n == 2 && !(box.period[1] > 0.0)))
        throw InvalidGeometry("sample_obstacles: degenerate box");
    if (!(lambda >= 0.0)) throw InvalidGeometry("sample_obstacles: intensity must be >= 0");

    ObstacleSet out;
    out.box = box;
    out.intensity = lambda;
    out.min_strength = min_strength;
    out.seed = seed;
    out.distribution = dist.to_json();

    const double tail = min_strength > 0.0 ? dist.tail(min_strength) : 1.0;
    const double height = box.y_max - box.y_min;
    double mean = 0.0;
    if (lambda > 0.0 && tail > 0.0 && height > 0.0) {
        // the volume may be astronomically large when tail is tiny
        mean = std::exp(std::log(lambda) + std::log(tail) + std::log(box.base_volume()) + std::log(height));
    }
    if (!(mean <= 5.0e7)) throw PreconditionViolation("sample_obstacles: expected count too large to enumerate");

    CounterRng count_rng(CounterKey({seed, Stream::count}));
    const std::uint64_t count = mean > 0.0 ? count_rng.poisson(mean) : 0;
    out.obstacles.resize(count);
    const CounterKey pos_key({seed, Stream::position});
    const CounterKey str_key({seed, Stream::strength});
    for (std::uint64_t i = 0; i < count; ++i) {
        CounterRng pr(pos_key.with(static_cast<std::int64_t>(i)));
        Obstacle& o = out.obstacles[i];
        for (int k = 0; k < box.n; ++k) o.x[k] = pr.uniform() * box.period[k];
        o.y = box.y_min + pr.uniform() * height;
        const double u = unit_open(str_key.with(static_cast<std::int64_t>(i)).bits());
        o.strength = min_strength > 0.0 ? dist.sample_above(u, min_strength) : dist.sample(u);
    }
    return out;
}

std::size_t ForceField::KeyHash::operator()(const Key& k) const noexcept {
    return static_cast<std::size_t>(
        mix64(static_cast<std::uint64_t>(k.a) ^ mix64(static_cast<std::uint64_t>(k.b) ^ mix64(static_cast<std::uint64_t>(k.c)))));
}

ForceField::ForceField(ObstacleSet set, BumpShape shape) : set_(std::move(set)), shape_(shape) {
    if (shape_.n() != set_.box.n) throw InvalidGeometry("ForceField: shape and box dimensions differ");
    const double r1 = shape_.r1();
    for (int k = 0; k < set_.box.n; ++k) {
        // whole number of cells per period, each at least r1 wide
        const double want = std::max(r1, set_.box.period[k] / 0x1.0p40);
        cells_per_period_[k] = std::max(1.0, std::floor(set_.box.period[k] / want));
        cell_[k] = set_.box.period[k] / cells_per_period_[k];
    }
    cell_y_ = std::max(r1, (set_.box.y_max - set_.box.y_min) / 0x1.0p40);
    for (std::size_t i = 0; i < set_.obstacles.size(); ++i) {
        const auto& o = set_.obstacles[i];
        grid_[cell_of(o.x, o.y)].push_back(static_cast<std::uint32_t>(i));
    }
}

ForceField::Key ForceField::cell_of(const BasePoint& x, double y) const {
    Key key{0, 0, 0};
    auto axis = [&](int k) {
        double c = std::floor(x[k] / cell_[k]);
        c -= cells_per_period_[k] * std::floor(c / cells_per_period_[k]);
        return static_cast<std::int64_t>(c);
    };
    key.a = axis(0);
    if (set_.box.n == 2) key.b = axis(1);
    key.c = static_cast<std::int64_t>(std::floor((y - set_.box.y_min) / cell_y_));
    return key;
}

double ForceField::wrap(double diff, int k) const {
    const double p = set_.box.period[k];
    return diff - p * std::round(diff / p);
}

double ForceField::eval_relative(const BasePoint& x, double y, const BasePoint& dx, double dy) const {
    if (set_.obstacles.empty()) return 0.0;
    const double r1 = shape_.r1();
    // locate the shifted point; rounding in x + dx stays far below one cell
    const int n = set_.box.n;
    BasePoint shifted = x;
    for (int k = 0; k < n; ++k) shifted[k] = x[k] + dx[k];
    const Key centre = cell_of(shifted, y + dy);
    const std::int64_t na = static_cast<std::int64_t>(cells_per_period_[0]);
    const std::int64_t nb = static_cast<std::int64_t>(cells_per_period_[1]);
    constexpr std::int64_t span_y = 1;

    double total = 0.0;
    const std::int64_t ra = 1;
    const std::int64_t rb = n == 2 ? 1 : 0;
    auto visit = [&](const std::vector<std::uint32_t>& ids) {
        for (auto id : ids) {
            const auto& o = set_.obstacles[id];
            BasePoint off{0.0, 0.0};
            bool near = true;
            for (int k = 0; k < n && near; ++k) {
                off[k] = wrap(x[k] - o.x[k], k) + dx[k];
                near = std::abs(off[k]) < r1;
            }
            if (!near) continue;
            const double oy = (y - o.y) + dy;
            if (std::abs(oy) >= r1) continue;
            total += o.strength * shape_(off, oy);
        }
    };
    // with few cells per period the stencil would revisit cells; dedupe then
    const bool small_a = 2 * ra + 1 > na;
    const bool small_b = n == 2 && 2 * rb + 1 > nb;
    for (std::int64_t ia = small_a ? 0 : -ra; ia <= (small_a ? na - 1 : ra); ++ia) {
        const std::int64_t a = small_a ? ia : ((centre.a + ia) % na + na) % na;
        for (std::int64_t ib = small_b ? 0 : -rb; ib <= (small_b ? nb - 1 : rb); ++ib) {
            const std::int64_t b = n == 1 ? 0 : (small_b ? ib : ((centre.b + ib) % nb + nb) % nb);
            for (std::int64_t ic = -span_y; ic <= span_y; ++ic) {
                const auto it = grid_.find(Key{a, b, centre.c + ic});
                if (it != grid_.end()) visit(it->second);
            }
        }
    }
    return total;
}

double ForceField::eval_brute(const BasePoint& x, double y) const {
    double total = 0.0;
    for (const auto& o : set_.obstacles) {
        BasePoint off{0.0, 0.0};
        for (int k = 0; k < set_.box.n; ++k) off[k] = wrap(x[k] - o.x[k], k);
        total += o.strength * shape_(off, y - o.y);
    }
    return total;
}

}  // namespace pinlab
