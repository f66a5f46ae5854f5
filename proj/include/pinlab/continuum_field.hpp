#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "pinlab/distribution.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

// Base points of the continuum model. Only n = 1 and n = 2 are supported;
// unused coordinates stay zero.
using BasePoint = std::array<double, 2>;

/// Product-form obstacle shape phi(x, y) = b(x_1) ... b(x_n) b(y) with
///   b(t) = 1                         for |t| <= r0
///   b(t) = S((rho' - |t|)/(rho' - r0)) for r0 < |t| < rho'
///   b(t) = 0                         for |t| >= rho' = r1 / sqrt(n + 1)
/// and S the quintic smoothstep. phi >= 1 on the cylinder max|.| <= r0 and
/// phi = 0 outside the ball of radius r1.
class BumpShape {
public:
    static BumpShape make(double r0, double r1, int n);

    double r0() const { return r0_; }
    double r1() const { return r1_; }
    double outer() const { return outer_; }
    int n() const { return n_; }

    double factor(double t) const;
    double factor_d1(double t) const;
    double factor_d2(double t) const;

    /// phi at offset (dx, dy) from the centre.
    double operator()(const BasePoint& dx, double dy) const;

private:
    BumpShape(double r0, double r1, int n);
    double r0_, r1_, outer_;
    int n_;
};

/// S(s) = 6 s^5 - 15 s^4 + 10 s^3 on [0, 1], clamped outside.
double smoothstep5(double s);
double smoothstep5_d1(double s);
double smoothstep5_d2(double s);

struct Obstacle {
    BasePoint x{0.0, 0.0};
    double y = 0.0;
    double strength = 0.0;
};

/// Periodic base [0, period_1) x [0, period_2) (second axis only for n = 2)
/// times heights [y_min, y_max].
struct ObstacleBox {
    int n = 1;
    BasePoint period{1.0, 1.0};
    double y_min = 0.0;
    double y_max = 1.0;

    double base_volume() const { return n == 1 ? period[0] : period[0] * period[1]; }
    double volume() const { return base_volume() * (y_max - y_min); }
    nlohmann::json to_json() const;
    static ObstacleBox from_json(const nlohmann::json& j);
};

struct ObstacleSet {
    ObstacleBox box;
    std::vector<Obstacle> obstacles;
    double intensity = 0.0;      // lambda of the full process
    double min_strength = 0.0;   // obstacles weaker than this were thinned out
    std::uint64_t seed = 0;
    std::optional<nlohmann::json> distribution;

    nlohmann::json to_json() const;
    static ObstacleSet from_json(const nlohmann::json& j);
};

/// Poisson(lambda) centres in the box with i.i.d. strengths. With
/// min_strength > 0 only obstacles with strength >= min_strength are drawn,
/// at the thinned intensity lambda P(f >= min_strength) and with strengths
/// from the conditional law. Count, positions and strengths use separate
/// substreams.
ObstacleSet sample_obstacles(const ObstacleBox& box, double lambda, const StrengthDistribution& dist,
                             std::uint64_t seed, double min_strength = 0.0);

/// f(x, y) = sum_i f_i phi(x - x_i, y - y_i) with a hash-grid lookup.
class ForceField {
public:
    ForceField(ObstacleSet set, BumpShape shape);

    /// Force at (x, y).
    double eval(const BasePoint& x, double y) const { return eval_relative(x, y, {0.0, 0.0}, 0.0); }

    /// Force at (x + dx, y + dy). Offsets to nearby centres are formed as
    /// (x - x_i) + dx, so a point given relative to a large reference keeps
    /// full precision in the offset.
    double eval_relative(const BasePoint& x, double y, const BasePoint& dx, double dy) const;

    /// Reference sum over all obstacles.
    double eval_brute(const BasePoint& x, double y) const;

    const ObstacleSet& obstacles() const { return set_; }
    const BumpShape& shape() const { return shape_; }

    /// Minimum-image offset of a from b along base axis k.
    double wrap(double diff, int k) const;

private:
    struct Key {
        std::int64_t a, b, c;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept;
    };
    Key cell_of(const BasePoint& x, double y) const;

    ObstacleSet set_;
    BumpShape shape_;
    BasePoint cell_{1.0, 1.0};
    BasePoint cells_per_period_{1.0, 1.0};
    double cell_y_ = 1.0;
    std::unordered_map<Key, std::vector<std::uint32_t>, KeyHash> grid_;
};

}  // namespace pinlab
