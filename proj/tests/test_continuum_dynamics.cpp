#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pinlab/continuum_dynamics.hpp"
#include "pinlab/error.hpp"

using namespace pinlab;

namespace {

ForceField empty_field(int n, double period) {
    ObstacleSet set;
    set.box = {n, {period, period}, 0.0, 10.0};
    return ForceField(set, BumpShape::make(0.5, 1.0, n));
}

}  // namespace

TEST_SUITE("continuum_dynamics") {

TEST_CASE("stationary flat state") {
    const auto field = empty_field(1, 10.0);
    auto g = make_grid(field.obstacles().box, {32, 1});
    ForceCache cache(field, g);
    g.dt = stable_dt(g, 0.0);
    for (int k = 0; k < 50; ++k) step(g, cache, 0.0);
    for (double u : g.u) CHECK(u == 0.0);
}

TEST_CASE("free flat interface moves at speed F") {
    for (int n : {1, 2}) {
        const auto field = empty_field(n, 8.0);
        auto g = make_grid(field.obstacles().box, {16, 16});
        ForceCache cache(field, g);
        g.dt = 0.5 * stable_dt(g, 0.0);
        for (int k = 0; k < 100; ++k) step(g, cache, 1.0);
        for (double u : g.u) CHECK(u == doctest::Approx(g.t).epsilon(1e-13));
        CHECK(g.t == doctest::Approx(100 * g.dt));
    }
}

TEST_CASE("heat decay of a sine mode") {
    const double L = 2 * std::numbers::pi;
    const auto field = empty_field(1, L);
    for (int N : {32, 64}) {
        auto g = make_grid(field.obstacles().box, {N, 1});
        for (std::size_t i = 0; i < g.size(); ++i) g.u[i] = std::sin(g.position(i)[0]);
        ForceCache cache(field, g);
        const double T = 1.0;
        const double dx = g.spacing[0];
        const auto steps = static_cast<int>(std::ceil(T / (0.4 * dx * dx)));
        g.dt = T / steps;
        for (int k = 0; k < steps; ++k) step(g, cache, 0.0);
        const double amp = g.u[N / 4] / std::sin(g.position(N / 4)[0]);
        // O(dx^2) + O(dt) error against the continuum rate 1
        CHECK(std::abs(amp - std::exp(-T)) < std::exp(-T) * (dx * dx / 12 + g.dt) * 1.5 + 1e-12);
    }
}

TEST_CASE("unstable step is rejected") {
    const auto field = empty_field(1, 4.0);
    auto g = make_grid(field.obstacles().box, {40, 1});
    ForceCache cache(field, g);
    g.dt = 2.0 * stable_dt(g, 0.0);
    CHECK_THROWS_AS(step(g, cache, 1.0), PreconditionViolation);
}

TEST_CASE("non-finite values blow up") {
    const auto field = empty_field(1, 4.0);
    auto g = make_grid(field.obstacles().box, {8, 1});
    g.u[3] = std::numeric_limits<double>::infinity();
    ForceCache cache(field, g);
    g.dt = stable_dt(g, 0.0);
    CHECK_THROWS_AS(step(g, cache, 0.0), NumericalBlowup);
}

TEST_CASE("force cache matches the field") {
    ObstacleBox box{1, {12.0, 1.0}, 0.0, 12.0};
    const auto set = sample_obstacles(box, 2.0, StrengthDistribution::pareto(1, 1.25), 3);
    const ForceField field(set, BumpShape::make(0.5, 0.75, 1));
    const auto g = make_grid(box, {96, 1});
    const ForceCache cache(field, g);
    for (std::size_t i = 0; i < g.size(); ++i)
        for (double y = 0.05; y < 12.0; y += 0.31)
            CHECK(cache.eval(i, y) == doctest::Approx(field.eval_brute(g.position(i), y)).epsilon(1e-12));
}

TEST_CASE("zero barrier is crossed at once without obstacles") {
    const auto field = empty_field(1, 4.0);
    ContainmentOptions o;
    o.horizon = 1.0;
    o.samples = 10;
    const auto r = containment_run(field, 1.0, [](const BasePoint&) { return 0.0; }, make_grid(field.obstacles().box, {16, 1}), o);
    REQUIRE(r.first_crossing.has_value());
    CHECK(*r.first_crossing > 0.0);
    CHECK(*r.first_crossing <= r.dt_max * 1.000001);
    CHECK_FALSE(r.pass);
    CHECK_FALSE(r.plateau);
    CHECK(r.final_max_u == doctest::Approx(1.0));
}

TEST_CASE("a wall of obstacles stops the interface") {
    // a dense row of strong obstacles at height 3 with F far below their strength
    ObstacleSet set;
    set.box = {1, {6.0, 1.0}, 0.0, 10.0};
    for (int i = 0; i < 24; ++i) set.obstacles.push_back({{0.25 * i, 0.0}, 3.0, 50.0});
    const ForceField field(set, BumpShape::make(0.5, 0.75, 1));
    ContainmentOptions o;
    o.horizon = 20.0;
    o.samples = 50;
    const auto r = containment_run(field, 1.0, [](const BasePoint&) { return 3.0; }, make_grid(set.box, {48, 1}), o);
    CHECK(r.pass);
    CHECK(r.plateau);
    CHECK(r.final_max_u < 3.0);
    CHECK(r.final_max_u > 2.0);
}

}
