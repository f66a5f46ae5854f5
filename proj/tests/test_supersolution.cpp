#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pinlab/error.hpp"
#include "pinlab/supersolution.hpp"

using namespace pinlab;

TEST_SUITE("supersolution") {

TEST_CASE("worked inner profile") {
    const auto phi = inner_profile(1, 2.0, 1.0, 12.0);
    for (double r : {0.0, 0.3, 0.7, 1.0}) CHECK(phi.value(r) == doctest::Approx(std::pow(r, 4) - 1).epsilon(1e-14));
    CHECK(phi.at_zero() == doctest::Approx(-1.0));
    CHECK(phi.d1(1.0) == doctest::Approx(4.0));
    CHECK(phi.slope_at_rin() == doctest::Approx(4.0));
}

TEST_CASE("worked outer slope") {
    const auto psi = outer_slope(1, 1.0, 3.0, 2.0);
    for (double r : {1.0, 1.5, 2.9}) CHECK(psi.d1(r) == doctest::Approx(2 * (3 - r)));
    CHECK(psi.d1(1.0) == doctest::Approx(4.0));
    CHECK(psi.d1(3.0) == 0.0);
    CHECK(psi.value(1.0) == 0.0);
}

TEST_CASE("profiles solve their radial equations") {
    for (int n : {1, 2}) {
        const auto prof = make_local_profile(n, 5.0, 0.8, 3.0, 7.0, 1.5);
        auto phi = [&](double r) { return prof.inner.value(r); };
        auto psi = [&](double r) { return prof.outer.value(r); };
        for (double r = 0.2; r < 0.75; r += 0.05)
            CHECK(oracle::radial_laplacian(phi, n, r, 1e-3) == doctest::Approx(7.0 * std::pow(r / 0.8, 5.0)).epsilon(1e-7));
        for (double r = 0.9; r < 2.95; r += 0.1)
            CHECK(oracle::radial_laplacian(psi, n, r, 1e-3) == doctest::Approx(-1.5).epsilon(1e-7));
        CHECK(prof.laplacian(0.5) == doctest::Approx(7.0 * std::pow(0.5 / 0.8, 5.0)));
        CHECK(prof.laplacian(2.0) == -1.5);
        CHECK(std::isinf(prof.value(3.5)));
    }
}

TEST_CASE("kink condition") {
    const auto worked = kink_condition(make_local_profile(1, 2.0, 1.0, 3.0, 12.0, 2.0));
    CHECK(worked.lhs == doctest::Approx(4.0));
    CHECK(worked.rhs == doctest::Approx(4.0));
    CHECK(std::abs(worked.margin_force) <= 1e-12);
    CHECK(worked.satisfied);
    CHECK(kink_condition(make_local_profile(2, 3.0, 0.5, 4.0, 5.0, 0.0)).satisfied);
    CHECK_FALSE(kink_condition(make_local_profile(1, 2.0, 1.0, 3.0, 12.0, 2.5)).satisfied);
}

TEST_CASE("bounded laws never witness the tail hypothesis") {
    try {
        plan_parameters(1.0, 1, 1.0, 0.5, 0.75, StrengthDistribution::point_mass(5), lifting_constant(1));
        FAIL("expected HypothesisNotWitnessed");
    } catch (const HypothesisNotWitnessed& e) {
        CHECK(e.largest_probe() >= 0.0);
    }
    CHECK_THROWS_AS(plan_parameters(1.0, 1, 1.0, 0.5, 0.7, StrengthDistribution::pareto(1, 1.25), 2.0), InvalidGeometry);
}

TEST_CASE("planned parameters pass their re-checks") {
    for (double F : {1.0, 10.0}) {
        const auto p = plan_parameters(F, 1, 1.0, 0.5, 0.75, StrengthDistribution::pareto(1, 1.25), lifting_constant(1));
        CHECK(p.all_pass());
        CHECK(p.F <= p.ceiling);
        CHECK(p.open_probability > 0.9375);
        const auto back = PipelineParams::from_json(p.to_json());
        CHECK(back.all_pass());
        CHECK(back.M == p.M);
    }
}

TEST_CASE("lifting function") {
    const double h = 0.5, l = 2.0, d = 3.0;
    LiftingFunction flat({6}, std::vector<double>(6, 4.0), l, d, h);
    for (double x = 0; x < 30; x += 0.37) CHECK(flat.value({x, 0.0}) == doctest::Approx(4.0));
    const auto loc = flat.at(2, {1.9, 0.0});
    CHECK(loc.grad[0] == 0.0);
    CHECK(loc.laplacian() == 0.0);

    LiftingFunction steps({5}, {0.0, 0.5, 1.0, 0.5, 0.0}, l, d, h);
    CHECK(steps.value(steps.centre(2)) == doctest::Approx(1.0));
    CHECK(steps.value({steps.centre(1)[0] + 0.9, 0.0}) == doctest::Approx(0.5));
    const auto norms = steps.measure();
    CHECK(norms.grad <= lifting_constant(1));
    CHECK(norms.laplacian <= lifting_constant(1));
    CHECK_THROWS_AS(LiftingFunction({3}, {0.0, 1.0, 2.5}, l, d, h), PreconditionViolation);

    LiftingFunction plane({3, 3}, {0, 0.5, 0, 0.5, 0.9, 0.5, 0, 0.5, 0}, l, d, h);
    const auto n2 = plane.measure(65);
    CHECK(n2.hessian <= lifting_constant(2));
    CHECK(n2.laplacian <= lifting_constant(2));
}

TEST_CASE("end to end at F = 1") {
    const auto dist = StrengthDistribution::pareto(1, 1.25);
    const auto p = plan_parameters(1.0, 1, 1.0, 0.5, 0.75, dist, lifting_constant(1));
    const std::vector<std::int64_t> ext{24};
    const auto box = assembly_box(p, ext, 64);
    const auto obs = sample_obstacles(box, p.lambda, dist, 7, p.M);
    CHECK(obs.obstacles.size() >= 50);
    const auto in = open_boxes(p, ext, 64, obs);
    const auto surf = find_minimal_surface(in.sites);
    REQUIRE(surf.has_value());
    const auto assembly = assemble(p, *surf, obs);
    // coverage: every point of a cell lies within r_out of the cell's own anchor
    CHECK(p.r_out >= std::sqrt(1.0) * (p.l + 0.5 * p.d - p.r1));
    const ForceField field(obs, BumpShape::make(p.r0, p.r1, 1));
    const auto rep = verify_supersolution(assembly, field);
    CHECK(rep.pass);
    CHECK(rep.kinks_pass);
    CHECK(rep.checked > 1000);

    VerifyOptions too_strong;
    too_strong.F_override = 1.5 * p.ceiling + 2 * p.F;
    const auto bad = verify_supersolution(assembly, field, too_strong);
    CHECK_FALSE(bad.pass);
    CHECK(bad.failure_count > 0);

    const auto again = SupersolutionAssembly::from_json(assembly.to_json());
    CHECK(again.eval({3, {0.25, 0.0}}).value == assembly.eval({3, {0.25, 0.0}}).value);
}

}
