#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pinlab/discrete_barrier.hpp"
#include "pinlab/error.hpp"

using namespace pinlab;

namespace {

bool barrier_holds(const std::vector<std::int64_t>& v, const LatticeField& f, std::int64_t F) {
    const std::size_t W = v.size();
    for (std::size_t i = 0; i < W; ++i) {
        const auto lap = v[(i + 1) % W] + v[(i + W - 1) % W] - 2 * v[i];
        if (lap > f(static_cast<std::int64_t>(i), v[i]) - F) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("discrete_barrier") {

TEST_CASE("point mass zero gives M = 0") {
    const auto d = StrengthDistribution::point_mass(0);
    for (std::int64_t s = 0; s < 20; ++s) CHECK(sample_m_statistic(d, 100, 1, s) == 0);
    CHECK(m_bounds(d, 1).upper == 0.0);
}

TEST_CASE("two_point exact M law") {
    const auto d = StrengthDistribution::two_point(2, 0.5);
    CHECK(m_tail_exact(d, 1, 5) == doctest::Approx(0.75));
    CHECK(m_tail_exact(d, 2, 5) == doctest::Approx(0.5));
    CHECK(m_tail_exact(d, 3, 5) == 0.0);
    CHECK(oracle::m_mean_enumerated({0.5, 0.0, 0.5}) == doctest::Approx(1.25));
    const auto b = m_bounds(d, 2);
    CHECK(b.upper == doctest::Approx(0.5));
}

TEST_CASE("single draws agree with the nested sampler in law") {
    const auto d = StrengthDistribution::geometric(0.5);
    const NestedMSampler nested(d, {50});
    const int N = 40000;
    double a = 0.0, b = 0.0;
    for (int s = 0; s < N; ++s) {
        a += static_cast<double>(sample_m_statistic(d, 50, 3, s));
        b += static_cast<double>(nested.draw(4, s)[0]);
    }
    double exact = 0.0;
    for (int n = 1; n < 80; ++n) exact += m_tail_exact(d, n, 50);
    // Var M <= E M^2, which is small for this law
    CHECK(std::abs(a / N - exact) < 4 * std::sqrt(4.0 / N));
    CHECK(std::abs(b / N - exact) < 4 * std::sqrt(4.0 / N));
}

TEST_CASE("nested draws are monotone in J") {
    const NestedMSampler nested(StrengthDistribution::zeta_tail(3.0), {10, 100, 1000, 10000});
    for (int s = 0; s < 2000; ++s) {
        const auto m = nested.draw(7, s);
        for (std::size_t k = 1; k < m.size(); ++k) CHECK(m[k] >= m[k - 1]);
    }
}

TEST_CASE("geometric bounds") {
    const auto d = StrengthDistribution::geometric(0.5);
    REQUIRE(m_k0(d).has_value());
    CHECK(*m_k0(d) == 2);
    const auto b = m_bounds(d, 2);
    REQUIRE(b.lower.has_value());
    CHECK(*b.lower == doctest::Approx(0.25));
    for (int n = 2; n < 8; ++n) {
        const auto bn = m_bounds(d, n);
        const double exact = m_tail_exact(d, n);
        CHECK(exact <= bn.upper + 1e-15);
        CHECK(exact >= *bn.lower - 1e-15);
    }
}

TEST_CASE("infinite mean has no lower bound") {
    const auto d = StrengthDistribution::zeta_tail(1.5);
    CHECK_FALSE(m_k0(d).has_value());
    const auto b = m_bounds(d, 3);
    CHECK_FALSE(b.lower.has_value());
    CHECK_FALSE(b.note.empty());
}

TEST_CASE("zeta(3) truncated means grow") {
    const auto g = m_growth_profile(StrengthDistribution::zeta_tail(3.0), {100, 1000, 10000}, 20000, 5);
    REQUIRE(g.means.size() == 3);
    CHECK(g.means[1].mean > g.means[0].mean);
    CHECK(g.means[2].mean > g.means[1].mean);
}

TEST_CASE("verify_barrier on trivial inputs") {
    std::vector<std::int64_t> zero(16, 0);
    CHECK(verify_barrier(zero, LatticeField::constant(0), 0).verified);
    const auto bad = verify_barrier(zero, LatticeField::constant(0), 1);
    CHECK_FALSE(bad.verified);
    CHECK(bad.violations.size() == 16);
}

TEST_CASE("hand parabola between two obstacles") {
    // v(i) = -i(i - 4) / 2 ... parabolic bridge with lap = -1 away from the ends
    std::vector<std::int64_t> v{0, 2, 3, 3, 2, 0, 0, 0};
    auto field = LatticeField::custom([](std::int64_t i, std::int64_t) { return (i == 0 || i == 5 || i == 6 || i == 7) ? 3 : 0; });
    for (std::int64_t F = 0; F <= 3; ++F)
        CHECK(verify_barrier(v, field, F).verified == barrier_holds(v, field, F));
}

TEST_CASE("strong constant field yields the zero barrier") {
    for (auto strategy : {BarrierStrategy::lipschitz_surface, BarrierStrategy::parabolic_bridge}) {
        const auto c = build_barrier(LatticeField::constant(5), 64, 3, strategy);
        REQUIRE(c.has_value());
        CHECK(c->verified);
        for (auto x : c->v) CHECK(x == c->v[0]);
    }
}

TEST_CASE("bridge certificates pass an independent check") {
    const auto d = StrengthDistribution::zeta_tail(3.0);
    int found = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto field = LatticeField::sampled({s, Stream::strength}, d);
        const auto c = build_barrier(field, 1024, 2, BarrierStrategy::parabolic_bridge);
        if (!c) continue;
        ++found;
        CHECK(c->verified);
        CHECK(barrier_holds(c->v, field, 2));
    }
    CHECK(found >= 9);
}

TEST_CASE("surface strategy at density 0.95") {
    int found = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        // open means f >= F + 2 there
        auto field = LatticeField::custom([s](std::int64_t i, std::int64_t j) {
            return unit_open(CounterKey({s, Stream::percolation}).with({i, j}).bits()) < 0.95 ? 3 : 0;
        });
        const auto c = build_barrier(field, 512, 1, BarrierStrategy::lipschitz_surface, {10000, 16});
        if (!c) continue;
        ++found;
        CHECK(barrier_holds(c->v, field, 1));
    }
    CHECK(found >= 19);
}

TEST_CASE("strategy names") {
    CHECK(barrier_strategy_from_string(to_string(BarrierStrategy::parabolic_bridge)) == BarrierStrategy::parabolic_bridge);
    CHECK_THROWS(barrier_strategy_from_string("magic"));
}

}
