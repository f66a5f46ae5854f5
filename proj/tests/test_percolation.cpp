#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pinlab/error.hpp"
#include "pinlab/percolation.hpp"

using namespace pinlab;

TEST_SUITE("percolation") {

TEST_CASE("all open gives the floor") {
    const auto f = SiteField::custom({6, 5}, 4, [](auto, std::int64_t) { return true; });
    const auto s = find_minimal_surface(f);
    REQUIRE(s.has_value());
    for (auto v : s->L) CHECK(v == 1);
}

TEST_CASE("single closed site") {
    const auto f = SiteField::custom({9}, 5, [](std::span<const std::int64_t> a, std::int64_t j) { return !(a[0] == 4 && j == 1); });
    const auto s = find_minimal_surface(f);
    REQUIRE(s.has_value());
    const std::vector<std::int64_t> want{1, 1, 1, 1, 2, 1, 1, 1, 1};
    CHECK(s->L == want);
    const auto brute = oracle::brute_minimal_surface({{9}, 5, [&](std::size_t c, std::int64_t j) { return f.open(c, j); }});
    REQUIRE(brute.has_value());
    CHECK(*brute == s->L);
}

TEST_CASE("closed column forces its neighbours up") {
    const auto f = SiteField::custom({7}, 6, [](std::span<const std::int64_t> a, std::int64_t j) { return !(a[0] == 3 && j <= 3); });
    const auto s = find_minimal_surface(f);
    REQUIRE(s.has_value());
    const std::vector<std::int64_t> exact{1, 2, 3, 4, 3, 2, 1};
    CHECK(s->L == exact);
}

TEST_CASE("matches brute force on small boxes") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const double p = 0.55 + 0.4 * (seed % 4) / 3.0;
        const std::vector<std::int64_t> ext = seed % 2 ? std::vector<std::int64_t>{3, 3} : std::vector<std::int64_t>{6};
        const auto f = SiteField::bernoulli(ext, 5, p, seed);
        const auto s = find_minimal_surface(f);
        const auto b = oracle::brute_minimal_surface({ext, 5, [&](std::size_t c, std::int64_t j) { return f.open(c, j); }});
        REQUIRE(s.has_value() == b.has_value());
        if (s) CHECK(s->L == *b);
    }
}

TEST_CASE("budget exhausted") {
    const auto f = SiteField::custom({4}, 3, [](auto, std::int64_t) { return false; });
    CHECK_FALSE(find_minimal_surface(f).has_value());
}

TEST_CASE("surface_check") {
    const auto f = SiteField::custom({5}, 4, [](std::span<const std::int64_t> a, std::int64_t j) { return !(a[0] == 2 && j == 1); });
    LipschitzSurface flat{{5}, {1, 1, 1, 1, 1}};
    const auto bad = surface_check(flat, f);
    CHECK_FALSE(bad.ok);
    CHECK(bad.violations.size() == 1);

    const auto open = SiteField::custom({8}, 9, [](auto, std::int64_t) { return true; });
    LipschitzSurface bumped{{8}, {3, 3, 4, 5, 4, 3, 3, 3}};
    CHECK(surface_check(bumped, open).ok);
    bumped.L[5] += 2;
    CHECK_FALSE(surface_check(bumped, open).ok);

    const auto rnd = SiteField::bernoulli({40}, 50, 0.8, 3);
    const auto s = find_minimal_surface(rnd);
    REQUIRE(s.has_value());
    CHECK(surface_check(*s, rnd).ok);
}

TEST_CASE("bernoulli fields are deterministic") {
    const auto a = SiteField::bernoulli({30, 30}, 40, 0.97, 12);
    const auto b = SiteField::bernoulli({30, 30}, 40, 0.97, 12);
    const auto sa = find_minimal_surface(a), sb = find_minimal_surface(b);
    REQUIRE(sa.has_value());
    CHECK(sa->L == sb->L);
}

TEST_CASE("open box probability") {
    CHECK(open_box_probability(1, 2 + std::log(2.0), 1, 1, 1, 1.0) == doctest::Approx(0.5));
    CHECK(open_box_probability(1, 5, 1, 1, 1, 0.0) == 0.0);
    const double p = open_box_probability(1, 8, 1, 1, 1, 0.5);
    CHECK(p == doctest::Approx(1 - std::exp(-3.0)));
    CHECK(p > percolation_threshold(1));
    CHECK_THROWS_AS(open_box_probability(1, 1.5, 1, 1, 1, 0.5), InvalidGeometry);
}

TEST_CASE("min box side") {
    CHECK(min_box_side(1, 1, 1, 0.5, 1) == doctest::Approx(2 + 4 * std::log(4.0)));
    CHECK_THROWS(min_box_side(1, 1, 1, 0.0, 1));
    CHECK(percolation_threshold(1) == doctest::Approx(0.9375));
    CHECK(percolation_threshold(2) == doctest::Approx(1 - 1.0 / 36));
}

}
