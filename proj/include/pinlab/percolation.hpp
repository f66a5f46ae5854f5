#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace pinlab {

/// Sites (a, j) of a periodic base box times heights j = 1..H, each open or
/// closed. Openness is a pure predicate, evaluated lazily.
class SiteField {
public:
    using Predicate = std::function<bool(std::span<const std::int64_t> a, std::int64_t j)>;

    /// Independent Bernoulli(p) sites keyed by (seed, a, j).
    static SiteField bernoulli(std::vector<std::int64_t> extents, std::int64_t height_budget, double p,
                               std::uint64_t seed);
    static SiteField custom(std::vector<std::int64_t> extents, std::int64_t height_budget, Predicate open);
    /// Openness read from a table laid out as table[column * H + (j - 1)].
    static SiteField from_table(std::vector<std::int64_t> extents, std::int64_t height_budget,
                                std::vector<char> table);

    bool open(std::size_t column, std::int64_t j) const;
    std::size_t dimension() const { return extents_.size(); }
    std::span<const std::int64_t> extents() const { return extents_; }
    std::int64_t height_budget() const { return height_; }
    std::size_t columns() const { return columns_; }

    std::vector<std::int64_t> coords(std::size_t column) const;
    /// Column indices of the 2n periodic lattice neighbours (duplicates kept).
    std::vector<std::size_t> neighbours(std::size_t column) const;

private:
    SiteField(std::vector<std::int64_t> extents, std::int64_t height_budget, Predicate open);

    std::vector<std::int64_t> extents_;
    std::int64_t height_;
    std::size_t columns_;
    Predicate open_;
};

struct LipschitzSurface {
    std::vector<std::int64_t> extents;
    std::vector<std::int64_t> L;  // indexed by column, row-major with the last axis fastest

    nlohmann::json to_json() const;
};

/// Pointwise smallest L with every (a, L(a)) open and |L(a) - L(b)| <= 1 across
/// periodic neighbours, or none when no such L fits below the height budget.
std::optional<LipschitzSurface> find_minimal_surface(const SiteField& field);

struct SurfaceViolation {
    std::size_t column = 0;
    std::optional<std::size_t> neighbour;  // absent: (a, L(a)) closed or out of range
};

struct SurfaceCheck {
    bool ok = true;
    std::vector<SurfaceViolation> violations;
};

SurfaceCheck surface_check(const LipschitzSurface& surface, const SiteField& field);

/// 1 - exp(-lambda (l - 2 r1)^n h tail): chance that a cuboid of base side l and
/// height h holds the centre of an obstacle of the given tail level in its
/// inner sub-cuboid.
double open_box_probability(double lambda, double l, double h, double r1, int n, double tail);

/// Smallest base side for which open_box_probability exceeds 1 - 1/(2n + 2)^2:
/// 2 r1 + (2 log(2n + 2) / (lambda h tail))^(1/n).
double min_box_side(double lambda, double h, int n, double tail, double r1);

/// 1 - 1/(2n + 2)^2.
double percolation_threshold(int n);

}  // namespace pinlab
