#include "pinlab/percolation.hpp"

#include <cmath>
#include <deque>

#include "pinlab/error.hpp"
#include "pinlab/rng.hpp"

namespace pinlab {

SiteField::SiteField(std::vector<std::int64_t> extents, std::int64_t height_budget, Predicate open)
    : extents_(std::move(extents)), height_(height_budget), columns_(1), open_(std::move(open)) {
    if (extents_.empty()) throw InvalidGeometry("SiteField: base box needs at least one axis");
    for (auto e : extents_) {
        if (e <= 0) throw InvalidGeometry("SiteField: base extents must be positive");
        columns_ *= static_cast<std::size_t>(e);
    }
    if (height_ < 1) throw PreconditionViolation("SiteField: height budget must be >= 1");
}

SiteField SiteField::bernoulli(std::vector<std::int64_t> extents, std::int64_t height_budget, double p,
                               std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidDistribution("SiteField: p must lie in [0, 1]");
    const CounterKey key({seed, Stream::percolation});
    return SiteField(std::move(extents), height_budget, [key, p](std::span<const std::int64_t> a, std::int64_t j) {
        CounterKey k = key;
        for (auto c : a) k = k.with(c);
        return unit_open(k.with(j).bits()) < p;
    });
}

SiteField SiteField::custom(std::vector<std::int64_t> extents, std::int64_t height_budget, Predicate open) {
    return SiteField(std::move(extents), height_budget, std::move(open));
}

SiteField SiteField::from_table(std::vector<std::int64_t> extents, std::int64_t height_budget,
                                std::vector<char> table) {
    std::size_t cols = 1;
    for (auto e : extents) cols *= static_cast<std::size_t>(std::max<std::int64_t>(e, 0));
    if (table.size() != cols * static_cast<std::size_t>(std::max<std::int64_t>(height_budget, 0)))
        throw PreconditionViolation("SiteField: table size does not match box");
    auto shared = std::make_shared<std::vector<char>>(std::move(table));
    auto ext = extents;
    return SiteField(std::move(extents), height_budget,
                     [shared, ext, height_budget](std::span<const std::int64_t> a, std::int64_t j) {
                         std::size_t col = 0;
                         for (std::size_t k = 0; k < ext.size(); ++k)
                             col = col * static_cast<std::size_t>(ext[k]) + static_cast<std::size_t>(a[k]);
                         return (*shared)[col * static_cast<std::size_t>(height_budget) +
                                          static_cast<std::size_t>(j - 1)] != 0;
                     });
}

std::vector<std::int64_t> SiteField::coords(std::size_t column) const {
    std::vector<std::int64_t> a(extents_.size());
    for (std::size_t k = extents_.size(); k-- > 0;) {
        const auto e = static_cast<std::size_t>(extents_[k]);
        a[k] = static_cast<std::int64_t>(column % e);
        column /= e;
    }
    return a;
}

std::vector<std::size_t> SiteField::neighbours(std::size_t column) const {
    std::vector<std::size_t> out;
    out.reserve(2 * extents_.size());
    std::size_t stride = 1;
    for (std::size_t k = extents_.size(); k-- > 0;) {
        const auto e = static_cast<std::size_t>(extents_[k]);
        const std::size_t coord = (column / stride) % e;
        const std::size_t base = column - coord * stride;
        out.push_back(base + ((coord + 1) % e) * stride);
        out.push_back(base + ((coord + e - 1) % e) * stride);
        stride *= e;
    }
    return out;
}

bool SiteField::open(std::size_t column, std::int64_t j) const {
    if (j < 1 || j > height_) return false;
    const auto a = coords(column);
    return open_(a, j);
}

nlohmann::json LipschitzSurface::to_json() const {
    return nlohmann::json{{"extents", extents}, {"L", L}};
}

namespace {

// Smallest open height >= from in the column, or H + 1 when none.
std::int64_t next_open(const SiteField& field, std::size_t column, std::int64_t from) {
    const std::int64_t H = field.height_budget();
    for (std::int64_t j = std::max<std::int64_t>(from, 1); j <= H; ++j)
        if (field.open(column, j)) return j;
    return H + 1;
}

}  // namespace

std::optional<LipschitzSurface> find_minimal_surface(const SiteField& field) {
    const std::size_t N = field.columns();
    const std::int64_t H = field.height_budget();
    std::vector<std::int64_t> L(N);
    std::vector<std::vector<std::size_t>> nbrs(N);
    for (std::size_t c = 0; c < N; ++c) {
        L[c] = next_open(field, c, 1);
        if (L[c] > H) return std::nullopt;
        nbrs[c] = field.neighbours(c);
    }

    // Worklist relaxation: every raise is forced by some neighbour, so the
    // iteration climbs monotonically to the least fixed point.
    std::deque<std::size_t> work;
    std::vector<char> queued(N, 1);
    for (std::size_t c = 0; c < N; ++c) work.push_back(c);
    while (!work.empty()) {
        const std::size_t c = work.front();
        work.pop_front();
        queued[c] = 0;
        std::int64_t need = L[c];
        for (auto b : nbrs[c]) need = std::max(need, L[b] - 1);
        if (need == L[c]) continue;
        const std::int64_t raised = next_open(field, c, need);
        if (raised > H) return std::nullopt;
        L[c] = raised;
        for (auto b : nbrs[c]) {
            if (!queued[b] && L[b] < raised - 1) {
                queued[b] = 1;
                work.push_back(b);
            }
        }
    }
    return LipschitzSurface{std::vector<std::int64_t>(field.extents().begin(), field.extents().end()),
                            std::move(L)};
}

SurfaceCheck surface_check(const LipschitzSurface& surface, const SiteField& field) {
    SurfaceCheck out;
    if (surface.L.size() != field.columns()) {
        out.ok = false;
        out.violations.push_back({0, std::nullopt});
        return out;
    }
    for (std::size_t c = 0; c < surface.L.size(); ++c) {
        if (!field.open(c, surface.L[c])) out.violations.push_back({c, std::nullopt});
        for (auto b : field.neighbours(c)) {
            if (b > c && std::abs(surface.L[c] - surface.L[b]) > 1) out.violations.push_back({c, b});
        }
    }
    out.ok = out.violations.empty();
    return out;
}

double percolation_threshold(int n) {
    const double k = 2.0 * n + 2.0;
    return 1.0 - 1.0 / (k * k);
}

double open_box_probability(double lambda, double l, double h, double r1, int n, double tail) {
    if (n < 1) throw InvalidGeometry("open_box_probability: n must be >= 1");
    if (!(l > 2.0 * r1)) throw InvalidGeometry("open_box_probability: need l > 2 r1");
    if (!(h > 0.0)) throw InvalidGeometry("open_box_probability: need h > 0");
    if (!(lambda > 0.0)) throw InvalidGeometry("open_box_probability: need lambda > 0");
    if (tail <= 0.0) return 0.0;
    // volume can be astronomic while tail is tiny; combine in log space
    const double log_rate = std::log(lambda) + n * std::log(l - 2.0 * r1) + std::log(h) + std::log(tail);
    return -std::expm1(-std::exp(log_rate));
}

double min_box_side(double lambda, double h, int n, double tail, double r1) {
    if (n < 1) throw InvalidGeometry("min_box_side: n must be >= 1");
    if (!(tail > 0.0)) throw InvalidGeometry("min_box_side: zero tail admits no finite side");
    if (!(h > 0.0) || !(lambda > 0.0)) throw InvalidGeometry("min_box_side: need lambda, h > 0");
    const double log_bracket = std::log(2.0 * std::log(2.0 * n + 2.0)) - std::log(lambda) - std::log(h) - std::log(tail);
    return 2.0 * r1 + std::exp(log_bracket / n);
}

}  // namespace pinlab
