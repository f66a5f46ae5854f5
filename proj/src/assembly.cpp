#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "pinlab/error.hpp"
#include "pinlab/supersolution.hpp"

namespace pinlab {

namespace {

std::vector<double> anchor_heights(const std::vector<Anchor>& anchors) {
    std::vector<double> y(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) y[i] = anchors[i].y;
    return y;
}

double wrap_period(double diff, double period) { return diff - period * std::round(diff / period); }

}  // namespace

SupersolutionAssembly::SupersolutionAssembly(PipelineParams params, std::vector<std::int64_t> extents,
                                             std::vector<Anchor> anchors)
    : params_(std::move(params)),
      profile_(params_.profile()),
      extents_(std::move(extents)),
      anchors_(std::move(anchors)),
      lift_(extents_, anchor_heights(anchors_), params_.l, params_.d, params_.h) {
    if (static_cast<int>(extents_.size()) != params_.n) throw AssemblyError("assembly: extents do not match n");
    for (std::size_t c = 0; c < anchors_.size(); ++c)
        if (anchors_[c].cell != c) throw AssemblyError("assembly: anchors must be listed by cell");

    const auto R = static_cast<std::int64_t>(std::ceil(profile_.r_out() / lift_.pitch())) + 1;
    for (auto e : extents_)
        if (e < 2 * R + 1) throw AssemblyError("assembly: periodic box too small for the profile reach");
    reach_.resize(anchors_.size());
    for (std::size_t c = 0; c < anchors_.size(); ++c) {
        const auto a = lift_.cell_coords(c);
        std::set<std::size_t> cells;
        if (params_.n == 1) {
            for (std::int64_t i = -R; i <= R; ++i) cells.insert(lift_.cell_index({a[0] + i}));
        } else {
            for (std::int64_t i = -R; i <= R; ++i)
                for (std::int64_t k = -R; k <= R; ++k) cells.insert(lift_.cell_index({a[0] + i, a[1] + k}));
        }
        reach_[c].assign(cells.begin(), cells.end());
    }
}

BasePoint SupersolutionAssembly::period() const {
    BasePoint p{0.0, 0.0};
    for (std::size_t k = 0; k < extents_.size(); ++k) p[k] = static_cast<double>(extents_[k]) * lift_.pitch();
    return p;
}

BasePoint SupersolutionAssembly::anchor_offset(std::size_t a, std::size_t b) const {
    const BasePoint P = period();
    BasePoint off{0.0, 0.0};
    for (int k = 0; k < params_.n; ++k) off[k] = wrap_period(anchors_[b].x[k] - anchors_[a].x[k], P[k]);
    return off;
}

SupersolutionAssembly::Eval SupersolutionAssembly::eval(const RelPoint& p) const {
    Eval out;
    double best = std::numeric_limits<double>::infinity();
    const int n = params_.n;
    for (auto b : reach_[p.cell]) {
        const BasePoint ob = anchor_offset(p.cell, b);
        const double dx = p.off[0] - ob[0];
        const double dy = n == 2 ? p.off[1] - ob[1] : 0.0;
        const double r = n == 2 ? std::hypot(dx, dy) : std::abs(dx);
        if (r > profile_.r_out()) continue;
        const double v = profile_.value(r);
        if (v < best) {
            best = v;
            out.argmin = b;
            out.radius = r;
        }
    }
    if (!std::isfinite(best)) throw AssemblyError("assembly: point outside every local profile");
    out.zone = out.radius < profile_.r_in() ? 0 : 1;
    const BasePoint c = lift_.centre(p.cell);
    const BasePoint P = period();
    BasePoint t{0.0, 0.0};
    for (int k = 0; k < n; ++k) t[k] = wrap_period(anchors_[p.cell].x[k] - c[k], P[k]) + p.off[k];
    const auto lift = lift_.at(p.cell, t);
    out.value = best + lift.value;
    out.laplacian = profile_.laplacian(out.radius) + lift.laplacian();
    out.lift_piece = lift.piece;
    return out;
}

RelPoint SupersolutionAssembly::locate(const BasePoint& x) const {
    const BasePoint P = period();
    std::vector<std::int64_t> a(extents_.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = static_cast<std::int64_t>(std::round(x[k] / lift_.pitch()));
    RelPoint r;
    r.cell = lift_.cell_index(a);
    for (int k = 0; k < params_.n; ++k) r.off[k] = wrap_period(x[k] - anchors_[r.cell].x[k], P[k]);
    return r;
}

double SupersolutionAssembly::value(const BasePoint& x) const {
    const RelPoint r = locate(x);
    return anchors_[r.cell].y + eval(r).value;
}

nlohmann::json SupersolutionAssembly::to_json() const {
    nlohmann::json j;
    j["params"] = params_.to_json();
    j["extents"] = extents_;
    auto& arr = j["anchors"] = nlohmann::json::array();
    for (const auto& a : anchors_) {
        nlohmann::json e;
        e["cell"] = a.cell;
        e["j"] = a.j;
        e["obstacle"] = a.obstacle;
        e["x"] = params_.n == 1 ? nlohmann::json::array({a.x[0]}) : nlohmann::json::array({a.x[0], a.x[1]});
        e["y"] = a.y;
        arr.push_back(std::move(e));
    }
    j["profile"] = profile_.to_json();
    return j;
}

SupersolutionAssembly SupersolutionAssembly::from_json(const nlohmann::json& j) {
    PipelineParams p = PipelineParams::from_json(j.at("params"));
    auto extents = j.at("extents").get<std::vector<std::int64_t>>();
    std::vector<Anchor> anchors;
    for (const auto& e : j.at("anchors")) {
        Anchor a;
        a.cell = e.at("cell").get<std::size_t>();
        a.j = e.at("j").get<std::int64_t>();
        a.obstacle = e.at("obstacle").get<std::size_t>();
        const auto& x = e.at("x");
        for (int k = 0; k < p.n; ++k) a.x[k] = x.at(k).get<double>();
        a.y = e.at("y").get<double>();
        anchors.push_back(a);
    }
    return SupersolutionAssembly(std::move(p), std::move(extents), std::move(anchors));
}

ObstacleBox assembly_box(const PipelineParams& params, const std::vector<std::int64_t>& extents,
                         std::int64_t height_budget) {
    if (static_cast<int>(extents.size()) != params.n) throw AssemblyError("assembly_box: extents do not match n");
    ObstacleBox box;
    box.n = params.n;
    for (int k = 0; k < params.n; ++k) box.period[k] = static_cast<double>(extents[k]) * (params.l + params.d);
    box.y_min = params.r1;
    box.y_max = params.r1 + static_cast<double>(height_budget) * params.h;
    return box;
}

AssemblyInputs open_boxes(const PipelineParams& params, const std::vector<std::int64_t>& extents,
                          std::int64_t height_budget, const ObstacleSet& obstacles) {
    const int n = params.n;
    if (static_cast<int>(extents.size()) != n || obstacles.box.n != n) throw AssemblyError("open_boxes: dimension mismatch");
    const double pitch = params.l + params.d;
    std::size_t cells = 1;
    for (int k = 0; k < n; ++k) {
        const double want = static_cast<double>(extents[k]) * pitch;
        if (std::abs(obstacles.box.period[k] - want) > 1e-9 * want)
            throw AssemblyError("open_boxes: obstacle box period differs from extents * (l + d)");
        cells *= static_cast<std::size_t>(extents[k]);
    }
    const auto H = static_cast<std::size_t>(height_budget);
    std::vector<std::vector<std::size_t>> qualifying(cells * H);
    std::vector<char> table(cells * H, 0);
    const double inner = 0.5 * params.l - params.r1;
    for (std::size_t i = 0; i < obstacles.obstacles.size(); ++i) {
        const Obstacle& o = obstacles.obstacles[i];
        if (o.strength < params.M) continue;
        std::size_t cell = 0;
        bool inside = true;
        for (int k = 0; k < n && inside; ++k) {
            const double s = std::round(o.x[k] / pitch);
            const double off = o.x[k] - s * pitch;
            inside = std::abs(off) <= inner;
            const std::int64_t e = extents[static_cast<std::size_t>(k)];
            const std::int64_t a = ((static_cast<std::int64_t>(s) % e) + e) % e;
            cell = cell * static_cast<std::size_t>(e) + static_cast<std::size_t>(a);
        }
        if (!inside) continue;
        // Q_{a,j} spans heights [(j - 1) h + r1, j h + r1]
        const double level = std::ceil((o.y - params.r1) / params.h);
        if (!(level >= 1.0) || level > static_cast<double>(height_budget)) continue;
        const auto j = static_cast<std::size_t>(level);
        qualifying[cell * H + j - 1].push_back(i);
        table[cell * H + j - 1] = 1;
    }
    return {SiteField::from_table(extents, height_budget, std::move(table)), std::move(qualifying)};
}

SupersolutionAssembly assemble(const PipelineParams& params, const LipschitzSurface& surface,
                               const ObstacleSet& obstacles) {
    const auto& extents = surface.extents;
    std::int64_t H = 1;
    for (auto L : surface.L) H = std::max(H, L);
    const AssemblyInputs in = open_boxes(params, extents, H, obstacles);
    if (surface.L.size() != in.sites.columns()) throw AssemblyError("assemble: surface size differs from the box");

    std::vector<Anchor> anchors(surface.L.size());
    for (std::size_t c = 0; c < surface.L.size(); ++c) {
        const std::int64_t j = surface.L[c];
        const auto& ids = in.qualifying[c * static_cast<std::size_t>(H) + static_cast<std::size_t>(j - 1)];
        if (ids.empty()) {
            std::ostringstream os;
            os << "assemble: box (cell " << c << ", level " << j << ") holds no obstacle of strength >= M";
            throw AssemblyError(os.str());
        }
        const Obstacle& o = obstacles.obstacles[ids.front()];
        anchors[c] = Anchor{c, j, ids.front(), o.x, o.y};
    }
    SupersolutionAssembly assembly(params, extents, std::move(anchors));

    // coverage: every base point lies within r_out of some anchor
    const int n = params.n;
    const double pitch = params.l + params.d;
    const int per_axis = n == 1 ? 257 : 33;
    const double r_out = assembly.profile().r_out();
    for (std::size_t c = 0; c < assembly.anchors().size(); ++c) {
        const BasePoint centre = assembly.lift().centre(c);
        for (int i = 0; i < per_axis; ++i) {
            for (int k = 0; k < (n == 2 ? per_axis : 1); ++k) {
                BasePoint x = centre;
                x[0] += pitch * (i / (per_axis - 1.0) - 0.5);
                if (n == 2) x[1] += pitch * (k / (per_axis - 1.0) - 0.5);
                const RelPoint rp = assembly.locate(x);
                bool covered = false;
                for (auto b : assembly.reach(rp.cell)) {
                    const BasePoint ob = assembly.anchor_offset(rp.cell, b);
                    const double dist = n == 2 ? std::hypot(rp.off[0] - ob[0], rp.off[1] - ob[1])
                                               : std::abs(rp.off[0] - ob[0]);
                    if (dist <= r_out) {
                        covered = true;
                        break;
                    }
                }
                if (!covered) {
                    std::ostringstream os;
                    os << "assemble: coverage gap near x = (" << x[0] << ", " << x[1] << ") in cell " << c;
                    throw AssemblyError(os.str());
                }
            }
        }
    }
    return assembly;
}

}  // namespace pinlab
