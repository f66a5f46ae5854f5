#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinlab/continuum_field.hpp"
#include "pinlab/distribution.hpp"
#include "pinlab/percolation.hpp"

namespace pinlab {

// ---------------------------------------------------------------------------
// Radial profiles

/// phi(r) = F_in r_in^2 / ((m+n)(m+2)) * ((r/r_in)^(m+2) - 1) on [0, r_in],
/// the radial solution of phi'' + (n-1)/r phi' = F_in (r/r_in)^m with phi(r_in) = 0.
struct InnerProfile {
    int n = 1;
    double m = 2.0;
    double r_in = 1.0;
    double F_in = 1.0;

    double value(double r) const;
    double d1(double r) const;
    double d2(double r) const;
    /// Left side of the radial equation, phi'' + (n-1)/r phi'.
    double radial_laplacian(double r) const;
    double at_zero() const;     // -F_in r_in^2 / ((m+n)(m+2))
    double slope_at_rin() const;  // F_in r_in / (m+n)
};

InnerProfile inner_profile(int n, double m, double r_in, double F_in);

/// psi'(r) = F_out/n * (r_out^n - r^n) / r^(n-1), solving
/// psi'' + (n-1)/r psi' = -F_out with psi'(r_out) = 0. Values are anchored at
/// psi(r_in) = 0 and come from the exact antiderivative.
struct OuterProfile {
    int n = 1;
    double r_in = 1.0;
    double r_out = 2.0;
    double F_out = 1.0;

    double value(double r) const;
    double d1(double r) const;
    double d2(double r) const;
    double radial_laplacian(double r) const;
};

OuterProfile outer_slope(int n, double r_in, double r_out, double F_out);

struct LocalProfile {
    InnerProfile inner;
    OuterProfile outer;

    int n() const { return inner.n; }
    double r_in() const { return inner.r_in; }
    double r_out() const { return outer.r_out; }
    /// v_local(r): phi inside r_in, phi(r_in) + psi outside, +inf beyond r_out.
    double value(double r) const;
    double d1(double r) const;
    double d2(double r) const;
    /// Laplacian of x -> v_local(|x|) off the kink sphere, from the radial
    /// equations rather than from d2 + (n-1)/r d1 (which cancels badly).
    double laplacian(double r) const;
    nlohmann::json to_json() const;
};

LocalProfile make_local_profile(int n, double m, double r_in, double r_out, double F_in, double F_out);

struct KinkReport {
    bool satisfied = false;
    double lhs = 0.0;            // F_in / (m + n)
    double rhs = 0.0;            // F_out / n * (r_out^n / r_in^n - 1)
    double margin_force = 0.0;   // lhs - rhs
    double margin_slope = 0.0;   // phi'(r_in) - psi'(r_in) = r_in * margin_force
};

KinkReport kink_condition(const LocalProfile& profile);

// ---------------------------------------------------------------------------
// Lifting

/// Lifting constants of the tensor-product smoothstep interpolant: sup of
/// |grad|, |D^2| and |Laplacian| over height jumps below 2h, in units h/d and
/// h/d^2. The frozen values bound the calibrated maxima 2 S'_max = 3.75 and
/// 2 n S''_max = n 20/sqrt(3) from above.
double lifting_constant(int n);

/// Smooth function equal to y(a) on every box
///   Q_a = prod_k [a_k (l + d) - l/2, a_k (l + d) + l/2]
/// of a periodic array with extents[k] boxes per axis, blending neighbouring
/// values across the width-d gaps with the quintic smoothstep in each axis.
class LiftingFunction {
public:
    LiftingFunction(std::vector<std::int64_t> extents, std::vector<double> y, double l, double d, double h);

    int n() const { return static_cast<int>(extents_.size()); }
    double l() const { return l_; }
    double d() const { return d_; }
    double h() const { return h_; }
    double pitch() const { return l_ + d_; }
    const std::vector<std::int64_t>& extents() const { return extents_; }
    const std::vector<double>& heights() const { return y_; }
    std::size_t cells() const { return y_.size(); }
    std::size_t cell_index(const std::vector<std::int64_t>& a) const;
    std::vector<std::int64_t> cell_coords(std::size_t cell) const;
    /// Centre a(l + d) of a box.
    BasePoint centre(std::size_t cell) const;

    struct Local {
        double value = 0.0;  // v_lift - y(cell)
        BasePoint grad{0.0, 0.0};
        std::array<double, 3> hess{0.0, 0.0, 0.0};  // xx, yy, xy
        std::array<std::int64_t, 2> piece{0, 0};     // smooth piece per axis; seams between pieces are only C2
        double laplacian() const { return hess[0] + hess[1]; }
    };

    /// v_lift at centre(cell) + t, returned relative to y(cell).
    Local at(std::size_t cell, const BasePoint& t) const;
    /// Absolute v_lift at a base point.
    double value(const BasePoint& x) const;

    struct Norms {
        double grad = 0.0;       // sup |grad| d / h
        double hessian = 0.0;    // sup spectral |D^2| d^2 / h
        double laplacian = 0.0;  // sup |Laplacian| d^2 / h
        std::size_t points = 0;
    };
    /// Sup norms over a grid of `per_gap` points across every gap (and the
    /// crossings in 2D), in units of h/d and h/d^2.
    Norms measure(int per_gap = 257) const;

private:
    std::vector<std::int64_t> extents_;
    std::vector<double> y_;
    double l_, d_, h_;
};

// ---------------------------------------------------------------------------
// Parameter pipeline

struct PipelineCheck {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double bound = 0.0;
    std::string relation;  // how value compares with bound when passing
};

struct PipelineParams {
    int n = 1;
    double lambda = 1.0, r0 = 0.5, r1 = 1.0;
    double F = 1.0, K = 0.0, M = 0.0, m = 0.0;
    double l = 0.0, d = 0.0, h = 0.0;
    double r_in = 0.0, r_out = 0.0, F_in = 0.0, F_out = 0.0;
    double C0 = 0.0, C1 = 0.0, C2 = 0.0;
    double tail_at_M = 0.0;       // P(f >= M)
    double probe_at_M = 0.0;      // M^(1/2 + 1/n) P(f >= M)
    double open_probability = 0.0;
    double ceiling = 0.0;         // min(F_out - C1 h/d^2, M - F_in)
    int escalations = 0;          // times M was enlarged after the first candidate
    std::vector<PipelineCheck> checks;
    std::string origin = "planned";

    bool all_pass() const;
    LocalProfile profile() const;
    nlohmann::json to_json() const;
    static PipelineParams from_json(const nlohmann::json& j);
};

struct PlanOptions {
    double max_M = 1e300;
    int max_escalations = 400;
};

/// Runs the parameter selection of the continuum construction for a target
/// force F: K, then M >= 2K on the tail probe, then m, d, h, l and the radii
/// and forces, and finally re-checks every inequality numerically. A failing
/// re-check doubles M and retries.
PipelineParams plan_parameters(double F, int n, double lambda, double r0, double r1,
                               const StrengthDistribution& dist, double C1, const PlanOptions& options = {});

/// Recomputes the derived quantities and checks of a parameter set given
/// l, d, h, m, M, r0, r1, F (hand-picked sets use this too).
void evaluate_checks(PipelineParams& p, double tail_at_M);

// ---------------------------------------------------------------------------
// Assembly

struct Anchor {
    std::size_t cell = 0;
    std::int64_t j = 0;           // box level from the surface
    std::size_t obstacle = 0;     // index into the obstacle set
    BasePoint x{0.0, 0.0};
    double y = 0.0;
};

/// Point of the base given relative to the anchor of a cell: x = x_anchor + off.
struct RelPoint {
    std::size_t cell = 0;
    BasePoint off{0.0, 0.0};
};

class SupersolutionAssembly {
public:
    SupersolutionAssembly(PipelineParams params, std::vector<std::int64_t> extents, std::vector<Anchor> anchors);

    const PipelineParams& params() const { return params_; }
    const LocalProfile& profile() const { return profile_; }
    const LiftingFunction& lift() const { return lift_; }
    const std::vector<Anchor>& anchors() const { return anchors_; }
    const std::vector<std::int64_t>& extents() const { return extents_; }
    int n() const { return params_.n; }
    BasePoint period() const;

    struct Eval {
        double value = 0.0;       // v - y_anchor(cell)
        std::size_t argmin = 0;   // cell whose local profile attains the min
        int zone = 0;             // 0 inner, 1 outer
        double radius = 0.0;      // distance to that anchor
        double laplacian = 0.0;   // closed-form Laplacian of the active profile plus the lift
        std::array<std::int64_t, 2> lift_piece{0, 0};
    };
    /// v at a relative point, returned relative to the cell's anchor height.
    Eval eval(const RelPoint& p) const;
    /// Absolute v(x). Loses the fine structure at very large coordinates;
    /// use eval for verification.
    double value(const BasePoint& x) const;
    /// Relative point for an absolute base point.
    RelPoint locate(const BasePoint& x) const;

    /// Offset of anchor b from anchor a, minimum image.
    BasePoint anchor_offset(std::size_t a, std::size_t b) const;
    /// Cells within reach of a local profile centred in the given cell.
    const std::vector<std::size_t>& reach(std::size_t cell) const { return reach_[cell]; }

    nlohmann::json to_json() const;
    static SupersolutionAssembly from_json(const nlohmann::json& j);

private:
    PipelineParams params_;
    LocalProfile profile_;
    std::vector<std::int64_t> extents_;
    std::vector<Anchor> anchors_;
    LiftingFunction lift_;
    std::vector<std::vector<std::size_t>> reach_;
};

/// Open boxes Q_{a,j} (a strong obstacle centred in the inner sub-cuboid),
/// the minimal Lipschitz surface through them, and one anchor obstacle per
/// column. The base box holds extents[k] cells per axis with pitch l + d.
struct AssemblyInputs {
    SiteField sites;
    std::vector<std::vector<std::size_t>> qualifying;  // obstacle ids per (cell, j)
};

AssemblyInputs open_boxes(const PipelineParams& params, const std::vector<std::int64_t>& extents,
                          std::int64_t height_budget, const ObstacleSet& obstacles);

/// Builds v = v_flat + v_lift from the surface; throws AssemblyError when a
/// box on the surface has no qualifying obstacle or the coverage check fails.
SupersolutionAssembly assemble(const PipelineParams& params, const LipschitzSurface& surface,
                               const ObstacleSet& obstacles);

/// Periodic box sized for the assembly: extents[k] cells of pitch l + d and
/// heights up to r1 + height_budget h.
ObstacleBox assembly_box(const PipelineParams& params, const std::vector<std::int64_t>& extents,
                         std::int64_t height_budget);

// ---------------------------------------------------------------------------
// Verification

struct VerifyOptions {
    double tolerance = 1e-6;
    int fine_per_r0 = 32;        // fine grid spacing r0 / fine_per_r0 near anchors
    int coarse_points = 2048;    // uniform points per cell axis (n = 1); square root of that in 2D
    int geometric_per_octave = 16;
    double F_override = -1.0;    // check against this F instead of params.F when >= 0
};

struct PointFailure {
    std::size_t cell = 0;
    BasePoint off{0.0, 0.0};
    double residual = 0.0;   // Delta v - f + F
    double tolerance = 0.0;
};

struct VerifyReport {
    bool pass = false;
    double F = 0.0;
    std::size_t checked = 0;
    std::size_t excluded = 0;          // stencils crossing a kink or a lift seam
    double worst_excess = -1e300;      // max of residual - tolerance
    double worst_residual = -1e300;
    std::optional<PointFailure> worst;
    std::vector<PointFailure> failures;  // first few
    std::size_t failure_count = 0;
    std::size_t fd_points = 0;           // residual from central differences
    std::size_t closed_form_points = 0;  // differences drowned in rounding; closed-form Laplacian used
    double worst_fd_mismatch = 0.0;      // max |FD - closed form| - tolerance where FD is usable
    std::size_t fd_mismatches = 0;
    std::size_t kink_checks = 0;
    bool kinks_pass = true;
    double worst_kink_jump = 1e300;    // min of (inner slope - outer slope) over kinks
    double max_tolerance = 0.0;
    std::string note;

    nlohmann::json to_json() const;
};

/// Checks Delta v - f(x, v(x)) + F <= tol with central differences away from
/// the kink set, and downward one-sided slope jumps on it.
VerifyReport verify_supersolution(const SupersolutionAssembly& assembly, const ForceField& field,
                                  const VerifyOptions& options = {});

}  // namespace pinlab
