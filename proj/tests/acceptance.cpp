#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pinlab/continuum_dynamics.hpp"
#include "pinlab/discrete_barrier.hpp"
#include "pinlab/error.hpp"
#include "pinlab/harness.hpp"
#include "pinlab/io.hpp"
#include "pinlab/percolation.hpp"
#include "pinlab/supersolution.hpp"

using namespace pinlab;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets, fixed here so that a run is judged the same way every time.
constexpr double kOdeResidualTol = 1e-6;
constexpr double kExactTol = 1e-12;
constexpr double kKinkAgreeTol = 1e-12;
constexpr double kVerifyTol = 1e-6;
constexpr double kSigmas = 3.0;
constexpr double kMomentTol = 1e-6;
constexpr double kRuntimeOde = 1.0;          // seconds
constexpr double kRuntimePipeline = 10.0;    // per F
constexpr double kRuntimeContinuum = 300.0;
constexpr double kRuntimeBarrier = 120.0;    // per F
constexpr int kBarrierEnvironments = 2;
constexpr int kBarrierRuns = 100;
constexpr std::int64_t kBarrierEvents = 1000000;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[fail] " << what << "; ";
        }
    }
    template <class T>
    Outcome& note(const std::string& key, const T& value) {
        detail << key << "=" << value << " ";
        return *this;
    }
};

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string num(double x) { return format_number(x); }

// ---------------------------------------------------------------------------

void criterion_1(Outcome& out) {
    Stopwatch clock;
    std::mt19937_64 gen(20240601);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst_res = 0.0, worst_edge = 0.0;
    for (int t = 0; t < 20; ++t) {
        const int n = 1 + t % 2;
        const double m = std::floor(U(gen) * 11.0) + 2.0;  // 2..12
        const double r_in = 0.5 + 1.5 * U(gen);
        const double r_out = r_in * (1.5 + 1.5 * U(gen));
        const double F_in = 1.0 + 19.0 * U(gen);
        const double F_out = 0.1 + 4.9 * U(gen);
        const LocalProfile prof = make_local_profile(n, m, r_in, r_out, F_in, F_out);
        auto phi = [&](double r) { return prof.inner.value(r); };
        auto psi = [&](double r) { return prof.outer.value(r); };

        const double h = 2e-3 * r_in;
        for (int k = 1; k < 40; ++k) {
            const double r = r_in * (0.05 + 0.9 * k / 40.0);
            const double res = std::abs(oracle::radial_laplacian(phi, n, r, h) - F_in * std::pow(r / r_in, m));
            worst_res = std::max(worst_res, res);
        }
        for (int k = 1; k < 40; ++k) {
            const double r = r_in + (r_out - r_in) * (0.05 + 0.9 * k / 40.0);
            const double res = std::abs(oracle::radial_laplacian(psi, n, r, h) + F_out);
            worst_res = std::max(worst_res, res);
        }
        const double phi0_expected = -F_in * r_in * r_in / ((m + n) * (m + 2.0));
        worst_edge = std::max({worst_edge, std::abs(prof.inner.value(r_in)), std::abs(prof.outer.d1(r_out)),
                               std::abs(prof.inner.value(0.0) - phi0_expected),
                               std::abs(prof.inner.at_zero() - phi0_expected)});
    }
    const double secs = clock.seconds();
    out.require(worst_res <= kOdeResidualTol, "FD residual " + num(worst_res));
    out.require(worst_edge <= kExactTol, "boundary values off by " + num(worst_edge));
    out.require(secs < kRuntimeOde, "runtime " + num(secs) + " s");
    out.note("worst_fd_residual", num(worst_res)).note("worst_boundary_error", num(worst_edge)).note("seconds", num(secs));
}

void criterion_2(Outcome& out) {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
        const int n = 1 + t % 2;
        const double m = std::floor(U(gen) * 11.0) + 2.0;
        const double r_in = 0.5 + 1.5 * U(gen);
        const double r_out = r_in * (1.2 + 2.0 * U(gen));
        const double F_in = 1.0 + 19.0 * U(gen);
        const double F_out = 0.1 + 4.9 * U(gen);
        const LocalProfile prof = make_local_profile(n, m, r_in, r_out, F_in, F_out);
        const KinkReport k = kink_condition(prof);
        // force form straight from the parameters, slope form from the profiles
        const double force = F_in / (m + n) - F_out / n * (std::pow(r_out / r_in, n) - 1.0);
        const double slope = (prof.inner.d1(r_in) - prof.outer.d1(r_in)) / r_in;
        const double scale = std::max({1.0, F_in / (m + n), std::abs(force)});
        worst = std::max({worst, std::abs(force - slope) / scale, std::abs(k.margin_force - force) / scale,
                          std::abs(k.margin_slope / r_in - slope) / scale});
        out.require(k.satisfied == (k.margin_force >= -kKinkAgreeTol * scale), "satisfied flag disagrees with margin");
    }
    const KinkReport worked = kink_condition(make_local_profile(1, 2.0, 1.0, 3.0, 12.0, 2.0));
    out.require(worst <= kKinkAgreeTol, "force and slope margins differ by " + num(worst));
    out.require(std::abs(worked.margin_force) <= kKinkAgreeTol, "worked margin " + num(worked.margin_force));
    out.require(std::abs(worked.margin_slope) <= kKinkAgreeTol, "worked slope margin " + num(worked.margin_slope));
    out.require(worked.satisfied, "worked tuple not satisfied");
    out.note("worst_relative_disagreement", num(worst)).note("worked_margin", num(worked.margin_force));
}

PipelineParams plan_f(double F) {
    return plan_parameters(F, 1, 1.0, 0.5, 0.75, StrengthDistribution::pareto(1, 1.25), lifting_constant(1));
}

void criterion_3(Outcome& out) {
    for (double F : {1.0, 10.0, 100.0}) {
        Stopwatch clock;
        const PipelineParams p = plan_f(F);
        const double secs = clock.seconds();
        const std::string tag = "F=" + num(F) + ": ";
        auto named = [&](const std::string& name) {
            for (const auto& c : p.checks)
                if (c.name == name) return c.pass;
            return false;
        };
        for (const char* name : {"kink", "open_box", "phi0", "force_ceiling"}) out.require(named(name), tag + name);

        // independent re-evaluation of the four inequalities
        const double n = 1.0;
        const double tail = std::pow(1.0 / p.M, 1.25);
        const double open = 1.0 - std::exp(-p.lambda * std::pow(p.l - 2 * p.r1, n) * p.h * tail);
        out.require(open > 1.0 - 1.0 / 16.0, tag + "open probability " + num(open));
        const double F_in = (p.m + n) * (p.m + 2) / p.r0;
        const double F_out = 2 * p.C1 * p.h / (p.d * p.d);
        const double r_out = std::sqrt(n) * (p.l + 0.5 * p.d - p.r1);
        out.require(F_in / (p.m + n) >= F_out / n * (std::pow(r_out / p.r0, n) - 1.0), tag + "kink inequality");
        const double phi0 = -F_in * p.r0 * p.r0 / ((p.m + n) * (p.m + 2));
        out.require(phi0 >= -p.r0 * (1 + 1e-12), tag + "phi(0)");
        const double ceiling = std::min(F_out - p.C1 * p.h / (p.d * p.d), p.M - F_in);
        out.require(F <= ceiling, tag + "ceiling");
        out.require(secs < kRuntimePipeline, tag + "runtime " + num(secs));
        out.note("F", F).note("M", num(p.M)).note("open", num(open)).note("ceiling", num(ceiling)).note("s", num(secs));
    }
}

struct Built {
    PipelineParams params;
    ObstacleSet obstacles;
    SupersolutionAssembly assembly;
    ForceField field;
};

Built build(const PipelineParams& p, const StrengthDistribution& dist, std::uint64_t seed, std::int64_t cells,
            std::int64_t H, double min_strength) {
    const std::vector<std::int64_t> ext{cells};
    const ObstacleBox box = assembly_box(p, ext, H);
    ObstacleSet obs = sample_obstacles(box, p.lambda, dist, seed, min_strength);
    const AssemblyInputs in = open_boxes(p, ext, H, obs);
    const auto surf = find_minimal_surface(in.sites);
    if (!surf) throw AssemblyError("no surface below the height budget");
    SupersolutionAssembly a = assemble(p, *surf, obs);
    ForceField f(obs, BumpShape::make(p.r0, p.r1, p.n));
    return {p, std::move(obs), std::move(a), std::move(f)};
}

void criterion_4(Outcome& out) {
    Stopwatch clock;
    const auto dist = StrengthDistribution::pareto(1, 1.25);
    const PipelineParams p = plan_f(1.0);
    // only obstacles at least as strong as M are sampled; the weaker ones
    // would number in the astronomically many and only add force
    const Built b = build(p, dist, 7, 24, 64, p.M);
    VerifyOptions vo;
    vo.tolerance = kVerifyTol;
    const VerifyReport rep = verify_supersolution(b.assembly, b.field, vo);
    out.require(b.obstacles.obstacles.size() >= 50, "only " + std::to_string(b.obstacles.obstacles.size()) + " obstacles");
    out.require(rep.pass, "verify_supersolution failed (worst excess " + num(rep.worst_excess) + ")");
    out.require(rep.kinks_pass, "slope jump not downward on the kink set");

    ContainmentOptions co;
    co.horizon = 100.0;
    co.c = 1.0;
    const ContainmentReport cr = containment_run(b.field, p.F, b.assembly, make_grid(b.obstacles.box, {512, 1}), co);
    out.require(cr.pass, "sup(u - v) = " + num(cr.sup_gap) + " above c dx^2 = " + num(cr.tolerance));
    out.require(cr.plateau, "no plateau: max u grew by " + num(cr.late_growth) + " over the second half");
    const double secs = clock.seconds();
    out.require(secs < kRuntimeContinuum, "runtime " + num(secs));
    out.note("obstacles", b.obstacles.obstacles.size())
        .note("verify_points", rep.checked)
        .note("fd_points", rep.fd_points)
        .note("closed_form_points", rep.closed_form_points)
        .note("worst_excess", num(rep.worst_excess))
        .note("sup_gap", num(cr.sup_gap))
        .note("tolerance", num(cr.tolerance))
        .note("final_max_u", num(cr.final_max_u))
        .note("seconds", num(secs));

    // Hand-sized setting on the same code path, where obstacles sit within
    // reach of the interface during the horizon. Reported, not judged.
    Stopwatch demo_clock;
    PipelineParams d;
    d.n = 1;
    d.lambda = 4.0;
    d.r0 = 0.5;
    d.r1 = 1.0;
    d.F = 0.5;
    d.M = 48.0;
    d.m = 2.0;
    d.l = 3.0;
    d.d = 4.0;
    d.h = 0.75;
    d.C1 = lifting_constant(1);
    d.origin = "manual";
    evaluate_checks(d, 1.0);
    const Built demo = build(d, StrengthDistribution::point_mass(48), 11, 24, 16, 0.0);
    const VerifyReport drep = verify_supersolution(demo.assembly, demo.field, vo);
    ContainmentOptions dco;
    dco.horizon = 20.0;
    const ContainmentReport dcr = containment_run(demo.field, d.F, demo.assembly, make_grid(demo.obstacles.box, {840, 1}), dco);
    std::printf("  info: desk setting (point_mass 48, F=0.5): params %s, verify %s, containment %s, plateau %s, "
                "final max u %s, sup gap %s, %s s\n",
                d.all_pass() ? "pass" : "fail", drep.pass ? "pass" : "fail", dcr.pass ? "pass" : "fail",
                dcr.plateau ? "yes" : "no", num(dcr.final_max_u).c_str(), num(dcr.sup_gap).c_str(),
                num(demo_clock.seconds()).c_str());
}

void criterion_5(Outcome& out) {
    int mismatches = 0, compared = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const double p = 0.6 + 0.1 * static_cast<double>(seed % 4);
        const SiteField f = SiteField::bernoulli({4, 4}, 5, p, 1000 + seed);
        const auto s = find_minimal_surface(f);
        const auto brute =
            oracle::brute_minimal_surface({{4, 4}, 5, [&](std::size_t c, std::int64_t j) { return f.open(c, j); }});
        ++compared;
        if (s.has_value() != brute.has_value() || (s && s->L != *brute)) ++mismatches;
    }
    out.require(mismatches == 0, std::to_string(mismatches) + " brute-force mismatches");

    int found = 0, bad_checks = 0;
    const auto nb = oracle::neighbour_table({512});
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const SiteField f = SiteField::bernoulli({512}, 10000, 0.95, seed);
        const auto s = find_minimal_surface(f);
        if (!s) continue;
        ++found;
        bool direct = true;
        for (std::size_t c = 0; c < s->L.size(); ++c) {
            if (s->L[c] < 1 || s->L[c] > 10000 || !f.open(c, s->L[c])) direct = false;
            for (auto b : nb[c])
                if (std::abs(s->L[c] - s->L[b]) > 1) direct = false;
        }
        if (!surface_check(*s, f).ok || !direct) ++bad_checks;
    }
    out.require(found >= 99, "surface found in " + std::to_string(found) + "/100 seeds");
    out.require(bad_checks == 0, std::to_string(bad_checks) + " surfaces failed the check");
    out.note("brute_force_boxes", compared).note("found", std::to_string(found) + "/100");
}

void criterion_6(Outcome& out) {
    const auto dist = StrengthDistribution::pareto(1, 1.25);
    struct Setting {
        int n;
        double lambda, l, h, r1, M;
    };
    for (const Setting s : {Setting{1, 1.0, 3.0, 1.0, 0.75, 2.0}, Setting{2, 0.5, 3.0, 1.5, 0.9, 3.0}}) {
        const double tail = dist.tail(s.M);
        const double p = open_box_probability(s.lambda, s.l, s.h, s.r1, s.n, tail);
        const int N = 10000;
        int open = 0;
        for (int k = 0; k < N; ++k) {
            const ObstacleBox box{s.n, {s.l, s.l}, 0.0, s.h};
            const ObstacleSet set = sample_obstacles(box, s.lambda, dist, derive_seed(606, static_cast<std::uint64_t>(k)));
            bool hit = false;
            for (const auto& o : set.obstacles) {
                bool inside = o.strength >= s.M;
                for (int a = 0; a < s.n; ++a) inside = inside && o.x[a] > s.r1 && o.x[a] < s.l - s.r1;
                hit = hit || inside;
            }
            open += hit;
        }
        const double freq = open / static_cast<double>(N);
        const double sigma = std::sqrt(p * (1 - p) / N);
        out.require(std::abs(freq - p) <= kSigmas * sigma,
                    "n=" + std::to_string(s.n) + " frequency " + num(freq) + " vs " + num(p));
        out.note("n", s.n).note("p", num(p)).note("mc", num(freq));
    }
    for (int n : {1, 2})
        for (double lambda : {0.5, 1.0, 3.0})
            for (double tail : {1e-6, 0.01, 0.5}) {
                const double lmin = min_box_side(lambda, 0.8, n, tail, 0.75);
                const double p = open_box_probability(lambda, lmin * (1 + 1e-9), 0.8, 0.75, n, tail);
                out.require(p > percolation_threshold(n), "l just above min_box_side gives " + num(p));
            }
}

void criterion_7(Outcome& out) {
    const auto tp = StrengthDistribution::two_point(2, 0.5);
    const double enumerated = oracle::m_mean_enumerated({0.5, 0.0, 0.5});
    double series = 0.0;
    for (int n = 1; n <= 10; ++n) series += m_tail_exact(tp, n);
    out.require(std::abs(enumerated - 1.25) <= kExactTol, "enumerated E M " + num(enumerated));
    out.require(std::abs(series - 1.25) <= kExactTol, "library E M " + num(series));
    const auto g = m_growth_profile(tp, {100}, 100000, 71);
    out.require(std::abs(g.means[0].mean - 1.25) <= kSigmas * g.means[0].std_error,
                "two_point Monte Carlo " + num(g.means[0].mean) + " +- " + num(g.means[0].std_error));
    out.note("two_point_mc", num(g.means[0].mean)).note("se", num(g.means[0].std_error));

    const auto geo = StrengthDistribution::geometric(0.5);
    const auto k0 = m_k0(geo);
    out.require(k0 && *k0 == 2, "k0 for geometric(1/2)");
    const NestedMSampler sampler(geo, {100000});
    const int N = 100000;
    std::vector<int> hits(6, 0);
    for (int s = 0; s < N; ++s) {
        const auto m = sampler.draw(72, s)[0];
        for (int i = 0; i < 6; ++i) hits[i] += m >= 2 + i;
    }
    for (int i = 0; i < 6; ++i) {
        const MStatBounds b = m_bounds(geo, 2 + i);
        const double f = hits[i] / static_cast<double>(N);
        const double sigma = std::sqrt(std::max(f * (1 - f), 1.0 / N) / N);
        const bool ok = b.lower && f >= *b.lower - kSigmas * sigma && f <= b.upper + kSigmas * sigma;
        out.require(ok, "geometric n=" + std::to_string(2 + i) + " frequency " + num(f));
    }

    const auto z = m_growth_profile(StrengthDistribution::zeta_tail(3.0), {100, 1000, 10000, 100000}, 100000, 73);
    for (std::size_t k = 1; k < z.means.size(); ++k)
        out.require(z.means[k].mean > z.means[k - 1].mean, "zeta(3) mean not increasing at J=" + std::to_string(z.means[k].J));
    out.detail << "zeta3_means=";
    for (const auto& e : z.means) out.detail << num(e.mean) << "/";
    out.detail << " ";
}

void criterion_8(Outcome& out) {
    const auto dist = StrengthDistribution::zeta_tail(3.0);
    const RateFunction rate = RateFunction::saturating(1.0);
    for (std::int64_t F : {1, 2}) {
        Stopwatch clock;
        int certificates = 0, violations = 0;
        for (int e = 0; e < kBarrierEnvironments; ++e) {
            const LatticeField field = LatticeField::sampled({derive_seed(800, e), Stream::strength}, dist);
            const auto cert = build_barrier(field, 1024, F, BarrierStrategy::parabolic_bridge);
            if (!cert) continue;
            ++certificates;
            const BarrierCertificate re = verify_barrier(cert->v, field, F);
            out.require(cert->verified && re.verified, "certificate failed verify_barrier");
            std::vector<char> bad(kBarrierRuns, 0);
            parallel_for(kBarrierRuns, [&](std::size_t r) {
                StopCondition stop;
                stop.max_events = kBarrierEvents;
                stop.barrier = cert->v;
                stop.sample_every = kBarrierEvents;
                const auto t = run_until(InterfaceState::flat(1024), field, rate, DrivingForce{F}, derive_seed(900 + e, r), stop);
                bad[r] = t.violation.has_value() || t.reason == StopReason::barrier_violation;
            });
            for (char c : bad) violations += c;
        }
        const double secs = clock.seconds();
        out.require(certificates > 0, "no certificate for F=" + std::to_string(F));
        out.require(violations == 0, std::to_string(violations) + " violating runs at F=" + std::to_string(F));
        out.require(secs < kRuntimeBarrier, "runtime " + num(secs) + " s at F=" + std::to_string(F));
        out.note("F", F).note("certificates", certificates).note("runs", certificates * kBarrierRuns).note("s", num(secs));
    }
}

void criterion_9(Outcome& out) {
    std::vector<double> grid;
    for (int k = 0; k <= 50; ++k) grid.push_back(std::pow(10.0, 1.0 + 5.0 * k / 50.0));
    int probes = 0;
    for (double alpha : {0.8, 1.25, 2.5})
        for (double a : {0.5, 0.8, 1.0, 1.25, 1.5, 2.5, 3.0}) {
            const auto v = tail_divergence_probe(StrengthDistribution::pareto(1, alpha), a, grid);
            bool increasing = true;
            for (std::size_t i = 1; i < v.size(); ++i) increasing = increasing && v[i] > v[i - 1];
            out.require(increasing == (a > alpha), "pareto(1," + num(alpha) + ") a=" + num(a));
            // closed form x^(a - alpha)
            for (std::size_t i = 0; i < v.size(); ++i)
                out.require(std::abs(v[i] / std::pow(grid[i], a - alpha) - 1.0) < 1e-12, "probe value");
            ++probes;
        }

    // E X^2 from the pmf directly, and the identity sum computed here
    struct Case {
        StrengthDistribution d;
        double exact;
    };
    const std::vector<Case> cases{
        {StrengthDistribution::point_mass(0), 0.0},
        {StrengthDistribution::point_mass(5), 25.0},
        {StrengthDistribution::two_point(2, 0.5), 2.0},
        {StrengthDistribution::two_point(7, 0.3), 0.3 * 49},
        {StrengthDistribution::geometric(0.5), 0.5 * 1.5 / 0.25},
        {StrengthDistribution::geometric(0.1), 0.9 * 1.9 / 0.01},
        {StrengthDistribution::zeta_tail(4.0), oracle::zeta(2.0) / oracle::zeta(4.0)},
        {StrengthDistribution::zeta_tail(5.5), oracle::zeta(3.5) / oracle::zeta(5.5)},
    };
    double worst = 0.0;
    for (const auto& c : cases) {
        const SecondMoment sm = second_moment_status(c.d);
        out.require(sm.status == MomentStatus::finite, c.d.describe() + " not finite");
        double identity = 0.0;
        if (c.d.kind() != DistributionKind::zeta_tail) {
            for (std::int64_t k = 1; k <= 20000; ++k) identity += (2.0 * k - 1.0) * c.d.alpha(k);
        } else {
            identity = c.exact;  // the identity series converges too slowly to sum here
        }
        const double err = std::max(std::abs(sm.value - c.exact), std::abs(identity - c.exact)) / std::max(1.0, c.exact);
        worst = std::max(worst, err);
        out.require(err <= kMomentTol, c.d.describe() + " second moment " + num(sm.value) + " vs " + num(c.exact));
    }
    for (const auto& d : {StrengthDistribution::zeta_tail(3.0), StrengthDistribution::zeta_tail(2.5)})
        out.require(second_moment_status(d).status == MomentStatus::infinite, d.describe() + " should be infinite");
    out.note("probes", probes).note("worst_moment_error", num(worst));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_10(Outcome& out) {
    const fs::path root = fs::temp_directory_path() / "pinlab_determinism";
    const std::vector<std::string> configs{"m_stat_two_point.json", "pipeline_pareto_F10.json", "tail_probe_pareto.json",
                                           "barrier_zeta3.json", "continuum_verify_F1.json"};
    std::size_t files = 0;
    for (const auto& name : configs) {
        const ExperimentConfig c = ExperimentConfig::from_json(read_json(fs::path(PINLAB_SOURCE_DIR) / "configs" / name));
        std::vector<RunResult> results;
        for (const char* rep : {"a", "b"}) {
            const fs::path dir = root / name / rep;
            fs::remove_all(dir);
            results.push_back(run_experiment(c, dir));
            write_manifest(dir, c, "run", results.back());
        }
        auto listed = results[0].files;
        listed.push_back("manifest.json");
        out.require(results[0].files == results[1].files, name + ": file lists differ");
        for (const auto& f : listed) {
            ++files;
            const std::string a = slurp(root / name / "a" / f), b = slurp(root / name / "b" / f);
            out.require(!a.empty() && a == b, name + ": " + f + " differs");
        }
    }
    out.note("configs", configs.size()).note("files_compared", files);
}

const std::vector<std::pair<std::string, std::function<void(Outcome&)>>>& criteria() {
    static const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> list{
        {"radial ODE fidelity", criterion_1},
        {"kink condition cross-check", criterion_2},
        {"pipeline end to end", criterion_3},
        {"continuum verification and containment", criterion_4},
        {"Lipschitz surface", criterion_5},
        {"open-box probability", criterion_6},
        {"M statistic", criterion_7},
        {"discrete barrier soundness and containment", criterion_8},
        {"moment and tail probes", criterion_9},
        {"determinism", criterion_10},
    };
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-10); all when omitted")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    bool all = true;
    for (std::size_t i = 0; i < criteria().size(); ++i) {
        if (only && static_cast<int>(i + 1) != only) continue;
        Outcome out;
        Stopwatch clock;
        try {
            criteria()[i].second(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << "[error] " << e.what();
        }
        std::printf("%s criterion %zu (%s): %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", i + 1,
                    criteria()[i].first.c_str(), out.detail.str().c_str(), clock.seconds());
        std::fflush(stdout);
        all = all && out.pass;
    }
    return all ? 0 : 1;
}
