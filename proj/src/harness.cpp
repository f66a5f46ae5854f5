#include "pinlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "pinlab/continuum_dynamics.hpp"
#include "pinlab/discrete_barrier.hpp"
#include "pinlab/discrete_dynamics.hpp"
#include "pinlab/error.hpp"
#include "pinlab/io.hpp"
#include "pinlab/percolation.hpp"
#include "pinlab/svg.hpp"

#ifndef PINLAB_VERSION
#define PINLAB_VERSION "0.0.0"
#endif
#ifndef PINLAB_GIT
#define PINLAB_GIT "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace pinlab {

namespace {

// Typed access to one JSON object with path-qualified errors. Every key read
// is remembered so that finish() can reject the ones nobody asked for.
class Fields {
public:
    Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) fail("", "expected an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& what) const {
        throw ConfigError("config: " + where(key) + ": " + what);
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key) && !obj_.at(key).is_null();
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        if (!has(key)) {
            if (fallback) return *fallback;
            fail(key, "required number is missing");
        }
        const json& v = obj_.at(key);
        if (!v.is_number()) fail(key, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(key, "expected a finite number");
        return x;
    }

    double positive(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const double x = number(key, fallback);
        if (!(x > 0.0)) fail(key, "expected a positive number");
        return x;
    }

    std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt,
                         std::int64_t min = std::numeric_limits<std::int64_t>::min()) {
        if (!has(key)) {
            if (fallback) return *fallback;
            fail(key, "required integer is missing");
        }
        const json& v = obj_.at(key);
        if (!v.is_number()) fail(key, "expected an integer");
        const double x = v.get<double>();
        if (x != std::floor(x) || std::abs(x) > 9.0e15) fail(key, "expected an integer");
        if (x < static_cast<double>(min)) fail(key, "must be >= " + std::to_string(min));
        return static_cast<std::int64_t>(x);
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        if (!has(key)) {
            if (fallback) return *fallback;
            fail(key, "required string is missing");
        }
        if (!obj_.at(key).is_string()) fail(key, "expected a string");
        return obj_.at(key).get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
        if (!has(key)) {
            if (fallback) return *fallback;
            fail(key, "required array is missing");
        }
        const json& v = obj_.at(key);
        if (!v.is_array()) fail(key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) fail(key, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::int64_t> integers(const std::string& key, std::optional<std::vector<std::int64_t>> fallback,
                                       std::int64_t min) {
        if (!has(key)) {
            if (fallback) return *fallback;
            fail(key, "required array is missing");
        }
        std::vector<std::int64_t> out;
        for (double x : numbers(key)) {
            if (x != std::floor(x) || x < static_cast<double>(min))
                fail(key, "expected integers >= " + std::to_string(min));
            out.push_back(static_cast<std::int64_t>(x));
        }
        return out;
    }

    std::optional<Fields> object(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return Fields(obj_.at(key), where(key));
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    void finish() const {
        for (const auto& [key, value] : obj_.items())
            if (!seen_.count(key)) fail(key, "unknown field");
    }

private:
    std::string where(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

const StrengthDistribution& need_distribution(const ExperimentConfig& c) {
    if (!c.distribution) throw ConfigError("config: distribution: required for experiment " + to_string(c.kind));
    return *c.distribution;
}

RateFunction read_rate(Fields& p) {
    auto r = p.object("rate");
    if (!r) return RateFunction::saturating(1.0);
    const std::string kind = r->string("kind", "saturating");
    RateFunction out = RateFunction::saturating(1.0);
    if (kind == "saturating") out = RateFunction::saturating(r->positive("scale", 1.0));
    else if (kind == "tanh_scaled") out = RateFunction::tanh_scaled(r->positive("beta", 1.0));
    else r->fail("kind", "expected saturating or tanh_scaled");
    r->finish();
    return out;
}

std::string fixed(double x) { return format_number(x); }

CheckResult check(std::string name, bool pass, std::string detail) { return {std::move(name), pass, std::move(detail)}; }

std::string moment_string(MomentStatus s) {
    switch (s) {
        case MomentStatus::finite: return "finite";
        case MomentStatus::infinite: return "infinite";
        case MomentStatus::unknown: break;
    }
    return "unknown";
}

std::vector<double> log_grid(double from, double to, int points) {
    std::vector<double> xs;
    for (int i = 0; i < points; ++i)
        xs.push_back(std::exp(std::log(from) + (std::log(to) - std::log(from)) * i / std::max(1, points - 1)));
    return xs;
}

// ---------------------------------------------------------------------------

RunResult run_discrete_sim(const ExperimentConfig& c, const fs::path& out) {
    const auto& dist = need_distribution(c);
    Fields p(c.params, "params");
    const auto width = static_cast<std::size_t>(p.integer("width", 256, 3));
    const std::int64_t F = p.integer("F", 1);
    const RateFunction rate = read_rate(p);
    const auto runs = static_cast<std::size_t>(p.integer("runs", 8, 1));
    StopCondition stop;
    stop.max_events = p.integer("max_events", 100000, 1);
    stop.height_cap = p.integer("height_cap", 64, 1);
    if (p.has("max_time")) stop.max_time = p.positive("max_time");
    stop.sample_every = p.integer("sample_every", 1000, 1);
    p.finish();

    std::vector<TrajectorySummary> results(runs);
    parallel_for(runs, [&](std::size_t r) {
        const std::uint64_t s = derive_seed(c.seed, r);
        const LatticeField field = LatticeField::sampled({s, Stream::strength}, dist);
        results[r] = run_until(InterfaceState::flat(width), field, rate, DrivingForce{F}, s, stop);
    });

    RunResult res;
    CsvTable traj({"run", "time", "events", "max_height", "mean_height"});
    CsvTable summary({"run", "seed", "reason", "events", "time", "final_max_height", "final_mean_height"});
    std::vector<PlotSeries> series;
    std::size_t pinned = 0;
    for (std::size_t r = 0; r < runs; ++r) {
        const auto& t = results[r];
        PlotSeries s{"run " + std::to_string(r), {}, {}, true};
        for (const auto& row : t.samples) {
            traj.row() << r << row.time << row.events << row.max_height << row.mean_height;
            s.x.push_back(row.time);
            s.y.push_back(static_cast<double>(row.max_height));
        }
        const auto& h = t.final_state.heights;
        const auto top = *std::max_element(h.begin(), h.end());
        double mean = 0.0;
        for (auto v : h) mean += static_cast<double>(v);
        mean /= static_cast<double>(h.size());
        summary.row() << r << std::to_string(derive_seed(c.seed, r)) << to_string(t.reason)
                      << t.final_state.event_count << t.final_state.time << top << mean;
        if (t.reason != StopReason::height_cap) ++pinned;
        if (series.size() < 6) series.push_back(std::move(s));
    }
    traj.write(out / "trajectory.csv");
    summary.write(out / "runs.csv");
    write_text(out / "max_height.svg",
               line_plot({"Interface max height", "time", "max height", false, false}, series));
    res.files = {"trajectory.csv", "runs.csv", "max_height.svg"};
    const SecondMoment sm = second_moment_status(dist);
    res.summary["pinned_fraction"] = static_cast<double>(pinned) / static_cast<double>(runs);
    res.summary["second_moment_status"] = moment_string(sm.status);
    res.summary["runs"] = runs;
    return res;
}

RunResult run_m_stat(const ExperimentConfig& c, const fs::path& out) {
    const auto& dist = need_distribution(c);
    Fields p(c.params, "params");
    auto checkpoints = p.integers("checkpoints", std::vector<std::int64_t>{100, 1000, 10000, 100000}, 1);
    const std::int64_t samples = p.integer("samples", 100000, 2);
    auto tail_n = p.integers("tail_n", std::vector<std::int64_t>{1, 2, 3, 4, 5, 6, 7, 8}, 1);
    const double sigmas = p.positive("sigmas", 4.0);
    p.finish();
    if (checkpoints.empty()) p.fail("checkpoints", "must not be empty");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
        std::adjacent_find(checkpoints.begin(), checkpoints.end()) != checkpoints.end())
        p.fail("checkpoints", "must be strictly increasing");

    const NestedMSampler sampler(dist, checkpoints);
    const std::size_t K = checkpoints.size();
    const std::int64_t Jmax = checkpoints.back();
    std::vector<double> sum(K, 0.0), sum2(K, 0.0), inc(K, 0.0), inc2(K, 0.0);
    std::vector<double> tail_hits(tail_n.size(), 0.0);
    for (std::int64_t s = 0; s < samples; ++s) {
        const auto m = sampler.draw(c.seed, s);
        for (std::size_t k = 0; k < K; ++k) {
            const auto x = static_cast<double>(m[k]);
            sum[k] += x;
            sum2[k] += x * x;
            if (k + 1 < K) {
                const auto d = static_cast<double>(m[k + 1] - m[k]);
                inc[k] += d;
                inc2[k] += d * d;
            }
        }
        for (std::size_t i = 0; i < tail_n.size(); ++i)
            if (m[K - 1] >= tail_n[i]) tail_hits[i] += 1.0;
    }
    const auto N = static_cast<double>(samples);
    auto se = [&](double s1, double s2) {
        const double mean = s1 / N;
        return std::sqrt(std::max(0.0, s2 / N - mean * mean) / (N - 1.0));
    };
    // E M_J = sum_{n >= 1} P(M_J >= n) when the terms die out quickly enough
    auto exact_mean = [&](std::int64_t J) -> std::optional<double> {
        double total = 0.0;
        for (std::int64_t n = 1; n <= 4096; ++n) {
            const double t = m_tail_exact(dist, n, J);
            total += t;
            if (t < 1e-15) return total;
        }
        return std::nullopt;
    };

    RunResult res;
    CsvTable growth({"J", "mean", "std_error", "exact_mean", "increment_to_next", "increment_std_error"});
    PlotSeries mc{"Monte Carlo mean", {}, {}}, ex{"exact", {}, {}};
    bool mean_ok = true, increasing = true;
    std::ostringstream mean_detail;
    for (std::size_t k = 0; k < K; ++k) {
        const double mean = sum[k] / N, err = se(sum[k], sum2[k]);
        const auto exact = exact_mean(checkpoints[k]);
        auto row = growth.row();
        row << checkpoints[k] << mean << err << (exact ? fixed(*exact) : std::string("nan"));
        if (k + 1 < K) {
            const double d = inc[k] / N, derr = se(inc[k], inc2[k]);
            row << d << derr;
            if (!(d > 0.0)) increasing = false;
        } else {
            row << "nan" << "nan";
        }
        mc.x.push_back(static_cast<double>(checkpoints[k]));
        mc.y.push_back(mean);
        if (exact) {
            ex.x.push_back(static_cast<double>(checkpoints[k]));
            ex.y.push_back(*exact);
            if (std::abs(mean - *exact) > sigmas * err + 1e-12) {
                mean_ok = false;
                mean_detail << "J=" << checkpoints[k] << " mean " << fixed(mean) << " exact " << fixed(*exact) << "; ";
            }
        }
    }
    growth.write(out / "m_growth.csv");

    CsvTable tail({"n", "J", "frequency", "std_error", "exact", "lower_bound", "upper_bound"});
    bool bounds_ok = true;
    std::ostringstream bound_detail;
    for (std::size_t i = 0; i < tail_n.size(); ++i) {
        const double f = tail_hits[i] / N;
        const double err = std::sqrt(f * (1.0 - f) / N);
        const MStatBounds b = m_bounds(dist, tail_n[i]);
        tail.row() << tail_n[i] << Jmax << f << err << m_tail_exact(dist, tail_n[i], Jmax)
                   << (b.lower ? fixed(*b.lower) : std::string("nan")) << b.upper;
        const double slack = sigmas * std::max(err, 1.0 / N);
        if (b.lower && (f < *b.lower - slack || f > b.upper + slack)) {
            bounds_ok = false;
            bound_detail << "n=" << tail_n[i] << " frequency " << fixed(f) << "; ";
        }
    }
    tail.write(out / "m_tail.csv");
    write_text(out / "m_growth.svg",
               line_plot({"Mean of the M statistic", "J", "E M_J", true, false}, {mc, ex}));
    res.files = {"m_growth.csv", "m_tail.csv", "m_growth.svg"};

    if (!ex.x.empty()) res.checks.push_back(check("mean_matches_exact", mean_ok, mean_detail.str()));
    res.checks.push_back(check("tail_within_bounds", bounds_ok, bound_detail.str()));
    const SecondMoment sm = second_moment_status(dist);
    if (sm.status == MomentStatus::infinite && K > 1)
        res.checks.push_back(check("means_increasing", increasing, "second moment infinite"));
    res.summary["mean_at_largest_J"] = sum[K - 1] / N;
    res.summary["second_moment_status"] = moment_string(sm.status);
    return res;
}

RunResult run_tail_probe(const ExperimentConfig& c, const fs::path& out) {
    const auto& dist = need_distribution(c);
    Fields p(c.params, "params");
    const auto exponents = p.numbers("exponents");
    const double from = p.positive("x_from", 10.0), to = p.positive("x_to", 1e6);
    const auto points = static_cast<int>(p.integer("points", 51, 2));
    p.finish();
    if (exponents.empty()) p.fail("exponents", "must not be empty");
    if (!(to > from)) p.fail("x_to", "must exceed x_from");

    const auto xs = log_grid(from, to, points);
    RunResult res;
    CsvTable t({"exponent", "x", "value"});
    std::vector<PlotSeries> series;
    for (double a : exponents) {
        const auto v = tail_divergence_probe(dist, a, xs);
        bool up = true, down = true;
        for (std::size_t i = 0; i < v.size(); ++i) {
            t.row() << a << xs[i] << v[i];
            if (i > 0) {
                up = up && v[i] > v[i - 1];
                down = down && v[i] <= v[i - 1];
            }
        }
        res.summary["increasing_a=" + fixed(a)] = up;
        series.push_back({"a = " + fixed(a), xs, v});
    }
    t.write(out / "tail_probe.csv");
    const SecondMoment sm = second_moment_status(dist);
    json moment{{"status", moment_string(sm.status)},
                {"value", sm.status == MomentStatus::finite ? json(sm.value) : json(nullptr)},
                {"partial_sums", json::array()},
                {"config", c.raw}};
    for (std::int64_t K = 10; K <= 100000; K *= 10)
        moment["partial_sums"].push_back({{"K", K}, {"sum", second_moment_partial_sum(dist, K)}});
    write_json(out / "second_moment.json", moment);
    write_text(out / "tail_probe.svg", line_plot({"x^a P(X >= x)", "x", "value", true, true}, series));
    res.files = {"tail_probe.csv", "second_moment.json", "tail_probe.svg"};
    res.summary["second_moment_status"] = moment_string(sm.status);
    return res;
}

RunResult run_percolation(const ExperimentConfig& c, const fs::path& out) {
    Fields p(c.params, "params");
    const auto extents = p.integers("extents", std::vector<std::int64_t>{512}, 1);
    const std::int64_t H = p.integer("height_budget", 10000, 1);
    const double prob = p.number("p", 0.95);
    const auto seeds = static_cast<std::size_t>(p.integer("seeds", 100, 1));
    p.finish();
    if (extents.empty()) p.fail("extents", "must not be empty");
    if (!(prob >= 0.0 && prob <= 1.0)) p.fail("p", "must lie in [0, 1]");

    struct Outcome {
        std::optional<LipschitzSurface> surface;
        bool check = true;
    };
    std::vector<Outcome> outcomes(seeds);
    parallel_for(seeds, [&](std::size_t s) {
        const SiteField field = SiteField::bernoulli(extents, H, prob, derive_seed(c.seed, s));
        outcomes[s].surface = find_minimal_surface(field);
        if (outcomes[s].surface) outcomes[s].check = surface_check(*outcomes[s].surface, field).ok;
    });

    RunResult res;
    CsvTable t({"seed_index", "seed", "found", "max_L", "mean_L", "surface_check"});
    std::size_t found = 0;
    bool checks = true;
    std::optional<std::size_t> first;
    for (std::size_t s = 0; s < seeds; ++s) {
        const auto& o = outcomes[s];
        auto row = t.row();
        row << s << std::to_string(derive_seed(c.seed, s)) << o.surface.has_value();
        if (o.surface) {
            ++found;
            if (!first) first = s;
            const auto& L = o.surface->L;
            double mean = 0.0;
            for (auto v : L) mean += static_cast<double>(v);
            row << *std::max_element(L.begin(), L.end()) << mean / static_cast<double>(L.size()) << o.check;
            checks = checks && o.check;
        } else {
            row << "nan" << "nan" << "nan";
        }
    }
    t.write(out / "percolation.csv");
    res.files = {"percolation.csv"};
    if (first) {
        json s = outcomes[*first].surface->to_json();
        s["seed_index"] = *first;
        s["config"] = c.raw;
        write_json(out / "surface.json", s);
        res.files.push_back("surface.json");
        if (extents.size() == 1) {
            PlotSeries ser{"L", {}, {}, true};
            const auto& L = outcomes[*first].surface->L;
            for (std::size_t i = 0; i < L.size(); ++i) {
                ser.x.push_back(static_cast<double>(i));
                ser.y.push_back(static_cast<double>(L[i]));
            }
            write_text(out / "surface.svg", line_plot({"Minimal Lipschitz surface", "column", "L", false, false}, {ser}));
            res.files.push_back("surface.svg");
        }
    }
    res.checks.push_back(check("surface_check", checks, ""));
    res.summary["surface_frequency"] = static_cast<double>(found) / static_cast<double>(seeds);
    res.summary["threshold"] = percolation_threshold(static_cast<int>(extents.size()));
    return res;
}

RunResult run_barrier(const ExperimentConfig& c, const fs::path& out) {
    const auto& dist = need_distribution(c);
    Fields p(c.params, "params");
    const auto W = static_cast<std::size_t>(p.integer("width", 1024, 3));
    const std::int64_t F = p.integer("F", 1);
    const BarrierStrategy strategy = barrier_strategy_from_string(p.string("strategy", "parabolic_bridge"));
    BarrierBudget budget;
    budget.height_budget = p.integer("height_budget", 128, 2);
    budget.start_attempts = static_cast<int>(p.integer("start_attempts", 16, 1));
    const auto seeds = static_cast<std::size_t>(p.integer("seeds", 10, 1));
    const auto kmc_runs = static_cast<std::size_t>(p.integer("kmc_runs", 0, 0));
    const std::int64_t kmc_events = p.integer("kmc_events", 1000000, 1);
    const RateFunction rate = read_rate(p);
    p.finish();

    struct Outcome {
        std::optional<BarrierCertificate> cert;
        std::size_t violations = 0;
    };
    std::vector<Outcome> outcomes(seeds);
    parallel_for(seeds, [&](std::size_t e) {
        const std::uint64_t env = derive_seed(c.seed, e);
        const LatticeField field = LatticeField::sampled({env, Stream::strength}, dist);
        auto& o = outcomes[e];
        o.cert = build_barrier(field, W, F, strategy, budget);
        if (!o.cert) return;
        o.cert->seed = env;
        StopCondition stop;
        stop.max_events = kmc_events;
        stop.barrier = o.cert->v;
        stop.sample_every = kmc_events;
        for (std::size_t r = 0; r < kmc_runs; ++r) {
            const auto t = run_until(InterfaceState::flat(W), field, rate, DrivingForce{F}, derive_seed(env, r), stop);
            if (t.violation) ++o.violations;
        }
    });

    RunResult res;
    CsvTable t({"env", "seed", "found", "verified", "v_min", "v_max", "kmc_runs", "violating_runs"});
    std::size_t found = 0, violating = 0;
    bool verified = true;
    std::optional<std::size_t> first;
    for (std::size_t e = 0; e < seeds; ++e) {
        const auto& o = outcomes[e];
        auto row = t.row();
        row << e << std::to_string(derive_seed(c.seed, e)) << o.cert.has_value();
        if (o.cert) {
            ++found;
            if (!first) first = e;
            verified = verified && o.cert->verified;
            violating += o.violations;
            row << o.cert->verified << *std::min_element(o.cert->v.begin(), o.cert->v.end())
                << *std::max_element(o.cert->v.begin(), o.cert->v.end()) << kmc_runs << o.violations;
        } else {
            row << "nan" << "nan" << "nan" << std::int64_t{0} << std::int64_t{0};
        }
    }
    t.write(out / "barrier.csv");
    res.files = {"barrier.csv"};
    if (first) {
        json j = outcomes[*first].cert->to_json();
        j["config"] = c.raw;
        write_json(out / "certificate.json", j);
        PlotSeries s{"v", {}, {}, true};
        const auto& v = outcomes[*first].cert->v;
        for (std::size_t i = 0; i < v.size(); ++i) {
            s.x.push_back(static_cast<double>(i));
            s.y.push_back(static_cast<double>(v[i]));
        }
        write_text(out / "certificate.svg", line_plot({"Stationary barrier", "site", "v", false, false}, {s}));
        res.files.push_back("certificate.json");
        res.files.push_back("certificate.svg");
    }
    res.checks.push_back(check("certificates_verified", verified, std::to_string(found) + " certificates"));
    if (kmc_runs > 0)
        res.checks.push_back(check("no_barrier_violation", violating == 0, std::to_string(violating) + " violating runs"));
    res.summary["found_fraction"] = static_cast<double>(found) / static_cast<double>(seeds);
    res.summary["violating_runs"] = violating;
    return res;
}

struct PipelineSetup {
    double F = 1.0;
    int n = 1;
    double lambda = 1.0, r0 = 0.5, r1 = 0.75;
    std::optional<double> C1;
    int max_escalations = 400;
    std::optional<json> manual;
};

PipelineSetup read_pipeline(Fields& p) {
    PipelineSetup s;
    s.F = p.positive("F", 1.0);
    s.n = static_cast<int>(p.integer("n", 1, 1));
    s.lambda = p.positive("lambda", 1.0);
    s.r0 = p.positive("r0", 0.5);
    s.r1 = p.positive("r1", 0.75);
    if (p.has("C1")) s.C1 = p.positive("C1");
    s.max_escalations = static_cast<int>(p.integer("max_escalations", 400, 0));
    if (p.has("manual")) s.manual = p.raw("manual");
    return s;
}

PipelineParams make_params(const PipelineSetup& s, const StrengthDistribution& dist) {
    const double C1 = s.C1 ? *s.C1 : lifting_constant(s.n);
    if (!s.manual) {
        PlanOptions o;
        o.max_escalations = s.max_escalations;
        return plan_parameters(s.F, s.n, s.lambda, s.r0, s.r1, dist, C1, o);
    }
    Fields m(*s.manual, "params.manual");
    PipelineParams p;
    p.n = s.n;
    p.lambda = s.lambda;
    p.r0 = s.r0;
    p.r1 = s.r1;
    p.F = s.F;
    p.C1 = C1;
    p.M = m.positive("M");
    p.m = m.number("m");
    p.l = m.positive("l");
    p.d = m.positive("d");
    p.h = m.positive("h");
    m.finish();
    p.origin = "manual";
    evaluate_checks(p, dist.tail(p.M));
    return p;
}

void write_profile(const PipelineParams& p, const fs::path& out, RunResult& res) {
    const LocalProfile prof = p.profile();
    CsvTable t({"r", "v_local", "slope", "zone"});
    PlotSeries inner{"inner", {}, {}}, outer{"outer", {}, {}};
    const int N = 400;
    for (int i = 0; i <= N; ++i) {
        const double r = prof.r_out() * i / N;
        const double v = prof.value(r);
        const bool in = r < prof.r_in();
        t.row() << r << v << prof.d1(r) << (in ? "inner" : "outer");
        (in ? inner : outer).x.push_back(r);
        (in ? inner : outer).y.push_back(v);
    }
    // the inner part is tiny next to r_out; sample it on its own scale too
    for (int i = 0; i <= 100; ++i) {
        const double r = prof.r_in() * i / 100.0;
        t.row() << r << prof.value(r) << prof.d1(r) << "inner";
    }
    t.write(out / "profile.csv");
    write_text(out / "profile.svg", line_plot({"Local radial profile", "r", "v_local", false, false}, {inner, outer}));
    res.files.push_back("profile.csv");
    res.files.push_back("profile.svg");
}

RunResult run_pipeline(const ExperimentConfig& c, const fs::path& out) {
    const auto& dist = need_distribution(c);
    Fields p(c.params, "params");
    const PipelineSetup s = read_pipeline(p);
    p.finish();
    RunResult res;
    PipelineParams params;
    try {
        params = make_params(s, dist);
    } catch (const HypothesisNotWitnessed& e) {
        write_json(out / "error.json", {{"error", e.what()}, {"largest_probe", e.largest_probe()}, {"config", c.raw}});
        res.files = {"error.json"};
        res.checks.push_back(check("all_rechecks", false, e.what()));
        return res;
    }
    json j = params.to_json();
    j["config"] = c.raw;
    write_json(out / "params.json", j);
    CsvTable t({"check", "pass", "value", "bound", "relation"});
    for (const auto& k : params.checks) t.row() << k.name << k.pass << k.value << k.bound << k.relation;
    t.write(out / "checks.csv");
    res.files = {"params.json", "checks.csv"};
    write_profile(params, out, res);
    std::string failed;
    for (const auto& k : params.checks)
        if (!k.pass) failed += k.name + " ";
    res.checks.push_back(check("all_rechecks", params.all_pass(), failed));
    res.summary["ceiling"] = params.ceiling;
    res.summary["M"] = params.M;
    res.summary["open_probability"] = params.open_probability;
    res.summary["escalations"] = params.escalations;
    return res;
}

struct Built {
    PipelineParams params;
    ObstacleSet obstacles;
    std::optional<ForceField> field;
    std::optional<SupersolutionAssembly> assembly;
};

Built build_assembly(const ExperimentConfig& c, Fields& p, std::vector<std::int64_t>& extents, std::int64_t& H,
                     bool& strong_only) {
    const auto& dist = need_distribution(c);
    const PipelineSetup s = read_pipeline(p);
    extents = p.integers("extents", std::vector<std::int64_t>(static_cast<std::size_t>(s.n), s.n == 1 ? 24 : 7), 1);
    H = p.integer("height_budget", 64, 1);
    const std::string field_kind = p.string("field", s.manual ? "full" : "strong");
    if (field_kind != "strong" && field_kind != "full") p.fail("field", "expected strong or full");
    strong_only = field_kind == "strong";
    if (static_cast<int>(extents.size()) != s.n) p.fail("extents", "needs one entry per base axis");

    Built b;
    b.params = make_params(s, dist);
    const ObstacleBox box = assembly_box(b.params, extents, H);
    b.obstacles = sample_obstacles(box, b.params.lambda, dist, c.seed, strong_only ? b.params.M : 0.0);
    const AssemblyInputs in = open_boxes(b.params, extents, H, b.obstacles);
    const auto surface = find_minimal_surface(in.sites);
    if (!surface) throw AssemblyError("no Lipschitz surface of open boxes below the height budget");
    b.assembly.emplace(assemble(b.params, *surface, b.obstacles));
    b.field.emplace(b.obstacles, BumpShape::make(b.params.r0, b.params.r1, b.params.n));
    return b;
}

VerifyOptions read_verify(Fields& p) {
    VerifyOptions o;
    if (auto v = p.object("verify")) {
        o.tolerance = v->positive("tolerance", o.tolerance);
        o.fine_per_r0 = static_cast<int>(v->integer("fine_per_r0", o.fine_per_r0, 1));
        o.coarse_points = static_cast<int>(v->integer("coarse_points", o.coarse_points, 4));
        o.geometric_per_octave = static_cast<int>(v->integer("geometric_per_octave", o.geometric_per_octave, 1));
        o.F_override = v->number("F_override", o.F_override);
        v->finish();
    }
    return o;
}

void write_cross_section(const SupersolutionAssembly& a, const fs::path& out, RunResult& res) {
    CsvTable t({"cell", "offset", "v_minus_anchor", "zone"});
    PlotSeries s{"v - y(anchor)", {}, {}};
    const std::size_t cells = std::min<std::size_t>(a.anchors().size(), 4);
    const double pitch = a.lift().pitch();
    for (std::size_t c = 0; c < cells; ++c) {
        for (int i = 0; i <= 200; ++i) {
            BasePoint off{pitch * (i / 200.0 - 0.5), 0.0};
            const auto e = a.eval({c, off});
            t.row() << c << off[0] << e.value << e.zone;
            s.x.push_back(static_cast<double>(c) * pitch + off[0]);
            s.y.push_back(e.value);
        }
    }
    t.write(out / "cross_section.csv");
    write_text(out / "cross_section.svg",
               line_plot({"Supersolution near the anchors", "distance along the cells", "v - y_anchor", false, false},
                         {s}));
    res.files.push_back("cross_section.csv");
    res.files.push_back("cross_section.svg");
}

RunResult run_continuum(const ExperimentConfig& c, const fs::path& out, bool containment) {
    Fields p(c.params, "params");
    std::vector<std::int64_t> extents;
    std::int64_t H = 0;
    bool strong_only = true;
    // read every option before the expensive part so config errors surface first
    const VerifyOptions vopt = read_verify(p);
    ContainmentOptions copt;
    std::array<std::int64_t, 2> points{512, 64};
    if (containment) {
        copt.horizon = p.positive("horizon", 100.0);
        copt.c = p.positive("c", 1.0);
        copt.samples = static_cast<int>(p.integer("samples", 200, 2));
        auto g = p.integers("grid", std::nullopt, 3);
        if (g.empty() || g.size() > 2) p.fail("grid", "expected one or two node counts");
        points = {g[0], g.size() > 1 ? g[1] : g[0]};
    }
    Built b = build_assembly(c, p, extents, H, strong_only);
    p.finish();

    RunResult res;
    json pj = b.params.to_json();
    pj["config"] = c.raw;
    write_json(out / "params.json", pj);
    json aj = b.assembly->to_json();
    aj["config"] = c.raw;
    write_json(out / "assembly.json", aj);
    json fj = field_to_json(*b.field);
    fj["strong_only"] = strong_only;
    write_json(out / "field.json", fj);
    res.files = {"params.json", "assembly.json", "field.json"};

    const VerifyReport rep = verify_supersolution(*b.assembly, *b.field, vopt);
    json rj = rep.to_json();
    rj["config"] = c.raw;
    write_json(out / "verify.json", rj);
    res.files.push_back("verify.json");
    write_cross_section(*b.assembly, out, res);
    res.checks.push_back(check("parameters", b.params.all_pass(), ""));
    res.checks.push_back(check("verify", rep.pass,
                               "worst excess " + fixed(rep.worst_excess) + ", failures " +
                                   std::to_string(rep.failure_count)));
    res.summary["obstacles"] = b.obstacles.obstacles.size();
    res.summary["verify_worst_excess"] = rep.worst_excess;
    res.summary["ceiling"] = b.params.ceiling;

    if (containment) {
        GridState grid = make_grid(b.obstacles.box, points);
        const ContainmentReport cr = containment_run(*b.field, b.params.F, *b.assembly, std::move(grid), copt);
        json cj = cr.to_json();
        cj["config"] = c.raw;
        write_json(out / "containment.json", cj);
        CsvTable t({"t", "max_u", "mean_u", "sup_u_minus_v"});
        PlotSeries s{"max u", {}, {}};
        for (const auto& row : cr.series) {
            t.row() << row.t << row.max_u << row.mean_u << row.sup_gap;
            s.x.push_back(row.t);
            s.y.push_back(row.max_u);
        }
        t.write(out / "trajectory.csv");
        write_text(out / "trajectory.svg", line_plot({"Continuum interface height", "t", "max u", false, false}, {s}));
        res.files.push_back("containment.json");
        res.files.push_back("trajectory.csv");
        res.files.push_back("trajectory.svg");
        res.checks.push_back(check("containment", cr.pass,
                                   "sup(u - v) " + fixed(cr.sup_gap) + " vs " + fixed(cr.tolerance)));
        res.checks.push_back(check("plateau", cr.plateau, "late growth " + fixed(cr.late_growth)));
        res.summary["sup_gap"] = cr.sup_gap;
        res.summary["final_max_u"] = cr.final_max_u;
        res.summary["late_growth"] = cr.late_growth;
    }
    return res;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::discrete_sim: return "discrete-sim";
        case ExperimentKind::m_stat: return "m-stat";
        case ExperimentKind::barrier: return "barrier";
        case ExperimentKind::percolation: return "percolation";
        case ExperimentKind::pipeline: return "pipeline";
        case ExperimentKind::continuum_verify: return "continuum-verify";
        case ExperimentKind::containment: return "containment";
        case ExperimentKind::tail_probe: return "tail-probe";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (auto k : {ExperimentKind::discrete_sim, ExperimentKind::m_stat, ExperimentKind::barrier,
                   ExperimentKind::percolation, ExperimentKind::pipeline, ExperimentKind::continuum_verify,
                   ExperimentKind::containment, ExperimentKind::tail_probe})
        if (to_string(k) == s) return k;
    throw ConfigError("config: experiment: unknown kind \"" + s + "\"");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    Fields f(j, "");
    ExperimentConfig c;
    c.raw = j;
    c.kind = experiment_kind_from_string(f.string("experiment"));
    c.seed = static_cast<std::uint64_t>(f.integer("seed", 0, 0));
    if (f.has("distribution")) {
        try {
            c.distribution = StrengthDistribution::from_json(f.raw("distribution"));
        } catch (const Error& e) {
            throw ConfigError(std::string("config: distribution: ") + e.what());
        }
    }
    if (f.has("params")) {
        c.params = f.raw("params");
        if (!c.params.is_object()) f.fail("params", "expected an object");
    }
    if (auto s = f.object("sweep")) {
        const json& raw = f.raw("sweep");
        if (raw.size() != 1) s->fail("", "expected exactly one of \"F\" or \"p\"");
        const std::string key = raw.items().begin().key();
        if (key != "F" && key != "p") s->fail(key, "sweepable fields are F and p");
        auto grid = s->numbers(key);
        if (grid.empty()) s->fail(key, "grid must not be empty");
        s->finish();
        c.sweep = std::make_pair(key, std::move(grid));
    }
    if (f.has("require")) {
        const json& r = f.raw("require");
        if (!r.is_array()) f.fail("require", "expected an array of check names");
        for (const auto& e : r) {
            if (!e.is_string()) f.fail("require", "expected an array of check names");
            c.require.push_back(e.get<std::string>());
        }
    }
    f.finish();
    return c;
}

bool RunResult::passed(const std::vector<std::string>& require) const {
    if (require.empty())
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
    for (const auto& name : require) {
        auto it = std::find_if(checks.begin(), checks.end(), [&](const CheckResult& c) { return c.name == name; });
        if (it == checks.end() || !it->pass) return false;
    }
    return true;
}

RunResult run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    switch (config.kind) {
        case ExperimentKind::discrete_sim: return run_discrete_sim(config, out_dir);
        case ExperimentKind::m_stat: return run_m_stat(config, out_dir);
        case ExperimentKind::barrier: return run_barrier(config, out_dir);
        case ExperimentKind::percolation: return run_percolation(config, out_dir);
        case ExperimentKind::pipeline: return run_pipeline(config, out_dir);
        case ExperimentKind::continuum_verify: return run_continuum(config, out_dir, false);
        case ExperimentKind::containment: return run_continuum(config, out_dir, true);
        case ExperimentKind::tail_probe: return run_tail_probe(config, out_dir);
    }
    throw ConfigError("config: experiment: unsupported kind");
}

RunResult run_sweep(const ExperimentConfig& config, const fs::path& out_dir) {
    if (!config.sweep) throw ConfigError("config: sweep: missing grid");
    const auto& [key, grid] = *config.sweep;
    fs::create_directories(out_dir);

    struct Point {
        std::optional<RunResult> result;
        std::string error;
    };
    std::vector<Point> points(grid.size());
    parallel_for(grid.size(), [&](std::size_t k) {
        ExperimentConfig c = config;
        c.sweep.reset();
        c.params[key] = grid[k];
        c.raw.erase("sweep");
        c.raw["params"] = c.params;
        char name[32];
        std::snprintf(name, sizeof name, "point_%03zu", k);
        try {
            points[k].result = run_experiment(c, out_dir / name);
            write_manifest(out_dir / name, c, "run", *points[k].result);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            points[k].error = e.what();
        }
    });

    std::set<std::string> keys;
    for (const auto& p : points)
        if (p.result)
            for (const auto& [k, v] : p.result->summary.items()) keys.insert(k);
    std::vector<std::string> header{key, "status", "checks_pass", "error"};
    header.insert(header.end(), keys.begin(), keys.end());
    CsvTable t(header);
    RunResult res;
    bool all = true;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        auto row = t.row();
        row << grid[k];
        const auto& p = points[k];
        if (!p.result) {
            all = false;
            row << "error" << false << p.error;
            for (std::size_t i = 0; i < keys.size(); ++i) row << "";
            continue;
        }
        const bool pass = p.result->passed(config.require);
        all = all && pass;
        row << "ok" << pass << "";
        for (const auto& name : keys) {
            if (!p.result->summary.contains(name)) {
                row << "";
                continue;
            }
            const json& v = p.result->summary.at(name);
            if (v.is_number()) row << v.get<double>();
            else if (v.is_boolean()) row << v.get<bool>();
            else row << (v.is_string() ? v.get<std::string>() : v.dump());
        }
        char name[32];
        std::snprintf(name, sizeof name, "point_%03zu/", k);
        for (const auto& f : p.result->files) res.files.push_back(name + f);
        res.files.push_back(std::string(name) + "manifest.json");
    }
    t.write(out_dir / "sweep.csv");
    res.files.insert(res.files.begin(), "sweep.csv");
    res.checks.push_back(check("all_points", all, ""));
    return res;
}

void write_manifest(const fs::path& out_dir, const ExperimentConfig& config, const std::string& command,
                    const RunResult& result) {
    json m;
    m["tool"] = "pinlab";
    m["version"] = tool_version();
    m["git"] = PINLAB_GIT;
    m["command"] = command;
    m["experiment"] = to_string(config.kind);
    m["seed"] = config.seed;
    m["rate_convention"] = "lambda = Lambda(lap1 u - f(i, u(i)) + F)";
    m["config"] = config.raw;
    std::vector<std::string> files = result.files;
    std::sort(files.begin(), files.end());
    m["files"] = files;
    auto& checks = m["checks"] = json::array();
    for (const auto& c : result.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    m["summary"] = result.summary;
    m["pass"] = result.passed(config.require);
    write_json(out_dir / "manifest.json", m);
}

json field_to_json(const ForceField& field) {
    return {{"obstacle_set", field.obstacles().to_json()},
            {"shape", {{"r0", field.shape().r0()}, {"r1", field.shape().r1()}, {"n", field.shape().n()}}}};
}

ForceField field_from_json(const json& j) {
    ObstacleSet set = ObstacleSet::from_json(j.at("obstacle_set"));
    const json& s = j.at("shape");
    return ForceField(std::move(set), BumpShape::make(s.at("r0").get<double>(), s.at("r1").get<double>(),
                                                     s.at("n").get<int>()));
}

std::size_t worker_count() {
    if (const char* env = std::getenv("PINLAB_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    thread_local bool inside_pool = false;
    const std::size_t workers = inside_pool ? 1 : std::min(worker_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto work = [&] {
        inside_pool = true;
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
        inside_pool = false;
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(mix64(base) ^ mix64(index + 0x243f6a8885a308d3ULL));
}

std::string tool_version() { return PINLAB_VERSION; }

int command_run(const fs::path& config, const fs::path& out, std::ostream& log) {
    const ExperimentConfig c = ExperimentConfig::from_json(read_json(config));
    if (c.sweep) throw ConfigError("config: sweep: use `pinlab sweep` for configs with a grid");
    const RunResult r = run_experiment(c, out);
    write_manifest(out, c, "run", r);
    for (const auto& k : r.checks)
        log << (k.pass ? "PASS " : "FAIL ") << k.name << (k.detail.empty() ? "" : "  " + k.detail) << "\n";
    log << "wrote " << r.files.size() + 1 << " files to " << out.string() << "\n";
    return r.passed(c.require) ? 0 : 1;
}

int command_sweep(const fs::path& config, const fs::path& out, std::ostream& log) {
    const ExperimentConfig c = ExperimentConfig::from_json(read_json(config));
    if (!c.sweep) throw ConfigError("config: sweep: required for `pinlab sweep`");
    const RunResult r = run_sweep(c, out);
    write_manifest(out, c, "sweep", r);
    for (const auto& k : r.checks) log << (k.pass ? "PASS " : "FAIL ") << k.name << "\n";
    log << "wrote " << out.string() << "/sweep.csv\n";
    return r.passed({}) ? 0 : 1;
}

int command_verify(const fs::path& assembly, const fs::path& field, const VerifyOptions& options, std::ostream& out) {
    const SupersolutionAssembly a = SupersolutionAssembly::from_json(read_json(assembly));
    const ForceField f = field_from_json(read_json(field));
    const VerifyReport r = verify_supersolution(a, f, options);
    out << r.to_json().dump(2) << "\n";
    return r.pass ? 0 : 1;
}

}  // namespace pinlab
