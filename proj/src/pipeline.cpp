#include <cmath>
#include <sstream>

#include "pinlab/error.hpp"
#include "pinlab/supersolution.hpp"

namespace pinlab {

namespace {

PipelineCheck check(std::string name, bool pass, double value, double bound, std::string relation) {
    return {std::move(name), pass, value, bound, std::move(relation)};
}

bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b)); }

// Largest integer m with (m + n)(m + 2) <= B. Beyond 2^53 every double is an
// integer, so shrinking by a few ulps keeps m integral.
double bracket_m(double B, int n) {
    const double b = n + 2.0;
    const double c = 2.0 * n - B;
    const double disc = b * b - 4.0 * c;
    if (disc < 0.0) return -1.0;
    double m = std::floor(0.5 * (std::sqrt(disc) - b));
    for (int guard = 0; guard < 64 && (m + n) * (m + 2.0) > B; ++guard)
        m = m < 0x1.0p53 ? m - 1.0 : std::nextafter(m, 0.0);
    return m;
}

}  // namespace

bool PipelineParams::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return !checks.empty();
}

LocalProfile PipelineParams::profile() const { return make_local_profile(n, m, r_in, r_out, F_in, F_out); }

void evaluate_checks(PipelineParams& p, double tail_at_M) {
    const int n = p.n;
    p.r_in = p.r0;
    p.r_out = std::sqrt(static_cast<double>(n)) * (p.l + 0.5 * p.d - p.r1);
    p.F_in = (p.m + n) * (p.m + 2.0) / p.r0;
    p.F_out = 2.0 * p.C1 * p.h / (p.d * p.d);
    p.tail_at_M = tail_at_M;
    const double a = 0.5 + 1.0 / n;
    p.probe_at_M = tail_at_M > 0.0 ? std::exp(a * std::log(p.M) + std::log(tail_at_M)) : 0.0;
    p.open_probability = p.l > 2.0 * p.r1 ? open_box_probability(p.lambda, p.l, p.h, p.r1, n, tail_at_M) : 0.0;
    const double lift_curv = p.C1 * p.h / (p.d * p.d);
    p.ceiling = std::min(p.F_out - lift_curv, p.M - p.F_in);

    p.checks.clear();
    const LocalProfile prof = p.profile();
    const KinkReport kink = kink_condition(prof);
    p.checks.push_back(check("kink", kink.satisfied, kink.lhs, kink.rhs, ">="));
    const double thr = percolation_threshold(n);
    p.checks.push_back(check("open_box", p.open_probability > thr, p.open_probability, thr, ">"));
    const double phi0 = prof.inner.at_zero();
    // phi(0) = -r0 r_in / r0 = -r_in identically; compare up to rounding
    p.checks.push_back(check("phi0", phi0 >= -p.r_in * (1.0 + 1e-12), phi0, -p.r_in, ">="));
    p.checks.push_back(check("force_ceiling", p.F <= p.ceiling, p.F, p.ceiling, "<="));

    const double B = p.M * p.r0;
    const double prod = (p.m + n) * (p.m + 2.0);
    p.checks.push_back(check("bracket_upper", prod <= 0.5 * B, prod, 0.5 * B, "<="));
    p.checks.push_back(check("bracket_lower", prod >= 0.25 * B, prod, 0.25 * B, ">="));
    const double m_min = std::max(n, 2);
    p.checks.push_back(check("m_min", p.m >= m_min && p.m == std::floor(p.m), p.m, m_min, ">="));
    p.checks.push_back(check("d_ge_2r1", p.d >= 2.0 * p.r1, p.d, 2.0 * p.r1, ">="));
    const double lmin = tail_at_M > 0.0 ? min_box_side(p.lambda, p.h, n, tail_at_M, p.r1) : INFINITY;
    p.checks.push_back(check("l_gt_min_box_side", p.l > lmin, p.l, lmin, ">"));
}

PipelineParams plan_parameters(double F, int n, double lambda, double r0, double r1, const StrengthDistribution& dist,
                               double C1, const PlanOptions& options) {
    if (n < 1) throw PreconditionViolation("plan_parameters: n must be >= 1");
    if (!(F > 0.0)) throw PreconditionViolation("plan_parameters: F must be > 0");
    if (!(lambda > 0.0) || !(r0 > 0.0) || !(C1 > 0.0)) throw PreconditionViolation("plan_parameters: need lambda, r0, C1 > 0");
    if (!(r1 > std::sqrt(n + 1.0) * r0)) throw InvalidGeometry("plan_parameters: need r1 > sqrt(n + 1) r0");

    PipelineParams p;
    p.n = n;
    p.lambda = lambda;
    p.r0 = r0;
    p.r1 = r1;
    p.F = F;
    p.C1 = C1;
    const double nn = n;
    const double a = 0.5 + 1.0 / nn;
    p.C0 = std::pow(3.0 * std::log(2.0 * nn + 2.0) / lambda, 1.0 / nn);
    p.C2 = 2.0 * C1 * std::pow(nn, 0.5 * nn) * std::pow(2.0, nn - 1.0) / (nn * std::pow(r0, nn - 1.0)) *
           std::max(std::pow(p.C0, nn) * std::pow(16.0 / r0, a), 1.0);
    // F <= C1 / (2 C2)^(n/2 + 1) K^(n/2); the factor keeps rounding on the safe side
    const double K_needed = std::pow(F * std::pow(2.0 * p.C2, 0.5 * nn + 1.0) / C1, 2.0 / nn);
    p.K = std::max(F, K_needed) * (1.0 + 1e-9);

    auto probe = [&](double M) {
        const double t = dist.tail(M);
        return t > 0.0 ? std::exp(a * std::log(M) + std::log(t)) : 0.0;
    };
    double largest = 0.0;
    auto next_witness = [&](double M) {
        while (M <= options.max_M) {
            const double v = probe(M);
            largest = std::max(largest, v);
            if (v >= p.K) return M;
            M *= 2.0;
        }
        std::ostringstream os;
        os << "tail probe M^(1/2+1/n) P(f >= M) stays below K = " << p.K << " up to M = " << options.max_M
           << " for " << dist.describe();
        throw HypothesisNotWitnessed(os.str(), largest);
    };

    double M = next_witness(2.0 * p.K);
    for (int esc = 0; esc <= options.max_escalations; ++esc) {
        p.M = M;
        p.escalations = esc;
        p.m = bracket_m(0.5 * M * r0, n);
        p.d = std::sqrt(2.0 * p.C2 / p.K) * std::pow(std::max(p.m, 0.0), 1.0 / nn);
        p.h = std::pow(p.K, 0.5 * nn - 1.0) * std::pow(2.0 * p.C2, -0.5 * nn) * std::pow(std::max(p.m, 0.0), 2.0 / nn);
        const double tail = dist.tail(M);
        p.l = p.m > 0.0 ? 2.0 * r1 + p.C0 * std::pow(std::exp(a * std::log(M)) / (p.h * p.K), 1.0 / nn) : 0.0;
        if (p.m > 0.0 && p.h > 0.0) {
            evaluate_checks(p, tail);
            const double s1 = p.C2 * std::pow(p.m, 1.0 + 2.0 / nn) / (p.d * p.d * p.K);
            const double s2 = p.C2 * p.h * std::pow(p.d, nn - 2.0);
            p.checks.push_back(check("M_ge_2K", M >= 2.0 * p.K, M, 2.0 * p.K, ">="));
            p.checks.push_back(check("tail_probe", p.probe_at_M >= p.K, p.probe_at_M, p.K, ">="));
            p.checks.push_back(check("ineq_summand_1", s1 <= 0.5 * p.m * (1.0 + 1e-9), s1, 0.5 * p.m, "<="));
            p.checks.push_back(check("ineq_summand_2", s2 <= 0.5 * p.m * (1.0 + 1e-9), s2, 0.5 * p.m, "<="));
            const double lift_curv = C1 * p.h / (p.d * p.d);
            const double target = C1 / std::pow(2.0 * p.C2, 0.5 * nn + 1.0) * std::pow(p.K, 0.5 * nn);
            p.checks.push_back(check("ceiling_identity", close_rel(lift_curv, target, 1e-9), lift_curv, target, "=="));
            p.checks.push_back(check("M_minus_Fin_ge_K", M - p.F_in >= p.K, M - p.F_in, p.K, ">="));
            if (p.all_pass()) return p;
        }
        M = next_witness(2.0 * M);
    }
    throw HypothesisNotWitnessed("plan_parameters: re-checks still failing after the escalation budget", largest);
}

nlohmann::json PipelineParams::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["lambda"] = lambda;
    j["r0"] = r0;
    j["r1"] = r1;
    j["F"] = F;
    j["K"] = K;
    j["M"] = M;
    j["m"] = m;
    j["l"] = l;
    j["d"] = d;
    j["h"] = h;
    j["r_in"] = r_in;
    j["r_out"] = r_out;
    j["F_in"] = F_in;
    j["F_out"] = F_out;
    j["C0"] = C0;
    j["C1"] = C1;
    j["C2"] = C2;
    j["tail_at_M"] = tail_at_M;
    j["probe_at_M"] = probe_at_M;
    j["open_probability"] = open_probability;
    j["ceiling"] = ceiling;
    j["escalations"] = escalations;
    j["origin"] = origin;
    j["C2_note"] = "implementation constant from the explicit bound chain";
    auto& arr = j["checks"] = nlohmann::json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"bound", c.bound}, {"relation", c.relation}});
    j["all_pass"] = all_pass();
    return j;
}

PipelineParams PipelineParams::from_json(const nlohmann::json& j) {
    PipelineParams p;
    p.n = j.at("n").get<int>();
    p.lambda = j.at("lambda").get<double>();
    p.r0 = j.at("r0").get<double>();
    p.r1 = j.at("r1").get<double>();
    p.F = j.at("F").get<double>();
    p.K = j.value("K", 0.0);
    p.M = j.at("M").get<double>();
    p.m = j.at("m").get<double>();
    p.l = j.at("l").get<double>();
    p.d = j.at("d").get<double>();
    p.h = j.at("h").get<double>();
    p.C0 = j.value("C0", 0.0);
    p.C1 = j.at("C1").get<double>();
    p.C2 = j.value("C2", 0.0);
    p.escalations = j.value("escalations", 0);
    p.origin = j.value("origin", std::string("planned"));
    evaluate_checks(p, j.value("tail_at_M", 0.0));
    if (j.contains("checks")) {
        // keep the planner's extra checks as recorded
        for (const auto& c : j.at("checks")) {
            const auto name = c.at("name").get<std::string>();
            bool known = false;
            for (const auto& have : p.checks) known = known || have.name == name;
            if (!known)
                p.checks.push_back(check(name, c.at("pass").get<bool>(), c.at("value").get<double>(),
                                         c.at("bound").get<double>(), c.value("relation", std::string())));
        }
    }
    return p;
}

}  // namespace pinlab
