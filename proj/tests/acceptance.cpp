// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all
// criteria pass. Report JSON excludes wall-clock times so that criterion 9 can
// compare bytes.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "pmt/io.hpp"
#include "pmt/pmt.hpp"

namespace {

using namespace pmt;
using nlohmann::json;

constexpr std::uint64_t kSeed = 20240611;

constexpr double kFixedPointTol = 1e-8;
constexpr double kProbeResidualTol = 1e-8;
constexpr std::size_t kE3Horizon = 10000;
constexpr double kE3RuntimeSec = 1.0;
constexpr int kE4ExactUpTo = 20;
constexpr int kE5RatioUpTo = 50;
constexpr double kE5RelTol = 1e-12;
constexpr std::size_t kPerMapGrid = 1000;
constexpr std::size_t kE2Terms = 200;
constexpr std::size_t kE2Window = 20;
constexpr double kE2LimitTol = 1e-6;
constexpr double kE2Margin = 1e-3;
constexpr std::size_t kE2ScanPoints = 999;
constexpr std::size_t kAxiomBudget = 10000;
constexpr double kE1K = 4.0;
constexpr double kE1RuntimeSec = 2.0;
constexpr std::size_t kTransformBudget = 10000;
constexpr double kPtTol = 1e-12;
constexpr double kBoundTol = 1e-12;
constexpr double kKannanK = 0.4;
constexpr double kRatioTol = 1e-12;
constexpr std::size_t kSeriesTrials = 100;
constexpr std::size_t kSeriesHorizon = 1000;

struct Outcome {
    bool pass = true;
    std::string detail;
    json report = json::object();

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

FixedPointReport solve_fixture(const Fixture& f, std::uint64_t seed) {
    SolverOptions o;
    o.seed = seed;
    return solve_family(f.space, *f.family, *f.family_config, f.x0, o);
}

Outcome e3_common_fixed_point(std::uint64_t seed) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const auto f = get_fixture("E3-kannan-family");
    const auto rep = solve_fixture(f, seed);
    const double secs = seconds_since(t0);

    out.require(rep.converged(), "solver did not converge");
    out.require(std::abs(rep.point.scalar()) <= kFixedPointTol,
                "|x*| = " + fmt(std::abs(rep.point.scalar())));
    double worst = 0.0;
    for (std::size_t m : default_probe_set()) {
        const double r = rep.residuals.at("T_" + std::to_string(m));
        worst = std::max(worst, r);
    }
    out.require(worst <= kProbeResidualTol, "probe residual " + fmt(worst));
    const bool cert_ok = rep.certificate && rep.certificate->horizon_checked == kE3Horizon &&
                         rep.certificate->lambda == std::sqrt(2.0) / 2.0 &&
                         rep.certificate->n_lambda == std::optional<std::size_t>(1);
    out.require(cert_ok, "certificate is not lambda = sqrt(2)/2 with n = 1 at H = 10^4");
    out.require(secs < kE3RuntimeSec, "runtime " + fmt(secs) + " s");
    if (out.pass) {
        out.detail = "x* = " + fmt(rep.point.scalar()) + ", max residual " + fmt(worst) +
                     ", lambda = sqrt(2)/2, n = 1, " + fmt(secs) + " s";
    }
    out.report = io::fixed_point_report(rep);
    return out;
}

Outcome e4_exact_products(std::uint64_t seed) {
    Outcome out;
    const auto f = get_fixture("E4-relaxed-family");
    const auto& cfg = *f.family_config;
    const auto C = product_terms_Cn(cfg.deltas, kE4ExactUpTo, cfg.F.degree());
    int exact = 0;
    for (int n = 1; n <= kE4ExactUpTo; ++n) {
        if (C[static_cast<std::size_t>(n - 1)] == std::ldexp(1.0, -n * (n + 1) / 2)) ++exact;
    }
    out.require(exact == kE4ExactUpTo, std::to_string(exact) + "/20 C_n exact");
    const auto rep = solve_fixture(f, seed);
    out.require(rep.converged() && std::abs(rep.point.scalar()) <= kFixedPointTol,
                "x* = " + fmt(rep.point.scalar()));
    if (out.pass) {
        out.detail = "C_n = 2^-n(n+1)/2 exact for n <= 20, x* = " + fmt(rep.point.scalar());
    }
    out.report = {{"Cn", io::numbers(C)}, {"solver", io::fixed_point_report(rep)}};
    return out;
}

Outcome e5_chatterjea(std::uint64_t seed) {
    Outcome out;
    const auto f = get_fixture("E5-chatterjea-family");
    const auto& cfg = *f.family_config;
    const auto rep = solve_fixture(f, seed);
    out.require(rep.converged() && rep.point == Point(1.0), "x* = " + rep.point.str());

    const auto C = product_terms_Cn(cfg.deltas, kE5RatioUpTo, cfg.F.degree());
    double worst = 0.0;
    double want = 1.0;
    for (int n = 1; n <= kE5RatioUpTo; ++n) {
        want *= 10.0 / 11.0;
        worst = std::max(worst, std::abs(C[static_cast<std::size_t>(n - 1)] - want) / want);
    }
    out.require(worst <= kE5RelTol, "C_n relative error " + fmt(worst));

    std::vector<PerMapVerdict> per;
    if (rep.converged()) {
        per = per_map_fixed_point_check(f.space, *f.family, cfg.deltas, rep,
                                        [](std::size_t n) { return n + 1; }, default_probe_set(),
                                        kPerMapGrid);
    }
    std::size_t ok = 0;
    for (const auto& v : per) ok += v.ok() && v.grid_points >= kPerMapGrid ? 1 : 0;
    out.require(!per.empty() && ok == per.size(),
                std::to_string(ok) + "/" + std::to_string(per.size()) + " maps fix only 1");
    if (out.pass) {
        out.detail = "x* = 1, C_n rel err " + fmt(worst) + ", " + std::to_string(ok) +
                     " probed maps fix only 1";
    }
    out.report = {{"Cn", io::numbers(C)},
                  {"solver", io::fixed_point_report(rep)},
                  {"per_map", io::per_map(per)}};
    return out;
}

Outcome e2_no_limit(std::uint64_t) {
    Outcome out;
    const auto f = get_fixture("E2-open-interval");
    std::vector<Point> seq;
    for (std::size_t n = 1; n <= kE2Terms; ++n) seq.emplace_back(0.5 / static_cast<double>(n));
    const auto d = detect_cauchy(f.space, seq, kE2Window);
    out.require(std::abs(d.limit_estimate - 2.0) <= kE2LimitTol,
                "limit estimate " + fmt(d.limit_estimate));
    out.require(!d.is_zero_cauchy, "sequence reported zero-Cauchy");

    std::vector<Point> grid;
    for (std::size_t k = 0; k < kE2ScanPoints; ++k) {
        grid.emplace_back(kE2Margin + (1.0 - 2.0 * kE2Margin) * static_cast<double>(k) /
                                          static_cast<double>(kE2ScanPoints - 1));
    }
    const auto cands = find_limit_candidates(f.space, seq, grid, kE2Window);
    out.require(cands.empty(), std::to_string(cands.size()) + " limit candidates");
    if (out.pass) {
        out.detail = "limit estimate " + fmt(d.limit_estimate) + ", not zero-Cauchy, no limit in " +
                     std::to_string(grid.size()) + " grid points";
    }
    out.report = {{"cauchy", io::cauchy(d)}, {"limit_candidates", io::points(cands)}};
    return out;
}

Outcome e1_axioms(std::uint64_t seed) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const auto f = get_fixture("E1-maxpow");
    out.require(f.space.coeff_K() == kE1K, "E1 space is not declared with K = 4");
    const auto sampler = domain_sampler(f.space, seed, kAxiomBudget);
    const auto rep = verify_axioms(f.space, sampler);
    const auto minK = estimate_min_K(f.space, sampler);
    const double secs = seconds_since(t0);

    for (auto a : {AxiomId::pm1, AxiomId::pm2, AxiomId::pm3, AxiomId::pm4}) {
        out.require(rep.passes(a), std::string(to_string(a)) + " fails");
    }
    const auto chains = sampler.tuples(3).size();
    out.require(chains >= kAxiomBudget, std::to_string(chains) + " chains sampled");
    out.require(!minK.unbounded && minK.value > 1.0 && minK.value <= kE1K,
                "min K estimate " + fmt(minK.value));
    out.require(!rep.passes(AxiomId::D1), "D1 passes");
    out.require(secs < kE1RuntimeSec, "runtime " + fmt(secs) + " s");
    if (out.pass) {
        out.detail = "pm1-pm4 pass on " + std::to_string(chains) + " chains, min K " +
                     fmt(minK.value) + ", D1 fails, " + fmt(secs) + " s";
    }
    out.report = {{"axioms", io::axiom_report(rep)}, {"min_K", io::number(minK.value)}};
    return out;
}

SpaceDescriptor unit_space(DistanceOracle o, SpaceClass cls, int n = 1) {
    SpaceParams p;
    p.oracle = std::move(o);
    p.polygon_order = n;
    p.class_claim = cls;
    return SpaceDescriptor(std::move(p));
}

Outcome transforms(std::uint64_t seed) {
    Outcome out;
    const auto maxp = unit_space(oracle::max_coord(), SpaceClass::KPMS);
    const auto sampler = domain_sampler(maxp, seed, kTransformBudget);
    const auto pt = to_pt(maxp, sampler);
    double worst = 0.0;
    std::size_t pairs = 0;
    for (const auto& t : sampler.tuples(2)) {
        ++pairs;
        worst = std::max(worst, std::abs(eval_distance(pt.space, t[0], t[1]) -
                                         std::abs(t[0].scalar() - t[1].scalar())));
    }
    out.require(pairs >= kTransformBudget, std::to_string(pairs) + " pairs");
    out.require(worst <= kPtTol, "p^t deviates from |x-y| by " + fmt(worst));

    const auto e1 = get_fixture("E1-maxpow").space;
    const auto dp = induced_dp(e1);
    std::size_t dp_bad = 0;
    for (const auto& t : domain_sampler(e1, seed, kTransformBudget).tuples(2)) {
        const double v = eval_distance(dp.space, t[0], t[1]);
        const double want = t[0] == t[1] ? 0.0 : eval_distance(e1, t[0], t[1]);
        if (v != want) ++dp_bad;
        if (eval_distance(dp.space, t[0], t[0]) != 0.0) ++dp_bad;
    }
    out.require(dp_bad == 0, std::to_string(dp_bad) + " d_p mismatches");

    json basepoints = json::array();
    for (int n = 1; n <= 3; ++n) {
        const auto metric = unit_space(oracle::abs_diff(), SpaceClass::MetricType, n);
        const auto s = domain_sampler(metric, seed, kTransformBudget);
        const auto bp = from_metric_with_basepoint(metric, Point(0.0), s);
        const auto rep = verify_axioms(bp.space, s);
        for (auto a : {AxiomId::pm1, AxiomId::pm2, AxiomId::pm3, AxiomId::pm4}) {
            out.require(rep.passes(a), "basepoint n=" + std::to_string(n) + " fails " +
                                           std::string(to_string(a)));
        }
        basepoints.push_back(io::axiom_report(rep));
    }
    if (out.pass) {
        out.detail = "p^t = |x-y| on " + std::to_string(pairs) + " pairs (max dev " + fmt(worst) +
                     "), d_p exact, basepoint pm1-pm4 for n = 1,2,3";
    }
    out.report = {{"pt_max_dev", worst}, {"dp_mismatches", dp_bad}, {"basepoint", basepoints}};
    return out;
}

Outcome bounds(std::uint64_t seed) {
    Outcome out;
    const auto space = unit_space(oracle::abs_diff(), SpaceClass::Metric);
    const SelfMap half{[](const Point& x) { return Point(0.5 * x.scalar()); }, "x/2"};
    SolverOptions o;
    o.seed = seed;
    o.tol = kBoundTol;
    const auto banach = solve_pair_banach(space, half, half, 0.5, Point(1.0), o);
    const auto b = verify_bound(space, banach.trace, 1.0, 0.5, banach.trace.step_dist.front(),
                                kBoundTol);
    out.require(banach.converged(), "Banach pair did not converge");
    out.require(b.satisfied && !b.index.empty(), "tail bound violated, slack " + fmt(b.worst_slack));

    const auto kannan = solve_pair_kannan(space, half, half, kKannanK, Point(1.0), o);
    const double h = kKannanK / (1.0 - kKannanK);
    double worst_ratio = 0.0;
    const auto& s = kannan.trace.step_dist;
    for (std::size_t n = 1; n < s.size(); ++n) {
        if (s[n - 1] > 0.0) worst_ratio = std::max(worst_ratio, s[n] / s[n - 1]);
    }
    out.require(worst_ratio <= h + kRatioTol, "Kannan step ratio " + fmt(worst_ratio));
    out.require(kannan.hypothesis_log.held(), "Kannan orbit display violated");
    if (out.pass) {
        out.detail = "Banach tail bound holds at " + std::to_string(b.index.size()) +
                     " indices, Kannan max step ratio " + fmt(worst_ratio) + " <= 2/3";
    }
    out.report = {{"banach_bound", io::bound(b)},
                  {"kannan_step_dist", io::numbers(s)},
                  {"kannan_max_ratio", worst_ratio}};
    return out;
}

Outcome series_oracle(std::uint64_t seed) {
    Outcome out;
    std::mt19937_64 rng(seed);
    const auto grid = default_lambda_grid();
    std::size_t disagreements = 0;
    std::size_t certified = 0;
    std::size_t refuted = 0;
    json trials = json::array();
    for (std::size_t trial = 0; trial < kSeriesTrials; ++trial) {
        const auto a = testing::random_geometric_terms(rng, kSeriesHorizon);
        const auto cert = certify_alpha_series(RateSequence::given(a), grid);
        bool any = false;
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto n = testing::brute_n_lambda(a, grid[g]);
            const bool ref = testing::brute_refuted(a, grid[g]);
            const auto& r = cert.per_lambda[g];
            if (r.certified != n.has_value() || r.refuted != ref ||
                (n && r.n_lambda != *n)) {
                ++disagreements;
            }
            any = any || n.has_value();
        }
        const auto expected = any ? CertificateStatus::Certified
                              : testing::brute_refuted(a, grid.back())
                                  ? CertificateStatus::RefutedAtHorizon
                                  : CertificateStatus::Inconclusive;
        if (cert.status != expected) ++disagreements;
        certified += cert.status == CertificateStatus::Certified ? 1 : 0;
        refuted += cert.status == CertificateStatus::RefutedAtHorizon ? 1 : 0;
        trials.push_back(io::certificate(cert));
    }
    out.require(disagreements == 0, std::to_string(disagreements) + " disagreements");
    out.require(certified > 0 && refuted > 0, "trials do not cover both outcomes");
    if (out.pass) {
        out.detail = std::to_string(kSeriesTrials) + " sequences agree at every grid lambda (" +
                     std::to_string(certified) + " certified, " + std::to_string(refuted) +
                     " refuted)";
    }
    out.report = {{"trials", std::move(trials)}};
    return out;
}

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome(std::uint64_t)> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "E3 common fixed point and rate certificate", e3_common_fixed_point},
        {2, "E4 exact products and fixed point", e4_exact_products},
        {3, "E5 fixed point, products and per-map uniqueness", e5_chatterjea},
        {4, "E2 Cauchy limit without a limit point", e2_no_limit},
        {5, "E1 axiom suite", e1_axioms},
        {6, "transform properties", transforms},
        {7, "tail bound and Kannan step ratios", bounds},
        {8, "alpha-series brute-force equivalence", series_oracle},
    };
    return all;
}

std::string report_bytes(const std::vector<Outcome>& outs) {
    json j = json::array();
    for (const auto& o : outs) j.push_back(o.report);
    return j.dump();
}

}  // namespace

int main() {
    bool all = true;
    std::vector<Outcome> first;
    for (const auto& c : criteria()) {
        Outcome o;
        try {
            o = c.run(kSeed);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %d: %s  %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.title,
                    o.detail.c_str());
        all = all && o.pass;
        first.push_back(std::move(o));
    }

    Outcome det;
    try {
        std::vector<Outcome> second;
        for (const auto& c : criteria()) second.push_back(c.run(kSeed));
        const auto a = report_bytes(first);
        const auto b = report_bytes(second);
        det.require(a == b, "report JSON differs between runs");
        if (det.pass) {
            det.detail = "criteria 1-8 reports byte-identical across two runs (" +
                         std::to_string(a.size()) + " bytes)";
        }
    } catch (const std::exception& e) {
        det.pass = false;
        det.detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion 9: %s  determinism: %s\n", det.pass ? "PASS" : "FAIL",
                det.detail.c_str());
    all = all && det.pass;
    return all ? 0 : 1;
}
