#pragma once

// Picard engines for the fixed-point theorems: Banach and Kannan pairs (and
// iterate powers), admissible single maps and countable families under the
// Kannan-Choudhury and Chatterjea displays. Each engine checks, along the
// orbit, exactly the inequality its proof consumes and compares the trace
// against the proof's tail bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pmt/error.hpp"
#include "pmt/phi.hpp"
#include "pmt/series.hpp"
#include "pmt/spaces.hpp"
#include "pmt/trace.hpp"

namespace pmt {

struct SolverOptions {
    double step_tol = 1e-10;
    std::size_t max_iter = 10000;
    /// Slack tolerance for orbit inequalities and bound checks.
    double tol = kDefaultTol;
    /// Sample the display off the orbit as well (reported, never stops the run).
    bool off_orbit_checks = false;
    std::size_t off_orbit_samples = 1000;
    std::uint64_t seed = 0;
    bool uniqueness_probe = true;
    std::size_t uniqueness_grid = 1000;
};

/// One evaluation of a contraction display: lhs <= rhs is required.
struct HypothesisCheck {
    std::size_t step = 0;
    std::size_t i = 0;  // map indices (family runs)
    std::size_t j = 0;
    double lhs = 0.0;
    double rhs = 0.0;

    [[nodiscard]] double slack() const noexcept { return rhs - lhs; }
};

struct HypothesisLog {
    std::string display;
    std::vector<HypothesisCheck> checks;
    double worst_slack = std::numeric_limits<double>::infinity();
    std::optional<std::size_t> first_violation;  // index into checks
    std::size_t skipped = 0;                     // x == y, display not applicable

    void add(const HypothesisCheck& c, double tol) {
        worst_slack = std::min(worst_slack, c.slack());
        if (c.slack() < -tol && !first_violation) first_violation = checks.size();
        checks.push_back(c);
    }

    [[nodiscard]] bool held() const noexcept { return !first_violation.has_value(); }
};

struct UniquenessProbe {
    std::size_t grid_points = 0;
    std::vector<Point> other_fixed_points;

    [[nodiscard]] bool unique() const noexcept { return other_fixed_points.empty(); }
};

struct FixedPointReport {
    std::string scheme;
    Point point;
    /// p(x*, T x*) - p(x*, x*) per map label.
    std::map<std::string, double> residuals;
    /// Iterate-power runs: residuals against the maps before composition.
    std::map<std::string, double> original_residuals;
    double residual_tol = 0.0;
    IterationTrace trace;
    std::optional<BoundCheck> bound_check;
    HypothesisLog hypothesis_log;
    std::optional<HypothesisLog> off_orbit_log;
    std::optional<UniquenessProbe> uniqueness;
    std::optional<AlphaSeriesCertificate> certificate;
    std::optional<RelaxedReport> relaxed;
    std::vector<std::string> assumptions;
    std::vector<std::string> notes;
    /// Failed checks; empty means every check passed.
    std::vector<std::string> flags;

    [[nodiscard]] bool converged() const noexcept { return trace.converged; }
    [[nodiscard]] bool all_checks_ok() const noexcept { return flags.empty(); }
};

// ---------------------------------------------------------------------------
// Shared machinery
// ---------------------------------------------------------------------------

[[nodiscard]] inline SelfMap iterate_power(const SelfMap& T, std::size_t r) {
    detail::require(r >= 1, "iterate power r must be >= 1");
    if (r == 1) return T;
    return {[T, r](const Point& x) {
                Point y = x;
                for (std::size_t k = 0; k < r; ++k) y = T(y);
                return y;
            },
            T.label + "^" + std::to_string(r)};
}

namespace detail {

inline void require_options(const SolverOptions& o) {
    require(std::isfinite(o.step_tol) && o.step_tol > 0.0, "step_tol must be > 0");
    require(o.max_iter >= 1, "max_iter must be >= 1");
    require(std::isfinite(o.tol) && o.tol >= 0.0, "tol must be >= 0");
}

inline Point apply_in_domain(const SpaceDescriptor& space, const SelfMap& T, const Point& x) {
    Point y = T(x);
    if (!space.domain().contains(y)) {
        throw InvalidInput("map " + T.label + " sends " + x.str() + " to " + y.str() +
                           ", outside the domain");
    }
    return y;
}

/// Runs the Picard loop. `next(n, x_n)` yields x_{n+1}; `check(n, xs)` is
/// called once x_{n+1} exists and may return the display evaluated for step n.
template <class Next, class Check>
IterationTrace picard(const SpaceDescriptor& space, const Point& x0, const SolverOptions& opts,
                      HypothesisLog& log, Next&& next, Check&& check) {
    require_in_domain(space, x0);
    IterationTrace tr;
    tr.iterates.push_back(x0);
    tr.self_dist.push_back(self_distance(space, x0));
    for (std::size_t n = 0; n < opts.max_iter; ++n) {
        Point x1 = next(n, tr.iterates.back());
        const double step = eval_distance(space, tr.iterates.back(), x1);
        tr.self_dist.push_back(self_distance(space, x1));
        tr.iterates.push_back(std::move(x1));
        tr.step_dist.push_back(step);

        std::optional<HypothesisCheck> c = check(n, tr.iterates);
        tr.hypothesis_slack.push_back(c ? c->slack() : std::numeric_limits<double>::quiet_NaN());
        if (c) {
            log.add(*c, opts.tol);
            if (!log.held()) {
                tr.stop_reason = StopReason::HypothesisViolated;
                return tr;
            }
        }
        if (step <= opts.step_tol) {
            tr.converged = true;
            tr.stop_reason = StopReason::StepTol;
            return tr;
        }
        // p-convergence with nonzero self-distance: p(x_n, x_{n+1}) has
        // settled onto both self-distances.
        if (std::abs(step - tr.self_dist[n]) <= opts.step_tol &&
            std::abs(step - tr.self_dist[n + 1]) <= opts.step_tol) {
            tr.converged = true;
            tr.stop_reason = StopReason::ResidualTol;
            return tr;
        }
    }
    tr.stop_reason = StopReason::MaxIter;
    return tr;
}

inline double residual(const SpaceDescriptor& space, const Point& x, const SelfMap& T) {
    return eval_distance(space, x, apply_in_domain(space, T, x)) - self_distance(space, x);
}

using NamedMaps = std::vector<std::pair<std::string, SelfMap>>;

inline void record_residuals(FixedPointReport& rep, const SpaceDescriptor& space,
                             const NamedMaps& maps, double tol) {
    for (const auto& [name, T] : maps) {
        const double r = residual(space, rep.point, T);
        rep.residuals[name] = r;
        if (r > rep.residual_tol) rep.flags.push_back("residual:" + name);
        if (r < -tol) rep.flags.push_back("negative_residual:" + name);
    }
}

/// Grid points y (about `count` in total) with every residual <= residual_tol
/// and d_p(y, x*) > 10 tol.
inline UniquenessProbe probe_uniqueness(const SpaceDescriptor& space, const Point& xstar,
                                        const std::vector<SelfMap>& maps, std::size_t count,
                                        double residual_tol, double tol) {
    const auto per_axis = static_cast<std::size_t>(
        std::ceil(std::pow(static_cast<double>(count), 1.0 / static_cast<double>(space.dim())) -
                  1e-9));
    UniquenessProbe u;
    for (const auto& y : grid_points(space.domain(), std::max<std::size_t>(2, per_axis))) {
        ++u.grid_points;
        const double dp = y == xstar ? 0.0 : eval_distance(space, y, xstar);
        if (dp <= 10.0 * tol) continue;
        bool fixed = true;
        for (const auto& T : maps) {
            if (residual(space, y, T) > residual_tol) {
                fixed = false;
                break;
            }
        }
        if (fixed) u.other_fixed_points.push_back(y);
    }
    return u;
}

inline void echo_assumptions(FixedPointReport& rep, const SpaceDescriptor& space,
                             bool needs_hausdorff) {
    rep.assumptions.push_back(std::string("complete: ") +
                              (space.complete_asserted() ? "asserted" : "not asserted"));
    if (needs_hausdorff) {
        rep.assumptions.push_back(std::string("hausdorff: ") +
                                  (space.hausdorff_asserted() ? "asserted" : "not asserted"));
    }
}

inline void finish_common(FixedPointReport& rep) {
    if (!rep.trace.converged) rep.flags.push_back("not_converged");
    if (!rep.hypothesis_log.held()) rep.flags.push_back("hypothesis");
    if (rep.bound_check && !rep.bound_check->satisfied) rep.flags.push_back("bound");
    if (rep.uniqueness && !rep.uniqueness->unique()) rep.flags.push_back("uniqueness");
    if (rep.off_orbit_log && !rep.off_orbit_log->held()) rep.flags.push_back("off_orbit_hypothesis");
}

/// Seeded pairs from the domain for off-orbit display checks.
inline std::vector<std::vector<Point>> off_orbit_pairs(const SpaceDescriptor& space,
                                                       const SolverOptions& opts) {
    Sampler s;
    s.seed = opts.seed;
    s.region = space.domain();
    s.use_grid = false;
    s.random_count = opts.off_orbit_samples;
    return s.tuples(2);
}

enum class PairKind { Banach, Kannan };

inline FixedPointReport solve_pair(const SpaceDescriptor& space, const SelfMap& T1,
                                   const SelfMap& T2, double k, PairKind kind, const Point& x0,
                                   const SolverOptions& opts) {
    require_options(opts);
    FixedPointReport rep;
    rep.residual_tol = opts.step_tol;
    const bool banach = kind == PairKind::Banach;
    rep.scheme = banach ? "banach-pair" : "kannan-pair";
    rep.hypothesis_log.display = banach ? "p(T1 x, T2 y) <= k p(x, y)"
                                        : "p(T1 x, T2 y) <= k [p(T1 x, x) + p(y, T2 y)]";
    echo_assumptions(rep, space, false);
    const double rate = banach ? k : k / (1.0 - k);

    auto next = [&](std::size_t n, const Point& x) {
        return apply_in_domain(space, n % 2 == 0 ? T1 : T2, x);
    };
    // Step n >= 1 uses the pair (x_{n-1}, x_n): one of them is mapped by T1,
    // the other by T2, producing x_n and x_{n+1}.
    auto check = [&](std::size_t n, const std::vector<Point>& xs) -> std::optional<HypothesisCheck> {
        if (n == 0) return std::nullopt;
        const double lhs = eval_distance(space, xs[n], xs[n + 1]);
        const double prev = eval_distance(space, xs[n - 1], xs[n]);
        const double rhs = banach ? k * prev : k * (prev + lhs);
        return HypothesisCheck{n, 0, 0, lhs, rhs};
    };
    rep.trace = picard(space, x0, opts, rep.hypothesis_log, next, check);
    rep.point = rep.trace.last();

    if (opts.off_orbit_checks) {
        HypothesisLog off;
        off.display = rep.hypothesis_log.display;
        std::size_t idx = 0;
        for (const auto& t : off_orbit_pairs(space, opts)) {
            const Point a = apply_in_domain(space, T1, t[0]);
            const Point b = apply_in_domain(space, T2, t[1]);
            const double lhs = eval_distance(space, a, b);
            const double rhs = banach ? k * eval_distance(space, t[0], t[1])
                                      : k * (eval_distance(space, a, t[0]) +
                                             eval_distance(space, t[1], b));
            off.add({idx++, 0, 0, lhs, rhs}, opts.tol);
        }
        rep.off_orbit_log = std::move(off);
    }

    record_residuals(rep, space, {{"T1", T1}, {"T2", T2}}, opts.tol);
    if (rep.trace.iterates.size() >= 2) {
        rep.bound_check = verify_bound(space, rep.trace, space.coeff_K(), rate,
                                       rep.trace.step_dist.front(), opts.tol);
        rep.bound_check->formula = banach
            ? "max_{m>2n} p(x_2n, x_m) <= K k^(2n) / (1 - k) p(x_0, x_1)"
            : "max_{m>2n} p(x_2n, x_m) <= K h^(2n) / (1 - h) p(x_0, x_1), h = k / (1 - k)";
    }
    if (rep.trace.converged && opts.uniqueness_probe) {
        rep.uniqueness = probe_uniqueness(space, rep.point, {T1, T2}, opts.uniqueness_grid,
                                          rep.residual_tol, opts.tol);
    }
    finish_common(rep);
    return rep;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pairs
// ---------------------------------------------------------------------------

/// Alternating orbit x_{2n+1} = T1 x_{2n}, x_{2n+2} = T2 x_{2n+1} under
/// p(T1 x, T2 y) <= k p(x, y).
[[nodiscard]] inline FixedPointReport solve_pair_banach(const SpaceDescriptor& space,
                                                        const SelfMap& T1, const SelfMap& T2,
                                                        double k, const Point& x0,
                                                        const SolverOptions& opts = {}) {
    detail::require(std::isfinite(k) && k >= 0.0 && k < 1.0, "Banach pair needs 0 <= k < 1");
    return detail::solve_pair(space, T1, T2, k, detail::PairKind::Banach, x0, opts);
}

/// Banach pair on T1^r1 and T2^r2; residuals against T1 and T2 themselves are
/// reported separately.
[[nodiscard]] inline FixedPointReport solve_pair_power(const SpaceDescriptor& space,
                                                       const SelfMap& T1, const SelfMap& T2,
                                                       std::size_t r1, std::size_t r2, double k,
                                                       const Point& x0,
                                                       const SolverOptions& opts = {}) {
    const SelfMap P1 = iterate_power(T1, r1);
    const SelfMap P2 = iterate_power(T2, r2);
    auto rep = solve_pair_banach(space, P1, P2, k, x0, opts);
    if (r1 != 1 || r2 != 1) {
        rep.scheme = "banach-pair-power";
        rep.notes.push_back("composed maps: " + P1.label + ", " + P2.label);
        // Residuals of the original maps are informational; they do not flag.
        rep.original_residuals["T1"] = detail::residual(space, rep.point, T1);
        rep.original_residuals["T2"] = detail::residual(space, rep.point, T2);
    }
    return rep;
}

/// Kannan pair: p(T1 x, T2 y) <= k [p(T1 x, x) + p(y, T2 y)], internal rate
/// h = k / (1 - k).
[[nodiscard]] inline FixedPointReport solve_pair_kannan(const SpaceDescriptor& space,
                                                        const SelfMap& T1, const SelfMap& T2,
                                                        double k, const Point& x0,
                                                        const SolverOptions& opts = {}) {
    const double cap = std::min(1.0 / space.coeff_K(), 0.5);
    detail::require(std::isfinite(k) && k >= 0.0 && k < cap,
                    "Kannan pair needs 0 <= k < min(1/K, 1/2)");
    auto rep = detail::solve_pair(space, T1, T2, k, detail::PairKind::Kannan, x0, opts);
    rep.notes.push_back("k is required below min(1/K, 1/2) so that h = k/(1-k) < 1");
    return rep;
}

// ---------------------------------------------------------------------------
// Admissible single map
// ---------------------------------------------------------------------------

struct AdmissibilityConfig {
    std::function<double(const Point&, const Point&)> alpha;
    std::function<double(const Point&, const Point&)> beta;
    double C_alpha = 1.0;
    double C_beta = 0.0;
    /// Also test the subsequence condition alpha(x*, x_n) >= C_alpha,
    /// beta(x*, x_n) <= C_beta on the trailing window.
    bool check_subsequence_condition = false;
    std::size_t subsequence_window = 20;
};

/// Orbit x_{n+1} = f x_n under alpha(x,y) p(fx,fy) <= beta(x,y) p(x,y), with
/// (C1)/(C2) propagation asserted at every step.
[[nodiscard]] inline FixedPointReport solve_admissible(const SpaceDescriptor& space,
                                                       const SelfMap& f,
                                                       const AdmissibilityConfig& cfg,
                                                       const Point& x0,
                                                       const SolverOptions& opts = {}) {
    detail::require_options(opts);
    detail::require(static_cast<bool>(cfg.alpha) && static_cast<bool>(cfg.beta),
                    "admissibility needs alpha and beta functions");
    detail::require(std::isfinite(cfg.C_alpha) && cfg.C_alpha > 0.0, "C_alpha must be > 0");
    detail::require(std::isfinite(cfg.C_beta) && cfg.C_beta >= 0.0, "C_beta must be >= 0");
    const double rate = cfg.C_beta / cfg.C_alpha;
    detail::require(rate < 1.0 / space.coeff_K(), "condition C3 fails: C_beta/C_alpha >= 1/K");
    detail::require_in_domain(space, x0);
    const Point fx0 = detail::apply_in_domain(space, f, x0);
    detail::require(cfg.alpha(x0, fx0) >= cfg.C_alpha && cfg.beta(x0, fx0) <= cfg.C_beta,
                    "initial point is not admissible: need alpha(x0, f x0) >= C_alpha and "
                    "beta(x0, f x0) <= C_beta");

    FixedPointReport rep;
    rep.scheme = "admissible";
    rep.residual_tol = opts.step_tol;
    rep.hypothesis_log.display =
        "alpha(x,y) p(fx,fy) <= beta(x,y) p(x,y), alpha >= C_alpha, beta <= C_beta";
    detail::echo_assumptions(rep, space, true);
    rep.assumptions.emplace_back("p-sequential continuity of f: assumed, not verified");

    auto next = [&](std::size_t, const Point& x) { return detail::apply_in_domain(space, f, x); };
    // Step n >= 1 uses (x, y) = (x_{n-1}, x_n). The recorded lhs absorbs any
    // C1/C2 shortfall so that slack() is the smallest of the three margins.
    auto check = [&](std::size_t n, const std::vector<Point>& xs) -> std::optional<HypothesisCheck> {
        if (n == 0) return std::nullopt;
        const double a = cfg.alpha(xs[n - 1], xs[n]);
        const double b = cfg.beta(xs[n - 1], xs[n]);
        const double lhs = a * eval_distance(space, xs[n], xs[n + 1]);
        const double rhs = b * eval_distance(space, xs[n - 1], xs[n]);
        const double slack = std::min({rhs - lhs, a - cfg.C_alpha, cfg.C_beta - b});
        return HypothesisCheck{n, 0, 0, rhs - slack, rhs};
    };
    rep.trace = detail::picard(space, x0, opts, rep.hypothesis_log, next, check);
    rep.point = rep.trace.last();

    detail::record_residuals(rep, space, {{"f", f}}, opts.tol);
    rep.bound_check = verify_bound(space, rep.trace, space.coeff_K(), rate,
                                   rep.trace.step_dist.front(), opts.tol);
    rep.bound_check->formula =
        "max_{m>2n} p(x_2n, x_m) <= K r^(2n) / (1 - r) p(x_0, x_1), r = C_beta / C_alpha";
    if (cfg.check_subsequence_condition && rep.trace.converged) {
        const auto& xs = rep.trace.iterates;
        const std::size_t w = std::min(cfg.subsequence_window, xs.size());
        std::size_t hits = 0;
        for (std::size_t m = xs.size() - w; m < xs.size(); ++m) {
            if (cfg.alpha(rep.point, xs[m]) >= cfg.C_alpha && cfg.beta(rep.point, xs[m]) <= cfg.C_beta) {
                ++hits;
            }
        }
        rep.notes.push_back("subsequence condition holds at " + std::to_string(hits) + " of " +
                            std::to_string(w) + " trailing iterates");
        if (hits == 0) rep.flags.push_back("subsequence_condition");
    }
    detail::finish_common(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// Countable families
// ---------------------------------------------------------------------------

enum class FamilyScheme { KannanChoudhury, KannanChoudhury3, Chatterjea, Chatterjea3 };

[[nodiscard]] constexpr std::string_view to_string(FamilyScheme s) noexcept {
    switch (s) {
        case FamilyScheme::KannanChoudhury: return "kannan-choudhury";
        case FamilyScheme::KannanChoudhury3: return "kannan-choudhury3";
        case FamilyScheme::Chatterjea: return "chatterjea";
        case FamilyScheme::Chatterjea3: return "chatterjea3";
    }
    return "?";
}

[[nodiscard]] inline FamilyScheme family_scheme_from_string(std::string_view s) {
    for (auto f : {FamilyScheme::KannanChoudhury, FamilyScheme::KannanChoudhury3,
                   FamilyScheme::Chatterjea, FamilyScheme::Chatterjea3}) {
        if (to_string(f) == s) return f;
    }
    throw InvalidInput("unknown family scheme '" + std::string(s) + "'");
}

[[nodiscard]] constexpr bool is_ternary(FamilyScheme s) noexcept {
    return s == FamilyScheme::KannanChoudhury3 || s == FamilyScheme::Chatterjea3;
}

enum class GateKind { AlphaSeries, RelaxedCn };

[[nodiscard]] constexpr std::string_view to_string(GateKind g) noexcept {
    return g == GateKind::AlphaSeries ? "alpha-series" : "relaxed";
}

[[nodiscard]] inline GateKind gate_kind_from_string(std::string_view s) {
    if (s == "alpha-series") return GateKind::AlphaSeries;
    if (s == "relaxed") return GateKind::RelaxedCn;
    throw InvalidInput("unknown gate '" + std::string(s) + "' (alpha-series|relaxed)");
}

struct FamilyGate {
    GateKind kind = GateKind::AlphaSeries;
    bool with_2s_factor = false;
    std::vector<double> lambda_grid = default_lambda_grid();
    std::size_t horizon = 1000;
};

[[nodiscard]] inline std::vector<std::size_t> default_probe_set() {
    return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 17, 103};
}

struct FamilyConfig {
    DeltaMatrix deltas;
    /// (i, j) -> gamma_{i,j}; empty means gamma = 0.
    std::function<double(std::size_t, std::size_t)> gammas;
    PhiFunction F = PhiFunction::identity();
    std::optional<PsiFunction> psi;
    FamilyScheme scheme = FamilyScheme::KannanChoudhury;
    FamilyGate gate;
    std::size_t r = 1;
    std::vector<std::size_t> probe = default_probe_set();
};

namespace detail {

/// The scheme's display with T_i x and T_j y already evaluated.
inline HypothesisCheck family_display_values(const SpaceDescriptor& space,
                                             const FamilyConfig& cfg, std::size_t i,
                                             std::size_t j, const Point& x, const Point& y,
                                             const Point& Tix, const Point& Tjy) {
    const double pxy = eval_distance(space, x, y);
    std::vector<double> parts;
    switch (cfg.scheme) {
        case FamilyScheme::KannanChoudhury:
        case FamilyScheme::KannanChoudhury3:
            parts = {eval_distance(space, x, Tix), eval_distance(space, y, Tjy)};
            break;
        case FamilyScheme::Chatterjea:
        case FamilyScheme::Chatterjea3:
            parts = {eval_distance(space, x, Tjy), eval_distance(space, y, Tix)};
            break;
    }
    if (is_ternary(cfg.scheme)) parts.push_back(pxy);
    double bracket = 0.0;
    for (double v : parts) bracket += v;
    const double delta = cfg.deltas(i, j);
    double rhs = cfg.F(delta * bracket);
    const double gamma = cfg.gammas ? cfg.gammas(i, j) : 0.0;
    if (gamma != 0.0) {
        require(cfg.psi.has_value(), "nonzero gamma needs a psi function");
        rhs -= cfg.F(gamma * (*cfg.psi)(parts));
    }
    return {0, i, j, cfg.F(eval_distance(space, Tix, Tjy)), rhs};
}

inline std::string family_display_text(FamilyScheme s) {
    switch (s) {
        case FamilyScheme::KannanChoudhury:
            return "F(p(Ti x, Tj y)) <= F(d_ij [p(x,Ti x) + p(y,Tj y)]) - F(g_ij psi[...])";
        case FamilyScheme::KannanChoudhury3:
            return "F(p(Ti x, Tj y)) <= F(d_ij [p(x,Ti x) + p(y,Tj y) + p(x,y)]) - F(g_ij psi[...])";
        case FamilyScheme::Chatterjea:
            return "F(p(Ti x, Tj y)) <= F(d_ij [p(x,Tj y) + p(y,Ti x)]) - F(g_ij psi[...])";
        case FamilyScheme::Chatterjea3:
            return "F(p(Ti x, Tj y)) <= F(d_ij [p(x,Tj y) + p(y,Ti x) + p(x,y)]) - F(g_ij psi[...])";
    }
    return {};
}

}  // namespace detail

/// Evaluates the configured display at (i, j, x, y) through T_i^r and T_j^r.
[[nodiscard]] inline HypothesisCheck family_display(const SpaceDescriptor& space,
                                                    const MapFamily& family,
                                                    const FamilyConfig& cfg, std::size_t i,
                                                    std::size_t j, const Point& x,
                                                    const Point& y) {
    const Point Tix = detail::apply_in_domain(space, iterate_power(family(i), cfg.r), x);
    const Point Tjy = detail::apply_in_domain(space, iterate_power(family(j), cfg.r), y);
    return detail::family_display_values(space, cfg, i, j, x, y, Tix, Tjy);
}

/// Orbit x_n = T_n^r(x_{n-1}). The gate is evaluated first and a failing gate
/// rejects the run. Step n >= 1 checks the display at (i, j) = (n, n+1),
/// x = x_{n-1}, y = x_n.
[[nodiscard]] inline FixedPointReport solve_family(const SpaceDescriptor& space,
                                                   const MapFamily& family,
                                                   const FamilyConfig& cfg, const Point& x0,
                                                   const SolverOptions& opts = {}) {
    detail::require_options(opts);
    detail::require(static_cast<bool>(cfg.deltas.value), "family run needs deltas");
    detail::require(cfg.r >= 1, "iterate power r must be >= 1");
    detail::require(!cfg.psi || cfg.psi->arity() == (is_ternary(cfg.scheme) ? 3 : 2),
                    "psi arity does not match the scheme");
    const double s = cfg.F.degree();

    FixedPointReport rep;
    rep.scheme = "family:" + std::string(to_string(cfg.scheme));
    rep.residual_tol = opts.step_tol;
    rep.hypothesis_log.display = detail::family_display_text(cfg.scheme);
    detail::echo_assumptions(rep, space, false);
    if (cfg.gate.with_2s_factor) rep.notes.push_back("rate terms include the 2^s factor");

    std::vector<double> terms;
    if (cfg.gate.kind == GateKind::AlphaSeries) {
        const auto seq = kannan_rate_terms(cfg.deltas, cfg.gate.horizon, s, cfg.gate.with_2s_factor);
        rep.certificate = certify_alpha_series(seq, cfg.gate.lambda_grid);
        if (rep.certificate->status != CertificateStatus::Certified) {
            throw InvalidInput("alpha-series gate failed (" +
                               std::string(to_string(rep.certificate->status)) +
                               "); the theorem's hypothesis is absent");
        }
        terms = seq.terms;
    } else {
        rep.relaxed = check_relaxed_hypotheses(cfg.deltas, s, cfg.gate.horizon,
                                               cfg.gate.with_2s_factor);
        if (!rep.relaxed->passes()) {
            throw InvalidInput(std::string("relaxed gate failed (") +
                               (rep.relaxed->all_limsup_ok ? "" : "limsup >= 1; ") + "C_n " +
                               std::string(to_string(rep.relaxed->cn_summable)) +
                               "); the theorem's hypothesis is absent");
        }
        terms = kannan_rate_terms(cfg.deltas, cfg.gate.horizon, s, cfg.gate.with_2s_factor).terms;
    }

    auto map_at = [&](std::size_t idx) { return iterate_power(family(idx), cfg.r); };
    auto next = [&](std::size_t n, const Point& x) {
        return detail::apply_in_domain(space, map_at(n + 1), x);
    };
    auto check = [&](std::size_t n, const std::vector<Point>& xs) -> std::optional<HypothesisCheck> {
        if (n == 0) return std::nullopt;
        if (xs[n - 1] == xs[n]) {
            ++rep.hypothesis_log.skipped;
            return std::nullopt;
        }
        auto c = detail::family_display_values(space, cfg, n, n + 1, xs[n - 1], xs[n], xs[n],
                                               xs[n + 1]);
        c.step = n;
        return c;
    };
    rep.trace = detail::picard(space, x0, opts, rep.hypothesis_log, next, check);
    rep.point = rep.trace.last();

    if (opts.off_orbit_checks) {
        HypothesisLog off;
        off.display = rep.hypothesis_log.display;
        std::uint64_t st = detail::splitmix64(opts.seed ^ 0x5EEDF00DULL);
        std::size_t idx = 0;
        for (const auto& t : detail::off_orbit_pairs(space, opts)) {
            if (t[0] == t[1]) continue;
            st = detail::splitmix64(st);
            const std::size_t i = 1 + st % 10;
            const std::size_t j = 1 + (st >> 32) % 10;
            auto c = family_display(space, family, cfg, i, j, t[0], t[1]);
            c.step = idx++;
            off.add(c, opts.tol);
        }
        rep.off_orbit_log = std::move(off);
    }

    detail::NamedMaps probes;
    for (std::size_t m : cfg.probe) probes.emplace_back("T_" + std::to_string(m), family(m));
    detail::record_residuals(rep, space, probes, opts.tol);

    // F(p(x_n, x_{n+1})) <= C_n F(p(x_0, x_1)) with C_n the gate's running product.
    const std::size_t N = rep.trace.steps();
    if (terms.size() < N) {
        terms = kannan_rate_terms(cfg.deltas, N, s, cfg.gate.with_2s_factor).terms;
    }
    const auto C = running_products(terms);
    BoundCheck b;
    b.formula = "F(p(x_n, x_{n+1})) <= C_n F(p(x_0, x_1))";
    const double F0 = cfg.F(rep.trace.step_dist.front());
    for (std::size_t n = 1; n < N; ++n) {
        b.add(n, C[n - 1] * F0, cfg.F(rep.trace.step_dist[n]), opts.tol);
    }
    rep.bound_check = std::move(b);
    detail::finish_common(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// Per-map uniqueness (each T_n has x* as its only fixed point)
// ---------------------------------------------------------------------------

struct PerMapVerdict {
    std::size_t n = 0;
    std::size_t k_n = 0;
    double delta = 0.0;
    bool delta_ok = false;      // delta_{n,k(n)} < 1/2
    bool fixes_point = false;   // |T_n(x*) - x*| <= tol
    std::vector<Point> other_fixed_points;
    std::size_t grid_points = 0;

    [[nodiscard]] bool ok() const noexcept {
        return delta_ok && fixes_point && other_fixed_points.empty();
    }
};

[[nodiscard]] inline std::vector<PerMapVerdict> per_map_fixed_point_check(
    const SpaceDescriptor& space, const MapFamily& family, const DeltaMatrix& deltas,
    const FixedPointReport& report, const std::function<std::size_t(std::size_t)>& k_of,
    const std::vector<std::size_t>& probe = default_probe_set(), std::size_t grid = 1000,
    double tol = kDefaultTol) {
    detail::require(report.converged(), "per-map check needs a converged report");
    detail::require(static_cast<bool>(k_of), "per-map check needs k(n)");
    const Point& xstar = report.point;
    const auto per_axis = static_cast<std::size_t>(
        std::ceil(std::pow(static_cast<double>(grid), 1.0 / static_cast<double>(space.dim())) -
                  1e-9));
    const auto ys = grid_points(space.domain(), std::max<std::size_t>(2, per_axis));
    std::vector<PerMapVerdict> out;
    for (std::size_t n : probe) {
        PerMapVerdict v;
        v.n = n;
        v.k_n = k_of(n);
        v.delta = deltas(n, v.k_n);
        v.delta_ok = v.delta < 0.5;
        if (v.delta_ok) {
            const SelfMap T = family(n);
            v.fixes_point = coord_gap(detail::apply_in_domain(space, T, xstar), xstar) <= tol;
            for (const auto& y : ys) {
                ++v.grid_points;
                if (coord_gap(y, xstar) <= 10.0 * tol) continue;
                if (coord_gap(detail::apply_in_domain(space, T, y), y) <= tol) {
                    v.other_fixed_points.push_back(y);
                }
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace pmt
