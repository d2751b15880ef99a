#pragma once

// Iteration traces and the evidence computed from them: Cauchy diagnosis,
// limit candidates and the proofs' geometric tail bounds.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmt/error.hpp"
#include "pmt/spaces.hpp"

namespace pmt {

enum class StopReason { StepTol, ResidualTol, MaxIter, HypothesisViolated };

[[nodiscard]] constexpr std::string_view to_string(StopReason r) noexcept {
    switch (r) {
        case StopReason::StepTol: return "step_tol";
        case StopReason::ResidualTol: return "residual_tol";
        case StopReason::MaxIter: return "max_iter";
        case StopReason::HypothesisViolated: return "hypothesis_violated";
    }
    return "?";
}

/// x_0..x_N with step_dist[n] = p(x_n, x_{n+1}) (N entries), self_dist[n] =
/// p(x_n, x_n) (N+1 entries) and the hypothesis slack of the display used to
/// produce step n (NaN where none was checked).
struct IterationTrace {
    std::vector<Point> iterates;
    std::vector<double> step_dist;
    std::vector<double> self_dist;
    std::vector<double> hypothesis_slack;
    bool converged = false;
    StopReason stop_reason = StopReason::MaxIter;

    [[nodiscard]] std::size_t steps() const noexcept { return step_dist.size(); }
    [[nodiscard]] const Point& last() const { return iterates.back(); }
};

// ---------------------------------------------------------------------------
// Cauchy diagnosis
// ---------------------------------------------------------------------------

/// Default spread tolerance for the Cauchy verdict. The window of a slowly
/// converging sequence (E2: 1/(2n), n <= 200) still spreads by ~1e-7.
inline constexpr double kCauchyTol = 1e-6;

struct CauchyDiagnosis {
    double limit_estimate = 0.0;  // mean of p(x_n, x_m) over the window
    double spread = 0.0;          // max - min over the window
    bool is_cauchy = false;       // spread <= tol
    bool is_zero_cauchy = false;  // Cauchy with limit_estimate <= tol
    std::size_t pairs = 0;
};

/// p(x_n, x_m) over all pairs n < m in the trailing `window` points.
[[nodiscard]] inline CauchyDiagnosis detect_cauchy(const SpaceDescriptor& space,
                                                   const std::vector<Point>& seq,
                                                   std::size_t window,
                                                   double tol = kCauchyTol) {
    detail::require(window >= 2, "Cauchy window must hold at least two points");
    detail::require(seq.size() > 2 * window, "sequence must be longer than twice the window");
    CauchyDiagnosis d;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    for (std::size_t n = seq.size() - window; n < seq.size(); ++n) {
        for (std::size_t m = n + 1; m < seq.size(); ++m) {
            const double v = eval_distance(space, seq[n], seq[m]);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
            ++d.pairs;
        }
    }
    d.limit_estimate = sum / static_cast<double>(d.pairs);
    d.spread = hi - lo;
    d.is_cauchy = d.spread <= tol;
    d.is_zero_cauchy = d.is_cauchy && d.limit_estimate <= tol;
    return d;
}

[[nodiscard]] inline CauchyDiagnosis detect_cauchy(const SpaceDescriptor& space,
                                                   const IterationTrace& trace,
                                                   std::size_t window,
                                                   double tol = kCauchyTol) {
    return detect_cauchy(space, trace.iterates, window, tol);
}

/// Candidates x for which the trailing window already looks p-convergent to x:
/// max over the window of |p(x_m, x) - p(x, x)| <= tol.
[[nodiscard]] inline std::vector<Point> find_limit_candidates(const SpaceDescriptor& space,
                                                              const std::vector<Point>& seq,
                                                              const std::vector<Point>& candidates,
                                                              std::size_t window,
                                                              double tol = kDefaultTol) {
    detail::require(window >= 1 && window <= seq.size(), "window must fit in the sequence");
    std::vector<Point> out;
    for (const auto& x : candidates) {
        const double px = self_distance(space, x);
        double worst = 0.0;
        for (std::size_t m = seq.size() - window; m < seq.size() && worst <= tol; ++m) {
            worst = std::max(worst, std::abs(eval_distance(space, seq[m], x) - px));
        }
        if (worst <= tol) out.push_back(x);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tail bounds
// ---------------------------------------------------------------------------

/// Theoretical vs observed values at each logged index, satisfied iff
/// observed <= theoretical + tol everywhere.
struct BoundCheck {
    std::string formula;
    std::vector<std::size_t> index;
    std::vector<double> theoretical;
    std::vector<double> empirical;
    bool satisfied = true;
    double worst_slack = std::numeric_limits<double>::infinity();

    void add(std::size_t n, double theory, double observed, double tol) {
        index.push_back(n);
        theoretical.push_back(theory);
        empirical.push_back(observed);
        worst_slack = std::min(worst_slack, theory - observed);
        satisfied = satisfied && observed <= theory + tol;
    }
};

inline constexpr std::size_t kMaxLoggedBoundIndices = 256;

/// For n = 0, 1, ... with 2n < N: observed max_{m > 2n} p(x_{2n}, x_m) against
/// K rate^{2n} / (1 - rate) seed_dist. Index n of the record is iterate 2n.
[[nodiscard]] inline BoundCheck verify_bound(const SpaceDescriptor& space,
                                             const IterationTrace& trace, double K, double rate,
                                             double seed_dist, double tol = kDefaultTol) {
    detail::require(std::isfinite(rate) && rate >= 0.0 && rate < 1.0,
                    "bound rate must lie in [0, 1)");
    detail::require(K >= 1.0 && std::isfinite(seed_dist) && seed_dist >= 0.0,
                    "bound needs K >= 1 and a finite seed distance");
    BoundCheck b;
    b.formula = "max_{m>2n} p(x_2n, x_m) <= K rate^(2n) / (1 - rate) p(x_0, x_1)";
    const auto& xs = trace.iterates;
    for (std::size_t n = 0; 2 * n + 1 < xs.size() && n < kMaxLoggedBoundIndices; ++n) {
        double observed = 0.0;
        for (std::size_t m = 2 * n + 1; m < xs.size(); ++m) {
            observed = std::max(observed, eval_distance(space, xs[2 * n], xs[m]));
        }
        const double theory =
            K * std::pow(rate, static_cast<double>(2 * n)) / (1.0 - rate) * seed_dist;
        b.add(n, theory, observed, tol);
    }
    return b;
}

}  // namespace pmt
