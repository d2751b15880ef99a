#pragma once

// Sampling-based verification of the partial metric type axioms (pm1-pm4)
// and the metric type axioms (D1-D3). Sampling only refutes: a Pass verdict
// means "no counterexample among the samples checked".

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pmt/error.hpp"
#include "pmt/spaces.hpp"

namespace pmt {

enum class AxiomId { pm1, pm2, pm3, pm4, D1, D2, D3 };
enum class Verdict { Pass, Fail };
enum class ChainMode { Exact, UpTo };

[[nodiscard]] constexpr std::string_view to_string(AxiomId a) noexcept {
    switch (a) {
        case AxiomId::pm1: return "pm1";
        case AxiomId::pm2: return "pm2";
        case AxiomId::pm3: return "pm3";
        case AxiomId::pm4: return "pm4";
        case AxiomId::D1: return "D1";
        case AxiomId::D2: return "D2";
        case AxiomId::D3: return "D3";
    }
    return "?";
}

[[nodiscard]] constexpr std::string_view to_string(Verdict v) noexcept {
    return v == Verdict::Pass ? "pass" : "fail";
}

[[nodiscard]] constexpr std::string_view to_string(ChainMode m) noexcept {
    return m == ChainMode::Exact ? "exact" : "upto";
}

[[nodiscard]] inline ChainMode chain_mode_from_string(std::string_view s) {
    if (s == "exact") return ChainMode::Exact;
    if (s == "upto") return ChainMode::UpTo;
    throw InvalidInput("chain mode must be 'exact' or 'upto'");
}

/// A counterexample: the points involved and the two sides that compare
/// the wrong way. Re-evaluating the points through eval_distance (raw_distance
/// for pm3/D2) reproduces lhs and rhs exactly.
struct Witness {
    AxiomId axiom{};
    std::vector<Point> points;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct AxiomResult {
    AxiomResult() = default;
    explicit AxiomResult(AxiomId a) : axiom(a) {}

    AxiomId axiom{};
    Verdict verdict = Verdict::Pass;
    std::vector<Witness> witnesses;
    std::size_t samples = 0;
    /// Largest LHS/bracket ratio seen; only set by polygon checks.
    std::optional<double> min_K;
    bool unbounded = false;

    [[nodiscard]] bool passed() const noexcept { return verdict == Verdict::Pass; }
};

struct AxiomReport {
    std::map<AxiomId, Verdict> per_axiom;
    std::vector<Witness> witnesses;
    std::size_t samples_checked = 0;
    std::optional<double> min_K_estimate;
    ChainMode chain_mode = ChainMode::Exact;
    double coeff_K = 1.0;
    int polygon_order = 1;
    double tol = kDefaultTol;
    std::uint64_t seed = 0;

    void add(const AxiomResult& r) {
        per_axiom[r.axiom] = r.verdict;
        witnesses.insert(witnesses.end(), r.witnesses.begin(), r.witnesses.end());
        samples_checked += r.samples;
        if (r.min_K) {
            min_K_estimate = std::max(min_K_estimate.value_or(1.0), *r.min_K);
        }
    }

    [[nodiscard]] bool passes(AxiomId a) const {
        auto it = per_axiom.find(a);
        return it != per_axiom.end() && it->second == Verdict::Pass;
    }
};

inline constexpr std::size_t kMaxWitnessesPerAxiom = 8;

namespace detail {

inline void record(AxiomResult& r, Witness w) {
    r.verdict = Verdict::Fail;
    if (r.witnesses.size() < kMaxWitnessesPerAxiom) r.witnesses.push_back(std::move(w));
}

}  // namespace detail

namespace detail {

/// Equality threshold for the pm1 converse: the smaller of tol and a few ulps
/// of the compared value. Values that differ by more than rounding noise are
/// distinct even when the difference is below tol (p = |x-y|^2 near the
/// diagonal).
[[nodiscard]] inline double equality_tol(double v, double tol) noexcept {
    return std::min(tol, 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(v)));
}

}  // namespace detail

/// pm1: x = y iff p(x,x) = p(x,y) = p(y,y). The forward direction is checked
/// exactly on diagonal samples; the converse flags distinct pairs
/// (sup-gap > 10 tol) whose three values agree up to detail::equality_tol.
[[nodiscard]] inline AxiomResult check_pm1(const SpaceDescriptor& space, const Sampler& sampler,
                                           double tol = kDefaultTol) {
    detail::require_sampler_fits(space, sampler);
    AxiomResult r{AxiomId::pm1};
    for (const auto& x : sampler.points()) {
        const double a = eval_distance(space, x, x);
        const double b = eval_distance(space, x, x);
        ++r.samples;
        if (a != b) detail::record(r, {AxiomId::pm1, {x, x}, a, b});
    }
    for (const auto& t : sampler.tuples(2)) {
        const Point& x = t[0];
        const Point& y = t[1];
        ++r.samples;
        if (coord_gap(x, y) <= 10.0 * tol) continue;
        const double pxy = eval_distance(space, x, y);
        const double gx = std::abs(eval_distance(space, x, x) - pxy);
        const double gy = std::abs(eval_distance(space, y, y) - pxy);
        const double eq = detail::equality_tol(pxy, tol);
        if (gx <= eq && gy <= eq) detail::record(r, {AxiomId::pm1, {x, y}, gx, gy});
    }
    return r;
}

/// pm2: p(x,x) <= p(x,y). Witness lhs = p(x,x), rhs = p(x,y).
[[nodiscard]] inline AxiomResult check_pm2(const SpaceDescriptor& space, const Sampler& sampler,
                                           double tol = kDefaultTol) {
    detail::require_sampler_fits(space, sampler);
    AxiomResult r{AxiomId::pm2};
    for (const auto& t : sampler.tuples(2)) {
        ++r.samples;
        const double pxy = eval_distance(space, t[0], t[1]);
        for (const Point* x : {&t[0], &t[1]}) {
            const double pxx = eval_distance(space, *x, *x);
            if (pxx > pxy + tol) {
                const Point& other = x == &t[0] ? t[1] : t[0];
                detail::record(r, {AxiomId::pm2, {*x, other}, pxx, pxy});
                break;
            }
        }
    }
    return r;
}

namespace detail {

inline AxiomResult check_symmetry(AxiomId id, const SpaceDescriptor& space,
                                  const Sampler& sampler, double tol) {
    require_sampler_fits(space, sampler);
    AxiomResult r{id};
    for (const auto& t : sampler.tuples(2)) {
        ++r.samples;
        const double a = raw_distance(space, t[0], t[1]);
        const double b = raw_distance(space, t[1], t[0]);
        if (std::abs(a - b) > tol) record(r, {id, {t[0], t[1]}, a, b});
    }
    return r;
}

}  // namespace detail

/// pm3: p(x,y) = p(y,x), evaluated on the raw oracle in both orders.
[[nodiscard]] inline AxiomResult check_pm3(const SpaceDescriptor& space, const Sampler& sampler,
                                           double tol = kDefaultTol) {
    return detail::check_symmetry(AxiomId::pm3, space, sampler, tol);
}

/// Polygon inequality over sampled chains (x, z_1, ..., z_len, y):
///   p(x,y) [+ sum p(z_i,z_i)] <= K [p(x,z_1) + ... + p(z_len,y)].
/// With self terms this is pm4, without it is D3. Also tracks the largest
/// LHS/bracket ratio (the minimal K consistent with the samples).
[[nodiscard]] inline AxiomResult check_polygon_inequality(const SpaceDescriptor& space,
                                                          const Sampler& sampler, int chain_len,
                                                          double K, bool with_self_terms,
                                                          double tol = kDefaultTol) {
    detail::require(chain_len >= 1, "chain length must be >= 1");
    detail::require(K >= 1.0, "coefficient K must be >= 1");
    detail::require_sampler_fits(space, sampler);
    const AxiomId id = with_self_terms ? AxiomId::pm4 : AxiomId::D3;
    AxiomResult r{id};
    double ratio = 1.0;
    for (const auto& chain : sampler.tuples(static_cast<std::size_t>(chain_len) + 2)) {
        ++r.samples;
        double lhs = eval_distance(space, chain.front(), chain.back());
        if (with_self_terms) {
            for (std::size_t i = 1; i + 1 < chain.size(); ++i) {
                lhs += eval_distance(space, chain[i], chain[i]);
            }
        }
        double bracket = 0.0;
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
            bracket += eval_distance(space, chain[i], chain[i + 1]);
        }
        const double rhs = K * bracket;
        if (lhs > rhs + tol) detail::record(r, {id, chain, lhs, rhs});
        if (bracket > 0.0) {
            ratio = std::max(ratio, lhs / bracket);
        } else if (lhs > 0.0) {
            r.unbounded = true;
            ratio = std::numeric_limits<double>::infinity();
        }
    }
    r.min_K = ratio;
    return r;
}

/// pm4 at the given chain length (default: the space's polygon order) and
/// the space's coefficient.
[[nodiscard]] inline AxiomResult check_pm4(const SpaceDescriptor& space, const Sampler& sampler,
                                           int chain_len = 0, double tol = kDefaultTol) {
    if (chain_len == 0) chain_len = space.polygon_order();
    return check_polygon_inequality(space, sampler, chain_len, space.coeff_K(), true, tol);
}

struct MinKEstimate {
    double value = 1.0;  // +inf when unbounded
    bool unbounded = false;
    std::optional<Witness> unbounded_witness;
};

/// Largest sampled ratio LHS / bracket for pm4 chains, clamped below at 1.
/// Never exceeds a K for which check_pm4 passes on the same samples (up to tol).
[[nodiscard]] inline MinKEstimate estimate_min_K(const SpaceDescriptor& space,
                                                 const Sampler& sampler, int chain_len = 0,
                                                 bool with_self_terms = true) {
    if (chain_len == 0) chain_len = space.polygon_order();
    detail::require(chain_len >= 1, "chain length must be >= 1");
    detail::require_sampler_fits(space, sampler);
    MinKEstimate est;
    for (const auto& chain : sampler.tuples(static_cast<std::size_t>(chain_len) + 2)) {
        double lhs = eval_distance(space, chain.front(), chain.back());
        if (with_self_terms) {
            for (std::size_t i = 1; i + 1 < chain.size(); ++i) {
                lhs += eval_distance(space, chain[i], chain[i]);
            }
        }
        double bracket = 0.0;
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
            bracket += eval_distance(space, chain[i], chain[i + 1]);
        }
        if (bracket > 0.0) {
            est.value = std::max(est.value, lhs / bracket);
        } else if (lhs > 0.0 && !est.unbounded) {
            est.unbounded = true;
            est.value = std::numeric_limits<double>::infinity();
            est.unbounded_witness = Witness{with_self_terms ? AxiomId::pm4 : AxiomId::D3, chain,
                                            lhs, 0.0};
        }
    }
    return est;
}

namespace detail {

inline AxiomResult polygon_with_mode(const SpaceDescriptor& space, const Sampler& sampler, int n,
                                     double K, bool self_terms, ChainMode mode, double tol) {
    if (mode == ChainMode::Exact) {
        return check_polygon_inequality(space, sampler, n, K, self_terms, tol);
    }
    AxiomResult all{self_terms ? AxiomId::pm4 : AxiomId::D3};
    all.min_K = 1.0;
    for (int len = 1; len <= n; ++len) {
        auto r = check_polygon_inequality(space, sampler, len, K, self_terms, tol);
        all.samples += r.samples;
        all.unbounded = all.unbounded || r.unbounded;
        all.min_K = std::max(*all.min_K, r.min_K.value_or(1.0));
        for (auto& w : r.witnesses) record(all, std::move(w));
        if (!r.passed()) all.verdict = Verdict::Fail;
    }
    return all;
}

inline AxiomReport metric_type_report(const SpaceDescriptor& space, const Sampler& sampler,
                                      ChainMode mode, double tol) {
    require_sampler_fits(space, sampler);
    AxiomReport rep;
    rep.coeff_K = space.coeff_K();
    rep.polygon_order = space.polygon_order();
    rep.chain_mode = mode;
    rep.tol = tol;
    rep.seed = sampler.seed;

    AxiomResult d1{AxiomId::D1};
    for (const auto& x : sampler.points()) {
        ++d1.samples;
        const double v = eval_distance(space, x, x);
        if (v > tol) record(d1, {AxiomId::D1, {x, x}, v, 0.0});
    }
    rep.add(d1);
    rep.add(check_symmetry(AxiomId::D2, space, sampler, tol));
    rep.add(polygon_with_mode(space, sampler, space.polygon_order(), space.coeff_K(), false, mode,
                              tol));
    return rep;
}

}  // namespace detail

/// D1 (zero self-distance within tol), D2 (symmetry) and D3 (polygon
/// inequality at the space's order and coefficient).
[[nodiscard]] inline AxiomReport check_metric_type(const SpaceDescriptor& space,
                                                   const Sampler& sampler,
                                                   double tol = kDefaultTol) {
    return detail::metric_type_report(space, sampler, ChainMode::Exact, tol);
}

/// Full report: pm1-pm4 and D1-D3 at the space's own (K, n). The pm4 and D3
/// minimal-K ratios are merged into one estimate.
[[nodiscard]] inline AxiomReport verify_axioms(const SpaceDescriptor& space,
                                               const Sampler& sampler,
                                               ChainMode mode = ChainMode::Exact,
                                               double tol = kDefaultTol) {
    AxiomReport rep = detail::metric_type_report(space, sampler, mode, tol);
    rep.min_K_estimate.reset();
    rep.add(check_pm1(space, sampler, tol));
    rep.add(check_pm2(space, sampler, tol));
    rep.add(check_pm3(space, sampler, tol));
    rep.add(detail::polygon_with_mode(space, sampler, space.polygon_order(), space.coeff_K(), true,
                                      mode, tol));
    return rep;
}

/// Whether the axiom set matching the space's own class claim passed.
[[nodiscard]] inline bool claim_holds(const AxiomReport& rep, SpaceClass claim) {
    if (is_partial_class(claim)) {
        return rep.passes(AxiomId::pm1) && rep.passes(AxiomId::pm2) &&
               rep.passes(AxiomId::pm3) && rep.passes(AxiomId::pm4);
    }
    return rep.passes(AxiomId::D1) && rep.passes(AxiomId::D2) && rep.passes(AxiomId::D3);
}

struct ClassLabel {
    SpaceClass cls{};
    int n = 1;
    double K = 1.0;

    [[nodiscard]] std::string str() const {
        std::ostringstream os;
        os << to_string(cls);
        switch (cls) {
            case SpaceClass::KPMS:
            case SpaceClass::MetricType: os << "(n=" << n << ",K=" << K << ")"; break;
            case SpaceClass::PartialBMetric: os << "(K=" << K << ")"; break;
            default: break;
        }
        return os.str();
    }

    friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
};

[[nodiscard]] inline bool has_class(const std::vector<ClassLabel>& labels, SpaceClass c) {
    return std::any_of(labels.begin(), labels.end(),
                       [c](const ClassLabel& l) { return l.cls == c; });
}

/// Every taxonomy label whose axiom set survives the samples:
///   KPMS(n,K), PartialBMetric(K), PartialRectangular, MetricType(n,K), Metric.
[[nodiscard]] inline std::vector<ClassLabel> classify(const SpaceDescriptor& space,
                                                      const Sampler& sampler,
                                                      ChainMode mode = ChainMode::Exact,
                                                      double tol = kDefaultTol) {
    const double K = space.coeff_K();
    const int n = space.polygon_order();
    std::vector<ClassLabel> labels;

    const bool pm123 = check_pm1(space, sampler, tol).passed() &&
                       check_pm2(space, sampler, tol).passed() &&
                       check_pm3(space, sampler, tol).passed();
    auto poly = [&](int len, double k, bool self) {
        return detail::polygon_with_mode(space, sampler, len, k, self, mode, tol).passed();
    };
    if (pm123) {
        if (poly(n, K, true)) labels.push_back({SpaceClass::KPMS, n, K});
        if (poly(1, K, true)) labels.push_back({SpaceClass::PartialBMetric, 1, K});
        if (poly(2, 1.0, true)) labels.push_back({SpaceClass::PartialRectangular, 2, 1.0});
    }

    const auto mt = check_metric_type(space, sampler, tol);
    const bool d12 = mt.passes(AxiomId::D1) && mt.passes(AxiomId::D2);
    if (d12) {
        if (poly(n, K, false)) labels.push_back({SpaceClass::MetricType, n, K});
        bool separates = true;
        for (const auto& t : sampler.tuples(2)) {
            const double d = eval_distance(space, t[0], t[1]);
            if (coord_gap(t[0], t[1]) > 10.0 * tol && d <= detail::equality_tol(d, tol)) {
                separates = false;
                break;
            }
        }
        if (separates && poly(1, 1.0, false)) labels.push_back({SpaceClass::Metric, 1, 1.0});
    }
    return labels;
}

}  // namespace pmt
