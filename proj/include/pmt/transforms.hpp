#pragma once

// Constructions between partial metric types and metric types: p^t, the
// basepoint construction, d_p, powers and sums. Every construction returns
// the new descriptor together with what is known about its class claim.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmt/axioms.hpp"
#include "pmt/error.hpp"
#include "pmt/oracle.hpp"
#include "pmt/spaces.hpp"

namespace pmt {

enum class TransformKind { PT, Basepoint, InducedDp, Power, SumPmBm };

[[nodiscard]] constexpr std::string_view to_string(TransformKind k) noexcept {
    switch (k) {
        case TransformKind::PT: return "pt";
        case TransformKind::Basepoint: return "basepoint";
        case TransformKind::InducedDp: return "dp";
        case TransformKind::Power: return "power";
        case TransformKind::SumPmBm: return "sum";
    }
    return "?";
}

[[nodiscard]] inline TransformKind transform_kind_from_string(std::string_view s) {
    for (auto k : {TransformKind::PT, TransformKind::Basepoint, TransformKind::InducedDp,
                   TransformKind::Power, TransformKind::SumPmBm}) {
        if (to_string(k) == s) return k;
    }
    throw InvalidInput("unknown transform kind '" + std::string(s) + "'");
}

struct TransformResult {
    SpaceDescriptor space;
    TransformKind kind{};
    /// The class claim follows from a theorem given the inputs' axioms.
    bool claim_proved = false;
    /// Outcome of the post-hoc sample verification, when one ran.
    std::optional<bool> claim_sample_verified;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string source_name(const SpaceDescriptor& s) {
    return s.name().empty() ? s.oracle().label : s.name();
}

inline nlohmann::json provenance(TransformKind kind, const SpaceDescriptor& src,
                                 nlohmann::json extra = nlohmann::json::object()) {
    extra["kind"] = std::string(to_string(kind));
    extra["source"] = source_name(src);
    if (src.oracle().serializable()) extra["source_oracle"] = src.oracle().expr;
    return extra;
}

inline std::string witness_text(const Witness& w) {
    std::ostringstream os;
    os.precision(17);
    os << to_string(w.axiom) << " at (";
    for (std::size_t i = 0; i < w.points.size(); ++i) os << (i ? ", " : "") << w.points[i].str();
    os << "): " << w.lhs << " vs " << w.rhs;
    return os.str();
}

/// Warn for every failed axiom of the set the input is expected to satisfy.
inline void warn_unless_partial(const SpaceDescriptor& s, const Sampler& sampler, double K, int n,
                                const std::string& role, std::vector<std::string>& warnings) {
    const auto checked = s.with(K, n, SpaceClass::KPMS);
    const auto rep = verify_axioms(checked, sampler);
    for (auto a : {AxiomId::pm1, AxiomId::pm2, AxiomId::pm3, AxiomId::pm4}) {
        if (!rep.passes(a)) {
            std::string msg = role + " fails " + std::string(to_string(a)) + " at K=" +
                              std::to_string(K) + ", n=" + std::to_string(n);
            for (const auto& w : rep.witnesses) {
                if (w.axiom == a) {
                    msg += "; witness " + witness_text(w);
                    break;
                }
            }
            warnings.push_back(std::move(msg));
        }
    }
}

inline void warn_unless_metric_type(const SpaceDescriptor& s, const Sampler& sampler, double K,
                                    int n, const std::string& role,
                                    std::vector<std::string>& warnings) {
    const auto rep = check_metric_type(s.with(K, n, SpaceClass::MetricType), sampler);
    for (auto a : {AxiomId::D1, AxiomId::D2, AxiomId::D3}) {
        if (!rep.passes(a)) {
            warnings.push_back(role + " fails " + std::string(to_string(a)) + " at K=" +
                               std::to_string(K) + ", n=" + std::to_string(n));
        }
    }
}

inline void verify_claim(TransformResult& r, const Sampler& sampler) {
    Sampler s = sampler;
    s.region = r.space.domain();
    const auto rep = verify_axioms(r.space, s);
    r.claim_sample_verified = claim_holds(rep, r.space.class_claim());
    if (!*r.claim_sample_verified) {
        r.warnings.push_back("sample verification of the " +
                             std::string(to_string(r.space.class_claim())) +
                             " claim failed on the output space");
    }
}

}  // namespace detail

/// p^t(x,y) = 2p(x,y) - p(x,x) - p(y,y), claimed metric type with the source's
/// (K, n). Proved for K = 1 only; for K > 1 the claim is sample-checked.
/// Throws ConstructionError when a sampled p^t value is negative (pm2 broken).
[[nodiscard]] inline TransformResult to_pt(const SpaceDescriptor& space, const Sampler& sampler,
                                           double tol = kDefaultTol) {
    detail::require_sampler_fits(space, sampler);
    std::vector<std::string> warnings;
    for (const auto& r : {check_pm1(space, sampler, tol), check_pm3(space, sampler, tol)}) {
        if (!r.passed()) {
            warnings.push_back("source fails " + std::string(to_string(r.axiom)) + "; witness " +
                               detail::witness_text(r.witnesses.front()));
        }
    }
    const auto pt_oracle = oracle::pt(space.oracle());
    for (const auto& t : sampler.tuples(2)) {
        const double v = pt_oracle(t[0], t[1]);
        if (v < -tol) {
            std::ostringstream os;
            os.precision(17);
            os << "p^t is negative at (" << t[0].str() << ", " << t[1].str() << "): " << v
               << " (source violates pm2)";
            throw ConstructionError(os.str());
        }
    }
    SpaceParams q;
    q.oracle = pt_oracle;
    q.coeff_K = space.coeff_K();
    q.polygon_order = space.polygon_order();
    q.domain = space.domain();
    q.class_claim = SpaceClass::MetricType;
    q.hausdorff = space.hausdorff_asserted();
    q.complete = false;
    q.name = "pt(" + detail::source_name(space) + ")";
    q.provenance = detail::provenance(TransformKind::PT, space);
    TransformResult r{SpaceDescriptor(std::move(q)), TransformKind::PT, space.coeff_K() == 1.0,
                      std::nullopt, std::move(warnings)};
    if (!r.claim_proved) {
        r.warnings.push_back("metric type claim for K > 1 is not covered by a proof; "
                             "sample-verified only");
    }
    detail::verify_claim(r, sampler);
    return r;
}

/// p(x,y) = (d(x,y) + d(x,x0) + d(y,x0)) / 2 from a metric type space with K = 1.
/// The basepoint hypothesis d(x0,x) <= d(x,y) for x != y is sample-checked and
/// reported as a warning; the construction is returned regardless.
[[nodiscard]] inline TransformResult from_metric_with_basepoint(const SpaceDescriptor& metric,
                                                                const Point& x0,
                                                                const Sampler& sampler,
                                                                double tol = kDefaultTol) {
    detail::require_in_domain(metric, x0);
    detail::require_sampler_fits(metric, sampler);
    std::vector<std::string> warnings;
    detail::warn_unless_metric_type(metric, sampler, 1.0, metric.polygon_order(), "source",
                                    warnings);

    std::size_t violations = 0;
    std::optional<std::string> first;
    for (const auto& t : sampler.tuples(2)) {
        if (t[0] == t[1]) continue;
        const double lhs = eval_distance(metric, x0, t[0]);
        const double rhs = eval_distance(metric, t[0], t[1]);
        if (lhs > rhs + tol) {
            ++violations;
            if (!first) {
                std::ostringstream os;
                os.precision(17);
                os << "x=" << t[0].str() << ", y=" << t[1].str() << ": d(x0,x)=" << lhs
                   << " > d(x,y)=" << rhs;
                first = os.str();
            }
        }
    }
    if (violations > 0) {
        warnings.push_back("basepoint hypothesis d(x0,x) <= d(x,y) fails on " +
                           std::to_string(violations) + " sampled pairs; first: " + *first);
    }

    SpaceParams q;
    q.oracle = oracle::basepoint(metric.oracle(), x0);
    q.coeff_K = 1.0;
    q.polygon_order = metric.polygon_order();
    q.domain = metric.domain();
    q.class_claim = SpaceClass::KPMS;
    q.hausdorff = metric.hausdorff_asserted();
    q.name = "basepoint(" + detail::source_name(metric) + ", " + x0.str() + ")";
    q.provenance = detail::provenance(
        TransformKind::Basepoint, metric,
        {{"x0", std::vector<double>(x0.coords().begin(), x0.coords().end())}});
    TransformResult r{SpaceDescriptor(std::move(q)), TransformKind::Basepoint, violations == 0,
                      std::nullopt, std::move(warnings)};
    detail::verify_claim(r, sampler);
    return r;
}

/// d_p: 0 on exact coordinate equality, p elsewhere. Metric type with the
/// source's (K, n).
[[nodiscard]] inline TransformResult induced_dp(const SpaceDescriptor& space) {
    SpaceParams q;
    q.oracle = oracle::dp(space.oracle());
    q.coeff_K = space.coeff_K();
    q.polygon_order = space.polygon_order();
    q.domain = space.domain();
    q.class_claim = SpaceClass::MetricType;
    q.hausdorff = space.hausdorff_asserted();
    q.name = "dp(" + detail::source_name(space) + ")";
    q.provenance = detail::provenance(TransformKind::InducedDp, space);
    return {SpaceDescriptor(std::move(q)), TransformKind::InducedDp, true, std::nullopt, {}};
}

/// Same as induced_dp, followed by a sample verification of D1-D3.
[[nodiscard]] inline TransformResult induced_dp(const SpaceDescriptor& space,
                                                const Sampler& sampler) {
    auto r = induced_dp(space);
    detail::verify_claim(r, sampler);
    return r;
}

/// p^q of a partial metric, a K-PMS with K = 2^(q-1).
[[nodiscard]] inline TransformResult power_pms(const SpaceDescriptor& partial_metric, double q,
                                               const Sampler& sampler) {
    detail::require(std::isfinite(q) && q >= 1.0, "power exponent q must be >= 1");
    detail::require_sampler_fits(partial_metric, sampler);
    std::vector<std::string> warnings;
    detail::warn_unless_partial(partial_metric, sampler, 1.0, 1, "source", warnings);

    SpaceParams p;
    p.oracle = q == 1.0 ? partial_metric.oracle() : oracle::power(partial_metric.oracle(), q);
    p.coeff_K = std::pow(2.0, q - 1.0);
    p.polygon_order = 1;
    p.domain = partial_metric.domain();
    p.class_claim = SpaceClass::KPMS;
    p.hausdorff = partial_metric.hausdorff_asserted();
    p.complete = partial_metric.complete_asserted();
    std::ostringstream name;
    name << "power(" << detail::source_name(partial_metric) << ", " << q << ")";
    p.name = name.str();
    p.provenance = detail::provenance(TransformKind::Power, partial_metric, {{"q", q}});
    TransformResult r{SpaceDescriptor(std::move(p)), TransformKind::Power, warnings.empty(),
                      std::nullopt, std::move(warnings)};
    detail::verify_claim(r, sampler);
    return r;
}

/// Pointwise sum of a partial metric and a b-metric; K = max of the two
/// declared coefficients, verified afterwards on samples.
[[nodiscard]] inline TransformResult sum_pm_bm(const SpaceDescriptor& partial_metric,
                                               const SpaceDescriptor& b_metric,
                                               const Sampler& sampler) {
    detail::require(partial_metric.dim() == b_metric.dim(),
                    "sum of spaces with different dimensions");
    detail::require(partial_metric.domain() == b_metric.domain(),
                    "sum of spaces with different domains");
    detail::require_sampler_fits(partial_metric, sampler);
    std::vector<std::string> warnings;
    detail::warn_unless_partial(partial_metric, sampler, 1.0, 1, "partial metric summand",
                                warnings);
    detail::warn_unless_metric_type(b_metric, sampler, b_metric.coeff_K(), 1, "b-metric summand",
                                    warnings);

    SpaceParams p;
    p.oracle = oracle::sum({partial_metric.oracle(), b_metric.oracle()});
    p.coeff_K = std::max(partial_metric.coeff_K(), b_metric.coeff_K());
    p.polygon_order = 1;
    p.domain = partial_metric.domain();
    p.class_claim = SpaceClass::KPMS;
    p.hausdorff = partial_metric.hausdorff_asserted() && b_metric.hausdorff_asserted();
    p.complete = partial_metric.complete_asserted() && b_metric.complete_asserted();
    p.name = "sum(" + detail::source_name(partial_metric) + ", " +
             detail::source_name(b_metric) + ")";
    nlohmann::json extra;
    extra["second"] = detail::source_name(b_metric);
    if (b_metric.oracle().serializable()) extra["second_oracle"] = b_metric.oracle().expr;
    p.provenance = detail::provenance(TransformKind::SumPmBm, partial_metric, std::move(extra));
    TransformResult r{SpaceDescriptor(std::move(p)), TransformKind::SumPmBm, false, std::nullopt,
                      std::move(warnings)};
    detail::verify_claim(r, sampler);
    return r;
}

}  // namespace pmt
