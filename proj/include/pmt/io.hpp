#pragma once

// JSON and CSV interchange: space descriptors, solver configurations and
// every report type. Serialization is deterministic (std::map ordering,
// round-trip doubles, non-finite values written as null).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmt/axioms.hpp"
#include "pmt/error.hpp"
#include "pmt/fixtures.hpp"
#include "pmt/oracle.hpp"
#include "pmt/phi.hpp"
#include "pmt/series.hpp"
#include "pmt/solvers.hpp"
#include "pmt/spaces.hpp"
#include "pmt/trace.hpp"
#include "pmt/transforms.hpp"

namespace pmt {

using nlohmann::json;

namespace io {

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json optional_value(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

inline json numbers(const std::vector<double>& vs) {
    json a = json::array();
    for (double v : vs) a.push_back(number(v));
    return a;
}

inline json point(const Point& p) {
    json a = json::array();
    for (double c : p.coords()) a.push_back(c);
    return a;
}

inline json points(const std::vector<Point>& ps) {
    json a = json::array();
    for (const auto& p : ps) a.push_back(point(p));
    return a;
}

inline Point parse_point(const json& j) {
    if (j.is_number()) return Point(j.get<double>());
    detail::require(j.is_array() && !j.empty(), "point must be a number or a non-empty array");
    std::vector<double> c;
    for (const auto& v : j) {
        detail::require(v.is_number(), "point coordinates must be numbers");
        c.push_back(v.get<double>());
    }
    return Point(std::move(c));
}

/// "0.5" or "0.5,1" as a point.
inline Point parse_point_text(const std::string& s) {
    std::vector<double> c;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t used = 0;
            c.push_back(std::stod(tok, &used));
            detail::require(used == tok.size(), "trailing characters in point '" + s + "'");
        } catch (const std::logic_error&) {
            throw InvalidInput("cannot parse point '" + s + "'");
        }
    }
    detail::require(!c.empty(), "empty point");
    return Point(std::move(c));
}

// ---------------------------------------------------------------------------
// Spaces
// ---------------------------------------------------------------------------

inline json box(const Box& b) {
    json a = json::array();
    for (const auto& ax : b.axes) a.push_back({ax.lo, ax.hi, ax.open_lo, ax.open_hi});
    return a;
}

inline Box parse_box(const json& j) {
    detail::require(j.is_array() && !j.empty(), "domain must be a non-empty array of intervals");
    Box b;
    for (const auto& ax : j) {
        detail::require(ax.is_array() && (ax.size() == 2 || ax.size() == 4) && ax[0].is_number() &&
                            ax[1].is_number(),
                        "domain interval must be [lo, hi] or [lo, hi, openLo, openHi]");
        Interval iv{ax[0].get<double>(), ax[1].get<double>(), false, false};
        if (ax.size() == 4) {
            detail::require(ax[2].is_boolean() && ax[3].is_boolean(),
                            "interval open flags must be booleans");
            iv.open_lo = ax[2].get<bool>();
            iv.open_hi = ax[3].get<bool>();
        }
        b.axes.push_back(iv);
    }
    return b;
}

inline json space(const SpaceDescriptor& s) {
    if (!s.oracle().serializable()) {
        throw InvalidInput("space '" + s.name() + "' has an oracle without an expression tree");
    }
    json j = {{"oracle", s.oracle().expr},
              {"K", s.coeff_K()},
              {"n", s.polygon_order()},
              {"domain", box(s.domain())},
              {"class", std::string(to_string(s.class_claim()))},
              {"hausdorff", s.hausdorff_asserted()},
              {"complete", s.complete_asserted()}};
    if (!s.name().empty()) j["name"] = s.name();
    if (!s.params().provenance.is_null()) j["provenance"] = s.params().provenance;
    return j;
}

/// Bare-string oracles resolve to the named fixture's oracle.
inline SpaceDescriptor parse_space(const json& j) {
    detail::require(j.is_object(), "space document must be a JSON object");
    detail::require(j.contains("oracle"), "space document needs an 'oracle'");
    auto get = [&j](const char* key, auto fallback) {
        using T = decltype(fallback);
        if (!j.contains(key)) return fallback;
        try {
            return j[key].get<T>();
        } catch (const json::exception&) {
            throw InvalidInput(std::string("space field '") + key + "' has the wrong type");
        }
    };
    SpaceParams p;
    p.oracle = oracle::from_json(j["oracle"], fixture_oracle);
    p.coeff_K = get("K", 1.0);
    p.polygon_order = get("n", 1);
    p.domain = j.contains("domain") ? parse_box(j["domain"]) : Box::closed(0.0, 1.0);
    p.class_claim = space_class_from_string(get("class", std::string("KPMS")));
    p.hausdorff = get("hausdorff", false);
    p.complete = get("complete", false);
    p.name = get("name", std::string());
    if (j.contains("provenance")) p.provenance = j["provenance"];
    return SpaceDescriptor(std::move(p));
}

// ---------------------------------------------------------------------------
// Axioms
// ---------------------------------------------------------------------------

inline json witness(const Witness& w) {
    return {{"axiom", std::string(to_string(w.axiom))},
            {"points", points(w.points)},
            {"lhs", number(w.lhs)},
            {"rhs", number(w.rhs)}};
}

/// {"pm1": verdict, ..., "witnesses": [...], "samples": N, "minK": number}.
inline json axiom_report(const AxiomReport& r) {
    json j = json::object();
    for (const auto& [a, v] : r.per_axiom) j[std::string(to_string(a))] = std::string(to_string(v));
    json ws = json::array();
    for (const auto& w : r.witnesses) ws.push_back(witness(w));
    j["witnesses"] = std::move(ws);
    j["samples"] = r.samples_checked;
    j["minK"] = r.min_K_estimate ? number(*r.min_K_estimate) : json(nullptr);
    j["chain_mode"] = std::string(to_string(r.chain_mode));
    j["K"] = r.coeff_K;
    j["n"] = r.polygon_order;
    return j;
}

inline json classes(const std::vector<ClassLabel>& ls) {
    json a = json::array();
    for (const auto& l : ls) a.push_back(l.str());
    return a;
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

inline json transform_result(const TransformResult& r) {
    json j = space(r.space);
    j["provenance"]["claim_proved"] = r.claim_proved;
    j["provenance"]["claim_sample_verified"] = optional_value(r.claim_sample_verified);
    j["provenance"]["warnings"] = r.warnings;
    return j;
}

// ---------------------------------------------------------------------------
// Series
// ---------------------------------------------------------------------------

inline json certificate(const AlphaSeriesCertificate& c) {
    json per = json::array();
    for (const auto& l : c.per_lambda) {
        per.push_back({{"lambda", l.lambda},
                       {"n_lambda", l.n_lambda},
                       {"certified", l.certified},
                       {"refuted", l.refuted}});
    }
    return {{"status", std::string(to_string(c.status))},
            {"lambda", optional_value(c.lambda)},
            {"n_lambda", optional_value(c.n_lambda)},
            {"horizon_checked", c.horizon_checked},
            {"horizon_scoped", true},
            {"witness_L", optional_value(c.witness_L)},
            {"per_lambda", std::move(per)}};
}

inline json rate_sequence(const RateSequence& s) {
    return {{"provenance", std::string(to_string(s.provenance))},
            {"degree_s", s.degree_s},
            {"with_2s_factor", s.with_2s_factor},
            {"horizon", s.horizon()}};
}

inline json relaxed(const RelaxedReport& r) {
    return {{"horizon", r.horizon},
            {"limsup_estimate", numbers(r.limsup_estimate)},
            {"all_limsup_ok", r.all_limsup_ok},
            {"Cn", numbers(r.Cn)},
            {"cn_summable", std::string(to_string(r.cn_summable))},
            {"tail_ratio", r.tail_ratio ? number(*r.tail_ratio) : json(nullptr)},
            {"partial_sum", number(r.partial_sum)},
            {"passes", r.passes()}};
}

// ---------------------------------------------------------------------------
// Traces and solver reports
// ---------------------------------------------------------------------------

inline std::string csv_number(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Columns n, x_0..x_{d-1}, step_dist, self_dist, hypothesis_slack. Row n
/// holds iterate n, the step leaving it and the slack checked at step n.
inline std::string trace_csv(const IterationTrace& t) {
    std::ostringstream os;
    const std::size_t d = t.iterates.empty() ? 1 : t.iterates.front().dim();
    os << "n";
    for (std::size_t k = 0; k < d; ++k) os << ",x" << k;
    os << ",step_dist,self_dist,hypothesis_slack\n";
    for (std::size_t n = 0; n < t.iterates.size(); ++n) {
        os << n;
        for (double c : t.iterates[n].coords()) os << ',' << csv_number(c);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        os << ',' << csv_number(n < t.step_dist.size() ? t.step_dist[n] : nan);
        os << ',' << csv_number(t.self_dist[n]);
        os << ',' << csv_number(n < t.hypothesis_slack.size() ? t.hypothesis_slack[n] : nan);
        os << '\n';
    }
    return os.str();
}

inline json trace(const IterationTrace& t) {
    return {{"steps", t.steps()},
            {"converged", t.converged},
            {"stop_reason", std::string(to_string(t.stop_reason))},
            {"iterates", points(t.iterates)},
            {"step_dist", numbers(t.step_dist)},
            {"self_dist", numbers(t.self_dist)},
            {"hypothesis_slack", numbers(t.hypothesis_slack)}};
}

inline json bound(const BoundCheck& b) {
    return {{"formula", b.formula},
            {"index", b.index},
            {"theoretical", numbers(b.theoretical)},
            {"empirical", numbers(b.empirical)},
            {"satisfied", b.satisfied},
            {"worst_slack", number(b.worst_slack)}};
}

inline json hypothesis_log(const HypothesisLog& l) {
    json checks = json::array();
    for (const auto& c : l.checks) {
        checks.push_back({{"step", c.step},
                          {"i", c.i},
                          {"j", c.j},
                          {"lhs", number(c.lhs)},
                          {"rhs", number(c.rhs)},
                          {"slack", number(c.slack())}});
    }
    return {{"display", l.display},
            {"held", l.held()},
            {"worst_slack", number(l.worst_slack)},
            {"first_violation", optional_value(l.first_violation)},
            {"skipped", l.skipped},
            {"checks", std::move(checks)}};
}

inline json fixed_point_report(const FixedPointReport& r) {
    json j = {{"scheme", r.scheme},
              {"point", point(r.point)},
              {"converged", r.converged()},
              {"residual_tol", r.residual_tol},
              {"residuals", json::object()},
              {"trace", trace(r.trace)},
              {"hypothesis_log", hypothesis_log(r.hypothesis_log)},
              {"assumptions", r.assumptions},
              {"notes", r.notes},
              {"flags", r.flags}};
    for (const auto& [k, v] : r.residuals) j["residuals"][k] = number(v);
    if (!r.original_residuals.empty()) {
        j["original_residuals"] = json::object();
        for (const auto& [k, v] : r.original_residuals) j["original_residuals"][k] = number(v);
    }
    if (r.bound_check) j["bound_check"] = bound(*r.bound_check);
    if (r.off_orbit_log) j["off_orbit_log"] = hypothesis_log(*r.off_orbit_log);
    if (r.uniqueness) {
        j["uniqueness"] = {{"grid_points", r.uniqueness->grid_points},
                           {"unique", r.uniqueness->unique()},
                           {"other_fixed_points", points(r.uniqueness->other_fixed_points)}};
    }
    if (r.certificate) j["certificate"] = certificate(*r.certificate);
    if (r.relaxed) j["relaxed"] = relaxed(*r.relaxed);
    return j;
}

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

inline json cauchy(const CauchyDiagnosis& d) {
    return {{"limit_estimate", number(d.limit_estimate)},
            {"spread", number(d.spread)},
            {"is_cauchy", d.is_cauchy},
            {"is_zero_cauchy", d.is_zero_cauchy},
            {"pairs", d.pairs}};
}

inline json per_map(const std::vector<PerMapVerdict>& vs) {
    json a = json::array();
    for (const auto& v : vs) {
        a.push_back({{"n", v.n},
                     {"k_n", v.k_n},
                     {"delta", number(v.delta)},
                     {"delta_ok", v.delta_ok},
                     {"fixes_point", v.fixes_point},
                     {"other_fixed_points", points(v.other_fixed_points)},
                     {"grid_points", v.grid_points},
                     {"ok", v.ok()}});
    }
    return a;
}

inline json fixture_report(const FixtureReport& r) {
    json diffs = json::array();
    for (const auto& d : r.diffs) {
        diffs.push_back({{"key", d.key},
                         {"expected", number(d.expected)},
                         {"observed", number(d.observed)},
                         {"tol", d.tol},
                         {"origin", std::string(to_string(d.origin))},
                         {"pass", d.pass}});
    }
    json j = {{"fixture", r.name},
              {"seed", r.seed},
              {"passed", r.passed()},
              {"axioms", axiom_report(r.axioms)},
              {"details", r.details},
              {"expectations", std::move(diffs)}};
    if (!r.classes.empty()) j["classes"] = classes(r.classes);
    if (r.solver) j["solver"] = fixed_point_report(*r.solver);
    if (r.cauchy) j["cauchy"] = cauchy(*r.cauchy);
    if (!r.per_map.empty()) j["per_map"] = per_map(r.per_map);
    return j;
}

// ---------------------------------------------------------------------------
// Solver configurations
// ---------------------------------------------------------------------------
//
// Map expressions:
//   {"op":"identity"} | {"op":"scale","factor":a} | {"op":"affine","scale":a,"shift":b}
//   | {"op":"const","value":c}          (coordinate-wise)
// Family expressions:
//   {"op":"geometric","base":b}  T_i x = x / b^i
//   {"op":"same","map":M}        T_i = M for every i
//   {"fixture":"E3-kannan-family"}

inline double field(const json& j, const char* key) {
    detail::require(j.contains(key) && j[key].is_number(),
                    std::string("config field '") + key + "' must be a number");
    return j[key].get<double>();
}

inline double field_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? field(j, key) : fallback;
}

inline std::size_t count_field_or(const json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    detail::require(j[key].is_number_integer() && j[key].get<std::int64_t>() >= 0,
                    std::string("config field '") + key + "' must be a non-negative integer");
    return j[key].get<std::size_t>();
}

inline SelfMap coordinatewise(std::function<double(double)> f, std::string label) {
    return {[f](const Point& x) {
                std::vector<double> c(x.coords().begin(), x.coords().end());
                for (double& v : c) v = f(v);
                return Point(std::move(c));
            },
            std::move(label)};
}

inline SelfMap parse_map(const json& j) {
    detail::require(j.is_object() && j.contains("op") && j["op"].is_string(),
                    "map must be an object with a string 'op'");
    const auto op = j["op"].get<std::string>();
    if (op == "identity") return coordinatewise([](double v) { return v; }, "x");
    if (op == "scale") {
        const double a = field(j, "factor");
        return coordinatewise([a](double v) { return a * v; }, oracle::detail::num(a) + "x");
    }
    if (op == "affine") {
        const double a = field(j, "scale");
        const double b = field(j, "shift");
        return coordinatewise([a, b](double v) { return a * v + b; },
                              oracle::detail::num(a) + "x+" + oracle::detail::num(b));
    }
    if (op == "const") {
        const double c = field(j, "value");
        return coordinatewise([c](double) { return c; }, oracle::detail::num(c));
    }
    throw InvalidInput("unknown map op '" + op + "'");
}

inline MapFamily parse_family(const json& j) {
    detail::require(j.is_object(), "family must be an object");
    if (j.contains("fixture")) {
        const auto fx = get_fixture(j["fixture"].get<std::string>());
        detail::require(fx.family.has_value(), "fixture " + fx.name + " has no map family");
        return *fx.family;
    }
    detail::require(j.contains("op") && j["op"].is_string(), "family needs a string 'op'");
    const auto op = j["op"].get<std::string>();
    if (op == "geometric") {
        const double base = field(j, "base");
        detail::require(std::isfinite(base) && base > 0.0, "geometric base must be > 0");
        return fixtures::geometric_family(base);
    }
    if (op == "same") {
        detail::require(j.contains("map"), "same-map family needs a 'map'");
        const SelfMap m = parse_map(j["map"]);
        return {[m](std::size_t) { return m; }, "T_i = " + m.label};
    }
    throw InvalidInput("unknown family op '" + op + "'");
}

inline DeltaMatrix parse_deltas(const json& j) {
    if (j.is_number()) {
        const double d = j.get<double>();
        detail::require(std::isfinite(d) && d >= 0.0, "constant delta must be >= 0");
        return DeltaMatrix::constant(d);
    }
    detail::require(j.is_object() && j.contains("fixture"),
                    "deltas must be a number or {\"fixture\": name}");
    const auto fx = get_fixture(j["fixture"].get<std::string>());
    detail::require(fx.family_config.has_value(), "fixture " + fx.name + " has no deltas");
    return fx.family_config->deltas;
}

inline PhiFunction parse_phi(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "identity") return PhiFunction::identity();
        if (s == "sqrt") return PhiFunction::sqrt();
        throw InvalidInput("unknown F '" + s + "'");
    }
    detail::require(j.is_object() && j.contains("power"), "F must be a name or {\"power\": s}");
    return PhiFunction::power(field(j, "power"));
}

inline PsiFunction parse_psi(const json& j, int arity) {
    detail::require(j.is_string(), "psi must be \"sum\" or \"max\"");
    const auto s = j.get<std::string>();
    if (s == "sum") return PsiFunction::sum(arity);
    if (s == "max") return PsiFunction::max(arity);
    throw InvalidInput("unknown psi '" + s + "'");
}

struct PairConfig {
    SelfMap T1;
    SelfMap T2;
    double k = 0.0;
    std::size_t r1 = 1;
    std::size_t r2 = 1;
};

inline PairConfig parse_pair(const json& j) {
    detail::require(j.is_object() && j.contains("T1") && j.contains("T2"),
                    "pair config needs 'T1' and 'T2'");
    return {parse_map(j["T1"]), parse_map(j["T2"]), field(j, "k"), count_field_or(j, "r1", 1),
            count_field_or(j, "r2", 1)};
}

/// Constant alpha and beta: {"f": M, "alpha": a, "beta": b, "C_alpha", "C_beta"}.
inline std::pair<SelfMap, AdmissibilityConfig> parse_admissible(const json& j) {
    detail::require(j.is_object() && j.contains("f"), "admissible config needs 'f'");
    AdmissibilityConfig c;
    const double a = field(j, "alpha");
    const double b = field(j, "beta");
    c.alpha = [a](const Point&, const Point&) { return a; };
    c.beta = [b](const Point&, const Point&) { return b; };
    c.C_alpha = field_or(j, "C_alpha", a);
    c.C_beta = field_or(j, "C_beta", b);
    c.check_subsequence_condition = j.value("check_subsequence_condition", false);
    return {parse_map(j["f"]), std::move(c)};
}

/// {"family", "deltas", "gammas"?, "F"?, "psi"?, "scheme"?, "gate"?, "horizon"?,
///  "lambda_grid"?, "with_2s_factor"?, "r"?, "probe"?}
inline std::pair<MapFamily, FamilyConfig> parse_family_config(const json& j) {
    detail::require(j.is_object() && j.contains("family") && j.contains("deltas"),
                    "family config needs 'family' and 'deltas'");
    FamilyConfig c;
    c.deltas = parse_deltas(j["deltas"]);
    if (j.contains("scheme")) c.scheme = family_scheme_from_string(j["scheme"].get<std::string>());
    if (j.contains("F")) c.F = parse_phi(j["F"]);
    if (j.contains("gammas")) {
        const double g = field(j, "gammas");
        c.gammas = [g](std::size_t, std::size_t) { return g; };
    }
    if (j.contains("psi")) c.psi = parse_psi(j["psi"], is_ternary(c.scheme) ? 3 : 2);
    if (j.contains("gate")) c.gate.kind = gate_kind_from_string(j["gate"].get<std::string>());
    c.gate.horizon = count_field_or(j, "horizon", c.gate.horizon);
    c.gate.with_2s_factor = j.value("with_2s_factor", false);
    if (j.contains("lambda_grid")) c.gate.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
    c.r = count_field_or(j, "r", 1);
    if (j.contains("probe")) c.probe = j["probe"].get<std::vector<std::size_t>>();
    return {parse_family(j["family"]), std::move(c)};
}

}  // namespace io
}  // namespace pmt
