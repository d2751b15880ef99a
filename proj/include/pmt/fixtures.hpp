#pragma once

// Catalog of the worked examples E1-E5 and the pipelines that reproduce
// their claimed values.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmt/axioms.hpp"
#include "pmt/error.hpp"
#include "pmt/oracle.hpp"
#include "pmt/phi.hpp"
#include "pmt/series.hpp"
#include "pmt/solvers.hpp"
#include "pmt/spaces.hpp"
#include "pmt/trace.hpp"

namespace pmt {

/// Where an expected value comes from: stated in the worked example, obtained
/// by evaluating a formula by hand, or true by definition.
enum class ExpectedOrigin { WorkedExample, Computed, Identity };

[[nodiscard]] constexpr std::string_view to_string(ExpectedOrigin o) noexcept {
    switch (o) {
        case ExpectedOrigin::WorkedExample: return "worked_example";
        case ExpectedOrigin::Computed: return "computed";
        case ExpectedOrigin::Identity: return "identity";
    }
    return "?";
}

/// Booleans are encoded as 1 / 0.
struct ExpectedValue {
    double value = 0.0;
    double tol = 0.0;
    ExpectedOrigin origin = ExpectedOrigin::Computed;
};

struct Fixture {
    std::string name;
    std::string description;
    SpaceDescriptor space;
    std::optional<MapFamily> family;
    std::optional<FamilyConfig> family_config;
    Point x0;
    std::map<std::string, ExpectedValue> expected;
};

inline constexpr std::size_t kFixtureSampleBudget = 10000;
inline constexpr double kFixedPointTol = 1e-8;

namespace fixtures {

inline SpaceDescriptor make_space(DistanceOracle o, double K, Box domain, SpaceClass cls,
                                  std::string name) {
    SpaceParams p;
    p.oracle = std::move(o);
    p.coeff_K = K;
    p.polygon_order = 1;
    p.domain = std::move(domain);
    p.class_claim = cls;
    p.complete = true;
    p.name = std::move(name);
    return SpaceDescriptor(std::move(p));
}

/// x -> x / base^i, coordinate-wise.
inline MapFamily geometric_family(double base) {
    return {[base](std::size_t i) {
                const double div = std::pow(base, static_cast<double>(i));
                return SelfMap{[div](const Point& x) {
                                   std::vector<double> c(x.coords().begin(), x.coords().end());
                                   for (double& v : c) v /= div;
                                   return Point(std::move(c));
                               },
                               "x/" + std::to_string(static_cast<long long>(base)) + "^" +
                                   std::to_string(i)};
            },
            "x/" + std::to_string(static_cast<long long>(base)) + "^i"};
}

/// (1 / (1 + 2^e))^2, exact while the denominator fits in int64.
inline DeltaMatrix inverse_square_deltas(std::function<std::size_t(std::size_t, std::size_t)> eta,
                                         std::string label) {
    return {[eta](std::size_t i, std::size_t j) {
                const double d = 1.0 + std::pow(2.0, static_cast<double>(eta(i, j)));
                return 1.0 / (d * d);
            },
            [eta](std::size_t i, std::size_t j) -> std::optional<Rational> {
                const std::size_t e = eta(i, j);
                if (e > 30) return std::nullopt;
                const std::int64_t d = 1 + (std::int64_t{1} << e);
                return Rational{1, d * d};
            },
            std::move(label)};
}

inline Fixture e1() {
    auto o = oracle::sum({oracle::power(oracle::max_coord(), 2.0),
                          oracle::power(oracle::abs_diff(), 2.0)});
    Fixture f{"E1-maxpow",
              "max{x,y}^s + |x-y|^s with s = 2 on [0,10]: a partial b-metric with K = 2^s "
              "that is not a partial metric",
              make_space(std::move(o), 4.0, Box::closed(0.0, 10.0), SpaceClass::PartialBMetric,
                         "E1-maxpow"),
              std::nullopt, std::nullopt, Point(0.0), {}};
    f.expected = {
        {"distance_at_1_2", {5.0, 0.0, ExpectedOrigin::Computed}},
        {"self_distance_at_3", {9.0, 0.0, ExpectedOrigin::Computed}},
        {"partial_axioms_pass", {1.0, 0.0, ExpectedOrigin::WorkedExample}},
        {"D1_pass", {0.0, 0.0, ExpectedOrigin::WorkedExample}},
        {"min_K_in_(1,4]", {1.0, 0.0, ExpectedOrigin::WorkedExample}},
        {"classified_PartialBMetric", {1.0, 0.0, ExpectedOrigin::WorkedExample}},
        {"classified_Metric", {0.0, 0.0, ExpectedOrigin::WorkedExample}},
    };
    return f;
}

inline Fixture e2() {
    auto o = oracle::sum({oracle::power(oracle::abs_diff(), 2.0), oracle::constant(2.0)});
    Fixture f{"E2-open-interval",
              "|x-y|^2 + 2 on (0,1), K = 2: 0-complete but not complete; 1/(2n) is Cauchy "
              "with limit 2 and converges to no point of the space",
              make_space(std::move(o), 2.0, Box::open(0.0, 1.0), SpaceClass::PartialBMetric,
                         "E2-open-interval"),
              std::nullopt, std::nullopt, Point(0.5), {}};
    f.expected = {
        {"distance_at_0.25_0.75", {2.25, 1e-15, ExpectedOrigin::Computed}},
        {"self_distance_at_0.5", {2.0, 0.0, ExpectedOrigin::Computed}},
        {"partial_axioms_pass", {1.0, 0.0, ExpectedOrigin::WorkedExample}},
        {"cauchy_limit_of_1_over_2n", {2.0, 1e-6, ExpectedOrigin::WorkedExample}},
        {"is_zero_cauchy", {0.0, 0.0, ExpectedOrigin::WorkedExample}},
        {"limit_candidates_in_space", {0.0, 0.0, ExpectedOrigin::WorkedExample}},
    };
    return f;
}

inline Fixture e3() {
    FamilyConfig cfg;
    cfg.deltas = inverse_square_deltas(
        [](std::size_t i, std::size_t j) { return std::min(i, j); }, "(1/(1+2^min(i,j)))^2");
    cfg.F = PhiFunction::sqrt();
    cfg.scheme = FamilyScheme::KannanChoudhury3;
    cfg.gate.kind = GateKind::AlphaSeries;
    cfg.gate.with_2s_factor = true;
    cfg.gate.lambda_grid = {std::pow(2.0, 0.5) / 2.0};
    cfg.gate.horizon = 10000;
    Fixture f{"E3-kannan-family",
              "(max{x,y})^2 on [0,1], K = 2, T_i = x/16^i, ternary Kannan-Choudhury display "
              "with F = sqrt; rate terms sqrt(2)/2^i form a lambda-sequence, lambda = sqrt(2)/2",
              make_space(oracle::power(oracle::max_coord(), 2.0), 2.0, Box::closed(0.0, 1.0),
                         SpaceClass::KPMS, "E3-kannan-family"),
              geometric_family(16.0), std::move(cfg), Point(1.0), {}};
    f.expected = {
        {"fixed_point", {0.0, kFixedPointTol, ExpectedOrigin::WorkedExample}},
        {"lambda", {std::pow(2.0, 0.5) / 2.0, 0.0, ExpectedOrigin::WorkedExample}},
        {"n_lambda", {1.0, 0.0, ExpectedOrigin::Computed}},
        {"rate_term_1", {std::pow(2.0, 0.5) / 2.0, 1e-15, ExpectedOrigin::WorkedExample}},
        {"max_probe_residual", {0.0, kFixedPointTol, ExpectedOrigin::Identity}},
        {"partial_axioms_pass", {1.0, 0.0, ExpectedOrigin::WorkedExample}},
    };
    return f;
}

inline Fixture e4() {
    FamilyConfig cfg;
    cfg.deltas = inverse_square_deltas([](std::size_t i, std::size_t) { return i; },
                                       "(1/(1+2^i))^2");
    cfg.F = PhiFunction::sqrt();
    cfg.scheme = FamilyScheme::KannanChoudhury;
    cfg.gate.kind = GateKind::RelaxedCn;
    cfg.gate.horizon = 200;
    Fixture f{"E4-relaxed-family",
              "|x-y|^2 on [0,1], K = 2, T_i = x/4^i, Kannan-Choudhury display with F = sqrt; "
              "C_n = 2^(-n(n+1)/2) is summable",
              make_space(oracle::power(oracle::abs_diff(), 2.0), 2.0, Box::closed(0.0, 1.0),
                         SpaceClass::KPMS, "E4-relaxed-family"),
              geometric_family(4.0), std::move(cfg), Point(1.0), {}};
    f.expected = {
        {"fixed_point", {0.0, kFixedPointTol, ExpectedOrigin::WorkedExample}},
        {"Cn_exact_n_le_20", {1.0, 0.0, ExpectedOrigin::WorkedExample}},
        {"max_probe_residual", {0.0, kFixedPointTol, ExpectedOrigin::Identity}},
        {"partial_axioms_pass", {1.0, 0.0, ExpectedOrigin::WorkedExample}},
    };
    return f;
}

/// 2/3 + 1/(n+2) as one correctly rounded division when the rational fits.
inline double e5_value_at_zero(std::size_t n) {
    const auto d = static_cast<std::int64_t>(n) + 2;
    if (auto r = Rational::make(static_cast<WideInt>(2) * d + 3, static_cast<WideInt>(3) * d)) {
        return r->to_double();
    }
    return 2.0 / 3.0 + 1.0 / static_cast<double>(d);
}

inline MapFamily e5_family() {
    return {[](std::size_t n) {
                const double at_zero = e5_value_at_zero(n);
                return SelfMap{[at_zero](const Point& x) {
                                   return Point(x.scalar() > 0.0 ? 1.0 : at_zero);
                               },
                               "T_" + std::to_string(n)};
            },
            "1 on (0,1], 2/3 + 1/(n+2) at 0"};
}

inline DeltaMatrix e5_deltas() {
    auto gap = [](std::size_t i, std::size_t j) { return i > j ? i - j : j - i; };
    return {[gap](std::size_t i, std::size_t j) {
                return 1.0 / 3.0 + 1.0 / static_cast<double>(gap(i, j) + 6);
            },
            [gap](std::size_t i, std::size_t j) -> std::optional<Rational> {
                const auto g = static_cast<WideInt>(gap(i, j)) + 6;
                return Rational::make(g + 3, 3 * g);
            },
            "1/3 + 1/(|i-j|+6)"};
}

inline Fixture e5() {
    FamilyConfig cfg;
    cfg.deltas = e5_deltas();
    cfg.F = PhiFunction::identity();
    cfg.scheme = FamilyScheme::Chatterjea;
    cfg.gate.kind = GateKind::RelaxedCn;
    cfg.gate.horizon = 200;
    Fixture f{"E5-chatterjea-family",
              "|x-y| on [0,1], K = 1, T_n = 1 on (0,1] and 2/3 + 1/(n+2) at 0, Chatterjea "
              "display with F = identity; C_n = (10/11)^n; 1 is the only fixed point",
              make_space(oracle::abs_diff(), 1.0, Box::closed(0.0, 1.0), SpaceClass::KPMS,
                         "E5-chatterjea-family"),
              e5_family(), std::move(cfg), Point(0.0), {}};
    f.expected = {
        {"fixed_point", {1.0, 0.0, ExpectedOrigin::WorkedExample}},
        {"Cn_rel_err_n_le_50", {0.0, 1e-12, ExpectedOrigin::WorkedExample}},
        {"per_map_unique", {1.0, 0.0, ExpectedOrigin::WorkedExample}},
        {"case_region_violations", {0.0, 0.0, ExpectedOrigin::WorkedExample}},
        {"max_probe_residual", {0.0, kFixedPointTol, ExpectedOrigin::Identity}},
        {"partial_axioms_pass", {1.0, 0.0, ExpectedOrigin::WorkedExample}},
    };
    return f;
}

}  // namespace fixtures

[[nodiscard]] inline std::vector<std::string> fixture_names() {
    return {"E1-maxpow", "E2-open-interval", "E3-kannan-family", "E4-relaxed-family",
            "E5-chatterjea-family"};
}

[[nodiscard]] inline Fixture get_fixture(std::string_view name) {
    if (name == "E1-maxpow") return fixtures::e1();
    if (name == "E2-open-interval") return fixtures::e2();
    if (name == "E3-kannan-family") return fixtures::e3();
    if (name == "E4-relaxed-family") return fixtures::e4();
    if (name == "E5-chatterjea-family") return fixtures::e5();
    std::string msg = "unknown fixture '" + std::string(name) + "'; valid names:";
    for (const auto& n : fixture_names()) msg += " " + n;
    throw CatalogError(msg);
}

/// Oracle lookup by fixture name, for space files that reference one.
[[nodiscard]] inline DistanceOracle fixture_oracle(const std::string& name) {
    return get_fixture(name).space.oracle();
}

// ---------------------------------------------------------------------------
// Running fixtures
// ---------------------------------------------------------------------------

struct ExpectationDiff {
    std::string key;
    double expected = 0.0;
    double observed = 0.0;
    double tol = 0.0;
    ExpectedOrigin origin = ExpectedOrigin::Computed;
    bool pass = false;
};

struct FixtureReport {
    std::string name;
    std::uint64_t seed = 0;
    AxiomReport axioms;
    std::vector<ClassLabel> classes;
    std::optional<FixedPointReport> solver;
    std::optional<CauchyDiagnosis> cauchy;
    std::vector<PerMapVerdict> per_map;
    /// Stage-specific numbers (C_n tables, case-region counts, ...).
    nlohmann::json details = nlohmann::json::object();
    std::vector<ExpectationDiff> diffs;

    [[nodiscard]] bool passed() const {
        return std::all_of(diffs.begin(), diffs.end(), [](const auto& d) { return d.pass; });
    }
};

namespace detail {

/// Re-throws errors from a pipeline stage with the stage name prefixed.
template <class Fn>
auto staged(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const CatalogError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw InvalidInput(stage + ": " + e.what());
    } catch (const ConstructionError& e) {
        throw ConstructionError(stage + ": " + e.what());
    } catch (const InternalError& e) {
        throw InternalError(stage + ": " + e.what());
    }
}

inline void diff_all(FixtureReport& rep, const Fixture& fx,
                     const std::map<std::string, double>& observed) {
    for (const auto& [key, ev] : fx.expected) {
        auto it = observed.find(key);
        if (it == observed.end()) throw InternalError("fixture " + fx.name + " never observed " + key);
        const bool pass = std::abs(it->second - ev.value) <= ev.tol;
        rep.diffs.push_back({key, ev.value, it->second, ev.tol, ev.origin, pass});
    }
}

inline double max_residual(const FixedPointReport& r) {
    double m = 0.0;
    for (const auto& [k, v] : r.residuals) m = std::max(m, std::abs(v));
    return m;
}

inline bool partial_axioms_pass(const AxiomReport& a) {
    return a.passes(AxiomId::pm1) && a.passes(AxiomId::pm2) && a.passes(AxiomId::pm3) &&
           a.passes(AxiomId::pm4);
}

}  // namespace detail

/// Executes the fixture's pipeline and diffs every expected value.
[[nodiscard]] inline FixtureReport run_fixture(std::string_view name, std::uint64_t seed) {
    const Fixture fx = get_fixture(name);
    FixtureReport rep;
    rep.name = fx.name;
    rep.seed = seed;
    std::map<std::string, double> obs;
    const auto& sp = fx.space;
    const Sampler sampler = domain_sampler(sp, seed, kFixtureSampleBudget);

    rep.axioms = detail::staged("axioms", [&] { return verify_axioms(sp, sampler); });
    obs["partial_axioms_pass"] = detail::partial_axioms_pass(rep.axioms) ? 1.0 : 0.0;

    if (fx.name == "E1-maxpow") {
        obs["distance_at_1_2"] = eval_distance(sp, 1.0, 2.0);
        obs["self_distance_at_3"] = self_distance(sp, 3.0);
        obs["D1_pass"] = rep.axioms.passes(AxiomId::D1) ? 1.0 : 0.0;
        const auto est = detail::staged("min_K", [&] { return estimate_min_K(sp, sampler); });
        rep.details["min_K_estimate"] = est.value;
        obs["min_K_in_(1,4]"] = (est.value > 1.0 && est.value <= 4.0) ? 1.0 : 0.0;
        rep.classes = detail::staged("classify", [&] { return classify(sp, sampler); });
        obs["classified_PartialBMetric"] = has_class(rep.classes, SpaceClass::PartialBMetric);
        obs["classified_Metric"] = has_class(rep.classes, SpaceClass::Metric);
    } else if (fx.name == "E2-open-interval") {
        obs["distance_at_0.25_0.75"] = eval_distance(sp, 0.25, 0.75);
        obs["self_distance_at_0.5"] = self_distance(sp, 0.5);
        std::vector<Point> seq;
        for (int n = 1; n <= 200; ++n) seq.emplace_back(1.0 / (2.0 * n));
        rep.cauchy = detail::staged("cauchy", [&] { return detect_cauchy(sp, seq, 20); });
        obs["cauchy_limit_of_1_over_2n"] = rep.cauchy->limit_estimate;
        obs["is_zero_cauchy"] = rep.cauchy->is_zero_cauchy ? 1.0 : 0.0;
        const auto grid = grid_points(sp.domain(), 1000);
        const auto cands = detail::staged(
            "limit_scan", [&] { return find_limit_candidates(sp, seq, grid, 20); });
        rep.details["limit_scan_grid_points"] = grid.size();
        obs["limit_candidates_in_space"] = static_cast<double>(cands.size());
    } else {
        const auto& cfg = *fx.family_config;
        rep.solver = detail::staged("solve", [&] {
            SolverOptions o;
            o.seed = seed;
            return solve_family(sp, *fx.family, cfg, fx.x0, o);
        });
        const auto& sol = *rep.solver;
        obs["fixed_point"] = sol.point.scalar();
        obs["max_probe_residual"] = detail::max_residual(sol);
        rep.details["converged"] = sol.converged();
        rep.details["flags"] = sol.flags;

        if (fx.name == "E3-kannan-family") {
            const auto& cert = *sol.certificate;
            obs["lambda"] = cert.lambda.value_or(-1.0);
            obs["n_lambda"] = static_cast<double>(cert.n_lambda.value_or(0));
            obs["rate_term_1"] =
                rate_term(cfg.deltas(1, 2), cfg.deltas.exact_at(1, 2), cfg.F.degree(), true);
        } else if (fx.name == "E4-relaxed-family") {
            const auto C = product_terms_Cn(cfg.deltas, 20, cfg.F.degree());
            bool exact = true;
            nlohmann::json table = nlohmann::json::array();
            for (int n = 1; n <= 20; ++n) {
                const double want = std::ldexp(1.0, -n * (n + 1) / 2);
                exact = exact && C[static_cast<std::size_t>(n - 1)] == want;
                table.push_back(C[static_cast<std::size_t>(n - 1)]);
            }
            rep.details["Cn"] = table;
            obs["Cn_exact_n_le_20"] = exact ? 1.0 : 0.0;
        } else {
            const auto C = product_terms_Cn(cfg.deltas, 50, cfg.F.degree());
            double worst = 0.0;
            for (int n = 1; n <= 50; ++n) {
                const double want = std::pow(10.0 / 11.0, n);
                worst = std::max(worst, std::abs(C[static_cast<std::size_t>(n - 1)] - want) / want);
            }
            rep.details["Cn_max_rel_err"] = worst;
            obs["Cn_rel_err_n_le_50"] = worst;

            rep.per_map = detail::staged("per_map", [&] {
                return per_map_fixed_point_check(sp, *fx.family, cfg.deltas, sol,
                                                 [](std::size_t n) { return n + 1; });
            });
            obs["per_map_unique"] =
                std::all_of(rep.per_map.begin(), rep.per_map.end(),
                            [](const PerMapVerdict& v) { return v.ok(); })
                    ? 1.0
                    : 0.0;

            // The three case regions the example enumerates, sampled directly.
            std::uint64_t st = detail::splitmix64(seed ^ 0xE5E5E5E5ULL);
            auto unit = [&st] {
                st = detail::splitmix64(st);
                return static_cast<double>(st >> 11) * 0x1.0p-53;
            };
            auto index = [&st] {
                st = detail::splitmix64(st);
                return static_cast<std::size_t>(1 + st % 200);
            };
            std::size_t violations = 0;
            nlohmann::json cases = nlohmann::json::object();
            auto run_case = [&](const char* label, auto gen) {
                std::size_t bad = 0;
                double worst_slack = std::numeric_limits<double>::infinity();
                for (int k = 0; k < 500; ++k) {
                    auto [x, y, i, j] = gen();
                    const auto c = family_display(sp, *fx.family, cfg, i, j, x, y);
                    worst_slack = std::min(worst_slack, c.slack());
                    if (c.slack() < -kDefaultTol) ++bad;
                }
                cases[label] = {{"violations", bad}, {"worst_slack", worst_slack}};
                violations += bad;
            };
            // 1 - unit() lies in (0, 1].
            run_case("x_pos_y_pos", [&] {
                return std::tuple{Point(1.0 - unit()), Point(1.0 - unit()), index(), index()};
            });
            run_case("x_pos_y_zero", [&] {
                return std::tuple{Point(1.0 - unit()), Point(0.0), index(), index()};
            });
            run_case("x_zero_y_zero_i_ne_j", [&] {
                std::size_t i = index();
                std::size_t j = index();
                if (j == i) j = i + 1;
                return std::tuple{Point(0.0), Point(0.0), i, j};
            });
            rep.details["case_regions"] = cases;
            obs["case_region_violations"] = static_cast<double>(violations);
        }
    }
    detail::diff_all(rep, fx, obs);
    return rep;
}

}  // namespace pmt
