#include "cli.hpp"

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>

#include "pmt/pmt.hpp"

namespace pmt::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
    std::optional<std::uint64_t> seed;
    double tol = kDefaultTol;
};

std::uint64_t resolve_seed(const Common& c) {
    if (c.seed) return *c.seed;
    if (const char* env = std::getenv("PMT_SEED")) {
        const std::string_view s(env);
        std::uint64_t v = 0;
        const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && end == s.data() + s.size() && !s.empty()) return v;
        throw InvalidInput(std::string("PMT_SEED is not an unsigned integer: '") + env + "'");
    }
    return 0;
}

void require_input_file(const std::string& path) {
    if (!fs::is_regular_file(path)) throw InvalidInput("cannot read input file '" + path + "'");
}

void require_output_path(const std::string& path) {
    if (path.empty()) return;
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty() && !fs::is_directory(parent)) {
        throw InvalidInput("output directory '" + parent.string() + "' does not exist");
    }
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput("'" + path + "' is not valid JSON: " + e.what());
    }
}

/// Temp file in the target directory, then rename over the target.
void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InvalidInput("cannot write '" + tmp + "'");
        out << content;
        out.flush();
        if (!out) throw InvalidInput("short write to '" + tmp + "'");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw InvalidInput("cannot move report into place at '" + path + "'");
    }
}

void write_json(const std::string& path, const json& j) {
    if (!path.empty()) write_atomic(path, j.dump(2) + "\n");
}

json envelope(const std::string& command, std::uint64_t seed, double tol, json assumptions,
              json result) {
    return {{"tool", "pmt"},
            {"version", std::string(kVersion)},
            {"command", command},
            {"seed", seed},
            {"tol", tol},
            {"assumptions", std::move(assumptions)},
            {"result", std::move(result)}};
}

json space_assumptions(const SpaceDescriptor& s) {
    return {{"complete", s.complete_asserted() ? "asserted" : "not asserted"},
            {"hausdorff", s.hausdorff_asserted() ? "asserted" : "not asserted"}};
}

SpaceDescriptor load_space(const std::string& path) { return io::parse_space(read_json(path)); }

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

struct CheckArgs {
    std::string space;
    std::size_t samples = kFixtureSampleBudget;
    std::string chain_mode = "exact";
    std::string out;
};

int run_check(const CheckArgs& a, const Common& c, std::ostream& out) {
    require_input_file(a.space);
    require_output_path(a.out);
    const auto seed = resolve_seed(c);
    const auto mode = chain_mode_from_string(a.chain_mode);
    const auto space = load_space(a.space);
    const auto sampler = domain_sampler(space, seed, a.samples);
    auto rep = verify_axioms(space, sampler, mode, c.tol);
    rep.seed = seed;
    const bool holds = claim_holds(rep, space.class_claim());
    const auto labels = classify(space, sampler, mode, c.tol);

    json result = io::axiom_report(rep);
    result["claim"] = std::string(to_string(space.class_claim()));
    result["claim_holds"] = holds;
    result["classes"] = io::classes(labels);
    json assumptions = space_assumptions(space);
    assumptions["chain_mode"] = std::string(to_string(mode));
    write_json(a.out, envelope("check", seed, c.tol, std::move(assumptions), std::move(result)));

    std::ostringstream line;
    line << "check " << (space.name().empty() ? a.space : space.name()) << ":";
    for (const auto& [ax, v] : rep.per_axiom) line << ' ' << to_string(ax) << '=' << to_string(v);
    line << " | claim " << to_string(space.class_claim()) << "(K=" << space.coeff_K()
         << ",n=" << space.polygon_order() << ") " << (holds ? "holds" : "FAILS");
    out << line.str() << '\n';
    return holds ? kExitOk : kExitFlagged;
}

// ---------------------------------------------------------------------------
// transform
// ---------------------------------------------------------------------------

struct TransformArgs {
    std::string space;
    std::string kind;
    std::string x0;
    double q = 1.0;
    std::string space2;
    std::string out;
    std::size_t samples = kFixtureSampleBudget;
};

int run_transform(const TransformArgs& a, const Common& c, std::ostream& out) {
    require_input_file(a.space);
    if (!a.space2.empty()) require_input_file(a.space2);
    require_output_path(a.out);
    const auto seed = resolve_seed(c);
    const auto kind = transform_kind_from_string(a.kind);
    const auto space = load_space(a.space);
    const auto sampler = domain_sampler(space, seed, a.samples);

    std::optional<TransformResult> r;
    switch (kind) {
        case TransformKind::PT: r = to_pt(space, sampler, c.tol); break;
        case TransformKind::Basepoint:
            if (a.x0.empty()) throw InvalidInput("--kind basepoint needs --x0");
            r = from_metric_with_basepoint(space, io::parse_point_text(a.x0), sampler, c.tol);
            break;
        case TransformKind::InducedDp: r = induced_dp(space, sampler); break;
        case TransformKind::Power: r = power_pms(space, a.q, sampler); break;
        case TransformKind::SumPmBm:
            if (a.space2.empty()) throw InvalidInput("--kind sum needs --space2");
            r = sum_pm_bm(space, load_space(a.space2), sampler);
            break;
    }
    json doc = io::transform_result(*r);
    doc["provenance"]["seed"] = seed;
    doc["provenance"]["tool_version"] = std::string(kVersion);
    write_json(a.out, doc);

    out << "transform " << to_string(kind) << ": " << to_string(r->space.class_claim())
        << "(K=" << r->space.coeff_K() << ",n=" << r->space.polygon_order() << ")"
        << (r->claim_proved ? " proved" : "")
        << (r->claim_sample_verified ? (*r->claim_sample_verified ? " sample-verified"
                                                                  : " sample-FAILED")
                                     : "")
        << ", " << r->warnings.size() << " warning(s)\n";
    return r->claim_sample_verified.value_or(true) ? kExitOk : kExitFlagged;
}

// ---------------------------------------------------------------------------
// series
// ---------------------------------------------------------------------------

struct SeriesArgs {
    std::string terms;
    std::size_t horizon = 1000;
    std::string grid;
    std::string out;
};

std::vector<double> parse_number_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::logic_error&) {
            throw InvalidInput("cannot parse number '" + tok + "'");
        }
    }
    return v;
}

/// CSV file with header a_i, or harmonic | const:c | geometric:a:r | power:p.
std::vector<double> load_terms(const std::string& source, std::size_t horizon) {
    std::vector<double> t;
    if (fs::is_regular_file(source)) {
        std::ifstream in(source);
        std::string line;
        if (!std::getline(in, line) || line.substr(0, 3) != "a_i") {
            throw InvalidInput("terms CSV '" + source + "' must start with the header a_i");
        }
        while (std::getline(in, line)) {
            if (line.empty() || line == "\r") continue;
            if (line.back() == '\r') line.pop_back();
            const auto v = parse_number_list(line);
            if (v.size() != 1) throw InvalidInput("terms CSV rows hold exactly one number");
            t.push_back(v[0]);
        }
        if (t.size() > horizon) t.resize(horizon);
        return t;
    }
    std::vector<std::string> parts;
    {
        std::stringstream in(source);
        std::string tok;
        while (std::getline(in, tok, ':')) parts.push_back(tok);
    }
    auto arg = [&](std::size_t k) {
        if (parts.size() <= k) throw InvalidInput("term expression '" + source + "' is incomplete");
        return parse_number_list(parts[k]).at(0);
    };
    const std::string& kind = parts.empty() ? source : parts[0];
    for (std::size_t i = 1; i <= horizon; ++i) {
        const auto x = static_cast<double>(i);
        if (kind == "harmonic") t.push_back(1.0 / x);
        else if (kind == "const") t.push_back(arg(1));
        else if (kind == "geometric") t.push_back(arg(1) * std::pow(arg(2), x - 1.0));
        else if (kind == "power") t.push_back(std::pow(x, -arg(1)));
        else throw InvalidInput("unknown term expression '" + source + "'");
    }
    return t;
}

int run_series(const SeriesArgs& a, const Common& c, std::ostream& out) {
    require_output_path(a.out);
    if (a.horizon < 2) throw InvalidInput("--horizon must be >= 2");
    const auto seed = resolve_seed(c);
    const auto seq = RateSequence::given(load_terms(a.terms, a.horizon));
    const auto grid = a.grid.empty() ? default_lambda_grid() : parse_number_list(a.grid);
    const auto cert = certify_alpha_series(seq, grid);
    json result = io::certificate(cert);
    result["sequence"] = io::rate_sequence(seq);
    result["terms_source"] = a.terms;
    write_json(a.out, envelope("series", seed, c.tol, json::object(), std::move(result)));

    out << "series " << a.terms << ": " << to_string(cert.status);
    if (cert.lambda) out << " lambda=" << *cert.lambda << " n=" << cert.n_lambda.value_or(0);
    if (cert.witness_L) out << " witness_L=" << *cert.witness_L;
    out << " (horizon " << cert.horizon_checked << ")\n";
    return cert.status == CertificateStatus::Certified ? kExitOk : kExitFlagged;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveArgs {
    std::string space;
    std::string scheme;
    std::string config;
    std::string x0;
    std::string trace_out;
    std::string report_out;
    std::optional<double> step_tol;
    std::optional<std::size_t> max_iter;
    bool off_orbit = false;
    bool with_2s = false;
};

int solve_exit_code(const FixedPointReport& r) {
    if (r.trace.stop_reason == StopReason::HypothesisViolated) return kExitFlagged;
    if (!r.converged()) return kExitNotConverged;
    return r.all_checks_ok() ? kExitOk : kExitFlagged;
}

int run_solve(const SolveArgs& a, const Common& c, std::ostream& out) {
    require_input_file(a.space);
    require_input_file(a.config);
    require_output_path(a.trace_out);
    require_output_path(a.report_out);
    const auto seed = resolve_seed(c);
    const auto space = load_space(a.space);
    const json cfg = read_json(a.config);
    const Point x0 = io::parse_point_text(a.x0);

    SolverOptions o;
    o.seed = seed;
    o.tol = c.tol;
    o.step_tol = a.step_tol.value_or(io::field_or(cfg, "step_tol", o.step_tol));
    o.max_iter = a.max_iter.value_or(io::count_field_or(cfg, "max_iter", o.max_iter));
    o.off_orbit_checks = a.off_orbit;

    FixedPointReport rep;
    if (a.scheme == "banach-pair") {
        const auto p = io::parse_pair(cfg);
        rep = (p.r1 == 1 && p.r2 == 1) ? solve_pair_banach(space, p.T1, p.T2, p.k, x0, o)
                                       : solve_pair_power(space, p.T1, p.T2, p.r1, p.r2, p.k, x0, o);
    } else if (a.scheme == "kannan-pair") {
        const auto p = io::parse_pair(cfg);
        rep = solve_pair_kannan(space, p.T1, p.T2, p.k, x0, o);
    } else if (a.scheme == "admissible") {
        const auto [f, ac] = io::parse_admissible(cfg);
        rep = solve_admissible(space, f, ac, x0, o);
    } else if (a.scheme == "family") {
        auto [family, fc] = io::parse_family_config(cfg);
        if (a.with_2s) fc.gate.with_2s_factor = true;
        rep = solve_family(space, family, fc, x0, o);
    } else {
        throw InvalidInput("unknown scheme '" + a.scheme + "'");
    }

    json assumptions = space_assumptions(space);
    assumptions["solver"] = rep.assumptions;
    if (!a.trace_out.empty()) write_atomic(a.trace_out, io::trace_csv(rep.trace));
    write_json(a.report_out, envelope("solve", seed, c.tol, std::move(assumptions),
                                      io::fixed_point_report(rep)));

    out << "solve " << rep.scheme << ": x*=" << rep.point.str() << " after "
        << rep.trace.steps() << " steps (" << to_string(rep.trace.stop_reason) << ")";
    if (!rep.flags.empty()) {
        out << " flags:";
        for (const auto& f : rep.flags) out << ' ' << f;
    }
    out << '\n';
    return solve_exit_code(rep);
}

// ---------------------------------------------------------------------------
// fixtures
// ---------------------------------------------------------------------------

struct FixtureArgs {
    std::string name;
    std::string out_dir;
};

int run_fixtures_list(std::ostream& out) {
    for (const auto& n : fixture_names()) out << n << "  " << get_fixture(n).description << '\n';
    return kExitOk;
}

int run_fixtures_run(const FixtureArgs& a, const Common& c, std::ostream& out) {
    if (!a.out_dir.empty() && !fs::is_directory(a.out_dir)) {
        throw InvalidInput("output directory '" + a.out_dir + "' does not exist");
    }
    const auto seed = resolve_seed(c);
    const Fixture fx = get_fixture(a.name);
    const auto rep = run_fixture(a.name, seed);
    if (!a.out_dir.empty()) {
        const fs::path dir(a.out_dir);
        json assumptions = space_assumptions(fx.space);
        write_json((dir / (fx.name + ".json")).string(),
                   envelope("fixtures run", seed, kDefaultTol, std::move(assumptions),
                            io::fixture_report(rep)));
        if (rep.solver) {
            write_atomic((dir / (fx.name + ".trace.csv")).string(),
                         io::trace_csv(rep.solver->trace));
        }
    }
    std::size_t passed = 0;
    for (const auto& d : rep.diffs) passed += d.pass ? 1 : 0;
    out << "fixture " << fx.name << ": " << passed << "/" << rep.diffs.size()
        << " expectations met";
    if (rep.solver) out << ", fixed_point=" << rep.solver->point.str();
    out << '\n';
    return rep.passed() ? kExitOk : kExitFlagged;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "64-bit seed (default: PMT_SEED, else 0)");
    sub->add_option("--tol", c.tol, "absolute comparison tolerance")->check(CLI::NonNegativeNumber);
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Partial metric type spaces: axiom checks, transforms, series certificates "
                 "and fixed-point solvers"};
    app.name("pmt");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    Common common;
    CheckArgs check;
    TransformArgs transform;
    SeriesArgs series;
    SolveArgs solve;
    FixtureArgs fixture;
    std::function<int()> action;

    auto* c = app.add_subcommand("check", "sample-check the axioms of a space");
    c->add_option("--space", check.space, "space descriptor JSON")->required();
    c->add_option("--samples", check.samples, "sample budget")->check(CLI::PositiveNumber);
    c->add_option("--chain-mode", check.chain_mode, "pm4 chain lengths")
        ->check(CLI::IsMember({"exact", "upto"}));
    c->add_option("--out,--report-out", check.out, "report JSON path");
    add_common(c, common);
    c->callback([&] { action = [&] { return run_check(check, common, out); }; });

    auto* t = app.add_subcommand("transform", "build a derived space");
    t->add_option("--space", transform.space, "source space JSON")->required();
    t->add_option("--kind", transform.kind, "construction")
        ->required()
        ->check(CLI::IsMember({"pt", "basepoint", "dp", "power", "sum"}));
    t->add_option("--x0", transform.x0, "basepoint, comma-separated coordinates");
    t->add_option("--q", transform.q, "power exponent");
    t->add_option("--space2", transform.space2, "b-metric space JSON for --kind sum");
    t->add_option("--out", transform.out, "output space JSON")->required();
    t->add_option("--samples", transform.samples, "sample budget")->check(CLI::PositiveNumber);
    add_common(t, common);
    t->callback([&] { action = [&] { return run_transform(transform, common, out); }; });

    auto* s = app.add_subcommand("series", "alpha-series certificate for a term sequence");
    s->add_option("--terms", series.terms, "CSV file (header a_i) or expression")->required();
    s->add_option("--horizon", series.horizon, "number of terms checked");
    s->add_option("--grid", series.grid, "comma-separated lambda grid");
    s->add_option("--out,--report-out", series.out, "certificate JSON path");
    add_common(s, common);
    s->callback([&] { action = [&] { return run_series(series, common, out); }; });

    auto* v = app.add_subcommand("solve", "run a fixed-point scheme");
    v->add_option("--space", solve.space, "space descriptor JSON")->required();
    v->add_option("--scheme", solve.scheme, "solver")
        ->required()
        ->check(CLI::IsMember({"banach-pair", "kannan-pair", "admissible", "family"}));
    v->add_option("--config", solve.config, "scheme configuration JSON")->required();
    v->add_option("--x0", solve.x0, "initial point, comma-separated coordinates")->required();
    v->add_option("--trace-out", solve.trace_out, "trace CSV path");
    v->add_option("--report-out,--out", solve.report_out, "report JSON path");
    v->add_option("--step-tol", solve.step_tol, "stop when p(x_n, x_n+1) <= step-tol");
    v->add_option("--max-iter", solve.max_iter, "iteration cap");
    v->add_flag("--off-orbit", solve.off_orbit, "also sample the display off the orbit");
    v->add_flag("--with-2s-factor", solve.with_2s, "include 2^s in family rate terms");
    add_common(v, common);
    v->callback([&] { action = [&] { return run_solve(solve, common, out); }; });

    auto* f = app.add_subcommand("fixtures", "worked-example catalog");
    f->require_subcommand(1);
    auto* fl = f->add_subcommand("list", "list fixture names");
    fl->callback([&] { action = [&] { return run_fixtures_list(out); }; });
    auto* fr = f->add_subcommand("run", "run a fixture pipeline");
    fr->add_option("name", fixture.name, "fixture name")->required();
    fr->add_option("--out", fixture.out_dir, "directory for report JSON and trace CSV");
    add_common(fr, common);
    fr->callback([&] { action = [&] { return run_fixtures_run(fixture, common, out); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        return action ? action() : kExitUsage;
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const ConstructionError& e) {
        err << "construction failed: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const json::exception& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const InternalError& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace pmt::cli
