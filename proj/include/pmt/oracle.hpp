#pragma once

// Distance oracles composed from a small expression set. Every builder keeps
// the JSON expression tree next to the compiled closure so spaces built from
// expressions can be written back out.
//
// Expression grammar (JSON objects keyed by "op"):
//   {"op":"absdiff"}                     max_i |x_i - y_i|
//   {"op":"posdiff"}                     max_i max(x_i - y_i, 0)   (asymmetric)
//   {"op":"max"}                         max_i max(x_i, y_i)
//   {"op":"const","value":c}
//   {"op":"pow","arg":E,"exp":q}         E^q
//   {"op":"affine","arg":E,"scale":a,"shift":b}
//   {"op":"sum","args":[E,...]}
//   {"op":"pt","arg":E}                  2E(x,y) - E(x,x) - E(y,y)
//   {"op":"dp","arg":E}                  0 on the exact diagonal, else E
//   {"op":"basepoint","arg":E,"x0":[...]}  (E(x,y) + E(x,x0) + E(y,x0)) / 2
// A bare string names an oracle registered by a resolver (fixtures).

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmt/error.hpp"
#include "pmt/spaces.hpp"

namespace pmt::oracle {

using nlohmann::json;

namespace detail {

inline std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void same_dim(const Point& x, const Point& y) {
    pmt::detail::require(x.dim() == y.dim(), "oracle arguments differ in dimension");
}

}  // namespace detail

[[nodiscard]] inline DistanceOracle abs_diff() {
    return {[](const Point& x, const Point& y) {
                detail::same_dim(x, y);
                return coord_gap(x, y);
            },
            "|x-y|", json{{"op", "absdiff"}}};
}

[[nodiscard]] inline DistanceOracle pos_diff() {
    return {[](const Point& x, const Point& y) {
                detail::same_dim(x, y);
                double v = 0.0;
                for (std::size_t i = 0; i < x.dim(); ++i) v = std::max(v, x[i] - y[i]);
                return v;
            },
            "max{x-y,0}", json{{"op", "posdiff"}}};
}

[[nodiscard]] inline DistanceOracle max_coord() {
    return {[](const Point& x, const Point& y) {
                detail::same_dim(x, y);
                double v = -std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < x.dim(); ++i) v = std::max({v, x[i], y[i]});
                return v;
            },
            "max{x,y}", json{{"op", "max"}}};
}

[[nodiscard]] inline DistanceOracle constant(double c) {
    pmt::detail::require(std::isfinite(c), "constant oracle value must be finite");
    return {[c](const Point&, const Point&) { return c; }, detail::num(c),
            json{{"op", "const"}, {"value", c}}};
}

[[nodiscard]] inline DistanceOracle power(const DistanceOracle& base, double q) {
    pmt::detail::require(std::isfinite(q) && q > 0.0, "oracle exponent must be positive");
    auto f = base.fn;
    json e = base.serializable() ? json{{"op", "pow"}, {"arg", base.expr}, {"exp", q}} : json{};
    return {[f, q](const Point& x, const Point& y) { return std::pow(f(x, y), q); },
            "(" + base.label + ")^" + detail::num(q), std::move(e)};
}

[[nodiscard]] inline DistanceOracle affine(const DistanceOracle& base, double scale,
                                           double shift) {
    auto f = base.fn;
    json e = base.serializable()
                 ? json{{"op", "affine"}, {"arg", base.expr}, {"scale", scale}, {"shift", shift}}
                 : json{};
    return {[f, scale, shift](const Point& x, const Point& y) { return scale * f(x, y) + shift; },
            detail::num(scale) + "*(" + base.label + ")+" + detail::num(shift), std::move(e)};
}

[[nodiscard]] inline DistanceOracle sum(std::vector<DistanceOracle> terms) {
    pmt::detail::require(!terms.empty(), "sum oracle needs at least one term");
    std::vector<DistanceOracle::Fn> fns;
    std::string label;
    json args = json::array();
    bool serial = true;
    for (const auto& t : terms) {
        fns.push_back(t.fn);
        label += (label.empty() ? "" : " + ") + t.label;
        serial = serial && t.serializable();
        args.push_back(t.expr);
    }
    json e = serial ? json{{"op", "sum"}, {"args", args}} : json{};
    return {[fns = std::move(fns)](const Point& x, const Point& y) {
                double v = 0.0;
                for (const auto& f : fns) v += f(x, y);
                return v;
            },
            label, std::move(e)};
}

/// p^t(x,y) = 2p(x,y) - p(x,x) - p(y,y).
[[nodiscard]] inline DistanceOracle pt(const DistanceOracle& base) {
    auto f = base.fn;
    json e = base.serializable() ? json{{"op", "pt"}, {"arg", base.expr}} : json{};
    return {[f](const Point& x, const Point& y) { return 2.0 * f(x, y) - f(x, x) - f(y, y); },
            "pt[" + base.label + "]", std::move(e)};
}

/// d_p: exactly 0 when the coordinates are identical, p otherwise.
[[nodiscard]] inline DistanceOracle dp(const DistanceOracle& base) {
    auto f = base.fn;
    json e = base.serializable() ? json{{"op", "dp"}, {"arg", base.expr}} : json{};
    return {[f](const Point& x, const Point& y) { return x == y ? 0.0 : f(x, y); },
            "dp[" + base.label + "]", std::move(e)};
}

/// (d(x,y) + d(x,x0) + d(y,x0)) / 2.
[[nodiscard]] inline DistanceOracle basepoint(const DistanceOracle& metric, const Point& x0) {
    auto f = metric.fn;
    json e = metric.serializable()
                 ? json{{"op", "basepoint"},
                        {"arg", metric.expr},
                        {"x0", std::vector<double>(x0.coords().begin(), x0.coords().end())}}
                 : json{};
    return {[f, x0](const Point& x, const Point& y) {
                return 0.5 * (f(x, y) + f(x, x0) + f(y, x0));
            },
            "basepoint[" + metric.label + ", " + x0.str() + "]", std::move(e)};
}

/// Opaque oracle from an arbitrary pure function (not serializable).
[[nodiscard]] inline DistanceOracle custom(DistanceOracle::Fn fn, std::string label) {
    return {std::move(fn), std::move(label), json{}};
}

/// Maps a bare oracle name (e.g. a fixture name) to an oracle.
using NameResolver = std::function<DistanceOracle(const std::string&)>;

[[nodiscard]] inline DistanceOracle from_json(const json& j, const NameResolver& resolve = {}) {
    if (j.is_string()) {
        if (!resolve) throw InvalidInput("named oracle '" + j.get<std::string>() +
                                         "' but no name resolver available");
        return resolve(j.get<std::string>());
    }
    pmt::detail::require(j.is_object() && j.contains("op") && j["op"].is_string(),
                         "oracle expression must be an object with a string 'op'");
    const auto op = j["op"].get<std::string>();
    auto number = [&j](const char* key) {
        pmt::detail::require(j.contains(key) && j[key].is_number(),
                             std::string("oracle expression field '") + key +
                                 "' must be a number");
        return j[key].get<double>();
    };
    auto arg = [&j, &resolve] {
        pmt::detail::require(j.contains("arg"), "oracle expression needs an 'arg'");
        return from_json(j["arg"], resolve);
    };
    if (op == "absdiff") return abs_diff();
    if (op == "posdiff") return pos_diff();
    if (op == "max") return max_coord();
    if (op == "const") return constant(number("value"));
    if (op == "pow") return power(arg(), number("exp"));
    if (op == "affine") return affine(arg(), number("scale"), number("shift"));
    if (op == "pt") return pt(arg());
    if (op == "dp") return dp(arg());
    if (op == "basepoint") {
        pmt::detail::require(j.contains("x0") && j["x0"].is_array(),
                             "basepoint expression needs an 'x0' array");
        return basepoint(arg(), Point(j["x0"].get<std::vector<double>>()));
    }
    if (op == "sum") {
        pmt::detail::require(j.contains("args") && j["args"].is_array(),
                             "sum expression needs an 'args' array");
        std::vector<DistanceOracle> terms;
        for (const auto& a : j["args"]) terms.push_back(from_json(a, resolve));
        return sum(std::move(terms));
    }
    throw InvalidInput("unknown oracle op '" + op + "'");
}

}  // namespace pmt::oracle
