#pragma once

// Core data model: points, distance oracles, space descriptors, self maps
// and the seeded sampler every checker draws from.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pmt/error.hpp"

namespace pmt {

// ---------------------------------------------------------------------------
// Point
// ---------------------------------------------------------------------------

/// A finite real vector. Scalar spaces use dimension 1.
class Point {
public:
    Point() = default;

    // Implicit on purpose: scalar spaces are the common case.
    Point(double x) : coords_{x} { validate(); }  // NOLINT(google-explicit-constructor)

    Point(std::initializer_list<double> xs) : coords_(xs) { validate(); }

    explicit Point(std::vector<double> xs) : coords_(std::move(xs)) { validate(); }

    [[nodiscard]] std::size_t dim() const noexcept { return coords_.size(); }
    [[nodiscard]] std::span<const double> coords() const noexcept { return coords_; }
    [[nodiscard]] double operator[](std::size_t i) const { return coords_.at(i); }

    [[nodiscard]] double scalar() const {
        detail::require(coords_.size() == 1, "scalar() called on a point of dimension " +
                                                 std::to_string(coords_.size()));
        return coords_[0];
    }

    // Exact (bitwise up to signed zero) coordinate comparison.
    friend bool operator==(const Point&, const Point&) = default;
    friend auto operator<=>(const Point& a, const Point& b) {
        return std::lexicographical_compare_three_way(a.coords_.begin(), a.coords_.end(),
                                                      b.coords_.begin(), b.coords_.end(),
                                                      [](double u, double v) {
                                                          return std::weak_order(u, v);
                                                      });
    }

    [[nodiscard]] std::string str() const {
        std::ostringstream os;
        os.precision(17);
        if (coords_.size() == 1) {
            os << coords_[0];
            return os.str();
        }
        os << '(';
        for (std::size_t i = 0; i < coords_.size(); ++i) os << (i ? ", " : "") << coords_[i];
        os << ')';
        return os.str();
    }

private:
    void validate() const {
        for (double c : coords_) {
            if (!std::isfinite(c)) throw InvalidInput("point coordinate is not finite");
        }
    }

    std::vector<double> coords_;
};

/// Sup-norm of the coordinate difference. Used for the near-diagonal guard and
/// fixed-point uniqueness scans; never as a space's distance.
[[nodiscard]] inline double coord_gap(const Point& a, const Point& b) {
    detail::require(a.dim() == b.dim(), "dimension mismatch");
    double g = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
    return g;
}

// ---------------------------------------------------------------------------
// Domain boxes
// ---------------------------------------------------------------------------

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool open_lo = false;
    bool open_hi = false;

    [[nodiscard]] bool contains(double x) const noexcept {
        const bool lo_ok = open_lo ? x > lo : x >= lo;
        const bool hi_ok = open_hi ? x < hi : x <= hi;
        return lo_ok && hi_ok;
    }

    /// Closed interval used for sampling; open ends pulled in by `margin`.
    [[nodiscard]] std::pair<double, double> sampling_bounds(double margin = kOpenMargin) const {
        return {open_lo ? lo + margin : lo, open_hi ? hi - margin : hi};
    }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned box in R^d with per-endpoint open/closed flags.
struct Box {
    std::vector<Interval> axes;

    static Box closed(double lo, double hi) { return Box{{Interval{lo, hi, false, false}}}; }
    static Box open(double lo, double hi) { return Box{{Interval{lo, hi, true, true}}}; }

    [[nodiscard]] std::size_t dim() const noexcept { return axes.size(); }

    [[nodiscard]] bool contains(const Point& p) const {
        if (p.dim() != axes.size()) return false;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            if (!axes[i].contains(p[i])) return false;
        }
        return true;
    }

    /// True when every point of `inner` lies in this box.
    [[nodiscard]] bool contains(const Box& inner) const {
        if (inner.dim() != dim()) return false;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            const auto& o = axes[i];
            const auto& n = inner.axes[i];
            const bool lo_ok = n.lo > o.lo || (n.lo == o.lo && (!o.open_lo || n.open_lo));
            const bool hi_ok = n.hi < o.hi || (n.hi == o.hi && (!o.open_hi || n.open_hi));
            if (!lo_ok || !hi_ok) return false;
        }
        return true;
    }

    friend bool operator==(const Box&, const Box&) = default;
};

// ---------------------------------------------------------------------------
// Distance oracles
// ---------------------------------------------------------------------------

/// Pure function p : X x X -> [0, inf). `expr` holds the serializable
/// expression tree when the oracle was built from one (null otherwise).
struct DistanceOracle {
    using Fn = std::function<double(const Point&, const Point&)>;

    Fn fn;
    std::string label;
    nlohmann::json expr;

    [[nodiscard]] double operator()(const Point& x, const Point& y) const { return fn(x, y); }
    [[nodiscard]] bool serializable() const noexcept { return !expr.is_null(); }
};

// ---------------------------------------------------------------------------
// Space descriptors
// ---------------------------------------------------------------------------

enum class SpaceClass { KPMS, PartialBMetric, PartialRectangular, MetricType, Metric };

[[nodiscard]] constexpr std::string_view to_string(SpaceClass c) noexcept {
    switch (c) {
        case SpaceClass::KPMS: return "KPMS";
        case SpaceClass::PartialBMetric: return "PartialBMetric";
        case SpaceClass::PartialRectangular: return "PartialRectangular";
        case SpaceClass::MetricType: return "MetricType";
        case SpaceClass::Metric: return "Metric";
    }
    return "Unknown";
}

[[nodiscard]] inline SpaceClass space_class_from_string(std::string_view s) {
    for (auto c : {SpaceClass::KPMS, SpaceClass::PartialBMetric, SpaceClass::PartialRectangular,
                   SpaceClass::MetricType, SpaceClass::Metric}) {
        if (to_string(c) == s) return c;
    }
    throw InvalidInput("unknown space class '" + std::string(s) + "'");
}

/// True for classes whose axioms are pm1-pm4 (partial metric family),
/// false for D1-D3 (metric type family).
[[nodiscard]] constexpr bool is_partial_class(SpaceClass c) noexcept {
    return c == SpaceClass::KPMS || c == SpaceClass::PartialBMetric ||
           c == SpaceClass::PartialRectangular;
}

struct SpaceParams {
    DistanceOracle oracle;
    double coeff_K = 1.0;
    int polygon_order = 1;
    Box domain = Box::closed(0.0, 1.0);
    SpaceClass class_claim = SpaceClass::KPMS;
    bool hausdorff = false;  // asserted, never verified
    bool complete = false;   // asserted, never verified
    std::string name;
    nlohmann::json provenance;  // set by transforms
};

/// The triplet (X, p, K) plus polygon order and class claim. Immutable.
class SpaceDescriptor {
public:
    explicit SpaceDescriptor(SpaceParams params) : p_(std::move(params)) {
        detail::require(static_cast<bool>(p_.oracle.fn), "space has no distance oracle");
        detail::require(std::isfinite(p_.coeff_K) && p_.coeff_K >= 1.0,
                        "coefficient K must be >= 1");
        detail::require(p_.polygon_order >= 1, "polygon order n must be >= 1");
        detail::require(p_.domain.dim() >= 1, "domain must have at least one axis");
        for (const auto& ax : p_.domain.axes) {
            detail::require(std::isfinite(ax.lo) && std::isfinite(ax.hi) && ax.lo <= ax.hi,
                            "domain interval bounds must be finite with lo <= hi");
            detail::require(ax.lo < ax.hi || (!ax.open_lo && !ax.open_hi),
                            "degenerate open interval is empty");
        }
        if (p_.class_claim == SpaceClass::PartialBMetric) {
            detail::require(p_.polygon_order == 1, "PartialBMetric requires n = 1");
        }
        if (p_.class_claim == SpaceClass::PartialRectangular) {
            detail::require(p_.polygon_order == 2 && p_.coeff_K == 1.0,
                            "PartialRectangular requires n = 2 and K = 1");
        }
        if (p_.class_claim == SpaceClass::Metric) {
            detail::require(p_.polygon_order == 1 && p_.coeff_K == 1.0,
                            "Metric requires n = 1 and K = 1");
        }
    }

    [[nodiscard]] const DistanceOracle& oracle() const noexcept { return p_.oracle; }
    [[nodiscard]] double coeff_K() const noexcept { return p_.coeff_K; }
    [[nodiscard]] int polygon_order() const noexcept { return p_.polygon_order; }
    [[nodiscard]] const Box& domain() const noexcept { return p_.domain; }
    [[nodiscard]] std::size_t dim() const noexcept { return p_.domain.dim(); }
    [[nodiscard]] SpaceClass class_claim() const noexcept { return p_.class_claim; }
    [[nodiscard]] bool hausdorff_asserted() const noexcept { return p_.hausdorff; }
    [[nodiscard]] bool complete_asserted() const noexcept { return p_.complete; }
    [[nodiscard]] const std::string& name() const noexcept { return p_.name; }
    [[nodiscard]] const SpaceParams& params() const noexcept { return p_; }

    /// Copy with a different coefficient / order / claim (validated again).
    [[nodiscard]] SpaceDescriptor with(double K, int n, SpaceClass claim) const {
        SpaceParams q = p_;
        q.coeff_K = K;
        q.polygon_order = n;
        q.class_claim = claim;
        return SpaceDescriptor(std::move(q));
    }

private:
    SpaceParams p_;
};

namespace detail {

inline void require_in_domain(const SpaceDescriptor& space, const Point& x) {
    if (!space.domain().contains(x)) {
        throw InvalidInput("point " + x.str() + " lies outside the space domain");
    }
}

inline double checked_value(double v, const Point& x, const Point& y) {
    if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream os;
        os.precision(17);
        os << "distance oracle returned " << v << " at (" << x.str() << ", " << y.str()
           << "); values must be finite and non-negative";
        throw InvalidInput(os.str());
    }
    return v;
}

}  // namespace detail

/// p(x, y) with the argument order normalized, so the result never depends
/// on evaluation order.
[[nodiscard]] inline double eval_distance(const SpaceDescriptor& space, const Point& x,
                                          const Point& y) {
    detail::require_in_domain(space, x);
    detail::require_in_domain(space, y);
    const bool swap = y < x;
    const Point& a = swap ? y : x;
    const Point& b = swap ? x : y;
    return detail::checked_value(space.oracle()(a, b), a, b);
}

/// p(x, y) exactly as the oracle computes it, without order normalization.
/// The symmetry checker needs this; everything else uses eval_distance.
[[nodiscard]] inline double raw_distance(const SpaceDescriptor& space, const Point& x,
                                         const Point& y) {
    detail::require_in_domain(space, x);
    detail::require_in_domain(space, y);
    return detail::checked_value(space.oracle()(x, y), x, y);
}

[[nodiscard]] inline double self_distance(const SpaceDescriptor& space, const Point& x) {
    return eval_distance(space, x, x);
}

/// Membership in the open p-ball: p(c, y) < radius + p(c, c).
[[nodiscard]] inline bool ball_contains(const SpaceDescriptor& space, const Point& center,
                                        double radius, const Point& y) {
    detail::require(radius > 0.0 && std::isfinite(radius), "ball radius must be positive");
    return eval_distance(space, center, y) < radius + self_distance(space, center);
}

// ---------------------------------------------------------------------------
// Maps
// ---------------------------------------------------------------------------

struct SelfMap {
    std::function<Point(const Point&)> apply;
    std::string label;

    [[nodiscard]] Point operator()(const Point& x) const { return apply(x); }
};

/// Countable family {T_n}, n >= 1.
struct MapFamily {
    std::function<SelfMap(std::size_t)> generator;
    std::string label;

    [[nodiscard]] SelfMap operator()(std::size_t n) const {
        detail::require(n >= 1, "map family indices start at 1");
        return generator(n);
    }
};

// ---------------------------------------------------------------------------
// Sampler
// ---------------------------------------------------------------------------

namespace detail {

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Evenly spaced axis values including both (sampling) endpoints.
[[nodiscard]] inline std::vector<double> axis_grid(const Interval& ax, std::size_t g,
                                                   double margin) {
    auto [lo, hi] = ax.sampling_bounds(margin);
    std::vector<double> v;
    v.reserve(g);
    if (g == 1) {
        v.push_back(0.5 * (lo + hi));
        return v;
    }
    for (std::size_t k = 0; k < g; ++k) {
        // Pin the last node to hi exactly; lo + (hi-lo)*1 can round past it.
        v.push_back(k + 1 == g ? hi : lo + (hi - lo) * static_cast<double>(k) /
                                              static_cast<double>(g - 1));
    }
    return v;
}

}  // namespace detail

/// Regular grid with `per_axis` nodes per axis over a box (open ends shrunk).
[[nodiscard]] inline std::vector<Point> grid_points(const Box& region, std::size_t per_axis,
                                                    double margin = kOpenMargin) {
    detail::require(per_axis >= 1, "grid needs at least one node per axis");
    std::vector<std::vector<double>> axes;
    for (const auto& ax : region.axes) axes.push_back(detail::axis_grid(ax, per_axis, margin));
    std::vector<Point> out;
    std::vector<std::size_t> idx(axes.size(), 0);
    for (;;) {
        std::vector<double> c(axes.size());
        for (std::size_t a = 0; a < axes.size(); ++a) c[a] = axes[a][idx[a]];
        out.emplace_back(std::move(c));
        std::size_t a = 0;
        while (a < axes.size() && ++idx[a] == axes[a].size()) idx[a++] = 0;
        if (a == axes.size()) break;
    }
    return out;
}

/// Deterministic source of sample tuples: a regular grid (all tuples of grid
/// nodes) followed by `random_count` seeded uniform tuples.
struct Sampler {
    std::uint64_t seed = 0;
    Box region = Box::closed(0.0, 1.0);
    /// Grid nodes per axis. 0 picks the smallest density whose grid holds at
    /// least as many tuples as the random part.
    std::size_t grid_density = 0;
    std::size_t random_count = 5000;
    bool use_grid = true;
    double margin = kOpenMargin;

    /// Default budget split: half grid, half random.
    static Sampler with_budget(std::uint64_t seed, Box region, std::size_t budget) {
        Sampler s;
        s.seed = seed;
        s.region = std::move(region);
        s.random_count = budget / 2;
        return s;
    }

    [[nodiscard]] std::size_t grid_nodes_for(std::size_t arity) const {
        if (!use_grid) return 0;
        if (grid_density > 0) return grid_density;
        const double target = std::max<double>(2.0, static_cast<double>(random_count));
        const double exponent = 1.0 / static_cast<double>(arity * region.dim());
        auto g = static_cast<std::size_t>(std::ceil(std::pow(target, exponent) - 1e-9));
        return std::max<std::size_t>(2, g);
    }

    /// Tuples of `arity` points (pairs: 2, pm4 chains: n + 2).
    [[nodiscard]] std::vector<std::vector<Point>> tuples(std::size_t arity) const {
        detail::require(arity >= 1, "tuple arity must be >= 1");
        std::vector<std::vector<Point>> out;
        if (use_grid) {
            const auto nodes = grid_points(region, grid_nodes_for(arity), margin);
            std::vector<std::size_t> idx(arity, 0);
            for (;;) {
                std::vector<Point> t;
                t.reserve(arity);
                for (std::size_t a = 0; a < arity; ++a) t.push_back(nodes[idx[a]]);
                out.push_back(std::move(t));
                std::size_t a = 0;
                while (a < arity && ++idx[a] == nodes.size()) idx[a++] = 0;
                if (a == arity) break;
            }
        }
        std::uint64_t state = detail::splitmix64(seed ^ (0xA24BAED4963EE407ULL * arity));
        auto next_unit = [&state] {
            state = detail::splitmix64(state);
            return static_cast<double>(state >> 11) * 0x1.0p-53;
        };
        for (std::size_t r = 0; r < random_count; ++r) {
            std::vector<Point> t;
            t.reserve(arity);
            for (std::size_t a = 0; a < arity; ++a) {
                std::vector<double> c(region.dim());
                for (std::size_t d = 0; d < region.dim(); ++d) {
                    auto [lo, hi] = region.axes[d].sampling_bounds(margin);
                    c[d] = lo + (hi - lo) * next_unit();
                }
                t.emplace_back(std::move(c));
            }
            out.push_back(std::move(t));
        }
        return out;
    }

    [[nodiscard]] std::vector<Point> points() const {
        std::vector<Point> out;
        for (auto& t : tuples(1)) out.push_back(std::move(t[0]));
        return out;
    }
};

/// Sampler over the whole domain of a space.
[[nodiscard]] inline Sampler domain_sampler(const SpaceDescriptor& space, std::uint64_t seed,
                                            std::size_t budget) {
    return Sampler::with_budget(seed, space.domain(), budget);
}

namespace detail {

inline void require_sampler_fits(const SpaceDescriptor& space, const Sampler& sampler) {
    require(space.domain().contains(sampler.region),
            "sampler region must lie inside the space domain");
    require(sampler.use_grid || sampler.random_count > 0, "sampler yields no samples");
}

}  // namespace detail

/// Sampled witnesses x with T(x) outside the domain (empty when none found).
[[nodiscard]] inline std::vector<Point> self_map_escapes(const SpaceDescriptor& space,
                                                         const SelfMap& map,
                                                         const Sampler& sampler) {
    std::vector<Point> escapes;
    for (const auto& x : sampler.points()) {
        if (!space.domain().contains(map(x))) escapes.push_back(x);
    }
    return escapes;
}

}  // namespace pmt
