#pragma once

// Rate-term arithmetic for the family theorems: s_i built from the diagonal
// deltas, their running products C_n, alpha-series certificates and the
// relaxed (limsup + summable C_n) hypotheses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pmt/error.hpp"

namespace pmt {

// ---------------------------------------------------------------------------
// Exact rationals (small, overflow-checked)
// ---------------------------------------------------------------------------

/// Intermediate width for overflow-free int64 products.
__extension__ using WideInt = __int128;

/// num/den in lowest terms, den > 0. Arithmetic returns nullopt on int64
/// overflow so callers can fall back to floating point.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    [[nodiscard]] static std::optional<Rational> make(WideInt n, WideInt d) {
        if (d == 0) return std::nullopt;
        if (d < 0) {
            n = -n;
            d = -d;
        }
        WideInt a = n < 0 ? -n : n;
        WideInt b = d;
        while (b != 0) {
            const WideInt t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            n /= a;
            d /= a;
        }
        constexpr auto lim = static_cast<WideInt>(std::numeric_limits<std::int64_t>::max());
        if (n > lim || n < -lim || d > lim) return std::nullopt;
        return Rational{static_cast<std::int64_t>(n), static_cast<std::int64_t>(d)};
    }

    /// Exact value of a double when it fits (every finite double is dyadic).
    [[nodiscard]] static std::optional<Rational> from_double(double v) {
        if (!std::isfinite(v)) return std::nullopt;
        int e = 0;
        const double m = std::frexp(v, &e);  // v = m * 2^e, |m| in [0.5, 1)
        auto mant = static_cast<WideInt>(std::ldexp(m, 53));
        int shift = e - 53;
        while (shift < 0 && mant % 2 == 0 && mant != 0) {
            mant /= 2;
            ++shift;
        }
        if (mant == 0) return Rational{0, 1};
        if (shift >= 0) {
            if (shift > 62) return std::nullopt;
            return make(mant * (static_cast<WideInt>(1) << shift), 1);
        }
        if (-shift > 62) return std::nullopt;
        return make(mant, static_cast<WideInt>(1) << -shift);
    }

    [[nodiscard]] double to_double() const {
        return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
    }

    friend std::optional<Rational> operator*(Rational a, Rational b) {
        return make(static_cast<WideInt>(a.num) * b.num, static_cast<WideInt>(a.den) * b.den);
    }
    friend std::optional<Rational> operator/(Rational a, Rational b) {
        return make(static_cast<WideInt>(a.num) * b.den, static_cast<WideInt>(a.den) * b.num);
    }
    friend std::optional<Rational> operator+(Rational a, Rational b) {
        return make(static_cast<WideInt>(a.num) * b.den + static_cast<WideInt>(b.num) * a.den,
                    static_cast<WideInt>(a.den) * b.den);
    }
    friend std::optional<Rational> operator-(Rational a, Rational b) {
        return make(static_cast<WideInt>(a.num) * b.den - static_cast<WideInt>(b.num) * a.den,
                    static_cast<WideInt>(a.den) * b.den);
    }
    friend bool operator==(const Rational&, const Rational&) = default;
};

namespace detail {

/// Exact integer m-th root of v >= 0, when v is a perfect m-th power.
[[nodiscard]] inline std::optional<std::int64_t> exact_root(std::int64_t v, int m) {
    if (v < 0) return std::nullopt;
    if (m == 1 || v <= 1) return v;
    auto guess = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(v), 1.0 / m)));
    for (std::int64_t c = std::max<std::int64_t>(0, guess - 1); c <= guess + 1; ++c) {
        WideInt p = 1;
        bool over = false;
        for (int k = 0; k < m && !over; ++k) {
            p *= c;
            over = p > static_cast<WideInt>(v);
        }
        if (!over && p == static_cast<WideInt>(v)) return c;
    }
    return std::nullopt;
}

[[nodiscard]] inline std::optional<Rational> int_pow(Rational r, int k) {
    Rational acc{1, 1};
    for (int i = 0; i < k; ++i) {
        auto next = acc * r;
        if (!next) return std::nullopt;
        acc = *next;
    }
    return acc;
}

}  // namespace detail

/// r^s exactly when s = p/q with q <= 16 and r is a perfect q-th power.
[[nodiscard]] inline std::optional<Rational> exact_pow(Rational r, double s) {
    if (r.num < 0 || !(s > 0.0)) return std::nullopt;
    for (int q = 1; q <= 16; ++q) {
        const double pq = s * q;
        if (pq != std::floor(pq) || pq > 64.0) continue;
        const auto rn = detail::exact_root(r.num, q);
        const auto rd = detail::exact_root(r.den, q);
        if (!rn || !rd) return std::nullopt;
        return detail::int_pow(Rational{*rn, *rd}, static_cast<int>(pq));
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Delta matrices and rate terms
// ---------------------------------------------------------------------------

/// (i, j) -> delta_{i,j}, indices from 1. `exact` optionally returns the
/// same entry as a rational; rate terms then avoid rounding entirely.
struct DeltaMatrix {
    std::function<double(std::size_t, std::size_t)> value;
    std::function<std::optional<Rational>(std::size_t, std::size_t)> exact;
    std::string label;

    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return value(i, j); }

    [[nodiscard]] std::optional<Rational> exact_at(std::size_t i, std::size_t j) const {
        return exact ? exact(i, j) : std::nullopt;
    }

    [[nodiscard]] static DeltaMatrix constant(double d) {
        return {[d](std::size_t, std::size_t) { return d; },
                [d](std::size_t, std::size_t) { return Rational::from_double(d); },
                "const(" + std::to_string(d) + ")"};
    }
};

enum class RateProvenance { UserGiven, FromDeltas };

[[nodiscard]] constexpr std::string_view to_string(RateProvenance p) noexcept {
    return p == RateProvenance::UserGiven ? "user" : "deltas";
}

/// Finite prefix a_1..a_H of a non-negative series.
struct RateSequence {
    std::vector<double> terms;
    RateProvenance provenance = RateProvenance::UserGiven;
    double degree_s = 1.0;         // FromDeltas only
    bool with_2s_factor = false;   // FromDeltas only

    [[nodiscard]] std::size_t horizon() const noexcept { return terms.size(); }

    [[nodiscard]] static RateSequence given(std::vector<double> terms) {
        for (double t : terms) {
            detail::require(std::isfinite(t) && t >= 0.0, "rate terms must be finite and >= 0");
        }
        return {std::move(terms), RateProvenance::UserGiven, 1.0, false};
    }
};

/// [2^s] delta^s / (1 - delta^s), exact when `exact_delta` is given and the
/// power is representable.
[[nodiscard]] inline double rate_term(double delta, std::optional<Rational> exact_delta, double s,
                                      bool with_2s_factor) {
    detail::require(std::isfinite(s) && s > 0.0, "homogeneity degree s must be > 0");
    detail::require(std::isfinite(delta) && delta >= 0.0 && delta < 1.0,
                    "rate terms need 0 <= delta < 1");
    double v = std::numeric_limits<double>::quiet_NaN();
    if (exact_delta) {
        if (auto r = exact_pow(*exact_delta, s)) {
            if (auto one_minus = Rational{1, 1} - *r) {
                if (auto t = *r / *one_minus) v = t->to_double();
            }
        }
    }
    if (std::isnan(v)) {
        const double ds = std::pow(delta, s);
        detail::require(ds < 1.0, "rate terms need delta^s < 1");
        v = ds / (1.0 - ds);
    }
    return with_2s_factor ? v * std::pow(2.0, s) : v;
}

[[nodiscard]] inline RateSequence kannan_rate_terms(const std::vector<double>& deltas, double s,
                                                    bool with_2s_factor) {
    RateSequence seq{{}, RateProvenance::FromDeltas, s, with_2s_factor};
    seq.terms.reserve(deltas.size());
    for (double d : deltas) {
        seq.terms.push_back(rate_term(d, Rational::from_double(d), s, with_2s_factor));
    }
    return seq;
}

/// Rate terms from the superdiagonal delta_{i,i+1}, i = 1..horizon.
[[nodiscard]] inline RateSequence kannan_rate_terms(const DeltaMatrix& deltas,
                                                    std::size_t horizon, double s,
                                                    bool with_2s_factor) {
    RateSequence seq{{}, RateProvenance::FromDeltas, s, with_2s_factor};
    seq.terms.reserve(horizon);
    for (std::size_t i = 1; i <= horizon; ++i) {
        seq.terms.push_back(rate_term(deltas(i, i + 1), deltas.exact_at(i, i + 1), s,
                                      with_2s_factor));
    }
    return seq;
}

/// C_n = C_{n-1} * s_n, C_0 = 1. Returned as C_1..C_H.
[[nodiscard]] inline std::vector<double> running_products(const std::vector<double>& terms) {
    std::vector<double> c;
    c.reserve(terms.size());
    double acc = 1.0;
    for (double t : terms) {
        acc *= t;
        c.push_back(acc);
    }
    return c;
}

[[nodiscard]] inline std::vector<double> product_terms_Cn(const std::vector<double>& deltas,
                                                          double s, bool with_2s_factor = false) {
    return running_products(kannan_rate_terms(deltas, s, with_2s_factor).terms);
}

[[nodiscard]] inline std::vector<double> product_terms_Cn(const DeltaMatrix& deltas,
                                                          std::size_t horizon, double s,
                                                          bool with_2s_factor = false) {
    return running_products(kannan_rate_terms(deltas, horizon, s, with_2s_factor).terms);
}

// ---------------------------------------------------------------------------
// Alpha-series certificates
// ---------------------------------------------------------------------------

enum class CertificateStatus { Certified, RefutedAtHorizon, Inconclusive };

[[nodiscard]] constexpr std::string_view to_string(CertificateStatus s) noexcept {
    switch (s) {
        case CertificateStatus::Certified: return "certified";
        case CertificateStatus::RefutedAtHorizon: return "refuted_at_horizon";
        case CertificateStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

/// Outcome for one grid value. n_lambda is the smallest n with S_L <= lambda L
/// for every L in [n, H]; certified iff that n is at most H/2.
struct LambdaResult {
    double lambda = 0.0;
    std::size_t n_lambda = 0;
    bool certified = false;
    bool refuted = false;  // S_H > lambda H
};

/// Horizon-scoped: "Certified" means S_L <= lambda L for n_lambda <= L <= H.
struct AlphaSeriesCertificate {
    CertificateStatus status = CertificateStatus::Inconclusive;
    std::optional<double> lambda;
    std::optional<std::size_t> n_lambda;
    std::size_t horizon_checked = 0;
    /// RefutedAtHorizon: an L at which every grid lambda fails.
    std::optional<std::size_t> witness_L;
    std::vector<LambdaResult> per_lambda;
};

[[nodiscard]] inline std::vector<double> default_lambda_grid() {
    return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
}

/// Partial sums S_1..S_H accumulated left to right.
[[nodiscard]] inline std::vector<double> partial_sums(const std::vector<double>& terms) {
    std::vector<double> s(terms.size());
    std::partial_sum(terms.begin(), terms.end(), s.begin());
    return s;
}

[[nodiscard]] inline AlphaSeriesCertificate certify_alpha_series(
    const RateSequence& seq, const std::vector<double>& lambda_grid = default_lambda_grid()) {
    detail::require(!lambda_grid.empty(), "lambda grid must be nonempty");
    detail::require(std::is_sorted(lambda_grid.begin(), lambda_grid.end()),
                    "lambda grid must be sorted ascending");
    for (double l : lambda_grid) {
        detail::require(l > 0.0 && l < 1.0, "lambda grid values must lie in (0, 1)");
    }
    const std::size_t H = seq.horizon();
    detail::require(H >= 2, "alpha-series certification needs horizon >= 2");

    const auto S = partial_sums(seq.terms);
    AlphaSeriesCertificate cert;
    cert.horizon_checked = H;
    for (double lambda : lambda_grid) {
        std::size_t last_bad = 0;  // largest L with S_L > lambda L, 0 if none
        for (std::size_t L = H; L >= 1; --L) {
            if (S[L - 1] > lambda * static_cast<double>(L)) {
                last_bad = L;
                break;
            }
        }
        LambdaResult r{lambda, last_bad + 1, last_bad + 1 <= H / 2, last_bad == H};
        cert.per_lambda.push_back(r);
        if (r.certified && !cert.lambda) {
            cert.status = CertificateStatus::Certified;
            cert.lambda = lambda;
            cert.n_lambda = r.n_lambda;
        }
    }
    if (!cert.lambda && S[H - 1] > lambda_grid.back() * static_cast<double>(H)) {
        cert.status = CertificateStatus::RefutedAtHorizon;
        cert.witness_L = H;
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Relaxed hypotheses: limsup_i delta_{i,j}^s < 1 per j, and sum C_n < inf
// ---------------------------------------------------------------------------

enum class Summability { Summable, NotSummable, Inconclusive };

[[nodiscard]] constexpr std::string_view to_string(Summability s) noexcept {
    switch (s) {
        case Summability::Summable: return "summable";
        case Summability::NotSummable: return "not_summable";
        case Summability::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct RelaxedReport {
    std::size_t horizon = 0;
    /// Per j = 1..H: max of delta_{i,j}^s over i in [H/2, H].
    std::vector<double> limsup_estimate;
    std::vector<bool> limsup_ok;
    bool all_limsup_ok = true;
    std::vector<double> Cn;
    Summability cn_summable = Summability::Inconclusive;
    /// Largest C_{n+1}/C_n over the upper half (ratio test), when finite.
    std::optional<double> tail_ratio;
    double partial_sum = 0.0;

    [[nodiscard]] bool passes() const noexcept {
        return all_limsup_ok && cn_summable == Summability::Summable;
    }
};

inline constexpr double kRatioTestMargin = 1e-6;
inline constexpr double kPlateauRelTol = 1e-12;

namespace detail {

[[nodiscard]] inline Summability decide_summability(const std::vector<double>& c,
                                                    std::optional<double>& tail_ratio) {
    const std::size_t H = c.size();
    if (H == 0) return Summability::Inconclusive;
    for (double v : c) {
        if (!std::isfinite(v)) return Summability::NotSummable;
    }
    // Terms that reach exactly zero stay zero (running product).
    if (c.back() == 0.0) {
        tail_ratio = 0.0;
        return Summability::Summable;
    }
    double hi = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t n = H / 2; n + 1 < H; ++n) {
        if (c[n] == 0.0) continue;
        const double r = c[n + 1] / c[n];
        hi = std::max(hi, r);
        lo = std::min(lo, r);
    }
    if (std::isfinite(lo)) {
        tail_ratio = hi;
        if (hi <= 1.0 - kRatioTestMargin) return Summability::Summable;
        if (lo >= 1.0) return Summability::NotSummable;
    }
    // Plateau fallback: the last quarter adds a negligible relative amount.
    double total = 0.0;
    double head = 0.0;
    for (std::size_t n = 0; n < H; ++n) {
        total += c[n];
        if (n < H - H / 4) head = total;
    }
    if (total > 0.0 && (total - head) <= kPlateauRelTol * total) return Summability::Summable;
    return Summability::Inconclusive;
}

}  // namespace detail

[[nodiscard]] inline RelaxedReport check_relaxed_hypotheses(const DeltaMatrix& deltas, double s,
                                                            std::size_t horizon,
                                                            bool with_2s_factor = false) {
    detail::require(horizon >= 2, "relaxed hypothesis check needs horizon >= 2");
    detail::require(std::isfinite(s) && s > 0.0, "homogeneity degree s must be > 0");
    RelaxedReport rep;
    rep.horizon = horizon;
    rep.limsup_estimate.reserve(horizon);
    for (std::size_t j = 1; j <= horizon; ++j) {
        double m = 0.0;
        for (std::size_t i = horizon / 2; i <= horizon; ++i) {
            const double d = deltas(i, j);
            detail::require(std::isfinite(d) && d >= 0.0, "deltas must be finite and >= 0");
            m = std::max(m, std::pow(d, s));
        }
        rep.limsup_estimate.push_back(m);
        rep.limsup_ok.push_back(m < 1.0);
        rep.all_limsup_ok = rep.all_limsup_ok && m < 1.0;
    }
    // A superdiagonal delta^s >= 1 has no rate term; C_n stays empty.
    for (std::size_t i = 1; i <= horizon; ++i) {
        if (!(std::pow(deltas(i, i + 1), s) < 1.0)) {
            rep.cn_summable = Summability::Inconclusive;
            return rep;
        }
    }
    rep.Cn = product_terms_Cn(deltas, horizon, s, with_2s_factor);
    for (double c : rep.Cn) rep.partial_sum += c;
    rep.cn_summable = detail::decide_summability(rep.Cn, rep.tail_ratio);
    return rep;
}

}  // namespace pmt
