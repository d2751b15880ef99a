#pragma once

// Control functions for the family contraction displays: F (continuous,
// non-decreasing, sub-additive, homogeneous of degree s, F^{-1}(0) = {0})
// and psi (vanishing exactly at the origin). Both are sample-checked when
// constructed.

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pmt/error.hpp"

namespace pmt {

class PhiFunction {
public:
    using Fn = std::function<double(double)>;

    /// Validates the class properties on a fixed grid over [0, 10]; throws
    /// InvalidInput naming the first failing property.
    PhiFunction(Fn fn, double degree_s, std::string label)
        : fn_(std::move(fn)), s_(degree_s), label_(std::move(label)) {
        detail::require(static_cast<bool>(fn_), "phi function has no evaluator");
        detail::require(std::isfinite(s_) && s_ > 0.0, "phi degree s must be > 0");
        validate();
    }

    [[nodiscard]] static PhiFunction identity() {
        return {[](double x) { return x; }, 1.0, "identity"};
    }
    [[nodiscard]] static PhiFunction sqrt() {
        return {[](double x) { return std::sqrt(x); }, 0.5, "sqrt"};
    }
    /// x^s; sub-additive only for s <= 1, which validation enforces.
    [[nodiscard]] static PhiFunction power(double s) {
        std::ostringstream os;
        os << "pow(" << s << ")";
        return {[s](double x) { return std::pow(x, s); }, s, os.str()};
    }

    [[nodiscard]] double operator()(double x) const { return fn_(x); }
    [[nodiscard]] double degree() const noexcept { return s_; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }

private:
    void fail(const std::string& what) const {
        throw InvalidInput("phi function '" + label_ + "' is not in the class: " + what);
    }

    void validate() const {
        constexpr double kRelTol = 1e-9;
        constexpr double kAbsTol = 1e-12;
        if (fn_(0.0) != 0.0) fail("F(0) != 0");
        std::vector<double> xs = {1e-8, 1e-4, 1e-2};
        for (int k = 1; k <= 200; ++k) xs.push_back(0.05 * k);
        double prev = 0.0;
        for (double x : xs) {
            const double v = fn_(x);
            if (!std::isfinite(v) || v <= 0.0) fail("F(x) must be positive for x > 0");
            if (v + kAbsTol < prev) fail("not non-decreasing");
            prev = v;
            // Continuity proxy: the jump over [x, x+h] shrinks when h does.
            const double big = std::abs(fn_(x + 1e-3) - v);
            const double small = std::abs(fn_(x + 1e-5) - v);
            if (small > 0.5 * big + kAbsTol) fail("jump near x = " + std::to_string(x));
            for (double a : {0.1, 0.5, 2.0, 3.0}) {
                const double want = std::pow(a, s_) * v;
                if (std::abs(fn_(a * x) - want) > kRelTol * std::max(1.0, std::abs(want))) {
                    fail("not homogeneous of degree " + std::to_string(s_));
                }
            }
        }
        for (std::size_t i = 0; i < xs.size(); i += 7) {
            for (std::size_t j = i; j < xs.size(); j += 11) {
                const double lhs = fn_(xs[i] + xs[j]);
                const double rhs = fn_(xs[i]) + fn_(xs[j]);
                if (lhs > rhs + kRelTol * std::max(1.0, rhs)) fail("not sub-additive");
            }
        }
    }

    Fn fn_;
    double s_;
    std::string label_;
};

class PsiFunction {
public:
    using Fn = std::function<double(const std::vector<double>&)>;

    /// Checks psi(0,...,0) = 0 and psi > 0 at sampled nonzero arguments.
    PsiFunction(Fn fn, int arity, std::string label)
        : fn_(std::move(fn)), arity_(arity), label_(std::move(label)) {
        detail::require(static_cast<bool>(fn_), "psi function has no evaluator");
        detail::require(arity_ == 2 || arity_ == 3, "psi arity must be 2 or 3");
        validate();
    }

    [[nodiscard]] static PsiFunction sum(int arity) {
        return {[](const std::vector<double>& a) {
                    double s = 0.0;
                    for (double v : a) s += v;
                    return s;
                },
                arity, "sum"};
    }
    [[nodiscard]] static PsiFunction max(int arity) {
        return {[](const std::vector<double>& a) {
                    double m = 0.0;
                    for (double v : a) m = std::max(m, v);
                    return m;
                },
                arity, "max"};
    }

    [[nodiscard]] double operator()(const std::vector<double>& args) const {
        detail::require(static_cast<int>(args.size()) == arity_, "psi called with wrong arity");
        return fn_(args);
    }
    [[nodiscard]] int arity() const noexcept { return arity_; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }

private:
    void validate() const {
        const std::vector<double> zero(static_cast<std::size_t>(arity_), 0.0);
        if (fn_(zero) != 0.0) {
            throw InvalidInput("psi function '" + label_ + "' must vanish at the origin");
        }
        for (double v : {1e-6, 0.5, 3.0}) {
            for (int k = 0; k < arity_; ++k) {
                std::vector<double> a = zero;
                a[static_cast<std::size_t>(k)] = v;
                if (!(fn_(a) > 0.0)) {
                    throw InvalidInput("psi function '" + label_ +
                                       "' must be positive away from the origin");
                }
            }
        }
    }

    Fn fn_;
    int arity_;
    std::string label_;
};

}  // namespace pmt
