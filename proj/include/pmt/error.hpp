#pragma once

#include <stdexcept>
#include <string>

namespace pmt {

/// Default absolute comparison tolerance for every check in the library.
inline constexpr double kDefaultTol = 1e-9;

/// Margin by which samplers shrink open interval endpoints.
inline constexpr double kOpenMargin = 1e-6;

/// A caller supplied something outside an operation's contract
/// (domain violation, bad parameter, failed precondition).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A transform produced an object violating its own contract on samples.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unknown fixture name; the message lists valid names.
class CatalogError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// An internal invariant was breached. Indicates a bug, never bad input.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidInput(what);
}

}  // namespace detail
}  // namespace pmt
