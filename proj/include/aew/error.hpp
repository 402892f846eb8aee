#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aew {

/// Pivot threshold shared by every rank decision in the library: a column is
/// treated as linearly dependent on the others when its squared distance to
/// their span is at most kRankEps times its own squared norm.
inline constexpr double kRankEps = 1e-10;

/// Default bound on the number of subsets an exact scan may visit.
inline constexpr std::size_t kEnumerationCap = 2'000'000;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input validation failures (bad shapes, out-of-range parameters).
class DomainError : public Error {
public:
    using Error::Error;
};

class NonFiniteError : public Error {
public:
    using Error::Error;
};

class TooLargeError : public Error {
public:
    using Error::Error;
};

class SingularError : public Error {
public:
    using Error::Error;
};

class NotConvergedError : public Error {
public:
    NotConvergedError(const std::string& what, double duality_gap, std::size_t sweeps)
        : Error(what), duality_gap_(duality_gap), sweeps_(sweeps) {}

    double duality_gap() const noexcept { return duality_gap_; }
    std::size_t sweeps() const noexcept { return sweeps_; }

private:
    double duality_gap_;
    std::size_t sweeps_;
};

}  // namespace aew
