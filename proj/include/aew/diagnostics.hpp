#pragma once

#include "aew/dataset.hpp"
#include "aew/error.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>

namespace aew {

/// Subset count allowed for the yes/no eigenvalue scan, which costs O(s^2)
/// per subset and prunes on the first failure.
inline constexpr std::size_t kDecisionCap = 50'000'000;

enum class NuMode { exact, monte_carlo };

struct NuOptions {
    NuMode mode = NuMode::exact;
    std::size_t samples = 10'000;
    std::uint64_t seed = 1;
    std::size_t cap = kEnumerationCap;
};

struct NuResult {
    double value = 0.0;
    /// Subset attaining the value.
    Support argmin;
    /// False for Monte-Carlo results, which only bound nu_s from above.
    bool exact = true;
    std::size_t subsets_scanned = 0;
};

/// nu_J: smallest singular value of X_J / sqrt(n). Zero for the empty set.
double nu_subset(const Dataset& data, const Support& J);

/// nu_s = min over 1 <= |J| <= s of nu_J. The smallest singular value can
/// only shrink when a column is appended, so the minimum is attained at
/// |J| = min(s, p) and only those subsets are scanned. Monte-Carlo mode takes
/// the minimum over `samples` uniformly drawn subsets of that size.
NuResult nu_s(const Dataset& data, std::size_t s, const NuOptions& opts = {});

/// kappa_s = max over 1 <= |J| <= s of nu_J. For the same reason as above
/// the maximum is attained by a single column: max_j ||X_j|| / sqrt(n).
double kappa_s(const Dataset& data, std::size_t s);

/// Condition I(2 s_star), i.e. nu_{2 s_star} > kRankEps (exact scan).
bool is_identifiable(const Dataset& data, std::size_t s_star, std::size_t cap = kEnumerationCap);

/// 3 sigma sqrt(lambda / n) / nu; DomainError unless nu > 0.
double rho_threshold(double sigma, double lambda, std::size_t n, double nu);

struct EigenDecision {
    bool holds = true;
    /// A subset violating the bound when holds is false.
    Support witness;
};

/// Exact decision of nu_s > bound: a depth-first scan that keeps a Cholesky
/// factor of X_J'X_J / n - bound^2 I and stops at the first subset where it
/// fails to be positive definite.
EigenDecision nu_s_exceeds(const Dataset& data, std::size_t s, double bound,
                           std::size_t cap = kDecisionCap);

/// Minimum of nu_J over sampled subsets (sizes uniform in [1, max_size]) with
/// nu_J > kRankEps. A surrogate for the minimum over all full-rank subsets,
/// which is not computable in general; it can only overestimate that value.
double nu_min_surrogate(const Dataset& data, std::size_t max_size, std::size_t samples, std::uint64_t seed);

struct SigmaBounds {
    /// max over |J| <= s of lambda_max(Sigma_J) / lambda_min(Sigma_J); +inf
    /// when singular.
    double eta = 1.0;
    /// min over |J| <= s of lambda_min(Sigma_J).
    double lambda_min = 1.0;
    bool singular = false;
};

/// Population covariance quantities for a Gaussian random design. Both
/// extremes are attained at |J| = min(s, p) by eigenvalue interlacing.
SigmaBounds sigma_design_bounds(const MatrixXd& Sigma, std::size_t s, std::size_t cap = kEnumerationCap);

/// One row of the `diagnose` output.
struct DesignReport {
    std::size_t s = 0;
    double nu_s = 0.0;
    double kappa_s = 0.0;
    NuMode mode = NuMode::exact;
    std::size_t samples = 0;
    bool identifiable_2s = false;
    /// Present when sigma and lambda were supplied.
    std::optional<double> rho;
};

DesignReport design_report(const Dataset& data, std::size_t s, const NuOptions& opts,
                           std::optional<double> sigma, double lambda);

}  // namespace aew
