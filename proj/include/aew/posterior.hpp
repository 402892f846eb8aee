#pragma once

#include "aew/dataset.hpp"
#include "aew/error.hpp"
#include "aew/subset_linalg.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace aew {

enum class PriorKind {
    /// pi(J) ∝ C(p,|J|)^{-1} exp(-lambda |J|) on |J| <= s_bar.
    combinatorial,
    /// pi(J) ∝ omega^|J| (1 - omega)^(p - |J|), truncated at s_bar.
    independence,
};

/// Prior and temperature of the exponential-weights pseudo-posterior
/// Pi(J) ∝ pi(J) exp(-rss(J) / (2 sigma2)).
struct PosteriorConfig {
    double lambda = 1.0;
    std::size_t s_bar = 1;
    double sigma2 = 1.0;
    PriorKind prior = PriorKind::combinatorial;
    double omega = 0.5;

    /// Throws DomainError when a field is outside its admissible range.
    void validate(std::size_t p) const;

    /// lambda = kappa log p and s_bar = floor(n / 2), clamped to [1, p].
    static PosteriorConfig practical(std::size_t n, std::size_t p, double sigma2,
                                     double kappa = 4.0);
};

/// Sparsity exponent guaranteeing the prediction bound: (62 + 12c) log p.
double prediction_lambda(std::size_t p, double c);
/// Sparsity exponent guaranteeing support concentration:
/// (1 + eps) / eps * (23 + 5c) log p.
double support_lambda(std::size_t p, double c, double eps);

/// log C(p, s) through log-gamma.
double log_binomial(std::size_t p, std::size_t s);

/// Log prior mass of any one subset of size s (up to the shared
/// normalizer); -inf above s_bar.
double log_prior(std::size_t s, std::size_t p, const PosteriorConfig& cfg);

double log_posterior_unnorm(const Dataset& data, const Support& J, const PosteriorConfig& cfg);

/// log_prior(|J|) - rss / (2 sigma2) for a state whose rss is already known.
double log_posterior_unnorm(const SubsetState& state, std::size_t p, const PosteriorConfig& cfg);

struct PosteriorEntry {
    Support subset;
    double log_weight;
    double prob;
};

struct PosteriorTable {
    std::vector<PosteriorEntry> entries;  // depth-first lexicographic order
    double log_normalizer = 0.0;

    /// Index of the highest-weight entry; ties go to the smaller subset,
    /// then to the lexicographically smaller one.
    std::size_t map_index() const;
};

/// Exhaustive posterior over all |J| <= s_bar. Throws TooLargeError when that
/// exceeds cap subsets.
PosteriorTable enumerate_posterior(const Dataset& data, const PosteriorConfig& cfg,
                                   std::size_t cap = kEnumerationCap);

struct ExactEstimates {
    Support map_subset;
    VectorXd map_beta;
    VectorXd mean_beta;
    /// Posterior-weighted fits over full-rank subsets only (not renormalized).
    VectorXd restricted_mean_beta;
};

ExactEstimates exact_estimators(const PosteriorTable& table, const Dataset& data);

/// CSV with columns subset (semicolon-joined indices), log_weight, prob.
void write_posterior_csv(const PosteriorTable& table, std::ostream& out);

}  // namespace aew
