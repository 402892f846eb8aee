#pragma once

#include "aew/dataset.hpp"
#include "aew/error.hpp"

#include <cstddef>
#include <functional>

namespace aew {

enum class L0Strategy { exhaustive, forward_greedy };

/// argmin over |J| <= s_bar of rss(J) + lambda |J|.
struct L0Config {
    double lambda = 0.0;
    std::size_t s_bar = 1;
    L0Strategy strategy = L0Strategy::forward_greedy;
};

struct L0Result {
    Support subset;
    VectorXd beta;
    double criterion = 0.0;
};

/// rss(J) + lambda |J|, with the penalty taken as 0 for the empty set even
/// when lambda is infinite.
double l0_criterion(double rss, std::size_t size, double lambda);

/// Exhaustive search returns the global minimizer (ties: smaller |J|, then
/// lexicographic) and throws TooLargeError past `cap` subsets. Forward-greedy
/// adds the best single column while the criterion strictly decreases, then
/// makes one backward-elimination pass in index order.
L0Result l0_select(const Dataset& data, const L0Config& cfg, std::size_t cap = kEnumerationCap);

/// Plug-in noise variance for when sigma is unknown: a forward-greedy fit
/// with BIC penalty sigma0^2 log n starting from sigma0^2 = ||y||^2 / n, then
/// one refit with the updated estimate; returns rss(J) / (n - |J|).
double estimate_sigma2(const Dataset& data);

struct LassoConfig {
    double lambda_l = 0.0;
    std::size_t max_iter = 100'000;
    double tol = 1e-8;
    /// Called after every sweep with the sweep number and current iterate.
    std::function<void(std::size_t, const VectorXd&)> on_sweep;
};

struct LassoResult {
    VectorXd beta;
    std::size_t sweeps = 0;
    double duality_gap = 0.0;
};

/// A sigma sqrt(log p / n).
double lasso_lambda(double A, double sigma, std::size_t n, std::size_t p);

/// (1/n) ||y - X beta||^2 + 2 lambda_l ||beta||_1
double lasso_objective(const Dataset& data, const VectorXd& beta, double lambda_l);

/// Duality gap of beta for the objective above; zero at the optimum.
double lasso_duality_gap(const Dataset& data, const VectorXd& beta, double lambda_l);

/// Cyclic coordinate descent with soft-threshold updates. Stops when no
/// coordinate moves by more than tol in a sweep; throws NotConvergedError
/// after max_iter sweeps. Columns need not be normalized: each update divides
/// by ||X_j||^2 / n.
LassoResult lasso_cd(const Dataset& data, const LassoConfig& cfg);

/// ||Psi^{-1} sign||_inf with Psi = X_J' X_J / n. Throws SingularError when
/// X_J is rank deficient.
double d_star(const Dataset& data, const Support& J, const VectorXd& signs);

struct IrrepresentableResult {
    bool holds = false;
    /// 1 - max_{k not in J} |X_k' X_J Psi^{-1} sign / n|
    double margin = 0.0;
};

IrrepresentableResult irrepresentable_check(const Dataset& data, const Support& J, const VectorXd& signs);

}  // namespace aew
