#include "aew/dataset.hpp"

#include "aew/error.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace aew {

namespace {

// 4096^2 doubles is 128 MiB; past that, inner products are formed on demand.
constexpr std::size_t kMaxCachedGram = 4096;

}  // namespace

Dataset::Dataset(MatrixXd X, VectorXd y, std::optional<double> sigma)
    : X_(std::move(X)), y_(std::move(y)), sigma_(sigma) {
    if (X_.rows() < 1 || X_.cols() < 1) throw DomainError("design must have n >= 1 and p >= 1");
    if (y_.size() != X_.rows()) {
        throw DomainError("response length " + std::to_string(y_.size()) +
                          " does not match design rows " + std::to_string(X_.rows()));
    }
    if (!X_.allFinite()) throw NonFiniteError("design matrix contains NaN or Inf");
    if (!y_.allFinite()) throw NonFiniteError("response contains NaN or Inf");
    if (sigma_) {
        if (!std::isfinite(*sigma_)) throw NonFiniteError("sigma is not finite");
        if (*sigma_ < 0.0) throw DomainError("sigma must be nonnegative");
    }
    if (p() <= kMaxCachedGram) gram_ = X_.transpose() * X_;
    xty_ = X_.transpose() * y_;
    yty_ = y_.squaredNorm();
}

double Dataset::gram(std::size_t j, std::size_t k) const {
    const auto jj = static_cast<Eigen::Index>(j);
    const auto kk = static_cast<Eigen::Index>(k);
    if (gram_.size() > 0) return gram_(jj, kk);
    return X_.col(jj).dot(X_.col(kk));
}

bool Dataset::is_normalized(double tol) const {
    const double root_n = std::sqrt(static_cast<double>(n()));
    for (Eigen::Index j = 0; j < X_.cols(); ++j) {
        if (std::abs(X_.col(j).norm() / root_n - 1.0) > tol) return false;
    }
    return true;
}

void Dataset::require_normalized(double tol) const {
    if (!is_normalized(tol)) {
        throw DomainError("design columns are not normalized to ||X_j||^2 = n");
    }
}

Dataset Dataset::with_sigma(std::optional<double> sigma) const {
    return Dataset(X_, y_, sigma);
}

NormalizedDataset normalize_columns(const Dataset& data) {
    const double root_n = std::sqrt(static_cast<double>(data.n()));
    MatrixXd X = data.X();
    VectorXd scales(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double s = X.col(j).norm() / root_n;
        if (s == 0.0) throw DomainError("column " + std::to_string(j) + " is identically zero");
        scales[j] = s;
        X.col(j) /= s;
    }
    return {Dataset(std::move(X), data.y(), data.sigma()), std::move(scales)};
}

VectorXd to_original_units(const VectorXd& beta, const VectorXd& scales) {
    return beta.cwiseQuotient(scales);
}

void validate_support(const Support& J, std::size_t p) {
    for (std::size_t i = 0; i < J.size(); ++i) {
        if (J[i] >= p) {
            throw DomainError("index " + std::to_string(J[i]) + " out of range for p = " +
                              std::to_string(p));
        }
        if (i > 0 && J[i] <= J[i - 1]) throw DomainError("support indices must be strictly increasing");
    }
}

VectorXd embed(const Support& J, const VectorXd& coef, std::size_t p) {
    VectorXd beta = VectorXd::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < J.size(); ++i) {
        beta[static_cast<Eigen::Index>(J[i])] = coef[static_cast<Eigen::Index>(i)];
    }
    return beta;
}

}  // namespace aew
