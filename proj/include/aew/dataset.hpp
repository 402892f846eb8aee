#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <vector>

namespace aew {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Sorted, duplicate-free list of column indices.
using Support = std::vector<std::size_t>;

/// Immutable regression data: design X (n x p), response y and an optional
/// noise standard deviation. Inner products X'X and X'y are cached at
/// construction so that per-subset fits cost O(|J|^2) rather than O(n |J|).
class Dataset {
public:
    Dataset(MatrixXd X, VectorXd y, std::optional<double> sigma = std::nullopt);

    std::size_t n() const noexcept { return static_cast<std::size_t>(X_.rows()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(X_.cols()); }

    const MatrixXd& X() const noexcept { return X_; }
    const VectorXd& y() const noexcept { return y_; }
    std::optional<double> sigma() const noexcept { return sigma_; }

    /// Inner product of columns j and k.
    double gram(std::size_t j, std::size_t k) const;
    double xty(std::size_t j) const noexcept { return xty_[static_cast<Eigen::Index>(j)]; }
    double yty() const noexcept { return yty_; }

    /// True when every column satisfies | ||X_j|| / sqrt(n) - 1 | <= tol.
    bool is_normalized(double tol = 1e-9) const;
    /// Throws DomainError unless is_normalized(tol).
    void require_normalized(double tol = 1e-9) const;

    Dataset with_sigma(std::optional<double> sigma) const;

private:
    MatrixXd X_;
    VectorXd y_;
    std::optional<double> sigma_;
    MatrixXd gram_;  // empty when p is too large to cache
    VectorXd xty_;
    double yty_ = 0.0;
};

/// Result of rescaling every column to squared norm n.
struct NormalizedDataset {
    Dataset data;
    /// scales[j] = ||X_j|| / sqrt(n) of the original column; a coefficient
    /// b fitted on the rescaled design maps back as b / scales[j].
    VectorXd scales;
};

/// Rescales columns to ||X_j||^2 = n. Throws DomainError on a zero column.
NormalizedDataset normalize_columns(const Dataset& data);

/// Maps coefficients fitted on a normalized design back to original units.
VectorXd to_original_units(const VectorXd& beta, const VectorXd& scales);

/// Checks that J is strictly increasing and inside [0, p).
void validate_support(const Support& J, std::size_t p);

/// Embeds coefficients for the columns of J into a length-p vector.
VectorXd embed(const Support& J, const VectorXd& coef, std::size_t p);

}  // namespace aew
