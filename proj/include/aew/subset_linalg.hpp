#pragma once

#include "aew/dataset.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace aew {

/// Least-squares fit restricted to the columns in J, embedded in R^p, with
/// minimum Euclidean norm when X_J is rank deficient.
VectorXd ls_min_norm(const Dataset& data, const Support& J);

/// ||y - X_J beta_J||^2, the squared norm of the residual after projecting y
/// onto span(X_J).
double residual_ss(const Dataset& data, const Support& J);

/// Per-subset least-squares state maintained incrementally along a walk over
/// supports.
///
/// The independent columns of J ("active" columns, in insertion order) carry
/// an upper-triangular factor R with R'R = X_A'X_A together with
/// z = R^{-T} X_A'y, so that rss = y'y - ||z||^2. A column whose squared
/// distance to the span of the active ones is at most kRankEps times its own
/// squared norm is kept in J but left out of the factor; while any such
/// column is present, rss and coefficients come from a dense minimum-norm
/// solve instead.
///
/// Removals re-triangularize R with Givens rotations. A running bound on the
/// accumulated rounding error triggers a full refactorization once it exceeds
/// kMaxDrift.
class SubsetState {
public:
    static constexpr double kMaxDrift = 1e-6;

    SubsetState() = default;
    /// Empty support for the given data.
    explicit SubsetState(const Dataset& data);
    /// From-scratch factorization of J (columns added in increasing order).
    SubsetState(const Dataset& data, const Support& J);

    const Support& support() const noexcept { return support_; }
    std::size_t size() const noexcept { return support_.size(); }
    bool contains(std::size_t j) const;
    /// False when some column of J was judged dependent on the others.
    bool full_rank() const noexcept { return dependent_.empty(); }

    double rss() const noexcept { return rss_; }

    /// Unnormalized log-posterior; set by the caller that owns the prior.
    double log_weight() const noexcept { return log_weight_; }
    void set_log_weight(double w) noexcept { log_weight_ = w; }

    double drift() const noexcept { return drift_; }

    /// Adds column j (must not be in J).
    void add(const Dataset& data, std::size_t j);
    /// Removes column j (must be in J).
    void remove(const Dataset& data, std::size_t j);
    /// Discards the factor and rebuilds it from the current support.
    void refactorize(const Dataset& data);

    /// Minimum-norm least-squares coefficients embedded in R^p.
    VectorXd coefficients(const Dataset& data) const;
    /// Same values as coefficients(), paired with support() instead of
    /// embedded; avoids an O(p) vector when only |J| entries are nonzero.
    VectorXd support_coefficients(const Dataset& data) const;

private:
    bool try_append(const Dataset& data, std::size_t j);
    void drop_active(std::size_t pos);
    void update_rss(const Dataset& data);

    Support support_;
    std::vector<std::size_t> active_;     // insertion order, matches R_ columns
    std::vector<std::size_t> dependent_;  // in J but outside the factor
    MatrixXd R_;
    VectorXd z_;
    double rss_active_ = 0.0;
    double rss_ = 0.0;
    double log_weight_ = -std::numeric_limits<double>::infinity();
    double drift_ = 0.0;
};

/// Value-returning wrappers over SubsetState::add / remove.
SubsetState update_add(SubsetState state, std::size_t j, const Dataset& data);
SubsetState update_remove(SubsetState state, std::size_t j, const Dataset& data);

}  // namespace aew
