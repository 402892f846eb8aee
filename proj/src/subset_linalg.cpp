#include "aew/subset_linalg.hpp"

#include "aew/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace aew {

namespace {

using Idx = Eigen::Index;

// Relative pivot threshold for the dense path; matches kRankEps, which is
// stated on squared norms.
const double kDensePivotTol = std::sqrt(kRankEps);

MatrixXd gather_columns(const Dataset& data, const Support& J) {
    MatrixXd XJ(data.X().rows(), static_cast<Idx>(J.size()));
    for (std::size_t i = 0; i < J.size(); ++i) {
        XJ.col(static_cast<Idx>(i)) = data.X().col(static_cast<Idx>(J[i]));
    }
    return XJ;
}

// Minimum-norm coefficients for the columns of J, in the order of J.
VectorXd dense_min_norm(const Dataset& data, const Support& J) {
    if (J.empty()) return VectorXd();
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod;
    cod.setThreshold(kDensePivotTol);
    cod.compute(gather_columns(data, J));
    return cod.solve(data.y());
}

double dense_rss(const Dataset& data, const Support& J) {
    if (J.empty()) return data.yty();
    const VectorXd coef = dense_min_norm(data, J);
    return (data.y() - gather_columns(data, J) * coef).squaredNorm();
}

}  // namespace

SubsetState::SubsetState(const Dataset& data) : rss_active_(data.yty()), rss_(data.yty()) {}

SubsetState::SubsetState(const Dataset& data, const Support& J) : SubsetState(data) {
    validate_support(J, data.p());
    support_ = J;
    refactorize(data);
}

bool SubsetState::contains(std::size_t j) const {
    return std::binary_search(support_.begin(), support_.end(), j);
}

bool SubsetState::try_append(const Dataset& data, std::size_t j) {
    const Idx k = static_cast<Idx>(active_.size());
    VectorXd g(k);
    for (Idx i = 0; i < k; ++i) g[i] = data.gram(active_[static_cast<std::size_t>(i)], j);

    VectorXd r = g;
    if (k > 0) R_.topLeftCorner(k, k).triangularView<Eigen::Upper>().transpose().solveInPlace(r);

    const double gjj = data.gram(j, j);
    const double schur = gjj - r.squaredNorm();
    if (!(schur > kRankEps * gjj)) return false;

    const double d = std::sqrt(schur);
    R_.conservativeResize(k + 1, k + 1);
    R_.row(k).setZero();
    R_.col(k).head(k) = r;
    R_(k, k) = d;

    const double zk = (data.xty(j) - r.dot(z_)) / d;
    z_.conservativeResize(k + 1);
    z_[k] = zk;
    rss_active_ = std::max(0.0, rss_active_ - zk * zk);
    active_.push_back(j);
    return true;
}

void SubsetState::drop_active(std::size_t pos) {
    const Idx m = static_cast<Idx>(active_.size());
    const Idx k = static_cast<Idx>(pos);

    // Delete column k, leaving an upper Hessenberg block from column k on.
    for (Idx c = k; c + 1 < m; ++c) R_.col(c) = R_.col(c + 1);

    for (Idx i = k; i + 1 < m; ++i) {
        const double a = R_(i, i);
        const double b = R_(i + 1, i);
        const double h = std::hypot(a, b);
        if (h == 0.0) continue;
        const double c = a / h;
        const double s = b / h;
        for (Idx col = i; col + 1 < m; ++col) {
            const double top = R_(i, col);
            const double bot = R_(i + 1, col);
            R_(i, col) = c * top + s * bot;
            R_(i + 1, col) = -s * top + c * bot;
        }
        const double zt = z_[i];
        const double zb = z_[i + 1];
        z_[i] = c * zt + s * zb;
        z_[i + 1] = -s * zt + c * zb;
    }

    const double tail = z_[m - 1];
    rss_active_ += tail * tail;
    R_.conservativeResize(m - 1, m - 1);
    z_.conservativeResize(m - 1);
    active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(pos));

    if (m > 1) {
        const auto diag = R_.diagonal().cwiseAbs();
        const double cond = diag.maxCoeff() / diag.minCoeff();
        drift_ += std::numeric_limits<double>::epsilon() * static_cast<double>(m) * cond * cond;
    }
}

void SubsetState::update_rss(const Dataset& data) {
    rss_ = dependent_.empty() ? rss_active_ : dense_rss(data, support_);
}

void SubsetState::add(const Dataset& data, std::size_t j) {
    if (j >= data.p()) throw DomainError("column index " + std::to_string(j) + " out of range");
    if (contains(j)) throw DomainError("column " + std::to_string(j) + " is already in the support");
    support_.insert(std::upper_bound(support_.begin(), support_.end(), j), j);
    if (!try_append(data, j)) dependent_.push_back(j);
    update_rss(data);
}

void SubsetState::remove(const Dataset& data, std::size_t j) {
    const auto it = std::lower_bound(support_.begin(), support_.end(), j);
    if (it == support_.end() || *it != j) {
        throw DomainError("column " + std::to_string(j) + " is not in the support");
    }
    support_.erase(it);

    const auto dep = std::find(dependent_.begin(), dependent_.end(), j);
    if (dep != dependent_.end()) {
        dependent_.erase(dep);
    } else {
        const auto pos = std::find(active_.begin(), active_.end(), j) - active_.begin();
        drop_active(static_cast<std::size_t>(pos));
        if (drift_ > kMaxDrift) {
            refactorize(data);
            return;
        }
        // Removing an active column can free a previously dependent one.
        std::vector<std::size_t> pending;
        pending.swap(dependent_);
        for (const std::size_t d : pending) {
            if (!try_append(data, d)) dependent_.push_back(d);
        }
    }
    update_rss(data);
}

void SubsetState::refactorize(const Dataset& data) {
    active_.clear();
    dependent_.clear();
    R_.resize(0, 0);
    z_.resize(0);
    rss_active_ = data.yty();
    drift_ = 0.0;
    for (const std::size_t j : support_) {
        if (!try_append(data, j)) dependent_.push_back(j);
    }
    update_rss(data);
}

VectorXd SubsetState::support_coefficients(const Dataset& data) const {
    if (!dependent_.empty()) return dense_min_norm(data, support_);
    const Idx k = static_cast<Idx>(active_.size());
    VectorXd b = z_;
    if (k > 0) R_.triangularView<Eigen::Upper>().solveInPlace(b);
    // Reorder from insertion order to the sorted order of support_.
    VectorXd out(k);
    for (Idx i = 0; i < k; ++i) {
        const auto pos = std::lower_bound(support_.begin(), support_.end(),
                                          active_[static_cast<std::size_t>(i)]) -
                         support_.begin();
        out[pos] = b[i];
    }
    return out;
}

VectorXd SubsetState::coefficients(const Dataset& data) const {
    return embed(support_, support_coefficients(data), data.p());
}

SubsetState update_add(SubsetState state, std::size_t j, const Dataset& data) {
    state.add(data, j);
    return state;
}

SubsetState update_remove(SubsetState state, std::size_t j, const Dataset& data) {
    state.remove(data, j);
    return state;
}

VectorXd ls_min_norm(const Dataset& data, const Support& J) {
    return SubsetState(data, J).coefficients(data);
}

double residual_ss(const Dataset& data, const Support& J) {
    return SubsetState(data, J).rss();
}

}  // namespace aew
