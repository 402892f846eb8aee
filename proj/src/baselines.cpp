#include "aew/baselines.hpp"

#include "aew/subset_linalg.hpp"
#include "aew/subsets.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aew {

namespace {

constexpr double kTieTol = 1e-10;

double soft(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

bool size_lex_less(const Support& a, const Support& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

L0Result l0_exhaustive(const Dataset& data, const L0Config& cfg, std::size_t cap) {
    if (count_subsets(data.p(), 0, cfg.s_bar, cap) > cap) {
        throw TooLargeError("exhaustive l0 search exceeds the cap of " + std::to_string(cap) + " subsets");
    }
    L0Result best;
    best.criterion = std::numeric_limits<double>::infinity();
    bool first = true;
    for_each_subset_state(data, cfg.s_bar, [&](const SubsetState& state) {
        const double crit = l0_criterion(state.rss(), state.size(), cfg.lambda);
        const double tol = kTieTol * std::max(1.0, std::abs(best.criterion));
        const bool better = first || crit < best.criterion - tol ||
                            (crit <= best.criterion + tol && size_lex_less(state.support(), best.subset));
        if (better) {
            best.criterion = crit;
            best.subset = state.support();
            first = false;
        }
    });
    return best;
}

L0Result l0_greedy(const Dataset& data, const L0Config& cfg) {
    SubsetState state(data);
    double crit = l0_criterion(state.rss(), 0, cfg.lambda);

    while (state.size() < cfg.s_bar) {
        double best_crit = crit;
        std::size_t best_k = data.p();
        for (std::size_t k = 0; k < data.p(); ++k) {
            if (state.contains(k)) continue;
            const SubsetState trial = update_add(state, k, data);
            const double c = l0_criterion(trial.rss(), trial.size(), cfg.lambda);
            if (c < best_crit) {
                best_crit = c;
                best_k = k;
            }
        }
        if (best_k == data.p()) break;
        state.add(data, best_k);
        crit = best_crit;
    }

    const Support forward = state.support();
    for (const std::size_t j : forward) {
        const SubsetState trial = update_remove(state, j, data);
        const double c = l0_criterion(trial.rss(), trial.size(), cfg.lambda);
        if (c < crit) {
            state = trial;
            crit = c;
        }
    }
    return {state.support(), VectorXd(), crit};
}

}  // namespace

double l0_criterion(double rss, std::size_t size, double lambda) {
    return size == 0 ? rss : rss + lambda * static_cast<double>(size);
}

L0Result l0_select(const Dataset& data, const L0Config& cfg, std::size_t cap) {
    if (!(cfg.lambda >= 0.0)) throw DomainError("l0 penalty must be nonnegative");
    if (cfg.s_bar < 1) throw DomainError("s_bar must be at least 1");
    L0Config capped = cfg;
    capped.s_bar = std::min(cfg.s_bar, data.p());
    L0Result result = cfg.strategy == L0Strategy::exhaustive ? l0_exhaustive(data, capped, cap)
                                                              : l0_greedy(data, capped);
    result.beta = ls_min_norm(data, result.subset);
    return result;
}

double estimate_sigma2(const Dataset& data) {
    const double n = static_cast<double>(data.n());
    L0Config cfg;
    cfg.s_bar = std::clamp<std::size_t>(data.n() / 2, 1, data.p());
    double sigma2 = data.yty() / n;
    for (int pass = 0; pass < 2; ++pass) {
        cfg.lambda = sigma2 * std::log(n);
        const L0Result fit = l0_select(data, cfg);
        const double dof = n - static_cast<double>(fit.subset.size());
        if (!(dof > 0.0)) throw DomainError("not enough rows to estimate the noise variance");
        sigma2 = residual_ss(data, fit.subset) / dof;
    }
    if (!(sigma2 > 0.0)) throw DomainError("estimated noise variance is zero; supply sigma explicitly");
    return sigma2;
}

double lasso_lambda(double A, double sigma, std::size_t n, std::size_t p) {
    return A * sigma * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

double lasso_objective(const Dataset& data, const VectorXd& beta, double lambda_l) {
    const double n = static_cast<double>(data.n());
    return (data.y() - data.X() * beta).squaredNorm() / n + 2.0 * lambda_l * beta.lpNorm<1>();
}

double lasso_duality_gap(const Dataset& data, const VectorXd& beta, double lambda_l) {
    const double n = static_cast<double>(data.n());
    const double alpha = n * lambda_l;
    const VectorXd r = data.y() - data.X() * beta;
    const double corr = (data.X().transpose() * r).lpNorm<Eigen::Infinity>();
    const double scale = corr > alpha ? alpha / corr : 1.0;
    const VectorXd theta = scale * r;
    const double primal = 0.5 * r.squaredNorm() + alpha * beta.lpNorm<1>();
    const double dual = 0.5 * data.yty() - 0.5 * (data.y() - theta).squaredNorm();
    return 2.0 / n * (primal - dual);
}

LassoResult lasso_cd(const Dataset& data, const LassoConfig& cfg) {
    if (!(cfg.lambda_l >= 0.0) || !std::isfinite(cfg.lambda_l)) {
        throw DomainError("lambda_L must be nonnegative and finite");
    }
    const auto p = static_cast<Eigen::Index>(data.p());
    const double n = static_cast<double>(data.n());
    const MatrixXd& X = data.X();

    VectorXd col_sq(p);
    for (Eigen::Index j = 0; j < p; ++j) col_sq[j] = data.gram(static_cast<std::size_t>(j), static_cast<std::size_t>(j)) / n;

    LassoResult res;
    res.beta = VectorXd::Zero(p);
    VectorXd r = data.y();
    for (std::size_t sweep = 1; sweep <= cfg.max_iter; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (col_sq[j] == 0.0) continue;
            const double old = res.beta[j];
            const double rho = X.col(j).dot(r) / n + col_sq[j] * old;
            const double updated = soft(rho, cfg.lambda_l) / col_sq[j];
            if (updated != old) {
                r -= (updated - old) * X.col(j);
                res.beta[j] = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        if (cfg.on_sweep) cfg.on_sweep(sweep, res.beta);
        if (max_change <= cfg.tol) {
            res.sweeps = sweep;
            res.duality_gap = lasso_duality_gap(data, res.beta, cfg.lambda_l);
            return res;
        }
    }
    const double gap = lasso_duality_gap(data, res.beta, cfg.lambda_l);
    throw NotConvergedError("lasso coordinate descent did not converge in " + std::to_string(cfg.max_iter) +
                                " sweeps (duality gap " + std::to_string(gap) + ")",
                            gap, cfg.max_iter);
}

namespace {

VectorXd psi_solve(const Dataset& data, const Support& J, const VectorXd& signs) {
    validate_support(J, data.p());
    if (J.empty()) throw DomainError("support must be nonempty");
    if (signs.size() != static_cast<Eigen::Index>(J.size())) {
        throw DomainError("signs must have one entry per support index");
    }
    if (!SubsetState(data, J).full_rank()) throw SingularError("X_J is rank deficient");
    const auto s = static_cast<Eigen::Index>(J.size());
    MatrixXd psi(s, s);
    for (Eigen::Index a = 0; a < s; ++a) {
        for (Eigen::Index b = 0; b < s; ++b) {
            psi(a, b) = data.gram(J[static_cast<std::size_t>(a)], J[static_cast<std::size_t>(b)]);
        }
    }
    psi /= static_cast<double>(data.n());
    return psi.llt().solve(signs);
}

}  // namespace

double d_star(const Dataset& data, const Support& J, const VectorXd& signs) {
    return psi_solve(data, J, signs).lpNorm<Eigen::Infinity>();
}

IrrepresentableResult irrepresentable_check(const Dataset& data, const Support& J, const VectorXd& signs) {
    const VectorXd w = psi_solve(data, J, signs);
    const double n = static_cast<double>(data.n());
    double worst = 0.0;
    for (std::size_t k = 0; k < data.p(); ++k) {
        if (std::binary_search(J.begin(), J.end(), k)) continue;
        double v = 0.0;
        for (std::size_t i = 0; i < J.size(); ++i) v += data.gram(k, J[i]) * w[static_cast<Eigen::Index>(i)];
        worst = std::max(worst, std::abs(v) / n);
    }
    // Exact collinearity lands within rounding of the boundary.
    if (std::abs(1.0 - worst) <= 1e-12) worst = 1.0;
    return {worst < 1.0, 1.0 - worst};
}

}  // namespace aew
