#include "aew/diagnostics.hpp"

#include "aew/sampler.hpp"
#include "aew/subsets.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace aew {

namespace {

using Idx = Eigen::Index;

MatrixXd gram_block(const Dataset& data, const Support& J) {
    const auto s = static_cast<Idx>(J.size());
    MatrixXd G(s, s);
    for (Idx a = 0; a < s; ++a) {
        for (Idx b = 0; b <= a; ++b) {
            G(a, b) = G(b, a) = data.gram(J[static_cast<std::size_t>(a)], J[static_cast<std::size_t>(b)]);
        }
    }
    return G / static_cast<double>(data.n());
}

// Below this ratio lambda_min / lambda_max the Gram route loses too many
// digits and the singular value is taken from X_J directly.
constexpr double kGramRatioFloor = 1e-4;

Support random_subset(std::size_t p, std::size_t size, Rng& rng) {
    std::vector<std::size_t> all(p);
    std::iota(all.begin(), all.end(), std::size_t{0});
    Support J;
    J.reserve(size);
    std::sample(all.begin(), all.end(), std::back_inserter(J), static_cast<std::ptrdiff_t>(size), rng);
    return J;  // std::sample keeps the input order, so J is sorted
}

std::string too_large(std::size_t p, std::size_t s, std::size_t cap) {
    return "exact scan of subsets of size " + std::to_string(s) + " out of p = " + std::to_string(p) +
           " exceeds the cap of " + std::to_string(cap);
}

}  // namespace

double nu_subset(const Dataset& data, const Support& J) {
    if (J.empty()) return 0.0;
    const MatrixXd G = gram_block(data, J);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(G, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()[0];
    const double hi = eig.eigenvalues()[G.rows() - 1];
    if (hi > 0.0 && lo > kGramRatioFloor * hi) return std::sqrt(lo);

    MatrixXd XJ(data.X().rows(), static_cast<Idx>(J.size()));
    for (std::size_t i = 0; i < J.size(); ++i) XJ.col(static_cast<Idx>(i)) = data.X().col(static_cast<Idx>(J[i]));
    XJ /= std::sqrt(static_cast<double>(data.n()));
    if (XJ.cols() > XJ.rows()) return 0.0;
    Eigen::JacobiSVD<MatrixXd> svd(XJ);
    return svd.singularValues()[XJ.cols() - 1];
}

NuResult nu_s(const Dataset& data, std::size_t s, const NuOptions& opts) {
    if (s < 1) throw DomainError("nu_s requires s >= 1");
    const std::size_t p = data.p();
    const std::size_t size = std::min(s, p);
    NuResult res;
    res.value = std::numeric_limits<double>::infinity();

    auto consider = [&](const Support& J) {
        const double v = nu_subset(data, J);
        ++res.subsets_scanned;
        if (v < res.value) {
            res.value = v;
            res.argmin = J;
        }
    };

    if (opts.mode == NuMode::exact) {
        if (count_subsets(p, size, size, opts.cap) > opts.cap) throw TooLargeError(too_large(p, size, opts.cap));
        for_each_subset(p, size, [&](const Support& J) {
            if (J.size() == size) consider(J);
            return true;
        });
        res.exact = true;
    } else {
        if (opts.samples < 1) throw DomainError("Monte-Carlo mode needs at least one sample");
        Rng rng(opts.seed);
        for (std::size_t i = 0; i < opts.samples; ++i) consider(random_subset(p, size, rng));
        res.exact = false;
    }
    return res;
}

double kappa_s(const Dataset& data, std::size_t s) {
    if (s < 1) throw DomainError("kappa_s requires s >= 1");
    double best = 0.0;
    for (std::size_t j = 0; j < data.p(); ++j) best = std::max(best, data.gram(j, j));
    return std::sqrt(best / static_cast<double>(data.n()));
}

bool is_identifiable(const Dataset& data, std::size_t s_star, std::size_t cap) {
    if (s_star < 1) throw DomainError("s_star must be at least 1");
    NuOptions opts;
    opts.cap = cap;
    return nu_s(data, 2 * s_star, opts).value > kRankEps;
}

double rho_threshold(double sigma, double lambda, std::size_t n, double nu) {
    if (!(nu > 0.0)) throw DomainError("rho threshold needs nu > 0");
    if (n < 1) throw DomainError("n must be positive");
    return 3.0 * sigma * std::sqrt(lambda / static_cast<double>(n)) / nu;
}

EigenDecision nu_s_exceeds(const Dataset& data, std::size_t s, double bound, std::size_t cap) {
    if (s < 1) throw DomainError("s must be at least 1");
    const std::size_t p = data.p();
    const std::size_t size = std::min(s, p);
    if (count_subsets(p, 1, size, cap) > cap) throw TooLargeError(too_large(p, size, cap));

    const double n = static_cast<double>(data.n());
    const double shift = bound * bound;
    EigenDecision out;

    // L is the lower Cholesky factor of the shifted Gram block along the
    // current DFS path; row k belongs to the k-th column on the path.
    MatrixXd L = MatrixXd::Zero(static_cast<Idx>(size), static_cast<Idx>(size));
    Support path;
    auto recurse = [&](auto&& self, std::size_t start) -> bool {
        if (path.size() == size) return true;
        const auto k = static_cast<Idx>(path.size());
        for (std::size_t j = start; j < p; ++j) {
            double diag = data.gram(j, j) / n - shift;
            for (Idx a = 0; a < k; ++a) {
                double v = data.gram(j, path[static_cast<std::size_t>(a)]) / n;
                for (Idx b = 0; b < a; ++b) v -= L(k, b) * L(a, b);
                L(k, a) = v / L(a, a);
                diag -= L(k, a) * L(k, a);
            }
            path.push_back(j);
            if (!(diag > 0.0)) {
                out.holds = false;
                out.witness = path;
                return false;
            }
            L(k, k) = std::sqrt(diag);
            if (!self(self, j + 1)) return false;
            path.pop_back();
        }
        return true;
    };
    recurse(recurse, 0);
    return out;
}

double nu_min_surrogate(const Dataset& data, std::size_t max_size, std::size_t samples, std::uint64_t seed) {
    if (max_size < 1) throw DomainError("max_size must be at least 1");
    const std::size_t top = std::min(max_size, data.p());
    Rng rng(seed);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < samples; ++i) {
        const std::size_t size = 1 + std::uniform_int_distribution<std::size_t>(0, top - 1)(rng);
        const double v = nu_subset(data, random_subset(data.p(), size, rng));
        if (v > kRankEps) best = std::min(best, v);
    }
    return best;
}

SigmaBounds sigma_design_bounds(const MatrixXd& Sigma, std::size_t s, std::size_t cap) {
    if (Sigma.rows() != Sigma.cols() || Sigma.rows() < 1) throw DomainError("Sigma must be square and nonempty");
    if (!Sigma.allFinite()) throw NonFiniteError("Sigma contains NaN or Inf");
    const double scale = std::max(1.0, Sigma.cwiseAbs().maxCoeff());
    if ((Sigma - Sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw DomainError("Sigma must be symmetric");
    }
    if (s < 1) throw DomainError("s must be at least 1");
    const auto p = static_cast<std::size_t>(Sigma.rows());
    const std::size_t size = std::min(s, p);
    if (count_subsets(p, size, size, cap) > cap) throw TooLargeError(too_large(p, size, cap));

    SigmaBounds out;
    out.eta = 0.0;
    out.lambda_min = std::numeric_limits<double>::infinity();
    for_each_subset(p, size, [&](const Support& J) {
        if (J.size() != size) return true;
        const auto k = static_cast<Idx>(size);
        MatrixXd S(k, k);
        for (Idx a = 0; a < k; ++a) {
            for (Idx b = 0; b < k; ++b) S(a, b) = Sigma(static_cast<Idx>(J[static_cast<std::size_t>(a)]), static_cast<Idx>(J[static_cast<std::size_t>(b)]));
        }
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(S, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues()[0];
        const double hi = eig.eigenvalues()[k - 1];
        out.lambda_min = std::min(out.lambda_min, lo);
        if (lo <= 0.0) {
            out.singular = true;
            out.eta = std::numeric_limits<double>::infinity();
        } else if (!out.singular) {
            out.eta = std::max(out.eta, hi / lo);
        }
        return true;
    });
    return out;
}

DesignReport design_report(const Dataset& data, std::size_t s, const NuOptions& opts,
                           std::optional<double> sigma, double lambda) {
    DesignReport r;
    r.s = s;
    r.mode = opts.mode;
    r.samples = opts.mode == NuMode::monte_carlo ? opts.samples : 0;
    r.nu_s = nu_s(data, s, opts).value;
    r.kappa_s = kappa_s(data, s);
    r.identifiable_2s = nu_s(data, 2 * s, opts).value > kRankEps;
    if (sigma) {
        r.rho = r.nu_s > 0.0 ? rho_threshold(*sigma, lambda, data.n(), r.nu_s)
                             : std::numeric_limits<double>::infinity();
    }
    return r;
}

}  // namespace aew
