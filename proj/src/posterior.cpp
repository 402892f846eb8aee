#include "aew/posterior.hpp"

#include "aew/report.hpp"
#include "aew/subsets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace aew {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Log-weights closer than this (relative) are treated as tied when picking
// the MAP; rounding differs between factorization paths of equal spans.
constexpr double kTieTol = 1e-10;

bool size_lex_less(const Support& a, const Support& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

}  // namespace

void PosteriorConfig::validate(std::size_t p) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be positive and finite");
    if (s_bar < 1 || s_bar > p) {
        throw DomainError("s_bar must lie in [1, p]; got " + std::to_string(s_bar));
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("sigma2 must be positive and finite");
    if (prior == PriorKind::independence && !(omega > 0.0 && omega < 1.0)) {
        throw DomainError("omega must lie in (0, 1)");
    }
}

PosteriorConfig PosteriorConfig::practical(std::size_t n, std::size_t p, double sigma2, double kappa) {
    PosteriorConfig cfg;
    cfg.lambda = kappa * std::log(static_cast<double>(p));
    cfg.s_bar = std::clamp<std::size_t>(n / 2, 1, p);
    cfg.sigma2 = sigma2;
    return cfg;
}

double prediction_lambda(std::size_t p, double c) {
    return (62.0 + 12.0 * c) * std::log(static_cast<double>(p));
}

double support_lambda(std::size_t p, double c, double eps) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
    return (1.0 + eps) / eps * (23.0 + 5.0 * c) * std::log(static_cast<double>(p));
}

double log_binomial(std::size_t p, std::size_t s) {
    if (s > p) throw DomainError("log_binomial requires s <= p");
    if (s == 0 || s == p) return 0.0;
    const double pd = static_cast<double>(p);
    const double sd = static_cast<double>(s);
    return std::lgamma(pd + 1.0) - std::lgamma(sd + 1.0) - std::lgamma(pd - sd + 1.0);
}

double log_prior(std::size_t s, std::size_t p, const PosteriorConfig& cfg) {
    if (s > p) {
        throw DomainError("subset size " + std::to_string(s) + " exceeds p = " + std::to_string(p));
    }
    if (s > cfg.s_bar) return kNegInf;
    const double sd = static_cast<double>(s);
    switch (cfg.prior) {
        case PriorKind::combinatorial:
            return -log_binomial(p, s) - cfg.lambda * sd;
        case PriorKind::independence:
            return sd * std::log(cfg.omega) + (static_cast<double>(p) - sd) * std::log1p(-cfg.omega);
    }
    return kNegInf;
}

double log_posterior_unnorm(const SubsetState& state, std::size_t p, const PosteriorConfig& cfg) {
    const double lp = log_prior(state.size(), p, cfg);
    if (lp == kNegInf) return kNegInf;
    return lp - state.rss() / (2.0 * cfg.sigma2);
}

double log_posterior_unnorm(const Dataset& data, const Support& J, const PosteriorConfig& cfg) {
    validate_support(J, data.p());
    if (J.size() > cfg.s_bar) return kNegInf;
    return log_posterior_unnorm(SubsetState(data, J), data.p(), cfg);
}

std::size_t PosteriorTable::map_index() const {
    if (entries.empty()) throw DomainError("empty posterior table");
    std::size_t best = 0;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        const double a = entries[i].log_weight;
        const double b = entries[best].log_weight;
        const double tol = kTieTol * std::max(1.0, std::abs(b));
        if (a > b + tol) {
            best = i;
        } else if (a >= b - tol && size_lex_less(entries[i].subset, entries[best].subset)) {
            best = i;
        }
    }
    return best;
}

PosteriorTable enumerate_posterior(const Dataset& data, const PosteriorConfig& cfg, std::size_t cap) {
    cfg.validate(data.p());
    const std::size_t total = count_subsets(data.p(), 0, cfg.s_bar, cap);
    if (total > cap) {
        throw TooLargeError("posterior enumeration over |J| <= " + std::to_string(cfg.s_bar) +
                            " exceeds the cap of " + std::to_string(cap) + " subsets");
    }

    PosteriorTable table;
    table.entries.reserve(total);
    double max_lw = kNegInf;
    for_each_subset_state(data, cfg.s_bar, [&](const SubsetState& state) {
        const double lw = log_posterior_unnorm(state, data.p(), cfg);
        max_lw = std::max(max_lw, lw);
        table.entries.push_back({state.support(), lw, 0.0});
    });

    double sum = 0.0;
    for (const auto& e : table.entries) sum += std::exp(e.log_weight - max_lw);
    table.log_normalizer = max_lw + std::log(sum);
    for (auto& e : table.entries) e.prob = std::exp(e.log_weight - table.log_normalizer);
    return table;
}

ExactEstimates exact_estimators(const PosteriorTable& table, const Dataset& data) {
    const auto p = static_cast<Eigen::Index>(data.p());
    ExactEstimates est;
    est.mean_beta = VectorXd::Zero(p);
    est.restricted_mean_beta = VectorXd::Zero(p);
    for (const auto& e : table.entries) {
        if (e.prob == 0.0) continue;
        const SubsetState state(data, e.subset);
        const VectorXd coef = state.support_coefficients(data);
        for (std::size_t i = 0; i < e.subset.size(); ++i) {
            const auto j = static_cast<Eigen::Index>(e.subset[i]);
            const double w = e.prob * coef[static_cast<Eigen::Index>(i)];
            est.mean_beta[j] += w;
            if (state.full_rank()) est.restricted_mean_beta[j] += w;
        }
    }
    est.map_subset = table.entries[table.map_index()].subset;
    est.map_beta = ls_min_norm(data, est.map_subset);
    return est;
}

void write_posterior_csv(const PosteriorTable& table, std::ostream& out) {
    out << "subset,log_weight,prob\n";
    for (const auto& e : table.entries) {
        out << join_support(e.subset) << ',' << format_double(e.log_weight) << ','
            << format_double(e.prob) << '\n';
    }
}

}  // namespace aew
