#include "aew/sampler.hpp"

#include "aew/baselines.hpp"
#include "aew/error.hpp"
#include "aew/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <thread>

namespace aew {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// r-th column (0-based) outside the sorted support J.
std::size_t nth_non_member(const Support& J, std::size_t r) {
    std::size_t k = r;
    for (const std::size_t j : J) {
        if (j <= k) ++k;
        else break;
    }
    return k;
}

void record_visit(ChainAccumulators& acc, const Support& J, std::uint64_t count, std::size_t cap) {
    const auto it = acc.visit_counts.find(J);
    if (it != acc.visit_counts.end()) {
        it->second += count;
    } else if (acc.visit_counts.size() < cap) {
        acc.visit_counts.emplace(J, count);
    } else {
        acc.visits_truncated = true;
    }
}

SubsetState initial_state(const Dataset& data, const PosteriorConfig& pcfg, const ChainConfig& ccfg) {
    switch (ccfg.init) {
        case ChainInit::empty:
            return SubsetState(data);
        case ChainInit::given:
            if (ccfg.initial.size() > pcfg.s_bar) throw DomainError("initial support exceeds s_bar");
            return SubsetState(data, ccfg.initial);
        case ChainInit::lasso: {
            LassoConfig lcfg;
            lcfg.lambda_l = lasso_lambda(ccfg.lasso_a, std::sqrt(pcfg.sigma2), data.n(), data.p());
            const VectorXd beta = lasso_cd(data, lcfg).beta;
            // Keep the s_bar largest magnitudes.
            std::vector<std::size_t> order;
            for (Eigen::Index j = 0; j < beta.size(); ++j) {
                if (beta[j] != 0.0) order.push_back(static_cast<std::size_t>(j));
            }
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(beta[static_cast<Eigen::Index>(a)]) > std::abs(beta[static_cast<Eigen::Index>(b)]);
            });
            if (order.size() > pcfg.s_bar) order.resize(pcfg.s_bar);
            std::sort(order.begin(), order.end());
            return SubsetState(data, order);
        }
    }
    return SubsetState(data);
}

ChainAccumulators run_single_chain(const Dataset& data, const PosteriorConfig& pcfg,
                                   const ChainConfig& ccfg, std::uint64_t seed, bool trace) {
    Rng rng(seed);
    SubsetState state = initial_state(data, pcfg, ccfg);
    state.set_log_weight(log_posterior_unnorm(state, data.p(), pcfg));

    ChainAccumulators acc;
    const auto p = static_cast<Eigen::Index>(data.p());
    acc.mean_sum = VectorXd::Zero(p);
    acc.restricted_sum = VectorXd::Zero(p);
    acc.best_subset = state.support();
    acc.best_log_weight = state.log_weight();

    VectorXd coef = state.support_coefficients(data);
    bool coef_stale = false;

    const std::size_t total = ccfg.burn_in + ccfg.steps;
    for (std::size_t step = 0; step < total; ++step) {
        const bool moved = mh_step(state, data, pcfg, ccfg, rng);
        ++acc.proposals;
        if (moved) {
            ++acc.accepted;
            coef_stale = true;
            if (state.log_weight() > acc.best_log_weight) {
                acc.best_log_weight = state.log_weight();
                acc.best_subset = state.support();
            }
        }
        if (trace) acc.trace.push_back({step, state.size(), state.log_weight(), moved});

        if (step < ccfg.burn_in) continue;

        if (coef_stale) {
            coef = state.support_coefficients(data);
            coef_stale = false;
        }
        const Support& J = state.support();
        for (std::size_t i = 0; i < J.size(); ++i) {
            const auto j = static_cast<Eigen::Index>(J[i]);
            acc.mean_sum[j] += coef[static_cast<Eigen::Index>(i)];
            if (state.full_rank()) acc.restricted_sum[j] += coef[static_cast<Eigen::Index>(i)];
        }
        record_visit(acc, J, 1, ccfg.max_visit_subsets);
        ++acc.recorded;
    }
    return acc;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void ChainConfig::validate() const {
    if (steps < 1) throw DomainError("chain needs at least one recorded step");
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0) || !(swap_prob >= 0.0 && swap_prob <= 1.0)) {
        throw DomainError("move probabilities must lie in [0, 1]");
    }
    if (std::abs(flip_prob + swap_prob - 1.0) > 1e-12) throw DomainError("move probabilities must sum to 1");
    if (chains < 1) throw DomainError("need at least one chain");
    if (init == ChainInit::lasso && !(lasso_a > 0.0)) throw DomainError("lasso warm start needs A > 0");
}

void ChainAccumulators::merge(const ChainAccumulators& other, std::size_t max_visit_subsets) {
    if (mean_sum.size() == 0) {
        mean_sum = VectorXd::Zero(other.mean_sum.size());
        restricted_sum = VectorXd::Zero(other.restricted_sum.size());
        best_subset = other.best_subset;
        best_log_weight = other.best_log_weight;
    } else if (other.best_log_weight > best_log_weight) {
        best_subset = other.best_subset;
        best_log_weight = other.best_log_weight;
    }
    mean_sum += other.mean_sum;
    restricted_sum += other.restricted_sum;
    recorded += other.recorded;
    for (const auto& [J, count] : other.visit_counts) record_visit(*this, J, count, max_visit_subsets);
    visits_truncated = visits_truncated || other.visits_truncated;
    proposals += other.proposals;
    accepted += other.accepted;
    if (trace.empty()) trace = other.trace;
}

double proposal_probability(const Support& from, const Support& to, std::size_t p, const ChainConfig& cfg) {
    const std::set<std::size_t> a(from.begin(), from.end());
    const std::set<std::size_t> b(to.begin(), to.end());
    std::vector<std::size_t> only_a;
    std::vector<std::size_t> only_b;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_a));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_b));
    const auto pd = static_cast<double>(p);
    const std::size_t s = from.size();

    double prob = 0.0;
    if (only_a.size() + only_b.size() == 1) prob += cfg.flip_prob / pd;
    if (only_a.size() == 1 && only_b.size() == 1 && s > 0 && s < p) {
        prob += cfg.swap_prob / (static_cast<double>(s) * static_cast<double>(p - s));
    }
    return prob;
}

bool mh_step(SubsetState& state, const Dataset& data, const PosteriorConfig& pcfg,
             const ChainConfig& ccfg, Rng& rng) {
    const std::size_t p = data.p();
    const std::size_t s = state.size();
    const double u_move = std::uniform_real_distribution<double>(0.0, 1.0)(rng);

    SubsetState proposal = state;
    if (u_move < ccfg.flip_prob) {
        const std::size_t k = uniform_index(rng, p);
        if (state.contains(k)) {
            proposal.remove(data, k);
        } else {
            if (s + 1 > pcfg.s_bar) return false;
            proposal.add(data, k);
        }
    } else {
        if (s == 0 || s == p) return false;
        const std::size_t out = state.support()[uniform_index(rng, s)];
        const std::size_t in = nth_non_member(state.support(), uniform_index(rng, p - s));
        proposal.remove(data, out);
        proposal.add(data, in);
    }

    const double lw_new = log_posterior_unnorm(proposal, p, pcfg);
    if (lw_new == kNegInf) return false;
    const double delta = lw_new - state.log_weight();
    if (delta < 0.0) {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        if (!(std::log(u) < delta)) return false;
    }
    proposal.set_log_weight(lw_new);
    state = std::move(proposal);
    return true;
}

ChainAccumulators run_chain(const Dataset& data, const PosteriorConfig& pcfg, const ChainConfig& ccfg) {
    pcfg.validate(data.p());
    ccfg.validate();

    std::vector<ChainAccumulators> per_chain(ccfg.chains);
    const std::size_t workers = std::clamp<std::size_t>(ccfg.workers, 1, ccfg.chains);
    auto run_range = [&](std::size_t first) {
        for (std::size_t r = first; r < ccfg.chains; r += workers) {
            per_chain[r] = run_single_chain(data, pcfg, ccfg, derive_seed(ccfg.seed, r),
                                            ccfg.record_trace && r == 0);
        }
    };
    if (workers == 1) {
        run_range(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
        for (auto& t : pool) t.join();
    }

    ChainAccumulators acc = std::move(per_chain.front());
    for (std::size_t r = 1; r < per_chain.size(); ++r) acc.merge(per_chain[r], ccfg.max_visit_subsets);
    return acc;
}

VectorXd estimate_mean(const ChainAccumulators& acc) {
    if (acc.recorded == 0) throw DomainError("no recorded steps");
    return acc.mean_sum / static_cast<double>(acc.recorded);
}

VectorXd estimate_restricted_mean(const ChainAccumulators& acc) {
    if (acc.recorded == 0) throw DomainError("no recorded steps");
    return acc.restricted_sum / static_cast<double>(acc.recorded);
}

MapEstimate estimate_map(const ChainAccumulators& acc, const Dataset& data) {
    return {acc.best_subset, ls_min_norm(data, acc.best_subset)};
}

Thresholded threshold(const VectorXd& beta, double tau) {
    if (!(tau >= 0.0)) throw DomainError("threshold must be nonnegative");
    Thresholded out{beta, {}};
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (std::abs(beta[j]) <= tau) {
            out.beta[j] = 0.0;
        } else {
            out.support.push_back(static_cast<std::size_t>(j));
        }
    }
    return out;
}

double default_threshold(double sigma, std::size_t n, std::size_t p) {
    return sigma * std::sqrt(2.0 * std::log(static_cast<double>(p)) / static_cast<double>(n));
}

double total_variation(const ChainAccumulators& acc, const PosteriorTable& table) {
    if (acc.recorded == 0) throw DomainError("no recorded steps");
    const double total = static_cast<double>(acc.recorded);
    double tv = 0.0;
    double matched_mass = 0.0;
    for (const auto& e : table.entries) {
        const auto it = acc.visit_counts.find(e.subset);
        const double freq = it == acc.visit_counts.end() ? 0.0 : static_cast<double>(it->second) / total;
        if (it != acc.visit_counts.end()) matched_mass += freq;
        tv += std::abs(freq - e.prob);
    }
    // Visited subsets absent from the table (only possible for mismatched
    // inputs) contribute their full frequency.
    tv += std::max(0.0, 1.0 - matched_mass);
    return 0.5 * tv;
}

void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out) {
    out << "step,size,log_weight,accepted\n";
    for (const auto& r : trace) {
        out << r.step << ',' << r.size << ',' << format_double(r.log_weight) << ',' << (r.accepted ? 1 : 0)
            << '\n';
    }
}

}  // namespace aew
