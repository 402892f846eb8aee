#pragma once

#include "aew/dataset.hpp"
#include "aew/posterior.hpp"
#include "aew/subset_linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <vector>

namespace aew {

using Rng = std::mt19937_64;

/// Independent 64-bit seed for stream `stream` of a base seed (SplitMix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum class ChainInit { empty, given, lasso };

/// Metropolis-Hastings run length, proposal mix and initial state.
struct ChainConfig {
    std::size_t burn_in = 3000;
    std::size_t steps = 7000;
    std::uint64_t seed = 1;
    /// Probability of a flip proposal; swaps get the rest.
    double flip_prob = 0.5;
    double swap_prob = 0.5;
    ChainInit init = ChainInit::empty;
    Support initial;        // used with ChainInit::given
    double lasso_a = 4.0;   // used with ChainInit::lasso
    /// Independent chains whose accumulators are pooled.
    std::size_t chains = 1;
    /// Threads used to run the chains; results do not depend on it.
    std::size_t workers = 1;
    std::size_t max_visit_subsets = 100'000;
    bool record_trace = false;

    void validate() const;
};

struct TraceRow {
    std::size_t step;
    std::size_t size;
    double log_weight;
    bool accepted;
};

/// Running statistics of one or more chains.
struct ChainAccumulators {
    /// Sum of the least-squares fits of the recorded states.
    VectorXd mean_sum;
    /// Same sum restricted to full-rank states.
    VectorXd restricted_sum;
    std::size_t recorded = 0;

    /// Highest-weight state seen (burn-in included).
    Support best_subset;
    double best_log_weight = 0.0;

    /// Recorded-step visit counts. Once max_visit_subsets distinct subsets
    /// are stored, new subsets are no longer inserted and visits_truncated
    /// is set.
    std::map<Support, std::uint64_t> visit_counts;
    bool visits_truncated = false;

    std::uint64_t proposals = 0;
    std::uint64_t accepted = 0;

    /// Step trace of the first chain, when requested.
    std::vector<TraceRow> trace;

    double accept_rate() const {
        return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
    }

    /// Pools `other` into this accumulator. Ties on the best weight keep the
    /// current best, so merging in a fixed order is reproducible.
    void merge(const ChainAccumulators& other, std::size_t max_visit_subsets);
};

/// Probability that one step of the kernel proposes `to` from `from`.
double proposal_probability(const Support& from, const Support& to, std::size_t p,
                            const ChainConfig& cfg);

/// One Metropolis-Hastings transition. Proposes either a flip (toggle a
/// uniformly chosen coordinate) or a swap (replace a uniform member of J by
/// a uniform non-member); both proposals are symmetric, so acceptance is
/// min(1, Pi(J') / Pi(J)). A flip that would exceed s_bar is rejected
/// outright. Returns whether the state moved.
///
/// `state.log_weight()` must hold the current log-posterior.
bool mh_step(SubsetState& state, const Dataset& data, const PosteriorConfig& pcfg,
             const ChainConfig& ccfg, Rng& rng);

/// Burn-in followed by recorded steps for each configured chain.
ChainAccumulators run_chain(const Dataset& data, const PosteriorConfig& pcfg, const ChainConfig& ccfg);

/// Posterior mean estimate: mean_sum / recorded.
VectorXd estimate_mean(const ChainAccumulators& acc);
VectorXd estimate_restricted_mean(const ChainAccumulators& acc);

struct MapEstimate {
    Support subset;
    VectorXd beta;
};

/// Best visited subset refitted by least squares.
MapEstimate estimate_map(const ChainAccumulators& acc, const Dataset& data);

struct Thresholded {
    VectorXd beta;
    Support support;
};

/// Zeroes entries with |beta_j| <= tau.
Thresholded threshold(const VectorXd& beta, double tau);

/// sigma * sqrt(2 log p / n).
double default_threshold(double sigma, std::size_t n, std::size_t p);

/// Empirical visit frequencies against an exact table; subsets missing from
/// either side count with probability zero.
double total_variation(const ChainAccumulators& acc, const PosteriorTable& table);

/// CSV with columns step, size, log_weight, accepted.
void write_trace_csv(const std::vector<TraceRow>& trace, std::ostream& out);

}  // namespace aew
