#include "aew/posterior.hpp"
#include "aew/report.hpp"
#include "aew/sampler.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

namespace aew {
namespace {

struct Problem {
    Dataset data;
    PosteriorConfig pcfg;
};

Problem oracle_problem(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const MatrixXd X = oracle::normalized(oracle::gaussian(30, 10, rng));
    VectorXd beta = VectorXd::Zero(10);
    beta[1] = 0.5;
    beta[4] = -0.4;
    const VectorXd y = X * beta + 0.8 * oracle::gaussian_vector(30, rng);
    PosteriorConfig pcfg;
    pcfg.lambda = std::log(10.0);
    pcfg.s_bar = 4;
    pcfg.sigma2 = 0.64;
    return {Dataset(X, y), pcfg};
}

SubsetState start(const Dataset& d, const Support& J, const PosteriorConfig& pcfg) {
    SubsetState s(d, J);
    s.set_log_weight(log_posterior_unnorm(s, d.p(), pcfg));
    return s;
}

TEST(DeriveSeed, DistinctStreams) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 100; ++s) seen.insert(derive_seed(42, s));
    EXPECT_EQ(seen.size(), 100u);
    EXPECT_EQ(derive_seed(42, 3), derive_seed(42, 3));
    EXPECT_NE(derive_seed(42, 3), derive_seed(43, 3));
}

TEST(ChainConfig, Validation) {
    ChainConfig c;
    EXPECT_NO_THROW(c.validate());
    c.steps = 0;
    EXPECT_THROW(c.validate(), DomainError);
    c = ChainConfig{};
    c.flip_prob = 0.7;
    EXPECT_THROW(c.validate(), DomainError);
    c.swap_prob = 0.3;
    EXPECT_NO_THROW(c.validate());
    c.flip_prob = 1.2;
    c.swap_prob = -0.2;
    EXPECT_THROW(c.validate(), DomainError);
}

TEST(Proposal, Symmetric) {
    ChainConfig c;
    c.flip_prob = 0.3;
    c.swap_prob = 0.7;
    const std::size_t p = 5;
    const auto subsets = oracle::all_subsets(p, p);
    for (const auto& a : subsets) {
        double total = 0.0;
        for (const auto& b : subsets) {
            const double q = proposal_probability(a, b, p, c);
            EXPECT_NEAR(q, proposal_probability(b, a, p, c), 1e-15);
            total += q;
        }
        // No swap exists from the empty or the full set; that mass stays put.
        const bool swap_possible = !a.empty() && a.size() < p;
        EXPECT_NEAR(total, swap_possible ? 1.0 : c.flip_prob, 1e-12);
    }
}

TEST(MhStep, NeverExceedsCap) {
    std::mt19937_64 g(1);
    const MatrixXd X = oracle::normalized(oracle::gaussian(20, 8, g));
    const Dataset d(X, X * VectorXd::Ones(8) * 5.0);
    PosteriorConfig pcfg;
    pcfg.lambda = 0.1;
    pcfg.s_bar = 2;
    pcfg.sigma2 = 0.01;
    ChainConfig ccfg;
    Rng rng(3);
    SubsetState s = start(d, {}, pcfg);
    std::size_t at_cap_rejections = 0;
    for (int i = 0; i < 5000; ++i) {
        const Support before = s.support();
        const bool moved = mh_step(s, d, pcfg, ccfg, rng);
        EXPECT_LE(s.size(), 2u);
        if (!moved) {
            EXPECT_EQ(s.support(), before);
            if (before.size() == 2) ++at_cap_rejections;
        }
    }
    EXPECT_GT(at_cap_rejections, 0u);
}

TEST(MhStep, ZeroDeltaAlwaysAccepted) {
    const Dataset d(oracle::normalized(MatrixXd::Identity(6, 6) + MatrixXd::Ones(6, 6)), VectorXd::Zero(6));
    PosteriorConfig pcfg;
    pcfg.s_bar = 3;
    ChainConfig ccfg;
    ccfg.flip_prob = 0.0;
    ccfg.swap_prob = 1.0;
    Rng rng(4);
    SubsetState s = start(d, {0, 3}, pcfg);
    for (int i = 0; i < 200; ++i) EXPECT_TRUE(mh_step(s, d, pcfg, ccfg, rng));
}

TEST(MhStep, BestIsMonotone) {
    const Problem pr = oracle_problem(5);
    ChainConfig ccfg;
    Rng rng(6);
    SubsetState s = start(pr.data, {}, pr.pcfg);
    double best = s.log_weight();
    double previous_best = best;
    for (int i = 0; i < 3000; ++i) {
        mh_step(s, pr.data, pr.pcfg, ccfg, rng);
        EXPECT_NEAR(s.log_weight(), log_posterior_unnorm(pr.data, s.support(), pr.pcfg), 1e-8);
        best = std::max(best, s.log_weight());
        EXPECT_GE(best, previous_best);
        previous_best = best;
    }
}

TEST(RunChain, SingleRecordedStep) {
    const Problem pr = oracle_problem(7);
    ChainConfig ccfg;
    ccfg.burn_in = 50;
    ccfg.steps = 1;
    ccfg.seed = 9;
    const ChainAccumulators acc = run_chain(pr.data, pr.pcfg, ccfg);
    ASSERT_EQ(acc.recorded, 1u);
    ASSERT_EQ(acc.visit_counts.size(), 1u);
    const Support J = acc.visit_counts.begin()->first;
    EXPECT_LE((estimate_mean(acc) - oracle::pinv_fit(pr.data.X(), pr.data.y(), J)).norm(), 1e-10);
}

TEST(RunChain, Deterministic) {
    const Problem pr = oracle_problem(8);
    ChainConfig ccfg;
    ccfg.seed = 11;
    ccfg.chains = 3;
    const ChainAccumulators a = run_chain(pr.data, pr.pcfg, ccfg);
    ccfg.workers = 3;
    const ChainAccumulators b = run_chain(pr.data, pr.pcfg, ccfg);
    EXPECT_EQ(a.mean_sum, b.mean_sum);
    EXPECT_EQ(a.restricted_sum, b.restricted_sum);
    EXPECT_EQ(a.visit_counts, b.visit_counts);
    EXPECT_EQ(a.best_subset, b.best_subset);
    EXPECT_EQ(a.accepted, b.accepted);
    EXPECT_EQ(a.recorded, 3u * ccfg.steps);
}

TEST(RunChain, CountsAndBest) {
    const Problem pr = oracle_problem(9);
    ChainConfig ccfg;
    ccfg.steps = 4000;
    const ChainAccumulators acc = run_chain(pr.data, pr.pcfg, ccfg);
    std::uint64_t total = 0;
    for (const auto& [J, c] : acc.visit_counts) {
        total += c;
        EXPECT_GE(acc.best_log_weight, log_posterior_unnorm(pr.data, J, pr.pcfg) - 1e-9);
    }
    EXPECT_EQ(total, ccfg.steps);
    EXPECT_GE(acc.accept_rate(), 0.0);
    EXPECT_LE(acc.accept_rate(), 1.0);
}

TEST(RunChain, MatchesEnumeration) {
    const Problem pr = oracle_problem(10);
    const PosteriorTable table = enumerate_posterior(pr.data, pr.pcfg);
    const ExactEstimates exact = exact_estimators(table, pr.data);
    ChainConfig ccfg;
    ccfg.steps = 200'000;
    ccfg.seed = 12;
    const ChainAccumulators acc = run_chain(pr.data, pr.pcfg, ccfg);
    EXPECT_LE(total_variation(acc, table), 0.05);
    EXPECT_LE((estimate_mean(acc) - exact.mean_beta).lpNorm<Eigen::Infinity>(), 0.02);
    EXPECT_LE((estimate_restricted_mean(acc) - exact.restricted_mean_beta).lpNorm<Eigen::Infinity>(), 0.02);
    const MapEstimate map = estimate_map(acc, pr.data);
    EXPECT_EQ(map.subset, exact.map_subset);
    EXPECT_LE((map.beta - exact.map_beta).norm(), 1e-10);
}

TEST(RunChain, StrongSignalFindsSupport) {
    std::size_t hits = 0;
    for (std::uint64_t r = 0; r < 20; ++r) {
        std::mt19937_64 g(100 + r);
        const MatrixXd X = oracle::normalized(oracle::gaussian(60, 20, g));
        VectorXd beta = VectorXd::Zero(20);
        beta[3] = beta[11] = beta[17] = 2.0;
        const Dataset d(X, X * beta + oracle::gaussian_vector(60, g));
        PosteriorConfig pcfg = PosteriorConfig::practical(60, 20, 1.0);
        ChainConfig ccfg;
        ccfg.seed = r;
        if (run_chain(d, pcfg, ccfg).best_subset == Support{3, 11, 17}) ++hits;
    }
    EXPECT_GE(hits, 19u);
}

TEST(RunChain, InitialStates) {
    const Problem pr = oracle_problem(13);
    ChainConfig ccfg;
    ccfg.burn_in = 0;
    ccfg.steps = 1;
    ccfg.flip_prob = 0.0;
    ccfg.swap_prob = 1.0;
    ccfg.init = ChainInit::given;
    ccfg.initial = {0, 1, 2, 3, 4};
    EXPECT_THROW(run_chain(pr.data, pr.pcfg, ccfg), DomainError);
    ccfg.init = ChainInit::lasso;
    EXPECT_NO_THROW(run_chain(pr.data, pr.pcfg, ccfg));
}

TEST(RunChain, VisitCapTruncates) {
    const Problem pr = oracle_problem(14);
    ChainConfig ccfg;
    ccfg.max_visit_subsets = 3;
    const ChainAccumulators acc = run_chain(pr.data, pr.pcfg, ccfg);
    EXPECT_LE(acc.visit_counts.size(), 3u);
    EXPECT_TRUE(acc.visits_truncated);
    EXPECT_EQ(acc.recorded, ccfg.steps);
}

TEST(Threshold, Basics) {
    VectorXd b(4);
    b << 0.0, 0.3, -0.05, 2.0;
    const Thresholded id = threshold(b, 0.0);
    EXPECT_EQ(id.support, (Support{1, 2, 3}));
    EXPECT_EQ(id.beta, b);
    EXPECT_TRUE(threshold(b, 5.0).support.empty());
    const Thresholded t = threshold(b, 0.3);
    EXPECT_EQ(t.support, Support{3});
    EXPECT_EQ(t.beta[1], 0.0);
    EXPECT_THROW(threshold(b, -1.0), DomainError);
    EXPECT_NEAR(default_threshold(2.0, 100, 200), 2.0 * std::sqrt(2.0 * std::log(200.0) / 100.0), 1e-15);
}

TEST(Trace, CsvColumns) {
    const Problem pr = oracle_problem(15);
    ChainConfig ccfg;
    ccfg.burn_in = 5;
    ccfg.steps = 10;
    ccfg.record_trace = true;
    const ChainAccumulators acc = run_chain(pr.data, pr.pcfg, ccfg);
    EXPECT_EQ(acc.trace.size(), 15u);
    std::ostringstream out;
    write_trace_csv(acc.trace, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "step,size,log_weight,accepted");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(split_csv_line(line).size(), 4u);
        ++rows;
    }
    EXPECT_EQ(rows, 15u);
}

}  // namespace
}  // namespace aew
