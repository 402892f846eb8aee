#include "aew/dataset.hpp"
#include "aew/error.hpp"
#include "aew/subset_linalg.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace aew {
namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

TEST(Dataset, RejectsBadInput) {
    MatrixXd X = MatrixXd::Ones(3, 2);
    EXPECT_THROW(Dataset(X, VectorXd::Ones(4)), DomainError);
    X(1, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(Dataset(X, VectorXd::Ones(3)), NonFiniteError);
    EXPECT_THROW(Dataset(MatrixXd::Ones(3, 2), VectorXd::Ones(3), -1.0), DomainError);
    VectorXd y = VectorXd::Ones(3);
    y[0] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(Dataset(MatrixXd::Ones(3, 2), y), NonFiniteError);
}

TEST(Dataset, NormalizationRoundTrip) {
    std::mt19937_64 rng(3);
    const MatrixXd X = oracle::gaussian(12, 4, rng) * 3.0;
    const Dataset raw(X, oracle::gaussian_vector(12, rng));
    EXPECT_FALSE(raw.is_normalized());
    EXPECT_THROW(raw.require_normalized(), DomainError);
    const NormalizedDataset norm = normalize_columns(raw);
    EXPECT_TRUE(norm.data.is_normalized());
    const Support all{0, 1, 2, 3};
    const VectorXd b_norm = ls_min_norm(norm.data, all);
    const VectorXd b_raw = ls_min_norm(raw, all);
    EXPECT_LE((to_original_units(b_norm, norm.scales) - b_raw).norm(), 1e-10 * b_raw.norm());
}

TEST(Dataset, SupportValidation) {
    EXPECT_NO_THROW(validate_support({0, 2, 3}, 4));
    EXPECT_THROW(validate_support({2, 1}, 4), DomainError);
    EXPECT_THROW(validate_support({1, 1}, 4), DomainError);
    EXPECT_THROW(validate_support({4}, 4), DomainError);
}

TEST(LeastSquares, EmptySupport) {
    std::mt19937_64 rng(1);
    const Dataset d(oracle::gaussian(6, 3, rng), oracle::gaussian_vector(6, rng));
    EXPECT_EQ(ls_min_norm(d, {}), VectorXd::Zero(3));
    EXPECT_DOUBLE_EQ(residual_ss(d, {}), d.y().squaredNorm());
}

TEST(LeastSquares, OrthogonalDesignClosedForm) {
    std::mt19937_64 rng(2);
    const Eigen::HouseholderQR<MatrixXd> qr(oracle::gaussian(16, 5, rng));
    const MatrixXd X = MatrixXd(qr.householderQ()).leftCols(5) * 4.0;  // columns scaled by sqrt(n)
    const VectorXd y = oracle::gaussian_vector(16, rng);
    const Dataset d(X, y);
    const VectorXd b = ls_min_norm(d, {1, 3, 4});
    for (const Eigen::Index j : {1, 3, 4}) EXPECT_NEAR(b[j], X.col(j).dot(y) / 16.0, 1e-12);
    EXPECT_EQ(b[0], 0.0);
    EXPECT_EQ(b[2], 0.0);
}

TEST(LeastSquares, DuplicatedColumnMatchesPseudoInverse) {
    std::mt19937_64 rng(4);
    MatrixXd X = oracle::gaussian(8, 5, rng);
    X.col(2) = X.col(0);
    const VectorXd y = oracle::gaussian_vector(8, rng);
    const Dataset d(X, y);
    const Support J{0, 2, 4};
    const VectorXd want = oracle::pinv_fit(X, y, J);
    EXPECT_LE((ls_min_norm(d, J) - want).norm(), 1e-8 * want.norm());
    EXPECT_NEAR(ls_min_norm(d, J)[0], ls_min_norm(d, J)[2], 1e-10);
}

TEST(LeastSquares, RandomRankDeficientAgainstPseudoInverse) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 6 + t % 7, p = 4 + t % 6;
        MatrixXd X = oracle::gaussian(n, p, rng);
        if (t % 2 == 0) X.col(1) = X.col(0) - 0.5 * X.col(2);
        const VectorXd y = oracle::gaussian_vector(n, rng);
        const Dataset d(X, y);
        oracle::Index J;
        for (std::size_t j = 0; j < p; ++j) {
            if ((t + j) % 3 != 2) J.push_back(j);
        }
        const VectorXd want = oracle::pinv_fit(X, y, J);
        EXPECT_LE((ls_min_norm(d, J) - want).norm(), 1e-8 * std::max(1.0, want.norm())) << "t=" << t;
    }
}

TEST(ResidualSS, FullRowSpanIsZero) {
    std::mt19937_64 rng(6);
    const Dataset d(oracle::gaussian(5, 8, rng), oracle::gaussian_vector(5, rng));
    EXPECT_LE(residual_ss(d, {0, 1, 2, 3, 4, 5, 6}), 1e-8 * d.y().squaredNorm());
}

TEST(ResidualSS, MatchesQrProjection) {
    std::mt19937_64 rng(7);
    const MatrixXd X = oracle::gaussian(10, 6, rng);
    const VectorXd y = oracle::gaussian_vector(10, rng);
    const Dataset d(X, y);
    EXPECT_LE(rel(residual_ss(d, {1, 3}), oracle::qr_rss(X, y, {1, 3})), 1e-8);
}

TEST(ResidualSS, OrthogonalDecompositionAndMonotonicity) {
    std::mt19937_64 rng(8);
    const MatrixXd X = oracle::gaussian(14, 7, rng);
    const VectorXd y = oracle::gaussian_vector(14, rng);
    const Dataset d(X, y);
    const double yy = y.squaredNorm();
    for (const auto& J : oracle::all_subsets(7, 7)) {
        const VectorXd fit = X * ls_min_norm(d, J);
        EXPECT_NEAR(residual_ss(d, J) + fit.squaredNorm(), yy, 1e-8 * yy);
        for (std::size_t j = 0; j < 7; ++j) {
            if (std::binary_search(J.begin(), J.end(), j)) continue;
            Support bigger = J;
            bigger.insert(std::upper_bound(bigger.begin(), bigger.end(), j), j);
            EXPECT_LE(residual_ss(d, bigger), residual_ss(d, J) + 1e-8 * yy);
        }
    }
}

TEST(ResidualSS, SpanIdempotent) {
    std::mt19937_64 rng(9);
    MatrixXd X = oracle::gaussian(12, 5, rng);
    X.col(4) = 2.0 * X.col(0) - 3.0 * X.col(1);
    const Dataset d(X, oracle::gaussian_vector(12, rng));
    EXPECT_LE(rel(residual_ss(d, {0, 1, 4}), residual_ss(d, {0, 1})), 1e-8);
}

TEST(SubsetState, AddSingleNormalizedColumn) {
    std::mt19937_64 rng(10);
    const MatrixXd X = oracle::normalized(oracle::gaussian(9, 3, rng));
    const VectorXd y = oracle::gaussian_vector(9, rng);
    const Dataset d(X, y);
    const SubsetState s = update_add(SubsetState(d), 1, d);
    const double c = X.col(1).dot(y);
    EXPECT_LE(rel(s.rss(), y.squaredNorm() - c * c / 9.0), 1e-12);
}

TEST(SubsetState, DuplicateColumnLeavesRssUnchanged) {
    std::mt19937_64 rng(11);
    MatrixXd X = oracle::gaussian(10, 4, rng);
    X.col(3) = X.col(1);
    const Dataset d(X, oracle::gaussian_vector(10, rng));
    const SubsetState base(d, {0, 1});
    const SubsetState dup = update_add(base, 3, d);
    EXPECT_FALSE(dup.full_rank());
    EXPECT_LE(rel(dup.rss(), base.rss()), 1e-8);
    const SubsetState back = update_remove(dup, 1, d);
    EXPECT_TRUE(back.full_rank());
    EXPECT_LE(rel(back.rss(), residual_ss(d, {0, 3})), 1e-8);
}

TEST(SubsetState, RandomWalkMatchesScratch) {
    std::mt19937_64 rng(12);
    for (int w = 0; w < 20; ++w) {
        MatrixXd X = oracle::gaussian(15, 10, rng);
        if (w % 3 == 0) X.col(7) = X.col(2) + X.col(5);
        const VectorXd y = oracle::gaussian_vector(15, rng);
        const Dataset d(X, y);
        SubsetState s(d);
        std::uniform_int_distribution<std::size_t> pick(0, 9);
        for (int step = 0; step < 20; ++step) {
            const std::size_t j = pick(rng);
            s = s.contains(j) ? update_remove(s, j, d) : update_add(s, j, d);
            const double want = oracle::qr_rss(X, y, s.support());
            EXPECT_LE(std::abs(s.rss() - want), 1e-8 * std::max(1.0, want));
            const VectorXd b = oracle::pinv_fit(X, y, s.support());
            EXPECT_LE((s.coefficients(d) - b).norm(), 1e-8 * std::max(1.0, b.norm()));
        }
    }
}

TEST(SubsetState, RemoveMatchesScratchState) {
    std::mt19937_64 rng(13);
    const MatrixXd X = oracle::gaussian(20, 8, rng);
    const Dataset d(X, oracle::gaussian_vector(20, rng));
    const SubsetState full(d, {0, 1, 2, 3, 4, 5});
    for (std::size_t j = 0; j < 6; ++j) {
        const SubsetState r = update_remove(full, j, d);
        Support J{0, 1, 2, 3, 4, 5};
        J.erase(J.begin() + static_cast<std::ptrdiff_t>(j));
        EXPECT_EQ(r.support(), J);
        EXPECT_LE(rel(r.rss(), SubsetState(d, J).rss()), 1e-8);
    }
}

TEST(SubsetState, LongWalkStaysAccurate) {
    std::mt19937_64 rng(14);
    const MatrixXd X = oracle::gaussian(30, 12, rng);
    const VectorXd y = oracle::gaussian_vector(30, rng);
    const Dataset d(X, y);
    SubsetState s(d);
    std::uniform_int_distribution<std::size_t> pick(0, 11);
    for (int step = 0; step < 5000; ++step) {
        const std::size_t j = pick(rng);
        if (s.contains(j)) s.remove(d, j);
        else s.add(d, j);
    }
    EXPECT_LE(s.drift(), SubsetState::kMaxDrift);
    EXPECT_LE(rel(s.rss(), oracle::qr_rss(X, y, s.support())), 1e-8);
}

TEST(SubsetState, SupportCoefficientsMatchEmbedded) {
    std::mt19937_64 rng(15);
    const Dataset d(oracle::gaussian(10, 6, rng), oracle::gaussian_vector(10, rng));
    const SubsetState s(d, {1, 4, 5});
    EXPECT_LE((embed(s.support(), s.support_coefficients(d), 6) - s.coefficients(d)).norm(), 1e-14);
}

TEST(LeastSquares, NonFiniteInputRejected) {
    MatrixXd X = MatrixXd::Identity(3, 3);
    X(0, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(Dataset(X, VectorXd::Ones(3)), NonFiniteError);
}

}  // namespace
}  // namespace aew
