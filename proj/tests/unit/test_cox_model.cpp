#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <tlamm/cox_model.hpp>
#include <tlamm/error.hpp>
#include <tlamm/experiment.hpp>
#include <tlamm/random.hpp>

#include "oracles.hpp"

using namespace tlamm;
using namespace tlamm::testing;

namespace {

const SurvivalDataset& two_point()
{
    static const SurvivalDataset data = make_dataset({1.0, 2.0}, {1, 1}, {{1.0}, {0.0}});
    return data;
}

} // namespace

TEST(CoxValue, TwoPointExample)
{
    const CoxObjective cox(two_point());
    EXPECT_NEAR(cox.value(Vector::Zero(1)), std::log(2.0) / 2.0, 1e-15);
}

TEST(CoxValue, DistinctTimesNoCensoring)
{
    const Index n = 12;
    std::vector<double> t;
    std::vector<int> d;
    std::vector<std::vector<double>> x;
    for (Index i = 0; i < n; ++i) {
        t.push_back(1.0 + static_cast<double>((i * 5) % n));
        d.push_back(1);
        x.push_back({static_cast<double>(i), -1.0});
    }
    const auto data = make_dataset(t, d, x);
    const CoxObjective cox(data);
    double expected = 0.0;
    for (Index k = 1; k <= n; ++k) {
        expected += std::log(static_cast<double>(k));
    }
    EXPECT_NEAR(cox.value(Vector::Zero(2)), expected / static_cast<double>(n), 1e-14);
}

TEST(CoxValue, SingleLastEventIsZero)
{
    const auto data = make_dataset({1.0, 2.0, 5.0}, {0, 0, 1}, {{0.3, 1.0}, {-2.0, 0.5}, {1.5, -0.7}});
    const CoxObjective cox(data);
    EXPECT_NEAR(cox.value(Vector::Zero(2)), 0.0, 1e-15);
    EXPECT_NEAR(cox.value(random_vector(2, 3)), 0.0, 1e-14);
}

TEST(CoxValue, MatchesBruteForceWithTies)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto data = random_dataset(40, 4, seed, 0.3, 6);
        const CoxObjective cox(data);
        const Vector beta = random_vector(4, seed + 100);
        EXPECT_NEAR(cox.value(beta), brute_nll(data, beta), 1e-12);
        EXPECT_NEAR(cox.value_and_gradient(beta).first, brute_nll(data, beta), 1e-12);
    }
}

TEST(CoxValue, StableForLargeLinearPredictor)
{
    const auto data = random_dataset(30, 3, 4);
    const CoxObjective cox(data);
    const Vector beta = Vector::Constant(3, 300.0);
    EXPECT_TRUE(std::isfinite(cox.value(beta)));
    EXPECT_TRUE(cox.gradient(beta).allFinite());
    EXPECT_NEAR(cox.value(beta), brute_nll_stable(data, beta), 1e-9 * std::abs(cox.value(beta)));
}

TEST(CoxValue, IncrementMatchesDifference)
{
    const auto data = random_dataset(50, 5, 8, 0.3, 9);
    const CoxObjective cox(data);
    const Vector a = random_vector(5, 1);
    const Vector b = a + random_vector(5, 2, 0.3);
    EXPECT_NEAR(cox.increment(a, b), brute_nll(data, b) - brute_nll(data, a), 1e-12);
}

TEST(CoxGradient, TwoPointExample)
{
    const CoxObjective cox(two_point());
    EXPECT_NEAR(cox.gradient(Vector::Zero(1))[0], -0.25, 1e-15);
}

TEST(CoxGradient, ConstantCovariatesGiveZero)
{
    const auto data = make_dataset({1, 2, 3, 4}, {1, 0, 1, 1}, {{2, -1}, {2, -1}, {2, -1}, {2, -1}});
    const CoxObjective cox(data);
    for (std::uint64_t s = 0; s < 3; ++s) {
        EXPECT_LT(cox.gradient(random_vector(2, s)).cwiseAbs().maxCoeff(), 1e-14);
    }
    EXPECT_LT(cox.hessian(Vector::Zero(2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(CoxGradient, FiniteDifferenceOracle)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto data = random_dataset(30, 5, 200 + seed);
        const CoxObjective cox(data);
        const Vector beta = random_vector(5, 300 + seed);
        const Vector analytic = cox.gradient(beta);
        const Vector numeric = fd_gradient([&](const Vector& b) { return brute_nll(data, b); }, beta);
        EXPECT_LE((analytic - numeric).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + analytic.cwiseAbs().maxCoeff()));
    }
}

TEST(CoxGradient, DirectionalDerivative)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto data = random_dataset(25, 4, 400 + seed, 0.2, 5);
        const CoxObjective cox(data);
        const Vector beta = random_vector(4, 500 + seed);
        const Vector u = random_vector(4, 600 + seed).normalized();
        const double h = 1e-5;
        const double numeric = (cox.value(beta + h * u) - cox.value(beta - h * u)) / (2.0 * h);
        const double analytic = cox.gradient(beta).dot(u);
        EXPECT_NEAR(numeric, analytic, 1e-5 * std::max(1.0, std::abs(analytic)));
    }
}

TEST(CoxHessian, TwoPointExample)
{
    const CoxObjective cox(two_point());
    EXPECT_NEAR(cox.hessian(Vector::Zero(1))(0, 0), 0.125, 1e-15);
}

TEST(CoxHessian, PositiveSemidefinite)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto data = random_dataset(30, 4, 700 + seed, 0.3, 4);
        const CoxObjective cox(data);
        const Matrix h = cox.hessian(random_vector(4, seed));
        EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-14);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-10);
    }
}

TEST(CoxHessian, MatchesGradientDifferences)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto data = random_dataset(50, 6, 800 + seed, 0.3, 8);
        const CoxObjective cox(data);
        const Vector beta = random_vector(6, 900 + seed, 0.5);
        const Matrix h = cox.hessian(beta);
        const double step = 1e-5;
        for (Index j = 0; j < 6; ++j) {
            Vector up = beta;
            Vector down = beta;
            up[j] += step;
            down[j] -= step;
            const Vector column = (cox.gradient(up) - cox.gradient(down)) / (2.0 * step);
            EXPECT_LE((column - h.col(j)).cwiseAbs().maxCoeff(), 1e-4 * (1.0 + h.cwiseAbs().maxCoeff()));
        }
    }
}

TEST(CoxHessian, CapabilityCap)
{
    const auto data = random_dataset(10, 6, 1);
    const CoxObjective cox(data);
    EXPECT_THROW(cox.hessian(Vector::Zero(6), 5), CapabilityError);
}

TEST(CoxObjectiveProperties, ConvexAlongSegments)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto data = random_dataset(30, 3, 1000 + seed, 0.3, 4);
        const CoxObjective cox(data);
        const Vector a = random_vector(3, 2000 + seed, 2.0);
        const Vector b = random_vector(3, 3000 + seed, 2.0);
        EXPECT_LE(cox.value(0.5 * (a + b)), 0.5 * (cox.value(a) + cox.value(b)) + 1e-12);
    }
}

TEST(CoxObjectiveProperties, InvariantToSubjectOrder)
{
    const auto data = random_dataset(40, 4, 11, 0.3, 6);
    std::vector<Index> perm(40);
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(5);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto shuffled = data.subset(perm);
    const Vector beta = random_vector(4, 12);
    const CoxObjective a(data);
    const CoxObjective b(shuffled);
    EXPECT_NEAR(a.value(beta), b.value(beta), 1e-12);
    EXPECT_LE((a.gradient(beta) - b.gradient(beta)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FitRestricted, OffSupportExactlyZeroAndStationary)
{
    const auto data = random_dataset(80, 6, 21);
    const std::vector<Index> support{1, 4};
    const Vector beta = fit_restricted(data, support);
    for (Index j : {0, 2, 3, 5}) {
        EXPECT_EQ(beta[j], 0.0);
    }
    const CoxObjective cox(data);
    const Vector g = cox.gradient(beta);
    EXPECT_LE(std::abs(g[1]), 1e-8);
    EXPECT_LE(std::abs(g[4]), 1e-8);
}

TEST(FitRestricted, MatchesGoldenSection)
{
    // Overlapping covariate ranges, so the one-dimensional minimizer is finite.
    const auto data = make_dataset({1, 2, 3, 4, 5}, {1, 1, 0, 1, 1}, {{0.9}, {-0.4}, {1.2}, {0.3}, {-1.1}});
    const std::vector<Index> support{0};
    const double newton = fit_restricted(data, support)[0];
    const double golden = golden_section(
        [&](double b) { return brute_nll(data, Vector::Constant(1, b)); }, -20.0, 20.0, 1e-10);
    EXPECT_NEAR(newton, golden, 1e-6);
}

TEST(FitRestricted, NullSignalConsistency)
{
    SimulationConfig c;
    c.n = 10000;
    c.p = 3;
    c.support_size = 1;
    c.signal = {0.0};
    c.seed = 41;
    const auto sim = simulate_dataset(c);
    const std::vector<Index> support{0};
    EXPECT_LT(std::abs(fit_restricted(sim.dataset, support)[0]), 0.3);
}

TEST(FitRestricted, StandardSizeOracleError)
{
    std::vector<double> errors;
    for (int rep = 0; rep < 50; ++rep) {
        SimulationConfig c;
        c.n = 300;
        c.p = 100;
        c.seed = derive_seed(77, {static_cast<std::uint64_t>(rep)});
        const auto sim = simulate_dataset(c);
        const auto support = support_of(sim.true_beta);
        errors.push_back((fit_restricted(sim.dataset, support) - sim.true_beta).norm());
    }
    EXPECT_NEAR(median(errors), 0.29, 0.10);
}

TEST(FitRestricted, SingularSupportRaisesRankError)
{
    auto data = random_dataset(30, 3, 51);
    Matrix x = data.covariates();
    x.col(2) = x.col(0);
    const SurvivalDataset dup(data.times(), data.status(), x);
    const std::vector<Index> support{0, 2};
    EXPECT_THROW(fit_restricted(dup, support), RankError);
}

TEST(FitRestricted, IterationLimitCarriesIterate)
{
    const auto data = random_dataset(60, 3, 52);
    const std::vector<Index> support{0, 1, 2};
    RestrictedFitOptions opts;
    opts.max_iter = 1;
    opts.gradient_tol = 1e-300;
    try {
        fit_restricted(data, support, opts);
        FAIL() << "expected IterationLimitError";
    } catch (const IterationLimitError& e) {
        EXPECT_EQ(e.last_iterate().size(), 3);
        EXPECT_TRUE(e.last_iterate().allFinite());
    }
}

TEST(FitRestricted, ArgumentChecks)
{
    const auto data = random_dataset(20, 3, 53);
    EXPECT_THROW(fit_restricted(data, std::vector<Index>{}), ParameterError);
    EXPECT_THROW(fit_restricted(data, std::vector<Index>{3}), ParameterError);
}
