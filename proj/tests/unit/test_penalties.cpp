#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <tlamm/error.hpp>
#include <tlamm/penalties.hpp>

using namespace tlamm;

namespace {

std::vector<PenaltySpec> families(double lambda)
{
    return {PenaltySpec::lasso(lambda), PenaltySpec::scad(lambda), PenaltySpec::mcp(lambda),
            PenaltySpec::scad(lambda, 2.5), PenaltySpec::mcp(lambda, 1.7)};
}

// Kinks of the derivative: lambda for SCAD, a1 * lambda for SCAD and MCP.
std::vector<double> kinks(const PenaltySpec& spec)
{
    switch (spec.kind) {
    case PenaltyKind::Lasso: return {};
    case PenaltyKind::Scad: return {spec.lambda, spec.shape * spec.lambda};
    case PenaltyKind::Mcp: return {spec.shape * spec.lambda};
    }
    return {};
}

// Composite Simpson on each kink-free piece of [0, t].
double quadrature(const PenaltySpec& spec, double t)
{
    std::vector<double> cuts{0.0};
    for (double k : kinks(spec)) {
        if (k < t) {
            cuts.push_back(k);
        }
    }
    cuts.push_back(t);
    double total = 0.0;
    const int m = 2000;
    for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
        const double a = cuts[piece];
        const double h = (cuts[piece + 1] - a) / m;
        double s = derivative(spec, a) + derivative(spec, cuts[piece + 1]);
        for (int i = 1; i < m; ++i) {
            s += (i % 2 == 1 ? 4.0 : 2.0) * derivative(spec, a + i * h);
        }
        total += s * h / 3.0;
    }
    return total;
}

double shifted_value(const PenaltySpec& spec, const Eigen::VectorXd& beta)
{
    return value(spec, beta) - spec.lambda * beta.lpNorm<1>();
}

} // namespace

TEST(PenaltyDerivative, Examples)
{
    EXPECT_DOUBLE_EQ(derivative(PenaltySpec::scad(1.0, 3.7), 0.0), 1.0);
    EXPECT_DOUBLE_EQ(derivative(PenaltySpec::scad(1.0, 3.7), 4.0), 0.0);
    EXPECT_DOUBLE_EQ(derivative(PenaltySpec::mcp(1.0, 3.0), 1.5), 0.5);
    EXPECT_DOUBLE_EQ(derivative(PenaltySpec::lasso(0.7), 123.0), 0.7);
}

TEST(PenaltyDerivative, ClosedFormsAndMcpNumericDerivative)
{
    const auto scad = PenaltySpec::scad(0.5, 3.7);
    EXPECT_DOUBLE_EQ(derivative(scad, 0.5), 0.5);
    EXPECT_NEAR(derivative(scad, 1.0), (3.7 * 0.5 - 1.0) / 2.7, 1e-15);
    EXPECT_EQ(derivative(scad, 3.7 * 0.5 + 1e-9), 0.0);

    const auto mcp = PenaltySpec::mcp(1.0, 3.0);
    const double h = 1e-6;
    const double numeric = (value(mcp, 1.5 + h) - value(mcp, 1.5 - h)) / (2.0 * h);
    EXPECT_NEAR(numeric, 0.5, 1e-8);
}

TEST(PenaltyDerivative, LimitAtZeroAndVanishingBeyondA1)
{
    for (const auto& spec : families(0.8)) {
        EXPECT_DOUBLE_EQ(derivative(spec, 0.0), spec.lambda);
        EXPECT_NEAR(derivative(spec, 1e-12), spec.lambda, 1e-11);
        if (spec.kind != PenaltyKind::Lasso) {
            EXPECT_EQ(derivative(spec, spec.a1() * spec.lambda * (1.0 + 1e-12)), 0.0);
            EXPECT_EQ(derivative(spec, 10.0 * spec.a1() * spec.lambda), 0.0);
        }
    }
}

TEST(PenaltyDerivative, NonIncreasing)
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(0.0, 6.0);
    for (const auto& spec : families(1.0)) {
        for (int trial = 0; trial < 2000; ++trial) {
            double a = unif(rng);
            double b = unif(rng);
            if (a > b) {
                std::swap(a, b);
            }
            EXPECT_GE(derivative(spec, a), derivative(spec, b));
        }
    }
}

TEST(PenaltyDerivative, ContinuousAtKinks)
{
    for (const auto& spec : families(1.0)) {
        for (double k : kinks(spec)) {
            EXPECT_NEAR(derivative(spec, k - 1e-10), derivative(spec, k + 1e-10), 1e-9);
        }
    }
}

TEST(PenaltyDerivative, NegativeArgumentIsDomainError)
{
    for (const auto& spec : families(1.0)) {
        EXPECT_THROW(derivative(spec, -1e-9), DomainError);
    }
}

TEST(PenaltyValue, Examples)
{
    Eigen::VectorXd beta(2);
    beta << 1.0, -2.0;
    EXPECT_DOUBLE_EQ(value(PenaltySpec::lasso(0.3), beta), 0.9);
    EXPECT_DOUBLE_EQ(value(PenaltySpec::mcp(1.0, 3.0), 3.0), 1.5);
    EXPECT_DOUBLE_EQ(value(PenaltySpec::mcp(1.0, 3.0), -7.0), 1.5);
    for (const auto& spec : families(1.0)) {
        EXPECT_EQ(value(spec, Eigen::VectorXd::Zero(4)), 0.0);
    }
}

TEST(PenaltyValue, MatchesQuadratureOfDerivative)
{
    std::mt19937_64 rng(5);
    for (const auto& spec : families(0.6)) {
        const double upper = spec.kind == PenaltyKind::Lasso ? 5.0 : 2.0 * spec.a1() * spec.lambda;
        std::uniform_real_distribution<double> unif(0.0, upper);
        for (int trial = 0; trial < 20; ++trial) {
            const double t = unif(rng);
            EXPECT_NEAR(value(spec, t), quadrature(spec, t), 1e-8);
        }
    }
}

TEST(PenaltyValue, EvenAndAdditive)
{
    std::mt19937_64 rng(6);
    std::normal_distribution<double> normal(0.0, 2.0);
    for (const auto& spec : families(0.9)) {
        Eigen::VectorXd beta(5);
        for (int j = 0; j < 5; ++j) {
            beta[j] = normal(rng);
        }
        double sum = 0.0;
        for (int j = 0; j < 5; ++j) {
            EXPECT_DOUBLE_EQ(value(spec, beta[j]), value(spec, -beta[j]));
            sum += value(spec, beta[j]);
        }
        EXPECT_NEAR(value(spec, beta), sum, 1e-13);
        EXPECT_NEAR(value(spec, beta), value(spec, Eigen::VectorXd(-beta)), 1e-13);
    }
}

TEST(ShiftGradient, Examples)
{
    Eigen::VectorXd beta(4);
    beta << 5.0, -5.0, 0.0, 0.3;
    EXPECT_EQ(shift_gradient(PenaltySpec::lasso(1.0), beta), Eigen::VectorXd::Zero(4));

    const Eigen::VectorXd scad = shift_gradient(PenaltySpec::scad(1.0, 3.7), beta);
    EXPECT_DOUBLE_EQ(scad[0], -1.0);
    EXPECT_DOUBLE_EQ(scad[1], 1.0);
    EXPECT_EQ(scad[2], 0.0);

    Eigen::VectorXd one(1);
    one << -1.5;
    EXPECT_DOUBLE_EQ(shift_gradient(PenaltySpec::mcp(1.0, 3.0), one)[0], 0.5);
}

TEST(ShiftGradient, MatchesFiniteDifferencesAwayFromKinks)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-8.0, 8.0);
    const double h = 1e-6;
    for (const auto& spec : families(1.0)) {
        for (int trial = 0; trial < 500; ++trial) {
            const double t = unif(rng);
            bool near_kink = std::abs(t) < 1e-3;
            for (double k : kinks(spec)) {
                near_kink = near_kink || std::abs(std::abs(t) - k) < 1e-3;
            }
            if (near_kink) {
                continue;
            }
            Eigen::VectorXd b(1);
            b << t;
            Eigen::VectorXd up = b;
            Eigen::VectorXd down = b;
            up[0] += h;
            down[0] -= h;
            const double numeric = (shifted_value(spec, up) - shifted_value(spec, down)) / (2.0 * h);
            EXPECT_NEAR(shift_gradient(spec, b)[0], numeric, 1e-6);
        }
    }
}

TEST(ShiftGradient, ShiftValueIsConcaveWithBoundedCurvature)
{
    const double h = 1e-3;
    for (const auto& spec : families(1.0)) {
        if (spec.kind == PenaltyKind::Lasso) {
            continue;
        }
        const double bound = spec.kind == PenaltyKind::Scad ? 1.0 / (spec.shape - 1.0) : 1.0 / spec.shape;
        EXPECT_DOUBLE_EQ(spec.concavity(), bound);
        for (double t = -10.0; t <= 10.0; t += 0.01) {
            auto h_at = [&](double x) { return shift_value(spec, Eigen::VectorXd::Constant(1, x)); };
            const double second = (h_at(t + h) - 2.0 * h_at(t) + h_at(t - h)) / (h * h);
            EXPECT_GE(second, -bound - 1e-6) << "t = " << t;
            EXPECT_LE(second, 1e-6) << "t = " << t;
        }
    }
}

TEST(ShiftValue, EqualsValueMinusL1)
{
    Eigen::VectorXd beta(4);
    beta << 0.2, -1.4, 3.3, 9.0;
    for (const auto& spec : families(0.7)) {
        EXPECT_NEAR(shift_value(spec, beta), shifted_value(spec, beta), 1e-13);
    }
}

TEST(SoftThreshold, Examples)
{
    EXPECT_EQ(soft_threshold(3.0, 1.0), 2.0);
    EXPECT_EQ(soft_threshold(-0.5, 1.0), 0.0);
    EXPECT_EQ(soft_threshold(-2.0, 0.5), -1.5);
    EXPECT_EQ(soft_threshold(1.0, 1.0), 0.0);
    EXPECT_EQ(soft_threshold(-4.0, 0.0), -4.0);
}

TEST(PenaltySpecValidation, RejectsInvalidParameters)
{
    EXPECT_THROW(PenaltySpec::lasso(0.0).validate(), ParameterError);
    EXPECT_THROW(PenaltySpec::lasso(-1.0).validate(), ParameterError);
    EXPECT_THROW(PenaltySpec::scad(1.0, 2.0).validate(), ParameterError);
    EXPECT_THROW(PenaltySpec::mcp(1.0, 1.0).validate(), ParameterError);
    EXPECT_NO_THROW(PenaltySpec::scad(1.0).validate());
    EXPECT_NO_THROW(PenaltySpec::mcp(1.0).validate());
    EXPECT_DOUBLE_EQ(PenaltySpec::scad(1.0).shape, 3.7);
    EXPECT_DOUBLE_EQ(PenaltySpec::mcp(1.0).shape, 3.0);
}

TEST(PenaltySpecValidation, KindNamesRoundTrip)
{
    for (auto kind : {PenaltyKind::Lasso, PenaltyKind::Scad, PenaltyKind::Mcp}) {
        EXPECT_EQ(parse_penalty_kind(to_string(kind)), kind);
    }
    EXPECT_THROW(parse_penalty_kind("ridge"), ParameterError);
}
