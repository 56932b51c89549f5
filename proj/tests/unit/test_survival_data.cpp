#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include <tlamm/error.hpp>
#include <tlamm/survival_data.hpp>
#include <tlamm/lamm_solver.hpp>

#include "oracles.hpp"

using namespace tlamm;
using tlamm::testing::make_dataset;
using tlamm::testing::sample_correlation;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content)
{
    const auto dir = std::filesystem::temp_directory_path() / "tlamm_survival_data_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream(path, std::ios::binary) << content;
    return path;
}

std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

SimulationConfig standard_config(Index n, Index p, std::uint64_t seed)
{
    SimulationConfig c;
    c.n = n;
    c.p = p;
    c.support_size = 10;
    c.signal = SimulationConfig::constant_signal(10, 0.8);
    c.seed = seed;
    return c;
}

} // namespace

TEST(SurvivalDataset, RejectsInvalidInput)
{
    EXPECT_THROW(make_dataset({1.0, 0.0}, {1, 1}, {{0.0}, {1.0}}), DataError);
    EXPECT_THROW(make_dataset({1.0, 2.0}, {1, 2}, {{0.0}, {1.0}}), DataError);
    EXPECT_THROW(make_dataset({1.0, 2.0}, {1, 1}, {{0.0}, {NAN}}), DataError);
    EXPECT_THROW(SurvivalDataset(Vector::Ones(2), Eigen::VectorXi::Ones(3), Matrix::Zero(2, 1)), DataError);
}

TEST(SurvivalDataset, AllowsCensoredOnlyButRequireEventsThrows)
{
    const auto data = make_dataset({1.0, 2.0}, {0, 0}, {{0.0}, {1.0}});
    EXPECT_EQ(data.event_count(), 0);
    EXPECT_THROW(data.require_events(), DataError);
}

TEST(GenerateCovariates, IndependentColumnsUncorrelated)
{
    const Matrix x = generate_covariates(Design::independent(), 10000, 2, 11);
    const double r = sample_correlation(x.col(0), x.col(1));
    EXPECT_GT(r, -0.05);
    EXPECT_LT(r, 0.05);
}

TEST(GenerateCovariates, ConstantCorrelation)
{
    const Matrix x = generate_covariates(Design::constant_correlation(0.5), 10000, 3, 12);
    for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) {
            const double r = sample_correlation(x.col(a), x.col(b));
            EXPECT_GT(r, 0.45);
            EXPECT_LT(r, 0.55);
        }
    }
}

TEST(GenerateCovariates, AutoregressiveLagTwo)
{
    const Matrix x = generate_covariates(Design::autoregressive(0.95), 10000, 3, 13);
    EXPECT_NEAR(sample_correlation(x.col(0), x.col(2)), 0.95 * 0.95, 0.03);
    EXPECT_NEAR(x.col(2).squaredNorm() / 10000.0, 1.0, 0.05);
}

TEST(GenerateCovariates, InvalidRho)
{
    EXPECT_THROW(generate_covariates(Design::autoregressive(1.0), 10, 3, 1), ParameterError);
    EXPECT_THROW(generate_covariates(Design::constant_correlation(-0.1), 10, 3, 1), ParameterError);
}

TEST(GenerateCovariates, DeterministicGivenSeed)
{
    EXPECT_EQ(generate_covariates(Design::autoregressive(0.5), 20, 4, 7),
              generate_covariates(Design::autoregressive(0.5), 20, 4, 7));
}

TEST(SimulateDataset, StandardCensoringFraction)
{
    SimulationConfig c = standard_config(400, 100, 21);
    const auto sim = simulate_dataset(c);
    const double rate = censoring_rate(sim.dataset);
    EXPECT_GT(rate, 0.40);
    EXPECT_LT(rate, 0.60);
    for (Index j = 0; j < 100; ++j) {
        EXPECT_EQ(sim.true_beta[j], j < 10 ? 0.8 : 0.0);
    }
}

TEST(SimulateDataset, NullSignalEventFraction)
{
    SimulationConfig c = standard_config(10000, 3, 22);
    c.support_size = 1;
    c.signal = {0.0};
    const auto sim = simulate_dataset(c);
    // P(T <= C) = E[U / (1 + U)] = 1 - log(4/3) for U ~ Uniform[2, 3].
    const double expected = 1.0 - std::log(4.0 / 3.0);
    EXPECT_NEAR(1.0 - censoring_rate(sim.dataset), expected, 0.03);
}

TEST(SimulateDataset, NullSignalTimesIndependentOfCovariates)
{
    SimulationConfig c = standard_config(10000, 3, 23);
    c.support_size = 1;
    c.signal = {0.0};
    const auto sim = simulate_dataset(c);
    const Vector log_t = sim.dataset.times().array().log();
    const double r = sample_correlation(sim.dataset.covariates().col(0), log_t);
    EXPECT_GT(r, -0.05);
    EXPECT_LT(r, 0.05);
}

TEST(SimulateDataset, ByteIdenticalReruns)
{
    const SimulationConfig c = standard_config(50, 20, 24);
    const auto a = temp_file("a.csv", "");
    const auto b = temp_file("b.csv", "");
    write_csv(simulate_dataset(c).dataset, a);
    write_csv(simulate_dataset(c).dataset, b);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST(SimulateDataset, CensoringRateStableAcrossSeeds)
{
    double lo = 1.0;
    double hi = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const double r = censoring_rate(simulate_dataset(standard_config(300, 2400, 100 + seed)).dataset);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    EXPECT_LT(hi - lo, 0.15);
}

TEST(SimulationConfig, Validation)
{
    SimulationConfig c = standard_config(10, 5, 1);
    EXPECT_THROW(c.validate(), ParameterError); // s = 10 > p = 5
    c = standard_config(50, 20, 1);
    c.censoring_low = 3.0;
    c.censoring_high = 2.0;
    EXPECT_THROW(c.validate(), ParameterError);
}

TEST(LoadCsv, ValidFile)
{
    const auto path = temp_file("ok.csv", "time,status,x1,x2\n1.5,1,0.1,-2\n2,0,3e-1,4\n0.25,1,1,1\n");
    const auto data = load_csv(path);
    EXPECT_EQ(data.n(), 3);
    EXPECT_EQ(data.p(), 2);
    EXPECT_DOUBLE_EQ(data.times()[1], 2.0);
    EXPECT_EQ(data.status()[1], 0);
    EXPECT_DOUBLE_EQ(data.covariates()(1, 0), 0.3);
}

TEST(LoadCsv, RoundTripsWriteCsv)
{
    const auto sim = simulate_dataset(standard_config(30, 12, 5));
    const auto path = temp_file("rt.csv", "");
    write_csv(sim.dataset, path);
    const auto back = load_csv(path);
    EXPECT_EQ(back.times(), sim.dataset.times());
    EXPECT_EQ(back.status(), sim.dataset.status());
    EXPECT_EQ(back.covariates(), sim.dataset.covariates());
}

TEST(LoadCsv, StatusTwoCitesRow)
{
    const auto path = temp_file("bad_status.csv", "time,status,x1\n1,1,0\n2,2,0\n");
    try {
        load_csv(path);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 3u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("status"), std::string::npos);
    }
}

TEST(LoadCsv, DistinctErrors)
{
    auto message = [](const std::string& body) {
        try {
            load_csv(temp_file("bad.csv", body));
        } catch (const ParseError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    const std::string missing_cell = message("time,status,x1\n1,1\n");
    const std::string not_number = message("time,status,x1\n1,1,abc\n");
    const std::string non_finite = message("time,status,x1\n1,1,inf\n");
    const std::string bad_time = message("time,status,x1\n0,1,1\n");
    const std::string bad_header = message("t,s,x1\n1,1,1\n");
    for (const auto& m : {missing_cell, not_number, non_finite, bad_time, bad_header}) {
        EXPECT_NE(m, "no error");
    }
    EXPECT_NE(missing_cell, not_number);
    EXPECT_NE(not_number, non_finite);
    EXPECT_NE(non_finite, bad_time);
    EXPECT_THROW(load_csv(std::filesystem::temp_directory_path() / "tlamm_no_such_file.csv"), ParseError);
}

TEST(LoadCsv, CensoredOnlyLoadsButFitRaisesNoEvents)
{
    const auto data = load_csv(temp_file("censored.csv", "time,status,x1\n1,0,0.5\n2,0,-1\n"));
    EXPECT_EQ(data.n(), 2);
    try {
        fit_tlamm(data, PenaltySpec::lasso(0.1), SolverConfig{});
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("no events"), std::string::npos);
    }
}

TEST(RiskSetCache, DescendingOrderSingletons)
{
    const auto data = make_dataset({3, 1, 2}, {1, 1, 1}, {{0}, {0}, {0}});
    const auto cache = build_risk_cache(data);
    EXPECT_EQ(cache.order, (std::vector<Index>{0, 2, 1}));
    ASSERT_EQ(cache.event_groups.size(), 3u);
    EXPECT_DOUBLE_EQ(cache.event_groups[0].time, 1.0);
    EXPECT_DOUBLE_EQ(cache.event_groups[2].time, 3.0);
    EXPECT_EQ(cache.event_groups[0].risk_size, 3);
    EXPECT_EQ(cache.event_groups[2].risk_size, 1);
}

TEST(RiskSetCache, TiesGrouped)
{
    const auto data = make_dataset({2, 2, 1}, {1, 1, 0}, {{0}, {0}, {0}});
    const auto cache = build_risk_cache(data);
    ASSERT_EQ(cache.event_groups.size(), 1u);
    EXPECT_DOUBLE_EQ(cache.event_groups[0].time, 2.0);
    EXPECT_EQ(cache.event_groups[0].tie_count(), 2);
    EXPECT_EQ(cache.event_groups[0].risk_size, 2);
}

TEST(RiskSetCache, NoEventsNoGroups)
{
    const auto data = make_dataset({2, 1}, {0, 0}, {{0}, {0}});
    EXPECT_TRUE(build_risk_cache(data).event_groups.empty());
}

TEST(RiskSetCache, PermutationAndGroupInvariants)
{
    const auto data = tlamm::testing::random_dataset(60, 2, 31, 0.4, 7);
    const auto cache = build_risk_cache(data);
    std::vector<Index> sorted = cache.order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<Index> identity(60);
    std::iota(identity.begin(), identity.end(), Index{0});
    EXPECT_EQ(sorted, identity);

    // Inverse permutation reproduces the input order.
    std::vector<Index> inverse(60);
    for (std::size_t k = 0; k < cache.order.size(); ++k) {
        inverse[static_cast<std::size_t>(cache.order[k])] = static_cast<Index>(k);
    }
    for (Index i = 0; i < 60; ++i) {
        EXPECT_EQ(cache.order[static_cast<std::size_t>(inverse[static_cast<std::size_t>(i)])], i);
    }
    for (std::size_t k = 1; k < cache.order.size(); ++k) {
        EXPECT_GE(data.times()[cache.order[k - 1]], data.times()[cache.order[k]]);
    }

    std::vector<Index> members;
    for (std::size_t g = 0; g < cache.event_groups.size(); ++g) {
        if (g > 0) {
            EXPECT_LT(cache.event_groups[g - 1].time, cache.event_groups[g].time);
        }
        Index at_risk = 0;
        for (Index i = 0; i < 60; ++i) {
            at_risk += data.times()[i] >= cache.event_groups[g].time;
        }
        EXPECT_EQ(cache.event_groups[g].risk_size, at_risk);
        members.insert(members.end(), cache.event_groups[g].members.begin(), cache.event_groups[g].members.end());
    }
    std::sort(members.begin(), members.end());
    std::vector<Index> events;
    for (Index i = 0; i < 60; ++i) {
        if (data.status()[i] == 1) {
            events.push_back(i);
        }
    }
    EXPECT_EQ(members, events);
}

TEST(CensoringRate, Examples)
{
    EXPECT_DOUBLE_EQ(censoring_rate(make_dataset({1, 2, 3, 4}, {0, 0, 1, 1}, {{0}, {0}, {0}, {0}})), 0.5);
    EXPECT_DOUBLE_EQ(censoring_rate(make_dataset({1, 2}, {1, 1}, {{0}, {0}})), 0.0);
}

TEST(SupportOf, Tolerance)
{
    Vector b(4);
    b << 0.0, 1e-9, -2.0, 0.5;
    EXPECT_EQ(support_of(b), (std::vector<Index>{1, 2, 3}));
    EXPECT_EQ(support_of(b, 1e-6), (std::vector<Index>{2, 3}));
}
