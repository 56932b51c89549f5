#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace tlamm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/**
 * Right-censored survival observations with time-fixed covariates.
 *
 * Immutable once constructed. The constructor validates lengths, positivity
 * of times, binary status and finiteness; it does not require any events
 * (see require_events()).
 */
class SurvivalDataset
{
public:
    SurvivalDataset(Vector times, Eigen::VectorXi status, Matrix covariates);

    Index n() const noexcept { return times_.size(); }
    Index p() const noexcept { return covariates_.cols(); }

    const Vector& times() const noexcept { return times_; }
    const Eigen::VectorXi& status() const noexcept { return status_; }
    const Matrix& covariates() const noexcept { return covariates_; }

    Index event_count() const noexcept { return events_; }

    /// Throws DataError("no events") when every observation is censored.
    void require_events() const;

    /// Rows `rows` (in the given order) as a new dataset.
    SurvivalDataset subset(std::span<const Index> rows) const;

    /// Columns `cols` (in the given order) as a new dataset.
    SurvivalDataset select_columns(std::span<const Index> cols) const;

private:
    Vector times_;
    Eigen::VectorXi status_;
    Matrix covariates_;
    Index events_ = 0;
};

/// Share of censored observations, 1 - mean(status).
double censoring_rate(const SurvivalDataset& data);

/// One distinct event time together with the subjects failing at it.
struct EventGroup
{
    double time;
    std::vector<Index> members;
    /// Risk-set size: number of subjects with time >= `time`. The risk set is
    /// the prefix `order[0, risk_size)` of the descending-time permutation.
    Index risk_size;

    Index tie_count() const noexcept { return static_cast<Index>(members.size()); }
};

/**
 * Descending-time permutation plus the event groups (ascending in time).
 * Events sharing an exact time value form one group (Breslow convention).
 */
struct RiskSetCache
{
    std::vector<Index> order;
    std::vector<EventGroup> event_groups;
};

RiskSetCache build_risk_cache(const SurvivalDataset& data);

/// Covariance structure of the simulated covariates (unit variances throughout).
struct Design
{
    enum class Kind { Independent, ConstantCorrelation, Autoregressive };

    Kind kind = Kind::Independent;
    double rho = 0.0;

    static Design independent() { return {Kind::Independent, 0.0}; }
    static Design constant_correlation(double rho) { return {Kind::ConstantCorrelation, rho}; }
    static Design autoregressive(double rho) { return {Kind::Autoregressive, rho}; }

    void validate() const;
    std::string name() const;
};

struct SimulationConfig
{
    Index n = 200;
    Index p = 100;
    Index support_size = 10;
    /// Nonzero coefficients, one per support index. A constant signal is a
    /// vector with every entry equal; a decaying signal lists each value.
    std::vector<double> signal = std::vector<double>(10, 0.8);
    Design design = Design::independent();
    double censoring_low = 2.0;
    double censoring_high = 3.0;
    std::uint64_t seed = 1;

    static std::vector<double> constant_signal(Index s, double value)
    {
        return std::vector<double>(static_cast<std::size_t>(s), value);
    }

    void validate() const;
};

/// Draws n i.i.d. rows from N(0, Sigma) with Sigma given by `design`.
Matrix generate_covariates(const Design& design, Index n, Index p, std::uint64_t seed);

struct SimulatedData
{
    SurvivalDataset dataset;
    Vector true_beta;
};

/**
 * Exponential proportional-hazards sample with baseline hazard one and
 * exponential censoring whose mean is U * exp(x' beta*), U ~ Uniform[low, high].
 */
SimulatedData simulate_dataset(const SimulationConfig& config);

/// Reads `time,status,x1,...,xp`. Throws ParseError naming the offending row.
SurvivalDataset load_csv(const std::filesystem::path& path);

/// Writes the same schema with round-trip precision.
void write_csv(const SurvivalDataset& data, const std::filesystem::path& path);

/// Indices of the nonzero entries of `beta`.
std::vector<Index> support_of(const Vector& beta, double zero_tol = 0.0);

} // namespace tlamm
