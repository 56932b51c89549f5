#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tlamm/evaluation.hpp"
#include "tlamm/lamm_solver.hpp"
#include "tlamm/survival_data.hpp"

namespace tlamm {

/// Estimators compared in the simulation grid.
enum class Method { Oracle, Lasso, TlammScad, TlammMcp, IlammScad, IlammMcp };

std::string to_string(Method method);
Method parse_method(const std::string& name);

/// Penalty family a method is tuned for; nullopt for the oracle.
std::optional<PenaltyKind> penalty_of(Method method);

struct ExperimentGrid
{
    std::vector<Index> n_values{300};
    std::vector<Index> p_values{2400};
    std::vector<Design> designs{Design::independent()};
    std::vector<Method> methods{Method::Oracle, Method::Lasso, Method::TlammMcp, Method::TlammScad};
    int reps = 1;
    std::uint64_t seed = 1;

    Index support_size = 10;
    double signal = 0.8;
    double censoring_low = 2.0;
    double censoring_high = 3.0;

    /// c in lambda = c sqrt(log p / n), per penalty family.
    std::map<PenaltyKind, double> c_values;
    /// Optional per-design overrides of c_values, indexed like `designs`.
    std::vector<std::map<PenaltyKind, double>> design_c_values;
    SolverConfig solver;
    int ilamm_max_stages = 20;

    void validate() const;

    /// c for `kind` on design `design_index`; throws ParameterError when unset.
    double c_for(std::size_t design_index, PenaltyKind kind) const;
};

struct ExperimentRow
{
    std::string design;
    std::string method;
    Index n = 0;
    Index p = 0;
    int rep = 0;
    double l2 = 0.0;
    Index tp = 0;
    Index fp = 0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    int iters1 = 0;
    int iters2 = 0;
    double seconds = 0.0;
    bool failed = false;
    std::string error;
};

/// Per-(design, method, n, p) medians over successful reps.
struct CellSummary
{
    std::string design;
    std::string method;
    Index n = 0;
    Index p = 0;
    int reps = 0;
    int failures = 0;
    double l2 = 0.0;
    double tp = 0.0;
    double fp = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
    double iters1 = 0.0;
    double iters2 = 0.0;
    double seconds = 0.0;
};

struct ExperimentResult
{
    std::vector<ExperimentRow> rows;
    std::vector<CellSummary> summaries;
    int failures = 0;
};

/// Called with finished rows in deterministic grid order.
using RowSink = std::function<void(const ExperimentRow&)>;

/// Seed for the dataset of one (design, n, p, rep) unit; shared by every method.
std::uint64_t dataset_seed(std::uint64_t master, std::size_t design_index, Index n, Index p, int rep);

/**
 * Runs every method on every (design, n, p, rep) dataset. Units run in
 * parallel; rows reach `sink` in grid order (design, n, p, rep, method)
 * as soon as all earlier units are done. Per-method failures are recorded
 * in the row and do not stop the run.
 */
ExperimentResult run_experiment(const ExperimentGrid& grid, int threads = 1, const RowSink& sink = {});

std::vector<CellSummary> summarize(const std::vector<ExperimentRow>& rows);

double median(std::vector<double> values);

/// `design,penalty,n,p,rep,l2,tp,fp,sens,spec,iters1,iters2,seconds`.
void write_row_header(std::ostream& out);
void write_row(std::ostream& out, const ExperimentRow& row);

/// Settings for tuning c by cross-validation on a smaller simulated problem.
struct TuningSpec
{
    Index n = 200;
    Index p = 100;
    CvConfig cv;
    /// Independent simulated datasets whose CV criteria are summed.
    int datasets = 10;
    std::uint64_t seed = 1;
};

/// Cross-validated c for `kind` on data simulated like `grid` at the tuning size.
CvResult tune_c(const ExperimentGrid& grid, const Design& design, PenaltyKind kind,
                const TuningSpec& tuning, int threads = 1);

} // namespace tlamm
