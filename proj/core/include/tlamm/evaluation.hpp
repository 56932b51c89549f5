#pragma once

#include <cstdint>
#include <vector>

#include "tlamm/lamm_solver.hpp"
#include "tlamm/penalties.hpp"
#include "tlamm/survival_data.hpp"

namespace tlamm {

/// ||estimate - truth||_2. Throws ParameterError on length mismatch.
double l2_error(const Vector& estimate, const Vector& truth);

struct SelectionMetrics
{
    Index tp = 0;
    Index fp = 0;
    Index fn = 0;
    Index tn = 0;
    double sensitivity = 0.0;
    double specificity = 0.0;
};

/// Selected set {j : |estimate_j| > zero_tol} scored against `true_support`.
SelectionMetrics selection_metrics(const Vector& estimate, const std::vector<Index>& true_support,
                                   double zero_tol = 0.0);

/**
 * Harrell-type concordance of risk scores x' beta with observed outcomes.
 *
 * A pair is determinate when the earlier of two distinct times is an event;
 * it is concordant when that subject has the strictly higher score and
 * discordant when strictly lower. Tied scores count in neither. Runs in
 * O(n log n) with a Fenwick tree over score ranks.
 *
 * Throws UndefinedMetricError when no pair is concordant or discordant.
 */
double concordance_index(const Vector& beta, const SurvivalDataset& data);

/// Same, from precomputed risk scores.
double concordance_index_scores(const Vector& scores, const SurvivalDataset& data);

/// lambda = c * sqrt(log p / n).
double lambda_from_c(double c, Index n, Index p);

/// 0.05 * {1, ..., 20}.
std::vector<double> default_c_grid();

struct CvConfig
{
    int folds = 3;
    std::vector<double> c_grid = default_c_grid();
    std::uint64_t seed = 1;
    /// SCAD a / MCP gamma; zero selects the family default.
    double shape = 0.0;
    int max_resplits = 10;
};

struct CvResult
{
    std::vector<double> c_grid;
    /// Held-out partial-likelihood deviance per c (lower is better).
    std::vector<double> criterion;
    double chosen_c = 0.0;
    double chosen_lambda = 0.0;
    /// Seed that produced the accepted fold assignment.
    std::uint64_t fold_seed = 0;
    std::vector<int> fold_of;
};

/// Seeded fold labels in [0, folds) of a permutation partition.
std::vector<int> assign_folds(Index n, int folds, std::uint64_t seed);

/**
 * K-fold cross-validation of c in lambda = c sqrt(log p / n), fitting TLAMM
 * on each training part. The criterion for fold k is
 *   n * L_all(beta_k) - n_train * L_train(beta_k),
 * i.e. minus the held-out contribution to the log partial likelihood.
 * Ties in the summed criterion resolve to the smallest c.
 *
 * If some training part has no events, folds are redrawn with the next
 * derived seed, up to `max_resplits` attempts, then DataError.
 */
CvResult cross_validate(const SurvivalDataset& data, PenaltyKind kind, const CvConfig& cv,
                        const SolverConfig& solver, int threads = 1);

} // namespace tlamm
