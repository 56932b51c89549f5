#pragma once

#include <span>
#include <vector>

#include "tlamm/smooth_loss.hpp"
#include "tlamm/survival_data.hpp"

namespace tlamm {

/**
 * Averaged negative log partial likelihood of the Cox model (Breslow ties)
 *
 *   L(beta) = (1/n) sum_{events i} [ log sum_{j: t_j >= t_i} exp(eta_j) - eta_i ],
 *
 * with eta = X beta. All evaluations are a single descending-time sweep over
 * the risk-set cache, O(n p) for the gradient. Each running risk sum is kept
 * relative to the largest eta in its risk set, so it neither overflows nor
 * underflows to zero.
 *
 * Holds a reference to the dataset; the dataset must outlive the objective.
 * Evaluation is const and uses call-local scratch, so one objective may be
 * shared across threads.
 */
class CoxObjective final : public SmoothLoss
{
public:
    explicit CoxObjective(const SurvivalDataset& data);
    CoxObjective(const SurvivalDataset& data, RiskSetCache cache);

    const SurvivalDataset& data() const noexcept { return *data_; }
    const RiskSetCache& cache() const noexcept { return cache_; }

    Index dimension() const override { return data_->p(); }

    /// X beta, skipping zero coefficients.
    Vector linear_predictor(const Vector& beta) const;

    double value(const Vector& beta) const override;
    Vector gradient(const Vector& beta) const override;
    std::pair<double, Vector> value_and_gradient(const Vector& beta) const override;

    /**
     * L(candidate) - L(beta) accumulated as sums of log1p/expm1 terms over the
     * risk sets, so it stays accurate when the two points are close.
     */
    double increment(const Vector& beta, const Vector& candidate) const override;

    /// Partial-likelihood value from a precomputed linear predictor.
    double value_from_eta(const Vector& eta) const;

    /// Dense Hessian; throws CapabilityError when p exceeds `max_dimension`.
    Matrix hessian(const Vector& beta, Index max_dimension = 500) const;

private:
    struct RiskSums;
    RiskSums risk_sums(const Vector& eta) const;
    void check_finite(double value, const Vector& beta) const;

    const SurvivalDataset* data_;
    RiskSetCache cache_;
    Vector status_;
    Vector event_rows_sum_; // sum of x_i over events
};

struct RestrictedFitOptions
{
    double gradient_tol = 1e-8;
    int max_iter = 100;
    int max_halvings = 30;
};

/**
 * Unpenalized partial-likelihood minimizer over coefficient vectors supported
 * on `support` (the oracle estimator when `support` is the true support).
 * Newton's method with step halving; off-support entries are exactly zero.
 *
 * Throws RankError when the restricted Hessian is singular and
 * IterationLimitError (carrying the last iterate) when not converged.
 */
Vector fit_restricted(const SurvivalDataset& data, std::span<const Index> support,
                      const RestrictedFitOptions& options = {});

} // namespace tlamm
