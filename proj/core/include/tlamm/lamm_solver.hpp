#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tlamm/cox_model.hpp"
#include "tlamm/penalties.hpp"
#include "tlamm/smooth_loss.hpp"

namespace tlamm {

enum class StopMode {
    Omega,    ///< stop when the subgradient measure omega <= eps
    StepNorm, ///< stop when consecutive iterates are within eps in l2
};

std::string to_string(StopMode mode);
StopMode parse_stop_mode(const std::string& name);

struct SolverConfig
{
    double phi0 = 0.1;
    double gamma_u = 2.0;
    double eps1 = 0.002; ///< stage-1 (Lasso) tolerance
    double eps2 = 0.002; ///< stage-2 (and I-LAMM tightening) tolerance
    int max_iter_stage = 2000;
    double max_phi = 1e12;
    StopMode stop_mode = StopMode::Omega;

    /// Throws ParameterError when gamma_u <= 1, eps <= 0, phi0 <= 0 or phi0 > max_phi.
    void validate() const;
};

/// One accepted LAMM iteration.
struct TraceRecord
{
    int stage;
    int iter;
    double objective; ///< full composite objective F after the step
    double omega;
    double phi;
    double step_norm;
    Index support;
};

struct SolverTrace
{
    std::vector<TraceRecord> records;

    /// CSV with header `stage,iter,F,omega,phi,step_norm,support`.
    void write_csv(std::ostream& out) const;
};

/// Everything an observer may want to check about one accepted step.
struct StepInfo
{
    int stage;
    int iter;
    const Vector& beta_prev;
    const Vector& beta_next;
    const Vector& grad_prev;
    double loss_prev;
    double loss_next;
    double objective_prev;
    double objective_next;
    double phi;
    double first_trial_phi;
};

using StepObserver = std::function<void(const StepInfo&)>;

struct StageResult
{
    Vector beta;
    int iterations = 0;
    bool converged = false;
    double omega = 0.0;
    double objective = 0.0;
    std::vector<TraceRecord> records;
};

struct FitResult
{
    Vector beta;
    double lambda = 0.0;
    Vector stage1_beta;
    int iterations_stage1 = 0;
    int iterations_stage2 = 0;
    /// Number of LAMM stages run (2 for TLAMM; 1 + tightening stages for I-LAMM).
    int stages = 0;
    bool converged_stage1 = false;
    bool converged_stage2 = false;
    double objective = 0.0;
    double omega = 0.0;
    SolverTrace trace;
};

/**
 * Minimal sup-norm of grad + lambda * xi over xi in the subdifferential of
 * ||beta||_1. Coordinatewise: |g_j + lambda sign(beta_j)| on the support,
 * max(|g_j| - lambda, 0) off it.
 */
double omega(const Vector& grad, const Vector& beta, double lambda);

/// Weighted variant, coordinate j carrying l1 weight `weights[j]`.
double omega(const Vector& grad, const Vector& beta, const Vector& weights);

/// Soft-threshold step S(beta - grad/phi, lambda/phi).
Vector lamm_step(const Vector& beta, const Vector& grad, double phi, double lambda);
Vector lamm_step(const Vector& beta, const Vector& grad, double phi, const Vector& weights);

/// Isotropic quadratic model Psi(candidate; beta, phi) of a loss around beta.
double quadratic_model(double loss_at_beta, const Vector& grad, const Vector& beta,
                       const Vector& candidate, double phi);

struct LineSearchResult
{
    Vector beta;
    double phi;
    double loss;
    double first_trial_phi;
    int trials;
};

/**
 * One LAMM iteration: start from max(phi0, phi_prev / gamma_u) and inflate
 * phi by gamma_u until the smooth loss at the soft-threshold step lies below
 * its quadratic model. The test compares loss.increment against the model's
 * increment, so it stays exact when the step is tiny. Non-finite losses count
 * as failed majorization.
 * Throws LineSearchError once phi exceeds config.max_phi.
 */
LineSearchResult line_search(const SmoothLoss& loss, const Vector& beta, double loss_at_beta,
                             const Vector& grad, double phi_prev, const Vector& weights,
                             const SolverConfig& config);

LineSearchResult line_search(const SmoothLoss& loss, const Vector& beta, double phi_prev,
                             double lambda, const SolverConfig& config);

/**
 * Runs LAMM iterations for loss + sum_j weights_j |beta_j| from `init` until
 * the stop rule with tolerance `eps` holds or config.max_iter_stage is reached.
 * At least one step is always taken.
 */
StageResult run_lamm(const SmoothLoss& loss, const Vector& init, const Vector& weights, double eps,
                     const SolverConfig& config, int stage_label, const StepObserver& observer = {});

/// Shifted loss L + h, with h the concave part of the folded-concave penalty.
class ShiftedCoxLoss final : public SmoothLoss
{
public:
    ShiftedCoxLoss(const CoxObjective& cox, PenaltySpec spec) : cox_(cox), spec_(spec) {}

    Index dimension() const override { return cox_.dimension(); }
    double value(const Vector& beta) const override;
    Vector gradient(const Vector& beta) const override;
    std::pair<double, Vector> value_and_gradient(const Vector& beta) const override;
    double increment(const Vector& beta, const Vector& candidate) const override;

private:
    const CoxObjective& cox_;
    PenaltySpec spec_;
};

/// Stage 1: Lasso-penalized partial likelihood from `init` (zero when empty).
StageResult stage1_lasso(const CoxObjective& cox, double lambda, const SolverConfig& config,
                         const Vector& init = {}, const StepObserver& observer = {});

/// Stage 2: LAMM on the shifted loss with l1 weight lambda, from `init`.
StageResult stage2(const CoxObjective& cox, const PenaltySpec& spec, const SolverConfig& config,
                   const Vector& init, const StepObserver& observer = {});

/// Two-stage LAMM: Lasso burn-in followed by direct LAMM on the nonconvex objective.
FitResult fit_tlamm(const CoxObjective& cox, const PenaltySpec& spec, const SolverConfig& config,
                const StepObserver& observer = {});
FitResult fit_tlamm(const SurvivalDataset& data, const PenaltySpec& spec, const SolverConfig& config);

/**
 * Iterative LAMM baseline: Lasso contraction, then up to max_stages - 1
 * weighted-Lasso subproblems with weights p'_lambda(|beta_j|) taken from the
 * previous stage. Stops early once two stage outputs agree within eps2.
 */
FitResult fit_ilamm(const CoxObjective& cox, const PenaltySpec& spec, const SolverConfig& config,
                int max_stages = 20, const StepObserver& observer = {});
FitResult fit_ilamm(const SurvivalDataset& data, const PenaltySpec& spec, const SolverConfig& config,
                int max_stages = 20);

} // namespace tlamm
