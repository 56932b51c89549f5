#include "tlamm/lamm_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "tlamm/error.hpp"

namespace tlamm {

std::string to_string(StopMode mode)
{
    return mode == StopMode::Omega ? "omega" : "step_norm";
}

StopMode parse_stop_mode(const std::string& name)
{
    if (name == "omega") {
        return StopMode::Omega;
    }
    if (name == "step_norm" || name == "stepnorm") {
        return StopMode::StepNorm;
    }
    throw ParameterError("unknown stop mode '" + name + "' (expected omega or step_norm)");
}

void SolverConfig::validate() const
{
    if (!(phi0 > 0.0)) {
        throw ParameterError("phi0 must be positive");
    }
    if (!(gamma_u > 1.0)) {
        throw ParameterError("gamma_u must exceed 1");
    }
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) {
        throw ParameterError("eps1 and eps2 must be positive");
    }
    if (max_iter_stage < 1) {
        throw ParameterError("max_iter_stage must be at least 1");
    }
    if (!(phi0 <= max_phi)) {
        throw ParameterError("phi0 must not exceed max_phi");
    }
}

void SolverTrace::write_csv(std::ostream& out) const
{
    out << "stage,iter,F,omega,phi,step_norm,support\n";
    const auto old_precision = out.precision(17);
    for (const auto& r : records) {
        out << r.stage << ',' << r.iter << ',' << r.objective << ',' << r.omega << ',' << r.phi << ','
            << r.step_norm << ',' << r.support << '\n';
    }
    out.precision(old_precision);
}

double omega(const Vector& grad, const Vector& beta, double lambda)
{
    double worst = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        const double term = beta[j] != 0.0 ? std::abs(grad[j] + (beta[j] > 0.0 ? lambda : -lambda))
                                           : std::max(std::abs(grad[j]) - lambda, 0.0);
        worst = std::max(worst, term);
    }
    return worst;
}

double omega(const Vector& grad, const Vector& beta, const Vector& weights)
{
    double worst = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        const double w = weights[j];
        const double term = beta[j] != 0.0 ? std::abs(grad[j] + (beta[j] > 0.0 ? w : -w))
                                           : std::max(std::abs(grad[j]) - w, 0.0);
        worst = std::max(worst, term);
    }
    return worst;
}

Vector lamm_step(const Vector& beta, const Vector& grad, double phi, double lambda)
{
    Vector out(beta.size());
    const double threshold = lambda / phi;
    for (Index j = 0; j < beta.size(); ++j) {
        out[j] = soft_threshold(beta[j] - grad[j] / phi, threshold);
    }
    return out;
}

Vector lamm_step(const Vector& beta, const Vector& grad, double phi, const Vector& weights)
{
    Vector out(beta.size());
    for (Index j = 0; j < beta.size(); ++j) {
        out[j] = soft_threshold(beta[j] - grad[j] / phi, weights[j] / phi);
    }
    return out;
}

double quadratic_model(double loss_at_beta, const Vector& grad, const Vector& beta,
                       const Vector& candidate, double phi)
{
    const Vector delta = candidate - beta;
    return loss_at_beta + grad.dot(delta) + 0.5 * phi * delta.squaredNorm();
}

namespace {

double weighted_l1(const Vector& weights, const Vector& beta)
{
    return weights.dot(beta.cwiseAbs());
}

Index count_nonzero(const Vector& beta)
{
    Index k = 0;
    for (Index j = 0; j < beta.size(); ++j) {
        k += beta[j] != 0.0;
    }
    return k;
}

} // namespace

LineSearchResult line_search(const SmoothLoss& loss, const Vector& beta, double loss_at_beta,
                             const Vector& grad, double phi_prev, const Vector& weights,
                             const SolverConfig& config)
{
    double phi = std::max(config.phi0, phi_prev / config.gamma_u);
    const double first = phi;
    int trials = 0;
    while (phi <= config.max_phi) {
        ++trials;
        Vector candidate = lamm_step(beta, grad, phi, weights);
        double inc = std::numeric_limits<double>::infinity();
        try {
            inc = loss.increment(beta, candidate);
        } catch (const NumericError&) {
        }
        // loss(candidate) <= Psi(candidate), with the common L(beta) cancelled.
        const Vector delta = candidate - beta;
        if (std::isfinite(inc) && inc - grad.dot(delta) <= 0.5 * phi * delta.squaredNorm()) {
            return {std::move(candidate), phi, loss_at_beta + inc, first, trials};
        }
        phi *= config.gamma_u;
    }
    throw LineSearchError("LAMM line search exceeded max_phi = " + std::to_string(config.max_phi)
                          + " after " + std::to_string(trials) + " trials");
}

LineSearchResult line_search(const SmoothLoss& loss, const Vector& beta, double phi_prev,
                             double lambda, const SolverConfig& config)
{
    const auto [value, grad] = loss.value_and_gradient(beta);
    return line_search(loss, beta, value, grad, phi_prev, Vector::Constant(beta.size(), lambda),
                       config);
}

StageResult run_lamm(const SmoothLoss& loss, const Vector& init, const Vector& weights, double eps,
                     const SolverConfig& config, int stage_label, const StepObserver& observer)
{
    config.validate();
    if (init.size() != loss.dimension() || weights.size() != loss.dimension()) {
        throw ParameterError("LAMM initial point and weights must match the loss dimension");
    }

    StageResult result;
    result.beta = init;
    auto [value, grad] = loss.value_and_gradient(result.beta);
    double objective = value + weighted_l1(weights, result.beta);
    double phi = config.phi0;

    for (int iter = 1; iter <= config.max_iter_stage; ++iter) {
        LineSearchResult step = line_search(loss, result.beta, value, grad, phi, weights, config);
        auto [next_value, next_grad] = loss.value_and_gradient(step.beta);
        const double next_objective = next_value + weighted_l1(weights, step.beta);
        const double step_norm = (step.beta - result.beta).norm();

        if (observer) {
            observer(StepInfo{stage_label, iter, result.beta, step.beta, grad, value, next_value,
                              objective, next_objective, step.phi, step.first_trial_phi});
        }

        result.beta = std::move(step.beta);
        value = next_value;
        grad = std::move(next_grad);
        objective = next_objective;
        phi = step.phi;
        result.iterations = iter;
        result.omega = omega(grad, result.beta, weights);
        result.objective = objective;
        result.records.push_back(TraceRecord{stage_label, iter, objective, result.omega, phi, step_norm,
                                             count_nonzero(result.beta)});

        const bool done = config.stop_mode == StopMode::Omega ? result.omega <= eps : step_norm <= eps;
        if (done) {
            result.converged = true;
            break;
        }
    }
    return result;
}

double ShiftedCoxLoss::value(const Vector& beta) const
{
    return cox_.value(beta) + shift_value(spec_, beta);
}

double ShiftedCoxLoss::increment(const Vector& beta, const Vector& candidate) const
{
    return cox_.increment(beta, candidate) + shift_value(spec_, candidate) - shift_value(spec_, beta);
}

Vector ShiftedCoxLoss::gradient(const Vector& beta) const
{
    return cox_.gradient(beta) + shift_gradient(spec_, beta);
}

std::pair<double, Vector> ShiftedCoxLoss::value_and_gradient(const Vector& beta) const
{
    auto [v, g] = cox_.value_and_gradient(beta);
    g += shift_gradient(spec_, beta);
    return {v + shift_value(spec_, beta), std::move(g)};
}

namespace {

template <class F>
auto with_stage(int stage, F&& body)
{
    try {
        return body();
    } catch (const LineSearchError& e) {
        throw LineSearchError("stage " + std::to_string(stage) + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError("stage " + std::to_string(stage) + ": " + e.what());
    }
}

} // namespace

StageResult stage1_lasso(const CoxObjective& cox, double lambda, const SolverConfig& config,
                         const Vector& init, const StepObserver& observer)
{
    if (!(lambda > 0.0)) {
        throw ParameterError("lambda must be positive");
    }
    cox.data().require_events();
    const Vector start = init.size() == 0 ? Vector::Zero(cox.dimension()) : init;
    return with_stage(1, [&] {
        return run_lamm(cox, start, Vector::Constant(cox.dimension(), lambda), config.eps1, config, 1,
                        observer);
    });
}

StageResult stage2(const CoxObjective& cox, const PenaltySpec& spec, const SolverConfig& config,
                   const Vector& init, const StepObserver& observer)
{
    spec.validate();
    cox.data().require_events();
    const ShiftedCoxLoss shifted(cox, spec);
    return with_stage(2, [&] {
        return run_lamm(shifted, init, Vector::Constant(cox.dimension(), spec.lambda), config.eps2,
                        config, 2, observer);
    });
}

FitResult fit_tlamm(const CoxObjective& cox, const PenaltySpec& spec, const SolverConfig& config,
                const StepObserver& observer)
{
    spec.validate();
    StageResult first = stage1_lasso(cox, spec.lambda, config, {}, observer);
    StageResult second = stage2(cox, spec, config, first.beta, observer);

    FitResult fit;
    fit.lambda = spec.lambda;
    fit.stage1_beta = first.beta;
    fit.beta = second.beta;
    fit.iterations_stage1 = first.iterations;
    fit.iterations_stage2 = second.iterations;
    fit.stages = 2;
    fit.converged_stage1 = first.converged;
    fit.converged_stage2 = second.converged;
    fit.objective = second.objective;
    fit.omega = second.omega;
    fit.trace.records = std::move(first.records);
    fit.trace.records.insert(fit.trace.records.end(), second.records.begin(), second.records.end());
    return fit;
}

FitResult fit_tlamm(const SurvivalDataset& data, const PenaltySpec& spec, const SolverConfig& config)
{
    const CoxObjective cox(data);
    return fit_tlamm(cox, spec, config);
}

FitResult fit_ilamm(const CoxObjective& cox, const PenaltySpec& spec, const SolverConfig& config,
                int max_stages, const StepObserver& observer)
{
    spec.validate();
    if (max_stages < 1) {
        throw ParameterError("max_stages must be at least 1");
    }
    StageResult first = stage1_lasso(cox, spec.lambda, config, {}, observer);

    FitResult fit;
    fit.lambda = spec.lambda;
    fit.stage1_beta = first.beta;
    fit.iterations_stage1 = first.iterations;
    fit.converged_stage1 = first.converged;
    fit.converged_stage2 = first.converged;
    fit.objective = first.objective;
    fit.omega = first.omega;
    fit.stages = 1;
    fit.trace.records = std::move(first.records);

    Vector current = fit.stage1_beta;
    Vector weights(cox.dimension());
    for (int stage = 2; stage <= max_stages; ++stage) {
        for (Index j = 0; j < weights.size(); ++j) {
            weights[j] = derivative(spec, std::abs(current[j]));
        }
        StageResult sub = with_stage(stage, [&] {
            return run_lamm(cox, current, weights, config.eps2, config, stage, observer);
        });
        fit.iterations_stage2 += sub.iterations;
        fit.converged_stage2 = sub.converged;
        fit.objective = sub.objective;
        fit.omega = sub.omega;
        fit.stages = stage;
        fit.trace.records.insert(fit.trace.records.end(), sub.records.begin(), sub.records.end());

        const double change = (sub.beta - current).norm();
        current = std::move(sub.beta);
        if (change <= config.eps2) {
            break;
        }
    }
    fit.beta = std::move(current);
    return fit;
}

FitResult fit_ilamm(const SurvivalDataset& data, const PenaltySpec& spec, const SolverConfig& config,
                int max_stages)
{
    const CoxObjective cox(data);
    return fit_ilamm(cox, spec, config, max_stages);
}

} // namespace tlamm
