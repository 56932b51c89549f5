#include "tlamm/cox_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "tlamm/error.hpp"

namespace tlamm {

struct CoxObjective::RiskSums
{
    std::vector<double> log_s0; // per event group, same order as cache_.event_groups
};

namespace {

// Running sum of exp(eta) kept as scale * exp(offset), with the offset tracking
// the largest eta seen so far so that no risk set underflows as a whole.
struct ScaledSum
{
    double offset = -std::numeric_limits<double>::infinity();

    // Returns the weight exp(eta - offset) after rebasing; `rescale` receives
    // the factor applied to everything accumulated so far.
    template <class Rescale>
    double add(double eta, Rescale&& rescale)
    {
        if (eta > offset) {
            if (std::isfinite(offset)) {
                rescale(std::exp(offset - eta));
            }
            offset = eta;
            return 1.0;
        }
        return std::exp(eta - offset);
    }
};

double log_add(double a, double b)
{
    if (a == -std::numeric_limits<double>::infinity()) {
        return b;
    }
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

} // namespace

CoxObjective::CoxObjective(const SurvivalDataset& data)
    : CoxObjective(data, build_risk_cache(data))
{
}

CoxObjective::CoxObjective(const SurvivalDataset& data, RiskSetCache cache)
    : data_(&data), cache_(std::move(cache)), status_(data.status().cast<double>())
{
    event_rows_sum_ = data.covariates().transpose() * status_;
}

Vector CoxObjective::linear_predictor(const Vector& beta) const
{
    const auto& x = data_->covariates();
    Index nnz = 0;
    for (Index j = 0; j < beta.size(); ++j) {
        nnz += beta[j] != 0.0;
    }
    if (4 * nnz >= beta.size()) {
        return x * beta;
    }
    Vector eta = Vector::Zero(x.rows());
    for (Index j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0) {
            eta.noalias() += beta[j] * x.col(j);
        }
    }
    return eta;
}

CoxObjective::RiskSums CoxObjective::risk_sums(const Vector& eta) const
{
    RiskSums sums;
    const auto& groups = cache_.event_groups;
    sums.log_s0.assign(groups.size(), 0.0);

    // Groups in descending time have increasing risk-set prefixes.
    ScaledSum scaled;
    double running = 0.0;
    Index pos = 0;
    for (auto g = groups.size(); g-- > 0;) {
        const Index end = groups[g].risk_size;
        for (; pos < end; ++pos) {
            const double w = scaled.add(eta[cache_.order[static_cast<std::size_t>(pos)]],
                                        [&](double f) { running *= f; });
            running += w;
        }
        sums.log_s0[g] = std::log(running) + scaled.offset;
    }
    return sums;
}

void CoxObjective::check_finite(double value, const Vector& beta) const
{
    if (!std::isfinite(value)) {
        throw NumericError("non-finite partial likelihood at beta with norm "
                           + std::to_string(beta.norm()));
    }
}

double CoxObjective::value_from_eta(const Vector& eta) const
{
    const RiskSums sums = risk_sums(eta);
    double total = 0.0;
    const auto& groups = cache_.event_groups;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        total += static_cast<double>(groups[g].tie_count()) * sums.log_s0[g];
    }
    total -= status_.dot(eta);
    return total / static_cast<double>(data_->n());
}

double CoxObjective::value(const Vector& beta) const
{
    const double v = value_from_eta(linear_predictor(beta));
    check_finite(v, beta);
    return v;
}

double CoxObjective::increment(const Vector& beta, const Vector& candidate) const
{
    const Vector eta = linear_predictor(beta);
    const Vector delta = linear_predictor(candidate) - eta;
    const auto& groups = cache_.event_groups;

    ScaledSum scaled;
    double base = 0.0;
    double change = 0.0;
    double total = 0.0;
    Index pos = 0;
    for (auto g = groups.size(); g-- > 0;) {
        for (; pos < groups[g].risk_size; ++pos) {
            const Index i = cache_.order[static_cast<std::size_t>(pos)];
            const double w = scaled.add(eta[i], [&](double f) {
                base *= f;
                change *= f;
            });
            base += w;
            change += w * std::expm1(delta[i]);
        }
        total += static_cast<double>(groups[g].tie_count()) * std::log1p(change / base);
    }
    total -= status_.dot(delta);
    const double inc = total / static_cast<double>(data_->n());
    check_finite(inc, candidate);
    return inc;
}

Vector CoxObjective::gradient(const Vector& beta) const
{
    return value_and_gradient(beta).second;
}

std::pair<double, Vector> CoxObjective::value_and_gradient(const Vector& beta) const
{
    const Vector eta = linear_predictor(beta);
    const RiskSums sums = risk_sums(eta);
    const auto& groups = cache_.event_groups;
    const Index n = data_->n();

    double total = 0.0;
    // log_increment[k]: log of sum d_g / S0_g over groups whose risk set ends at position k.
    std::vector<double> log_increment(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double d = static_cast<double>(groups[g].tie_count());
        total += d * sums.log_s0[g];
        auto& slot = log_increment[static_cast<std::size_t>(groups[g].risk_size - 1)];
        slot = log_add(slot, std::log(d) - sums.log_s0[g]);
    }
    total -= status_.dot(eta);
    const double value = total / static_cast<double>(n);
    check_finite(value, beta);

    // Subject at descending position k belongs to every risk set ending at or after k.
    Vector residual(n);
    double cumulative = -std::numeric_limits<double>::infinity();
    for (Index k = n; k-- > 0;) {
        cumulative = log_add(cumulative, log_increment[static_cast<std::size_t>(k)]);
        const Index i = cache_.order[static_cast<std::size_t>(k)];
        residual[i] = std::exp(eta[i] + cumulative) - status_[i];
    }
    Vector grad = data_->covariates().transpose() * residual;
    grad /= static_cast<double>(n);
    if (!grad.allFinite()) {
        throw NumericError("non-finite partial-likelihood gradient at beta with norm "
                           + std::to_string(beta.norm()));
    }
    return {value, std::move(grad)};
}

Matrix CoxObjective::hessian(const Vector& beta, Index max_dimension) const
{
    const Index p = data_->p();
    if (p > max_dimension) {
        throw CapabilityError("dense Hessian requested for p = " + std::to_string(p)
                              + " above the cap of " + std::to_string(max_dimension));
    }
    const Vector eta = linear_predictor(beta);
    const auto& x = data_->covariates();
    const auto& groups = cache_.event_groups;

    ScaledSum scaled;
    double s0 = 0.0;
    Vector s1 = Vector::Zero(p);
    Matrix s2 = Matrix::Zero(p, p);
    Matrix h = Matrix::Zero(p, p);
    Index pos = 0;
    for (auto g = groups.size(); g-- > 0;) {
        for (; pos < groups[g].risk_size; ++pos) {
            const Index i = cache_.order[static_cast<std::size_t>(pos)];
            const double w = scaled.add(eta[i], [&](double f) {
                s0 *= f;
                s1 *= f;
                s2 *= f;
            });
            const auto xi = x.row(i).transpose();
            s0 += w;
            s1.noalias() += w * xi;
            s2.selfadjointView<Eigen::Lower>().rankUpdate(xi, w);
        }
        const double d = static_cast<double>(groups[g].tie_count());
        const Vector mean = s1 / s0;
        h.noalias() += (d / s0) * s2;
        h.selfadjointView<Eigen::Lower>().rankUpdate(mean, -d);
    }
    Matrix full = h.selfadjointView<Eigen::Lower>();
    full /= static_cast<double>(data_->n());
    if (!full.allFinite()) {
        throw NumericError("non-finite Hessian at beta with norm " + std::to_string(beta.norm()));
    }
    return full;
}

Vector fit_restricted(const SurvivalDataset& data, std::span<const Index> support,
                      const RestrictedFitOptions& options)
{
    if (support.empty()) {
        throw ParameterError("restricted fit needs a nonempty support");
    }
    for (Index j : support) {
        if (j < 0 || j >= data.p()) {
            throw ParameterError("support index " + std::to_string(j) + " out of range");
        }
    }
    data.require_events();

    const SurvivalDataset sub = data.select_columns(support);
    const CoxObjective objective(sub);
    const Index k = sub.p();

    auto embed = [&](const Vector& local) {
        Vector full = Vector::Zero(data.p());
        for (Index j = 0; j < k; ++j) {
            full[support[static_cast<std::size_t>(j)]] = local[j];
        }
        return full;
    };

    Vector beta = Vector::Zero(k);
    auto [f, g] = objective.value_and_gradient(beta);
    for (int iter = 0; iter < options.max_iter; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tol) {
            return embed(beta);
        }
        const Matrix h = objective.hessian(beta, k);
        Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
        const double top = eig.eigenvalues().maxCoeff();
        if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, top))) {
            throw RankError("restricted Hessian is singular on a support of size "
                            + std::to_string(k));
        }
        const Vector direction = -h.llt().solve(g);
        const double slope = g.dot(direction);
        const double slack = 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f));

        double step = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= options.max_halvings; ++halving, step *= 0.5) {
            const Vector candidate = beta + step * direction;
            double fc;
            try {
                fc = objective.value(candidate);
            } catch (const NumericError&) {
                continue;
            }
            if (fc <= f + 1e-4 * step * slope + slack) {
                beta = candidate;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw IterationLimitError("restricted Newton fit: no decrease after "
                                          + std::to_string(options.max_halvings) + " step halvings",
                                      embed(beta));
        }
        std::tie(f, g) = objective.value_and_gradient(beta);
    }
    if (g.lpNorm<Eigen::Infinity>() <= options.gradient_tol) {
        return embed(beta);
    }
    throw IterationLimitError("restricted Newton fit did not converge in "
                                  + std::to_string(options.max_iter) + " iterations",
                              embed(beta));
}

} // namespace tlamm
