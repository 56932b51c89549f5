#include "tlamm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "tlamm/cox_model.hpp"
#include "tlamm/error.hpp"
#include "tlamm/experiment.hpp"
#include "tlamm/random.hpp"

namespace tlamm {

namespace {

std::int64_t binomial(Index n, Index k)
{
    if (k < 0 || k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::int64_t c = 1;
    for (Index i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
    }
    return c;
}

/// Uniform point on the l1 sphere of radius r (Dirichlet(1,...,1) magnitudes, random signs).
Vector l1_sphere_point(Index p, double r, std::mt19937_64& rng)
{
    std::exponential_distribution<double> exp1(1.0);
    std::bernoulli_distribution coin(0.5);
    Vector u(p);
    for (Index j = 0; j < p; ++j) {
        u[j] = exp1(rng);
    }
    u *= r / u.sum();
    for (Index j = 0; j < p; ++j) {
        if (coin(rng)) {
            u[j] = -u[j];
        }
    }
    return u;
}

void check_lse_caps(Index p, Index m)
{
    if (m < 1) {
        throw ParameterError("lse_probe needs m >= 1");
    }
    if (p > lse_max_p) {
        throw CapabilityError("lse_probe enumerates supports only for p <= " + std::to_string(lse_max_p));
    }
    const Index size = std::min(m, p);
    if (binomial(p, size) > lse_max_supports) {
        throw CapabilityError("lse_probe: C(" + std::to_string(p) + ", " + std::to_string(size)
                              + ") supports exceed the enumeration cap of " + std::to_string(lse_max_supports));
    }
}

} // namespace

LseReport lse_probe_points(const SurvivalDataset& data, const std::vector<Vector>& points, Index m)
{
    const Index p = data.p();
    check_lse_caps(p, m);
    if (points.empty()) {
        throw ParameterError("lse_probe needs at least one beta point");
    }
    for (const Vector& beta : points) {
        if (beta.size() != p) {
            throw ParameterError("lse_probe: beta length does not match the dataset");
        }
    }
    data.require_events();

    const Index size = std::min(m, p);
    const CoxObjective cox(data);
    LseReport report;
    report.m = m;
    report.beta_points = static_cast<Index>(points.size());
    report.rho_minus = std::numeric_limits<double>::infinity();
    report.rho_plus = 0.0;

    std::vector<Index> support(static_cast<std::size_t>(size));
    Matrix sub(size, size);
    for (const Vector& beta : points) {
        const Matrix h = cox.hessian(beta, lse_max_p);
        // Lexicographic enumeration of size-`size` subsets.
        std::vector<bool> mask(static_cast<std::size_t>(p), false);
        std::fill(mask.begin(), mask.begin() + size, true);
        do {
            std::size_t k = 0;
            for (Index j = 0; j < p; ++j) {
                if (mask[static_cast<std::size_t>(j)]) {
                    support[k++] = j;
                }
            }
            for (Index a = 0; a < size; ++a) {
                for (Index b = 0; b < size; ++b) {
                    sub(a, b) = h(support[static_cast<std::size_t>(a)], support[static_cast<std::size_t>(b)]);
                }
            }
            Eigen::SelfAdjointEigenSolver<Matrix> eig(sub, Eigen::EigenvaluesOnly);
            // The Hessian is PSD; clamp rounding-level negatives.
            report.rho_minus = std::min(report.rho_minus, std::max(0.0, eig.eigenvalues().minCoeff()));
            report.rho_plus = std::max(report.rho_plus, eig.eigenvalues().maxCoeff());
            ++report.probes;
        } while (std::prev_permutation(mask.begin(), mask.end()));
    }
    return report;
}

LseReport lse_probe(const SurvivalDataset& data, const Vector& beta_star, Index m, double r, int n_beta_samples,
                    std::uint64_t seed)
{
    if (beta_star.size() != data.p()) {
        throw ParameterError("lse_probe: beta* length does not match the dataset");
    }
    if (!(r >= 0.0) || n_beta_samples < 0) {
        throw ParameterError("lse_probe needs r >= 0 and a non-negative sample count");
    }
    check_lse_caps(data.p(), m);

    std::vector<Vector> points{beta_star};
    std::mt19937_64 rng(seed);
    for (int k = 0; k < n_beta_samples; ++k) {
        points.push_back(beta_star + l1_sphere_point(data.p(), r, rng));
    }
    LseReport report = lse_probe_points(data, points, m);
    report.r = r;
    report.seed = seed;
    return report;
}

double grad_check(const SmoothLoss& loss, const Vector& beta, double h)
{
    const Vector analytic = loss.gradient(beta);
    const double scale = 1.0 + analytic.lpNorm<Eigen::Infinity>();
    double worst = 0.0;
    Vector probe = beta;
    for (Index j = 0; j < beta.size(); ++j) {
        probe[j] = beta[j] + h;
        const double up = loss.value(probe);
        probe[j] = beta[j] - h;
        const double down = loss.value(probe);
        probe[j] = beta[j];
        worst = std::max(worst, std::abs(analytic[j] - (up - down) / (2.0 * h)) / scale);
    }
    return worst;
}

double grad_check(const SurvivalDataset& data, const Vector& beta, double h)
{
    const CoxObjective cox(data);
    return grad_check(cox, beta, h);
}

std::vector<SupNormScalingRow> gradient_sup_norm_scaling(int reps, Index n, const std::vector<Index>& p_list,
                                                         std::uint64_t seed, const SimulationConfig& base)
{
    if (reps < 1 || n < 1) {
        throw ParameterError("gradient_sup_norm_scaling needs reps >= 1 and n >= 1");
    }
    std::vector<SupNormScalingRow> rows;
    for (Index p : p_list) {
        std::vector<double> norms;
        for (int rep = 0; rep < reps; ++rep) {
            SimulationConfig sim = base;
            sim.n = n;
            sim.p = p;
            sim.support_size = std::min(base.support_size, p);
            sim.signal.resize(static_cast<std::size_t>(sim.support_size));
            sim.seed = derive_seed(seed, {static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(rep)});
            const SimulatedData data = simulate_dataset(sim);
            if (data.dataset.event_count() == 0) {
                continue;
            }
            const CoxObjective cox(data.dataset);
            norms.push_back(cox.gradient(data.true_beta).lpNorm<Eigen::Infinity>());
        }
        rows.push_back({p, median(norms)});
    }
    return rows;
}

} // namespace tlamm
