#pragma once

#include <cstdint>
#include <vector>

#include "tlamm/smooth_loss.hpp"
#include "tlamm/survival_data.hpp"

namespace tlamm {

/**
 * Sampled localized sparse eigenvalues of the partial-likelihood Hessian.
 *
 * Supports of size <= m are enumerated exhaustively; the l1 ball around
 * beta* is only sampled (its center plus points on its surface). Hence
 * rho_plus is a lower bound of the supremum and rho_minus an upper bound
 * of the infimum, never exact values.
 */
struct LseReport
{
    Index m = 0;
    double r = 0.0;
    double rho_minus = 0.0;
    double rho_plus = 0.0;
    /// Number of (beta, support) pairs whose eigenvalues were computed.
    std::int64_t probes = 0;
    /// Number of beta points probed, including beta* itself.
    Index beta_points = 0;
    std::uint64_t seed = 0;
};

inline constexpr Index lse_max_p = 20;
/// C(20, 5): the enumeration budget of the largest p at m = 5.
inline constexpr std::int64_t lse_max_supports = 15504;

/**
 * By eigenvalue interlacing the extrema over |J| <= m are attained at
 * |J| = min(m, p), so only those supports are enumerated. Throws
 * CapabilityError when p > 20 or C(p, m) exceeds lse_max_supports.
 */
LseReport lse_probe(const SurvivalDataset& data, const Vector& beta_star, Index m, double r, int n_beta_samples,
                    std::uint64_t seed);

/// Same enumeration over an explicit list of beta points (r and seed are left at zero).
LseReport lse_probe_points(const SurvivalDataset& data, const std::vector<Vector>& points, Index m);

/// Max |analytic - central difference| / (1 + ||analytic||_inf) over coordinates.
double grad_check(const SmoothLoss& loss, const Vector& beta, double h = 1e-5);
double grad_check(const SurvivalDataset& data, const Vector& beta, double h = 1e-5);

struct SupNormScalingRow
{
    Index p = 0;
    double median_sup_norm = 0.0;
};

/**
 * Median over `reps` simulated datasets of ||grad L(beta*)||_inf for each p.
 * Data follow `base` with n and p overridden; the support is truncated to p.
 */
std::vector<SupNormScalingRow> gradient_sup_norm_scaling(int reps, Index n, const std::vector<Index>& p_list,
                                                         std::uint64_t seed, const SimulationConfig& base = {});

} // namespace tlamm
