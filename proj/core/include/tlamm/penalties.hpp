#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

namespace tlamm {

enum class PenaltyKind { Lasso, Scad, Mcp };

std::string to_string(PenaltyKind kind);
PenaltyKind parse_penalty_kind(const std::string& name);

/**
 * Lasso, SCAD(a) or MCP(gamma) at level lambda.
 *
 * Every family has derivative lambda at 0+, is non-increasing, and vanishes
 * beyond a1 * lambda, where a1 = a (SCAD), gamma (MCP), infinity (Lasso).
 */
struct PenaltySpec
{
    PenaltyKind kind = PenaltyKind::Lasso;
    double lambda = 0.1;
    /// a for SCAD, gamma for MCP; unused for Lasso.
    double shape = 0.0;

    static constexpr double default_scad_a = 3.7;
    static constexpr double default_mcp_gamma = 3.0;

    static PenaltySpec lasso(double lambda);
    static PenaltySpec scad(double lambda, double a = default_scad_a);
    static PenaltySpec mcp(double lambda, double gamma = default_mcp_gamma);
    static PenaltySpec make(PenaltyKind kind, double lambda, double shape = 0.0);

    /// Throws ParameterError on lambda <= 0, a <= 2 (SCAD), gamma <= 1 (MCP).
    void validate() const;

    double a1() const noexcept
    {
        return kind == PenaltyKind::Lasso ? std::numeric_limits<double>::infinity() : shape;
    }

    /// Largest curvature of the concave part: 1/(a-1) for SCAD, 1/gamma for MCP, 0 for Lasso.
    double concavity() const noexcept;

    PenaltySpec with_lambda(double l) const
    {
        PenaltySpec s = *this;
        s.lambda = l;
        return s;
    }
};

/// p'_lambda(t) for t >= 0. Throws DomainError on negative t.
double derivative(const PenaltySpec& spec, double t);

/// p_lambda(|t|), the scalar primitive.
double value(const PenaltySpec& spec, double t);

/// sum_k p_lambda(|beta_k|).
double value(const PenaltySpec& spec, const Eigen::VectorXd& beta);

/// Gradient of h(beta) = sum_k p_lambda(|beta_k|) - lambda |beta_k|, the concave
/// shift that turns the penalized loss into shifted-loss-plus-l1.
Eigen::VectorXd shift_gradient(const PenaltySpec& spec, const Eigen::VectorXd& beta);

/// h(beta) itself.
double shift_value(const PenaltySpec& spec, const Eigen::VectorXd& beta);

inline double soft_threshold(double x, double t) noexcept
{
    const double m = std::abs(x) - t;
    if (m <= 0.0) {
        return 0.0;
    }
    return x > 0.0 ? m : -m;
}

} // namespace tlamm
