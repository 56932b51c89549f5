#include "tlamm/penalties.hpp"

#include <algorithm>
#include <cmath>

#include "tlamm/error.hpp"

namespace tlamm {

std::string to_string(PenaltyKind kind)
{
    switch (kind) {
    case PenaltyKind::Lasso:
        return "lasso";
    case PenaltyKind::Scad:
        return "scad";
    case PenaltyKind::Mcp:
        return "mcp";
    }
    return "unknown";
}

PenaltyKind parse_penalty_kind(const std::string& name)
{
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "lasso" || lower == "l1") {
        return PenaltyKind::Lasso;
    }
    if (lower == "scad") {
        return PenaltyKind::Scad;
    }
    if (lower == "mcp") {
        return PenaltyKind::Mcp;
    }
    throw ParameterError("unknown penalty kind '" + name + "' (expected lasso, scad or mcp)");
}

PenaltySpec PenaltySpec::lasso(double lambda)
{
    return make(PenaltyKind::Lasso, lambda);
}

PenaltySpec PenaltySpec::scad(double lambda, double a)
{
    return make(PenaltyKind::Scad, lambda, a);
}

PenaltySpec PenaltySpec::mcp(double lambda, double gamma)
{
    return make(PenaltyKind::Mcp, lambda, gamma);
}

PenaltySpec PenaltySpec::make(PenaltyKind kind, double lambda, double shape)
{
    if (shape == 0.0) {
        shape = kind == PenaltyKind::Scad ? default_scad_a
              : kind == PenaltyKind::Mcp  ? default_mcp_gamma
                                          : 0.0;
    }
    PenaltySpec spec{kind, lambda, shape};
    spec.validate();
    return spec;
}

void PenaltySpec::validate() const
{
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ParameterError("penalty lambda must be positive and finite");
    }
    if (kind == PenaltyKind::Scad && !(shape > 2.0)) {
        throw ParameterError("SCAD requires a > 2");
    }
    if (kind == PenaltyKind::Mcp && !(shape > 1.0)) {
        throw ParameterError("MCP requires gamma > 1");
    }
}

double PenaltySpec::concavity() const noexcept
{
    switch (kind) {
    case PenaltyKind::Scad:
        return 1.0 / (shape - 1.0);
    case PenaltyKind::Mcp:
        return 1.0 / shape;
    case PenaltyKind::Lasso:
        break;
    }
    return 0.0;
}

double derivative(const PenaltySpec& spec, double t)
{
    if (t < 0.0 || std::isnan(t)) {
        throw DomainError("penalty derivative needs t >= 0");
    }
    const double lambda = spec.lambda;
    switch (spec.kind) {
    case PenaltyKind::Lasso:
        return lambda;
    case PenaltyKind::Scad:
        if (t <= lambda) {
            return lambda;
        }
        return std::max(spec.shape * lambda - t, 0.0) / (spec.shape - 1.0);
    case PenaltyKind::Mcp:
        return std::max(lambda - t / spec.shape, 0.0);
    }
    return 0.0;
}

double value(const PenaltySpec& spec, double t)
{
    t = std::abs(t);
    const double lambda = spec.lambda;
    switch (spec.kind) {
    case PenaltyKind::Lasso:
        return lambda * t;
    case PenaltyKind::Scad: {
        const double a = spec.shape;
        if (t <= lambda) {
            return lambda * t;
        }
        if (t <= a * lambda) {
            return (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0));
        }
        return lambda * lambda * (a + 1.0) / 2.0;
    }
    case PenaltyKind::Mcp: {
        const double gamma = spec.shape;
        if (t <= gamma * lambda) {
            return lambda * t - t * t / (2.0 * gamma);
        }
        return gamma * lambda * lambda / 2.0;
    }
    }
    return 0.0;
}

double value(const PenaltySpec& spec, const Eigen::VectorXd& beta)
{
    double total = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        total += value(spec, beta[j]);
    }
    return total;
}

Eigen::VectorXd shift_gradient(const PenaltySpec& spec, const Eigen::VectorXd& beta)
{
    Eigen::VectorXd g = Eigen::VectorXd::Zero(beta.size());
    if (spec.kind == PenaltyKind::Lasso) {
        return g;
    }
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double b = beta[j];
        if (b != 0.0) {
            const double slope = derivative(spec, std::abs(b)) - spec.lambda;
            g[j] = b > 0.0 ? slope : -slope;
        }
    }
    return g;
}

double shift_value(const PenaltySpec& spec, const Eigen::VectorXd& beta)
{
    if (spec.kind == PenaltyKind::Lasso) {
        return 0.0;
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        total += value(spec, beta[j]) - spec.lambda * std::abs(beta[j]);
    }
    return total;
}

} // namespace tlamm
