#pragma once

#include <utility>

#include <Eigen/Core>

namespace tlamm {

/// Differentiable part of a composite objective, as seen by the LAMM solver.
class SmoothLoss
{
public:
    virtual ~SmoothLoss() = default;

    virtual Eigen::Index dimension() const = 0;
    virtual double value(const Eigen::VectorXd& beta) const = 0;
    virtual Eigen::VectorXd gradient(const Eigen::VectorXd& beta) const = 0;

    virtual std::pair<double, Eigen::VectorXd> value_and_gradient(const Eigen::VectorXd& beta) const
    {
        return {value(beta), gradient(beta)};
    }

    /// value(candidate) - value(beta); overrides compute it without cancellation.
    virtual double increment(const Eigen::VectorXd& beta, const Eigen::VectorXd& candidate) const
    {
        return value(candidate) - value(beta);
    }
};

} // namespace tlamm
