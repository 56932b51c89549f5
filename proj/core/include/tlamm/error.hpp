#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace tlamm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied parameter (penalty shape, correlation, config value).
class ParameterError : public Error
{
public:
    using Error::Error;
};

/// Argument outside the domain of a mathematical function.
class DomainError : public Error
{
public:
    using Error::Error;
};

/// Malformed input data. `row()` is the 1-based file line (header = 1), 0 when not line-specific.
class ParseError : public Error
{
public:
    ParseError(const std::string& what, std::size_t row)
        : Error(row == 0 ? what : "line " + std::to_string(row) + ": " + what), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// Dataset that is well-formed but unusable for the requested operation (e.g. no events).
class DataError : public Error
{
public:
    using Error::Error;
};

/// Non-finite value produced during a likelihood evaluation.
class NumericError : public Error
{
public:
    using Error::Error;
};

/// Request beyond a documented size cap (dense Hessian, support enumeration).
class CapabilityError : public Error
{
public:
    using Error::Error;
};

/// Singular restricted Hessian in the oracle Newton fit.
class RankError : public Error
{
public:
    using Error::Error;
};

/// Newton iteration budget exhausted; the last iterate is kept for inspection.
class IterationLimitError : public Error
{
public:
    IterationLimitError(const std::string& what, Eigen::VectorXd last_iterate)
        : Error(what), last_iterate_(std::move(last_iterate)) {}

    const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }

private:
    Eigen::VectorXd last_iterate_;
};

/// LAMM line search inflated the curvature past `max_phi` without majorizing.
class LineSearchError : public Error
{
public:
    using Error::Error;
};

/// A metric whose denominator is empty (e.g. concordance with no determinate pairs).
class UndefinedMetricError : public Error
{
public:
    using Error::Error;
};

} // namespace tlamm
