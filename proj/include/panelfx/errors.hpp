#pragma once

#include <stdexcept>
#include <string>

namespace panelfx {

/// Base for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input / data problems. CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Numerical / estimation problems. CLI maps these to exit code 3.
class EstimationError : public Error {
public:
    using Error::Error;
};

class MissingColumnError : public ValidationError {
public:
    explicit MissingColumnError(const std::string& name)
        : ValidationError("missing column: " + name), column(name) {}
    std::string column;
};

class ParseError : public ValidationError {
public:
    ParseError(std::size_t row, const std::string& column, const std::string& value)
        : ValidationError("cannot parse '" + value + "' in column '" + column +
                          "' at data row " + std::to_string(row)),
          row(row), column(column) {}
    std::size_t row;
    std::string column;
};

class EmptyFileError : public ValidationError {
public:
    explicit EmptyFileError(const std::string& path)
        : ValidationError("no data rows in " + path) {}
};

class AllRowsDroppedError : public ValidationError {
public:
    AllRowsDroppedError() : ValidationError("validation dropped every row") {}
};

class UnknownVariableError : public ValidationError {
public:
    explicit UnknownVariableError(const std::string& name)
        : ValidationError("unknown variable: " + name), variable(name) {}
    std::string variable;
};

class NonFiniteError : public ValidationError {
public:
    explicit NonFiniteError(double value)
        : ValidationError("non-finite value " + std::to_string(value)) {}
    explicit NonFiniteError(const std::string& where)
        : ValidationError("non-finite value in " + where) {}
};

class InvalidConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NoConvergenceError : public EstimationError {
public:
    NoConvergenceError(int max_iter, double achieved)
        : EstimationError("absorption did not converge in " + std::to_string(max_iter) +
                          " sweeps; max within-group mean " + std::to_string(achieved)),
          max_iter(max_iter), achieved(achieved) {}
    int max_iter;
    double achieved;
};

class EmptyDesignError : public EstimationError {
public:
    EmptyDesignError() : EstimationError("design has no usable columns") {}
};

class ZeroRowsError : public EstimationError {
public:
    ZeroRowsError() : EstimationError("design has no rows") {}
};

class SingleClusterError : public EstimationError {
public:
    explicit SingleClusterError(const std::string& dim)
        : EstimationError("cluster dimension '" + dim + "' has a single cluster"), dim(dim) {}
    std::string dim;
};

class DimensionMismatchError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

class MissingTermError : public EstimationError {
public:
    explicit MissingTermError(const std::string& term)
        : EstimationError("expected model term is absent: " + term), term(term) {}
    std::string term;
};

class TooFewClustersError : public EstimationError {
public:
    explicit TooFewClustersError(int g)
        : EstimationError("bootstrap needs at least 2 clusters, got " + std::to_string(g)) {}
};

class InsufficientReplicatesError : public EstimationError {
public:
    explicit InsufficientReplicatesError(int successes)
        : EstimationError("only " + std::to_string(successes) +
                          " successful bootstrap replicates (need >= 100)") {}
};

class CollinearEventError : public EstimationError {
public:
    explicit CollinearEventError(const std::string& name)
        : EstimationError("event indicator '" + name +
                          "' is collinear with the fixed effects"),
          event(name) {}
    std::string event;
};

class ZeroSdError : public EstimationError {
public:
    ZeroSdError() : EstimationError("residual standard deviation is zero") {}
};

} // namespace panelfx
