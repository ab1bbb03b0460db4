#pragma once

#include <stdexcept>
#include <string>

namespace fundcurve {

/// Broad error classes; the CLI maps each one to its own exit-code range.
enum class ErrorClass { Input, Config, Numerical, Internal };

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
    ErrorClass error_class() const noexcept { return class_; }

private:
    ErrorClass class_;
};

/// Argument outside the domain of an operation (price off the grid range, negative shift, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(ErrorClass::Numerical, what) {}
};

/// Curves that cannot be combined: different grids or directions.
class IncompatibleCurves : public Error {
public:
    explicit IncompatibleCurves(const std::string& what) : Error(ErrorClass::Internal, what) {}
};

class NoEquilibrium : public Error {
public:
    explicit NoEquilibrium(const std::string& what) : Error(ErrorClass::Numerical, what) {}
};

/// Regression with a constant regressor (or fewer than two points).
class DegenerateRegressor : public Error {
public:
    explicit DegenerateRegressor(const std::string& what) : Error(ErrorClass::Numerical, what) {}
};

/// Every hour failed to decompose, so there is nothing to fit.
class ObjectiveUndefined : public Error {
public:
    explicit ObjectiveUndefined(const std::string& what) : Error(ErrorClass::Numerical, what) {}
};

/// A shifted volume left the range covered by a curve.
class OutOfRange : public Error {
public:
    explicit OutOfRange(const std::string& what) : Error(ErrorClass::Numerical, what) {}
};

/// Aggregation with no usable rows left.
class EmptyAggregate : public Error {
public:
    explicit EmptyAggregate(const std::string& what) : Error(ErrorClass::Numerical, what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorClass::Config, what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(ErrorClass::Input, "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Unreadable input file.
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(ErrorClass::Input, what) {}
};

class DataIntegrityError : public Error {
public:
    explicit DataIntegrityError(const std::string& what) : Error(ErrorClass::Input, what) {}
};

class LookupError : public Error {
public:
    explicit LookupError(const std::string& what) : Error(ErrorClass::Input, what) {}
};

}  // namespace fundcurve
