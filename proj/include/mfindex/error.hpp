// error.hpp
// Exception types shared by all mfindex modules.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfindex {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// No ticker left to work with (empty file, or every ticker screened out).
class EmptyUniverseError : public Error {
public:
    using Error::Error;
};

/// Out-of-range or inconsistent argument (k >= n, t <= 0, bad config, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

class NormalizationError : public Error {
public:
    using Error::Error;
};

/// A point has no weight mass (isolated point), so A is singular.
class SingularMassError : public Error {
public:
    using Error::Error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual);
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Selection ran out of eigenvectors before collecting N feature points.
class InsufficientFeaturesError : public Error {
public:
    InsufficientFeaturesError(std::size_t found, std::size_t wanted);
    std::size_t found() const noexcept { return found_; }
    std::size_t wanted() const noexcept { return wanted_; }

private:
    std::size_t found_;
    std::size_t wanted_;
};

class DegenerateUniverseError : public Error {
public:
    using Error::Error;
};

class MissingPriceError : public Error {
public:
    MissingPriceError(const std::string& ticker, const std::string& date);
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Correlation or beta is undefined because an input has zero variance.
class UndefinedStatisticError : public Error {
public:
    using Error::Error;
};

}  // namespace mfindex
