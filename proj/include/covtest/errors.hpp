#pragma once

#include <stdexcept>
#include <string>

namespace covtest {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter lies outside the domain where a formula is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Matrix or list dimensions do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A log or ratio received a nonpositive argument.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A sample covariance is not positive definite, so it cannot be inverted.
class SingularCovariance : public Error {
public:
    using Error::Error;
};

/// The whitening matrix of the chi-square variant exceeds the conditioning cap.
class IllConditioned : public Error {
public:
    IllConditioned(const std::string& what, double condition)
        : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// An estimated spike is too close to the detectability edge for the CLT
/// covariance to be evaluated. Carries the offending (k, l) with l = 0 for
/// the pooled matrix.
class DegenerateSpike : public Error {
public:
    DegenerateSpike(const std::string& what, int k, int ell)
        : Error(what), k_(k), ell_(ell) {}
    int k() const noexcept { return k_; }
    int ell() const noexcept { return ell_; }

private:
    int k_;
    int ell_;
};

/// Malformed or inconsistent input data (files, sidecars, masks).
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace covtest
