#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qcorr {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes of vectors or matrices do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Input is outside the domain an operation accepts (non-PD covariance, bad order, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Failure while integrating; carries an optional particle index and margin.
class SolverError : public Error {
public:
    SolverError(const std::string& what, long index = -1, double margin = 0.0)
        : Error(what), index_(index), margin_(margin) {}
    long index() const { return index_; }
    double margin() const { return margin_; }

private:
    long index_;
    double margin_;
};

}  // namespace qcorr
