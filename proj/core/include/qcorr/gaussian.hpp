#pragma once

#include <vector>

#include "qcorr/types.hpp"

namespace qcorr {

/// Tolerances used when validating covariance matrices.
struct CovarianceTolerance {
    double sym = 1e-10;   // relative to ‖σ‖
    double symp = 1e-8;
};

struct GaussianState {
    Vec mean;
    Mat cov;
    double weight = 1.0;

    int dim() const { return static_cast<int>(mean.size()) / 2; }

    /// Throws DomainError when the state is malformed. With `pure`, σ/(ħ/2)
    /// must also be symplectic.
    void validate(double hbar = 0.0, bool pure = false, CovarianceTolerance tol = {}) const;
};

GaussianState coherent_state(const Vec& mean, double hbar);

double gaussian_density(const GaussianState& state, const Vec& beta);

GaussianState gaussian_convolve(const GaussianState& a, const GaussianState& b);

/// E[∏ βᵀAⱼβ] for β ~ N(0, σ), 1 to 4 factors.
double gaussian_quadratic_moments(const Mat& sigma, const std::vector<Mat>& mats);

}  // namespace qcorr
