#pragma once

#include <vector>

#include "qcorr/fields.hpp"

namespace qcorr {

/// Second-order data of the dynamics at one phase point.
struct LocalHarmonicData {
    Vec center;
    Vec drift;       // u(α)
    Mat h;           // Hamiltonian part of the flow: ω∇²H plus the L_k(α)-shift term
    Mat friction;    // F: remaining friction gradient
    Mat diffusion;   // D
    Mat scaled_diffusion;  // Ω
    double hamiltonian_value = 0.0;
    std::vector<cplx> lindblad_values;

    Mat flow_matrix() const { return h + friction; }
};

LocalHarmonicData taylor_local(const DynamicsModel& model, const Vec& alpha);

/// (h+F)σ + σ(h+F)ᵀ + D
Mat covariance_rhs(const LocalHarmonicData& data, const Mat& sigma);

struct CovarianceSplit {
    Mat s_total;
    Mat s_zero;   // purity preserving: (h+Y)σ + σ(h+Y)ᵀ
    Mat s_diff;   // diffusive remainder
    Mat y;        // the ansatz Y(σ̄)
};

/// Margin of the λ* constraint (positive when satisfied).
double nts_margin(const LocalHarmonicData& data, double lambda_star, bool frictionless);

CovarianceSplit nts_decompose(const LocalHarmonicData& data, const Mat& sigma, double hbar, double lambda_star,
                              bool frictionless);

}  // namespace qcorr
