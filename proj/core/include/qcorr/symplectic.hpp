#pragma once

#include "qcorr/types.hpp"

namespace qcorr {

/// ω = [[0, I], [-I, 0]] for d degrees of freedom.
Mat symplectic_form(int d);

struct HamiltonianSkewSplit {
    Mat hamiltonian;  // (M - ωᵀMω)/2, Hω symmetric
    Mat skew;         // (M + ωᵀMω)/2, Sω antisymmetric
};

HamiltonianSkewSplit hamiltonian_skew_split(const Mat& m);

/// Symplectic eigenvalues of σ/(ħ/2), ascending.
Vec williamson_eigenvalues(const Mat& sigma, double hbar);

Mat symmetrize(const Mat& m);

bool is_symmetric(const Mat& m, double tol);
bool is_positive_definite(const Mat& m);

/// ‖MωMᵀ − ω‖_max, zero when M is symplectic.
double symplectic_defect(const Mat& m);

/// Nearest pure covariance (in units of ħ/2) sharing σ̄'s Williamson basis.
/// For d = 1 this is σ̄/√det σ̄.
Mat project_pure(const Mat& sigma_bar);

inline bool is_hamiltonian_matrix(const Mat& m, double tol)
{
    const Mat mw = m * symplectic_form(static_cast<int>(m.rows()) / 2);
    return (mw - mw.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace qcorr
