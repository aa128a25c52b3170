#pragma once

#include "qcorr/grid.hpp"
#include "qcorr/symbol.hpp"

namespace qcorr {

struct WeylInfo {
    /// max |E| on the outermost momentum column relative to max |E| on the lattice
    double edge_fraction = 0.0;
    bool aliasing_warning = false;
};

/// Matrix of the Weyl operator Ê acting on grid wavefunctions:
/// M_ij = (1/N) Σ_k e^{i d·dx·p_k/ħ} E(x_j + d·dx/2, p_k), where d ∈ [−N/2, N/2)
/// is the minimal periodic image of i − j. Inside the band |i − j| < N/2 this is
/// the midpoint rule E((x_i + x_j)/2, p_k); x-independent symbols give circulants.
/// Polynomial symbols use d = i − j with the plain midpoint for every pair, so
/// that e.g. xp maps to ½(X̂P̂ + P̂X̂) exactly.
CMat weyl_quantize(const Symbol& symbol, const Grid1D& grid, double hbar, WeylInfo* info = nullptr);

/// Same for a symbol sampled on a phase-space lattice; values at half-integer
/// positions come from band-limited interpolation along x.
CMat weyl_quantize(const PhaseSpaceGrid& symbol);

/// W(x_i, p_k) = (2πħ)⁻¹ Σ_m e^{−i m dx p_k/ħ} K(x_i + m dx/2, x_i − m dx/2), with
/// half-integer kernel entries from band-limited interpolation. Real-valued for
/// Hermitian ρ; the imaginary residue is left in `values` for inspection.
PhaseSpaceGrid wigner_transform(const GridState& state);

/// Weyl symbol of an arbitrary grid operator: 2πħ times its Wigner transform.
PhaseSpaceGrid weyl_symbol(const CMat& op, const Grid1D& grid, double hbar);

}  // namespace qcorr
