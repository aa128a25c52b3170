#pragma once

#include <functional>

#include "qcorr/grid.hpp"
#include "qcorr/model.hpp"

namespace qcorr {

/// Symbol sampled on a phase-space lattice, optionally with analytic derivatives.
struct GridSymbol {
    PhaseSpaceGrid grid;
    /// ∂_x^{nx} ∂_p^{np} at a point; empty for purely sampled symbols.
    std::function<cplx(const Vec&, const MultiIndex&)> derivative;
    /// Polynomial degree of the analytic symbol, -1 when unknown or not polynomial.
    int degree = -1;

    bool analytic() const { return static_cast<bool>(derivative); }

    static GridSymbol sample(const Symbol& s, const Grid1D& xgrid, double hbar);
    static GridSymbol from_values(PhaseSpaceGrid values);

    /// Pointwise complex conjugate (keeps analytic access).
    GridSymbol conjugate() const;

    /// ∂_x^{nx} ∂_p^{np} on the lattice: analytic when available, spectral otherwise.
    CMat derivative_on_grid(int nx, int np) const;
};

/// Spectral (periodic) derivative of lattice values.
CMat spectral_derivative(const PhaseSpaceGrid& g, int nx, int np);

/// Σ_{n ≤ order} (iħ/2)ⁿ/n! Σ_j C(n,j)(−1)^j (∂_x^{n−j}∂_p^j A)(∂_x^j∂_p^{n−j} B).
GridSymbol moyal_star_series(const GridSymbol& a, const GridSymbol& b, int order);

struct MoyalIntegralInfo {
    double band_edge_a = 0.0;  // max |Â| on the outer frequency ring, relative
    double band_edge_b = 0.0;
};

/// Fourier form of the product: Ĉ_m = Σ_k Â_k B̂_{m−k} exp(−iħ kᵀω(m−k)/2), a
/// twisted convolution restricted to the lattice band (O(N⁴)). Throws DomainError
/// when either spectrum has relative magnitude above `alias_tol` on the band edge.
GridSymbol moyal_star_integral(const GridSymbol& a, const GridSymbol& b, double alias_tol = 1e-6,
                               MoyalIntegralInfo* info = nullptr);

/// W[L_Q[ρ]] for ρ with Wigner function W: −(i/ħ)(H⋆W − W⋆H) + (1/ħ)Σ(L⋆W⋆L̄ − ½(L̄⋆(L⋆W) + (W⋆L̄)⋆L)).
/// Series products terminate for polynomial H, L; `order` caps the rest.
GridSymbol quantum_generator_on_wigner(const DynamicsModel& model, const GridSymbol& w, int order = 8);

/// −∂_a(u^a W) + ½∂_a(D^{ab}∂_b W) with analytic fields and spectral derivatives of W.
GridSymbol classical_generator_on_wigner(const DynamicsModel& model, const GridSymbol& w);

}  // namespace qcorr
