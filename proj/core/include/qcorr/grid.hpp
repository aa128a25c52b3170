#pragma once

#include <iosfwd>
#include <string>

#include "qcorr/types.hpp"

namespace qcorr {

/// Uniform periodic 1-D position grid: x_i = x0 + i·dx, i = 0..n-1.
struct Grid1D {
    int n = 0;
    double x0 = 0.0;
    double dx = 0.0;

    double x(int i) const { return x0 + i * dx; }
    double length() const { return n * dx; }
    Vec positions() const;

    /// Conjugate momentum spacing 2πħ/(n·dx).
    double dp(double hbar) const;
    /// p_k = (k − n/2)·dp, k = 0..n-1.
    double p(int k, double hbar) const { return (k - n / 2) * dp(hbar); }
    Vec momenta(double hbar) const;

    /// Grid of n points on [−length/2, length/2).
    static Grid1D centered(int n, double length);
    /// Centered grid with equal position and momentum extents: length² = 2πħn.
    static Grid1D balanced(int n, double hbar);

    bool operator==(const Grid1D& o) const { return n == o.n && x0 == o.x0 && dx == o.dx; }
};

/// Density-matrix kernel ⟨x_i|ρ|x_j⟩·dx, so that Tr ρ = Σ rho(i, i).
struct GridState {
    Grid1D grid;
    double hbar = 0.0;
    CMat rho;

    cplx trace() const { return rho.trace(); }
    double purity() const { return (rho * rho).trace().real(); }
    double hermiticity_defect() const;
    cplx expectation(const CMat& op) const;
    void validate(double herm_tol = 1e-10, double trace_tol = 1e-8) const;

    /// Normalized pure state from a wavefunction sampled on the grid.
    static GridState pure(const Grid1D& grid, double hbar, const CVec& psi);
};

/// Field on the (x_i, p_k) lattice. Rows index x, columns index p.
struct PhaseSpaceGrid {
    Grid1D xgrid;
    double hbar = 0.0;
    CMat values;

    PhaseSpaceGrid() = default;
    PhaseSpaceGrid(const Grid1D& g, double hbar);

    int n() const { return xgrid.n; }
    double dx() const { return xgrid.dx; }
    double dp() const { return xgrid.dp(hbar); }
    double x(int i) const { return xgrid.x(i); }
    double p(int k) const { return xgrid.p(k, hbar); }
    double cell() const { return dx() * dp(); }

    /// Σ values · dx · dp
    cplx integral() const;
    /// Max |Im| relative to max |values|.
    double imaginary_residue() const;
    /// 1 on points at least `margin`·extent away from each edge, 0 elsewhere.
    Eigen::MatrixXd interior_mask(double margin = 0.1) const;
};

// Binary container: 8-byte magic, int32 kind, int32 n, three doubles
// (x0, dx, hbar), then n·n complex values as (re, im) pairs in row-major order.
void write_binary(std::ostream& os, const GridState& s);
void write_binary(std::ostream& os, const PhaseSpaceGrid& g);
GridState read_grid_state(std::istream& is);
PhaseSpaceGrid read_phase_space_grid(std::istream& is);

// CSV: header line then one row per entry: "i,j,x,y,re,im" for GridState
// (y = x_j) and "i,k,x,p,re,im" for PhaseSpaceGrid.
void write_csv(std::ostream& os, const GridState& s);
void write_csv(std::ostream& os, const PhaseSpaceGrid& g);

}  // namespace qcorr
