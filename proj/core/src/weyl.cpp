#include "qcorr/weyl.hpp"

#include <cmath>
#include <numbers>

#include "fft.hpp"

namespace qcorr {

namespace {

/// Fills M from per-midpoint momentum samples: row s of `samples` holds
/// E(x0 + s·dx/2, p_k), s = 0..2N-1. Each pair (i, j) uses its minimal-image
/// offset d ∈ [−N/2, N/2) and the periodic midpoint x_j + d·dx/2; at
/// |d| = N/2 both midpoints are averaged. With `linear`, pairs use d = i − j and
/// the plain midpoint (x_i + x_j)/2 instead.
CMat assemble_weyl(const CMat& samples, int n, bool linear)
{
    const int n2 = 2 * n;
    detail::FftPlan plan(n, FFTW_BACKWARD, n2, 1, n);
    // rows of a row-major copy are contiguous transforms
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> buf = samples;
    plan.execute(buf.data());
    buf /= static_cast<double>(n);
    auto wrap = [](int v, int m) { return ((v % m) + m) % m; };
    CMat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const int d = linear ? i - j : wrap(i - j + n / 2, n) - n / 2;
            const double sign = (d % 2 == 0) ? 1.0 : -1.0;
            const int s = wrap(2 * j + d, n2);
            cplx v = buf(s, wrap(d, n));
            if (!linear && 2 * d == -n)
                v = 0.5 * (v + buf(wrap(s + n, n2), wrap(d, n)));
            m(i, j) = sign * v;
        }
    return m;
}

PhaseSpaceGrid wigner_of_kernel(const CMat& k, const Grid1D& grid, double hbar)
{
    const int n = grid.n;
    if (k.rows() != n || k.cols() != n)
        throw DimensionError("wigner_transform: matrix does not match grid");
    const CMat up = detail::upsample2(k);
    const int n2 = 2 * n;
    PhaseSpaceGrid out(grid, hbar);
    detail::FftPlan plan(n, FFTW_FORWARD);
    CVec a(n);
    const double norm = 1.0 / (2.0 * std::numbers::pi * hbar);
    for (int i = 0; i < n; ++i) {
        for (int m = -n / 2; m < n - n / 2; ++m) {
            const int r = ((2 * i + m) % n2 + n2) % n2;
            const int c = ((2 * i - m) % n2 + n2) % n2;
            a(((m % n) + n) % n) = (m % 2 == 0 ? 1.0 : -1.0) * up(r, c);
        }
        plan.execute(a.data());
        out.values.row(i) = norm * a.transpose();
    }
    return out;
}

}  // namespace

CMat weyl_quantize(const Symbol& symbol, const Grid1D& grid, double hbar, WeylInfo* info)
{
    if (symbol.phase_dim() != 2)
        throw DimensionError("weyl_quantize: one degree of freedom only");
    const int n = grid.n;
    CMat samples(2 * n, n);
    Vec a(2);
    for (int s = 0; s < 2 * n; ++s) {
        a(0) = grid.x0 + 0.5 * s * grid.dx;
        for (int k = 0; k < n; ++k) {
            a(1) = grid.p(k, hbar);
            const cplx v = symbol(a);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw DomainError("weyl_quantize: symbol not finite on the grid");
            samples(s, k) = v;
        }
    }
    if (info) {
        const double total = samples.cwiseAbs().maxCoeff();
        const double edge = samples.col(0).cwiseAbs().maxCoeff();
        info->edge_fraction = total > 0 ? edge / total : 0.0;
        info->aliasing_warning = info->edge_fraction > 1e-3;
    }
    // Polynomials are not periodic; wrapping their midpoints would make them jump at the edge.
    return assemble_weyl(samples, n, symbol.polynomial_degree() >= 0);
}

CMat weyl_quantize(const PhaseSpaceGrid& symbol)
{
    const int n = symbol.n();
    const CMat up = detail::upsample2_rows(symbol.values);
    return assemble_weyl(up, n, false);
}

PhaseSpaceGrid wigner_transform(const GridState& state)
{
    return wigner_of_kernel(state.rho, state.grid, state.hbar);
}

PhaseSpaceGrid weyl_symbol(const CMat& op, const Grid1D& grid, double hbar)
{
    PhaseSpaceGrid g = wigner_of_kernel(op, grid, hbar);
    g.values *= 2.0 * std::numbers::pi * hbar;
    return g;
}

}  // namespace qcorr
