#include "qcorr/moyal.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "fft.hpp"
#include "qcorr/fields.hpp"

namespace qcorr {

namespace {

void check_same_lattice(const PhaseSpaceGrid& a, const PhaseSpaceGrid& b)
{
    if (!(a.xgrid == b.xgrid) || a.hbar != b.hbar)
        throw DimensionError("moyal: symbols live on different lattices");
}

double binomial(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i)
        r *= i;
    return r;
}

class DerivativeCache {
public:
    explicit DerivativeCache(const GridSymbol& s) : s_(s) {}

    const CMat* get(int nx, int np)
    {
        if (s_.degree >= 0 && nx + np > s_.degree)
            return nullptr;
        auto key = std::make_pair(nx, np);
        auto it = cache_.find(key);
        if (it == cache_.end())
            it = cache_.emplace(key, s_.derivative_on_grid(nx, np)).first;
        return &it->second;
    }

private:
    const GridSymbol& s_;
    std::map<std::pair<int, int>, CMat> cache_;
};

/// Multiplier (iκ)^n on DFT bin b for an axis of n points and spacing h.
CVec derivative_multiplier(int n, double h, int order)
{
    CVec m(n);
    for (int b = 0; b < n; ++b) {
        const int f = detail::signed_frequency(b, n);
        const double kappa = 2.0 * std::numbers::pi * f / (n * h);
        m(b) = std::pow(cplx(0.0, kappa), order);
        if (n % 2 == 0 && b == n / 2 && order % 2 == 1)
            m(b) = 0.0;
    }
    return m;
}

double band_edge(const CMat& spec)
{
    const int n = static_cast<int>(spec.rows());
    const double peak = spec.cwiseAbs().maxCoeff();
    if (peak == 0)
        return 0.0;
    double edge = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int fx = detail::signed_frequency(i, n);
            const int fp = detail::signed_frequency(j, n);
            if (std::abs(fx) >= n / 2 - 1 || std::abs(fp) >= n / 2 - 1)
                edge = std::max(edge, std::abs(spec(i, j)));
        }
    return edge / peak;
}

}  // namespace

GridSymbol GridSymbol::sample(const Symbol& s, const Grid1D& xgrid, double hbar)
{
    if (s.phase_dim() != 2)
        throw DimensionError("GridSymbol: one degree of freedom only");
    GridSymbol g;
    g.grid = PhaseSpaceGrid(xgrid, hbar);
    Vec a(2);
    for (int k = 0; k < xgrid.n; ++k) {
        a(1) = g.grid.p(k);
        for (int i = 0; i < xgrid.n; ++i) {
            a(0) = xgrid.x(i);
            g.grid.values(i, k) = s(a);
        }
    }
    g.derivative = [s](const Vec& a, const MultiIndex& n) { return s.derivative(a, n); };
    g.degree = s.polynomial_degree();
    return g;
}

GridSymbol GridSymbol::from_values(PhaseSpaceGrid values)
{
    GridSymbol g;
    g.grid = std::move(values);
    return g;
}

GridSymbol GridSymbol::conjugate() const
{
    GridSymbol g;
    g.grid = grid;
    g.grid.values = grid.values.conjugate();
    if (derivative) {
        auto d = derivative;
        g.derivative = [d](const Vec& a, const MultiIndex& n) { return std::conj(d(a, n)); };
    }
    g.degree = degree;
    return g;
}

CMat GridSymbol::derivative_on_grid(int nx, int np) const
{
    if (nx < 0 || np < 0)
        throw DomainError("GridSymbol: negative derivative order");
    if (nx == 0 && np == 0)
        return grid.values;
    if (!derivative)
        return spectral_derivative(grid, nx, np);
    const int n = grid.n();
    CMat out(n, n);
    Vec a(2);
    const MultiIndex idx{nx, np};
    for (int k = 0; k < n; ++k) {
        a(1) = grid.p(k);
        for (int i = 0; i < n; ++i) {
            a(0) = grid.x(i);
            out(i, k) = derivative(a, idx);
        }
    }
    return out;
}

CMat spectral_derivative(const PhaseSpaceGrid& g, int nx, int np)
{
    const int n = g.n();
    CMat v = g.values;
    if (nx > 0) {
        detail::FftPlan(n, FFTW_FORWARD, n, 1, n).execute(v.data());
        const CVec m = derivative_multiplier(n, g.dx(), nx);
        for (int k = 0; k < n; ++k)
            v.col(k).array() *= m.array();
        detail::FftPlan(n, FFTW_BACKWARD, n, 1, n).execute(v.data());
        v /= static_cast<double>(n);
    }
    if (np > 0) {
        detail::FftPlan(n, FFTW_FORWARD, n, n, 1).execute(v.data());
        const CVec m = derivative_multiplier(n, g.dp(), np);
        for (int i = 0; i < n; ++i)
            v.row(i).array() *= m.transpose().array();
        detail::FftPlan(n, FFTW_BACKWARD, n, n, 1).execute(v.data());
        v /= static_cast<double>(n);
    }
    return v;
}

GridSymbol moyal_star_series(const GridSymbol& a, const GridSymbol& b, int order)
{
    if (order < 0)
        throw DomainError("moyal_star_series: order must be nonnegative");
    check_same_lattice(a.grid, b.grid);
    const double hbar = a.grid.hbar;
    DerivativeCache ca(a), cb(b);
    GridSymbol out;
    out.grid = PhaseSpaceGrid(a.grid.xgrid, hbar);
    for (int n = 0; n <= order; ++n) {
        const cplx pref = std::pow(cplx(0.0, hbar / 2.0), n) / factorial(n);
        for (int j = 0; j <= n; ++j) {
            const CMat* da = ca.get(n - j, j);
            if (!da)
                continue;
            const CMat* db = cb.get(j, n - j);
            if (!db)
                continue;
            const double c = binomial(n, j) * (j % 2 == 0 ? 1.0 : -1.0);
            out.grid.values.array() += (pref * c) * da->array() * db->array();
        }
    }
    return out;
}

GridSymbol moyal_star_integral(const GridSymbol& a, const GridSymbol& b, double alias_tol, MoyalIntegralInfo* info)
{
    check_same_lattice(a.grid, b.grid);
    const int n = a.grid.n();
    detail::FftPlan2D fwd(n, n, FFTW_FORWARD);
    CMat sa = a.grid.values, sb = b.grid.values;
    fwd.execute(sa);
    fwd.execute(sb);
    const double ea = band_edge(sa), eb = band_edge(sb);
    if (info) {
        info->band_edge_a = ea;
        info->band_edge_b = eb;
    }
    if (ea > alias_tol || eb > alias_tol)
        throw DomainError("moyal_star_integral: spectrum reaches the band edge (aliasing)");
    sa /= static_cast<double>(n) * n;
    sb /= static_cast<double>(n) * n;

    // phase exp(−iπ t/N) depends on t mod 2N
    CVec table(2 * n);
    for (int t = 0; t < 2 * n; ++t)
        table(t) = std::exp(cplx(0.0, -std::numbers::pi * t / n));
    std::vector<int> freq(n);
    for (int i = 0; i < n; ++i)
        freq[i] = detail::signed_frequency(i, n);
    const int lo = -(n / 2), hi = n - n / 2 - 1;
    auto bin = [n](int f) { return f < 0 ? f + n : f; };

    CMat sc = CMat::Zero(n, n);
    for (int gp_b = 0; gp_b < n; ++gp_b) {
        const int gp = freq[gp_b];
        for (int gx_b = 0; gx_b < n; ++gx_b) {
            const int gx = freq[gx_b];
            cplx acc = 0.0;
            for (int fp_b = 0; fp_b < n; ++fp_b) {
                const int fp = freq[fp_b];
                const int rp = gp - fp;
                if (rp < lo || rp > hi)
                    continue;
                for (int fx_b = 0; fx_b < n; ++fx_b) {
                    const int fx = freq[fx_b];
                    const int rx = gx - fx;
                    if (rx < lo || rx > hi)
                        continue;
                    const int t = (((fx * gp - fp * gx) % (2 * n)) + 2 * n) % (2 * n);
                    acc += sa(fx_b, fp_b) * sb(bin(rx), bin(rp)) * table(t);
                }
            }
            sc(gx_b, gp_b) = acc;
        }
    }
    detail::FftPlan2D(n, n, FFTW_BACKWARD).execute(sc);
    GridSymbol out;
    out.grid = PhaseSpaceGrid(a.grid.xgrid, a.grid.hbar);
    out.grid.values = sc;
    return out;
}

GridSymbol quantum_generator_on_wigner(const DynamicsModel& model, const GridSymbol& w, int order)
{
    if (model.dim() != 1)
        throw DimensionError("quantum_generator_on_wigner: one degree of freedom only");
    const double hbar = model.hbar();
    if (w.grid.hbar != hbar)
        throw DomainError("quantum_generator_on_wigner: lattice ħ differs from the model");
    const Grid1D& xg = w.grid.xgrid;
    auto ord = [order](const GridSymbol& s) { return s.degree >= 0 ? std::min(order, s.degree) : order; };

    GridSymbol out;
    out.grid = PhaseSpaceGrid(xg, hbar);
    if (!model.hamiltonian().is_zero()) {
        const GridSymbol h = GridSymbol::sample(model.hamiltonian(), xg, hbar);
        const GridSymbol hw = moyal_star_series(h, w, ord(h));
        const GridSymbol wh = moyal_star_series(w, h, ord(h));
        out.grid.values += cplx(0.0, -1.0 / hbar) * (hw.grid.values - wh.grid.values);
    }
    for (const Symbol& ls : model.lindblads()) {
        const GridSymbol l = GridSymbol::sample(ls, xg, hbar);
        const GridSymbol lb = l.conjugate();
        const GridSymbol lw = moyal_star_series(l, w, ord(l));
        const GridSymbol lwl = moyal_star_series(lw, lb, ord(lb));
        const GridSymbol llw = moyal_star_series(lb, lw, ord(lb));
        const GridSymbol wl = moyal_star_series(w, lb, ord(lb));
        const GridSymbol wll = moyal_star_series(wl, l, ord(l));
        out.grid.values +=
            (lwl.grid.values - 0.5 * (llw.grid.values + wll.grid.values)) / hbar;
    }
    return out;
}

GridSymbol classical_generator_on_wigner(const DynamicsModel& model, const GridSymbol& w)
{
    if (model.dim() != 1)
        throw DimensionError("classical_generator_on_wigner: one degree of freedom only");
    const int n = w.grid.n();
    const CMat wx = w.derivative_on_grid(1, 0);
    const CMat wp = w.derivative_on_grid(0, 1);
    const CMat wxx = w.derivative_on_grid(2, 0);
    const CMat wxp = w.derivative_on_grid(1, 1);
    const CMat wpp = w.derivative_on_grid(0, 2);
    GridSymbol out;
    out.grid = PhaseSpaceGrid(w.grid.xgrid, w.grid.hbar);
    Vec a(2);
    for (int k = 0; k < n; ++k) {
        a(1) = w.grid.p(k);
        for (int i = 0; i < n; ++i) {
            a(0) = w.grid.x(i);
            const DerivedFields f = derived_fields(model, a);
            const double div_u = f.friction_gradient.trace();
            const Vec half_div_d = f.mean_drift - f.drift;  // ½∂_b D^{ab}
            const Mat& d = f.diffusion;
            cplx v = -div_u * w.grid.values(i, k) - f.drift(0) * wx(i, k) - f.drift(1) * wp(i, k);
            v += half_div_d(0) * wx(i, k) + half_div_d(1) * wp(i, k);
            v += 0.5 * (d(0, 0) * wxx(i, k) + 2.0 * d(0, 1) * wxp(i, k) + d(1, 1) * wpp(i, k));
            out.grid.values(i, k) = v;
        }
    }
    return out;
}

}  // namespace qcorr
