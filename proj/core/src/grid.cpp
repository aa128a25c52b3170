#include "qcorr/grid.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>

namespace qcorr {

namespace {

constexpr char kMagic[8] = {'Q', 'C', 'G', 'R', 'I', 'D', '1', '\0'};
constexpr std::int32_t kKindState = 1;
constexpr std::int32_t kKindPhase = 2;

template <class T>
void put(std::ostream& os, T v)
{
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is)
{
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is)
        throw ConfigError("grid container: truncated input");
    return v;
}

void write_container(std::ostream& os, std::int32_t kind, const Grid1D& g, double hbar, const CMat& m)
{
    os.write(kMagic, sizeof kMagic);
    put(os, kind);
    put(os, static_cast<std::int32_t>(g.n));
    put(os, g.x0);
    put(os, g.dx);
    put(os, hbar);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            put(os, m(i, j).real());
            put(os, m(i, j).imag());
        }
    if (!os)
        throw Error("grid container: write failed");
}

CMat read_container(std::istream& is, std::int32_t kind, Grid1D& g, double& hbar)
{
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw ConfigError("grid container: bad magic");
    if (get<std::int32_t>(is) != kind)
        throw ConfigError("grid container: unexpected payload kind");
    g.n = get<std::int32_t>(is);
    if (g.n <= 0)
        throw ConfigError("grid container: bad size");
    g.x0 = get<double>(is);
    g.dx = get<double>(is);
    hbar = get<double>(is);
    CMat m(g.n, g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            const double re = get<double>(is);
            const double im = get<double>(is);
            m(i, j) = cplx(re, im);
        }
    return m;
}

void write_csv_matrix(std::ostream& os, const char* header, const CMat& m, auto row_coord, auto col_coord)
{
    os << header << '\n';
    os.precision(17);
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            os << i << ',' << j << ',' << row_coord(i) << ',' << col_coord(j) << ',' << m(i, j).real() << ','
               << m(i, j).imag() << '\n';
}

}  // namespace

Vec Grid1D::positions() const
{
    Vec v(n);
    for (int i = 0; i < n; ++i)
        v(i) = x(i);
    return v;
}

double Grid1D::dp(double hbar) const
{
    return 2.0 * std::numbers::pi * hbar / (n * dx);
}

Vec Grid1D::momenta(double hbar) const
{
    Vec v(n);
    for (int k = 0; k < n; ++k)
        v(k) = p(k, hbar);
    return v;
}

Grid1D Grid1D::centered(int n, double length)
{
    if (n < 2 || !(length > 0))
        throw DomainError("Grid1D: need n >= 2 and positive length");
    Grid1D g;
    g.n = n;
    g.dx = length / n;
    g.x0 = -length / 2;
    return g;
}

Grid1D Grid1D::balanced(int n, double hbar)
{
    return centered(n, std::sqrt(2.0 * std::numbers::pi * hbar * n));
}

double GridState::hermiticity_defect() const
{
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

cplx GridState::expectation(const CMat& op) const
{
    if (op.rows() != rho.rows() || op.cols() != rho.cols())
        throw DimensionError("GridState::expectation: operator size mismatch");
    // Tr[ρA] = Σ_ij ρ_ij A_ji
    return (rho.transpose().array() * op.array()).sum();
}

void GridState::validate(double herm_tol, double trace_tol) const
{
    if (rho.rows() != grid.n || rho.cols() != grid.n)
        throw DimensionError("GridState: matrix does not match grid");
    if (hermiticity_defect() > herm_tol)
        throw DomainError("GridState: not Hermitian");
    if (std::abs(trace() - 1.0) > trace_tol)
        throw DomainError("GridState: trace differs from 1");
}

GridState GridState::pure(const Grid1D& grid, double hbar, const CVec& psi)
{
    if (psi.size() != grid.n)
        throw DimensionError("GridState::pure: wavefunction size mismatch");
    const double nrm = psi.norm();
    if (!(nrm > 0))
        throw DomainError("GridState::pure: zero wavefunction");
    const CVec v = psi / nrm;
    return GridState{grid, hbar, v * v.adjoint()};
}

PhaseSpaceGrid::PhaseSpaceGrid(const Grid1D& g, double h) : xgrid(g), hbar(h), values(CMat::Zero(g.n, g.n)) {}

cplx PhaseSpaceGrid::integral() const
{
    return values.sum() * cell();
}

double PhaseSpaceGrid::imaginary_residue() const
{
    const double m = values.cwiseAbs().maxCoeff();
    if (m == 0)
        return 0.0;
    return values.imag().cwiseAbs().maxCoeff() / m;
}

Eigen::MatrixXd PhaseSpaceGrid::interior_mask(double margin) const
{
    const int lo = static_cast<int>(std::ceil(margin * n()));
    const int hi = n() - lo;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n(), n());
    if (hi > lo)
        m.block(lo, lo, hi - lo, hi - lo).setOnes();
    return m;
}

void write_binary(std::ostream& os, const GridState& s)
{
    write_container(os, kKindState, s.grid, s.hbar, s.rho);
}

void write_binary(std::ostream& os, const PhaseSpaceGrid& g)
{
    write_container(os, kKindPhase, g.xgrid, g.hbar, g.values);
}

GridState read_grid_state(std::istream& is)
{
    GridState s;
    s.rho = read_container(is, kKindState, s.grid, s.hbar);
    return s;
}

PhaseSpaceGrid read_phase_space_grid(std::istream& is)
{
    PhaseSpaceGrid g;
    g.values = read_container(is, kKindPhase, g.xgrid, g.hbar);
    return g;
}

void write_csv(std::ostream& os, const GridState& s)
{
    write_csv_matrix(os, "i,j,x,y,re,im", s.rho, [&](int i) { return s.grid.x(i); },
                     [&](int j) { return s.grid.x(j); });
}

void write_csv(std::ostream& os, const PhaseSpaceGrid& g)
{
    write_csv_matrix(os, "i,k,x,p,re,im", g.values, [&](int i) { return g.x(i); }, [&](int k) { return g.p(k); });
}

}  // namespace qcorr
