#include <doctest.h>

#include <cmath>

#include "qcorr/gaussian.hpp"
#include "qcorr/weyl.hpp"

using namespace qcorr;

namespace {

constexpr double kPi = 3.14159265358979323846;

CVec coherent_psi(const Grid1D& g, double x0, double p0, double hbar)
{
    CVec psi(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i);
        psi(i) = std::exp(cplx(-(x - x0) * (x - x0) / (2 * hbar), p0 * x / hbar));
    }
    return psi;
}

Vec vec2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

Symbol gaussian_symbol(double x0, double p0, double s)
{
    return symbols::function(
        1, [=](const Vec& a) { return cplx(std::exp(-((a(0) - x0) * (a(0) - x0) + (a(1) - p0) * (a(1) - p0)) / (2 * s))); },
        "gauss");
}

}  // namespace

TEST_CASE("position symbol quantizes to the diagonal")
{
    const double hbar = 0.1;
    const Grid1D g = Grid1D::balanced(32, hbar);
    const CMat x = weyl_quantize(symbols::position(), g, hbar);
    CMat expect = g.positions().cast<cplx>().asDiagonal();
    CHECK((x - expect).norm() < 1e-12);
}

TEST_CASE("momentum symbol acts as the Fourier derivative")
{
    const double hbar = 0.1;
    const Grid1D g = Grid1D::balanced(64, hbar);
    const CMat p = weyl_quantize(symbols::momentum(), g, hbar);
    CHECK((p - p.adjoint()).norm() < 1e-12);
    for (int m : {-5, -1, 1, 3, 12}) {
        const double k = 2 * kPi * m / g.length();
        CVec psi(g.n);
        for (int i = 0; i < g.n; ++i)
            psi(i) = std::exp(cplx(0.0, k * g.x(i)));
        CHECK((p * psi - hbar * k * psi).norm() < 1e-8 * psi.norm());
    }
}

TEST_CASE("xp quantizes to the symmetric product")
{
    const double hbar = 0.1;
    const Grid1D g = Grid1D::balanced(48, hbar);
    const CMat x = weyl_quantize(symbols::position(), g, hbar);
    const CMat p = weyl_quantize(symbols::momentum(), g, hbar);
    const Symbol xp = symbols::polynomial(1, {{{1, 1}, 1.0}});
    const CMat m = weyl_quantize(xp, g, hbar);
    CHECK((m - 0.5 * (x * p + p * x)).norm() < 1e-8 * m.norm());
}

TEST_CASE("Wigner transform of a coherent state")
{
    const double hbar = 0.1;
    const Grid1D g = Grid1D::balanced(64, hbar);
    const GridState s = GridState::pure(g, hbar, coherent_psi(g, 0.4, -0.3, hbar));
    const PhaseSpaceGrid w = wigner_transform(s);
    CHECK(std::abs(w.integral() - 1.0) < 1e-8);
    CHECK(w.imaginary_residue() < 1e-10);
    GaussianState gs = coherent_state(vec2(0.4, -0.3), hbar);
    double err = 0.0, peak = 0.0;
    for (int i = 0; i < w.n(); ++i)
        for (int k = 0; k < w.n(); ++k) {
            err = std::max(err, std::abs(w.values(i, k).real() - gaussian_density(gs, vec2(w.x(i), w.p(k)))));
            peak = std::max(peak, w.values(i, k).real());
        }
    CHECK(err < 1e-6);
    CHECK(gaussian_density(gs, gs.mean) == doctest::Approx(1.0 / (kPi * hbar)));
}

TEST_CASE("Wigner transform of a cat state shows the interference fringes")
{
    const double hbar = 0.05, a = 0.8;
    // offsets up to half the window must cover the 2a coherence
    const Grid1D g = Grid1D::balanced(256, hbar);
    const CVec psi = coherent_psi(g, a, 0.0, hbar) + coherent_psi(g, -a, 0.0, hbar);
    const PhaseSpaceGrid w = wigner_transform(GridState::pure(g, hbar, psi));
    const double norm = 1.0 / (2 * (1 + std::exp(-a * a / hbar)));
    auto bump = [&](double x, double p) { return std::exp(-(x * x + p * p) / hbar) / (kPi * hbar); };
    const Eigen::MatrixXd mask = w.interior_mask(0.1);
    double err = 0.0;
    for (int i = 0; i < w.n(); ++i)
        for (int k = 0; k < w.n(); ++k) {
            const double x = w.x(i), p = w.p(k);
            const double exact = norm * (bump(x - a, p) + bump(x + a, p) + 2 * bump(x, p) * std::cos(2 * a * p / hbar));
            // the largest periodic offsets alias across the window edge
            if (mask(i, k) > 0)
                err = std::max(err, std::abs(w.values(i, k).real() - exact));
        }
    CHECK(err < 1e-6);
    CHECK(std::abs(w.integral() - 1.0) < 1e-8);
}

TEST_CASE("Weyl symbol inverts quantization")
{
    const double hbar = 0.1;
    const Grid1D g = Grid1D::balanced(64, hbar);
    const Symbol e = gaussian_symbol(0.2, -0.1, 0.15);
    const CMat m = weyl_quantize(e, g, hbar);
    const PhaseSpaceGrid back = weyl_symbol(m, g, hbar);
    double err = 0.0;
    for (int i = 0; i < g.n; ++i)
        for (int k = 0; k < g.n; ++k)
            err = std::max(err, std::abs(back.values(i, k) - e(vec2(back.x(i), back.p(k)))));
    CHECK(err < 1e-8);

    PhaseSpaceGrid sampled(g, hbar);
    for (int i = 0; i < g.n; ++i)
        for (int k = 0; k < g.n; ++k)
            sampled.values(i, k) = e(vec2(sampled.x(i), sampled.p(k)));
    CHECK((weyl_quantize(sampled) - m).norm() < 1e-8 * m.norm());
}

TEST_CASE("trace identity for Gaussian symbols")
{
    const double hbar = 0.1;
    const Grid1D g = Grid1D::balanced(64, hbar);
    const Symbol e1 = gaussian_symbol(0.2, -0.1, 0.3);
    const Symbol e2 = gaussian_symbol(-0.1, 0.3, 0.2);
    const cplx lhs = (weyl_quantize(e1, g, hbar) * weyl_quantize(e2, g, hbar)).trace();
    PhaseSpaceGrid prod(g, hbar);
    for (int i = 0; i < g.n; ++i)
        for (int k = 0; k < g.n; ++k) {
            const Vec a = vec2(prod.x(i), prod.p(k));
            prod.values(i, k) = e1(a) * e2(a);
        }
    const cplx rhs = prod.integral() / (2 * kPi * hbar);
    CHECK(std::abs(lhs - rhs) < 1e-6);
}

TEST_CASE("aliasing monitor")
{
    const double hbar = 0.1;
    const Grid1D g = Grid1D::balanced(32, hbar);
    WeylInfo info;
    weyl_quantize(gaussian_symbol(0.0, 0.0, 0.1), g, hbar, &info);
    CHECK(!info.aliasing_warning);
    weyl_quantize(symbols::momentum(), g, hbar, &info);
    CHECK(info.aliasing_warning);
    CHECK(info.edge_fraction > 0.5);
    const Symbol inf = symbols::function(1, [](const Vec&) { return cplx(std::nan("")); }, "nan");
    CHECK_THROWS_AS(weyl_quantize(inf, g, hbar), DomainError);
}
