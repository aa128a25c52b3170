#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qcorr/gaussian.hpp"
#include "qcorr/mixture.hpp"
#include "qcorr/symplectic.hpp"
#include "qcorr/weyl.hpp"

using namespace qcorr;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec vec2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

DomainBox box2(double h) { return DomainBox::symmetric(vec2(h, h)); }

ProbeOptions few_probes()
{
    ProbeOptions o;
    o.count = 1000;
    return o;
}

Symbol annihilation(double gamma = 1.0)
{
    CVec c(2);
    c << std::sqrt(gamma / 2), cplx(0.0, std::sqrt(gamma / 2));
    return symbols::linear(c);
}

GaussianState pure(double x, double p, double hbar, double squeeze = 1.0, double weight = 1.0)
{
    GaussianState g;
    g.mean = vec2(x, p);
    g.cov = Mat::Zero(2, 2);
    g.cov(0, 0) = 0.5 * hbar * squeeze;
    g.cov(1, 1) = 0.5 * hbar / squeeze;
    g.weight = weight;
    return g;
}

struct TotalMoments {
    Vec mean;
    Mat cov;
};

TotalMoments total_moments(const ParticleEnsemble& e)
{
    TotalMoments t{Vec::Zero(2), Mat::Zero(2, 2)};
    for (const auto& p : e.particles)
        t.mean += p.weight * p.mean;
    for (const auto& p : e.particles) {
        const Vec d = p.mean - t.mean;
        t.cov += p.weight * (p.cov + d * d.transpose());
    }
    return t;
}

Mat rotation(double t)
{
    Mat r(2, 2);
    r << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    return r;
}

}  // namespace

TEST_CASE("ensemble construction and validation")
{
    const double hbar = 0.1;
    const ParticleEnsemble one = ParticleEnsemble::single(pure(0, 0, hbar), hbar, 3);
    CHECK(one.size() == 1);
    CHECK(one.dim() == 1);
    CHECK_NOTHROW(one.validate());

    const ParticleEnsemble list =
        ParticleEnsemble::from_list({pure(-1, 0, hbar, 1.0, 2.0), pure(1, 0, hbar, 1.0, 6.0)}, hbar);
    CHECK(list.total_weight() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(list.particles[0].weight == doctest::Approx(0.25));

    const ParticleEnsemble rep = ParticleEnsemble::replicated(pure(0, 0, hbar), 10, hbar);
    CHECK(std::abs(rep.total_weight() - 1.0) < 1e-12);

    GaussianState centres = pure(0, 0, hbar);
    centres.cov = Mat::Identity(2, 2);
    const ParticleEnsemble s = ParticleEnsemble::sampled(centres, pure(0, 0, hbar).cov, 500, hbar, 11);
    CHECK(s.size() == 500);
    CHECK(s.min_lambda_ratio() == doctest::Approx(1.0));

    ParticleEnsemble bad = one;
    bad.particles[0].weight = 0.5;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    CHECK_THROWS_AS(ParticleEnsemble::replicated(pure(0, 0, hbar), 0, hbar), DomainError);
}

TEST_CASE("snapshot round trip is lossless")
{
    const double hbar = 0.07;
    GaussianState a = pure(0.1234567890123, -2.0 / 3.0, hbar, 1.7, 1.0);
    a.cov = rotation(0.3) * a.cov * rotation(0.3).transpose();
    a.cov = 0.5 * (a.cov + a.cov.transpose()).eval();
    ParticleEnsemble e = ParticleEnsemble::from_list({a, pure(1, 2, hbar, 0.3, 3.0)}, hbar, 42);
    e.time = 1.0 / 3.0;
    e.step_count = 17;
    std::stringstream buf;
    write_snapshot(buf, e);
    const ParticleEnsemble r = read_snapshot(buf);
    CHECK(r.hbar == e.hbar);
    CHECK(r.time == e.time);
    CHECK(r.rng_seed == 42);
    CHECK(r.step_count == 17);
    REQUIRE(r.size() == 2);
    for (int i = 0; i < 2; ++i) {
        CHECK(r.particles[i].weight == e.particles[i].weight);
        CHECK(r.particles[i].mean == e.particles[i].mean);
        CHECK(r.particles[i].cov == e.particles[i].cov);
    }
    std::istringstream empty("");
    CHECK_THROWS_AS(read_snapshot(empty), ConfigError);
    std::istringstream short_rows("# qcorr-ensemble 1\n# dim=1 hbar=0.1 time=0 seed=0 steps=0 count=2\nweight\n1 0 0 0.05 0 0.05\n");
    CHECK_THROWS_AS(read_snapshot(short_rows), ConfigError);
}

TEST_CASE("Gauss-Hermite rule")
{
    Vec x, w;
    gauss_hermite(10, x, w);
    CHECK(w.sum() == doctest::Approx(1.0));
    CHECK(w.dot(x.cwiseAbs2()) == doctest::Approx(1.0));
    CHECK(w.dot(x.array().pow(4).matrix()) == doctest::Approx(3.0));
    CHECK(w.dot(x.array().pow(8).matrix()) == doctest::Approx(105.0));
    CHECK_THROWS_AS(gauss_hermite(0, x, w), DomainError);
}

TEST_CASE("mixture expectations")
{
    const double hbar = 2 * std::sqrt(0.06);
    const ParticleEnsemble e = ParticleEnsemble::single(pure(0.7, -0.2, hbar, 2.0), hbar);
    CHECK(mixture_expectation(e, symbols::constant(1, 1.0)).real() == doctest::Approx(1.0));
    CHECK(mixture_expectation(e, symbols::position()).real() == doctest::Approx(0.7));

    GaussianState g;
    g.mean = Vec::Zero(2);
    g.cov = Mat::Zero(2, 2);
    g.cov(0, 0) = 0.3;
    g.cov(1, 1) = 0.2;
    const ParticleEnsemble z = ParticleEnsemble::single(g, hbar);
    bool exact = false;
    const Symbol x2 = symbols::polynomial(1, {{{2, 0}, 1.0}});
    CHECK(mixture_expectation(z, x2, 20, &exact).real() == doctest::Approx(0.3));
    CHECK(exact);
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 1.0;
    CHECK(gaussian_quadratic_moments(g.cov, {a}) == doctest::Approx(0.3));
    const Symbol x4 = symbols::polynomial(1, {{{4, 0}, 1.0}});
    CHECK(mixture_expectation(z, x4).real() == doctest::Approx(3 * 0.09));
    mixture_expectation(z, symbols::cosine_lattice(), 20, &exact);
    CHECK(!exact);
}

TEST_CASE("mixture Wigner field")
{
    const double hbar = 0.1;
    const Grid1D g = Grid1D::balanced(64, hbar);
    double captured = 0.0;
    const PhaseSpaceGrid w = mixture_wigner(ParticleEnsemble::single(pure(0, 0, hbar), hbar), g, &captured);
    CHECK(w.values.real().maxCoeff() == doctest::Approx(1.0 / (kPi * hbar)).epsilon(1e-12));
    CHECK(std::abs(captured - 1.0) < 1e-4);

    const ParticleEnsemble two = ParticleEnsemble::from_list({pure(-1.5, 0, hbar), pure(1.5, 0, hbar)}, hbar);
    const PhaseSpaceGrid w2 = mixture_wigner(two, g);
    double left = 0.0;
    for (int i = 0; i < g.n / 2; ++i)
        left += w2.values.row(i).real().sum() * w2.cell();
    CHECK(left == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("assembled density matrix")
{
    const double hbar = 0.1;
    const Grid1D g = Grid1D::balanced(128, hbar);
    for (double squeeze : {1.0, 2.0}) {
        const GaussianState st = pure(0.4, -0.3, hbar, squeeze);
        const GridState rho = mixture_density_matrix(ParticleEnsemble::single(st, hbar), g);
        CHECK(std::abs(rho.trace() - 1.0) < 1e-8);
        const PhaseSpaceGrid w = wigner_transform(rho);
        double err = 0.0;
        for (int i = 0; i < g.n; ++i)
            for (int k = 0; k < g.n; ++k)
                err = std::max(err, std::abs(w.values(i, k).real() - gaussian_density(st, vec2(w.x(i), w.p(k)))));
        CHECK(err < 1e-6);
    }
    GaussianState mixed = pure(0, 0, hbar);
    mixed.cov *= 2.0;
    CHECK_THROWS(mixture_density_matrix(ParticleEnsemble::single(mixed, hbar), g));
}

TEST_CASE("harmonic step matches the Lyapunov solution")
{
    const double hbar = 0.1, dt = 0.01;
    const DynamicsModel m(symbols::harmonic(), {symbols::position(), symbols::momentum()}, hbar, box2(2), Mat(),
                          few_probes());
    const MixturePropagator prop(m);
    CHECK(prop.frictionless());
    CHECK(prop.lambda_star() == doctest::Approx(0.5));

    const ParticleEnsemble one = ParticleEnsemble::single(pure(1, 0, hbar), hbar, 1);
    const ParticleEnsemble s = prop.step(one, dt);
    // coherent σ is invariant under the purity-preserving flow; noise carries D
    CHECK((s.particles[0].cov - one.particles[0].cov).norm() < 1e-14);

    const ParticleEnsemble many = ParticleEnsemble::replicated(pure(1, 0, hbar), 20000, hbar, 5);
    const double t = 1.0;
    const ParticleEnsemble e = prop.evolve(many, t, dt);
    const TotalMoments tm = total_moments(e);
    const double var = hbar / 2 + hbar * t;
    const double se = std::sqrt(hbar * t / many.size());
    CHECK(std::abs(tm.mean(0) - std::cos(t)) < 3 * se);
    CHECK(std::abs(tm.mean(1) + std::sin(t)) < 3 * se);
    CHECK(std::abs(tm.cov(0, 0) - var) < 4 * hbar * t * std::sqrt(2.0 / many.size()));
    CHECK(std::abs(tm.cov(1, 1) - var) < 4 * hbar * t * std::sqrt(2.0 / many.size()));
}

TEST_CASE("closed quadratic dynamics is deterministic")
{
    const double hbar = 0.1, dt = 0.005, t = 1.0;
    const DynamicsModel m(symbols::harmonic(), {}, hbar, box2(2), Mat(), few_probes());
    const MixturePropagator prop(m);
    CHECK(std::isnan(prop.lambda_star()));
    const GaussianState st = pure(1, 0.5, hbar, 3.0);
    const ParticleEnsemble e = prop.evolve(ParticleEnsemble::single(st, hbar), t, dt);
    const Mat r = rotation(t);
    CHECK((e.particles[0].mean - r * st.mean).norm() < 1e-8);
    CHECK((e.particles[0].cov - r * st.cov * r.transpose()).norm() < 1e-5 * st.cov.norm());

    const DynamicsModel quartic(symbols::quartic(), {}, hbar, box2(2), Mat(), few_probes());
    CHECK_THROWS_AS(MixturePropagator{quartic}, SolverError);
    const DynamicsModel degenerate(symbols::quartic(), {symbols::position()}, hbar, box2(2), Mat(), few_probes());
    CHECK_THROWS_AS(MixturePropagator{degenerate}, DomainError);
}

TEST_CASE("damped oscillator moments are exact")
{
    const double hbar = 0.1, t = 5.0;
    const DynamicsModel m(symbols::harmonic(), {annihilation()}, hbar, box2(3), Mat(), few_probes());
    const MixturePropagator prop(m);
    CHECK(!prop.frictionless());
    const ParticleEnsemble e = prop.evolve(ParticleEnsemble::single(pure(1, 0.5, hbar), hbar), t, 0.01);
    const TotalMoments tm = total_moments(e);
    const Vec expect = std::exp(-t / 2) * (rotation(t) * vec2(1, 0.5));
    CHECK((tm.mean - expect).norm() < 1e-4);
    CHECK((tm.cov - 0.5 * hbar * Mat::Identity(2, 2)).norm() < 1e-3);
}

TEST_CASE("evolution bookkeeping and determinism")
{
    const double hbar = 0.05;
    const DynamicsModel m(symbols::quartic(), {symbols::position(), symbols::momentum()}, hbar, box2(2), Mat(),
                          few_probes());
    PropagatorOptions serial, parallel;
    parallel.workers = 3;
    const ParticleEnsemble init = ParticleEnsemble::replicated(pure(0.5, 0, hbar), 1000, hbar, 77);
    CHECK(MixturePropagator(m, serial).evolve(init, init.time, 0.01).particles[0].mean == init.particles[0].mean);

    const auto a = MixturePropagator(m, serial).evolve(init, {0.1, 0.2}, 0.01);
    const auto b = MixturePropagator(m, serial).evolve(init, {0.1, 0.2}, 0.01);
    const auto c = MixturePropagator(m, parallel).evolve(init, {0.1, 0.2}, 0.01);
    for (long i = 0; i < init.size(); ++i) {
        CHECK(a[1].particles[i].mean == b[1].particles[i].mean);
        CHECK(a[1].particles[i].cov == c[1].particles[i].cov);
        CHECK(a[1].particles[i].mean == c[1].particles[i].mean);
    }
    CHECK(a[1].step_count == 20);
    CHECK(a[1].step_stats.size() == 2);
    CHECK(a[0].time == 0.1);

    // two half intervals against one full interval: same law
    const ParticleEnsemble half = MixturePropagator(m).evolve(MixturePropagator(m).evolve(init, 0.1, 0.01), 0.2, 0.01);
    const TotalMoments ma = total_moments(a[1]), mh = total_moments(half);
    CHECK((ma.mean - mh.mean).norm() < 4 * std::sqrt(ma.cov.trace() / init.size()));
}

TEST_CASE("NTS floor and purity over long runs")
{
    const double hbar = 0.05;
    const DynamicsModel m(symbols::quartic(), {symbols::position(), symbols::momentum()}, hbar, box2(2), Mat(),
                          few_probes());
    const MixturePropagator prop(m);
    GaussianState centres = pure(0.5, 0, hbar);
    const ParticleEnsemble init = ParticleEnsemble::sampled(centres, pure(0, 0, hbar, 1.5).cov, 50, hbar, 3);
    const ParticleEnsemble e = prop.evolve(init, 1.0, 0.001);
    for (const StepStats& s : e.step_stats)
        CHECK(s.min_lambda_ratio >= prop.lambda_star() * (1 - 1e-5));
    for (const auto& p : e.particles)
        CHECK(std::abs((p.cov / (0.5 * hbar)).determinant() - 1.0) < 1e-5);
    CHECK(e.step_count == 1000);
}

TEST_CASE("constraint violations carry the particle index")
{
    const double hbar = 0.05;
    const DynamicsModel m(symbols::quartic(), {symbols::position() * cplx(0.1), symbols::momentum() * cplx(0.1)},
                          hbar, box2(2), Mat(), few_probes());
    PropagatorOptions opts;
    opts.lambda_star = 0.9;
    const ParticleEnsemble init =
        ParticleEnsemble::from_list({pure(0.0, 0, hbar), pure(0.0, 0, hbar), pure(1.9, 0, hbar)}, hbar);
    try {
        MixturePropagator(m, opts).evolve(init, 0.01, 0.01);
        FAIL("expected a solver error");
    } catch (const SolverError& e) {
        CHECK(e.index() == 0);
        CHECK(e.margin() < 0);
    }
    opts.lambda_star = 1.5;
    CHECK_THROWS_AS(MixturePropagator(m, opts), DomainError);
}
