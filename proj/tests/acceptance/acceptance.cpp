// Acceptance runner: one PASS/FAIL line per criterion A1..A9.
// Exit status is 0 once every selected criterion has been evaluated; --strict
// turns any FAIL into exit status 1.

#include <CLI11.hpp>

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qcorr/config.hpp"
#include "qcorr/experiment.hpp"
#include "qcorr/gaussian.hpp"
#include "qcorr/harmonic.hpp"
#include "qcorr/mixture.hpp"
#include "qcorr/moyal.hpp"
#include "qcorr/symplectic.hpp"
#include "qcorr/weyl.hpp"

using namespace qcorr;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string id;
    std::string title;
    double budget_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

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
    o.count = 500;
    return o;
}

double min_eig(const Mat& m)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m));
    return es.eigenvalues()(0);
}

Mat rotation(double th)
{
    Mat r(2, 2);
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return r;
}

// A1

Outcome harmonic_exactness()
{
    ScenarioConfig cfg = preset_config("damped");
    cfg.t_end = 10.0;
    cfg.outputs = 21;
    cfg.quantum_extent = 3.0;
    cfg.particles = 100;
    cfg.points = 100000;
    cfg.observables = {"x", "p", "x2", "p2", "xp"};
    cfg.trace_distance = false;
    cfg.l1_distance = false;
    const ScenarioResult r = run_scenario(cfg, false);
    if (!r.complete)
        return {false, "run incomplete: " + r.error};

    double qm = 0.0, cl = 0.0;  // worst |q−m|, worst classical deviation in SE units
    for (const ComparisonReport& rep : r.reports)
        for (const auto& [name, row] : rep.observables) {
            qm = std::max(qm, std::abs(row.quantum - row.mixture));
            if (row.classical_se > 0) {
                cl = std::max(cl, std::abs(row.classical - row.quantum) / row.classical_se);
                cl = std::max(cl, std::abs(row.classical - row.mixture) / row.classical_se);
            }
        }
    return {qm <= 1e-3 && cl <= 3.0,
            "max|quantum-mixture| " + fmt("%.2e", qm) + " (<=1e-3), max classical deviation " + fmt("%.2f", cl) +
                " SE (<=3)"};
}

// A2

Outcome nts_suite()
{
    std::mt19937_64 eng(2024);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double hbar = 0.1;
    const Mat w = symplectic_form(1);
    int tested = 0, failures = 0, attempts = 0;
    double worst_recomp = 0.0, worst_psd = 0.0, worst_ham = 0.0, worst_floor = INFINITY;
    while (tested < 1000 && attempts < 100000) {
        ++attempts;
        const bool frictionless = tested % 2 == 0;
        Mat sym(2, 2), b(2, 2);
        sym << g(eng), g(eng), 0, g(eng);
        sym(1, 0) = sym(0, 1);
        b << g(eng), g(eng), g(eng), g(eng);
        const Mat om = b * b.transpose() + 0.5 * Mat::Identity(2, 2);
        Eigen::SelfAdjointEigenSolver<Mat> eo(om), eh(sym);
        const double ratio = eo.eigenvalues()(0) / eh.eigenvalues().cwiseAbs().maxCoeff();

        LocalHarmonicData d;
        d.center = Vec::Zero(2);
        d.h = w * sym;
        d.scaled_diffusion = om;
        d.diffusion = hbar * om;
        double z;
        if (frictionless) {
            d.friction = Mat::Zero(2, 2);
            z = std::min(ratio, 1.0);
        } else {
            d.friction = -0.9 * eo.eigenvalues()(0) * u(eng) * Mat::Identity(2, 2);
            z = std::min(0.5 * ratio, std::sqrt(eo.eigenvalues()(0) / eo.eigenvalues()(1)));
        }
        const double lambda = 0.5 * z;
        if (nts_margin(d, lambda, frictionless) <= 0)
            continue;
        ++tested;

        const Mat rot = rotation(2 * kPi * u(eng));
        const Mat sbar = rot * Vec(Eigen::Vector2d(lambda, 1.0 / lambda)).asDiagonal() * rot.transpose();
        const Mat sigma = 0.5 * hbar * sbar;
        const CovarianceSplit s = nts_decompose(d, sigma, hbar, lambda, frictionless);

        const double scale = 1.0 + s.s_total.norm();
        const double recomp = (s.s_zero + s.s_diff - s.s_total).norm() / scale;
        const double psd = min_eig(s.s_diff) / scale;
        const Mat k = sigma.inverse() * s.s_zero;
        const double ham = (k * w - (k * w).transpose()).norm() / std::max(k.norm(), 1e-300);
        const Vec v = rot.col(0);
        const double floor = v.dot(s.s_zero * v);
        worst_recomp = std::max(worst_recomp, recomp);
        worst_psd = std::min(worst_psd, psd);
        worst_ham = std::max(worst_ham, ham);
        worst_floor = std::min(worst_floor, floor);
        if (recomp > 1e-12 || psd < -1e-10 || ham > 1e-8 || floor <= 0)
            ++failures;
    }
    return {tested == 1000 && failures == 0,
            std::to_string(tested) + " instances, " + std::to_string(failures) + " failures; recomposition " +
                fmt("%.1e", worst_recomp) + ", min eig S_D " + fmt("%.1e", worst_psd) + ", Hamiltonian defect " +
                fmt("%.1e", worst_ham) + ", min v'S0v " + fmt("%.2e", worst_floor)};
}

// A3

Outcome floor_preservation()
{
    ScenarioConfig cfg = preset_config("quartic");
    cfg.gamma = 1.0;
    cfg.hbar = 0.05;
    cfg.particles = 1000;
    cfg.t_end = 5.0;
    cfg.outputs = 51;
    cfg.run_quantum = false;
    cfg.run_classical = false;
    cfg.trace_distance = false;
    cfg.l1_distance = false;
    const ScenarioResult r = run_scenario(cfg, false);
    if (!r.complete)
        return {false, "run incomplete: " + r.error};
    double worst = INFINITY, lambda = NAN;
    for (const ComparisonReport& rep : r.reports) {
        worst = std::min(worst, rep.error_estimates.at("mixture_min_lambda_ratio"));
        lambda = rep.error_estimates.at("mixture_lambda_star");
    }
    return {worst >= lambda * (1 - 1e-5), "min lambda ratio " + fmt("%.8f", worst) + " vs lambda* " +
                                              fmt("%.8f", lambda) + " over " + std::to_string(r.reports.size()) +
                                              " outputs"};
}

// A4

Outcome gaussian_moments()
{
    std::mt19937_64 eng(44);
    std::normal_distribution<double> g(0.0, 1.0);
    const int dim = 4;
    const long samples = 1000000;
    int checks = 0, failures = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Mat b(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                b(i, j) = g(eng) / std::sqrt(double(dim));
        const Mat sigma = b * b.transpose();
        std::vector<Mat> a(4);
        for (Mat& m : a) {
            m = Mat(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    m(i, j) = g(eng);
            m = symmetrize(m);
        }
        // products of the first k forms, k = 1..4
        double sum[4] = {0, 0, 0, 0}, sq[4] = {0, 0, 0, 0};
        Vec xi(dim);
        for (long s = 0; s < samples; ++s) {
            for (int i = 0; i < dim; ++i)
                xi(i) = g(eng);
            const Vec beta = b * xi;
            double prod = 1.0;
            for (int k = 0; k < 4; ++k) {
                prod *= beta.dot(a[k] * beta);
                sum[k] += prod;
                sq[k] += prod * prod;
            }
        }
        for (int k = 0; k < 4; ++k) {
            const double mean = sum[k] / samples;
            const double se = std::sqrt((sq[k] / samples - mean * mean) / (samples - 1));
            const double exact =
                gaussian_quadratic_moments(sigma, std::vector<Mat>(a.begin(), a.begin() + k + 1));
            const double z = std::abs(mean - exact) / se;
            worst = std::max(worst, z);
            ++checks;
            if (z > 3.0)
                ++failures;
        }
    }
    return {failures == 0, std::to_string(checks) + " moments, " + std::to_string(failures) +
                               " beyond 3 SE; worst " + fmt("%.2f", worst) + " SE"};
}

// A5

GaussianState random_pure_state(std::mt19937_64& eng, double hbar, double weight)
{
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    const double r = std::exp(u(eng)), shear = u(eng), th = 3 * u(eng);
    Mat s(2, 2);
    s << r, shear, 0.0, 1.0 / r;
    s = rotation(th) * s;
    GaussianState st;
    st.mean = vec2(u(eng), u(eng));
    st.cov = 0.5 * hbar * s * s.transpose();
    st.weight = weight;
    return st;
}

Outcome weyl_identities()
{
    const double hbar = 0.1;
    const Grid1D grid = Grid1D::balanced(256, hbar);
    std::mt19937_64 eng(55);

    const Symbol poly = symbols::polynomial(1, {{{2, 2}, 1.0}, {{1, 1}, 0.5}, {{3, 0}, -0.2}, {{0, 1}, 0.7}});
    const Symbol gauss = symbols::function(
        1,
        [](const Vec& a) {
            const double dx = a(0) - 0.2, dp = a(1) + 0.1;
            return cplx(std::exp(-(dx * dx) / 0.6 - dp * dp / 0.4));
        },
        "gauss");
    const Symbol gauss2 = symbols::function(
        1,
        [](const Vec& a) {
            const double dx = a(0) + 0.1, dp = a(1) - 0.3;
            return cplx(std::exp(-(dx * dx + dp * dp) / 0.4));
        },
        "gauss2");
    const CMat qpoly = weyl_quantize(poly, grid, hbar);
    const CMat qgauss = weyl_quantize(gauss, grid, hbar);
    const CMat qgauss2 = weyl_quantize(gauss2, grid, hbar);

    double trace_err = 0.0;
    for (const auto& [qa, sa, qb, sb] :
         {std::tuple{&qgauss, &gauss, &qpoly, &poly}, std::tuple{&qgauss, &gauss, &qgauss2, &gauss2}}) {
        const cplx lhs = (*qa * *qb).trace();
        PhaseSpaceGrid prod(grid, hbar);
        for (int i = 0; i < grid.n; ++i)
            for (int k = 0; k < grid.n; ++k) {
                const Vec a = vec2(prod.x(i), prod.p(k));
                prod.values(i, k) = (*sa)(a) * (*sb)(a);
            }
        const cplx rhs = prod.integral() / (2 * kPi * hbar);
        trace_err = std::max(trace_err, std::abs(lhs - rhs));
    }

    ParticleEnsemble ens;
    ens.hbar = hbar;
    for (int i = 0; i < 5; ++i)
        ens.particles.push_back(random_pure_state(eng, hbar, 0.2));
    const GridState rho = mixture_density_matrix(ens, grid);
    double mix_err = 0.0;
    for (const auto& [q, s] : {std::pair{&qpoly, &poly}, std::pair{&qgauss, &gauss}})
        mix_err = std::max(mix_err, std::abs(rho.expectation(*q) - mixture_expectation(ens, *s)));

    PhaseSpaceGrid probe(grid, hbar);
    const int i0 = grid.n / 2 + 3, k0 = grid.n / 2 - 5;
    const GaussianState coh = coherent_state(vec2(probe.x(i0), probe.p(k0)), hbar);
    const PhaseSpaceGrid w =
        wigner_transform(GridState::pure(grid, hbar, gaussian_wavefunction(coh, grid, hbar)));
    const double peak = w.values.real().maxCoeff();
    const double peak_err = std::abs(peak * kPi * hbar - 1.0);

    return {trace_err <= 1e-6 && mix_err <= 1e-6 && peak_err <= 1e-4,
            "trace identity " + fmt("%.1e", trace_err) + ", mixture trace " + fmt("%.1e", mix_err) +
                " (<=1e-6), coherent peak rel. error " + fmt("%.1e", peak_err) + " (<=1e-4)"};
}

// A6, A7: sweep points shared between the two criteria

std::map<std::pair<double, double>, SweepRow> sweep_cache;

SweepSpec quartic_sweep_base()
{
    SweepSpec spec;
    spec.base = preset_config("quartic");
    spec.base.run_mixture = false;
    spec.base.run_quantum = true;
    spec.base.run_classical = true;
    spec.base.trace_distance = false;
    spec.base.l1_distance = false;
    spec.base.snapshots = false;
    return spec;
}

std::vector<SweepRow> sweep_points(const std::vector<double>& hbars, const std::vector<double>& gammas)
{
    SweepSpec spec = quartic_sweep_base();
    for (double h : hbars)
        for (double gm : gammas)
            if (!sweep_cache.count({h, gm})) {
                spec.hbar = {h};
                spec.gamma = {gm};
                for (const SweepRow& row : run_sweep(spec, false).rows)
                    sweep_cache[{row.hbar, row.gamma}] = row;
            }
    std::vector<SweepRow> rows;
    for (double gm : gammas)
        for (double h : hbars)
            rows.push_back(sweep_cache.at({h, gm}));
    return rows;
}

Outcome hbar_scaling()
{
    const std::vector<SweepRow> rows = sweep_points({0.1, 0.05, 0.025, 0.0125}, {1.0});
    std::string rates;
    for (const SweepRow& r : rows) {
        if (r.status != "ok")
            return {false, "point hbar=" + fmt("%g", r.hbar) + " failed: " + r.error};
        rates += (rates.empty() ? "" : " ") + fmt("%.2e", r.rate);
    }
    for (const PowerLawFit& f : power_law_fits(rows))
        if (f.axis == "hbar")
            return {f.exponent >= 0.2 && f.exponent <= 0.8 && f.r2 >= 0.9,
                    "exponent " + fmt("%.3f", f.exponent) + " +- " + fmt("%.3f", f.exponent_se) + " (in [0.2,0.8]), R2 " +
                        fmt("%.3f", f.r2) + " (>=0.9); rates " + rates};
    return {false, "no fit; rates " + rates};
}

Outcome gamma_monotonicity()
{
    const std::vector<SweepRow> rows = sweep_points({0.05}, {0.25, 0.5, 1.0});
    std::string detail;
    bool pass = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].status != "ok")
            return {false, "point gamma=" + fmt("%g", rows[i].gamma) + " failed: " + rows[i].error};
        detail += (detail.empty() ? "" : ", ") + fmt("gamma %g: ", rows[i].gamma) + fmt("%.2e", rows[i].rate) +
                  fmt(" +- %.1e", rows[i].rate_se);
        if (i > 0) {
            const double excess = rows[i].rate - rows[i - 1].rate;
            const double tol = std::hypot(rows[i].rate_se, rows[i - 1].rate_se);
            if (excess > tol)
                pass = false;
        }
    }
    return {pass, "rates " + detail};
}

// A8

Outcome ehrenfest_contrast()
{
    ScenarioConfig cfg = preset_config("quartic");
    cfg.hbar = 0.05;
    cfg.gamma = 1.0;
    const double t_harm = characteristic_scales(build_model(cfg)).t_harm;
    const double t_star = 3.0 * t_harm * std::log(1.0 / cfg.hbar);
    cfg.t_end = t_star;
    cfg.outputs = 16;
    cfg.run_mixture = false;
    cfg.observables = {"x"};
    cfg.clip = 0.0;
    cfg.trace_distance = false;
    cfg.l1_distance = false;

    auto max_gap = [](const ScenarioResult& r, double& final_gap) {
        double m = 0.0;
        for (const ComparisonReport& rep : r.reports) {
            m = std::max(m, rep.observables.at("x").gap);
            final_gap = rep.observables.at("x").gap;
        }
        return m;
    };

    ScenarioConfig closed = cfg;
    closed.gamma = 0.0;
    const ScenarioResult rc = run_scenario(closed, false);
    const ScenarioResult ro = run_scenario(cfg, false);
    if (!rc.complete || !ro.complete)
        return {false, "run incomplete: " + rc.error + ro.error};
    double closed_final = NAN, open_final = NAN;
    const double closed_max = max_gap(rc, closed_final);
    const double open_max = max_gap(ro, open_final);
    return {closed_max > 0.1 && open_max < 0.05,
            "t* " + fmt("%.3f", t_star) + "; closed max gap " + fmt("%.2e", closed_max) + " (>0.1), at t* " +
                fmt("%.2e", closed_final) + "; open max gap " + fmt("%.2e", open_max) + " (<0.05)"};
}

// A9

GridSymbol coherent_wigner(const Grid1D& g, double hbar, double x0, double p0)
{
    PhaseSpaceGrid ps(g, hbar);
    for (int i = 0; i < g.n; ++i)
        for (int k = 0; k < g.n; ++k) {
            const double dx = ps.x(i) - x0, dp = ps.p(k) - p0;
            ps.values(i, k) = std::exp(-(dx * dx + dp * dp) / hbar) / (kPi * hbar);
        }
    return GridSymbol::from_values(ps);
}

double masked_max(const CMat& m, const PhaseSpaceGrid& g)
{
    const Eigen::MatrixXd mask = g.interior_mask(0.1);
    return (m.cwiseAbs().array() * mask.array()).maxCoeff();
}

Outcome generator_equivalence()
{
    double harmonic_err, quartic_err;
    {
        const double hbar = 0.1;
        const Grid1D g = Grid1D::balanced(64, hbar);
        CVec c(2);
        c << 0.6, cplx(0.0, 0.4);
        const DynamicsModel m(symbols::polynomial(1, {{{2, 0}, 0.5}, {{0, 2}, 0.5}, {{1, 1}, 0.2}}),
                              {symbols::linear(c), symbols::position() * cplx(0.3)}, hbar, box2(3), Mat(),
                              few_probes());
        const GridSymbol w = coherent_wigner(g, hbar, 0.4, 0.1);
        const CMat q = quantum_generator_on_wigner(m, w).grid.values;
        const CMat cl = classical_generator_on_wigner(m, w).grid.values;
        harmonic_err = masked_max(q - cl, w.grid) / masked_max(cl, w.grid);
    }
    {
        const double hbar = 0.01;
        const Grid1D g = Grid1D::balanced(64, hbar);
        const DynamicsModel m(symbols::quartic(), {symbols::position() * cplx(0.5)}, hbar, box2(2), Mat(),
                              few_probes());
        const GridSymbol w = coherent_wigner(g, hbar, 0.5, 0.0);
        const CMat diff =
            quantum_generator_on_wigner(m, w).grid.values - classical_generator_on_wigner(m, w).grid.values;
        CMat lead = w.derivative_on_grid(0, 3);
        for (int i = 0; i < g.n; ++i)
            lead.row(i) *= -(hbar * hbar / 24.0) * 6.0 * w.grid.x(i);
        quartic_err = masked_max(diff - lead, w.grid) / masked_max(lead, w.grid);
    }
    return {harmonic_err <= 1e-6 && quartic_err <= 0.1,
            "quadratic generator rel. difference " + fmt("%.1e", harmonic_err) + " (<=1e-6), quartic vs leading term " +
                fmt("%.3f", quartic_err) + " (<=0.1)"};
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qcorr acceptance criteria"};
    bool strict = false;
    std::vector<std::string> only;
    app.add_flag("--strict", strict, "exit 1 when any criterion fails");
    app.add_option("--only", only, "criteria to run, e.g. A1 A5");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {"A1", "harmonic exactness", 120, harmonic_exactness},
        {"A2", "split property suite", 10, nts_suite},
        {"A3", "floor preservation", 60, floor_preservation},
        {"A4", "Gaussian moment oracles", 30, gaussian_moments},
        {"A5", "Wigner/Weyl identities", 30, weyl_identities},
        {"A6", "hbar scaling", 1800, hbar_scaling},
        {"A7", "gamma monotonicity", 1200, gamma_monotonicity},
        {"A8", "Ehrenfest contrast", 600, ehrenfest_contrast},
        {"A9", "generator equivalence", 60, generator_equivalence},
    };
    const std::set<std::string> selected(only.begin(), only.end());

    int failed = 0;
    for (const Criterion& c : criteria) {
        if (!selected.empty() && !selected.count(c.id))
            continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = secs <= c.budget_s;
        const bool pass = o.pass && in_budget;
        failed += !pass;
        std::cout << c.id << ' ' << (pass ? "PASS" : "FAIL") << "  " << c.title << ": " << o.detail << " ["
                  << fmt("%.1f", secs) << " s of " << fmt("%g", c.budget_s) << " s"
                  << (in_budget ? "" : ", over budget") << "]" << std::endl;
    }
    return strict && failed > 0 ? 1 : 0;
}
