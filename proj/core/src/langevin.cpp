#include "qcorr/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "qcorr/fields.hpp"
#include "qcorr/symplectic.hpp"
#include "drift.hpp"

namespace qcorr {

namespace {

std::mt19937_64 point_engine(std::uint64_t seed, std::uint64_t index, std::uint64_t step)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
    return std::mt19937_64(seq);
}

Mat psd_sqrt(const Mat& d)
{
    const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(d));
    if (es.eigenvalues()(0) < -1e-10 * scale)
        throw SolverError("langevin: diffusion matrix is not positive semidefinite");
    const Vec s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * s.asDiagonal();
}

void run_range(const ClassicalEnsemble& init, const DynamicsModel& model, const std::vector<double>& times,
               double dt, LangevinScheme scheme, long begin, long end, std::vector<ClassicalEnsemble>& out)
{
    const detail::DriftEvaluator ev(model);
    const int n = model.phase_dim();
    const bool constant = model.constant_diffusion();
    Mat b_const;
    if (constant) {
        const Vec origin = Vec::Zero(n);
        b_const = scheme == LangevinScheme::ito_euler ? psd_sqrt(diffusion(model, origin))
                                                      : ev.noise_matrix(origin);
    }
    const long cols_noise = constant ? b_const.cols()
                                     : (scheme == LangevinScheme::ito_euler ? n
                                                                            : 2 * static_cast<long>(model.lindblads().size()));
    const bool noisy = !model.closed();
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec xi(cols_noise), u0(n), u1(n), pred(n), kick(n);

    for (long j = begin; j < end; ++j) {
        auto eng = point_engine(init.rng_seed, static_cast<std::uint64_t>(j), init.step_count);
        Vec a = init.points.col(j);
        double t = init.time;
        for (std::size_t k = 0; k < times.size(); ++k) {
            while (t < times[k] - 1e-12 * std::max(1.0, std::abs(times[k]))) {
                const double h = std::min(dt, times[k] - t);
                const double sq = std::sqrt(h);
                if (noisy)
                    for (long c = 0; c < cols_noise; ++c)
                        xi(c) = normal(eng) * sq;
                if (constant) {
                    if (noisy)
                        kick.noalias() = b_const * xi;
                    else
                        kick.setZero();
                    ev.drift_into(a, u0);
                    if (scheme == LangevinScheme::ito_euler) {
                        a += u0 * h + kick;
                    } else {
                        pred = a + u0 * h + kick;
                        ev.drift_into(pred, u1);
                        a += 0.5 * h * (u0 + u1) + kick;
                    }
                } else if (scheme == LangevinScheme::ito_euler) {
                    const Vec mu = mean_drift(model, a);
                    const Mat bd = psd_sqrt(diffusion(model, a));
                    a += mu * h + bd * xi;
                } else {
                    ev.drift_into(a, u0);
                    const Mat b0 = ev.noise_matrix(a);
                    pred = a + u0 * h + b0 * xi;
                    ev.drift_into(pred, u1);
                    a += 0.5 * (u0 + u1) * h + 0.5 * (b0 + ev.noise_matrix(pred)) * xi;
                }
                if (!a.allFinite())
                    throw SolverError("langevin: trajectory diverged", j);
                t += h;
            }
            out[k].points.col(j) = a;
        }
    }
}

}  // namespace

ClassicalEnsemble ClassicalEnsemble::sample(const GaussianState& g, long count, std::uint64_t seed)
{
    return sample(std::vector<GaussianState>{g}, count, seed);
}

ClassicalEnsemble ClassicalEnsemble::sample(const std::vector<GaussianState>& mixture, long count,
                                            std::uint64_t seed)
{
    if (mixture.empty() || count <= 0)
        throw DomainError("ClassicalEnsemble::sample: empty mixture or count");
    const int n = static_cast<int>(mixture.front().mean.size());
    std::vector<double> w;
    std::vector<Mat> roots;
    for (const GaussianState& g : mixture) {
        if (g.mean.size() != n)
            throw DimensionError("ClassicalEnsemble::sample: mixed dimensions");
        w.push_back(g.weight);
        roots.push_back(psd_sqrt(g.cov));
    }
    std::mt19937_64 eng(point_engine(seed, ~std::uint64_t{0}, 0));
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    std::normal_distribution<double> normal(0.0, 1.0);
    ClassicalEnsemble e;
    e.points.resize(n, count);
    e.rng_seed = seed;
    Vec z(n);
    for (long j = 0; j < count; ++j) {
        const std::size_t c = mixture.size() == 1 ? 0 : pick(eng);
        for (int i = 0; i < n; ++i)
            z(i) = normal(eng);
        e.points.col(j) = mixture[c].mean + roots[c] * z;
    }
    return e;
}

std::vector<ClassicalEnsemble> langevin_evolve(const ClassicalEnsemble& init, const DynamicsModel& model,
                                               const std::vector<double>& times, double dt,
                                               const LangevinOptions& opts)
{
    if (init.phase_dim() != model.phase_dim())
        throw DimensionError("langevin_evolve: ensemble and model dimensions differ");
    if (!(dt > 0))
        throw DomainError("langevin_evolve: dt must be positive");
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] < init.time || (k > 0 && times[k] < times[k - 1]))
            throw DomainError("langevin_evolve: output times must be ascending and not precede the ensemble");
    std::vector<ClassicalEnsemble> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        out[k].points.resize(init.points.rows(), init.points.cols());
        out[k].time = times[k];
        out[k].rng_seed = init.rng_seed;
        const double span = times[k] - init.time;
        out[k].step_count = init.step_count + static_cast<std::uint64_t>(std::ceil(span / dt - 1e-9));
    }
    const long m = init.size();
    const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(std::max<long>(1, m))));
    if (workers == 1) {
        run_range(init, model, times, dt, opts.scheme, 0, m, out);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const long chunk = (m + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long b = w * chunk;
        const long e = std::min(m, b + chunk);
        pool.emplace_back([&, w, b, e] {
            try {
                run_range(init, model, times, dt, opts.scheme, b, e, out);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

ClassicalEnsemble langevin_step(const ClassicalEnsemble& ensemble, const DynamicsModel& model, double dt,
                                const LangevinOptions& opts)
{
    return langevin_evolve(ensemble, model, {ensemble.time + dt}, dt, opts).front();
}

MonteCarloEstimate classical_expectation(const ClassicalEnsemble& ensemble, const Symbol& observable)
{
    const long m = ensemble.size();
    if (m == 0)
        throw DomainError("classical_expectation: empty ensemble");
    double sum = 0.0, sum2 = 0.0;
    for (long j = 0; j < m; ++j) {
        const double v = observable(ensemble.points.col(j)).real();
        sum += v;
        sum2 += v * v;
    }
    MonteCarloEstimate est;
    est.mean = sum / m;
    if (m > 1) {
        const double var = std::max(0.0, (sum2 - m * est.mean * est.mean) / (m - 1));
        est.std_error = std::sqrt(var / m);
    }
    return est;
}

PhaseSpaceGrid classical_histogram(const ClassicalEnsemble& ensemble, const Grid1D& xgrid, double hbar,
                                   double* captured)
{
    if (ensemble.phase_dim() != 2)
        throw DimensionError("classical_histogram: one degree of freedom only");
    if (ensemble.size() == 0)
        throw DomainError("classical_histogram: empty ensemble");
    PhaseSpaceGrid g(xgrid, hbar);
    const int n = xgrid.n;
    const double dp = g.dp();
    const double p0 = g.p(0);
    long inside = 0;
    for (long j = 0; j < ensemble.size(); ++j) {
        const int i = static_cast<int>(std::floor((ensemble.points(0, j) - xgrid.x0) / xgrid.dx + 0.5));
        const int k = static_cast<int>(std::floor((ensemble.points(1, j) - p0) / dp + 0.5));
        if (i < 0 || i >= n || k < 0 || k >= n)
            continue;
        g.values(i, k) += 1.0;
        ++inside;
    }
    g.values /= static_cast<double>(ensemble.size()) * g.cell();
    if (captured)
        *captured = static_cast<double>(inside) / ensemble.size();
    return g;
}

PhaseSpaceGrid classical_kde(const ClassicalEnsemble& ensemble, const Grid1D& xgrid, double hbar,
                             double bandwidth_x, double bandwidth_p)
{
    if (ensemble.phase_dim() != 2)
        throw DimensionError("classical_kde: one degree of freedom only");
    if (ensemble.size() == 0)
        throw DomainError("classical_kde: empty ensemble");
    PhaseSpaceGrid g(xgrid, hbar);
    const int n = xgrid.n;
    const double dp = g.dp();
    const double p0 = g.p(0);
    const double bx = bandwidth_x > 0 ? bandwidth_x : xgrid.dx;
    const double bp = bandwidth_p > 0 ? bandwidth_p : dp;
    const int rx = static_cast<int>(std::ceil(4.0 * bx / xgrid.dx));
    const int rp = static_cast<int>(std::ceil(4.0 * bp / dp));
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> wx(2 * rx + 1), wp(2 * rp + 1);
    for (long j = 0; j < ensemble.size(); ++j) {
        const double x = ensemble.points(0, j);
        const double p = ensemble.points(1, j);
        const int ic = static_cast<int>(std::lround((x - xgrid.x0) / xgrid.dx));
        const int kc = static_cast<int>(std::lround((p - p0) / dp));
        for (int a = -rx; a <= rx; ++a) {
            const double z = (xgrid.x(ic + a) - x) / bx;
            wx[a + rx] = std::exp(-0.5 * z * z);
        }
        for (int b = -rp; b <= rp; ++b) {
            const double z = (p0 + (kc + b) * dp - p) / bp;
            wp[b + rp] = std::exp(-0.5 * z * z);
        }
        for (int a = -rx; a <= rx; ++a) {
            const int i = ic + a;
            if (i < 0 || i >= n)
                continue;
            for (int b = -rp; b <= rp; ++b) {
                const int k = kc + b;
                if (k < 0 || k >= n)
                    continue;
                acc(i, k) += wx[a + rx] * wp[b + rp];
            }
        }
    }
    const double norm = 1.0 / (2.0 * std::numbers::pi * bx * bp * ensemble.size());
    g.values = (acc * norm).cast<cplx>();
    return g;
}

}  // namespace qcorr
