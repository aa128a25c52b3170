#include "qcorr/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "drift.hpp"
#include "qcorr/harmonic.hpp"
#include "qcorr/symplectic.hpp"

namespace qcorr {

namespace {

std::mt19937_64 particle_engine(std::uint64_t seed, std::uint64_t index, std::uint64_t step)
{
    // distinct leading tag keeps these streams apart from the Langevin ones
    std::seed_seq seq{0x6d697874u, static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
    return std::mt19937_64(seq);
}

double lambda_min(const Mat& m)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// Lower factor of S for sampling N(0, S); jitter for round-off negativity.
Mat noise_factor(const Mat& s, double reference, long index)
{
    const double amax = s.cwiseAbs().maxCoeff();
    if (amax == 0.0)
        return Mat::Zero(s.rows(), s.cols());
    const Mat sym = symmetrize(s);
    const double lmin = lambda_min(sym);
    if (lmin < -1e-10 * std::max(reference, amax)) {
        std::ostringstream os;
        os << "mixture: diffusive covariance split not positive semidefinite (lambda_min " << lmin << ")";
        throw SolverError(os.str(), index, lmin);
    }
    Mat work = sym;
    if (lmin <= 0.0)
        work.diagonal().array() += -lmin + 1e-12 * std::max(sym.trace(), amax);
    Eigen::LLT<Mat> llt(work);
    if (llt.info() != Eigen::Success)
        throw SolverError("mixture: Cholesky factorization of the noise covariance failed", index);
    return llt.matrixL();
}

struct ParticleStepper {
    const DynamicsModel& model;
    detail::DriftEvaluator ev;
    double lambda_star;
    bool frictionless;
    DriftScheme drift;
    bool reproject;
    bool closed;  // quadratic H without L_k: exact Hamiltonian covariance flow

    Vec mean_increment(const Vec& a, double dt) const
    {
        if (drift == DriftScheme::euler)
            return ev.drift(a) * dt;
        const Vec k1 = ev.drift(a);
        const Vec k2 = ev.drift(a + 0.5 * dt * k1);
        const Vec k3 = ev.drift(a + 0.5 * dt * k2);
        const Vec k4 = ev.drift(a + dt * k3);
        return (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    void advance(GaussianState& g, double dt, std::mt19937_64& eng, StepStats& st, long index) const
    {
        const double hbar = model.hbar();
        const int n = static_cast<int>(g.mean.size());
        const LocalHarmonicData data = taylor_local(model, g.mean);
        CovarianceSplit split;
        if (closed) {
            split.s_total = covariance_rhs(data, g.cov);
            split.s_zero = split.s_total;
            split.s_diff = Mat::Zero(n, n);
            split.y = Mat::Zero(n, n);
        } else try {
            split = nts_decompose(data, g.cov, hbar, lambda_star, frictionless);
        } catch (const SolverError& e) {
            throw SolverError(std::string(e.what()) + " at particle " + std::to_string(index), index, e.margin());
        } catch (const DomainError& e) {
            throw SolverError(std::string(e.what()) + " at particle " + std::to_string(index), index);
        }

        std::normal_distribution<double> normal(0.0, 1.0);
        Vec xi(n);
        for (int i = 0; i < n; ++i)
            xi(i) = normal(eng);
        // S_total vanishes at a stationary state; D and S₀ keep the round-off scale
        const double scale = split.s_total.norm() + split.s_zero.norm() + data.diffusion.norm();
        const Mat chol = noise_factor(split.s_diff * dt, scale * dt, index);
        g.mean += mean_increment(g.mean, dt) + chol * xi;

        const Mat k = data.h + split.y;
        const Mat id = Mat::Identity(n, n);
        const Mat cay = (id - 0.5 * dt * k).partialPivLu().solve(id + 0.5 * dt * k);
        Mat sb = symmetrize(cay * g.cov * cay.transpose()) / (0.5 * hbar);
        st.max_symplectic_defect = std::max(st.max_symplectic_defect, symplectic_defect(sb));
        if (reproject)
            sb = project_pure(sb);
        g.cov = symmetrize(sb) * (0.5 * hbar);
        st.min_lambda_ratio = std::min(st.min_lambda_ratio, lambda_min(sb));
        st.max_cov_norm = std::max(st.max_cov_norm, g.cov.norm());
        if (!g.mean.allFinite() || !g.cov.allFinite())
            throw SolverError("mixture: particle diverged at particle " + std::to_string(index), index);
    }
};

void merge(StepStats& into, const StepStats& s)
{
    into.min_lambda_ratio = std::min(into.min_lambda_ratio, s.min_lambda_ratio);
    into.max_cov_norm = std::max(into.max_cov_norm, s.max_cov_norm);
    into.max_symplectic_defect = std::max(into.max_symplectic_defect, s.max_symplectic_defect);
}

}  // namespace

double ParticleEnsemble::total_weight() const
{
    double s = 0.0;
    for (const auto& p : particles)
        s += p.weight;
    return s;
}

double ParticleEnsemble::min_lambda_ratio() const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : particles)
        m = std::min(m, lambda_min(p.cov) / (0.5 * hbar));
    return m;
}

void ParticleEnsemble::validate() const
{
    if (!(hbar > 0))
        throw DomainError("ParticleEnsemble: hbar must be positive");
    if (particles.empty())
        throw DomainError("ParticleEnsemble: no particles");
    const int n = static_cast<int>(particles.front().mean.size());
    for (const auto& p : particles) {
        if (p.mean.size() != n)
            throw DimensionError("ParticleEnsemble: mixed dimensions");
        p.validate(hbar, true);
    }
    if (std::abs(total_weight() - 1.0) > 1e-12)
        throw DomainError("ParticleEnsemble: weights do not sum to one");
}

ParticleEnsemble ParticleEnsemble::single(const GaussianState& g, double hbar, std::uint64_t seed)
{
    return from_list({g}, hbar, seed);
}

ParticleEnsemble ParticleEnsemble::from_list(std::vector<GaussianState> particles, double hbar, std::uint64_t seed)
{
    ParticleEnsemble e;
    e.hbar = hbar;
    e.rng_seed = seed;
    double total = 0.0;
    for (const auto& p : particles)
        total += p.weight;
    if (!(total > 0))
        throw DomainError("ParticleEnsemble: total weight must be positive");
    for (auto& p : particles)
        p.weight /= total;
    e.particles = std::move(particles);
    e.validate();
    return e;
}

ParticleEnsemble ParticleEnsemble::replicated(const GaussianState& g, long count, double hbar, std::uint64_t seed)
{
    if (count <= 0)
        throw DomainError("ParticleEnsemble: count must be positive");
    GaussianState c = g;
    c.weight = 1.0;
    return from_list(std::vector<GaussianState>(static_cast<std::size_t>(count), c), hbar, seed);
}

ParticleEnsemble ParticleEnsemble::sampled(const GaussianState& centers, const Mat& sigma, long count, double hbar,
                                           std::uint64_t seed)
{
    if (count <= 0)
        throw DomainError("ParticleEnsemble: count must be positive");
    const int n = static_cast<int>(centers.mean.size());
    Eigen::LLT<Mat> llt(symmetrize(centers.cov));
    if (llt.info() != Eigen::Success)
        throw DomainError("ParticleEnsemble::sampled: centre covariance not positive definite");
    const Mat root = llt.matrixL();
    auto eng = particle_engine(seed, ~std::uint64_t{0}, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<GaussianState> ps;
    ps.reserve(static_cast<std::size_t>(count));
    Vec z(n);
    for (long j = 0; j < count; ++j) {
        for (int i = 0; i < n; ++i)
            z(i) = normal(eng);
        ps.push_back(GaussianState{centers.mean + root * z, sigma, 1.0});
    }
    return from_list(std::move(ps), hbar, seed);
}

void write_snapshot(std::ostream& os, const ParticleEnsemble& e, const std::vector<std::string>& preamble)
{
    const int n = e.particles.empty() ? 0 : static_cast<int>(e.particles.front().mean.size());
    os << "# qcorr-ensemble 1\n";
    os << std::setprecision(17);
    os << "# dim=" << n / 2 << " hbar=" << e.hbar << " time=" << e.time << " seed=" << e.rng_seed
       << " steps=" << e.step_count << " count=" << e.size() << '\n';
    for (const auto& l : preamble)
        os << "# " << l << '\n';
    os << "weight";
    for (int a = 0; a < n; ++a)
        os << " a" << a;
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b)
            os << " s" << a << '_' << b;
    os << '\n';
    for (const auto& p : e.particles) {
        os << p.weight;
        for (int a = 0; a < n; ++a)
            os << ' ' << p.mean(a);
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b)
                os << ' ' << p.cov(a, b);
        os << '\n';
    }
}

ParticleEnsemble read_snapshot(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("# qcorr-ensemble 1", 0) != 0)
        throw ConfigError("snapshot: missing header");
    if (!std::getline(is, line) || line.rfind("#", 0) != 0)
        throw ConfigError("snapshot: missing metadata line");
    ParticleEnsemble e;
    int d = 0;
    long count = -1;
    {
        std::istringstream ms(line.substr(1));
        std::string tok;
        while (ms >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw ConfigError("snapshot: malformed metadata '" + tok + "'");
            const std::string k = tok.substr(0, eq), v = tok.substr(eq + 1);
            if (k == "dim")
                d = std::stoi(v);
            else if (k == "hbar")
                e.hbar = std::stod(v);
            else if (k == "time")
                e.time = std::stod(v);
            else if (k == "seed")
                e.rng_seed = std::stoull(v);
            else if (k == "steps")
                e.step_count = std::stoull(v);
            else if (k == "count")
                count = std::stol(v);
            else
                throw ConfigError("snapshot: unknown metadata key '" + k + "'");
        }
    }
    if (d <= 0 || count < 0)
        throw ConfigError("snapshot: dim and count are required");
    while (std::getline(is, line) && line.rfind("#", 0) == 0) {
    }  // preamble comments, then the column header
    const int n = 2 * d;
    for (long j = 0; j < count; ++j) {
        if (!std::getline(is, line))
            throw ConfigError("snapshot: fewer rows than declared");
        std::istringstream rs(line);
        GaussianState g;
        g.mean.resize(n);
        g.cov.resize(n, n);
        rs >> g.weight;
        for (int a = 0; a < n; ++a)
            rs >> g.mean(a);
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b) {
                rs >> g.cov(a, b);
                g.cov(b, a) = g.cov(a, b);
            }
        if (!rs)
            throw ConfigError("snapshot: malformed row " + std::to_string(j));
        e.particles.push_back(std::move(g));
    }
    return e;
}

MixturePropagator::MixturePropagator(const DynamicsModel& model, PropagatorOptions opts)
    : model_(model), opts_(opts)
{
    frictionless_ = opts.branch == FrictionBranch::automatic ? model.frictionless()
                                                            : opts.branch == FrictionBranch::frictionless;
    if (model.closed()) {
        const int deg = model.hamiltonian().polynomial_degree();
        if (deg < 0 || deg > 2)
            throw SolverError("MixturePropagator: no diffusion (Z = 0); the covariance split needs lambda_min[Omega] > 0");
        closed_ = true;
        lambda_star_ = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    if (std::isnan(opts.lambda_star)) {
        const DiffusionStrength z = diffusion_strength(model, opts.branch);
        if (!(z.z > 0))
            throw SolverError("MixturePropagator: relative diffusion strength Z = 0; the covariance split needs "
                              "lambda_min[Omega] > 0");
        lambda_star_ = 0.5 * z.z;
    } else {
        lambda_star_ = opts.lambda_star;
    }
    if (!(lambda_star_ > 0 && lambda_star_ <= 1))
        throw DomainError("MixturePropagator: lambda_star must lie in (0, 1]");
}

std::vector<ParticleEnsemble> MixturePropagator::evolve(const ParticleEnsemble& init,
                                                        const std::vector<double>& times, double dt) const
{
    if (!(dt > 0))
        throw DomainError("MixturePropagator: dt must be positive");
    if (init.dim() != model_.dim())
        throw DimensionError("MixturePropagator: ensemble and model dimensions differ");
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] < init.time || (k > 0 && times[k] < times[k - 1]))
            throw DomainError("MixturePropagator: output times must be ascending and not precede the ensemble");

    const long m = init.size();
    const std::size_t nt = times.size();
    std::vector<ParticleEnsemble> out(nt, init);
    for (std::size_t k = 0; k < nt; ++k) {
        out[k].time = times[k];
        out[k].step_stats = init.step_stats;
    }

    const ParticleStepper stepper{model_,      detail::DriftEvaluator(model_), lambda_star_, frictionless_,
                                  opts_.drift, opts_.reproject,                closed_};
    const int workers = std::max(1, std::min<int>(opts_.workers, static_cast<int>(std::max<long>(1, m))));
    std::vector<std::vector<StepStats>> stats(workers, std::vector<StepStats>(nt));
    std::vector<std::vector<std::uint64_t>> counts(workers, std::vector<std::uint64_t>(nt, 0));
    struct Failure {
        long index = std::numeric_limits<long>::max();
        std::exception_ptr error;
    };
    std::vector<Failure> failures(workers);

    auto run = [&](int w, long begin, long end) {
        for (long i = begin; i < end; ++i) {
            try {
                auto eng = particle_engine(init.rng_seed, static_cast<std::uint64_t>(i), init.step_count);
                GaussianState g = init.particles[static_cast<std::size_t>(i)];
                double t = init.time;
                std::uint64_t taken = 0;
                for (std::size_t k = 0; k < nt; ++k) {
                    while (t < times[k] - 1e-12 * std::max(1.0, std::abs(times[k]))) {
                        const double h = std::min(dt, times[k] - t);
                        stepper.advance(g, h, eng, stats[w][k], i);
                        t += h;
                        ++taken;
                    }
                    out[k].particles[static_cast<std::size_t>(i)] = g;
                    counts[w][k] = taken;
                }
            } catch (...) {
                failures[w] = Failure{i, std::current_exception()};
                return;
            }
        }
    };

    if (workers == 1) {
        run(0, 0, m);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (m + workers - 1) / workers;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(run, w, w * chunk, std::min(m, (w + 1) * chunk));
        for (auto& t : pool)
            t.join();
    }
    const Failure* first = nullptr;
    for (const auto& f : failures)
        if (f.error && (!first || f.index < first->index))
            first = &f;
    if (first)
        std::rethrow_exception(first->error);

    std::vector<StepStats> series;
    for (std::size_t k = 0; k < nt; ++k) {
        StepStats s;
        s.time = times[k];
        std::uint64_t taken = 0;
        for (int w = 0; w < workers; ++w) {
            merge(s, stats[w][k]);
            taken = std::max(taken, counts[w][k]);
        }
        s.min_lambda_ratio = std::min(s.min_lambda_ratio, out[k].min_lambda_ratio());
        series.push_back(s);
        out[k].step_count = init.step_count + taken;
        out[k].step_stats.insert(out[k].step_stats.end(), series.begin(), series.end());
    }
    return out;
}

ParticleEnsemble MixturePropagator::evolve(const ParticleEnsemble& init, double t_final, double dt) const
{
    if (t_final == init.time)
        return init;
    return evolve(init, std::vector<double>{t_final}, dt).front();
}

ParticleEnsemble MixturePropagator::step(const ParticleEnsemble& init, double dt) const
{
    return evolve(init, std::vector<double>{init.time + dt}, dt).front();
}

ParticleEnsemble step(const ParticleEnsemble& ensemble, const DynamicsModel& model, double dt,
                      const PropagatorOptions& opts)
{
    return MixturePropagator(model, opts).step(ensemble, dt);
}

ParticleEnsemble evolve(const ParticleEnsemble& ensemble, const DynamicsModel& model, double t_final, double dt,
                        const PropagatorOptions& opts)
{
    if (t_final < ensemble.time)
        throw DomainError("evolve: t_final precedes the ensemble time");
    if (t_final == ensemble.time)
        return ensemble;
    return MixturePropagator(model, opts).evolve(ensemble, t_final, dt);
}

void gauss_hermite(int q, Vec& nodes, Vec& weights)
{
    if (q < 1)
        throw DomainError("gauss_hermite: order must be positive");
    // Golub–Welsch on the Jacobi matrix of He_n: off-diagonal √k.
    Mat j = Mat::Zero(q, q);
    for (int k = 1; k < q; ++k)
        j(k, k - 1) = j(k - 1, k) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Mat> es(j);
    nodes = es.eigenvalues();
    weights = es.eigenvectors().row(0).transpose().array().square();
    weights /= weights.sum();
}

cplx mixture_expectation(const ParticleEnsemble& ensemble, const Symbol& observable, int q, bool* exact)
{
    if (ensemble.particles.empty())
        throw DomainError("mixture_expectation: empty ensemble");
    const int n = static_cast<int>(ensemble.particles.front().mean.size());
    if (observable.phase_dim() != n)
        throw DimensionError("mixture_expectation: observable dimension mismatch");
    if (exact) {
        const int deg = observable.polynomial_degree();
        *exact = deg >= 0 && deg <= 2 * q - 1;
    }
    Vec nodes, w;
    gauss_hermite(q, nodes, w);
    long total = 1;
    for (int a = 0; a < n; ++a)
        total *= q;
    cplx sum = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(n));
    Vec xi(n), beta(n);
    for (const auto& p : ensemble.particles) {
        Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(p.cov));
        const Mat root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
        cplx acc = 0.0;
        for (long t = 0; t < total; ++t) {
            long r = t;
            double wt = 1.0;
            for (int a = 0; a < n; ++a) {
                const int k = static_cast<int>(r % q);
                r /= q;
                xi(a) = nodes(k);
                wt *= w(k);
            }
            beta = p.mean + root * xi;
            acc += wt * observable(beta);
        }
        sum += p.weight * acc;
    }
    return sum;
}

PhaseSpaceGrid mixture_wigner(const ParticleEnsemble& ensemble, const Grid1D& xgrid, double* captured)
{
    if (ensemble.dim() != 1)
        throw DimensionError("mixture_wigner: one degree of freedom only");
    PhaseSpaceGrid g(xgrid, ensemble.hbar);
    const int n = xgrid.n;
    const double dp = g.dp();
    const double p0 = g.p(0);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (const auto& s : ensemble.particles) {
        const Mat inv = s.cov.inverse();
        const double norm = s.weight / (2.0 * std::numbers::pi * std::sqrt(s.cov.determinant()));
        const double rx = 10.0 * std::sqrt(s.cov(0, 0));
        const double rp = 10.0 * std::sqrt(s.cov(1, 1));
        const int ilo = std::max(0, static_cast<int>(std::floor((s.mean(0) - rx - xgrid.x0) / xgrid.dx)));
        const int ihi = std::min(n - 1, static_cast<int>(std::ceil((s.mean(0) + rx - xgrid.x0) / xgrid.dx)));
        const int klo = std::max(0, static_cast<int>(std::floor((s.mean(1) - rp - p0) / dp)));
        const int khi = std::min(n - 1, static_cast<int>(std::ceil((s.mean(1) + rp - p0) / dp)));
        for (int k = klo; k <= khi; ++k) {
            const double y = p0 + k * dp - s.mean(1);
            for (int i = ilo; i <= ihi; ++i) {
                const double x = xgrid.x(i) - s.mean(0);
                const double q = inv(0, 0) * x * x + 2.0 * inv(0, 1) * x * y + inv(1, 1) * y * y;
                acc(i, k) += norm * std::exp(-0.5 * q);
            }
        }
    }
    g.values = acc.cast<cplx>();
    if (captured)
        *captured = g.integral().real();
    return g;
}

CVec gaussian_wavefunction(const GaussianState& g, const Grid1D& grid, double hbar)
{
    if (g.dim() != 1)
        throw DimensionError("gaussian_wavefunction: one degree of freedom only");
    g.validate(hbar, true);
    const double sxx = g.cov(0, 0);
    const double sxp = g.cov(0, 1);
    const cplx a = cplx(1.0, -2.0 * sxp / hbar) / (4.0 * sxx);
    CVec psi(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        const double dxm = x - g.mean(0);
        psi(i) = std::exp(-a * dxm * dxm + cplx(0.0, g.mean(1) * x / hbar));
    }
    const double nrm = psi.norm();
    if (!(nrm > 0))
        throw DomainError("gaussian_wavefunction: state lies outside the grid");
    return psi / nrm;
}

GridState mixture_density_matrix(const ParticleEnsemble& ensemble, const Grid1D& xgrid)
{
    if (ensemble.dim() != 1)
        throw DimensionError("mixture_density_matrix: one degree of freedom only");
    CMat psi(xgrid.n, ensemble.size());
    for (long j = 0; j < ensemble.size(); ++j) {
        const auto& p = ensemble.particles[static_cast<std::size_t>(j)];
        psi.col(j) = std::sqrt(p.weight) * gaussian_wavefunction(p, xgrid, ensemble.hbar);
    }
    GridState s;
    s.grid = xgrid;
    s.hbar = ensemble.hbar;
    s.rho = psi * psi.adjoint();
    return s;
}

}  // namespace qcorr
