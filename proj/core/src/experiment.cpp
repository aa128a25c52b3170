#include "qcorr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qcorr/weyl.hpp"

namespace qcorr {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kClassicalStream = 0x9e3779b97f4a7c15ULL;

Vec vec2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

GaussianState initial_gaussian(const ScenarioConfig& cfg)
{
    GaussianState g;
    g.mean = vec2(cfg.mean_x, cfg.mean_p);
    if (cfg.coherent) {
        g.cov = 0.5 * cfg.hbar * Mat::Identity(2, 2);
    } else {
        g.cov.resize(2, 2);
        g.cov << cfg.cov_xx, cfg.cov_xp, cfg.cov_xp, cfg.cov_pp;
    }
    return g;
}

ParticleEnsemble load_snapshot(const ScenarioConfig& cfg)
{
    std::ifstream in(cfg.initial_snapshot);
    if (!in)
        throw ConfigError("initial.snapshot: cannot open '" + cfg.initial_snapshot + "'");
    ParticleEnsemble e = read_snapshot(in);
    if (e.dim() != 1)
        throw ConfigError("initial.snapshot: only d = 1 ensembles are supported");
    if (std::abs(e.hbar - cfg.hbar) > 1e-12 * cfg.hbar)
        throw ConfigError("initial.snapshot: snapshot hbar differs from model.hbar");
    e.validate();
    e.time = 0.0;
    e.step_count = 0;
    e.step_stats.clear();
    return e;
}

std::vector<std::string> preamble(const ScenarioConfig& cfg) { return emit_config_lines(cfg); }

std::map<std::string, std::string> meta(const ScenarioConfig& cfg)
{
    std::map<std::string, std::string> m;
    for (const auto& line : emit_config_lines(cfg)) {
        const auto eq = line.find(" = ");
        m[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return m;
}

void write_manifest(const ScenarioConfig& cfg, const ScenarioResult& r)
{
    nlohmann::ordered_json j;
    j["name"] = cfg.name;
    j["status"] = r.complete ? "complete" : "partial";
    j["error"] = r.error;
    j["seed"] = cfg.seed;
    j["config"] = emit_config_lines(cfg);
    j["warnings"] = r.warnings;
    j["artifacts"] = r.artifacts;
    std::vector<double> times;
    for (const auto& rep : r.reports)
        times.push_back(rep.time);
    j["completed_times"] = times;
    std::ofstream(fs::path(cfg.out_dir) / "manifest.json") << j.dump(2) << '\n';
}

std::string point_key(double hbar, double gamma, std::uint64_t seed)
{
    return format_double(hbar) + '|' + format_double(gamma) + '|' + std::to_string(seed);
}

std::string sanitize(std::string s)
{
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

constexpr const char* kSweepHeader = "hbar,gamma,seed,status,rate,rate_se,r2,final_gap,mc_se,z,b_cl,b_q,error";

std::string sweep_line(const SweepRow& r)
{
    std::string s = format_double(r.hbar) + ',' + format_double(r.gamma) + ',' + std::to_string(r.seed) + ',' +
                    r.status;
    for (double v : {r.rate, r.rate_se, r.r2, r.final_gap, r.mc_se, r.z, r.b_cl, r.b_q})
        s += ',' + format_double(v);
    return s + ',' + sanitize(r.error);
}

SweepRow parse_sweep_line(const std::string& line)
{
    std::vector<std::string> f;
    std::istringstream is(line);
    std::string cell;
    while (std::getline(is, cell, ','))
        f.push_back(cell);
    if (f.size() == 12)
        f.emplace_back();
    if (f.size() != 13)
        throw ConfigError("sweep table: malformed row '" + line + "'");
    auto num = [](const std::string& s) { return s == "nan" ? kNotComputed : std::stod(s); };
    SweepRow r;
    r.hbar = num(f[0]);
    r.gamma = num(f[1]);
    r.seed = std::stoull(f[2]);
    r.status = f[3];
    r.rate = num(f[4]);
    r.rate_se = num(f[5]);
    r.r2 = num(f[6]);
    r.final_gap = num(f[7]);
    r.mc_se = num(f[8]);
    r.z = num(f[9]);
    r.b_cl = num(f[10]);
    r.b_q = num(f[11]);
    r.error = f[12];
    return r;
}

// Base-config lines that identify a sweep table, excluding per-point and run-local keys.
std::vector<std::string> sweep_identity(const SweepSpec& spec)
{
    std::vector<std::string> out;
    for (const auto& line : emit_config_lines(spec.base)) {
        const std::string key = line.substr(0, line.find(" = "));
        if (key == "model.hbar" || key == "model.gamma" || key == "seed" || key == "workers" ||
            key == "output.dir" || key == "output.format")
            continue;
        out.push_back(line);
    }
    out.push_back("sweep.window = " + format_double(spec.window_lo) + ' ' + format_double(spec.window_hi));
    return out;
}

SweepRow run_point(const SweepSpec& spec, double hbar, double gamma, bool write)
{
    SweepRow row;
    row.hbar = hbar;
    row.gamma = gamma;
    row.seed = spec.base.seed;
    ScenarioConfig cfg = spec.base;
    cfg.hbar = hbar;
    cfg.gamma = gamma;
    cfg.workers = 1;
    cfg.name = spec.base.name + " hbar=" + format_double(hbar) + " gamma=" + format_double(gamma);
    cfg.out_dir = (fs::path(spec.base.out_dir) / "points" /
                   ("h" + format_double(hbar) + "_g" + format_double(gamma) + "_s" + std::to_string(cfg.seed)))
                      .string();
    try {
        const DynamicsModel model = build_model(cfg);
        try {
            row.z = diffusion_strength(model).z;
        } catch (const DomainError&) {
            row.z = 0.0;
        }
        row.b_cl = anharmonicity_classical(model);
        if (spec.quantum_anharmonicity)
            row.b_q = anharmonicity_quantum(model).b_q;
        const ScenarioResult res = run_scenario(cfg, write);
        const LinearFit fit = gap_growth(res.reports, cfg.t_end, spec.window_lo, spec.window_hi);
        row.rate = fit.n >= 2 ? fit.slope : kNotComputed;
        row.rate_se = fit.n >= 2 ? fit.slope_se : kNotComputed;
        row.r2 = fit.n >= 2 ? fit.r2 : kNotComputed;
        if (!res.reports.empty()) {
            double g = 0.0;
            for (const auto& [k, o] : res.reports.back().observables)
                if (std::isfinite(o.gap))
                    g = std::max(g, o.gap);
            row.final_gap = g;
        }
        double se = 0.0;
        for (const auto& rep : res.reports)
            if (rep.time >= spec.window_lo * cfg.t_end - 1e-12 && rep.time <= spec.window_hi * cfg.t_end + 1e-12)
                for (const auto& [k, o] : rep.observables)
                    if (std::isfinite(o.classical_se))
                        se = std::max(se, o.classical_se);
        row.mc_se = se;
        row.status = res.complete ? "ok" : "failed";
        row.error = res.error;
    } catch (const Error& e) {
        row.status = "failed";
        row.error = e.what();
    }
    return row;
}

}  // namespace

DynamicsModel build_model(const ScenarioConfig& cfg)
{
    Symbol h;
    switch (cfg.hamiltonian) {
    case HamiltonianKind::harmonic:
        h = symbols::harmonic(cfg.omega);
        break;
    case HamiltonianKind::quartic:
        h = symbols::quartic(cfg.anharmonic);
        break;
    case HamiltonianKind::double_well:
        h = symbols::double_well(4 * cfg.anharmonic, cfg.well_depth);
        break;
    case HamiltonianKind::cosine_lattice:
        h = symbols::cosine_lattice(cfg.cosine_amplitude, cfg.cosine_wavenumber);
        break;
    case HamiltonianKind::zero:
        h = symbols::constant(1, 0.0);
        break;
    }
    std::vector<Symbol> ls;
    if (cfg.gamma > 0) {
        const double s = std::sqrt(cfg.gamma);
        for (const auto& l : cfg.lindblad) {
            CVec c(2);
            c << s * l.x_coeff, s * l.p_coeff;
            ls.push_back(symbols::linear(c));
        }
    }
    ProbeOptions probes;
    probes.count = cfg.probes;
    return DynamicsModel(h, ls, cfg.hbar, DomainBox::symmetric(vec2(cfg.box_x, cfg.box_p)), Mat(), probes);
}

Grid1D quantum_grid(const ScenarioConfig& cfg)
{
    int n = cfg.quantum_n;
    if (n == 0) {
        const double e = cfg.quantum_extent;
        // balanced: length √(2πħN) ≥ 2E; fixed length L: p span 2πħN/L ≥ 2E
        const double need = cfg.quantum_length > 0 ? e * cfg.quantum_length / (M_PI * cfg.hbar)
                                                   : 2 * e * e / (M_PI * cfg.hbar);
        n = 16;
        while (n < need)
            n *= 2;
    }
    return cfg.quantum_length > 0 ? Grid1D::centered(n, cfg.quantum_length) : Grid1D::balanced(n, cfg.hbar);
}

std::vector<double> output_times(const ScenarioConfig& cfg)
{
    std::vector<double> t;
    if (cfg.outputs == 1)
        return {cfg.t_end};
    for (int k = 0; k < cfg.outputs; ++k)
        t.push_back(cfg.t_end * k / (cfg.outputs - 1));
    return t;
}

Symbol observable_symbol(const std::string& name, double clip)
{
    Symbol s;
    if (name == "one")
        return symbols::constant(1, 1.0);
    if (name == "x")
        s = symbols::position();
    else if (name == "p")
        s = symbols::momentum();
    else if (name == "x2")
        s = symbols::polynomial(1, {{{2, 0}, 1.0}});
    else if (name == "p2")
        s = symbols::polynomial(1, {{{0, 2}, 1.0}});
    else if (name == "xp")
        s = symbols::polynomial(1, {{{1, 1}, 1.0}});
    else
        throw ConfigError("unknown observable '" + name + "'");
    return clip > 0 ? symbols::clipped(s, clip) : s;
}

ParticleEnsemble initial_ensemble(const ScenarioConfig& cfg)
{
    if (!cfg.initial_snapshot.empty()) {
        ParticleEnsemble e = load_snapshot(cfg);
        e.rng_seed = cfg.seed;
        return e;
    }
    return ParticleEnsemble::replicated(initial_gaussian(cfg), cfg.particles, cfg.hbar, cfg.seed);
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, bool write)
{
    validate_config(cfg);
    ScenarioResult result;
    const DynamicsModel model = build_model(cfg);
    for (const auto& c : admissibility_report(model).checks)
        if (!c.pass)
            result.warnings.push_back(c.name + (c.note.empty() ? "" : ": " + c.note));

    const std::vector<double> times = output_times(cfg);
    const ParticleEnsemble init =
        cfg.initial_snapshot.empty() ? ParticleEnsemble::single(initial_gaussian(cfg), cfg.hbar) : load_snapshot(cfg);
    const bool need_grid = cfg.run_quantum || (cfg.l1_distance && cfg.run_mixture && cfg.run_classical);
    const Grid1D grid = need_grid ? quantum_grid(cfg) : Grid1D{};

    std::vector<Symbol> obs;
    for (const auto& name : cfg.observables)
        obs.push_back(observable_symbol(name, cfg.clip));

    if (write) {
        fs::create_directories(cfg.out_dir);
        if (cfg.snapshots)
            fs::create_directories(fs::path(cfg.out_dir) / "snapshots");
    }

    GridState quantum;
    std::vector<CMat> obs_ops;
    std::unique_ptr<LindbladSolver> lindblad;
    LindbladDiagnostics qdiag;
    double quantum_dt = cfg.quantum_dt;
    ParticleEnsemble mixture;
    std::unique_ptr<MixturePropagator> propagator;
    ClassicalEnsemble cloud;
    LangevinOptions lopts;
    lopts.scheme = cfg.classical_scheme;
    lopts.workers = cfg.workers;

    auto finish = [&]() {
        if (write) {
            const std::string report = cfg.format == OutputFormat::csv ? "report.csv" : "report.json";
            std::ofstream os(fs::path(cfg.out_dir) / report);
            if (cfg.format == OutputFormat::csv)
                write_reports_csv(os, result.reports, preamble(cfg));
            else
                write_reports_json(os, result.reports, meta(cfg));
            result.artifacts.insert(result.artifacts.begin(), report);
            write_manifest(cfg, result);
        }
        return result;
    };

    try {
        if (cfg.run_quantum) {
            quantum = mixture_density_matrix(init, grid);
            const LindbladOperators ops = LindbladOperators::quantize(model, grid);
            if (cfg.quantum_scheme == LindbladScheme::rk4)
                quantum_dt = std::min(quantum_dt, ops.stable_dt());
            lindblad = std::make_unique<LindbladSolver>(ops, cfg.quantum_scheme, quantum_dt);
            for (const auto& s : obs)
                obs_ops.push_back(weyl_quantize(s, grid, cfg.hbar));
        }
        if (cfg.run_mixture) {
            PropagatorOptions popts;
            popts.lambda_star = cfg.lambda_star;
            popts.drift = cfg.mixture_drift;
            popts.workers = cfg.workers;
            propagator = std::make_unique<MixturePropagator>(model, popts);
            mixture = initial_ensemble(cfg);
        }
        if (cfg.run_classical)
            cloud = ClassicalEnsemble::sample(init.particles, cfg.points, cfg.seed ^ kClassicalStream);
    } catch (const SolverError& e) {
        result.error = e.what();
        return finish();
    }

    double t_prev = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double t = times[k];
        try {
            if (t > t_prev) {
                if (cfg.run_quantum)
                    lindblad->evolve(quantum, t_prev, t, &qdiag);
                if (cfg.run_mixture)
                    mixture = propagator->evolve(mixture, std::vector<double>{t}, cfg.mixture_dt).front();
                if (cfg.run_classical)
                    cloud = langevin_evolve(cloud, model, {t}, cfg.classical_dt, lopts).front();
            }
        } catch (const SolverError& e) {
            result.error = e.what();
            return finish();
        } catch (const DomainError& e) {
            result.error = e.what();
            return finish();
        }
        t_prev = t;

        ComparisonReport rep;
        rep.time = t;
        double max_se = 0.0;
        for (std::size_t j = 0; j < obs.size(); ++j) {
            ObservableRow& row = rep.observables[cfg.observables[j]];
            if (cfg.run_quantum)
                row.quantum = quantum.expectation(obs_ops[j]).real();
            if (cfg.run_mixture)
                row.mixture = mixture_expectation(mixture, obs[j]).real();
            if (cfg.run_classical) {
                const MonteCarloEstimate est = classical_expectation(cloud, obs[j]);
                row.classical = est.mean;
                row.classical_se = est.std_error;
                max_se = std::max(max_se, est.std_error);
            }
        }
        rep.finalize_gaps();
        if (cfg.run_quantum) {
            rep.error_estimates["quantum_trace_drift"] = qdiag.max_trace_drift;
            rep.error_estimates["quantum_min_eigenvalue"] = min_eigenvalue(quantum);
            rep.error_estimates["quantum_dt"] = quantum_dt;
        }
        if (cfg.run_mixture) {
            rep.error_estimates["mixture_min_lambda_ratio"] = mixture.min_lambda_ratio();
            rep.error_estimates["mixture_lambda_star"] = propagator->lambda_star();
        }
        if (cfg.run_classical)
            rep.error_estimates["classical_max_se"] = max_se;
        if (cfg.trace_distance && cfg.run_quantum && cfg.run_mixture)
            rep.trace_distance = trace_distance(quantum, mixture_density_matrix(mixture, grid));
        if (cfg.l1_distance && cfg.run_mixture && cfg.run_classical) {
            double captured = 0.0;
            const PhaseSpaceGrid wm = mixture_wigner(mixture, grid, &captured);
            rep.l1_distance = l1_distance(wm, classical_kde(cloud, grid, cfg.hbar));
            rep.error_estimates["wigner_captured"] = captured;
        }
        result.reports.push_back(std::move(rep));

        if (write && cfg.snapshots) {
            const std::string idx = std::to_string(k);
            if (cfg.run_mixture) {
                const std::string name = "snapshots/mixture_" + idx + ".txt";
                std::ofstream os(fs::path(cfg.out_dir) / name);
                write_snapshot(os, mixture, preamble(cfg));
                result.artifacts.push_back(name);
            }
            if (cfg.run_quantum) {
                const std::string name = "snapshots/quantum_" + idx + ".bin";
                std::ofstream os(fs::path(cfg.out_dir) / name, std::ios::binary);
                write_binary(os, quantum);
                result.artifacts.push_back(name);
            }
        }
    }
    result.complete = true;
    return finish();
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    LinearFit f;
    f.n = static_cast<int>(x.size());
    if (f.n < 2) {
        f.slope = f.intercept = f.slope_se = f.r2 = kNotComputed;
        return f;
    }
    double mx = 0, my = 0;
    for (int i = 0; i < f.n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= f.n;
    my /= f.n;
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < f.n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (int i = 0; i < f.n; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        sse += r * r;
    }
    f.slope_se = f.n > 2 ? std::sqrt(sse / (f.n - 2) / sxx) : 0.0;
    f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
    return f;
}

LinearFit gap_growth(const std::vector<ComparisonReport>& reports, double t_end, double lo, double hi)
{
    std::vector<double> t, g;
    for (const auto& r : reports) {
        if (r.time < lo * t_end - 1e-12 || r.time > hi * t_end + 1e-12)
            continue;
        double gap = kNotComputed;
        for (const auto& [k, o] : r.observables)
            if (std::isfinite(o.gap))
                gap = std::isnan(gap) ? o.gap : std::max(gap, o.gap);
        if (std::isfinite(gap)) {
            t.push_back(r.time);
            g.push_back(gap);
        }
    }
    return linear_fit(t, g);
}

std::vector<PowerLawFit> power_law_fits(const std::vector<SweepRow>& rows)
{
    std::vector<PowerLawFit> fits;
    auto fit_axis = [&](bool vs_hbar) {
        std::map<double, std::vector<const SweepRow*>> groups;
        for (const auto& r : rows)
            if (r.status == "ok" && std::isfinite(r.rate) && r.rate > 0 && (vs_hbar || r.gamma > 0))
                groups[vs_hbar ? r.gamma : r.hbar].push_back(&r);
        for (const auto& [fixed, pts] : groups) {
            if (pts.size() < 2)
                continue;
            std::vector<double> x, y;
            for (const SweepRow* r : pts) {
                x.push_back(std::log(vs_hbar ? r->hbar : r->gamma));
                y.push_back(std::log(r->rate));
            }
            const LinearFit lf = linear_fit(x, y);
            PowerLawFit p;
            p.axis = vs_hbar ? "hbar" : "gamma";
            p.fixed = fixed;
            p.exponent = lf.slope;
            p.exponent_se = lf.slope_se;
            p.r2 = lf.r2;
            p.points = lf.n;
            fits.push_back(p);
        }
    };
    fit_axis(true);
    fit_axis(false);
    return fits;
}

SweepResult run_sweep(const SweepSpec& spec, bool write)
{
    validate_sweep(spec);
    const fs::path dir(spec.base.out_dir);
    const fs::path table = dir / "sweep.csv";
    const std::vector<std::string> identity = sweep_identity(spec);

    std::map<std::string, SweepRow> existing;
    bool fresh = true;
    if (write && fs::exists(table)) {
        fresh = false;
        std::ifstream in(table);
        std::string line;
        std::vector<std::string> header;
        while (std::getline(in, line)) {
            if (line.rfind("# ", 0) == 0) {
                header.push_back(line.substr(2));
                continue;
            }
            if (line.empty() || line == kSweepHeader)
                continue;
            SweepRow r = parse_sweep_line(line);
            existing[point_key(r.hbar, r.gamma, r.seed)] = r;
        }
        if (header != identity)
            throw ConfigError("sweep: " + table.string() + " was produced by a different configuration");
    }

    std::vector<std::pair<double, double>> points;
    for (double g : spec.gamma)
        for (double h : spec.hbar)
            points.emplace_back(h, g);

    const std::size_t n = points.size();
    std::vector<SweepRow> rows(n);
    std::vector<bool> reused(n, false), done(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = existing.find(point_key(points[i].first, points[i].second, spec.base.seed));
        if (it != existing.end() && it->second.status == "ok") {
            rows[i] = it->second;
            reused[i] = done[i] = true;
        }
    }

    std::ofstream out;
    if (write) {
        fs::create_directories(dir);
        out.open(table, std::ios::app);
        if (fresh) {
            for (const auto& l : identity)
                out << "# " << l << '\n';
            out << kSweepHeader << '\n';
        }
    }

    std::mutex m;
    std::condition_variable cv;
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            if (reused[i])
                continue;
            SweepRow r = run_point(spec, points[i].first, points[i].second, write);
            {
                std::lock_guard<std::mutex> lock(m);
                rows[i] = std::move(r);
                done[i] = true;
            }
            cv.notify_all();
        }
    };
    const int workers = std::max(1, std::min<int>(spec.base.workers, static_cast<int>(n)));
    std::vector<std::thread> pool;
    if (workers > 1)
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    else
        worker();

    // rows are appended in point order as they complete
    for (std::size_t i = 0; i < n; ++i) {
        std::unique_lock<std::mutex> lock(m);
        cv.wait(lock, [&] { return done[i]; });
        if (write && !reused[i])
            out << sweep_line(rows[i]) << '\n' << std::flush;
    }
    for (auto& t : pool)
        t.join();

    SweepResult res;
    res.rows = rows;
    for (const auto& r : rows)
        if (r.status != "ok")
            ++res.failures;
    res.fits = power_law_fits(rows);

    if (write) {
        std::ofstream fc(dir / "sweep_fits.csv");
        for (const auto& l : identity)
            fc << "# " << l << '\n';
        fc << "# seed = " << spec.base.seed << '\n';
        fc << "axis,fixed,exponent,exponent_se,r2,points\n";
        for (const auto& f : res.fits)
            fc << f.axis << ',' << format_double(f.fixed) << ',' << format_double(f.exponent) << ','
               << format_double(f.exponent_se) << ',' << format_double(f.r2) << ',' << f.points << '\n';
        nlohmann::ordered_json j;
        j["config"] = identity;
        j["seed"] = spec.base.seed;
        j["fits"] = nlohmann::json::array();
        for (const auto& f : res.fits)
            j["fits"].push_back({{"axis", f.axis},
                                 {"fixed", f.fixed},
                                 {"exponent", f.exponent},
                                 {"exponent_se", f.exponent_se},
                                 {"r2", f.r2},
                                 {"points", f.points}});
        std::ofstream(dir / "sweep_fits.json") << j.dump(2) << '\n';
    }
    return res;
}

}  // namespace qcorr
