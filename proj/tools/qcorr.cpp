#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcorr/experiment.hpp"
#include "qcorr/weyl.hpp"

namespace fs = std::filesystem;
using namespace qcorr;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSolver = 3, kPartialSweep = 4 };

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
};

void add_overrides(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out-dir", o.out_dir, "output directory");
    cmd->add_option("--format", o.format, "report format")->check(CLI::IsMember({"csv", "json"}));
}

void apply(const Overrides& o, ScenarioConfig& c)
{
    if (o.seed)
        c.seed = *o.seed;
    if (o.workers)
        c.workers = *o.workers;
    if (o.out_dir)
        c.out_dir = *o.out_dir;
    if (o.format)
        c.format = *o.format == "json" ? OutputFormat::json : OutputFormat::csv;
}

ScenarioConfig load_config(const std::string& path, const std::string& preset)
{
    if (!path.empty())
        return parse_config(read_text_file(path));
    if (!preset.empty())
        return preset_config(preset);
    throw ConfigError("a config file or --preset is required");
}

int cmd_run(const std::string& path, const std::string& preset, const Overrides& o)
{
    ScenarioConfig cfg = load_config(path, preset);
    apply(o, cfg);
    const ScenarioResult r = run_scenario(cfg);
    for (const auto& w : r.warnings)
        std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << r.reports.size() << " reports to " << cfg.out_dir << '\n';
    if (!r.complete) {
        std::cerr << "error: " << r.error << '\n';
        return kSolver;
    }
    return kOk;
}

int cmd_sweep(const std::string& path, const Overrides& o)
{
    SweepSpec spec = parse_sweep(read_text_file(path));
    apply(o, spec.base);
    const SweepResult r = run_sweep(spec);
    for (const auto& row : r.rows)
        std::cout << "hbar=" << format_double(row.hbar) << " gamma=" << format_double(row.gamma) << ' ' << row.status
                  << " rate=" << format_double(row.rate) << " +- " << format_double(row.rate_se)
                  << (row.error.empty() ? "" : "  (" + row.error + ")") << '\n';
    for (const auto& f : r.fits)
        std::cout << "rate ~ " << f.axis << "^" << format_double(f.exponent) << " +- " << format_double(f.exponent_se)
                  << " (R2 " << format_double(f.r2) << ", " << f.points << " points, "
                  << (f.axis == "hbar" ? "gamma=" : "hbar=") << format_double(f.fixed) << ")\n";
    return r.failures > 0 ? kPartialSweep : kOk;
}

int cmd_validate(const std::string& path, const std::string& preset, const Overrides& o, bool quantum)
{
    ScenarioConfig cfg = load_config(path, preset);
    apply(o, cfg);
    validate_config(cfg);
    const DynamicsModel model = build_model(cfg);
    nlohmann::ordered_json j;
    j["config"] = emit_config_lines(cfg);
    const AdmissibilityReport adm = admissibility_report(model);
    j["admissible"] = adm.pass();
    for (const auto& c : adm.checks)
        j["checks"].push_back({{"name", c.name},
                               {"value", c.value},
                               {"reference", c.reference},
                               {"threshold", c.threshold},
                               {"pass", c.pass},
                               {"note", c.note}});
    try {
        const DiffusionStrength z = diffusion_strength(model);
        j["z"] = z.z;
        j["frictionless"] = z.frictionless;
        j["lambda_star"] = z.z / 2;
    } catch (const DomainError& e) {
        j["z"] = 0.0;
        j["z_note"] = e.what();
    }
    j["b_cl"] = anharmonicity_classical(model);
    if (quantum) {
        const QuantumAnharmonicity q = anharmonicity_quantum(model);
        j["b_q"] = q.b_q;
        j["b_q_prime"] = q.b_q_prime;
        j["b_q_truncated"] = q.truncated;
    }
    const CharacteristicScales s = characteristic_scales(model);
    j["t_harm"] = s.t_harm;
    j["s_anh"] = s.s_anh;
    j["s_h"] = s.s_h;
    const Grid1D g = quantum_grid(cfg);
    j["quantum_grid"] = {{"n", g.n}, {"dx", g.dx}, {"dp", g.dp(cfg.hbar)}};
    if (cfg.format == OutputFormat::json) {
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "key,value\n";
        for (const auto& [k, v] : j.items())
            if (k != "config" && k != "checks")
                std::cout << k << ',' << v.dump() << '\n';
        for (const auto& c : adm.checks)
            std::cout << "check." << c.name << ',' << (c.pass ? "pass" : "fail") << ' ' << format_double(c.value)
                      << '\n';
    }
    return kOk;
}

void write_marginals(const PhaseSpaceGrid& w, const fs::path& file)
{
    std::ofstream os(file);
    os << std::setprecision(12) << "index,x,density_x,p,density_p\n";
    for (int i = 0; i < w.n(); ++i)
        os << i << ',' << w.x(i) << ',' << w.values.row(i).real().sum() * w.dp() << ',' << w.p(i) << ','
           << w.values.col(i).real().sum() * w.dx() << '\n';
}

int cmd_transform(const std::string& path, int n, double extent, const Overrides& o)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open '" + path + "'");
    const fs::path out = o.out_dir ? fs::path(*o.out_dir) : fs::path(path).parent_path();
    fs::create_directories(out.empty() ? fs::path(".") : out);
    const std::string stem = fs::path(path).stem().string();
    char first = static_cast<char>(in.peek());
    PhaseSpaceGrid w;
    if (first == '#') {
        const ParticleEnsemble e = read_snapshot(in);
        ScenarioConfig c;
        c.hbar = e.hbar;
        c.quantum_n = n;
        c.quantum_extent = extent;
        double captured = 0.0;
        w = mixture_wigner(e, quantum_grid(c), &captured);
        std::cout << "mixture of " << e.size() << " particles at t=" << format_double(e.time)
                  << ", captured mass " << format_double(captured) << '\n';
    } else {
        const GridState s = read_grid_state(in);
        w = wigner_transform(s);
        std::cout << "grid state N=" << s.grid.n << ", purity " << format_double(s.purity()) << '\n';
    }
    {
        std::ofstream os(out / (stem + "_wigner.csv"));
        write_csv(os, w);
    }
    write_marginals(w, out / (stem + "_marginals.csv"));
    std::cout << "wrote " << (out / (stem + "_wigner.csv")).string() << " and "
              << (out / (stem + "_marginals.csv")).string() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qcorr: quantum-classical correspondence experiments"};
    app.require_subcommand(1);

    Overrides o;
    std::string config, preset;
    auto* run = app.add_subcommand("run", "evolve one scenario and write reports");
    run->add_option("config", config, "scenario config file");
    run->add_option("--preset", preset, "start from a preset instead of a file")
        ->check(CLI::IsMember(preset_names()));
    add_overrides(run, o);

    std::string spec;
    auto* sweep = app.add_subcommand("sweep", "run an hbar/gamma sweep");
    sweep->add_option("spec", spec, "sweep spec file")->required();
    add_overrides(sweep, o);

    bool quantum = false;
    auto* validate = app.add_subcommand("validate", "admissibility, Z and anharmonicity report");
    validate->add_option("config", config, "scenario config file");
    validate->add_option("--preset", preset, "validate a preset")->check(CLI::IsMember(preset_names()));
    validate->add_flag("--quantum-anharmonicity", quantum, "also compute B_q (slow)");
    add_overrides(validate, o);

    std::string snapshot;
    int n = 0;
    double extent = 4.0;
    auto* transform = app.add_subcommand("transform", "Wigner transform and marginals of a snapshot");
    transform->add_option("snapshot", snapshot, "mixture snapshot (.txt) or grid state (.bin)")->required();
    transform->add_option("--n", n, "grid size for mixture snapshots (0: automatic)");
    transform->add_option("--extent", extent, "phase-space half width covered by the automatic grid");
    add_overrides(transform, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*run)
            return cmd_run(config, preset, o);
        if (*sweep)
            return cmd_sweep(spec, o);
        if (*validate)
            return cmd_validate(config, preset, o, quantum);
        if (*transform)
            return cmd_transform(snapshot, n, extent, o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return kSolver;
    } catch (const DomainError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolver;
    }
    return kOk;
}
