#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qcorr/langevin.hpp"
#include "qcorr/lindblad.hpp"
#include "qcorr/mixture.hpp"

namespace qcorr {

enum class HamiltonianKind { harmonic, quartic, double_well, cosine_lattice, zero };
enum class OutputFormat { csv, json };

/// L = x_coeff·x + p_coeff·p, before the √γ factor.
struct LindbladSpec {
    cplx x_coeff = 0.0;
    cplx p_coeff = 0.0;
};

/// One scenario. Text form: `key = value` lines, `#` comments; see `config_keys()`.
/// A `preset = <name>` line is applied first, whatever its position.
struct ScenarioConfig {
    std::string name = "scenario";

    HamiltonianKind hamiltonian = HamiltonianKind::harmonic;
    double omega = 1.0;
    double anharmonic = 0.25;  // a in a·x⁴ (quartic, double well)
    double well_depth = 1.0;   // b in −b·x²/2 (double well)
    double cosine_amplitude = 1.0;
    double cosine_wavenumber = 1.0;
    std::vector<LindbladSpec> lindblad;
    double gamma = 1.0;  // each L_k is multiplied by √γ
    double hbar = 0.1;
    double box_x = 3.0;  // domain box half widths
    double box_p = 3.0;
    int probes = 2000;

    double mean_x = 1.0;
    double mean_p = 0.0;
    bool coherent = true;  // σ = (ħ/2)·I, otherwise cov_*
    double cov_xx = 0.0, cov_xp = 0.0, cov_pp = 0.0;
    std::string initial_snapshot;  // mixture file; overrides mean and covariance

    bool run_quantum = true;
    bool run_mixture = true;
    bool run_classical = true;

    double t_end = 10.0;
    int outputs = 11;  // uniform output times including 0 and t_end

    int quantum_n = 0;          // 0: smallest power of two covering quantum_extent
    double quantum_length = 0;  // 0: balanced grid (equal x and p resolution)
    double quantum_extent = 4.0;
    LindbladScheme quantum_scheme = LindbladScheme::split;
    double quantum_dt = 0.01;

    long particles = 1000;
    double mixture_dt = 0.01;
    double lambda_star = std::numeric_limits<double>::quiet_NaN();  // NaN: Z/2
    DriftScheme mixture_drift = DriftScheme::rk4;

    long points = 100000;
    double classical_dt = 0.01;
    LangevinScheme classical_scheme = LangevinScheme::stratonovich_heun;

    std::vector<std::string> observables{"x", "p", "x2", "p2"};
    double clip = 0.0;  // > 0: observables replaced by their smooth clipping at this level

    bool trace_distance = true;
    bool l1_distance = false;

    std::uint64_t seed = 1;
    int workers = 1;
    std::string out_dir = "out";
    OutputFormat format = OutputFormat::csv;
    bool snapshots = true;

    bool operator==(const ScenarioConfig&) const;
};

/// Keys in emission order.
const std::vector<std::string>& config_keys();

ScenarioConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

/// Throws ConfigError on unknown keys, duplicates, or malformed values.
ScenarioConfig parse_config(const std::string& text);
/// Every key, one `key = value` line each, values in shortest round-trip form.
std::string emit_config(const ScenarioConfig& cfg);
std::vector<std::string> emit_config_lines(const ScenarioConfig& cfg);
/// Range and consistency checks; throws ConfigError.
void validate_config(const ScenarioConfig& cfg);

struct SweepSpec {
    ScenarioConfig base;
    std::vector<double> hbar;
    std::vector<double> gamma;
    double window_lo = 0.2;  // fraction of t_end
    double window_hi = 0.8;
    bool quantum_anharmonicity = false;  // also report B_q (slow)
};

/// Scenario keys plus `sweep.hbar`, `sweep.gamma`, `sweep.window`, `sweep.b_q`.
SweepSpec parse_sweep(const std::string& text);
std::string emit_sweep(const SweepSpec& spec);
void validate_sweep(const SweepSpec& spec);

std::string read_text_file(const std::string& path);
std::string format_double(double v);

}  // namespace qcorr
