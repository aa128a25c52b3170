#pragma once

#include <string>
#include <vector>

#include "qcorr/config.hpp"
#include "qcorr/fields.hpp"
#include "qcorr/metrics.hpp"

namespace qcorr {

DynamicsModel build_model(const ScenarioConfig& cfg);
/// Explicit `quantum.n`, or the smallest power of two whose grid spans ±quantum.extent
/// in both x and p (balanced) or in x (when quantum.length is set).
Grid1D quantum_grid(const ScenarioConfig& cfg);
std::vector<double> output_times(const ScenarioConfig& cfg);
/// one, x, p, x2, p2, xp; smoothly clipped when clip > 0.
Symbol observable_symbol(const std::string& name, double clip = 0.0);
/// Initial mixture: the snapshot file, or the configured Gaussian replicated `particles` times.
ParticleEnsemble initial_ensemble(const ScenarioConfig& cfg);

struct ScenarioResult {
    std::vector<ComparisonReport> reports;
    std::vector<std::string> warnings;  // failed admissibility checks
    std::vector<std::string> artifacts;
    bool complete = false;
    std::string error;  // first solver error when incomplete
};

/// Evolves every selected solver from the same initial data, interval by interval,
/// emitting one report per output time. With `write` set, writes report.{csv,json},
/// snapshots and manifest.json into cfg.out_dir. A SolverError or DomainError during
/// evolution stops the run; the result (and manifest) then holds the partial reports.
ScenarioResult run_scenario(const ScenarioConfig& cfg, bool write = true);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r2 = 0.0;
    int n = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Least-squares slope of the max-over-observables gap against time over
/// [lo, hi]·t_end. The gap at each time is the largest pairwise difference among
/// the computed solvers.
LinearFit gap_growth(const std::vector<ComparisonReport>& reports, double t_end, double lo = 0.2, double hi = 0.8);

struct SweepRow {
    double hbar = 0.0;
    double gamma = 0.0;
    std::uint64_t seed = 0;
    std::string status;  // ok | failed
    double rate = kNotComputed;
    double rate_se = kNotComputed;
    double r2 = kNotComputed;
    double final_gap = kNotComputed;
    double mc_se = kNotComputed;  // largest classical standard error in the window
    double z = kNotComputed;
    double b_cl = kNotComputed;
    double b_q = kNotComputed;
    std::string error;
};

struct PowerLawFit {
    std::string axis;  // hbar or gamma
    double fixed = 0.0;  // value of the other axis
    double exponent = kNotComputed;
    double exponent_se = kNotComputed;
    double r2 = kNotComputed;
    int points = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<PowerLawFit> fits;
    int failures = 0;
};

/// One scenario per (ħ, γ) point, run concurrently up to base.workers. Rows are
/// appended to <out_dir>/sweep.csv; a point whose (ħ, γ, seed) row already exists
/// with status ok is not rerun. Fits over all ok rows go to sweep_fits.{csv,json}.
SweepResult run_sweep(const SweepSpec& spec, bool write = true);

std::vector<PowerLawFit> power_law_fits(const std::vector<SweepRow>& rows);

}  // namespace qcorr
