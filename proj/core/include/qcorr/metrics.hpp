#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "qcorr/grid.hpp"
#include "qcorr/langevin.hpp"
#include "qcorr/symbol.hpp"

namespace qcorr {

/// Σ |eig(ρ_a − ρ_b)|
double trace_distance(const GridState& a, const GridState& b);

/// Σ |f1 − f2| · dx · dp over the real parts.
double l1_distance(const PhaseSpaceGrid& f1, const PhaseSpaceGrid& f2);

/// Tr[ρ Ê] with Ê the grid Weyl quantization of E.
cplx quantum_expectation(const GridState& state, const Symbol& observable);

struct ObservableGap {
    double quantum = 0.0;
    double classical = 0.0;
    double classical_se = 0.0;
    double gap = 0.0;
};

ObservableGap observable_gap(const GridState& quantum, const ClassicalEnsemble& classical, const Symbol& observable);
/// Classical side from a density on the lattice (Σ f·E·dx·dp).
ObservableGap observable_gap(const GridState& quantum, const PhaseSpaceGrid& classical, const Symbol& observable);

constexpr double kNotComputed = std::numeric_limits<double>::quiet_NaN();

struct ObservableRow {
    double quantum = kNotComputed;
    double mixture = kNotComputed;
    double classical = kNotComputed;
    double classical_se = kNotComputed;
    /// max pairwise difference among the computed values
    double gap = kNotComputed;
};

struct ComparisonReport {
    double time = 0.0;
    double trace_distance = kNotComputed;  // dense vs mixture
    double l1_distance = kNotComputed;     // mixture Wigner vs smoothed cloud
    std::map<std::string, ObservableRow> observables;
    std::map<std::string, double> error_estimates;

    void finalize_gaps();
};

/// One row per report. `preamble` lines are written as '# ' comments first.
void write_reports_csv(std::ostream& os, const std::vector<ComparisonReport>& reports,
                       const std::vector<std::string>& preamble = {});
/// {"meta": {...}, "reports": [...]}; NaN becomes null.
void write_reports_json(std::ostream& os, const std::vector<ComparisonReport>& reports,
                        const std::map<std::string, std::string>& meta = {});

}  // namespace qcorr
