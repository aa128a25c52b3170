#pragma once

#include <cstdint>
#include <vector>

#include "qcorr/gaussian.hpp"
#include "qcorr/grid.hpp"
#include "qcorr/model.hpp"

namespace qcorr {

/// Unweighted point cloud; column j of `points` is one phase point.
struct ClassicalEnsemble {
    Mat points;
    double time = 0.0;
    std::uint64_t rng_seed = 0;
    /// Steps taken so far; part of each point's noise-stream key.
    std::uint64_t step_count = 0;

    long size() const { return points.cols(); }
    int phase_dim() const { return static_cast<int>(points.rows()); }

    /// `count` i.i.d. samples from the Gaussian (or mixture) density.
    static ClassicalEnsemble sample(const GaussianState& g, long count, std::uint64_t seed);
    static ClassicalEnsemble sample(const std::vector<GaussianState>& mixture, long count, std::uint64_t seed);
};

enum class LangevinScheme {
    ito_euler,          // dα = ũ dt + √D dW, Euler–Maruyama
    stratonovich_heun,  // dα = u dt + B∘dW with BBᵀ = D, stochastic Heun
};

struct LangevinOptions {
    LangevinScheme scheme = LangevinScheme::ito_euler;
    int workers = 1;
};

/// Advances every point to each of `times` (ascending, ≥ ensemble.time) and
/// returns one snapshot per time. Points are evolved independently with noise
/// keyed by (seed, point index, step count), so results do not depend on `workers`.
std::vector<ClassicalEnsemble> langevin_evolve(const ClassicalEnsemble& init, const DynamicsModel& model,
                                               const std::vector<double>& times, double dt,
                                               const LangevinOptions& opts = {});

ClassicalEnsemble langevin_step(const ClassicalEnsemble& ensemble, const DynamicsModel& model, double dt,
                                const LangevinOptions& opts = {});

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

MonteCarloEstimate classical_expectation(const ClassicalEnsemble& ensemble, const Symbol& observable);

/// Counts per cell divided by (count · cell area); cells are centred on the lattice points.
/// `captured` receives the fraction of points inside the lattice.
PhaseSpaceGrid classical_histogram(const ClassicalEnsemble& ensemble, const Grid1D& xgrid, double hbar,
                                   double* captured = nullptr);

/// Gaussian kernel density estimate on the lattice; bandwidths default to one cell.
PhaseSpaceGrid classical_kde(const ClassicalEnsemble& ensemble, const Grid1D& xgrid, double hbar,
                             double bandwidth_x = 0.0, double bandwidth_p = 0.0);

}  // namespace qcorr
