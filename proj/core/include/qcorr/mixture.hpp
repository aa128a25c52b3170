#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <limits>
#include <vector>

#include "qcorr/fields.hpp"
#include "qcorr/gaussian.hpp"
#include "qcorr/grid.hpp"

namespace qcorr {

struct StepStats {
    double time = 0.0;
    double min_lambda_ratio = std::numeric_limits<double>::infinity();  // min λ_min[σ]/(ħ/2)
    double max_cov_norm = 0.0;
    double max_symplectic_defect = 0.0;  // before re-projection
};

/// Weighted set of pure Gaussian states representing ρ̃ = Σ w_i τ̂_{α_i,σ_i}.
struct ParticleEnsemble {
    std::vector<GaussianState> particles;
    double hbar = 0.0;
    double time = 0.0;
    std::uint64_t rng_seed = 0;
    std::uint64_t step_count = 0;
    std::vector<StepStats> step_stats;

    long size() const { return static_cast<long>(particles.size()); }
    int dim() const { return particles.empty() ? 0 : particles.front().dim(); }
    double total_weight() const;
    /// Smallest λ_min[σ_i]/(ħ/2) over the ensemble.
    double min_lambda_ratio() const;
    void validate() const;

    static ParticleEnsemble single(const GaussianState& g, double hbar, std::uint64_t seed = 0);
    /// Weights are normalized to sum to one.
    static ParticleEnsemble from_list(std::vector<GaussianState> particles, double hbar, std::uint64_t seed = 0);
    /// `count` equal-weight copies of g.
    static ParticleEnsemble replicated(const GaussianState& g, long count, double hbar, std::uint64_t seed = 0);
    /// Centres drawn i.i.d. from `centers` (mean, cov); every particle carries covariance `sigma`.
    static ParticleEnsemble sampled(const GaussianState& centers, const Mat& sigma, long count, double hbar,
                                    std::uint64_t seed);
};

// Snapshot text format:
//   # qcorr-ensemble 1
//   # dim=<d> hbar=<ħ> time=<t> seed=<s> steps=<n> count=<m>
//   # <preamble line>                                    (optional, any number)
//   weight a_0 .. a_{2d-1} s_00 s_01 .. s_{2d-1,2d-1}   (upper triangle, row by row)
//   one row per particle, 17 significant digits.
void write_snapshot(std::ostream& os, const ParticleEnsemble& e, const std::vector<std::string>& preamble = {});
ParticleEnsemble read_snapshot(std::istream& is);

enum class DriftScheme { euler, rk4 };

struct PropagatorOptions {
    /// NTS floor; NaN selects Z/2.
    double lambda_star = std::numeric_limits<double>::quiet_NaN();
    FrictionBranch branch = FrictionBranch::automatic;
    DriftScheme drift = DriftScheme::rk4;
    bool reproject = true;
    int workers = 1;
};

/// Per-particle update: local Taylor data at the centre, NTS split of the
/// covariance flow, σ advanced by the purity-preserving part (Cayley transform of
/// h + Y), centre advanced by the drift plus N(0, S_D·dt) noise. A closed model
/// with quadratic H runs the exact deterministic flow (λ* is NaN); any other
/// model with Z = 0 is rejected with SolverError.
class MixturePropagator {
public:
    MixturePropagator(const DynamicsModel& model, PropagatorOptions opts = {});

    double lambda_star() const { return lambda_star_; }
    bool frictionless() const { return frictionless_; }
    const DynamicsModel& model() const { return model_; }

    /// One snapshot per requested time (ascending, ≥ ensemble.time). Noise for
    /// particle i is keyed by (seed, i, step count at entry), so the result does
    /// not depend on the worker count.
    std::vector<ParticleEnsemble> evolve(const ParticleEnsemble& init, const std::vector<double>& times,
                                         double dt) const;
    ParticleEnsemble evolve(const ParticleEnsemble& init, double t_final, double dt) const;
    ParticleEnsemble step(const ParticleEnsemble& init, double dt) const;

private:
    const DynamicsModel& model_;
    PropagatorOptions opts_;
    double lambda_star_ = 0.0;
    bool frictionless_ = false;
    bool closed_ = false;
};

ParticleEnsemble step(const ParticleEnsemble& ensemble, const DynamicsModel& model, double dt,
                      const PropagatorOptions& opts = {});
ParticleEnsemble evolve(const ParticleEnsemble& ensemble, const DynamicsModel& model, double t_final, double dt,
                        const PropagatorOptions& opts = {});

/// Nodes and weights of the q-point probabilists' Gauss–Hermite rule (weights sum to 1).
void gauss_hermite(int q, Vec& nodes, Vec& weights);

/// Σ w_i ∫ E τ_{α_i,σ_i}, tensor Gauss–Hermite in each σ_i's eigenbasis. `exact`
/// reports whether E is a polynomial of degree ≤ 2q − 1.
cplx mixture_expectation(const ParticleEnsemble& ensemble, const Symbol& observable, int q = 20,
                         bool* exact = nullptr);

/// Σ w_i τ_{α_i,σ_i} on the lattice; `captured` receives the lattice integral.
PhaseSpaceGrid mixture_wigner(const ParticleEnsemble& ensemble, const Grid1D& xgrid, double* captured = nullptr);

/// 1-D wavefunction of the pure Gaussian (α, σ), unit norm on the grid.
CVec gaussian_wavefunction(const GaussianState& g, const Grid1D& grid, double hbar);

GridState mixture_density_matrix(const ParticleEnsemble& ensemble, const Grid1D& xgrid);

}  // namespace qcorr
