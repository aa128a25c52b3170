#pragma once

#include <memory>
#include <vector>

#include "qcorr/grid.hpp"
#include "qcorr/model.hpp"

namespace qcorr {

namespace detail {
class FftPlan;
}

/// Quantized H and L_k on a grid.
struct LindbladOperators {
    Grid1D grid;
    double hbar = 0.0;
    CMat h;
    std::vector<CMat> l;
    /// Position-only / momentum-only flags per L_k (exactly diagonal in the x / p basis).
    std::vector<bool> x_diagonal;
    std::vector<bool> p_diagonal;

    static LindbladOperators quantize(const DynamicsModel& model, const Grid1D& grid);

    /// ħ / (‖H‖ + Σ‖L_k‖²): stable explicit step scale for RK4.
    double stable_dt() const;
};

/// dρ/dt = −(i/ħ)[H, ρ] + (1/ħ) Σ (L ρ L† − ½{L†L, ρ})
CMat lindblad_rhs(const LindbladOperators& ops, const CMat& rho);

/// One RK4 step, then Hermitization and trace renormalization. Throws
/// SolverError when the trace drifts by more than 1e-6 within the step.
GridState lindblad_step(const GridState& state, const LindbladOperators& ops, double dt);

enum class LindbladScheme { rk4, split };

struct LindbladDiagnostics {
    double max_trace_drift = 0.0;
    double min_eigenvalue = 0.0;  // sampled at output times
    long steps = 0;
};

/// Fixed-step integrator. The split scheme composes the exact unitary flow with
/// exact dephasing for position-only and momentum-only L_k (Strang order),
/// treating any other L_k with RK4 substeps short enough for stability.
class LindbladSolver {
public:
    LindbladSolver(LindbladOperators ops, LindbladScheme scheme, double dt);

    const LindbladOperators& operators() const { return ops_; }
    double dt() const { return dt_; }
    LindbladScheme scheme() const { return scheme_; }

    /// Advances `state` to time t_final (its own time is `t0`); the last step is shortened.
    void evolve(GridState& state, double t0, double t_final, LindbladDiagnostics* diag = nullptr) const;

private:
    void unitary(CMat& rho, bool half, bool shortened, double tau) const;
    void dissipate(CMat& rho, double tau) const;
    void finish_step(CMat& rho, LindbladDiagnostics* diag) const;
    CMat rhs(const CMat& rho) const;

    LindbladOperators ops_;
    LindbladScheme scheme_;
    double dt_;
    CMat evecs_;
    Vec evals_;
    CMat u_half_, u_full_;
    CMat x_rate_c_;  // elementwise dephasing rates in the x basis
    CMat p_rate_c_;  // same in the DFT basis
    std::shared_ptr<detail::FftPlan> fwd_cols_, bwd_cols_, fwd_rows_, bwd_rows_;
    bool has_x_ = false, has_p_ = false, has_general_ = false;
    LindbladOperators general_;  // L_k treated by RK4 substeps
    CMat all_k_;                 // Σ L†L, rk4 scheme
    CMat general_k_;             // Σ L†L over general_
    double general_rate_ = 0.0;  // ‖Σ L†L‖/ħ over general_
};

double min_eigenvalue(const GridState& state);

}  // namespace qcorr
