#include "qcorr/lindblad.hpp"

#include <cmath>
#include <sstream>

#include "fft.hpp"
#include "qcorr/weyl.hpp"

namespace qcorr {

namespace {

double hermitian_norm(const CMat& m)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

CMat sum_ldl(const std::vector<CMat>& ls, int n)
{
    CMat k = CMat::Zero(n, n);
    for (const CMat& l : ls)
        k.noalias() += l.adjoint() * l;
    return k;
}

// k = Σ L†L; ρ Hermitian, so ρk = (kρ)†
CMat dissipator(const std::vector<CMat>& ls, const CMat& k, double hbar, const CMat& rho)
{
    CMat out(rho.rows(), rho.cols());
    out.noalias() = k * rho;
    out = -0.5 * (out + out.adjoint()).eval();
    CMat lr(rho.rows(), rho.cols());
    for (const CMat& l : ls) {
        lr.noalias() = l * rho;
        out.noalias() += lr * l.adjoint();
    }
    return out / hbar;
}

void rk4(CMat& rho, double dt, const auto& f)
{
    const CMat k1 = f(rho);
    const CMat k2 = f(rho + 0.5 * dt * k1);
    const CMat k3 = f(rho + 0.5 * dt * k2);
    const CMat k4 = f(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

LindbladOperators LindbladOperators::quantize(const DynamicsModel& model, const Grid1D& grid)
{
    if (model.dim() != 1)
        throw DimensionError("LindbladOperators: one degree of freedom only");
    LindbladOperators ops;
    ops.grid = grid;
    ops.hbar = model.hbar();
    const CMat h = weyl_quantize(model.hamiltonian(), grid, model.hbar());
    ops.h = 0.5 * (h + h.adjoint());
    for (const Symbol& s : model.lindblads()) {
        ops.l.push_back(weyl_quantize(s, grid, model.hbar()));
        ops.x_diagonal.push_back(!s.depends_on(1));
        ops.p_diagonal.push_back(!s.depends_on(0));
    }
    return ops;
}

double LindbladOperators::stable_dt() const
{
    double rate = hermitian_norm(h);
    for (const CMat& m : l)
        rate += hermitian_norm(m.adjoint() * m);
    return rate > 0 ? hbar / rate : std::numeric_limits<double>::infinity();
}

CMat lindblad_rhs(const LindbladOperators& ops, const CMat& rho)
{
    const cplx mi(0.0, -1.0 / ops.hbar);
    return mi * (ops.h * rho - rho * ops.h) + dissipator(ops.l, sum_ldl(ops.l, ops.grid.n), ops.hbar, rho);
}

GridState lindblad_step(const GridState& state, const LindbladOperators& ops, double dt)
{
    if (!(state.grid == ops.grid))
        throw DimensionError("lindblad_step: state and operators live on different grids");
    GridState out = state;
    const cplx tr0 = out.rho.trace();
    rk4(out.rho, dt, [&](const CMat& r) { return lindblad_rhs(ops, r); });
    out.rho = 0.5 * (out.rho + out.rho.adjoint()).eval();
    const cplx tr1 = out.rho.trace();
    if (std::abs(tr1 - tr0) > 1e-6) {
        std::ostringstream os;
        os << "lindblad_step: trace drift " << std::abs(tr1 - tr0) << " exceeds 1e-6; reduce dt";
        throw SolverError(os.str());
    }
    out.rho /= tr1.real();
    return out;
}

LindbladSolver::LindbladSolver(LindbladOperators ops, LindbladScheme scheme, double dt)
    : ops_(std::move(ops)), scheme_(scheme), dt_(dt)
{
    if (!(dt > 0))
        throw DomainError("LindbladSolver: dt must be positive");
    const int n = ops_.grid.n;
    if (scheme_ == LindbladScheme::rk4) {
        all_k_ = sum_ldl(ops_.l, n);
        return;
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(ops_.h);
    evecs_ = es.eigenvectors();
    evals_ = es.eigenvalues();
    auto prop = [&](double tau) {
        CVec ph(n);
        for (int i = 0; i < n; ++i)
            ph(i) = std::exp(cplx(0.0, -evals_(i) * tau / ops_.hbar));
        return CMat(evecs_ * ph.asDiagonal() * evecs_.adjoint());
    };
    u_half_ = prop(0.5 * dt_);
    u_full_ = prop(dt_);

    x_rate_c_ = CMat::Zero(n, n);
    p_rate_c_ = CMat::Zero(n, n);
    general_.grid = ops_.grid;
    general_.hbar = ops_.hbar;
    for (std::size_t k = 0; k < ops_.l.size(); ++k) {
        if (ops_.x_diagonal[k]) {
            const CVec d = ops_.l[k].diagonal();
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    x_rate_c_(i, j) += d(i) * std::conj(d(j)) - 0.5 * (std::norm(d(i)) + std::norm(d(j)));
            has_x_ = true;
        } else if (ops_.p_diagonal[k]) {
            // circulant in x: eigenvalues are the DFT of the first column
            CVec g = ops_.l[k].col(0);
            detail::FftPlan(n, FFTW_FORWARD).execute(g.data());
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i)
                    p_rate_c_(i, j) += g(i) * std::conj(g(j)) - 0.5 * (std::norm(g(i)) + std::norm(g(j)));
            has_p_ = true;
        } else {
            general_.l.push_back(ops_.l[k]);
            has_general_ = true;
        }
    }
    x_rate_c_ /= ops_.hbar;
    p_rate_c_ /= ops_.hbar;
    general_k_ = sum_ldl(general_.l, n);
    general_rate_ = hermitian_norm(general_k_) / ops_.hbar;
    if (has_p_) {
        fwd_cols_ = std::make_shared<detail::FftPlan>(n, FFTW_FORWARD, n, 1, n);
        bwd_cols_ = std::make_shared<detail::FftPlan>(n, FFTW_BACKWARD, n, 1, n);
        fwd_rows_ = std::make_shared<detail::FftPlan>(n, FFTW_FORWARD, n, n, 1);
        bwd_rows_ = std::make_shared<detail::FftPlan>(n, FFTW_BACKWARD, n, n, 1);
    }
}

CMat LindbladSolver::rhs(const CMat& rho) const
{
    CMat hr(rho.rows(), rho.cols());
    hr.noalias() = ops_.h * rho;
    return cplx(0.0, -1.0 / ops_.hbar) * (hr - hr.adjoint()) + dissipator(ops_.l, all_k_, ops_.hbar, rho);
}

void LindbladSolver::finish_step(CMat& rho, LindbladDiagnostics* diag) const
{
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const cplx tr = rho.trace();
    const double drift = std::abs(tr - 1.0);
    if (diag) {
        diag->max_trace_drift = std::max(diag->max_trace_drift, drift);
        ++diag->steps;
    }
    if (drift > 1e-6) {
        std::ostringstream os;
        os << "LindbladSolver: trace drift " << drift << " exceeds 1e-6; reduce dt";
        throw SolverError(os.str());
    }
    rho /= tr.real();
}

void LindbladSolver::unitary(CMat& rho, bool half, bool shortened, double tau) const
{
    if (!shortened) {
        const CMat& u = half ? u_half_ : u_full_;
        rho = u * rho * u.adjoint();
        return;
    }
    const int n = ops_.grid.n;
    CVec ph(n);
    for (int i = 0; i < n; ++i)
        ph(i) = std::exp(cplx(0.0, -evals_(i) * tau / ops_.hbar));
    const CMat u = evecs_ * ph.asDiagonal() * evecs_.adjoint();
    rho = u * rho * u.adjoint();
}

void LindbladSolver::dissipate(CMat& rho, double tau) const
{
    const int n = ops_.grid.n;
    if (has_x_)
        rho.array() *= (x_rate_c_ * tau).array().exp();
    if (has_p_) {
        // ρ_p = F ρ F^H with F the unnormalized forward DFT, then back.
        fwd_cols_->execute(rho.data());
        bwd_rows_->execute(rho.data());
        rho.array() *= (p_rate_c_ * tau).array().exp();
        bwd_cols_->execute(rho.data());
        fwd_rows_->execute(rho.data());
        rho /= static_cast<double>(n) * n;
    }
    if (has_general_) {
        // the dissipator spectrum reaches 2·Σ‖L†L‖/ħ; RK4 substeps keep τ·rate ≤ 1
        const int m = std::max(1, static_cast<int>(std::ceil(tau * general_rate_)));
        for (int i = 0; i < m; ++i)
            rk4(rho, tau / m, [&](const CMat& r) { return dissipator(general_.l, general_k_, ops_.hbar, r); });
    }
}

void LindbladSolver::evolve(GridState& state, double t0, double t_final, LindbladDiagnostics* diag) const
{
    if (!(state.grid == ops_.grid))
        throw DimensionError("LindbladSolver: state and operators live on different grids");
    if (t_final < t0)
        throw DomainError("LindbladSolver: t_final precedes the current time");
    const double span = t_final - t0;
    long nfull = static_cast<long>(std::floor(span / dt_ * (1.0 + 1e-12)));
    double rem = span - nfull * dt_;
    if (rem < 1e-12 * dt_)
        rem = 0.0;
    CMat& rho = state.rho;
    if (scheme_ == LindbladScheme::rk4) {
        for (long s = 0; s < nfull; ++s) {
            rk4(rho, dt_, [&](const CMat& r) { return rhs(r); });
            finish_step(rho, diag);
        }
        if (rem > 0) {
            rk4(rho, rem, [&](const CMat& r) { return rhs(r); });
            finish_step(rho, diag);
        }
        return;
    }
    // Strang: U(dt/2) D(dt) U(dt/2), with adjacent half unitaries merged.
    if (nfull > 0) {
        unitary(rho, true, false, 0.0);
        for (long s = 0; s < nfull; ++s) {
            dissipate(rho, dt_);
            unitary(rho, s + 1 == nfull, false, 0.0);
            finish_step(rho, diag);
        }
    }
    if (rem > 0) {
        unitary(rho, true, true, 0.5 * rem);
        dissipate(rho, rem);
        unitary(rho, true, true, 0.5 * rem);
        finish_step(rho, diag);
    }
}

double min_eigenvalue(const GridState& state)
{
    Eigen::SelfAdjointEigenSolver<CMat> es(state.rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace qcorr
