#include "qcorr/harmonic.hpp"

#include <cmath>
#include <sstream>

#include "qcorr/symplectic.hpp"

namespace qcorr {

namespace {

double spectral_norm(const Mat& m)
{
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

}  // namespace

LocalHarmonicData taylor_local(const DynamicsModel& model, const Vec& alpha)
{
    if (model.hamiltonian().max_order() < 2)
        throw DomainError("taylor_local: Hamiltonian derivatives unavailable to order 2");
    for (const Symbol& l : model.lindblads())
        if (l.max_order() < 2)
            throw DomainError("taylor_local: Lindblad derivatives unavailable to order 2");
    const DerivedFields f = derived_fields(model, alpha);
    LocalHarmonicData out;
    out.center = alpha;
    out.drift = f.drift;
    out.h = f.hessian_flow + f.lindblad_hamiltonian_flow;
    out.friction = f.friction_gradient - f.lindblad_hamiltonian_flow;
    out.diffusion = f.diffusion;
    out.scaled_diffusion = f.scaled_diffusion;
    out.hamiltonian_value = f.hamiltonian;
    out.lindblad_values = f.lindblad_values;
    return out;
}

Mat covariance_rhs(const LocalHarmonicData& data, const Mat& sigma)
{
    const long n = data.h.rows();
    if (sigma.rows() != n || sigma.cols() != n || data.friction.rows() != n || data.diffusion.rows() != n)
        throw DimensionError("covariance_rhs: dimension mismatch");
    const Mat a = data.h + data.friction;
    return symmetrize(a * sigma + sigma * a.transpose() + data.diffusion);
}

double nts_margin(const LocalHarmonicData& data, double lambda_star, bool frictionless)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(data.scaled_diffusion, Eigen::EigenvaluesOnly);
    const double c_omega = es.eigenvalues()(0);
    const double h_norm = spectral_norm(data.h);
    if (frictionless)
        return c_omega - lambda_star * h_norm;
    const double o_norm = es.eigenvalues().cwiseAbs().maxCoeff();
    return c_omega - 2.0 * lambda_star * h_norm - lambda_star * lambda_star * o_norm;
}

CovarianceSplit nts_decompose(const LocalHarmonicData& data, const Mat& sigma, double hbar, double lambda_star,
                              bool frictionless)
{
    const long n = data.h.rows();
    if (sigma.rows() != n || sigma.cols() != n)
        throw DimensionError("nts_decompose: dimension mismatch");
    if (!(lambda_star > 0 && lambda_star <= 1))
        throw DomainError("nts_decompose: lambda_star must lie in (0, 1]");
    const Mat sb = symmetrize(sigma) / (hbar / 2);
    if (symplectic_defect(sb) > 1e-8 * std::max(1.0, sb.squaredNorm()))
        throw DomainError("nts_decompose: covariance is not a pure-state covariance");

    const double margin = nts_margin(data, lambda_star, frictionless);
    if (!(margin > 0)) {
        std::ostringstream os;
        os << "nts_decompose: lambda_star constraint violated (margin " << margin << ")";
        throw SolverError(os.str(), -1, margin);
    }

    const Mat& om = data.scaled_diffusion;
    const int d = static_cast<int>(n) / 2;
    const Mat sb_inv = sb.inverse();
    Mat y;
    if (frictionless) {
        if (lambda_star == 1.0) {
            y = Mat::Zero(n, n);
        } else {
            Eigen::SelfAdjointEigenSolver<Mat> es(om, Eigen::EigenvaluesOnly);
            const double c_omega = es.eigenvalues()(0);
            y = (c_omega / lambda_star) * (sb_inv - sb) / (1.0 / lambda_star - lambda_star);
        }
    } else {
        const Mat w = symplectic_form(d);
        y = 0.5 * (om * sb_inv - sb * w.transpose() * om * w);
    }

    CovarianceSplit out;
    out.y = y;
    out.s_total = covariance_rhs(data, sigma);
    const Mat k = data.h + y;
    out.s_zero = k * sigma + sigma * k.transpose();
    out.s_diff = out.s_total - out.s_zero;
    return out;
}

}  // namespace qcorr
