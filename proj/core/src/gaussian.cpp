#include "qcorr/gaussian.hpp"

#include <cmath>
#include <numbers>

#include "qcorr/symplectic.hpp"

namespace qcorr {

void GaussianState::validate(double hbar, bool pure, CovarianceTolerance tol) const
{
    const long n = mean.size();
    if (n == 0 || n % 2 != 0)
        throw DimensionError("GaussianState: mean must have even length");
    if (cov.rows() != n || cov.cols() != n)
        throw DimensionError("GaussianState: covariance shape does not match mean");
    if (!(weight >= 0))
        throw DomainError("GaussianState: negative weight");
    const double scale = std::max(cov.cwiseAbs().maxCoeff(), 1e-300);
    if (!is_symmetric(cov, tol.sym * scale))
        throw DomainError("GaussianState: covariance is not symmetric");
    if (!is_positive_definite(cov))
        throw DomainError("GaussianState: covariance is not positive definite");
    if (pure) {
        if (!(hbar > 0))
            throw DomainError("GaussianState: purity check needs hbar > 0");
        if (symplectic_defect(cov / (hbar / 2)) > tol.symp)
            throw DomainError("GaussianState: covariance is not a pure-state covariance");
    }
}

GaussianState coherent_state(const Vec& mean, double hbar)
{
    GaussianState s;
    s.mean = mean;
    s.cov = Mat::Identity(mean.size(), mean.size()) * (hbar / 2);
    s.weight = 1.0;
    return s;
}

double gaussian_density(const GaussianState& state, const Vec& beta)
{
    if (beta.size() != state.mean.size())
        throw DimensionError("gaussian_density: point dimension mismatch");
    Eigen::LLT<Mat> llt(symmetrize(state.cov));
    if (llt.info() != Eigen::Success)
        throw DomainError("gaussian_density: singular or indefinite covariance");
    const Vec r = beta - state.mean;
    const Vec y = llt.matrixL().solve(r);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const int d = state.dim();
    return std::exp(-0.5 * y.squaredNorm() - 0.5 * logdet) / std::pow(2.0 * std::numbers::pi, d);
}

GaussianState gaussian_convolve(const GaussianState& a, const GaussianState& b)
{
    if (a.mean.size() != b.mean.size())
        throw DimensionError("gaussian_convolve: dimension mismatch");
    GaussianState out;
    out.mean = a.mean + b.mean;
    out.cov = symmetrize(a.cov + b.cov);
    out.weight = a.weight * b.weight;
    return out;
}

double gaussian_quadratic_moments(const Mat& sigma, const std::vector<Mat>& mats)
{
    if (mats.empty() || mats.size() > 4)
        throw DomainError("gaussian_quadratic_moments: supports 1 to 4 factors");
    for (const Mat& m : mats)
        if (m.rows() != sigma.rows() || m.cols() != sigma.cols())
            throw DimensionError("gaussian_quadratic_moments: matrix shape mismatch");

    std::vector<Mat> sa;
    sa.reserve(mats.size());
    for (const Mat& m : mats)
        sa.push_back(sigma * m);
    auto t = [&](int i) { return sa[i].trace(); };
    auto c2 = [&](int i, int j) { return (sa[i] * sa[j]).trace(); };
    auto c3 = [&](int i, int j, int k) { return (sa[i] * sa[j] * sa[k]).trace(); };
    auto c4 = [&](int i, int j, int k, int l) { return (sa[i] * sa[j] * sa[k] * sa[l]).trace(); };

    switch (mats.size()) {
    case 1:
        return t(0);
    case 2:
        return t(0) * t(1) + 2 * c2(0, 1);
    case 3:
        return t(0) * t(1) * t(2) + 2 * (t(0) * c2(1, 2) + t(1) * c2(2, 0) + t(2) * c2(0, 1)) +
               8 * c3(0, 1, 2);
    default:
        break;
    }
    const double a = t(0), b = t(1), c = t(2), d = t(3);
    return a * b * c * d +
           2 * (a * b * c2(2, 3) + a * c * c2(1, 3) + a * d * c2(1, 2) + b * c * c2(0, 3) +
                b * d * c2(0, 2) + c * d * c2(0, 1)) +
           4 * (c2(0, 1) * c2(2, 3) + c2(0, 2) * c2(1, 3) + c2(0, 3) * c2(1, 2)) +
           8 * (a * c3(1, 2, 3) + b * c3(0, 2, 3) + c * c3(0, 1, 3) + d * c3(0, 1, 2)) +
           16 * (c4(0, 1, 2, 3) + c4(0, 2, 1, 3) + c4(0, 1, 3, 2));
}

}  // namespace qcorr
