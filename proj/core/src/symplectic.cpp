#include "qcorr/symplectic.hpp"

#include <algorithm>
#include <cmath>

namespace qcorr {

namespace {

void require_even_square(const Mat& m, const char* what)
{
    if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0)
        throw DimensionError(std::string(what) + ": expected an even-dimensional square matrix");
}

Mat sqrt_spd(const Mat& m)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(m);
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

}  // namespace

Mat symplectic_form(int d)
{
    if (d < 1)
        throw DomainError("symplectic_form: d must be positive");
    Mat w = Mat::Zero(2 * d, 2 * d);
    w.topRightCorner(d, d) = Mat::Identity(d, d);
    w.bottomLeftCorner(d, d) = -Mat::Identity(d, d);
    return w;
}

HamiltonianSkewSplit hamiltonian_skew_split(const Mat& m)
{
    require_even_square(m, "hamiltonian_skew_split");
    const Mat w = symplectic_form(static_cast<int>(m.rows()) / 2);
    // M ↦ ωMᵀω fixes Hamiltonian matrices and negates skew-Hamiltonian ones.
    const Mat conj = w * m.transpose() * w;
    HamiltonianSkewSplit out;
    out.hamiltonian = 0.5 * (m + conj);
    // Defining the skew part as the remainder makes the recomposition exact.
    out.skew = m - out.hamiltonian;
    return out;
}

Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Mat& m, double tol)
{
    if (m.rows() != m.cols())
        return false;
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool is_positive_definite(const Mat& m)
{
    if (m.rows() != m.cols() || m.rows() == 0)
        return false;
    Eigen::LLT<Mat> llt(symmetrize(m));
    return llt.info() == Eigen::Success;
}

Vec williamson_eigenvalues(const Mat& sigma, double hbar)
{
    require_even_square(sigma, "williamson_eigenvalues");
    if (!(hbar > 0))
        throw DomainError("williamson_eigenvalues: hbar must be positive");
    if (!is_positive_definite(sigma))
        throw DomainError("williamson_eigenvalues: covariance is not positive definite");
    const int d = static_cast<int>(sigma.rows()) / 2;
    const Mat sb = symmetrize(sigma) / (hbar / 2);
    // K = σ̄^{1/2} ω σ̄^{1/2} is antisymmetric with eigenvalues ±iν; KᵀK carries ν² twice.
    const Mat root = sqrt_spd(sb);
    const Mat k = root * symplectic_form(d) * root;
    Eigen::SelfAdjointEigenSolver<Mat> es(k.transpose() * k, Eigen::EigenvaluesOnly);
    Vec nu(d);
    for (int i = 0; i < d; ++i)
        nu(i) = std::sqrt(std::max(0.0, 0.5 * (es.eigenvalues()(2 * i) + es.eigenvalues()(2 * i + 1))));
    std::sort(nu.data(), nu.data() + d);
    return nu;
}

double symplectic_defect(const Mat& m)
{
    require_even_square(m, "symplectic_defect");
    const Mat w = symplectic_form(static_cast<int>(m.rows()) / 2);
    return (m * w * m.transpose() - w).cwiseAbs().maxCoeff();
}

Mat project_pure(const Mat& sigma_bar)
{
    require_even_square(sigma_bar, "project_pure");
    const Mat s = symmetrize(sigma_bar);
    if (s.rows() == 2) {
        const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
        if (!(det > 0))
            throw DomainError("project_pure: covariance is not positive definite");
        return s / std::sqrt(det);
    }
    const int d = static_cast<int>(s.rows()) / 2;
    const Mat root = sqrt_spd(s);
    const Mat k = root * symplectic_form(d) * root;
    Eigen::SelfAdjointEigenSolver<Mat> es(k.transpose() * k);
    if (es.eigenvalues().minCoeff() <= 0)
        throw DomainError("project_pure: covariance is not positive definite");
    const Mat inv_root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                         es.eigenvectors().transpose();
    return symmetrize(root * inv_root * root);
}

}  // namespace qcorr
