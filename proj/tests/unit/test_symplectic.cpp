#include <doctest.h>

#include <cmath>
#include <random>

#include "qcorr/symplectic.hpp"

using namespace qcorr;

TEST_CASE("symplectic form")
{
    Mat w1(2, 2);
    w1 << 0, 1, -1, 0;
    CHECK(symplectic_form(1) == w1);

    const Mat w2 = symplectic_form(2);
    CHECK(w2.topRightCorner(2, 2) == Mat::Identity(2, 2));
    CHECK(w2.bottomLeftCorner(2, 2) == -Mat::Identity(2, 2));
    CHECK(w2.topLeftCorner(2, 2).isZero());

    const Mat w3 = symplectic_form(3);
    CHECK((w3 * w3 + Mat::Identity(6, 6)).isZero());
    CHECK((w3.transpose() + w3).isZero());
    CHECK_THROWS_AS(symplectic_form(0), DomainError);
}

TEST_CASE("hamiltonian skew split")
{
    const Mat w = symplectic_form(1);
    auto s = hamiltonian_skew_split(w);
    CHECK((s.hamiltonian - w).norm() < 1e-15);
    CHECK(s.skew.norm() < 1e-15);

    s = hamiltonian_skew_split(Mat::Identity(2, 2));
    CHECK(s.hamiltonian.norm() < 1e-15);
    CHECK((s.skew - Mat::Identity(2, 2)).norm() < 1e-15);

    std::mt19937_64 eng(7);
    std::normal_distribution<double> nd;
    for (int d = 1; d <= 3; ++d) {
        Mat m(2 * d, 2 * d);
        for (int i = 0; i < m.size(); ++i)
            m.data()[i] = nd(eng);
        s = hamiltonian_skew_split(m);
        CHECK((s.hamiltonian + s.skew - m).cwiseAbs().maxCoeff() < 1e-12);
        const Mat wd = symplectic_form(d);
        const Mat hw = s.hamiltonian * wd;
        const Mat sw = s.skew * wd;
        CHECK((hw - hw.transpose()).norm() < 1e-12);
        CHECK((sw + sw.transpose()).norm() < 1e-12);
    }
    CHECK_THROWS_AS(hamiltonian_skew_split(Mat::Identity(3, 3)), DimensionError);
}

TEST_CASE("williamson eigenvalues")
{
    const double hbar = 0.3;
    Vec nu = williamson_eigenvalues(Mat::Identity(2, 2) * (hbar / 2), hbar);
    REQUIRE(nu.size() == 1);
    CHECK(nu(0) == doctest::Approx(1.0).epsilon(1e-12));

    Mat sb(2, 2);
    sb << 2, 0, 0, 0.5;
    CHECK(williamson_eigenvalues(sb * (hbar / 2), hbar)(0) == doctest::Approx(1.0).epsilon(1e-12));

    sb << 3, 0, 0, 1;
    CHECK(williamson_eigenvalues(sb * (hbar / 2), hbar)(0) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));

    // two modes, sorted ascending
    Mat s4 = Mat::Zero(4, 4);
    s4.diagonal() << 4, 1, 1, 1;
    nu = williamson_eigenvalues(s4, 2.0);
    CHECK(nu(0) == doctest::Approx(1.0));
    CHECK(nu(1) == doctest::Approx(2.0));

    Mat bad(2, 2);
    bad << 1, 0, 0, -1;
    CHECK_THROWS_AS(williamson_eigenvalues(bad, 1.0), DomainError);
}

TEST_CASE("purity projection restores symplecticity")
{
    Mat sb(2, 2);
    sb << 2.0, 0.3, 0.3, 0.6;
    const Mat p = project_pure(sb);
    CHECK(symplectic_defect(p) < 1e-12);
    CHECK(p.determinant() == doctest::Approx(1.0).epsilon(1e-12));

    // d = 2, a non-pure covariance is moved onto the pure manifold
    Mat s4(4, 4);
    s4 << 2.0, 0.1, 0.2, 0.0, 0.1, 1.5, 0.0, 0.1, 0.2, 0.0, 1.2, 0.3, 0.0, 0.1, 0.3, 0.9;
    const Mat q = project_pure(s4);
    CHECK(symplectic_defect(q) < 1e-10);
    CHECK(is_positive_definite(q));
}
