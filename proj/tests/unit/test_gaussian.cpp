#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qcorr/gaussian.hpp"
#include "qcorr/symplectic.hpp"

using namespace qcorr;

namespace {

Vec vec2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

// E[β_{i_0}···β_{i_{n-1}}] for β ~ N(0, σ): sum over perfect matchings.
double isserlis(const Mat& sigma, std::vector<int> idx)
{
    if (idx.empty())
        return 1.0;
    const int first = idx.front();
    double total = 0.0;
    for (std::size_t j = 1; j < idx.size(); ++j) {
        std::vector<int> rest;
        for (std::size_t k = 1; k < idx.size(); ++k)
            if (k != j)
                rest.push_back(idx[k]);
        total += sigma(first, idx[j]) * isserlis(sigma, rest);
    }
    return total;
}

double brute_force_moment(const Mat& sigma, const std::vector<Mat>& mats)
{
    const int d = static_cast<int>(sigma.rows());
    const int n = 2 * static_cast<int>(mats.size());
    std::vector<int> idx(n, 0);
    double total = 0.0;
    while (true) {
        double coeff = 1.0;
        for (std::size_t j = 0; j < mats.size(); ++j)
            coeff *= mats[j](idx[2 * j], idx[2 * j + 1]);
        if (coeff != 0.0)
            total += coeff * isserlis(sigma, idx);
        int pos = 0;
        while (pos < n && ++idx[pos] == d)
            idx[pos++] = 0;
        if (pos == n)
            break;
    }
    return total;
}

}  // namespace

TEST_CASE("gaussian density values")
{
    GaussianState g{Vec::Zero(2), Mat::Identity(2, 2), 1.0};
    CHECK(gaussian_density(g, Vec::Zero(2)) == doctest::Approx(1.0 / (2 * std::numbers::pi)).epsilon(1e-14));

    const double hbar = 0.2;
    const GaussianState c = coherent_state(vec2(0.3, -0.1), hbar);
    CHECK(gaussian_density(c, c.mean) == doctest::Approx(1.0 / (std::numbers::pi * hbar)).epsilon(1e-13));

    GaussianState sq{vec2(1, 2), Mat::Zero(2, 2), 1.0};
    sq.cov.diagonal() << 2.0, 0.5;
    CHECK(gaussian_density(sq, sq.mean) == doctest::Approx(1.0 / (2 * std::numbers::pi)).epsilon(1e-14));

    GaussianState singular{Vec::Zero(2), Mat::Zero(2, 2), 1.0};
    CHECK_THROWS_AS(gaussian_density(singular, Vec::Zero(2)), DomainError);
}

TEST_CASE("gaussian density integrates to one")
{
    GaussianState g{vec2(0.2, -0.4), Mat(2, 2), 1.0};
    g.cov << 0.7, 0.2, 0.2, 0.4;
    const int n = 400;
    const double half = 8.0, h = 2 * half / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s += gaussian_density(g, vec2(-half + (i + 0.5) * h, -half + (j + 0.5) * h));
    CHECK(std::abs(s * h * h - 1.0) < 1e-6);
}

TEST_CASE("gaussian convolution")
{
    const GaussianState a{Vec::Zero(2), Mat::Identity(2, 2), 1.0};
    const GaussianState c = gaussian_convolve(a, a);
    CHECK(c.mean.isZero());
    CHECK((c.cov - 2 * Mat::Identity(2, 2)).norm() < 1e-15);

    const GaussianState tiny{Vec::Zero(2), 1e-12 * Mat::Identity(2, 2), 1.0};
    CHECK((gaussian_convolve(a, tiny).cov - a.cov).norm() < 1e-11);

    // pointwise check against numerical convolution on a grid
    GaussianState s1{vec2(0.5, 0.0), Mat(2, 2), 1.0};
    s1.cov << 0.5, 0.1, 0.1, 0.3;
    GaussianState s2{vec2(-0.2, 0.3), Mat(2, 2), 1.0};
    s2.cov << 0.2, -0.05, -0.05, 0.4;
    const GaussianState s12 = gaussian_convolve(s1, s2);
    const int n = 240;
    const double half = 6.0, h = 2 * half / n;
    for (const Vec& beta : {vec2(0.3, 0.3), vec2(1.0, -0.5), vec2(-0.4, 0.9)}) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Vec g = vec2(-half + (i + 0.5) * h, -half + (j + 0.5) * h);
                acc += gaussian_density(s1, g) * gaussian_density(s2, beta - g);
            }
        CHECK(std::abs(acc * h * h - gaussian_density(s12, beta)) < 1e-6);
    }
    CHECK_THROWS_AS(gaussian_convolve(a, GaussianState{Vec::Zero(4), Mat::Identity(4, 4), 1.0}), DimensionError);
}

TEST_CASE("gaussian quadratic moments closed forms")
{
    const Mat i2 = Mat::Identity(2, 2);
    CHECK(gaussian_quadratic_moments(i2, {i2}) == doctest::Approx(2.0));
    CHECK(gaussian_quadratic_moments(i2, {i2, i2}) == doctest::Approx(8.0));
    CHECK(gaussian_quadratic_moments(i2, {i2, i2, i2}) == doctest::Approx(48.0));
    CHECK(gaussian_quadratic_moments(i2, {i2, i2, i2, i2}) == doctest::Approx(384.0));
    CHECK_THROWS_AS(gaussian_quadratic_moments(i2, {i2, i2, i2, i2, i2}), DomainError);
    CHECK_THROWS_AS(gaussian_quadratic_moments(i2, {}), DomainError);
}

TEST_CASE("gaussian quadratic moments match the Isserlis expansion")
{
    std::mt19937_64 eng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    const int d = 3;
    for (int trial = 0; trial < 3; ++trial) {
        Mat b(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                b(i, j) = g(eng);
        const Mat sigma = b * b.transpose();
        std::vector<Mat> a;
        for (int k = 0; k < 4; ++k) {
            Mat m(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    m(i, j) = g(eng);
            a.push_back(symmetrize(m));
            const double exact = brute_force_moment(sigma, a);
            CHECK(gaussian_quadratic_moments(sigma, a) == doctest::Approx(exact).epsilon(1e-11));
        }
    }
}

TEST_CASE("gaussian derivative identity in sigma")
{
    // ∂τ/∂σ^{ab} = ½ ∂_a ∂_b τ, checked by central differences
    GaussianState g{vec2(0.1, -0.2), Mat(2, 2), 1.0};
    g.cov << 0.8, 0.1, 0.1, 0.5;
    const Vec beta = vec2(0.6, 0.2);
    const double hs = 1e-4, hb = 1e-3;
    for (int a = 0; a < 2; ++a)
        for (int b = a; b < 2; ++b) {
            GaussianState gp = g, gm = g;
            gp.cov(a, b) += hs;
            gm.cov(a, b) -= hs;
            if (a != b) {
                gp.cov(b, a) += hs;
                gm.cov(b, a) -= hs;
            }
            // a symmetric perturbation of an off-diagonal pair counts both entries
            const double lhs = (gaussian_density(gp, beta) - gaussian_density(gm, beta)) / (2 * hs);
            Vec ea = Vec::Zero(2), eb = Vec::Zero(2);
            ea(a) = hb;
            eb(b) = hb;
            auto f = [&](const Vec& x) { return gaussian_density(g, x); };
            const double dab =
                (f(beta + ea + eb) - f(beta + ea - eb) - f(beta - ea + eb) + f(beta - ea - eb)) / (4 * hb * hb);
            const double rhs = (a == b ? 0.5 : 1.0) * dab;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
        }
}

TEST_CASE("pure state validation")
{
    const double hbar = 0.1;
    const GaussianState c = coherent_state(Vec::Zero(2), hbar);
    CHECK_NOTHROW(c.validate(hbar, true));
    CHECK(std::abs((c.cov / (hbar / 2)).determinant() - 1.0) < 1e-8);
    GaussianState mixed = c;
    mixed.cov *= 2.0;
    CHECK_NOTHROW(mixed.validate(hbar, false));
    CHECK_THROWS_AS(mixed.validate(hbar, true), DomainError);
    GaussianState neg = c;
    neg.weight = -1.0;
    CHECK_THROWS_AS(neg.validate(hbar), DomainError);
}
