#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qcorr/types.hpp"

namespace qcorr {

/// Derivative orders per phase-space coordinate, length 2d.
using MultiIndex = std::vector<int>;

inline constexpr int kAnyOrder = std::numeric_limits<int>::max();

/// Value, gradient and Hessian of a symbol at one point.
struct Jet2 {
    cplx value{0.0, 0.0};
    CVec grad;
    CMat hess;

    explicit Jet2(int n = 0) : grad(CVec::Zero(n)), hess(CMat::Zero(n, n)) {}
};

class SymbolTerm {
public:
    virtual ~SymbolTerm() = default;

    virtual int phase_dim() const = 0;
    virtual cplx value(const Vec& a) const = 0;
    virtual cplx derivative(const Vec& a, const MultiIndex& n) const = 0;
    /// Highest derivative order that is exact (analytic); kAnyOrder when unbounded.
    virtual int max_order() const { return kAnyOrder; }
    virtual bool depends_on(int /*coord*/) const { return true; }
    /// Total degree for polynomial terms, -1 otherwise.
    virtual int polynomial_degree() const { return -1; }
    virtual void add_jet2(const Vec& a, cplx scale, Jet2& out) const;
    virtual std::string describe() const = 0;
};

/// A complex phase-space function with derivative access: a weighted sum of terms.
class Symbol {
public:
    Symbol() = default;
    explicit Symbol(int phase_dim) : pdim_(phase_dim) {}
    explicit Symbol(std::shared_ptr<const SymbolTerm> term);

    int phase_dim() const { return pdim_; }
    int dim() const { return pdim_ / 2; }
    bool is_zero() const { return terms_.empty(); }

    cplx operator()(const Vec& a) const;
    cplx derivative(const Vec& a, const MultiIndex& n) const;
    Jet2 jet2(const Vec& a) const;

    int max_order() const;
    bool depends_on(int coord) const;
    int polynomial_degree() const;

    Symbol operator+(const Symbol& other) const;
    Symbol operator-(const Symbol& other) const { return *this + other * cplx(-1.0); }
    Symbol operator*(cplx c) const;

    /// α ↦ E(Zα).
    Symbol transformed(const Mat& z) const;

    std::string describe() const;

private:
    int pdim_ = 0;
    std::vector<std::pair<cplx, std::shared_ptr<const SymbolTerm>>> terms_;
};

inline Symbol operator*(cplx c, const Symbol& s) { return s * c; }

struct Monomial {
    MultiIndex exponents;
    cplx coeff;
};

struct FiniteDifferenceOptions {
    double scale = 1.0;  // characteristic length of the symbol's variation
    int max_order = 6;
};

/// Analytic derivative callback; returns the derivative for multi-index n.
using DerivativeFn = std::function<cplx(const Vec&, const MultiIndex&)>;

namespace symbols {

Symbol constant(int d, cplx c);
Symbol polynomial(int d, std::vector<Monomial> monomials);
/// c0 + Σ ℓ_a α_a
Symbol linear(const CVec& coeffs, cplx offset = 0.0);
/// amplitude · cos(k·α + phase)
Symbol cosine(const Vec& k, cplx amplitude, double phase = 0.0);
/// Arbitrary callable; derivatives analytic when `deriv` is given, otherwise
/// central finite differences with step eps^{1/(order+2)}·scale.
Symbol function(int d, std::function<cplx(const Vec&)> f, std::string name,
                FiniteDifferenceOptions fd = {}, DerivativeFn deriv = {}, int n_max = kAnyOrder);
/// c·tanh(Re E/c): bounded, smooth version of a real observable.
Symbol clipped(const Symbol& inner, double c);

// 1-D presets, phase point (x, p).
Symbol harmonic(double omega = 1.0);                   // ω(x² + p²)/2
Symbol quartic(double a = 0.25);                       // p²/2 + a x⁴
Symbol double_well(double a, double b);                // p²/2 − b x²/2 + a x⁴/4
Symbol cosine_lattice(double amplitude = 1.0, double k = 1.0);  // p²/2 + A cos(kx)
Symbol position(int d = 1, int i = 0);
Symbol momentum(int d = 1, int i = 0);

}  // namespace symbols

/// Central finite-difference estimate of the n-th mixed partial of f.
cplx finite_difference(const std::function<cplx(const Vec&)>& f, const Vec& a, const MultiIndex& n,
                       double step);

int order_of(const MultiIndex& n);

/// All multi-indices of total order k in `pdim` variables, lexicographic.
std::vector<MultiIndex> multi_indices(int pdim, int k);

}  // namespace qcorr
