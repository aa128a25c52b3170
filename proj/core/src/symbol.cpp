#include "qcorr/symbol.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace qcorr {

namespace {

double falling(int e, int n)
{
    double r = 1.0;
    for (int i = 0; i < n; ++i)
        r *= e - i;
    return r;
}

double ipow(double x, int e)
{
    double r = 1.0;
    for (int i = 0; i < e; ++i)
        r *= x;
    return r;
}

MultiIndex unit_index(int pdim, int i, int j = -1)
{
    MultiIndex n(pdim, 0);
    ++n[i];
    if (j >= 0)
        ++n[j];
    return n;
}

class PolynomialTerm final : public SymbolTerm {
public:
    PolynomialTerm(int pdim, std::vector<Monomial> m) : pdim_(pdim), monos_(std::move(m))
    {
        for (const Monomial& mono : monos_) {
            if (static_cast<int>(mono.exponents.size()) != pdim_)
                throw DimensionError("polynomial: exponent vector has wrong length");
            int deg = 0;
            for (int e : mono.exponents) {
                if (e < 0)
                    throw DomainError("polynomial: negative exponent");
                deg += e;
            }
            degree_ = std::max(degree_, deg);
        }
    }

    int phase_dim() const override { return pdim_; }

    cplx value(const Vec& a) const override
    {
        cplx s = 0.0;
        for (const Monomial& m : monos_) {
            double v = 1.0;
            for (int i = 0; i < pdim_; ++i)
                v *= ipow(a(i), m.exponents[i]);
            s += m.coeff * v;
        }
        return s;
    }

    cplx derivative(const Vec& a, const MultiIndex& n) const override
    {
        cplx s = 0.0;
        for (const Monomial& m : monos_) {
            double v = 1.0;
            for (int i = 0; i < pdim_ && v != 0.0; ++i) {
                const int e = m.exponents[i];
                if (n[i] > e) {
                    v = 0.0;
                    break;
                }
                v *= falling(e, n[i]) * ipow(a(i), e - n[i]);
            }
            s += m.coeff * v;
        }
        return s;
    }

    bool depends_on(int coord) const override
    {
        for (const Monomial& m : monos_)
            if (m.exponents[coord] > 0 && m.coeff != cplx(0.0))
                return true;
        return false;
    }

    int polynomial_degree() const override { return degree_; }

    void add_jet2(const Vec& a, cplx scale, Jet2& out) const override
    {
        for (const Monomial& m : monos_) {
            const cplx c = scale * m.coeff;
            double base = 1.0;
            for (int i = 0; i < pdim_; ++i)
                base *= ipow(a(i), m.exponents[i]);
            out.value += c * base;
            for (int i = 0; i < pdim_; ++i) {
                const int ei = m.exponents[i];
                if (ei == 0)
                    continue;
                double g = ei;
                for (int k = 0; k < pdim_; ++k)
                    g *= ipow(a(k), m.exponents[k] - (k == i ? 1 : 0));
                out.grad(i) += c * g;
                for (int j = i; j < pdim_; ++j) {
                    const int ej = m.exponents[j] - (j == i ? 1 : 0);
                    if (ej <= 0)
                        continue;
                    double h = ei * ej;
                    for (int k = 0; k < pdim_; ++k)
                        h *= ipow(a(k), m.exponents[k] - (k == i ? 1 : 0) - (k == j ? 1 : 0));
                    out.hess(i, j) += c * h;
                    if (j != i)
                        out.hess(j, i) += c * h;
                }
            }
        }
    }

    std::string describe() const override
    {
        std::ostringstream os;
        os << "poly[";
        for (std::size_t k = 0; k < monos_.size(); ++k) {
            if (k)
                os << ' ';
            os << '(' << monos_[k].coeff.real() << ',' << monos_[k].coeff.imag() << ')';
            for (int e : monos_[k].exponents)
                os << ':' << e;
        }
        os << ']';
        return os.str();
    }

private:
    int pdim_;
    int degree_ = 0;
    std::vector<Monomial> monos_;
};

class CosineTerm final : public SymbolTerm {
public:
    CosineTerm(Vec k, cplx amp, double phase) : k_(std::move(k)), amp_(amp), phase_(phase) {}

    int phase_dim() const override { return static_cast<int>(k_.size()); }
    cplx value(const Vec& a) const override { return amp_ * std::cos(k_.dot(a) + phase_); }

    cplx derivative(const Vec& a, const MultiIndex& n) const override
    {
        double f = 1.0;
        int total = 0;
        for (int i = 0; i < k_.size(); ++i) {
            f *= ipow(k_(i), n[i]);
            total += n[i];
        }
        return amp_ * f * std::cos(k_.dot(a) + phase_ + total * std::numbers::pi / 2);
    }

    bool depends_on(int coord) const override { return k_(coord) != 0.0; }

    void add_jet2(const Vec& a, cplx scale, Jet2& out) const override
    {
        const double arg = k_.dot(a) + phase_;
        const cplx c = scale * amp_;
        out.value += c * std::cos(arg);
        out.grad += (-c * std::sin(arg)) * k_.cast<cplx>();
        out.hess += (-c * std::cos(arg)) * (k_ * k_.transpose()).cast<cplx>();
    }

    std::string describe() const override
    {
        std::ostringstream os;
        os << "cos[(" << amp_.real() << ',' << amp_.imag() << ")";
        for (int i = 0; i < k_.size(); ++i)
            os << ':' << k_(i);
        os << ':' << phase_ << ']';
        return os.str();
    }

private:
    Vec k_;
    cplx amp_;
    double phase_;
};

class FunctionTerm final : public SymbolTerm {
public:
    FunctionTerm(int pdim, std::function<cplx(const Vec&)> f, std::string name, FiniteDifferenceOptions fd,
                 DerivativeFn deriv, int n_max)
        : pdim_(pdim), f_(std::move(f)), name_(std::move(name)), fd_(fd), deriv_(std::move(deriv)),
          n_max_(deriv_ ? n_max : fd.max_order)
    {
    }

    int phase_dim() const override { return pdim_; }
    cplx value(const Vec& a) const override { return f_(a); }

    cplx derivative(const Vec& a, const MultiIndex& n) const override
    {
        const int k = order_of(n);
        if (k == 0)
            return f_(a);
        if (deriv_)
            return deriv_(a, n);
        const double h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / (k + 2)) * fd_.scale;
        return finite_difference(f_, a, n, h);
    }

    int max_order() const override { return n_max_; }
    std::string describe() const override { return name_; }

private:
    int pdim_;
    std::function<cplx(const Vec&)> f_;
    std::string name_;
    FiniteDifferenceOptions fd_;
    DerivativeFn deriv_;
    int n_max_;
};

class TransformedTerm final : public SymbolTerm {
public:
    TransformedTerm(Symbol inner, Mat z) : inner_(std::move(inner)), z_(std::move(z)) {}

    int phase_dim() const override { return inner_.phase_dim(); }
    cplx value(const Vec& a) const override { return inner_(z_ * a); }

    cplx derivative(const Vec& a, const MultiIndex& n) const override
    {
        // ∂_{a1..ak}(E∘Z) = Σ_b ∏ Z_{b_j a_j} (∂_{b1..bk}E)(Zα)
        std::vector<int> axes;
        for (int i = 0; i < static_cast<int>(n.size()); ++i)
            for (int r = 0; r < n[i]; ++r)
                axes.push_back(i);
        std::map<MultiIndex, double> weights;
        MultiIndex acc(phase_dim(), 0);
        accumulate(axes, 0, 1.0, acc, weights);
        const Vec za = z_ * a;
        cplx s = 0.0;
        for (const auto& [m, w] : weights)
            if (w != 0.0)
                s += w * inner_.derivative(za, m);
        return s;
    }

    int max_order() const override { return inner_.max_order(); }
    int polynomial_degree() const override { return inner_.polynomial_degree(); }

    bool depends_on(int coord) const override
    {
        for (int i = 0; i < phase_dim(); ++i)
            if (inner_.depends_on(i) && z_(i, coord) != 0.0)
                return true;
        return false;
    }

    std::string describe() const override { return "transformed(" + inner_.describe() + ")"; }

private:
    void accumulate(const std::vector<int>& axes, std::size_t pos, double w, MultiIndex& acc,
                    std::map<MultiIndex, double>& out) const
    {
        if (pos == axes.size()) {
            out[acc] += w;
            return;
        }
        for (int b = 0; b < phase_dim(); ++b) {
            const double zb = z_(b, axes[pos]);
            if (zb == 0.0)
                continue;
            ++acc[b];
            accumulate(axes, pos + 1, w * zb, acc, out);
            --acc[b];
        }
    }

    Symbol inner_;
    Mat z_;
};

}  // namespace

void SymbolTerm::add_jet2(const Vec& a, cplx scale, Jet2& out) const
{
    const int n = phase_dim();
    out.value += scale * value(a);
    for (int i = 0; i < n; ++i) {
        out.grad(i) += scale * derivative(a, unit_index(n, i));
        for (int j = i; j < n; ++j) {
            const cplx h = scale * derivative(a, unit_index(n, i, j));
            out.hess(i, j) += h;
            if (j != i)
                out.hess(j, i) += h;
        }
    }
}

int order_of(const MultiIndex& n)
{
    int k = 0;
    for (int v : n)
        k += v;
    return k;
}

std::vector<MultiIndex> multi_indices(int pdim, int k)
{
    std::vector<MultiIndex> out;
    MultiIndex cur(pdim, 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (pos == pdim - 1) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int v = left; v >= 0; --v) {
            cur[pos] = v;
            rec(pos + 1, left - v);
        }
    };
    if (pdim > 0)
        rec(0, k);
    return out;
}

cplx finite_difference(const std::function<cplx(const Vec&)>& f, const Vec& a, const MultiIndex& n,
                       double step)
{
    const int pdim = static_cast<int>(a.size());
    std::vector<int> j(pdim, 0);
    cplx sum = 0.0;
    Vec x(pdim);
    while (true) {
        double w = 1.0;
        for (int i = 0; i < pdim; ++i) {
            // binomial(n_i, j_i) with alternating sign
            double b = 1.0;
            for (int r = 0; r < j[i]; ++r)
                b = b * (n[i] - r) / (r + 1);
            w *= (j[i] % 2 ? -b : b);
            x(i) = a(i) + (0.5 * n[i] - j[i]) * step;
        }
        sum += w * f(x);
        int i = 0;
        while (i < pdim && ++j[i] > n[i]) {
            j[i] = 0;
            ++i;
        }
        if (i == pdim)
            break;
    }
    return sum / std::pow(step, order_of(n));
}

Symbol::Symbol(std::shared_ptr<const SymbolTerm> term) : pdim_(term->phase_dim())
{
    terms_.emplace_back(cplx(1.0), std::move(term));
}

cplx Symbol::operator()(const Vec& a) const
{
    cplx s = 0.0;
    for (const auto& [c, t] : terms_)
        s += c * t->value(a);
    return s;
}

cplx Symbol::derivative(const Vec& a, const MultiIndex& n) const
{
    if (static_cast<int>(n.size()) != pdim_)
        throw DimensionError("Symbol::derivative: multi-index has wrong length");
    if (order_of(n) > max_order())
        throw DomainError("Symbol::derivative: requested order exceeds available derivatives");
    cplx s = 0.0;
    for (const auto& [c, t] : terms_)
        s += c * t->derivative(a, n);
    return s;
}

Jet2 Symbol::jet2(const Vec& a) const
{
    Jet2 out(pdim_);
    for (const auto& [c, t] : terms_)
        t->add_jet2(a, c, out);
    return out;
}

int Symbol::max_order() const
{
    int m = kAnyOrder;
    for (const auto& term : terms_)
        m = std::min(m, term.second->max_order());
    return m;
}

bool Symbol::depends_on(int coord) const
{
    for (const auto& [c, t] : terms_)
        if (c != cplx(0.0) && t->depends_on(coord))
            return true;
    return false;
}

int Symbol::polynomial_degree() const
{
    int deg = 0;
    for (const auto& term : terms_) {
        const int d = term.second->polynomial_degree();
        if (d < 0)
            return -1;
        deg = std::max(deg, d);
    }
    return deg;
}

Symbol Symbol::operator+(const Symbol& other) const
{
    if (pdim_ == 0)
        return other;
    if (other.pdim_ == 0)
        return *this;
    if (pdim_ != other.pdim_)
        throw DimensionError("Symbol::operator+: phase dimension mismatch");
    Symbol s = *this;
    s.terms_.insert(s.terms_.end(), other.terms_.begin(), other.terms_.end());
    return s;
}

Symbol Symbol::operator*(cplx c) const
{
    Symbol s = *this;
    for (auto& term : s.terms_)
        term.first *= c;
    return s;
}

Symbol Symbol::transformed(const Mat& z) const
{
    if (z.rows() != pdim_ || z.cols() != pdim_)
        throw DimensionError("Symbol::transformed: transform has wrong shape");
    if (z.isIdentity(0.0) || terms_.empty())
        return *this;
    return Symbol(std::make_shared<TransformedTerm>(*this, z));
}

std::string Symbol::describe() const
{
    std::ostringstream os;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        if (k)
            os << " + ";
        os << '(' << terms_[k].first.real() << ',' << terms_[k].first.imag() << ")*"
           << terms_[k].second->describe();
    }
    return terms_.empty() ? std::string("0") : os.str();
}

namespace symbols {

Symbol constant(int d, cplx c)
{
    return polynomial(d, {Monomial{MultiIndex(2 * d, 0), c}});
}

Symbol polynomial(int d, std::vector<Monomial> monomials)
{
    if (d < 1)
        throw DomainError("polynomial: d must be positive");
    return Symbol(std::make_shared<PolynomialTerm>(2 * d, std::move(monomials)));
}

Symbol linear(const CVec& coeffs, cplx offset)
{
    const int pdim = static_cast<int>(coeffs.size());
    if (pdim == 0 || pdim % 2 != 0)
        throw DimensionError("linear: coefficient vector must have even length");
    std::vector<Monomial> m;
    if (offset != cplx(0.0))
        m.push_back({MultiIndex(pdim, 0), offset});
    for (int i = 0; i < pdim; ++i) {
        if (coeffs(i) == cplx(0.0))
            continue;
        MultiIndex e(pdim, 0);
        e[i] = 1;
        m.push_back({e, coeffs(i)});
    }
    return polynomial(pdim / 2, std::move(m));
}

Symbol cosine(const Vec& k, cplx amplitude, double phase)
{
    if (k.size() == 0 || k.size() % 2 != 0)
        throw DimensionError("cosine: wave vector must have even length");
    return Symbol(std::make_shared<CosineTerm>(k, amplitude, phase));
}

Symbol function(int d, std::function<cplx(const Vec&)> f, std::string name, FiniteDifferenceOptions fd,
                DerivativeFn deriv, int n_max)
{
    return Symbol(std::make_shared<FunctionTerm>(2 * d, std::move(f), std::move(name), fd, std::move(deriv),
                                                 n_max));
}

Symbol clipped(const Symbol& inner, double c)
{
    if (!(c > 0))
        throw DomainError("clipped: clip level must be positive");
    auto f = [inner, c](const Vec& a) { return cplx(c * std::tanh(inner(a).real() / c), 0.0); };
    std::ostringstream name;
    name << "clip[" << c << "](" << inner.describe() << ")";
    return function(inner.dim(), f, name.str());
}

Symbol harmonic(double omega)
{
    return polynomial(1, {{{2, 0}, 0.5 * omega}, {{0, 2}, 0.5 * omega}});
}

Symbol quartic(double a)
{
    return polynomial(1, {{{0, 2}, 0.5}, {{4, 0}, a}});
}

Symbol double_well(double a, double b)
{
    return polynomial(1, {{{0, 2}, 0.5}, {{2, 0}, -0.5 * b}, {{4, 0}, 0.25 * a}});
}

Symbol cosine_lattice(double amplitude, double k)
{
    Vec kv(2);
    kv << k, 0.0;
    return polynomial(1, {{{0, 2}, 0.5}}) + cosine(kv, amplitude);
}

Symbol position(int d, int i)
{
    MultiIndex e(2 * d, 0);
    e[i] = 1;
    return polynomial(d, {{e, 1.0}});
}

Symbol momentum(int d, int i)
{
    MultiIndex e(2 * d, 0);
    e[d + i] = 1;
    return polynomial(d, {{e, 1.0}});
}

}  // namespace symbols

}  // namespace qcorr
