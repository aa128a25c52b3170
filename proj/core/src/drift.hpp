#pragma once

#include <vector>

#include "qcorr/model.hpp"

namespace qcorr::detail {

/// u = ω∇H + Im Σ L ω ∇L*, from first derivatives only.
class DriftEvaluator {
public:
    explicit DriftEvaluator(const DynamicsModel& model)
        : model_(model), n_(model.phase_dim()), d_(model.dim()), unit_(n_)
    {
        for (int a = 0; a < n_; ++a) {
            unit_[a] = MultiIndex(n_, 0);
            unit_[a][a] = 1;
        }
        // Quadratic H with affine L_k gives an affine drift; tabulate it once.
        const int hd = model.hamiltonian().polynomial_degree();
        affine_ = hd >= 0 && hd <= 2;
        for (const Symbol& l : model.lindblads()) {
            const int ld = l.polynomial_degree();
            affine_ = affine_ && ld >= 0 && ld <= 1;
        }
        if (affine_) {
            const Vec zero = Vec::Zero(n_);
            offset_ = general_drift(zero);
            jacobian_.resize(n_, n_);
            for (int c = 0; c < n_; ++c)
                jacobian_.col(c) = general_drift(Vec::Unit(n_, c)) - offset_;
        }
    }

    bool affine() const { return affine_; }

    Vec grad(const Symbol& s, const Vec& a) const
    {
        Vec g(n_);
        for (int i = 0; i < n_; ++i)
            g(i) = s.derivative(a, unit_[i]).real();
        return g;
    }

    CVec cgrad(const Symbol& s, const Vec& a) const
    {
        CVec g(n_);
        for (int i = 0; i < n_; ++i)
            g(i) = s.derivative(a, unit_[i]);
        return g;
    }

    static Vec apply_omega(const Vec& v, int d)
    {
        Vec out(v.size());
        out.head(d) = v.tail(d);
        out.tail(d) = -v.head(d);
        return out;
    }

    static CVec apply_omega(const CVec& v, int d)
    {
        CVec out(v.size());
        out.head(d) = v.tail(d);
        out.tail(d) = -v.head(d);
        return out;
    }

    Vec drift(const Vec& a) const
    {
        if (affine_)
            return offset_ + jacobian_ * a;
        return general_drift(a);
    }

    /// Allocation-free form for the affine case; falls back to drift() otherwise.
    void drift_into(const Vec& a, Vec& out) const
    {
        if (affine_) {
            out.noalias() = jacobian_ * a;
            out += offset_;
        } else {
            out = general_drift(a);
        }
    }

    Vec general_drift(const Vec& a) const
    {
        Vec u = apply_omega(grad(model_.hamiltonian(), a), d_);
        for (const Symbol& l : model_.lindblads()) {
            const cplx l0 = l(a);
            const CVec wg = apply_omega(CVec(cgrad(l, a).conjugate()), d_);
            u += (l0 * wg).imag();
        }
        return u;
    }

    /// Columns √ħ·Re(ω∇L_k), √ħ·Im(ω∇L_k).
    Mat noise_matrix(const Vec& a) const
    {
        const auto& ls = model_.lindblads();
        Mat b(n_, 2 * ls.size());
        const double sh = std::sqrt(model_.hbar());
        for (std::size_t k = 0; k < ls.size(); ++k) {
            const CVec wl = apply_omega(cgrad(ls[k], a), d_);
            b.col(2 * k) = sh * wl.real();
            b.col(2 * k + 1) = sh * wl.imag();
        }
        return b;
    }

private:
    const DynamicsModel& model_;
    int n_, d_;
    std::vector<MultiIndex> unit_;
    bool affine_ = false;
    Vec offset_;
    Mat jacobian_;
};

}  // namespace qcorr::detail
