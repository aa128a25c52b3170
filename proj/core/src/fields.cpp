#include "qcorr/fields.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "qcorr/symplectic.hpp"

namespace qcorr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double factorial(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i)
        r *= i;
    return r;
}

double multinomial_weight(const MultiIndex& n)
{
    double r = factorial(order_of(n));
    for (int v : n)
        r /= factorial(v);
    return r;
}

double matrix_norm(const CMat& m)
{
    if (m.cols() == 1)
        return m.norm();
    Eigen::JacobiSVD<CMat> svd(m);
    return svd.singularValues()(0);
}

/// All m ≤ n componentwise, with ∏ C(n_i, m_i).
void sub_indices(const MultiIndex& n, std::vector<std::pair<MultiIndex, double>>& out)
{
    out.clear();
    MultiIndex m(n.size(), 0);
    while (true) {
        double c = 1.0;
        for (std::size_t i = 0; i < n.size(); ++i) {
            double b = 1.0;
            for (int r = 0; r < m[i]; ++r)
                b = b * (n[i] - r) / (r + 1);
            c *= b;
        }
        out.emplace_back(m, c);
        std::size_t i = 0;
        while (i < n.size() && ++m[i] > n[i]) {
            m[i] = 0;
            ++i;
        }
        if (i == n.size())
            break;
    }
}

/// ∂^m ∇L as a complex vector (component c is ∂^{m+e_c}L).
CVec shifted_gradient(const Symbol& l, const Vec& a, const MultiIndex& m)
{
    const int pdim = l.phase_dim();
    CVec g(pdim);
    MultiIndex mm = m;
    for (int c = 0; c < pdim; ++c) {
        ++mm[c];
        g(c) = l.derivative(a, mm);
        --mm[c];
    }
    return g;
}

double directional_sup(const std::vector<MultiIndex>& idx, const std::vector<CMat>& parts, int pdim)
{
    const int k = idx.empty() ? 0 : order_of(idx.front());
    std::vector<double> w(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        w[i] = multinomial_weight(idx[i]);
    auto eval = [&](const Vec& beta) {
        CMat t = CMat::Zero(parts[0].rows(), parts[0].cols());
        for (std::size_t i = 0; i < idx.size(); ++i) {
            double mono = w[i];
            for (int c = 0; c < pdim; ++c)
                for (int r = 0; r < idx[i][c]; ++r)
                    mono *= beta(c);
            if (mono != 0.0)
                t += mono * parts[i];
        }
        return matrix_norm(t);
    };
    if (k == 0)
        return matrix_norm(parts[0]);

    bool all_zero = true;
    for (const CMat& p : parts)
        if (p.cwiseAbs().maxCoeff() != 0.0)
            all_zero = false;
    if (all_zero)
        return 0.0;

    if (pdim == 2) {
        constexpr int samples = 128;
        double best = -1.0, best_t = 0.0;
        Vec beta(2);
        for (int s = 0; s < samples; ++s) {
            const double t = M_PI * s / samples;
            beta << std::cos(t), std::sin(t);
            const double v = eval(beta);
            if (v > best) {
                best = v;
                best_t = t;
            }
        }
        // Golden-section refinement around the best sample.
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double lo = best_t - M_PI / samples, hi = best_t + M_PI / samples;
        auto f = [&](double t) {
            beta << std::cos(t), std::sin(t);
            return eval(beta);
        };
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 40; ++it) {
            if (f1 < f2) {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1);
            }
        }
        return std::max({best, f1, f2});
    }

    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    Vec best_beta = Vec::Zero(pdim);
    double best = -1.0;
    for (int s = 0; s < 1000; ++s) {
        Vec b(pdim);
        for (int c = 0; c < pdim; ++c)
            b(c) = nd(rng);
        b.normalize();
        const double v = eval(b);
        if (v > best) {
            best = v;
            best_beta = b;
        }
    }
    double step = 0.2;
    for (int it = 0; it < 400 && step > 1e-8; ++it) {
        Vec b(pdim);
        for (int c = 0; c < pdim; ++c)
            b(c) = best_beta(c) + step * nd(rng);
        b.normalize();
        const double v = eval(b);
        if (v > best) {
            best = v;
            best_beta = b;
        } else if (it % 20 == 19) {
            step *= 0.5;
        }
    }
    return best;
}

std::vector<CMat> collect(const FieldDerivative& field, const std::vector<MultiIndex>& idx, const Vec& a)
{
    std::vector<CMat> parts;
    parts.reserve(idx.size());
    for (const MultiIndex& n : idx)
        parts.push_back(field(a, n));
    return parts;
}

void require_order(const Symbol& s, int k, const char* what)
{
    if (s.max_order() < k)
        throw DomainError(std::string(what) + ": derivative order unavailable");
}

}  // namespace

DerivedFields derived_fields(const DynamicsModel& model, const Vec& alpha)
{
    const int pdim = model.phase_dim();
    if (alpha.size() != pdim)
        throw DimensionError("derived_fields: phase point has wrong length");
    const Mat w = symplectic_form(model.dim());
    const CMat wc = w.cast<cplx>();
    const Jet2 jh = model.hamiltonian().jet2(alpha);

    DerivedFields f;
    f.hamiltonian = jh.value.real();
    f.grad_h = jh.grad.real();
    f.hess_h = jh.hess.real();
    f.friction = Vec::Zero(pdim);
    f.friction_gradient = Mat::Zero(pdim, pdim);
    f.scaled_diffusion = Mat::Zero(pdim, pdim);
    f.lindblad_hamiltonian_flow = Mat::Zero(pdim, pdim);
    Vec div_omega = Vec::Zero(pdim);

    for (const Symbol& l : model.lindblads()) {
        const Jet2 j = l.jet2(alpha);
        const CVec wl = wc * j.grad;
        const CVec wlc = wc * j.grad.conjugate();
        const CMat shift = j.value * (wc * j.hess.conjugate());
        f.friction += (j.value * wlc).imag();
        f.friction_gradient += (wlc * j.grad.transpose()).imag() + shift.imag();
        f.lindblad_hamiltonian_flow += shift.imag();
        f.scaled_diffusion += (wl * wl.adjoint()).real();
        div_omega += ((wc * j.hess) * wlc).real();
        f.lindblad_values.push_back(j.value);
    }
    f.scaled_diffusion = symmetrize(f.scaled_diffusion);
    f.diffusion = model.hbar() * f.scaled_diffusion;
    f.hessian_flow = w * f.hess_h;
    f.drift = w * f.grad_h + f.friction;
    f.mean_drift = f.drift + 0.5 * model.hbar() * div_omega;
    return f;
}

Vec friction(const DynamicsModel& model, const Vec& alpha)
{
    for (const Symbol& l : model.lindblads())
        require_order(l, 1, "friction");
    return derived_fields(model, alpha).friction;
}

Mat diffusion(const DynamicsModel& model, const Vec& alpha)
{
    for (const Symbol& l : model.lindblads())
        require_order(l, 1, "diffusion");
    return derived_fields(model, alpha).diffusion;
}

Mat scaled_diffusion(const DynamicsModel& model, const Vec& alpha)
{
    return derived_fields(model, alpha).scaled_diffusion;
}

Vec drift(const DynamicsModel& model, const Vec& alpha) { return derived_fields(model, alpha).drift; }

Vec mean_drift(const DynamicsModel& model, const Vec& alpha)
{
    return derived_fields(model, alpha).mean_drift;
}

Mat localization_matrix(const DynamicsModel& model, const Vec& alpha)
{
    return derived_fields(model, alpha).diffusion / (model.hbar() * model.hbar());
}

FieldDerivative symbol_field(const Symbol& s)
{
    return [s](const Vec& a, const MultiIndex& n) {
        CMat m(1, 1);
        m(0, 0) = s.derivative(a, n);
        return m;
    };
}

FieldDerivative friction_field(const DynamicsModel& model)
{
    const Mat w = symplectic_form(model.dim());
    const std::vector<Symbol> ls = model.lindblads();
    const int pdim = model.phase_dim();
    return [w, ls, pdim](const Vec& a, const MultiIndex& n) {
        // ∂ⁿG = Im Σ_k Σ_{m≤n} C(n,m) ∂^mL_k · ω ∂^{n−m}∇L_k*
        CVec g = CVec::Zero(pdim);
        std::vector<std::pair<MultiIndex, double>> subs;
        sub_indices(n, subs);
        for (const Symbol& l : ls) {
            for (const auto& [m, c] : subs) {
                MultiIndex rest(n.size());
                for (std::size_t i = 0; i < n.size(); ++i)
                    rest[i] = n[i] - m[i];
                g += c * l.derivative(a, m) * (w.cast<cplx>() * shifted_gradient(l, a, rest).conjugate());
            }
        }
        CMat out(pdim, 1);
        out.col(0) = g.imag().cast<cplx>();
        return out;
    };
}

FieldDerivative scaled_diffusion_field(const DynamicsModel& model)
{
    const Mat w = symplectic_form(model.dim());
    const std::vector<Symbol> ls = model.lindblads();
    const int pdim = model.phase_dim();
    return [w, ls, pdim](const Vec& a, const MultiIndex& n) {
        CMat om = CMat::Zero(pdim, pdim);
        std::vector<std::pair<MultiIndex, double>> subs;
        sub_indices(n, subs);
        const CMat wc = w.cast<cplx>();
        for (const Symbol& l : ls) {
            for (const auto& [m, c] : subs) {
                MultiIndex rest(n.size());
                for (std::size_t i = 0; i < n.size(); ++i)
                    rest[i] = n[i] - m[i];
                const CVec x = wc * shifted_gradient(l, a, m);
                const CVec y = wc * shifted_gradient(l, a, rest).conjugate();
                om += c * x * y.transpose();
            }
        }
        return CMat(om.real().cast<cplx>());
    };
}

double directional_norm(const FieldDerivative& field, int phase_dim, int k, const Vec& alpha)
{
    const std::vector<MultiIndex> idx = multi_indices(phase_dim, k);
    return directional_sup(idx, collect(field, idx, alpha), phase_dim);
}

double ck_seminorm(const FieldDerivative& field, int phase_dim, int k, const std::vector<Vec>& probes)
{
    const std::vector<MultiIndex> idx = multi_indices(phase_dim, k);
    double best = 0.0;
    for (const Vec& a : probes)
        best = std::max(best, directional_sup(idx, collect(field, idx, a), phase_dim));
    return best;
}

double ck_seminorm(const Symbol& s, int k, const std::vector<Vec>& probes)
{
    const int deg = s.polynomial_degree();
    if (deg >= 0 && k > deg)
        return 0.0;
    require_order(s, k, "ck_seminorm");
    return ck_seminorm(symbol_field(s), s.phase_dim(), k, probes);
}

DiffusionStrength diffusion_strength(const DynamicsModel& model, FrictionBranch branch)
{
    DiffusionStrength out;
    out.frictionless = branch == FrictionBranch::automatic ? model.frictionless()
                                                           : branch == FrictionBranch::frictionless;
    out.inf_ratio = kInf;
    out.inf_condition = kInf;
    out.inf_lambda_min = kInf;
    for (const Vec& a : model.probes()) {
        const DerivedFields f = derived_fields(model, a);
        Eigen::SelfAdjointEigenSolver<Mat> eo(f.scaled_diffusion, Eigen::EigenvaluesOnly);
        const double lmin = eo.eigenvalues()(0);
        const double lmax = eo.eigenvalues()(eo.eigenvalues().size() - 1);
        if (!(lmin > 1e-14 * std::max(1.0, lmax)))
            throw DomainError("relative_diffusion_strength: scaled diffusion is degenerate (lambda_min <= 0); "
                              "model is not admissible");
        out.inf_lambda_min = std::min(out.inf_lambda_min, lmin);
        Eigen::SelfAdjointEigenSolver<Mat> eh(symmetrize(f.hess_h), Eigen::EigenvaluesOnly);
        const double hmax = eh.eigenvalues()(eh.eigenvalues().size() - 1);
        if (hmax > 0)
            out.inf_ratio = std::min(out.inf_ratio, lmin / hmax);
        out.inf_condition = std::min(out.inf_condition, std::sqrt(lmin / lmax));
    }
    if (out.frictionless)
        out.z = std::min(out.inf_ratio, 1.0);
    else
        out.z = std::min(0.5 * out.inf_ratio, out.inf_condition);
    return out;
}

double relative_diffusion_strength(const DynamicsModel& model, FrictionBranch branch)
{
    return diffusion_strength(model, branch).z;
}

double anharmonicity_classical(const DynamicsModel& model)
{
    require_order(model.hamiltonian(), 3, "anharmonicity_classical");
    bool all_affine = true;
    for (const Symbol& l : model.lindblads()) {
        require_order(l, 3, "anharmonicity_classical");
        const int deg = l.polynomial_degree();
        if (deg < 0 || deg > 1)
            all_affine = false;
    }
    const auto& probes = model.probes();
    const int pdim = model.phase_dim();
    double b = ck_seminorm(model.hamiltonian(), 3, probes);
    // Affine L make G linear and Ω constant, so both seminorms vanish.
    if (!all_affine) {
        b += ck_seminorm(friction_field(model), pdim, 2, probes);
        b += ck_seminorm(scaled_diffusion_field(model), pdim, 1, probes);
    }
    return b;
}

QuantumAnharmonicity anharmonicity_quantum(const DynamicsModel& model, int max_order)
{
    const int d = model.dim();
    const double hbar = model.hbar();
    const auto& probes = model.probes();
    QuantumAnharmonicity out;

    auto cap = [&](const Symbol& s, int wanted) {
        int k = wanted;
        if (max_order >= 0)
            k = std::min(k, max_order);
        k = std::min(k, s.max_order());
        if (k < wanted)
            out.truncated = true;
        out.max_order_used = std::max(out.max_order_used, k);
        return k;
    };
    auto q_sum = [&](const Symbol& s, int q, int r, double weight) {
        double sum = 0.0;
        for (int j = q; j <= r; ++j)
            sum += std::pow(weight, 0.5 * (j - q)) * ck_seminorm(s, j, probes);
        return sum;
    };

    out.b_q = q_sum(model.hamiltonian(), 3, cap(model.hamiltonian(), 2 * d + 4), hbar);
    for (const Symbol& l : model.lindblads())
        out.b_q += q_sum(l, 1, cap(l, 1), hbar) * q_sum(l, 2, cap(l, 2 * d + 3), hbar);

    double z = 0.0;
    bool have_z = true;
    try {
        z = relative_diffusion_strength(model);
    } catch (const DomainError&) {
        have_z = false;
    }
    if (model.lindblads().empty()) {
        out.b_q_prime = 0.0;
        return out;
    }

    bool all_affine = true;
    for (const Symbol& l : model.lindblads()) {
        const int deg = l.polynomial_degree();
        if (deg < 0 || deg > 1)
            all_affine = false;
    }
    if (all_affine) {
        out.b_q_prime = 0.0;
        return out;
    }
    if (!have_z) {
        out.b_q_prime = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const double nu = std::sqrt(hbar / z);

    // Subsample α for the nonlocal sup; β ranges over every probe.
    const std::size_t stride = std::max<std::size_t>(1, probes.size() / 400);
    for (const Symbol& l : model.lindblads()) {
        const int top = cap(l, 2 * d + 6);
        std::vector<std::vector<double>> norms;  // norms[j-3][probe]
        for (int j = 3; j <= top; ++j) {
            std::vector<double> row(probes.size(), 0.0);
            const int deg = l.polynomial_degree();
            if (!(deg >= 0 && j > deg)) {
                const std::vector<MultiIndex> idx = multi_indices(model.phase_dim(), j);
                for (std::size_t p = 0; p < probes.size(); ++p)
                    row[p] = directional_sup(idx, collect(symbol_field(l), idx, probes[p]), model.phase_dim());
            }
            norms.push_back(std::move(row));
        }
        double best = 0.0;
        for (std::size_t ia = 0; ia < probes.size(); ia += stride) {
            const Vec& a = probes[ia];
            double n_val = 0.0;
            for (int j = 3; j <= top; ++j) {
                double sup = 0.0;
                for (std::size_t p = 0; p < probes.size(); ++p) {
                    const double v = norms[j - 3][p];
                    if (v == 0.0)
                        continue;
                    sup = std::max(sup, v / (1.0 + (probes[p] - a).norm() / nu));
                }
                n_val += std::pow(hbar, 0.5 * (j - 3)) * sup;
            }
            best = std::max(best, std::abs(l(a)) * n_val);
        }
        const double q = q_sum(l, 2, cap(l, 4 * d + 6), hbar);
        out.b_q_prime += best + nu * q * q;
    }
    return out;
}

bool AdmissibilityReport::pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const AdmissibilityCheck& c) { return c.pass; });
}

AdmissibilityReport admissibility_report(const DynamicsModel& model, const AdmissibilityOptions& opts)
{
    AdmissibilityReport rep;
    rep.box = model.domain_box();
    const int pdim = model.phase_dim();
    const std::vector<Vec>& full = model.probes();
    const std::vector<Vec> half = sample_probes(model.domain_box().scaled(0.5), model.probe_options());

    auto max_partial = [&](const Symbol& s, int lo, int hi, const std::vector<Vec>& pts) {
        double m = 0.0;
        for (int k = lo; k <= hi; ++k) {
            if (s.max_order() < k)
                break;
            const int deg = s.polynomial_degree();
            if (deg >= 0 && k > deg)
                break;
            for (const MultiIndex& n : multi_indices(pdim, k))
                for (const Vec& a : pts)
                    m = std::max(m, std::abs(s.derivative(a, n)));
        }
        return m;
    };
    auto growth_check = [&](std::string name, double v_full, double v_half) {
        AdmissibilityCheck c;
        c.name = std::move(name);
        c.value = v_full;
        c.reference = v_half;
        c.threshold = opts.growth_ratio;
        const bool grows = v_full > opts.growth_ratio * v_half && v_full > 1e-12;
        c.pass = !grows && v_full < opts.bound;
        if (grows)
            c.note = "sampled sup grows with box size";
        else if (!(v_full < opts.bound))
            c.note = "sampled sup exceeds bound";
        rep.checks.push_back(c);
    };

    growth_check("hamiltonian_derivatives", max_partial(model.hamiltonian(), 2, opts.order, full),
                 max_partial(model.hamiltonian(), 2, opts.order, half));
    for (std::size_t k = 0; k < model.lindblads().size(); ++k) {
        const Symbol& l = model.lindblads()[k];
        growth_check("lindblad_" + std::to_string(k) + "_derivatives", max_partial(l, 1, opts.order, full),
                     max_partial(l, 1, opts.order, half));
    }

    // Nonlocal ratio sup |L(α)||∂ʲL(β)|/(1+|α−β|), 3 ≤ j ≤ 2d+4.
    for (std::size_t k = 0; k < model.lindblads().size(); ++k) {
        const Symbol& l = model.lindblads()[k];
        auto ratio = [&](const std::vector<Vec>& pts) {
            const std::size_t stride = std::max<std::size_t>(1, pts.size() / opts.pair_points);
            std::vector<double> dmax(pts.size(), 0.0);
            const int deg = l.polynomial_degree();
            for (int j = 3; j <= 2 * model.dim() + 4 && j <= l.max_order(); ++j) {
                if (deg >= 0 && j > deg)
                    break;
                for (const MultiIndex& n : multi_indices(pdim, j))
                    for (std::size_t p = 0; p < pts.size(); ++p)
                        dmax[p] = std::max(dmax[p], std::abs(l.derivative(pts[p], n)));
            }
            double best = 0.0;
            for (std::size_t ia = 0; ia < pts.size(); ia += stride) {
                const double la = std::abs(l(pts[ia]));
                for (std::size_t p = 0; p < pts.size(); ++p)
                    if (dmax[p] > 0)
                        best = std::max(best, la * dmax[p] / (1.0 + (pts[ia] - pts[p]).norm()));
            }
            return best;
        };
        growth_check("lindblad_" + std::to_string(k) + "_nonlocal_ratio", ratio(full), ratio(half));
    }

    AdmissibilityCheck nd;
    nd.name = "diffusion_nondegenerate";
    nd.value = kInf;
    for (const Vec& a : full) {
        Eigen::SelfAdjointEigenSolver<Mat> eo(derived_fields(model, a).scaled_diffusion, Eigen::EigenvaluesOnly);
        nd.value = std::min(nd.value, eo.eigenvalues()(0));
    }
    if (model.lindblads().empty())
        nd.value = 0.0;
    nd.threshold = 0.0;
    nd.pass = nd.value > 1e-12;
    if (!nd.pass)
        nd.note = "inf lambda_min[Omega] is not positive";
    rep.checks.push_back(nd);
    return rep;
}

CharacteristicScales characteristic_scales(const DynamicsModel& model)
{
    CharacteristicScales cs;
    const Symbol& h = model.hamiltonian();
    const auto& probes = model.probes();
    const int d = model.dim();
    const double c2 = ck_seminorm(h, 2, probes);
    const double c3 = ck_seminorm(h, 3, probes);
    cs.t_harm = c2 > 0 ? 1.0 / c2 : kInf;
    cs.s_anh = c3 > 0 ? (c2 / c3) * (c2 / c3) : kInf;

    int top = 2 * d + 4;
    if (h.max_order() < top) {
        top = h.max_order();
        cs.truncated = true;
    }
    if (std::isinf(cs.s_anh)) {
        cs.s_h = kInf;
    } else {
        double q = 0.0;
        for (int j = 3; j <= top; ++j)
            q += std::pow(cs.s_anh, 0.5 * (j - 3)) * ck_seminorm(h, j, probes);
        cs.s_h = (c2 / q) * (c2 / q);
    }
    const Mat& z = model.unit_transform();
    const double factor = cs.s_h / cs.t_harm;
    cs.d_char = Mat(z * z.transpose());
    // Keep structural zeros of ZZᵀ when the factor is infinite.
    for (Eigen::Index i = 0; i < cs.d_char.size(); ++i) {
        double& e = cs.d_char.data()[i];
        if (e != 0.0)
            e *= factor;
    }
    return cs;
}

}  // namespace qcorr
