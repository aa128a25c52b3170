#include "qcorr/model.hpp"

#include <cmath>
#include <random>

#include "qcorr/symplectic.hpp"

namespace qcorr {

DomainBox DomainBox::symmetric(const Vec& half_width)
{
    return DomainBox{-half_width, half_width};
}

bool DomainBox::contains(const Vec& a) const
{
    for (int i = 0; i < a.size(); ++i)
        if (a(i) < lo(i) || a(i) > hi(i))
            return false;
    return true;
}

DomainBox DomainBox::scaled(double factor) const
{
    const Vec c = 0.5 * (lo + hi);
    const Vec h = 0.5 * (hi - lo) * factor;
    return DomainBox{c - h, c + h};
}

std::vector<Vec> sample_probes(const DomainBox& box, const ProbeOptions& opts)
{
    const int pdim = box.phase_dim();
    if (pdim == 0 || box.hi.size() != pdim)
        throw DimensionError("sample_probes: malformed box");
    for (int i = 0; i < pdim; ++i)
        if (!(box.hi(i) >= box.lo(i)))
            throw DomainError("sample_probes: box upper bound below lower bound");

    std::vector<Vec> out;
    const int n = std::max(2, static_cast<int>(std::floor(std::pow(0.5 * opts.count, 1.0 / pdim))));
    long lattice = 1;
    for (int i = 0; i < pdim; ++i)
        lattice *= n;
    out.reserve(static_cast<std::size_t>(std::max<long>(lattice, opts.count)));
    std::vector<int> idx(pdim, 0);
    for (long c = 0; c < lattice; ++c) {
        Vec a(pdim);
        for (int i = 0; i < pdim; ++i)
            a(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * idx[i] / (n - 1);
        out.push_back(a);
        for (int i = 0; i < pdim && ++idx[i] == n; ++i)
            idx[i] = 0;
    }
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (long c = lattice; c < opts.count; ++c) {
        Vec a(pdim);
        for (int i = 0; i < pdim; ++i)
            a(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * u(rng);
        out.push_back(a);
    }
    return out;
}

DynamicsModel::DynamicsModel(Symbol hamiltonian, std::vector<Symbol> lindblads, double hbar, DomainBox box,
                             Mat unit_transform, ProbeOptions probes)
    : hbar_(hbar), box_(std::move(box)), probe_opts_(probes)
{
    if (!(hbar > 0))
        throw DomainError("DynamicsModel: hbar must be positive");
    const int pdim = hamiltonian.phase_dim();
    if (pdim == 0 || pdim % 2 != 0)
        throw DimensionError("DynamicsModel: Hamiltonian has no valid phase dimension");
    d_ = pdim / 2;
    for (const Symbol& l : lindblads)
        if (l.phase_dim() != pdim)
            throw DimensionError("DynamicsModel: Lindblad symbol dimension mismatch");
    if (box_.lo.size() != pdim || box_.hi.size() != pdim)
        throw DimensionError("DynamicsModel: domain box dimension mismatch");

    if (unit_transform.size() == 0)
        unit_transform = Mat::Identity(pdim, pdim);
    if (unit_transform.rows() != pdim || unit_transform.cols() != pdim)
        throw DimensionError("DynamicsModel: unit transform has wrong shape");
    const Mat w = symplectic_form(d_);
    if ((unit_transform.transpose() * w * unit_transform - w).cwiseAbs().maxCoeff() > 1e-10)
        throw DomainError("DynamicsModel: unit transform is not symplectic");
    z_ = unit_transform;

    h_ = hamiltonian.transformed(z_);
    for (Symbol& l : lindblads)
        l_.push_back(l.transformed(z_));

    probes_ = sample_probes(box_, probe_opts_);

    for (const Vec& a : probes_) {
        const cplx v = h_(a);
        if (std::abs(v.imag()) > 1e-10 * (1.0 + std::abs(v.real())))
            throw DomainError("DynamicsModel: Hamiltonian is not real-valued");
    }

    for (const Symbol& l : l_) {
        const int deg = l.polynomial_degree();
        if (deg < 0 || deg > 1)
            constant_diffusion_ = false;
    }

    detect_friction();
}

void DynamicsModel::detect_friction()
{
    const Mat w = symplectic_form(d_);
    double gmax = 0.0, scale = 1.0;
    for (const Vec& a : probes_) {
        Vec g = Vec::Zero(phase_dim());
        for (const Symbol& l : l_) {
            const Jet2 j = l.jet2(a);
            const CVec wl = w * j.grad.conjugate();
            g += (j.value * wl).imag();
            scale = std::max(scale, std::abs(j.value) * j.grad.norm());
        }
        gmax = std::max(gmax, g.norm());
    }
    frictionless_ = gmax < 1e-12 * scale;
}

DynamicsModel DynamicsModel::with_hbar(double hbar) const
{
    DynamicsModel m = *this;
    if (!(hbar > 0))
        throw DomainError("DynamicsModel: hbar must be positive");
    m.hbar_ = hbar;
    return m;
}

DynamicsModel DynamicsModel::with_box(const DomainBox& box) const
{
    DynamicsModel m = *this;
    if (box.phase_dim() != phase_dim())
        throw DimensionError("DynamicsModel: domain box dimension mismatch");
    m.box_ = box;
    m.probes_ = sample_probes(box, probe_opts_);
    m.detect_friction();
    return m;
}

}  // namespace qcorr
