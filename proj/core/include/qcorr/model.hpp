#pragma once

#include <cstdint>
#include <vector>

#include "qcorr/symbol.hpp"

namespace qcorr {

/// Axis-aligned box in phase space over which suprema and infima are sampled.
struct DomainBox {
    Vec lo;
    Vec hi;

    static DomainBox symmetric(const Vec& half_width);
    int phase_dim() const { return static_cast<int>(lo.size()); }
    bool contains(const Vec& a) const;
    DomainBox scaled(double factor) const;  // about the centre
};

struct ProbeOptions {
    int count = 10000;     // lattice plus pseudo-random points
    std::uint64_t seed = 20240917;
};

std::vector<Vec> sample_probes(const DomainBox& box, const ProbeOptions& opts);

/// Problem data (H, {L_k}, ħ) in uniform units. Immutable after construction.
class DynamicsModel {
public:
    /// `unit_transform` Z (identity when empty) is applied once: the stored symbols
    /// are H(Zα) and L_k(Zα).
    DynamicsModel(Symbol hamiltonian, std::vector<Symbol> lindblads, double hbar, DomainBox box,
                  Mat unit_transform = Mat(), ProbeOptions probes = {});

    const Symbol& hamiltonian() const { return h_; }
    const std::vector<Symbol>& lindblads() const { return l_; }
    double hbar() const { return hbar_; }
    int dim() const { return d_; }
    int phase_dim() const { return 2 * d_; }
    const Mat& unit_transform() const { return z_; }
    const DomainBox& domain_box() const { return box_; }
    const ProbeOptions& probe_options() const { return probe_opts_; }
    const std::vector<Vec>& probes() const { return probes_; }

    /// True when every L_k is affine, so D is constant over phase space.
    bool constant_diffusion() const { return constant_diffusion_; }
    /// G ≡ 0 on all probes.
    bool frictionless() const { return frictionless_; }
    /// True when no L_k is present.
    bool closed() const { return l_.empty(); }

    DynamicsModel with_hbar(double hbar) const;
    DynamicsModel with_box(const DomainBox& box) const;

private:
    void detect_friction();

    Symbol h_;
    std::vector<Symbol> l_;
    double hbar_;
    int d_;
    DomainBox box_;
    Mat z_;
    ProbeOptions probe_opts_;
    std::vector<Vec> probes_;
    bool constant_diffusion_ = true;
    bool frictionless_ = true;
};

}  // namespace qcorr
