#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qcorr/model.hpp"

namespace qcorr {

/// Classical tensor fields of the corresponding dynamics at one phase point.
struct DerivedFields {
    double hamiltonian = 0.0;
    Vec grad_h;
    Mat hess_h;
    Vec friction;           // G^a
    Mat friction_gradient;  // F^a_b = ∂_b G^a
    Mat scaled_diffusion;   // Ω
    Mat diffusion;          // D = ħΩ
    Mat hessian_flow;       // h = ω∇²H
    Vec drift;              // u = ∂^a H + G^a
    Vec mean_drift;         // ũ = u + ½∂_b D^{ab}
    std::vector<cplx> lindblad_values;
    /// Im Σ ℓ₀ ω ℓ*_ab: the Hamiltonian piece of F coming from the L_k(α) shift.
    Mat lindblad_hamiltonian_flow;
};

DerivedFields derived_fields(const DynamicsModel& model, const Vec& alpha);

Vec friction(const DynamicsModel& model, const Vec& alpha);
Mat diffusion(const DynamicsModel& model, const Vec& alpha);
Mat scaled_diffusion(const DynamicsModel& model, const Vec& alpha);
Vec drift(const DynamicsModel& model, const Vec& alpha);
Vec mean_drift(const DynamicsModel& model, const Vec& alpha);
Mat localization_matrix(const DynamicsModel& model, const Vec& alpha);

/// Derivative ∂ⁿ of a scalar, vector or matrix field at α (returned as a matrix).
using FieldDerivative = std::function<CMat(const Vec&, const MultiIndex&)>;

FieldDerivative symbol_field(const Symbol& s);
FieldDerivative friction_field(const DynamicsModel& model);
FieldDerivative scaled_diffusion_field(const DynamicsModel& model);

/// sup over unit β of ‖Σ_{|n|=k} (k!/n!) βⁿ ∂ⁿE(α)‖ at a single point.
double directional_norm(const FieldDerivative& field, int phase_dim, int k, const Vec& alpha);

/// |E|_{C^k}: the directional norm maximised over the probe set.
double ck_seminorm(const FieldDerivative& field, int phase_dim, int k, const std::vector<Vec>& probes);
double ck_seminorm(const Symbol& s, int k, const std::vector<Vec>& probes);

enum class FrictionBranch { automatic, frictionless, frictionful };

struct DiffusionStrength {
    double z = 0.0;
    bool frictionless = false;
    double inf_ratio = 0.0;      // inf λ_min[Ω]/λ_max[∇²H]
    double inf_condition = 0.0;  // inf (λ_min[Ω]/λ_max[Ω])^{1/2}
    double inf_lambda_min = 0.0;
};

DiffusionStrength diffusion_strength(const DynamicsModel& model,
                                     FrictionBranch branch = FrictionBranch::automatic);
double relative_diffusion_strength(const DynamicsModel& model,
                                   FrictionBranch branch = FrictionBranch::automatic);

double anharmonicity_classical(const DynamicsModel& model);

struct QuantumAnharmonicity {
    double b_q = 0.0;
    double b_q_prime = 0.0;
    bool truncated = false;
    int max_order_used = 0;
};

/// max_order < 0 selects the full orders 2d+4 (B_q) and 4d+6 (B_q').
QuantumAnharmonicity anharmonicity_quantum(const DynamicsModel& model, int max_order = -1);

struct AdmissibilityCheck {
    std::string name;
    double value = 0.0;
    double reference = 0.0;  // same quantity on the half-size box, where applicable
    double threshold = 0.0;
    bool pass = true;
    std::string note;
};

struct AdmissibilityOptions {
    int order = 4;
    double growth_ratio = 1.5;       // full-box / half-box sup above this is flagged
    double bound = 1e8;
    int pair_points = 400;           // α points for the nonlocal ratio
};

struct AdmissibilityReport {
    std::vector<AdmissibilityCheck> checks;
    DomainBox box;
    bool pass() const;
};

AdmissibilityReport admissibility_report(const DynamicsModel& model, const AdmissibilityOptions& opts = {});

struct CharacteristicScales {
    double t_harm = std::numeric_limits<double>::infinity();
    double s_anh = std::numeric_limits<double>::infinity();
    double s_h = std::numeric_limits<double>::infinity();
    Mat d_char;
    bool truncated = false;
};

CharacteristicScales characteristic_scales(const DynamicsModel& model);

}  // namespace qcorr
