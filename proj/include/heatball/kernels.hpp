#pragma once

// Positive space-time densities Psi with analytic psi = log Psi and its
// radial/time derivatives: the Euclidean backward heat kernel, spectral heat
// kernels on round spheres, the closed-form H^3 kernel, space-form transplants
// evaluated through a comparison manifold's distance function, and Perelman's
// reduced-volume density. A residual auditor checks the conjugate heat
// equation (d/dtau - Delta - tr_g h) Psi = 0 with the model's radial
// Laplacian.
//
// Conventions: tau is backward time, singular at tau = 0; all fields are
// radial about the model's pole, with d the g(tau)-distance from it. psi_tau
// is the derivative at a fixed co-moving point. Forward-time derivatives are
// psi_t = -psi_tau.

#include <memory>

#include "heatball/models.hpp"

namespace heatball {
namespace kernels {

enum class KernelKind {
    EuclideanBackward,
    SphereSpectral,
    Hyperbolic3ClosedForm,
    Transplant,
    ReducedVolumeDensity,
};

const char* to_string(KernelKind k);

struct PsiEval {
    double psi = 0.0;
    double psi_d = 0.0;
    double psi_tau = 0.0;
    double psi_dd = 0.0;
};

class KernelField {
  public:
    virtual ~KernelField() = default;

    const models::ModelSpacetime& model() const { return model_; }
    KernelKind kind() const { return kind_; }
    int dim() const { return model_.dim; }
    double horizon() const { return model_.horizon; }

    virtual PsiEval eval(double d, double tau) const = 0;
    double psi(double d, double tau) const { return eval(d, tau).psi; }
    double density(double d, double tau) const { return std::exp(eval(d, tau).psi); }

    /// Fundamental solution of the conjugate heat equation (as opposed to the
    /// subsolution-only reduced-volume density or a transplant).
    virtual bool is_fundamental_solution() const = 0;

    /// Smallest tau at which eval honors its accuracy contract. Spectral
    /// kernels refuse evaluations below this (truncation cap).
    virtual double min_supported_tau() const { return 0.0; }

    /// Transplant curvature parameter; meaningful only for Transplant kind.
    virtual int space_form_k() const { return 0; }

  protected:
    KernelField(models::ModelSpacetime m, KernelKind k) : model_(m), kind_(k) {}
    models::ModelSpacetime model_;
    KernelKind kind_;
};

using KernelPtr = std::shared_ptr<const KernelField>;

/// Backward heat kernel on a flat model (EuclideanStatic or GaussianSoliton):
/// psi = -(n/2) log(4 pi tau) - d^2 / (4 tau).
KernelPtr euclidean_backward_kernel(const models::ModelSpacetime& flat_model);

/// Heat kernel of the round sphere S^n_rho0, n in {2,3}, as a
/// Legendre/Gegenbauer eigenfunction expansion truncated so the tail bound
/// stays below tol * Psi. Evaluations at tau below the cap's reach are
/// refused rather than silently degraded.
KernelPtr sphere_spectral_kernel(double rho0, int n, double horizon, double tol = 1e-12);

/// Closed-form heat kernel of hyperbolic 3-space (curvature -1):
/// psi = -(3/2) log(4 pi tau) + log(d / sinh d) - d^2/(4 tau) - tau.
KernelPtr hyperbolic3_kernel(double horizon);

/// Transplant of the space-form kernel of curvature k in {-1, 0, 1} onto a
/// static target satisfying Rc >= (n-1) k g (checked; refused otherwise
/// naming the violated bound). The k = -1 space form is H^3, so targets must
/// be 3-dimensional there; k = 1 uses the unit-sphere spectral kernel.
KernelPtr transplant_kernel(int k, const models::ModelSpacetime& target,
                            double spectral_tol = 1e-12);

/// Perelman's reduced-volume density psi = -(n/2) log(4 pi tau) - ell(d, tau)
/// on GaussianSoliton or ShrinkingSphere; ell comes from reduced_geometry.
KernelPtr reduced_volume_density(const models::ModelSpacetime& m);

struct ResidualSample {
    double d = 0.0;
    double tau = 0.0;
    double residual = 0.0;  // (d/dtau - Delta - tr_g h) Psi at the point
    double scale = 0.0;     // Psi there, for relative comparison
};

/// Audits the conjugate heat equation at one point using the model's analytic
/// radial Laplacian Delta = d_dd + (d/dd log sphere_area) d_d.
ResidualSample conjugate_pde_residual(const KernelField& kf, double d, double tau);

}  // namespace kernels
}  // namespace heatball
