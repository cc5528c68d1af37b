#include "heatball/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatball/reduced_geometry.hpp"

namespace heatball {
namespace kernels {

using models::ModelKind;
using models::ModelSpacetime;

const char* to_string(KernelKind k) {
    switch (k) {
        case KernelKind::EuclideanBackward: return "EuclideanBackward";
        case KernelKind::SphereSpectral: return "SphereSpectral";
        case KernelKind::Hyperbolic3ClosedForm: return "Hyperbolic3ClosedForm";
        case KernelKind::Transplant: return "Transplant";
        case KernelKind::ReducedVolumeDensity: return "ReducedVolumeDensity";
    }
    return "?";
}

namespace {

void check_tau_positive(double tau, const char* who) {
    if (!(tau > 0.0))
        throw std::domain_error(std::string(who) + ": tau must be positive, got " +
                                std::to_string(tau));
}

// ---------------------------------------------------------------------------

class EuclideanBackwardKernel final : public KernelField {
  public:
    explicit EuclideanBackwardKernel(ModelSpacetime m)
        : KernelField(m, KernelKind::EuclideanBackward) {
        if (!m.is_flat())
            throw std::invalid_argument("euclidean_backward_kernel: model must be flat");
    }

    PsiEval eval(double d, double tau) const override {
        check_tau_positive(tau, "EuclideanBackwardKernel");
        const double n = dim();
        PsiEval e;
        e.psi = -0.5 * n * std::log(4.0 * M_PI * tau) - d * d / (4.0 * tau);
        e.psi_d = -d / (2.0 * tau);
        e.psi_tau = -0.5 * n / tau + d * d / (4.0 * tau * tau);
        e.psi_dd = -1.0 / (2.0 * tau);
        return e;
    }

    bool is_fundamental_solution() const override { return true; }
};

// ---------------------------------------------------------------------------

// Joint value/derivative recurrences of the radial eigenfunctions.
// n = 2: f_l(theta) = P_l(cos theta), Legendre.
// n = 3: f_l(theta) = U_l(cos theta) = sin((l+1)theta)/sin(theta), Chebyshev.
// Second theta-derivatives come from the defining ODEs:
//   f_l'' = cos(theta) P_l'(x) - l(l+1) P_l(x)        (n = 2)
//   f_l'' = 2 cos(theta) U_l'(x) - l(l+2) U_l(x)      (n = 3)
struct RadialEigen {
    double f, df, ddf;  // d/dtheta derivatives
};

class SphereSpectralKernel final : public KernelField {
  public:
    SphereSpectralKernel(double rho0, int n, double horizon, double tol)
        : KernelField(ModelSpacetime::sphere_static(rho0, n, horizon),
                      KernelKind::SphereSpectral),
          tol_(tol) {
        if (!(tol > 0.0 && tol < 1.0))
            throw std::invalid_argument("sphere_spectral_kernel: tol must lie in (0,1)");
    }

    PsiEval eval(double d, double tau) const override {
        check_tau_positive(tau, "SphereSpectralKernel");
        const double rho = model_.rho0;
        const int n = dim();
        double theta = d / rho;
        if (!(theta >= 0.0 && theta <= M_PI * (1.0 + 1e-9)))
            throw std::domain_error("SphereSpectralKernel: d must lie in [0, pi rho0]");
        theta = std::min(theta, M_PI);
        const double x = std::cos(theta);
        const double sin_th = std::sin(theta);
        const double trel = tau / (rho * rho);

        const double vol = (n == 2) ? 4.0 * M_PI * rho * rho : 2.0 * M_PI * M_PI * rho * rho * rho;

        double S0 = 0.0, S1 = 0.0, S2 = 0.0, S3 = 0.0;  // Psi, Psi_theta, Psi_thth, Psi_tau
        double abs0 = 0.0;
        // Legendre: p2/p1 hold P_{l-2}, P_{l-1}; Chebyshev alike.
        double pm2 = 0.0, pm1 = 0.0, dpm2 = 0.0, dpm1 = 0.0;
        int quiet = 0;
        long l = 0;
        for (; l <= kMaxOrder; ++l) {
            double f, df;  // f_l(x), f_l'(x) w.r.t. x
            if (n == 2) {
                if (l == 0) { f = 1.0; df = 0.0; }
                else if (l == 1) { f = x; df = 1.0; }
                else {
                    f = ((2.0 * l - 1.0) * x * pm1 - (l - 1.0) * pm2) / l;
                    df = ((2.0 * l - 1.0) * (pm1 + x * dpm1) - (l - 1.0) * dpm2) / l;
                }
            } else {
                if (l == 0) { f = 1.0; df = 0.0; }
                else if (l == 1) { f = 2.0 * x; df = 2.0; }
                else {
                    f = 2.0 * x * pm1 - pm2;
                    df = 2.0 * pm1 + 2.0 * x * dpm1 - dpm2;
                }
            }
            pm2 = pm1; dpm2 = dpm1; pm1 = f; dpm1 = df;

            const double lam_rel = (n == 2) ? l * (l + 1.0) : l * (l + 2.0);
            const double coef = ((n == 2) ? (2.0 * l + 1.0) : (l + 1.0)) / vol;
            const double decay = std::exp(-lam_rel * trel);
            const double g = coef * decay;

            const double f_th = -sin_th * df;
            const double f_thth = ((n == 2) ? std::cos(theta) * df : 2.0 * std::cos(theta) * df) -
                                  lam_rel * f;

            S0 += g * f;
            S1 += g * f_th;
            S2 += g * f_thth;
            S3 += g * (-lam_rel / (rho * rho)) * f;
            const double fmax = (n == 2) ? 1.0 : (l + 1.0);
            const double weight = 1.0 + lam_rel + lam_rel * lam_rel / (rho * rho);
            const double term_bound = coef * decay * fmax * weight;
            abs0 += coef * decay * fmax;

            // stop once a rigorous geometric tail bound is below tolerance
            if (l >= 2 && lam_rel * trel > 1.0) {
                const double ratio = std::exp(-((n == 2) ? 2.0 * (l + 1.0) : (2.0 * l + 3.0)) * trel) *
                                     ((n == 2) ? (2.0 * l + 3.0) / (2.0 * l + 1.0)
                                               : (l + 2.0) / (l + 1.0));
                if (ratio < 0.9) {
                    const double tail = term_bound * ratio / (1.0 - ratio);
                    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * abs0;
                    if (tail < tol_ * std::max(std::fabs(S0), floor)) {
                        if (++quiet >= 2) break;
                    } else {
                        quiet = 0;
                    }
                }
            }
        }
        if (l > kMaxOrder) {
            throw std::runtime_error(
                "sphere_spectral_kernel: truncation cap " + std::to_string(kMaxOrder) +
                " exceeded at tau = " + std::to_string(tau) +
                " (required order ~" + std::to_string(required_order(tau)) + "); tau below " +
                std::to_string(min_supported_tau()) + " is refused at this tolerance");
        }

        // below the round-off floor of the alternating sum the value is
        // clamped; such points lie far outside every admissible heatball
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * abs0;
        PsiEval e;
        if (S0 <= floor) {
            e.psi = std::log(floor);
            e.psi_d = 0.0;
            e.psi_tau = 0.0;
            e.psi_dd = 0.0;
            return e;
        }
        e.psi = std::log(S0);
        e.psi_d = S1 / (S0 * rho);
        e.psi_tau = S3 / S0;
        e.psi_dd = (S2 / S0 - (S1 / S0) * (S1 / S0)) / (rho * rho);
        return e;
    }

    bool is_fundamental_solution() const override { return true; }

    double min_supported_tau() const override {
        // cap^2 * tau / rho0^2 >= 46 keeps the discarded tail below ~1e-20
        const double rho = model_.rho0;
        return 46.0 * rho * rho / (static_cast<double>(kMaxOrder) * kMaxOrder);
    }

  private:
    long required_order(double tau) const {
        const double rho = model_.rho0;
        return static_cast<long>(std::ceil(std::sqrt(46.0 * rho * rho / tau)));
    }

    static constexpr long kMaxOrder = 10000;
    double tol_;
};

// ---------------------------------------------------------------------------

class Hyperbolic3Kernel final : public KernelField {
  public:
    explicit Hyperbolic3Kernel(double horizon)
        : KernelField(ModelSpacetime::hyperbolic3_static(horizon),
                      KernelKind::Hyperbolic3ClosedForm) {}

    PsiEval eval(double d, double tau) const override {
        check_tau_positive(tau, "Hyperbolic3Kernel");
        if (!(d >= 0.0)) throw std::domain_error("Hyperbolic3Kernel: d must be >= 0");
        PsiEval e;
        double logjac, dlogjac, ddlogjac;  // log(d/sinh d) and derivatives
        if (d < 1e-4) {
            const double d2 = d * d;
            logjac = -d2 / 6.0 + d2 * d2 / 180.0 - d2 * d2 * d2 / 2835.0;
            dlogjac = -d / 3.0 + d * d2 / 45.0 - 2.0 * d * d2 * d2 / 945.0;
            ddlogjac = -1.0 / 3.0 + d2 / 15.0 - 2.0 * d2 * d2 / 189.0;
        } else {
            logjac = std::log(d / std::sinh(d));
            dlogjac = 1.0 / d - 1.0 / std::tanh(d);
            const double csch = 1.0 / std::sinh(d);
            ddlogjac = -1.0 / (d * d) + csch * csch;
        }
        e.psi = -1.5 * std::log(4.0 * M_PI * tau) + logjac - d * d / (4.0 * tau) - tau;
        e.psi_d = dlogjac - d / (2.0 * tau);
        e.psi_dd = ddlogjac - 1.0 / (2.0 * tau);
        e.psi_tau = -1.5 / tau + d * d / (4.0 * tau * tau) - 1.0;
        return e;
    }

    bool is_fundamental_solution() const override { return true; }
};

// ---------------------------------------------------------------------------

class TransplantKernel final : public KernelField {
  public:
    TransplantKernel(int k, ModelSpacetime target, double spectral_tol)
        : KernelField(target, KernelKind::Transplant), k_(k) {
        if (k < -1 || k > 1)
            throw std::invalid_argument("transplant_kernel: k must be in {-1, 0, 1}");
        if (!target.is_static())
            throw std::invalid_argument("transplant_kernel: target must be a static model");
        const int n = target.dim;
        auto [lmin, lmax] = models::ricci_eigen_range(target, {0.0, target.horizon});
        (void)lmax;
        const double needed = (n - 1) * static_cast<double>(k);
        if (lmin < needed - 1e-12)
            throw std::invalid_argument(
                "transplant_kernel: curvature hypothesis violated: need Rc >= " +
                std::to_string(needed) + " g, but the Ricci lower bound is " +
                std::to_string(lmin) + " g on " + models::to_string(target.kind));
        switch (k) {
            case 0:
                profile_ = euclidean_backward_kernel(
                    ModelSpacetime::euclidean_static(n, target.horizon));
                break;
            case 1:
                profile_ = sphere_spectral_kernel(1.0, n, target.horizon, spectral_tol);
                break;
            case -1:
                if (n != 3)
                    throw std::invalid_argument(
                        "transplant_kernel: the k = -1 space form is fixed at n = 3 (closed-form "
                        "kernel); got n = " + std::to_string(n));
                profile_ = hyperbolic3_kernel(target.horizon);
                break;
        }
    }

    PsiEval eval(double d, double tau) const override {
        // the space-form radial profile evaluated at the target's distance
        return profile_->eval(d, tau);
    }

    bool is_fundamental_solution() const override { return false; }
    double min_supported_tau() const override { return profile_->min_supported_tau(); }
    int space_form_k() const override { return k_; }

  private:
    int k_;
    KernelPtr profile_;
};

// ---------------------------------------------------------------------------

class ReducedVolumeDensityKernel final : public KernelField {
  public:
    explicit ReducedVolumeDensityKernel(ModelSpacetime m)
        : KernelField(m, KernelKind::ReducedVolumeDensity) {
        if (m.kind != ModelKind::GaussianSoliton && m.kind != ModelKind::ShrinkingSphere)
            throw std::invalid_argument(
                "reduced_volume_density: model must be GaussianSoliton or ShrinkingSphere");
        reduced_geometry::warm_reduced_distance_cache(m);
    }

    PsiEval eval(double d, double tau) const override {
        check_tau_positive(tau, "ReducedVolumeDensityKernel");
        const double n = dim();
        PsiEval e;
        e.psi = -0.5 * n * std::log(4.0 * M_PI * tau) -
                reduced_geometry::reduced_distance(model_, d, tau);
        e.psi_d = -reduced_geometry::reduced_distance_d(model_, d, tau);
        e.psi_tau = -0.5 * n / tau - reduced_geometry::reduced_distance_tau(model_, d, tau);
        e.psi_dd = -ell_dd(d, tau);
        return e;
    }

    bool is_fundamental_solution() const override { return false; }

  private:
    double ell_dd(double d, double tau) const {
        if (model_.is_flat()) return 1.0 / (2.0 * tau);
        if (model_.tau0 == 0.0) return 0.0;
        // central difference of the stored radial derivative surface
        const double h = 1e-5 * model_.sphere_radius(tau);
        const double lo = std::max(d - h, 0.0), hi = d + h;
        return (reduced_geometry::reduced_distance_d(model_, hi, tau) -
                reduced_geometry::reduced_distance_d(model_, lo, tau)) /
               (hi - lo);
    }
};

}  // namespace

KernelPtr euclidean_backward_kernel(const ModelSpacetime& flat_model) {
    return std::make_shared<EuclideanBackwardKernel>(flat_model);
}

KernelPtr sphere_spectral_kernel(double rho0, int n, double horizon, double tol) {
    return std::make_shared<SphereSpectralKernel>(rho0, n, horizon, tol);
}

KernelPtr hyperbolic3_kernel(double horizon) {
    return std::make_shared<Hyperbolic3Kernel>(horizon);
}

KernelPtr transplant_kernel(int k, const ModelSpacetime& target, double spectral_tol) {
    return std::make_shared<TransplantKernel>(k, target, spectral_tol);
}

KernelPtr reduced_volume_density(const ModelSpacetime& m) {
    return std::make_shared<ReducedVolumeDensityKernel>(m);
}

ResidualSample conjugate_pde_residual(const KernelField& kf, double d, double tau) {
    if (!(tau >= 1e-6))
        throw std::domain_error(
            "conjugate_pde_residual: point must keep tau >= 1e-6 away from the singular time");
    const PsiEval e = kf.eval(d, tau);
    const ModelSpacetime& m = kf.model();
    double laplace_psi;
    if (d < 1e-4) {
        laplace_psi = m.dim * e.psi_dd;  // radial smooth limit at the pole
    } else {
        laplace_psi = e.psi_dd + models::dlog_sphere_area(m, d, tau) * e.psi_d;
    }
    const double rel =
        e.psi_tau - laplace_psi - e.psi_d * e.psi_d - models::trace_h(m, tau);
    ResidualSample s;
    s.d = d;
    s.tau = tau;
    s.scale = std::exp(e.psi);
    s.residual = s.scale * rel;
    return s;
}

}  // namespace kernels
}  // namespace heatball
