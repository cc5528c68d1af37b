#pragma once

// Closed-form rotationally symmetric model spacetimes (M^n, g(tau)).
// Static models evolve with h = 0; Ricci-flow models with h = -Rc, so that
// g(tau) solves the backward Ricci flow d/dtau g = 2 Rc.
//
// Every model is symmetric about a basepoint (the pole), so space-time
// integrals reduce to 1-D radial integrals against sphere_area. The radial
// coordinate d of a point is its geodesic distance from the pole measured in
// g(tau) at the point's own backward time tau; conversions between time
// slices are centralized here.

#include <cmath>
#include <stdexcept>
#include <string>

#include "heatball/numerics.hpp"

namespace heatball {
namespace models {

enum class ModelKind {
    EuclideanStatic,
    SphereStatic,
    Hyperbolic3Static,
    ShrinkingSphere,
    GaussianSoliton,
};

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::EuclideanStatic: return "EuclideanStatic";
        case ModelKind::SphereStatic: return "SphereStatic";
        case ModelKind::Hyperbolic3Static: return "Hyperbolic3Static";
        case ModelKind::ShrinkingSphere: return "ShrinkingSphere";
        case ModelKind::GaussianSoliton: return "GaussianSoliton";
    }
    return "?";
}

/// Volume of the unit n-ball.
inline double unit_ball_volume(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return M_PI;
        case 3: return 4.0 * M_PI / 3.0;
        default: throw std::invalid_argument("unit_ball_volume: n must be 1, 2, or 3");
    }
}

/// Area of the unit (n-1)-sphere in R^n (two points for n = 1).
inline double unit_sphere_area(int n) { return n * unit_ball_volume(n); }

/// Riemannian volume of the unit round n-sphere S^n_1.
inline double round_sphere_volume(int n) {
    switch (n) {
        case 2: return 4.0 * M_PI;
        case 3: return 2.0 * M_PI * M_PI;
        default: throw std::invalid_argument("round_sphere_volume: n must be 2 or 3");
    }
}

struct ModelSpacetime {
    ModelKind kind = ModelKind::EuclideanStatic;
    int dim = 2;
    double horizon = 1.0;  // backward time span: tau in [0, horizon]
    double rho0 = 1.0;     // SphereStatic radius
    double tau0 = 0.0;     // ShrinkingSphere offset: r(tau)^2 = 2(n-1)(tau + tau0)

    static ModelSpacetime euclidean_static(int n, double horizon) {
        require(n >= 1 && n <= 3, "EuclideanStatic: n in {1,2,3}");
        require(horizon > 0.0, "horizon must be positive");
        return {ModelKind::EuclideanStatic, n, horizon, 0.0, 0.0};
    }
    static ModelSpacetime gaussian_soliton(int n, double horizon) {
        require(n >= 1 && n <= 3, "GaussianSoliton: n in {1,2,3}");
        require(horizon > 0.0, "horizon must be positive");
        return {ModelKind::GaussianSoliton, n, horizon, 0.0, 0.0};
    }
    static ModelSpacetime sphere_static(double rho0, int n, double horizon) {
        require(n == 2 || n == 3, "SphereStatic: n in {2,3}");
        require(rho0 > 0.0, "SphereStatic: rho0 must be positive");
        require(horizon > 0.0, "horizon must be positive");
        return {ModelKind::SphereStatic, n, horizon, rho0, 0.0};
    }
    static ModelSpacetime hyperbolic3_static(double horizon) {
        require(horizon > 0.0, "horizon must be positive");
        return {ModelKind::Hyperbolic3Static, 3, horizon, 0.0, 0.0};
    }
    static ModelSpacetime shrinking_sphere(int n, double tau0, double horizon) {
        require(n == 2 || n == 3, "ShrinkingSphere: n in {2,3}");
        require(tau0 >= 0.0, "ShrinkingSphere: tau0 must be >= 0");
        require(horizon > 0.0 && std::isfinite(horizon + tau0),
                "ShrinkingSphere: horizon + tau0 must be finite and positive");
        return {ModelKind::ShrinkingSphere, n, horizon, 0.0, tau0};
    }

    bool is_static() const {
        return kind == ModelKind::EuclideanStatic || kind == ModelKind::SphereStatic ||
               kind == ModelKind::Hyperbolic3Static;
    }
    /// Models carrying a backward Ricci flow structure (h = -Rc); the flat
    /// static models qualify trivially since Rc = 0.
    bool is_ricci_flow() const {
        return kind == ModelKind::ShrinkingSphere || kind == ModelKind::GaussianSoliton ||
               kind == ModelKind::EuclideanStatic;
    }
    bool is_compact() const {
        return kind == ModelKind::SphereStatic || kind == ModelKind::ShrinkingSphere;
    }
    bool is_flat() const {
        return kind == ModelKind::EuclideanStatic || kind == ModelKind::GaussianSoliton;
    }

    /// Spatial radius of the sphere slice at backward time tau.
    double sphere_radius(double tau) const {
        switch (kind) {
            case ModelKind::SphereStatic: return rho0;
            case ModelKind::ShrinkingSphere: return std::sqrt(2.0 * (dim - 1) * (tau + tau0));
            default: throw std::logic_error("sphere_radius: not a sphere model");
        }
    }

    /// Largest admissible radial coordinate at time tau (infinite on
    /// noncompact models).
    double max_distance(double tau) const {
        if (is_compact()) return M_PI * sphere_radius(tau);
        return std::numeric_limits<double>::infinity();
    }

    void check_tau(double tau) const {
        if (!(tau >= 0.0 && tau <= horizon * (1.0 + 1e-12)))
            throw std::domain_error("tau = " + std::to_string(tau) + " outside [0, " +
                                    std::to_string(horizon) + "] on " + to_string(kind));
    }

  private:
    static void require(bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    }
};

/// Point of the space-time at radial distance d (measured in g(tau)) and
/// backward time tau > 0.
struct SpaceTimeRadialPoint {
    double d = 0.0;
    double tau = 0.0;

    SpaceTimeRadialPoint(const ModelSpacetime& m, double d_, double tau_) : d(d_), tau(tau_) {
        if (!(d >= 0.0)) throw std::domain_error("SpaceTimeRadialPoint: d must be >= 0");
        if (!(tau > 0.0 && tau <= m.horizon * (1.0 + 1e-12)))
            throw std::domain_error("SpaceTimeRadialPoint: tau must lie in (0, horizon]");
        const double dmax = m.max_distance(tau);
        if (d > dmax * (1.0 + 1e-12))
            throw std::domain_error("SpaceTimeRadialPoint: d exceeds pi * r(tau) on sphere model");
    }
};

/// Scalar curvature of g(tau); spatially constant on every model.
inline double scalar_curvature(const ModelSpacetime& m, double tau) {
    m.check_tau(tau);
    const int n = m.dim;
    switch (m.kind) {
        case ModelKind::EuclideanStatic:
        case ModelKind::GaussianSoliton: return 0.0;
        case ModelKind::SphereStatic: return n * (n - 1) / (m.rho0 * m.rho0);
        case ModelKind::Hyperbolic3Static: return -6.0;
        case ModelKind::ShrinkingSphere: {
            // R = n(n-1)/r(tau)^2 with r(tau)^2 = 2(n-1)(tau + tau0)
            const double denom = 2.0 * (tau + m.tau0);
            if (!(denom > 0.0))
                throw std::domain_error("scalar_curvature: ShrinkingSphere vertex at tau = -tau0");
            return n / denom;
        }
    }
    throw std::logic_error("scalar_curvature: unreachable");
}

/// tr_g h: -R on Ricci-flow models, 0 on static ones.
inline double trace_h(const ModelSpacetime& m, double tau) {
    if (m.kind == ModelKind::ShrinkingSphere || m.kind == ModelKind::GaussianSoliton)
        return -scalar_curvature(m, tau);
    return 0.0;
}

/// (n-1)-area of the geodesic sphere of radius d about the pole in g(tau).
inline double sphere_area(const ModelSpacetime& m, double d, double tau) {
    m.check_tau(tau);
    if (!(d >= 0.0)) throw std::domain_error("sphere_area: d must be >= 0");
    const int n = m.dim;
    const double an = unit_sphere_area(n);
    switch (m.kind) {
        case ModelKind::EuclideanStatic:
        case ModelKind::GaussianSoliton: return an * std::pow(d, n - 1);
        case ModelKind::Hyperbolic3Static: {
            const double sh = std::sinh(d);
            return an * sh * sh;
        }
        case ModelKind::SphereStatic:
        case ModelKind::ShrinkingSphere: {
            const double r = m.sphere_radius(tau);
            if (d > M_PI * r * (1.0 + 1e-9))
                throw std::domain_error("sphere_area: d = " + std::to_string(d) +
                                        " out of range on compact model (max " +
                                        std::to_string(M_PI * r) + ")");
            return an * std::pow(r * std::sin(std::min(d / r, M_PI)), n - 1);
        }
    }
    throw std::logic_error("sphere_area: unreachable");
}

/// d/dd log sphere_area — the radial mean-curvature factor in the Laplacian
/// Delta f = f_dd + (log area)' f_d.
inline double dlog_sphere_area(const ModelSpacetime& m, double d, double tau) {
    const int n = m.dim;
    switch (m.kind) {
        case ModelKind::EuclideanStatic:
        case ModelKind::GaussianSoliton: return (n - 1) / d;
        case ModelKind::Hyperbolic3Static: return (n - 1) / std::tanh(d);
        case ModelKind::SphereStatic:
        case ModelKind::ShrinkingSphere: {
            const double r = m.sphere_radius(tau);
            return (n - 1) / (r * std::tan(d / r));
        }
    }
    throw std::logic_error("dlog_sphere_area: unreachable");
}

/// Eigenvalue range (lambda_min, lambda_max) of Rc relative to g over a
/// backward-time interval; exact on these models since Rc = lambda(tau) g.
inline std::pair<double, double> ricci_eigen_range(const ModelSpacetime& m,
                                                   numerics::Interval taus) {
    if (!(taus.lo >= 0.0 && taus.hi <= m.horizon * (1.0 + 1e-12)))
        throw std::domain_error("ricci_eigen_range: interval outside [0, horizon]");
    const int n = m.dim;
    switch (m.kind) {
        case ModelKind::EuclideanStatic:
        case ModelKind::GaussianSoliton: return {0.0, 0.0};
        case ModelKind::SphereStatic: {
            const double lam = (n - 1) / (m.rho0 * m.rho0);
            return {lam, lam};
        }
        case ModelKind::Hyperbolic3Static: return {-2.0, -2.0};
        case ModelKind::ShrinkingSphere: {
            // Rc = g / (2(tau + tau0)): decreasing in tau
            const double lo_at = taus.hi, hi_at = taus.lo;
            if (!(hi_at + m.tau0 > 0.0))
                throw std::domain_error(
                    "ricci_eigen_range: ShrinkingSphere with tau0 = 0 is unbounded at tau = 0; "
                    "use an interval with lo > 0");
            return {1.0 / (2.0 * (lo_at + m.tau0)), 1.0 / (2.0 * (hi_at + m.tau0))};
        }
    }
    throw std::logic_error("ricci_eigen_range: unreachable");
}

/// Tight constants (k, K) with k, K >= 0 and -k g <= Rc <= K g on the interval.
inline std::pair<double, double> ricci_bounds(const ModelSpacetime& m, numerics::Interval taus) {
    auto [lmin, lmax] = ricci_eigen_range(m, taus);
    return {std::max(0.0, -lmin), std::max(0.0, lmax)};
}

/// Scale factor of g(tau) relative to the model's reference slice;
/// identically 1 on static models and the flat soliton.
inline double metric_scale(const ModelSpacetime& m, double tau) {
    m.check_tau(tau);
    if (m.kind != ModelKind::ShrinkingSphere) return 1.0;
    return std::sqrt((tau + m.tau0) / (1.0 + m.tau0));
}

/// Transport a radial coordinate between time slices along the rotational
/// symmetry (fixed angle from the pole). Identity on static models.
inline double transport_distance(const ModelSpacetime& m, double d, double tau_from,
                                 double tau_to) {
    if (m.kind != ModelKind::ShrinkingSphere) return d;
    return d * m.sphere_radius(tau_to) / m.sphere_radius(tau_from);
}

}  // namespace models
}  // namespace heatball
