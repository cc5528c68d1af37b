#pragma once

// Reduced geometry on the Ricci-flow models: the space-time action
//   L(gamma) = int_0^sqrt(tau) ( |gamma'|^2 / 2 + 2 s^2 R ) ds        (s = sqrt(sigma))
// its minimizing radial geodesics obtained by Euler-Lagrange shooting, the
// reduced distance ell = L / (2 sqrt(tau)), and the reduced volume
//   V~(tau) = int_M (4 pi tau)^(-n/2) e^(-ell) dmu.
//
// On every in-scope model R is spatially constant, so nabla R = 0 and the
// Euler-Lagrange equation reduces to a scalar ODE for the radial coordinate;
// minimality of the radial shot is cross-checked against the brute-force
// discrete minimizer in the test suite.

#include <vector>

#include "heatball/models.hpp"
#include "heatball/numerics.hpp"

namespace heatball {
namespace reduced_geometry {

/// A solved radial L-geodesic in s = sqrt(tau) parametrization.
struct LGeodesicPath {
    numerics::DiscretePath path;          // u_i = distance from the pole in g(tau_i)
    std::vector<double> sqrt_tau_speed;   // sqrt(sigma) |dgamma/dsigma| at each node
    double endpoint_d = 0.0;
    double endpoint_tau = 0.0;
    double action = 0.0;                  // L
    double ell = 0.0;                     // L / (2 sqrt(tau))
    double gamma0 = 0.0;                  // lim_{s->0} |gamma'(s)| / 2
};

/// Action of a discrete radial path. Nodes are treated as waypoints of the
/// co-moving radial coordinate, linearly interpolated in s; the segment
/// integrals are evaluated in closed form (the integrand is rational in s on
/// each segment for every model).
double l_action(const models::ModelSpacetime& m, const numerics::DiscretePath& path);

/// Shooting solution of the radial Euler-Lagrange BVP to the given target.
/// On sphere models both branches (through the pole's antipode and not) are
/// shot and the cheaper one kept, ties toward the short branch.
LGeodesicPath solve_l_geodesic(const models::ModelSpacetime& m,
                               const models::SpaceTimeRadialPoint& target, double tol = 1e-10);

/// Reduced distance ell(d, tau) from the space-time origin (pole, tau = 0).
/// Closed form on GaussianSoliton / EuclideanStatic (d^2 / 4 tau) and on the
/// ShrinkingSphere with tau0 = 0 (n/2); otherwise served from a per-model
/// memoized solver grid with bicubic interpolation.
double reduced_distance(const models::ModelSpacetime& m, double d, double tau);

/// Radial derivative of ell at fixed tau (equals the endpoint speed
/// sqrt(tau)-normalized along the minimizing geodesic).
double reduced_distance_d(const models::ModelSpacetime& m, double d, double tau);

/// Time derivative of ell at a fixed co-moving point.
double reduced_distance_tau(const models::ModelSpacetime& m, double d, double tau);

/// Perelman's reduced volume at backward time tau.
double reduced_volume(const models::ModelSpacetime& m, double tau);

/// Forces the memoization grid for the model to be built now (it is built
/// lazily otherwise). Useful before fanning work out to threads.
void warm_reduced_distance_cache(const models::ModelSpacetime& m);

}  // namespace reduced_geometry
}  // namespace heatball
