#include "heatball/reduced_geometry.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

namespace heatball {
namespace reduced_geometry {

using models::ModelKind;
using models::ModelSpacetime;
using models::SpaceTimeRadialPoint;
using numerics::DiscretePath;
using numerics::Interval;

namespace {

void require_ricci_flow(const ModelSpacetime& m, const char* op) {
    if (!m.is_ricci_flow())
        throw std::invalid_argument(std::string(op) + ": model " + models::to_string(m.kind) +
                                    " carries no Ricci-flow structure");
}

bool is_sphere_flow(const ModelSpacetime& m) { return m.kind == ModelKind::ShrinkingSphere; }

// |gamma'(s)|^2 = gsq(s) * (dtheta/ds)^2 with theta the co-moving radial
// coordinate: the angle on sphere models, the Euclidean distance on flat ones.
double gsq(const ModelSpacetime& m, double s) {
    if (is_sphere_flow(m)) return 2.0 * (m.dim - 1) * (s * s + m.tau0);
    return 1.0;
}

// antiderivative of 2 s^2 R(s^2): curvature part of the action
double curvature_action_primitive(const ModelSpacetime& m, double s) {
    if (!is_sphere_flow(m)) return 0.0;  // R = 0 on flat models
    const double n = m.dim;
    if (m.tau0 == 0.0) return n * s;  // int 2 s^2 * n/(2 s^2) ds
    const double rt0 = std::sqrt(m.tau0);
    return n * (s - rt0 * std::atan(s / rt0));
}

double theta_of_distance(const ModelSpacetime& m, double d, double tau) {
    if (!is_sphere_flow(m)) return d;
    if (d == 0.0) return 0.0;  // pole at every time, including the tau0 = 0 vertex
    const double r = m.sphere_radius(tau);
    if (!(r > 0.0))
        throw std::domain_error("theta_of_distance: positive distance at the vanished slice");
    return d / r;
}

double distance_of_theta(const ModelSpacetime& m, double theta, double tau) {
    if (is_sphere_flow(m)) return theta * m.sphere_radius(tau);
    return theta;
}

}  // namespace

double l_action(const ModelSpacetime& m, const DiscretePath& path) {
    require_ricci_flow(m, "l_action");
    path.validate();
    if (path.s.front() != 0.0)
        throw std::invalid_argument("l_action: path must start at s = 0 (the basepoint)");
    if (path.u.front() != 0.0)
        throw std::invalid_argument("l_action: path must start at the basepoint (u_0 = 0)");

    const size_t mseg = path.s.size() - 1;
    std::vector<double> seg(mseg);
    for (size_t i = 0; i < mseg; ++i) {
        const double s0 = path.s[i], s1 = path.s[i + 1];
        if (path.u[i] < 0.0 || path.u[i + 1] < 0.0)
            throw std::domain_error("l_action: path leaves the model domain (u < 0)");
        const double th0 = theta_of_distance(m, path.u[i], s0 * s0);
        const double th1 = theta_of_distance(m, path.u[i + 1], s1 * s1);
        const double rate = (th1 - th0) / (s1 - s0);
        double kinetic;
        if (is_sphere_flow(m)) {
            // int (n-1)(s^2 + tau0) rate^2 ds in closed form
            const double a = m.dim - 1;
            kinetic = a * rate * rate *
                      ((s1 * s1 * s1 - s0 * s0 * s0) / 3.0 + m.tau0 * (s1 - s0));
        } else {
            kinetic = 0.5 * rate * rate * (s1 - s0);
        }
        seg[i] = kinetic + (curvature_action_primitive(m, s1) - curvature_action_primitive(m, s0));
    }
    return numerics::pairwise_sum(seg);
}

namespace {

struct ShotResult {
    numerics::OdeTrajectory traj;  // state (theta, dtheta/ds, accumulated kinetic action)
    double theta_end = 0.0;
    double action = 0.0;
};

ShotResult shoot(const ModelSpacetime& m, double v0, double s1, double tol) {
    auto field = [&m](double s, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = y[1];
        if (is_sphere_flow(m)) {
            // EL equation nabla_{gamma'} gamma' = -4 s Rc(gamma') reduces to
            // theta'' = -2 s theta' / (s^2 + tau0)
            dy[1] = -2.0 * s * y[1] / (s * s + m.tau0);
        } else {
            dy[1] = 0.0;
        }
        dy[2] = 0.5 * gsq(m, s) * y[1] * y[1];  // kinetic part; R part added in closed form
    };
    auto traj = numerics::integrate_ode(field, {0.0, v0, 0.0}, Interval(0.0, s1), tol);
    ShotResult r;
    r.theta_end = traj.final_state()[0];
    r.action = traj.final_state()[2] + curvature_action_primitive(m, s1) -
               curvature_action_primitive(m, 0.0);
    r.traj = std::move(traj);
    return r;
}

LGeodesicPath assemble(const ModelSpacetime& m, const ShotResult& shot, double d_target,
                       double tau) {
    LGeodesicPath out;
    out.endpoint_d = d_target;
    out.endpoint_tau = tau;
    out.action = shot.action;
    out.ell = shot.action / (2.0 * std::sqrt(tau));
    for (const auto& node : shot.traj.nodes) {
        const double s = node.s;
        const double theta = node.y[0];
        const double w = node.y[1];
        out.path.s.push_back(s);
        out.path.u.push_back(distance_of_theta(m, theta, s * s));
        out.sqrt_tau_speed.push_back(0.5 * std::sqrt(gsq(m, s)) * std::fabs(w));
    }
    out.gamma0 = out.sqrt_tau_speed.front();
    return out;
}

}  // namespace

LGeodesicPath solve_l_geodesic(const ModelSpacetime& m, const SpaceTimeRadialPoint& target,
                               double tol) {
    require_ricci_flow(m, "solve_l_geodesic");
    if (is_sphere_flow(m) && m.tau0 == 0.0)
        throw std::invalid_argument(
            "solve_l_geodesic: ShrinkingSphere with tau0 = 0 has a degenerate vertex origin; "
            "its reduced distance is the closed form n/2");

    const double tau = target.tau;
    const double s1 = std::sqrt(tau);
    const double ode_tol = std::min(1e-12, 0.01 * tol);

    auto shoot_to = [&](double theta_target) {
        if (theta_target == 0.0) return shoot(m, 0.0, s1, ode_tol);
        // bracket the initial rate; the endpoint grows monotonically with it
        double vhi = std::max(theta_target / s1, 1e-8);
        int grow = 0;
        while (shoot(m, vhi, s1, ode_tol).theta_end < theta_target) {
            vhi *= 2.0;
            if (++grow > 60)
                throw std::runtime_error(
                    "solve_l_geodesic: shooting bracket not found (target beyond range)");
        }
        const double v0 = numerics::find_root(
            [&](double v) { return shoot(m, v, s1, ode_tol).theta_end - theta_target; },
            Interval(0.0, vhi), tol * 1e-2);
        return shoot(m, v0, s1, ode_tol);
    };

    const double theta_short = theta_of_distance(m, target.d, tau);
    ShotResult shot = shoot_to(theta_short);
    bool used_long = false;
    if (is_sphere_flow(m)) {
        ShotResult shot_long = shoot_to(2.0 * M_PI - theta_short);
        if (shot_long.action < shot.action) {  // ties break toward the short branch
            shot = std::move(shot_long);
            used_long = true;
        }
    }
    LGeodesicPath out = assemble(m, shot, target.d, tau);

    const double reached = used_long ? 2.0 * M_PI - shot.theta_end : shot.theta_end;
    if (std::fabs(distance_of_theta(m, reached, tau) - target.d) >
        std::max(tol, 1e-9) * (1.0 + target.d))
        throw std::runtime_error("solve_l_geodesic: endpoint mismatch after shooting");
    return out;
}

// ---------------------------------------------------------------------------
// reduced distance: closed forms + memoized solver grid
// ---------------------------------------------------------------------------

namespace {

// Bicubic (Catmull-Rom) interpolation on a uniform grid with quadratic ghost
// extrapolation at the edges.
class UniformBicubic {
  public:
    UniformBicubic() = default;
    UniformBicubic(size_t nx, size_t ny, double x1, double y1, std::vector<double> v)
        : nx_(nx), ny_(ny), x1_(x1), y1_(y1), v_(std::move(v)) {}

    double operator()(double x, double y) const {
        const double fx = std::clamp(x / x1_, 0.0, 1.0) * (nx_ - 1);
        const double fy = std::clamp(y / y1_, 0.0, 1.0) * (ny_ - 1);
        const long ix = std::min(static_cast<long>(fx), static_cast<long>(nx_) - 2);
        const long iy = std::min(static_cast<long>(fy), static_cast<long>(ny_) - 2);
        const double tx = fx - ix;
        const double ty = fy - iy;
        double rows[4];
        for (int j = -1; j <= 2; ++j)
            rows[j + 1] = catmull(cell(ix - 1, iy + j), cell(ix, iy + j), cell(ix + 1, iy + j),
                                  cell(ix + 2, iy + j), tx);
        return catmull(rows[0], rows[1], rows[2], rows[3], ty);
    }

  private:
    // quadratic ghost values beyond the grid edge
    double cell(long i, long j) const {
        auto fetch = [this](long a, long b) { return v_[a * ny_ + b]; };
        const long nx = static_cast<long>(nx_), ny = static_cast<long>(ny_);
        const long ci = std::clamp<long>(i, 0, nx - 1);
        const long cj = std::clamp<long>(j, 0, ny - 1);
        auto ghost_row = [&](long col) {
            if (i == ci) return fetch(i, col);
            const long s = (i < 0) ? 1 : -1;
            return 3.0 * fetch(ci, col) - 3.0 * fetch(ci + s, col) + fetch(ci + 2 * s, col);
        };
        if (j == cj) return ghost_row(j);
        const long t = (j < 0) ? 1 : -1;
        return 3.0 * ghost_row(cj) - 3.0 * ghost_row(cj + t) + ghost_row(cj + 2 * t);
    }

    static double catmull(double p0, double p1, double p2, double p3, double t) {
        return p1 + 0.5 * t *
                        (p2 - p0 +
                         t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                              t * (3.0 * (p1 - p2) + p3 - p0)));
    }

    size_t nx_ = 0, ny_ = 0;
    double x1_ = 1.0, y1_ = 1.0;
    std::vector<double> v_;
};

// Solver grid for the ShrinkingSphere with tau0 > 0. The stored surfaces are
// tau-scaled so they stay smooth down to tau = 0:
//   F = tau * ell,  G = tau * d(ell)/d(theta),  H = tau^2 * ell_tau.
struct EllGrid {
    static constexpr size_t N = 257;
    UniformBicubic F, G, H;
    double tau_max = 1.0;
};

// One unit shot integrates a whole tau column: the EL equation is linear in
// theta when R is spatially constant, so theta(s1; v0) = v0 * theta_unit(s1)
// and L(v0) = v0^2 * K_unit + A_R.
EllGrid build_ell_grid(const ModelSpacetime& m) {
    EllGrid g;
    g.tau_max = m.horizon;
    const size_t N = EllGrid::N;
    std::vector<double> F(N * N), G(N * N), H(N * N);

    const double r0 = m.sphere_radius(0.0);
    for (size_t j = 0; j < N; ++j) {
        const double tau = g.tau_max * static_cast<double>(j) / (N - 1);
        if (j == 0) {
            // analytic tau -> 0 limits: tau ell -> d0^2/4
            for (size_t i = 0; i < N; ++i) {
                const double theta = M_PI * static_cast<double>(i) / (N - 1);
                const double d0 = theta * r0;
                F[i * N] = d0 * d0 / 4.0;
                G[i * N] = theta * r0 * r0 / 2.0;
                H[i * N] = -d0 * d0 / 4.0;
            }
            continue;
        }
        const double s1 = std::sqrt(tau);
        ShotResult unit = shoot(m, 1.0, s1, 1e-12);
        const double theta_u = unit.theta_end;
        const double w_u = unit.traj.final_state()[1];
        const double K_u = unit.traj.final_state()[2];
        const double A_R = curvature_action_primitive(m, s1);
        const double R = models::scalar_curvature(m, tau);
        const double r_tau = m.sphere_radius(tau);
        for (size_t i = 0; i < N; ++i) {
            const double theta = M_PI * static_cast<double>(i) / (N - 1);
            const double v0 = theta / theta_u;
            const double L = v0 * v0 * K_u + A_R;
            const double ell = L / (2.0 * s1);
            const double speed_tau = r_tau * v0 * w_u / (2.0 * s1);  // |dgamma/dtau| at endpoint
            const double ell_d = speed_tau;
            const double ell_tau = 0.5 * (R - speed_tau * speed_tau) - ell / (2.0 * tau);
            F[i * N + j] = tau * ell;
            G[i * N + j] = tau * r_tau * ell_d;
            H[i * N + j] = tau * tau * ell_tau;
        }
    }
    g.F = UniformBicubic(N, N, M_PI, g.tau_max, std::move(F));
    g.G = UniformBicubic(N, N, M_PI, g.tau_max, std::move(G));
    g.H = UniformBicubic(N, N, M_PI, g.tau_max, std::move(H));
    return g;
}

const EllGrid& ell_grid_for(const ModelSpacetime& m) {
    using Key = std::tuple<int, double, double>;
    static std::mutex mu;
    static std::map<Key, std::unique_ptr<EllGrid>> cache;
    const Key key{m.dim, m.tau0, m.horizon};
    std::unique_lock lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<EllGrid>(build_ell_grid(m))).first;
    return *it->second;
}

void check_rd_domain(const ModelSpacetime& m, double tau, const char* op) {
    require_ricci_flow(m, op);
    if (!(tau > 0.0 && tau <= m.horizon * (1.0 + 1e-12)))
        throw std::domain_error(std::string(op) + ": tau must lie in (0, horizon]");
}

}  // namespace

void warm_reduced_distance_cache(const ModelSpacetime& m) {
    if (is_sphere_flow(m) && m.tau0 > 0.0) (void)ell_grid_for(m);
}

double reduced_distance(const ModelSpacetime& m, double d, double tau) {
    check_rd_domain(m, tau, "reduced_distance");
    if (m.is_flat()) return d * d / (4.0 * tau);
    if (m.tau0 == 0.0) return 0.5 * m.dim;
    const EllGrid& g = ell_grid_for(m);
    return g.F(theta_of_distance(m, d, tau), tau) / tau;
}

double reduced_distance_d(const ModelSpacetime& m, double d, double tau) {
    check_rd_domain(m, tau, "reduced_distance");
    if (m.is_flat()) return d / (2.0 * tau);
    if (m.tau0 == 0.0) return 0.0;
    const EllGrid& g = ell_grid_for(m);
    return g.G(theta_of_distance(m, d, tau), tau) / (tau * m.sphere_radius(tau));
}

double reduced_distance_tau(const ModelSpacetime& m, double d, double tau) {
    check_rd_domain(m, tau, "reduced_distance");
    if (m.is_flat()) return -d * d / (4.0 * tau * tau);
    if (m.tau0 == 0.0) return 0.0;
    const EllGrid& g = ell_grid_for(m);
    return g.H(theta_of_distance(m, d, tau), tau) / (tau * tau);
}

double reduced_volume(const ModelSpacetime& m, double tau) {
    check_rd_domain(m, tau, "reduced_volume");
    const int n = m.dim;
    const double pref = std::pow(4.0 * M_PI * tau, -0.5 * n);
    const double dmax =
        m.is_compact() ? m.max_distance(tau) : std::sqrt(4.0 * tau * 700.0);
    auto integrand = [&](double d) {
        return pref * std::exp(-reduced_distance(m, d, tau)) * models::sphere_area(m, d, tau);
    };
    return numerics::integrate_adaptive(integrand, Interval(0.0, dmax), 1e-12).value;
}

}  // namespace reduced_geometry
}  // namespace heatball
