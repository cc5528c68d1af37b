#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "heatball/reduced_geometry.hpp"

using namespace heatball;
using namespace heatball::reduced_geometry;
using models::ModelSpacetime;
using models::SpaceTimeRadialPoint;
using numerics::DiscretePath;

namespace {

DiscretePath straight_path(const ModelSpacetime& m, double d, double tau, size_t segs) {
    DiscretePath p;
    const double s1 = std::sqrt(tau);
    const double theta1 =
        (m.kind == models::ModelKind::ShrinkingSphere) ? d / m.sphere_radius(tau) : d;
    for (size_t i = 0; i <= segs; ++i) {
        const double s = s1 * static_cast<double>(i) / segs;
        const double theta = theta1 * static_cast<double>(i) / segs;
        p.s.push_back(s);
        if (m.kind == models::ModelKind::ShrinkingSphere)
            p.u.push_back(theta * m.sphere_radius(s * s));
        else
            p.u.push_back(theta);
    }
    return p;
}

// closed-form reduced distance on the offset shrinking sphere, derived from
// the explicit geodesics theta(s) = a sqrt(tau0) arctan(s / sqrt(tau0))
double sphere_ell_exact(int n, double tau0, double theta, double tau) {
    const double s1 = std::sqrt(tau);
    const double rt0 = std::sqrt(tau0);
    const double at = std::atan(s1 / rt0);
    const double kinetic = (n - 1) * rt0 * theta * theta / at;
    const double curvature = n * (s1 - rt0 * at);
    return (kinetic + curvature) / (2.0 * s1);
}

// barrier-wrapped action for the brute-force minimizer, which probes
// coordinates outside the model domain
double oracle_action(const ModelSpacetime& m, const DiscretePath& p) {
    for (double u : p.u)
        if (u < 0.0) return 1e12;
    return l_action(m, p);
}

}  // namespace

TEST_CASE("l_action closed-form values") {
    SUBCASE("Gaussian soliton, straight path to (d, tau): L = d^2 / (2 sqrt(tau))") {
        auto m = ModelSpacetime::gaussian_soliton(2, 2.0);
        const double d = 1.3, tau = 0.8;
        auto p = straight_path(m, d, tau, 32);
        CHECK(l_action(m, p) == doctest::Approx(d * d / (2.0 * std::sqrt(tau))).epsilon(1e-12));
    }
    SUBCASE("EuclideanStatic matches the Gaussian soliton (R = 0 in both)") {
        auto mg = ModelSpacetime::gaussian_soliton(3, 2.0);
        auto me = ModelSpacetime::euclidean_static(3, 2.0);
        auto p = straight_path(mg, 0.9, 1.1, 16);
        CHECK(l_action(me, p) == doctest::Approx(l_action(mg, p)).epsilon(1e-15));
    }
    SUBCASE("constant path at basepoint on ShrinkingSphere(tau0 = 0): L = n sqrt(tau)") {
        auto m = ModelSpacetime::shrinking_sphere(2, 0.0, 1.0);
        DiscretePath p;
        for (int i = 0; i <= 8; ++i) {
            p.s.push_back(std::sqrt(0.49) * i / 8.0);
            p.u.push_back(0.0);
        }
        CHECK(l_action(m, p) == doctest::Approx(2.0 * std::sqrt(0.49)).epsilon(1e-12));
        // ell = L / (2 sqrt(tau)) = n/2
        CHECK(l_action(m, p) / (2.0 * std::sqrt(0.49)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("path not starting at the basepoint rejected") {
        auto m = ModelSpacetime::gaussian_soliton(2, 2.0);
        DiscretePath p;
        p.s = {0.0, 1.0};
        p.u = {0.5, 1.0};
        CHECK_THROWS_AS(l_action(m, p), std::invalid_argument);
    }
}

TEST_CASE("solve_l_geodesic on the Gaussian soliton") {
    auto m = ModelSpacetime::gaussian_soliton(2, 2.0);
    SUBCASE("(d, tau) = (2, 1) has ell = 1") {
        auto g = solve_l_geodesic(m, SpaceTimeRadialPoint(m, 2.0, 1.0), 1e-10);
        CHECK(g.ell == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(g.action == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(g.gamma0 == doctest::Approx(1.0).epsilon(1e-8));  // |gamma'| = d/sqrt(tau) = 2, /2
        // straight-line profile u(s) = (d / sqrt(tau)) s
        for (size_t i = 0; i < g.path.s.size(); ++i)
            CHECK(g.path.u[i] == doctest::Approx(2.0 * g.path.s[i]).epsilon(1e-9).scale(1.0));
    }
    SUBCASE("random targets match d^2 / 4 tau to 1e-6") {
        std::mt19937 rng(20240801);
        std::uniform_real_distribution<double> ud(0.05, 2.0), ut(0.05, 1.9);
        for (int i = 0; i < 20; ++i) {
            const double d = ud(rng), tau = ut(rng);
            auto g = solve_l_geodesic(m, SpaceTimeRadialPoint(m, d, tau), 1e-10);
            CHECK(g.ell == doctest::Approx(d * d / (4.0 * tau)).epsilon(1e-6));
        }
    }
}

TEST_CASE("solve_l_geodesic on the offset shrinking sphere") {
    auto m = ModelSpacetime::shrinking_sphere(2, 0.1, 0.5);
    SUBCASE("d = 0 target: constant path, closed-form ell") {
        for (double tau : {0.1, 0.25, 0.45}) {
            auto g = solve_l_geodesic(m, SpaceTimeRadialPoint(m, 0.0, tau), 1e-10);
            CHECK(g.ell == doctest::Approx(sphere_ell_exact(2, 0.1, 0.0, tau)).epsilon(1e-9));
            CHECK(g.gamma0 == doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
        }
    }
    SUBCASE("generic targets match the closed form") {
        for (double theta : {0.3, 1.0, 2.2, 3.0}) {
            for (double tau : {0.08, 0.2, 0.42}) {
                const double d = theta * m.sphere_radius(tau);
                auto g = solve_l_geodesic(m, SpaceTimeRadialPoint(m, d, tau), 1e-10);
                CHECK(g.ell ==
                      doctest::Approx(sphere_ell_exact(2, 0.1, theta, tau)).epsilon(1e-7));
            }
        }
    }
    SUBCASE("n = 3 closed form") {
        auto m3 = ModelSpacetime::shrinking_sphere(3, 0.2, 0.6);
        const double theta = 1.4, tau = 0.5;
        auto g = solve_l_geodesic(m3, SpaceTimeRadialPoint(m3, theta * m3.sphere_radius(tau), tau),
                                  1e-10);
        CHECK(g.ell == doctest::Approx(sphere_ell_exact(3, 0.2, theta, tau)).epsilon(1e-7));
    }
    SUBCASE("vertex model refused") {
        auto mv = ModelSpacetime::shrinking_sphere(2, 0.0, 0.5);
        CHECK_THROWS_AS(solve_l_geodesic(mv, SpaceTimeRadialPoint(mv, 0.3, 0.2), 1e-10),
                        std::invalid_argument);
    }
}

TEST_CASE("two-sided bounds and speed envelopes hold along solved geodesics") {
    auto m = ModelSpacetime::shrinking_sphere(2, 0.1, 0.5);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uth(0.05, 3.0), ut(0.05, 0.5);
    for (int i = 0; i < 12; ++i) {
        const double theta = uth(rng), tau = ut(rng);
        const double d = theta * m.sphere_radius(tau);
        auto g = solve_l_geodesic(m, SpaceTimeRadialPoint(m, d, tau), 1e-10);
        auto [k, K] = models::ricci_bounds(m, {0.0, tau});
        const double d0 = theta * m.sphere_radius(0.0);
        const double lo = std::exp(-2.0 * k * tau) * d0 * d0 / (4.0 * tau) - m.dim * k * tau / 3.0;
        const double hi = std::exp(2.0 * K * tau) * d0 * d0 / (4.0 * tau) + m.dim * K * tau / 3.0;
        CHECK(g.ell >= lo - 1e-9);
        CHECK(g.ell <= hi + 1e-9);
        // sqrt(sigma)|gamma_dot| envelopes with A = 0: between Gamma0 e^{-K sigma}
        // and Gamma0 e^{k sigma}
        for (size_t j = 0; j < g.path.s.size(); ++j) {
            const double sigma = g.path.s[j] * g.path.s[j];
            CHECK(g.sqrt_tau_speed[j] <= g.gamma0 * std::exp(k * sigma) + 1e-9);
            CHECK(g.sqrt_tau_speed[j] >= g.gamma0 * std::exp(-K * sigma) - 1e-9);
        }
    }
}

TEST_CASE("shooting agrees with the brute-force action minimizer") {
    std::mt19937 rng(123);
    SUBCASE("Gaussian soliton") {
        auto m = ModelSpacetime::gaussian_soliton(2, 2.0);
        std::uniform_real_distribution<double> ud(0.2, 1.8), ut(0.1, 1.8);
        for (int i = 0; i < 8; ++i) {
            const double d = ud(rng), tau = ut(rng);
            auto g = solve_l_geodesic(m, SpaceTimeRadialPoint(m, d, tau), 1e-10);
            auto init = straight_path(m, d, tau, 48);
            auto [path, L] = numerics::minimize_path_action(
                [&](const DiscretePath& p) { return oracle_action(m, p); }, init, 1e-7);
            (void)path;
            CHECK(std::fabs(g.action - L) <= 1e-4 * (1.0 + std::fabs(g.action)));
        }
    }
    SUBCASE("offset shrinking sphere") {
        auto m = ModelSpacetime::shrinking_sphere(2, 0.1, 0.5);
        std::uniform_real_distribution<double> uth(0.2, 2.8), ut(0.08, 0.5);
        for (int i = 0; i < 12; ++i) {
            const double theta = uth(rng), tau = ut(rng);
            const double d = theta * m.sphere_radius(tau);
            auto g = solve_l_geodesic(m, SpaceTimeRadialPoint(m, d, tau), 1e-10);
            auto init = straight_path(m, d, tau, 128);
            auto [path, L] = numerics::minimize_path_action(
                [&](const DiscretePath& p) { return oracle_action(m, p); }, init, 1e-7);
            (void)path;
            CHECK(std::fabs(g.action - L) <= 1e-4 * (1.0 + std::fabs(g.action)));
            CHECK(L >= g.action - 1e-6);  // discrete paths cannot beat the true infimum
        }
    }
}

TEST_CASE("reduced_distance closed forms and memoized solver grid") {
    SUBCASE("Gaussian soliton (1, 0.25) -> 1") {
        auto m = ModelSpacetime::gaussian_soliton(2, 1.0);
        CHECK(reduced_distance(m, 1.0, 0.25) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("vertex shrinking sphere: ell = n/2 everywhere") {
        auto m = ModelSpacetime::shrinking_sphere(2, 0.0, 1.0);
        for (double tau : {0.05, 0.3, 0.9})
            for (double theta : {0.0, 1.0, 3.0})
                CHECK(reduced_distance(m, theta * m.sphere_radius(tau), tau) ==
                      doctest::Approx(1.0).epsilon(1e-14));
        auto m3 = ModelSpacetime::shrinking_sphere(3, 0.0, 1.0);
        CHECK(reduced_distance(m3, 0.7, 0.5) == doctest::Approx(1.5).epsilon(1e-14));
    }
    SUBCASE("EuclideanStatic is a trivial Ricci flow: ell = d^2 / 4 tau") {
        auto m = ModelSpacetime::euclidean_static(2, 1.0);
        CHECK(reduced_distance(m, 0.8, 0.2) == doctest::Approx(0.64 / 0.8).epsilon(1e-14));
    }
    SUBCASE("parabolic scaling invariance on the Gaussian soliton") {
        auto m = ModelSpacetime::gaussian_soliton(3, 4.0);
        const double d = 0.37, tau = 0.21, lambda = 2.5;
        CHECK(reduced_distance(m, lambda * d, lambda * lambda * tau) ==
              doctest::Approx(reduced_distance(m, d, tau)).epsilon(1e-14));
    }
    SUBCASE("memoized grid matches the closed form to the 1e-6 budget") {
        auto m = ModelSpacetime::shrinking_sphere(2, 0.1, 0.5);
        std::mt19937 rng(99);
        std::uniform_real_distribution<double> uth(0.0, M_PI), ut(0.004, 0.5);
        for (int i = 0; i < 200; ++i) {
            const double theta = uth(rng), tau = ut(rng);
            const double d = theta * m.sphere_radius(tau);
            const double exact = sphere_ell_exact(2, 0.1, theta, tau);
            CHECK(reduced_distance(m, d, tau) ==
                  doctest::Approx(exact).epsilon(1e-6).scale(1.0));
        }
    }
    SUBCASE("memoized radial and time derivatives match closed-form differences") {
        auto m = ModelSpacetime::shrinking_sphere(2, 0.15, 0.5);
        const double h = 1e-6;
        for (double theta : {0.4, 1.3, 2.6}) {
            for (double tau : {0.05, 0.2, 0.45}) {
                const double r = m.sphere_radius(tau);
                const double d = theta * r;
                const double dd_exact = (sphere_ell_exact(2, 0.15, theta + h, tau) -
                                         sphere_ell_exact(2, 0.15, theta - h, tau)) /
                                        (2.0 * h * r);
                CHECK(reduced_distance_d(m, d, tau) ==
                      doctest::Approx(dd_exact).epsilon(2e-5).scale(1.0));
                // fixed co-moving point: theta constant as tau varies
                const double dt_exact = (sphere_ell_exact(2, 0.15, theta, tau + h) -
                                         sphere_ell_exact(2, 0.15, theta, tau - h)) /
                                        (2.0 * h);
                CHECK(reduced_distance_tau(m, d, tau) ==
                      doctest::Approx(dt_exact).epsilon(2e-5).scale(1.0));
            }
        }
    }
}

TEST_CASE("reduced volume") {
    SUBCASE("Gaussian soliton: V~ = 1 for all tau") {
        auto m = ModelSpacetime::gaussian_soliton(2, 2.0);
        CHECK(reduced_volume(m, 0.1) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(reduced_volume(m, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
        auto m3 = ModelSpacetime::gaussian_soliton(3, 2.0);
        CHECK(reduced_volume(m3, 0.7) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("vertex shrinking sphere n=2: V~ = 2/e for all tau") {
        auto m = ModelSpacetime::shrinking_sphere(2, 0.0, 1.0);
        for (double tau : {0.1, 0.5, 1.0})
            CHECK(reduced_volume(m, tau) == doctest::Approx(2.0 / M_E).epsilon(1e-10));
        // and the n=3 constant [(n-1)/(2 pi e)]^{3/2} Vol(S^3_1)
        auto m3 = ModelSpacetime::shrinking_sphere(3, 0.0, 1.0);
        const double expected3 =
            std::pow(2.0 / (2.0 * M_PI * M_E), 1.5) * models::round_sphere_volume(3);
        CHECK(reduced_volume(m3, 0.4) == doctest::Approx(expected3).epsilon(1e-10));
    }
    SUBCASE("offset shrinking sphere: V~ nonincreasing in tau") {
        auto m = ModelSpacetime::shrinking_sphere(2, 0.1, 0.5);
        double prev = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= 20; ++i) {
            const double tau = 0.5 * i / 20.0;
            const double v = reduced_volume(m, tau);
            CHECK(v <= prev + 1e-9);
            CHECK(v <= 1.0 + 1e-9);
            prev = v;
        }
    }
}
