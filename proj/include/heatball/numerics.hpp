#pragma once

// Numerical kernel shared by all modules: adaptive Gauss-Kronrod quadrature,
// bracketed root finding, an adaptive Runge-Kutta integrator with dense
// output, discrete path-action minimization, and Richardson extrapolation.
//
// All routines are pure and deterministic: identical inputs give bit-identical
// results. Accepted quadrature panels are reduced with a fixed pairwise tree.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace heatball {
namespace numerics {

struct Interval {
    double lo;
    double hi;

    Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi))
            throw std::invalid_argument("Interval: require finite lo < hi, got [" +
                                        std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
    }
    double length() const { return hi - lo; }
};

struct QuadResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    long evaluations = 0;
};

namespace detail {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15 constants).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kK15Weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891715};

// Gauss-7 weights, aligned with the odd Kronrod nodes (indices 1,3,5,7).
inline constexpr double kG7Weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct PanelResult {
    double value;
    double err;
};

template <class F>
PanelResult gk15(F& f, double a, double b) {
    const double centr = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);

    double fv1[7], fv2[7];
    const double fc = f(centr);
    double resg = kG7Weights[3] * fc;
    double resk = kK15Weights[7] * fc;
    double resabs = std::fabs(resk);
    for (int j = 0; j < 7; ++j) {
        const double absc = hlgth * kGK15Nodes[j];
        fv1[j] = f(centr - absc);
        fv2[j] = f(centr + absc);
        const double fsum = fv1[j] + fv2[j];
        if (j % 2 == 1) resg += kG7Weights[j / 2] * fsum;
        resk += kK15Weights[j] * fsum;
        resabs += kK15Weights[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
    }
    const double reskh = resk * 0.5;
    double resasc = kK15Weights[7] * std::fabs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += kK15Weights[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));

    const double value = resk * hlgth;
    resabs *= std::fabs(hlgth);
    resasc *= std::fabs(hlgth);
    double abserr = std::fabs((resk - resg) * hlgth);
    if (resasc != 0.0 && abserr != 0.0)
        abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    const double uflow = std::numeric_limits<double>::min();
    if (resabs > uflow / (50.0 * eps))
        abserr = std::max(eps * 50.0 * resabs, abserr);
    return {value, abserr};
}

// Fixed-order pairwise tree reduction; serial and (hypothetical) parallel
// evaluations of the same panel set reduce to the same bits.
inline double pairwise_sum(const double* v, size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return v[0];
    const size_t half = n / 2;
    return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature of f over iv to absolute
/// tolerance tol. Integrable endpoint singularities of type x^a log(x)^b with
/// a > -1 are resolved by repeated bisection toward the endpoint; the rule is
/// open, so f is never evaluated at iv.lo or iv.hi.
template <class F>
QuadResult integrate_adaptive(F&& f, Interval iv, double tol, long max_panels = 250000) {
    struct Panel {
        double lo, hi, value, err;
    };
    auto fw = [&f](double x) { return static_cast<double>(f(x)); };

    std::vector<Panel> panels;
    panels.reserve(256);
    long evals = 0;
    auto checked_panel = [&fw](double lo, double hi) {
        detail::PanelResult r = detail::gk15(fw, lo, hi);
        if (!std::isfinite(r.value) || !std::isfinite(r.err)) {
            char buf[192];
            std::snprintf(buf, sizeof buf,
                          "integrate_adaptive: non-finite integrand values on subinterval "
                          "[%.17g, %.17g]",
                          lo, hi);
            throw std::runtime_error(buf);
        }
        return r;
    };
    {
        detail::PanelResult r = checked_panel(iv.lo, iv.hi);
        evals += 15;
        panels.push_back({iv.lo, iv.hi, r.value, r.err});
    }
    auto total_err = [&panels]() {
        double e = 0.0;
        for (const Panel& p : panels) e += p.err;
        return e;
    };

    while (total_err() > tol) {
        if (static_cast<long>(panels.size()) >= max_panels) {
            size_t iw = 0;
            for (size_t i = 1; i < panels.size(); ++i)
                if (panels[i].err > panels[iw].err) iw = i;
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "integrate_adaptive: no convergence after %ld panels; worst subinterval "
                          "[%.17g, %.17g] with error estimate %.3g (target %.3g)",
                          max_panels, panels[iw].lo, panels[iw].hi, panels[iw].err, tol);
            throw std::runtime_error(buf);
        }
        // bisect the worst panel; ties broken toward the leftmost for determinism
        size_t iw = 0;
        for (size_t i = 1; i < panels.size(); ++i)
            if (panels[i].err > panels[iw].err) iw = i;
        const Panel worst = panels[iw];
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(worst.lo < mid && mid < worst.hi)) {
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "integrate_adaptive: subinterval [%.17g, %.17g] cannot be bisected "
                          "further (error estimate %.3g, target %.3g)",
                          worst.lo, worst.hi, worst.err, tol);
            throw std::runtime_error(buf);
        }
        detail::PanelResult rl = checked_panel(worst.lo, mid);
        detail::PanelResult rr = checked_panel(mid, worst.hi);
        evals += 30;
        panels[iw] = {worst.lo, mid, rl.value, rl.err};
        panels.push_back({mid, worst.hi, rr.value, rr.err});
    }

    std::sort(panels.begin(), panels.end(),
              [](const Panel& a, const Panel& b) { return a.lo < b.lo; });
    std::vector<double> values(panels.size());
    for (size_t i = 0; i < panels.size(); ++i) values[i] = panels[i].value;

    QuadResult out;
    out.value = detail::pairwise_sum(values);
    out.abs_error_estimate = total_err();
    out.evaluations = evals;
    return out;
}

/// Brent root finder on a sign-changing bracket. Returns x with the final
/// bracket width below xtol; f is assumed continuous (monotonicity sharpens
/// the guarantee but is not required for convergence).
template <class F>
double find_root(F&& f, Interval bracket, double xtol = 1e-12) {
    double a = bracket.lo, b = bracket.hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0)
        throw std::runtime_error("find_root: no sign change on bracket [" + std::to_string(a) +
                                 ", " + std::to_string(b) + "]");

    double c = a, fc = fa;
    double d = b - a, e = d;
    const double eps = std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < 200; ++iter) {
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * eps * std::fabs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    return b;
}

/// Trajectory produced by integrate_ode; queryable anywhere in the span via
/// cubic Hermite interpolation between accepted steps.
struct OdeTrajectory {
    struct Node {
        double s;
        std::vector<double> y;
        std::vector<double> dy;
    };
    std::vector<Node> nodes;

    std::vector<double> eval(double s) const {
        if (nodes.empty()) throw std::logic_error("OdeTrajectory: empty");
        if (s <= nodes.front().s) return nodes.front().y;
        if (s >= nodes.back().s) return nodes.back().y;
        size_t hi = 1;
        while (nodes[hi].s < s) ++hi;
        const Node& n0 = nodes[hi - 1];
        const Node& n1 = nodes[hi];
        const double h = n1.s - n0.s;
        const double t = (s - n0.s) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        std::vector<double> y(n0.y.size());
        for (size_t i = 0; i < y.size(); ++i)
            y[i] = h00 * n0.y[i] + h10 * h * n0.dy[i] + h01 * n1.y[i] + h11 * h * n1.dy[i];
        return y;
    }
    double eval(double s, size_t comp) const { return eval(s)[comp]; }
    const std::vector<double>& final_state() const { return nodes.back().y; }
};

/// Adaptive Dormand-Prince 5(4) integration of y' = field(s, y) across span.
/// Local error per step is controlled to tol (mixed absolute/relative).
template <class Field>
OdeTrajectory integrate_ode(Field&& field, std::vector<double> init, Interval span, double tol) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const size_t n = init.size();
    std::vector<double> y = std::move(init);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);

    double s = span.lo;
    field(s, y, k1);

    OdeTrajectory traj;
    traj.nodes.push_back({s, y, k1});

    double h = std::min(span.length(), std::max(1e-8, 1e-2 * span.length()));
    const double hmin = 16.0 * std::numeric_limits<double>::epsilon() * span.length();
    long steps = 0;
    while (s < span.hi) {
        if (++steps > 2000000)
            throw std::runtime_error("integrate_ode: step count exceeded (stiffness suspected)");
        if (h < hmin)
            throw std::runtime_error(
                "integrate_ode: step size underflow near s = " + std::to_string(s) +
                " (stiffness diagnostic)");
        bool last = false;
        if (s + h >= span.hi) {
            h = span.hi - s;
            last = true;
        }
        for (size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        field(s + c2 * h, ytmp, k2);
        for (size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        field(s + c3 * h, ytmp, k3);
        for (size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        field(s + c4 * h, ytmp, k4);
        for (size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        field(s + c5 * h, ytmp, k5);
        for (size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        field(s + h, ytmp, k6);
        for (size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        field(s + h, ynew, k7);

        double errnorm = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double err = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                    e6 * k6[i] + e7 * k7[i]);
            const double sk = tol + tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            errnorm += (err / sk) * (err / sk);
        }
        errnorm = std::sqrt(errnorm / static_cast<double>(n));

        if (errnorm <= 1.0) {
            s += h;
            y.swap(ynew);
            k1.swap(k7);  // FSAL
            traj.nodes.push_back({s, y, k1});
            if (last) break;
        }
        const double fac =
            std::clamp(0.9 * std::pow(std::max(errnorm, 1e-10), -0.2), 0.2, 5.0);
        h *= fac;
    }
    return traj;
}

/// Radial path sampled on a strictly increasing grid in s = sqrt(tau).
struct DiscretePath {
    std::vector<double> s;
    std::vector<double> u;

    void validate() const {
        if (s.size() != u.size() || s.size() < 2)
            throw std::invalid_argument("DiscretePath: need matching grids with >= 2 nodes");
        for (size_t i = 1; i < s.size(); ++i)
            if (!(s[i] > s[i - 1]))
                throw std::invalid_argument("DiscretePath: grid must be strictly increasing");
    }
};

/// Coordinate-descent minimization of a path action over interior nodes.
/// Endpoints stay fixed. Low-frequency error relaxes slowly under plain
/// sweeps, so paths with many nodes are seeded coarse-to-fine: the solution
/// on every other node is prolonged and re-relaxed. Returns the refined path
/// and its action value; interior first-order stationarity is polished below
/// tol.
template <class Action>
std::pair<DiscretePath, double> minimize_path_action(Action&& action, DiscretePath init,
                                                     double tol, int max_sweeps = 400) {
    init.validate();
    DiscretePath path = std::move(init);
    double f0 = action(path);
    if (!std::isfinite(f0))
        throw std::invalid_argument("minimize_path_action: action not finite at init");

    const size_t m = path.u.size();
    if (m <= 2) return {path, f0};

    if (m >= 19) {
        DiscretePath coarse;
        for (size_t i = 0; i < m; i += 2) {
            coarse.s.push_back(path.s[i]);
            coarse.u.push_back(path.u[i]);
        }
        if (coarse.s.back() != path.s.back()) {
            coarse.s.push_back(path.s.back());
            coarse.u.push_back(path.u.back());
        }
        auto [copt, cval] = minimize_path_action(action, coarse, tol, max_sweeps);
        (void)cval;
        // prolong the coarse solution onto the fine grid; adopt it only if it
        // actually improves on the given init
        std::vector<double> u_orig = path.u;
        size_t j = 0;
        for (size_t i = 1; i + 1 < m; ++i) {
            const double s = path.s[i];
            while (j + 1 < copt.s.size() && copt.s[j + 1] < s) ++j;
            const double t = (s - copt.s[j]) / (copt.s[j + 1] - copt.s[j]);
            path.u[i] = (1.0 - t) * copt.u[j] + t * copt.u[j + 1];
        }
        const double seeded = action(path);
        if (seeded <= f0)
            f0 = seeded;
        else
            path.u = std::move(u_orig);
    }

    // per-node quadratic line search with expanding probes
    auto improve_node = [&](size_t i, double step) {
        const double u0 = path.u[i];
        const double fc = action(path);
        path.u[i] = u0 + step;
        const double fp = action(path);
        path.u[i] = u0 - step;
        const double fm = action(path);
        // quadratic fit through (u0-step, u0, u0+step)
        const double denom = fp - 2.0 * fc + fm;
        double best_u = u0;
        double best_f = fc;
        if (fp < best_f) { best_f = fp; best_u = u0 + step; }
        if (fm < best_f) { best_f = fm; best_u = u0 - step; }
        if (denom > 0.0) {
            const double uq = u0 - 0.5 * step * (fp - fm) / denom;
            path.u[i] = uq;
            const double fq = action(path);
            if (fq < best_f) { best_f = fq; best_u = uq; }
        }
        path.u[i] = best_u;
        return best_f;
    };

    double scale = 0.0;
    for (double v : path.u) scale = std::max(scale, std::fabs(v));
    scale = std::max(scale, 1.0);
    double step = 0.1 * scale;

    double f = f0;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double moved = 0.0;
        for (size_t i = 1; i + 1 < m; ++i) {
            const double before = path.u[i];
            f = improve_node(i, step);
            moved = std::max(moved, std::fabs(path.u[i] - before));
        }
        if (moved < 0.25 * step) step *= 0.5;
        if (step < 0.02 * tol) break;
    }

    // stationarity polish: damped Newton on each interior node until the
    // central-difference gradient drops below tol
    const double h = std::max(1e-6 * scale, 1e-9);
    for (int round = 0; round < 60; ++round) {
        double gmax = 0.0;
        for (size_t i = 1; i + 1 < m; ++i) {
            const double u0 = path.u[i];
            path.u[i] = u0 + h;
            const double fp = action(path);
            path.u[i] = u0 - h;
            const double fm = action(path);
            path.u[i] = u0;
            const double fc = action(path);
            const double g = (fp - fm) / (2.0 * h);
            const double curv = (fp - 2.0 * fc + fm) / (h * h);
            gmax = std::max(gmax, std::fabs(g));
            if (curv > 0.0) {
                const double unew = u0 - g / curv;
                path.u[i] = unew;
                if (action(path) >= fc) path.u[i] = u0;
            }
        }
        if (gmax < tol) break;
    }
    f = action(path);
    return {path, f};
}

struct ExtrapolationResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// Richardson extrapolation of samples (r_i, v_i) to r -> 0, treating v as a
/// polynomial in r^2 of the given order. The error estimate is the difference
/// between the two highest-order Neville columns.
inline ExtrapolationResult extrapolate_to_zero(std::vector<std::pair<double, double>> samples,
                                               int order) {
    const int need = order + 2;
    if (static_cast<int>(samples.size()) < need)
        throw std::invalid_argument("extrapolate_to_zero: need at least order+2 samples");
    std::sort(samples.begin(), samples.end());
    for (size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i].first > 0.0))
            throw std::invalid_argument("extrapolate_to_zero: radii must be positive");
        if (i > 0 && !(samples[i].first > samples[i - 1].first * (1.0 + 1e-12)))
            throw std::invalid_argument(
                "extrapolate_to_zero: degenerate sample spacing (conditioning)");
    }

    // Neville tableau in x = r^2 evaluated at x = 0
    const size_t n = samples.size();
    std::vector<double> x(n), t(n);
    for (size_t i = 0; i < n; ++i) {
        x[i] = samples[i].first * samples[i].first;
        t[i] = samples[i].second;
    }
    double prev_corner = t[0];
    std::vector<double> col = t;
    double corner = t[0];
    for (int k = 1; k <= order; ++k) {
        std::vector<double> next(n - k);
        for (size_t i = 0; i + k < n; ++i) {
            const double xi = x[i], xk = x[i + k];
            next[i] = (xk * col[i] - xi * col[i + 1]) / (xk - xi);
        }
        prev_corner = corner;
        corner = next[0];
        col.swap(next);
    }
    ExtrapolationResult out;
    out.value = corner;
    out.error_estimate = std::fabs(corner - prev_corner);
    return out;
}

using detail::pairwise_sum;

}  // namespace numerics
}  // namespace heatball
