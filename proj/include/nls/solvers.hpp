#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nls/energy.hpp"
#include "nls/grid.hpp"
#include "nls/nonlinearity.hpp"
#include "nls/shoot.hpp"

namespace nls {

enum class SolverKind { fiber_descent, shooting, newton };

inline const char* solver_name(SolverKind k) {
    switch (k) {
        case SolverKind::fiber_descent: return "fiber_descent";
        case SolverKind::shooting: return "shooting";
        case SolverKind::newton: return "newton";
    }
    return "?";
}

struct SolutionRecord {
    RadialField field;
    double lambda = 0.0;
    double energy = 0.0;
    int nodes = 0;
    double residual = 0.0;           // ||-Delta u - g(u) - lambda u||_{L2}
    double pohozaev_residual = 0.0;  // |P(u)|
    double mass_error = 0.0;         // | |u|_2^2 - 1 |
    SolverKind solver = SolverKind::newton;
    int iterations = 0;
    // m(lambda) continuation table, persisted so multiple roots are visible
    std::vector<std::pair<double, double>> lambda_scan;
};

struct SolverOptions {
    int max_iter = 60;           // Newton iterations
    int descent_max_iter = 400;  // fiber-descent iterations
    double tol_residual = 1e-8;  // accepted when residual < tol*(1+|lambda|)
    double tol_mass = 1e-10;
    double descent_tol = 1e-5;   // constrained-gradient norm target
    double lambda_scan_min = -1e4;
    double lambda_scan_max = -0.5;
    int lambda_scan_points = 41;
    double decay_tol = 1e-8;
    unsigned seed = 42;
};

/// Count strict sign changes between consecutive samples whose magnitudes both
/// exceed amplitude_tol (default 1e-7 * max |u|).
inline int node_count(const RadialField& u, double amplitude_tol = -1.0) {
    double umax = 0.0;
    for (double v : u.values) umax = std::max(umax, std::abs(v));
    if (amplitude_tol < 0.0) amplitude_tol = 1e-7 * umax;
    if (!(amplitude_tol > 0.0))
        throw std::invalid_argument("node_count: tolerance must be positive");
    int n = 0;
    double last = 0.0;
    for (double v : u.values) {
        if (std::abs(v) <= amplitude_tol) continue;
        if (last != 0.0 && v * last < 0.0) ++n;
        last = v;
    }
    return n;
}

inline bool record_is_valid(const SolutionRecord& rec, const SolverOptions& opts) {
    return rec.mass_error < opts.tol_mass &&
           rec.residual < opts.tol_residual * (1.0 + std::abs(rec.lambda)) &&
           rec.lambda < 0.0;
}

namespace detail {

inline void normalize_mass(const RadialGrid& g, RadialField& u) {
    double m = l2_norm_sq(g, u);
    if (!(m > 0.0)) throw std::runtime_error("normalize_mass: zero field");
    double c = 1.0 / std::sqrt(m);
    for (auto& v : u.values) v *= c;
}

inline double l2_distance(const RadialGrid& g, const RadialField& u,
                          const RadialField& v) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        double d = u[j] - v[j];
        s += g.weights[j] * d * d;
    }
    return std::sqrt(g.sphere_area * s);
}

/// PDE residual F_j = (-Delta u - g(u) - lambda u)_j for j = 0..M-1 (u_M = 0).
inline void pde_residual(const RadialGrid& g, const PowerSumNonlinearity& nl,
                         const std::vector<double>& u, double lambda,
                         std::vector<double>& F) {
    const int M = g.count;
    const double h2 = g.h * g.h;
    const int N = g.dimension;
    F.resize(M);
    F[0] = -N * 2.0 * (u[1] - u[0]) / h2 - g_eval(nl, u[0]) - lambda * u[0];
    for (int j = 1; j < M; ++j) {
        double up = j + 1 < M ? u[j + 1] : 0.0;
        double cpl = 1.0 / h2 + (N - 1) / (2.0 * g.h * g.nodes[j]);
        double cml = 1.0 / h2 - (N - 1) / (2.0 * g.h * g.nodes[j]);
        double lap = cpl * up + cml * u[j - 1] - 2.0 * u[j] / h2;
        F[j] = -lap - g_eval(nl, u[j]) - lambda * u[j];
    }
}

inline double residual_l2(const RadialGrid& g, const std::vector<double>& F) {
    double s = 0.0;
    for (std::size_t j = 0; j < F.size(); ++j) s += g.weights[j] * F[j] * F[j];
    return std::sqrt(g.sphere_area * s);
}

/// Solve the bordered tridiagonal system
///   [ T  c ] [du    ]   [ -F      ]
///   [ r' 0 ] [dlam  ] = [ -F_mass ]
/// by block elimination with two Thomas solves. T rows are the PDE Jacobian
/// -Delta_h - g'(u) - lambda, c = -u, r = quadrature-weighted u.
struct Tridiag {
    std::vector<double> lower, diag, upper;  // sizes M-1, M, M-1
};

inline void thomas_solve(const Tridiag& T, std::vector<double> rhs,
                         std::vector<double>& x) {
    const std::size_t n = T.diag.size();
    std::vector<double> c(n - 1);
    std::vector<double> d(n);
    d[0] = T.diag[0];
    if (d[0] == 0.0) throw std::runtime_error("newton: singular tridiagonal pivot");
    c[0] = T.upper[0] / d[0];
    rhs[0] /= d[0];
    for (std::size_t i = 1; i < n; ++i) {
        double m = T.diag[i] - T.lower[i - 1] * c[i - 1];
        if (m == 0.0) throw std::runtime_error("newton: singular tridiagonal pivot");
        if (i < n - 1) c[i] = T.upper[i] / m;
        rhs[i] = (rhs[i] - T.lower[i - 1] * rhs[i - 1]) / m;
        d[i] = m;
    }
    x.resize(n);
    x[n - 1] = rhs[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = rhs[i] - c[i] * x[i + 1];
}

inline Tridiag pde_jacobian(const RadialGrid& g, const PowerSumNonlinearity& nl,
                            const std::vector<double>& u, double lambda) {
    const int M = g.count;
    const double h2 = g.h * g.h;
    const int N = g.dimension;
    Tridiag T;
    T.lower.resize(M - 1);
    T.diag.resize(M);
    T.upper.resize(M - 1);
    T.diag[0] = N * 2.0 / h2 - g_prime(nl, u[0]) - lambda;
    T.upper[0] = -N * 2.0 / h2;
    for (int j = 1; j < M; ++j) {
        double cpl = 1.0 / h2 + (N - 1) / (2.0 * g.h * g.nodes[j]);
        double cml = 1.0 / h2 - (N - 1) / (2.0 * g.h * g.nodes[j]);
        T.diag[j] = 2.0 / h2 - g_prime(nl, u[j]) - lambda;
        T.lower[j - 1] = -cml;
        if (j < M - 1) T.upper[j] = -cpl;
    }
    return T;
}

}  // namespace detail

/// Newton iteration on the bordered system F(u, lambda) = 0, mass constraint
/// (|u|_2^2 - 1)/2 = 0. With a nonempty deflated set the PDE residual is
/// premultiplied by prod_k (1 + 1/||u - u_k||^2) to repel known solutions
/// (dense linear algebra path, moderate grids only).
inline SolutionRecord newton_refine(const RadialGrid& g, const PowerSumNonlinearity& nl,
                                    const RadialField& guess, double lambda_guess,
                                    const std::vector<SolutionRecord>& deflated = {},
                                    const SolverOptions& opts = {}) {
    const int M = g.count;
    double mass0 = l2_norm_sq(g, guess);
    if (std::abs(mass0 - 1.0) > 0.1)
        throw std::invalid_argument("newton_refine: guess mass error exceeds 0.1");
    if (!deflated.empty() && M > 4096)
        throw std::invalid_argument("newton_refine: deflation path limited to M <= 4096");

    std::vector<double> u(guess.values.begin(), guess.values.begin() + M);
    double lambda = lambda_guess;
    std::vector<double> F, y, z;
    const double tol = 0.1 * opts.tol_residual;

    auto mass_of = [&](const std::vector<double>& w) {
        double s = 0.0;
        for (int j = 0; j < M; ++j) s += g.weights[j] * w[j] * w[j];
        return g.sphere_area * s;
    };
    auto merit = [&](const std::vector<double>& w, double lam) {
        detail::pde_residual(g, nl, w, lam, F);
        double r = detail::residual_l2(g, F);
        double me = 0.5 * (mass_of(w) - 1.0);
        return std::sqrt(r * r + me * me);
    };

    int it = 0;
    for (; it < opts.max_iter; ++it) {
        detail::pde_residual(g, nl, u, lambda, F);
        double rnorm = detail::residual_l2(g, F);
        double fm = 0.5 * (mass_of(u) - 1.0);
        if (rnorm < tol * (1.0 + std::abs(lambda)) && std::abs(fm) < 0.5 * opts.tol_mass)
            break;

        std::vector<double> du(M);
        double dlam = 0.0;
        if (deflated.empty()) {
            detail::Tridiag T = detail::pde_jacobian(g, nl, u, lambda);
            std::vector<double> c(M);
            for (int j = 0; j < M; ++j) c[j] = -u[j];
            detail::thomas_solve(T, F, y);
            detail::thomas_solve(T, c, z);
            double ry = 0.0, rz = 0.0;
            for (int j = 0; j < M; ++j) {
                double rj = g.sphere_area * g.weights[j] * u[j];
                ry += rj * y[j];
                rz += rj * z[j];
            }
            if (rz == 0.0) throw std::runtime_error("newton_refine: singular bordered system");
            dlam = (fm - ry) / rz;
            for (int j = 0; j < M; ++j) du[j] = -y[j] - dlam * z[j];
        } else {
            // deflated residual Fd = mu(u) F, mu = prod (1 + 1/d_k)
            RadialField ucur(g);
            for (int j = 0; j < M; ++j) ucur[j] = u[j];
            double mu = 1.0;
            std::vector<double> dmu(M, 0.0);  // grad of mu wrt u
            for (const auto& rec : deflated) {
                double d = detail::l2_distance(g, ucur, rec.field);
                double d2 = d * d;
                if (d2 < 1e-24) throw std::runtime_error("newton_refine: at deflated solution");
                mu *= 1.0 + 1.0 / d2;
            }
            for (const auto& rec : deflated) {
                double d = detail::l2_distance(g, ucur, rec.field);
                double d2 = d * d;
                double fac = -(1.0 / (d2 * d2)) / (1.0 + 1.0 / d2);
                for (int j = 0; j < M; ++j)
                    dmu[j] += mu * fac * 2.0 * g.sphere_area * g.weights[j] *
                              (u[j] - rec.field[j]);
            }
            Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(M + 1, M + 1);
            detail::Tridiag T = detail::pde_jacobian(g, nl, u, lambda);
            for (int j = 0; j < M; ++j) {
                Jm(j, j) = mu * T.diag[j];
                if (j + 1 < M) {
                    Jm(j, j + 1) = mu * T.upper[j];
                    Jm(j + 1, j) = mu * T.lower[j];
                }
                for (int k = 0; k < M; ++k) Jm(j, k) += F[j] * dmu[k];
                Jm(j, M) = mu * -u[j];
                Jm(M, j) = g.sphere_area * g.weights[j] * u[j];
            }
            Eigen::VectorXd rhs(M + 1);
            for (int j = 0; j < M; ++j) rhs(j) = -mu * F[j];
            rhs(M) = -fm;
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(Jm);
            Eigen::VectorXd sol = lu.solve(rhs);
            if (!sol.allFinite())
                throw std::runtime_error("newton_refine: singular deflated Jacobian");
            for (int j = 0; j < M; ++j) du[j] = sol(j);
            dlam = sol(M);
        }

        // damped update
        double base = merit(u, lambda);
        double t = 1.0;
        std::vector<double> utry(M);
        bool accepted = false;
        for (int ls = 0; ls < 12; ++ls) {
            for (int j = 0; j < M; ++j) utry[j] = u[j] + t * du[j];
            double ltry = lambda + t * dlam;
            if (merit(utry, ltry) < (1.0 - 0.25 * t) * base + 1e-300) {
                u = utry;
                lambda = ltry;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {  // take the full step anyway near roundoff stagnation
            if (base < 1e3 * tol * (1.0 + std::abs(lambda))) {
                for (int j = 0; j < M; ++j) u[j] += du[j];
                lambda += dlam;
            } else {
                throw std::runtime_error("newton_refine: line search failed, residual " +
                                         std::to_string(base));
            }
        }
    }

    detail::pde_residual(g, nl, u, lambda, F);
    double rnorm = detail::residual_l2(g, F);
    if (rnorm > opts.tol_residual * (1.0 + std::abs(lambda)))
        throw std::runtime_error("newton_refine: no convergence after " +
                                 std::to_string(it) + " iterations, residual " +
                                 std::to_string(rnorm));
    if (!(lambda < 0.0))
        throw std::runtime_error("newton_refine: converged to nonnegative eigenvalue " +
                                 std::to_string(lambda));

    SolutionRecord rec;
    rec.field = RadialField(g);
    for (int j = 0; j < M; ++j) rec.field[j] = u[j];
    rec.field[M] = 0.0;
    for (const auto& prev : deflated) {
        if (detail::l2_distance(g, rec.field, prev.field) < 1e-6)
            throw std::runtime_error("newton_refine: converged to a deflated solution");
    }
    EnergyBreakdown e = energy_J(g, nl, rec.field);
    rec.lambda = lambda;
    rec.energy = e.energy;
    rec.nodes = node_count(rec.field);
    rec.residual = rnorm;
    rec.pohozaev_residual = std::abs(e.pohozaev);
    rec.mass_error = std::abs(l2_norm_sq(g, rec.field) - 1.0);
    rec.solver = SolverKind::newton;
    rec.iterations = it;
    return rec;
}

namespace detail {

/// n-node profile at a fixed lambda by continuum shooting: bisect the central
/// amplitude between trajectories with <= n_target and > n_target sign
/// changes (the count at the first undershoot/overshoot event is monotone in
/// the amplitude), take the low-side trajectory, clip it at its separatrix
/// departure point, and resample onto the grid by cubic Hermite with an
/// exponential far-field tail. `mass` gets the continuum L2 mass including
/// the tail correction, which is what the outer m(lambda) = 1 continuation
/// solves on.
inline bool shoot_profile(const RadialGrid& g, const PowerSumNonlinearity& nl,
                          double lambda, int n_target, RadialField& out,
                          double* mass = nullptr) {
    const int N = g.dimension;
    const double kappa = std::sqrt(-lambda);
    auto high_side = [&](double a) {
        ShootingOutcome o = shoot(N, nl, lambda, a, g.radius);
        return o.nodes > n_target || o.classification == ShotClass::overshoot;
    };
    double a_lo = std::max(1.0, kappa), a_hi;
    if (high_side(a_lo)) {
        while (high_side(a_lo)) {
            a_lo *= 0.5;
            if (a_lo < 1e-10) return false;
        }
        a_hi = 2.0 * a_lo;
    } else {
        a_hi = a_lo;
        do {
            a_hi *= 2.0;
            if (a_hi > 1e12) return false;
        } while (!high_side(a_hi));
        a_lo = 0.5 * a_hi;
    }
    for (int it = 0; it < 90 && (a_hi - a_lo) > 1e-16 * a_hi; ++it) {
        double mid = 0.5 * (a_lo + a_hi);
        (high_side(mid) ? a_hi : a_lo) = mid;
    }

    ShootTrajectory traj;
    shoot(N, nl, lambda, a_lo, g.radius, 1e-8, &traj, g.sphere_area);
    if (traj.r.size() < 4) return false;

    // locate the last sign change, then the magnitude minimum after it: the
    // point where the near-separatrix trajectory departs from the decay
    std::size_t last_cross = 0;
    double sgn = traj.u.front() > 0 ? 1.0 : -1.0;
    for (std::size_t j = 1; j < traj.u.size(); ++j) {
        if (sgn * traj.u[j] < 0.0 && std::abs(traj.u[j]) > 1e-13 * a_lo) {
            sgn = -sgn;
            last_cross = j;
        }
    }
    std::size_t jmin = last_cross + 1;
    if (jmin >= traj.u.size()) return false;
    double vmin = 1e300;
    for (std::size_t j = last_cross + 1; j < traj.u.size(); ++j) {
        if (std::abs(traj.u[j]) < vmin) { vmin = std::abs(traj.u[j]); jmin = j; }
    }
    if (jmin < 2) return false;
    const double rhat = traj.r[jmin];
    const double uhat = traj.u[jmin];
    if (mass) {
        *mass = traj.m[jmin] + g.sphere_area * uhat * uhat *
                                   std::pow(rhat, N - 1) / (2.0 * kappa);
    }

    out = RadialField(g);
    std::size_t seg = 0;
    for (int j = 0; j < g.count; ++j) {
        double r = g.nodes[j];
        if (r <= traj.r.front()) {
            out[j] = traj.u.front();
        } else if (r >= rhat) {
            out[j] = uhat * std::exp(-kappa * (r - rhat)) *
                     std::pow(rhat / r, 0.5 * (N - 1));
        } else {
            while (seg + 1 < jmin && traj.r[seg + 1] < r) ++seg;
            double r0 = traj.r[seg], r1 = traj.r[seg + 1], hh = r1 - r0;
            double t = (r - r0) / hh, t2 = t * t, t3 = t2 * t;
            out[j] = (2 * t3 - 3 * t2 + 1) * traj.u[seg] +
                     (t3 - 2 * t2 + t) * hh * traj.v[seg] +
                     (-2 * t3 + 3 * t2) * traj.u[seg + 1] +
                     (t3 - t2) * hh * traj.v[seg + 1];
        }
    }
    out[g.count] = 0.0;
    return true;
}

}  // namespace detail

/// n-node normalized solution: outer continuation on lambda with the shooting
/// profile's mass m(lambda); solve m(lambda) = 1 by scan + bisection (no
/// monotonicity assumed), then polish with the bordered Newton.
inline SolutionRecord excited_state(const RadialGrid& g, const PowerSumNonlinearity& nl,
                                    int n_target, const SolverOptions& opts = {},
                                    double lambda_hint = 0.0) {
    if (n_target < 0) throw std::invalid_argument("excited_state: negative node target");
    double lo = opts.lambda_scan_min, hi = opts.lambda_scan_max;
    int pts = opts.lambda_scan_points;
    if (lambda_hint < 0.0) {
        lo = lambda_hint * 8.0;
        hi = std::max(lambda_hint / 8.0, -1e-2);
        pts = std::max(17, pts / 2);
    }
    std::vector<std::pair<double, double>> scan;
    RadialField prof;
    for (int i = 0; i < pts; ++i) {
        double lam = -std::exp(std::log(-lo) +
                               (std::log(-hi) - std::log(-lo)) * i / (pts - 1.0));
        double m = 0.0;
        if (!detail::shoot_profile(g, nl, lam, n_target, prof, &m)) continue;
        scan.emplace_back(lam, m);
    }
    // collect all sign-change brackets of m(lambda) - 1; prefer smallest |lambda|
    std::vector<std::pair<double, double>> brackets;
    for (std::size_t i = 1; i < scan.size(); ++i) {
        if ((scan[i - 1].second - 1.0) * (scan[i].second - 1.0) < 0.0)
            brackets.emplace_back(scan[i - 1].first, scan[i].first);
    }
    std::sort(brackets.begin(), brackets.end(),
              [](auto& x, auto& y) { return std::abs(x.first) < std::abs(y.first); });
    if (brackets.empty()) {
        std::string msg = "excited_state: no unit-mass bracket in scan; m(lambda) table:";
        for (auto& [l, m] : scan)
            msg += "\n  lambda=" + std::to_string(l) + " m=" + std::to_string(m);
        throw std::runtime_error(msg);
    }

    std::string last_err;
    for (const auto& [bl, bh] : brackets) {
        double la = bl, lb = bh;
        double m_la = 0.0;
        {
            RadialField tmp;
            double m = 0.0;
            if (!detail::shoot_profile(g, nl, la, n_target, tmp, &m)) continue;
            m_la = m - 1.0;
        }
        double lam = 0.5 * (la + lb);
        for (int it = 0; it < 80; ++it) {
            lam = 0.5 * (la + lb);
            double m = 0.0;
            if (!detail::shoot_profile(g, nl, lam, n_target, prof, &m)) break;
            double dm = m - 1.0;
            if (std::abs(dm) < 1e-9 || std::abs(la - lb) < 1e-13 * std::abs(lam))
                break;
            if (dm * m_la > 0.0) {
                la = lam;
                m_la = dm;
            } else {
                lb = lam;
            }
        }
        try {
            if (!detail::shoot_profile(g, nl, lam, n_target, prof))
                throw std::runtime_error("excited_state: shooting profile failed at root");
            detail::normalize_mass(g, prof);
            SolutionRecord rec = newton_refine(g, nl, prof, lam, {}, opts);
            if (rec.nodes != n_target)
                throw std::runtime_error("excited_state: polished record has " +
                                         std::to_string(rec.nodes) + " nodes, wanted " +
                                         std::to_string(n_target));
            rec.solver = SolverKind::shooting;
            rec.lambda_scan = scan;
            return rec;
        } catch (const std::exception& e) {
            last_err = e.what();
        }
    }
    throw std::runtime_error("excited_state: all brackets failed; last error: " + last_err);
}

/// Ground state by alternating exact dilation to the Pohozaev manifold
/// (fiber_max) with projected gradient descent on the sphere, then Newton.
inline SolutionRecord ground_state(const RadialGrid& g, const PowerSumNonlinearity& nl,
                                   const SolverOptions& opts = {}) {
    // Gaussian initial guess with width chosen so that s* ~ 0
    auto gaussian = [&](double sigma) {
        RadialField u(g);
        for (int j = 0; j < g.count; ++j)
            u[j] = std::exp(-g.nodes[j] * g.nodes[j] / (2.0 * sigma * sigma));
        detail::normalize_mass(g, u);
        return u;
    };
    // The r=0 value carries zero quadrature weight, so it is a null coordinate
    // of the discrete energy; pin it by the even-parity extrapolation to keep
    // interpolation (dilate) well behaved.
    auto pin_origin = [](RadialField& w) { w[0] = (4.0 * w[1] - w[2]) / 3.0; };
    double best_sigma = 0.1 * g.radius, best_abs = 1e300;
    for (int i = 0; i <= 40; ++i) {
        double sigma = g.radius * std::exp(std::log(0.005) +
                                           (std::log(0.35) - std::log(0.005)) * i / 40.0);
        if (sigma < 3.0 * g.h) continue;
        RadialField u = gaussian(sigma);
        EnergyBreakdown e = energy_J(g, nl, u);
        try {
            double s = fiber_max(e.kinetic, e.moments, nl);
            if (std::abs(s) < best_abs) { best_abs = std::abs(s); best_sigma = sigma; }
        } catch (const std::exception&) {}
    }
    RadialField u = gaussian(best_sigma);

    auto fiber_energy = [&](const RadialField& w) {
        EnergyBreakdown e = energy_J(g, nl, w);
        double s = fiber_max(e.kinetic, e.moments, nl);
        return stretched_J(e.kinetic, e.moments, nl, s);
    };

    double step = 0.05;
    int it = 0;
    double lambda_u = -1.0;
    for (; it < opts.descent_max_iter; ++it) {
        EnergyBreakdown e = energy_J(g, nl, u);
        double s = fiber_max(e.kinetic, e.moments, nl);
        if (std::abs(s) > 1e-3) {
            double sc = std::clamp(s, -0.8, 0.8);
            u = dilate(g, u, sc);
            pin_origin(u);
            detail::normalize_mass(g, u);
        }
        auto [v, lam] = constrained_grad(g, nl, u);
        v[0] = 0.0;  // null coordinate, see pin_origin
        lambda_u = lam;
        double gn = std::sqrt(l2_norm_sq(g, v));
        if (gn < opts.descent_tol) break;

        double E0 = fiber_energy(u);
        bool moved = false;
        for (int ls = 0; ls < 30; ++ls) {
            RadialField w(g);
            for (std::size_t j = 0; j < w.size(); ++j) w[j] = u[j] - step * v[j];
            pin_origin(w);
            detail::normalize_mass(g, w);
            double Ew;
            try {
                Ew = fiber_energy(w);
            } catch (const std::exception&) { step *= 0.5; continue; }
            if (Ew < E0 - 1e-4 * step * gn * gn) {
                u = std::move(w);
                step *= 1.5;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;  // stagnation; hand over to Newton
    }

    SolutionRecord rec;
    try {
        rec = newton_refine(g, nl, u, lambda_u, {}, opts);
        if (rec.nodes != 0)
            throw std::runtime_error("ground_state: Newton left the 0-node branch");
        // reject under-resolved limits the descent can leak into: the decay
        // scale sqrt(-lambda) must stay representable on the grid
        if (std::sqrt(-rec.lambda) * g.h > 0.8)
            throw std::runtime_error("ground_state: converged state under-resolved");
    } catch (const std::exception&) {
        // robust fallback: lattice-shooting continuation toward the same state
        rec = excited_state(g, nl, 0, opts, lambda_u < 0 ? lambda_u : 0.0);
    }
    rec.solver = SolverKind::fiber_descent;
    rec.iterations += it;
    return rec;
}

/// Normalized ground state for a single power from the classical profile:
/// solve -Delta w + w = w^{p-1} by continuum shooting at lambda = -1, then
/// rescale u(x) = c w(dx) with d^2 = c^{p-2}, c = (|w|_2^2)^{2/(N(p-2)-4)},
/// lambda = -d^2, and polish on the grid.
inline SolutionRecord oracle_homogeneous(int N, double p, const RadialGrid& g,
                                         const SolverOptions& opts = {}) {
    PowerSumNonlinearity nl = validate_powers(N, {{1.0, p}});
    const double r_max = 30.0;

    auto high_side = [&](double a) {
        ShootingOutcome o = shoot(N, nl, -1.0, a, r_max, opts.decay_tol);
        return o.nodes > 0 || o.classification == ShotClass::overshoot;
    };
    double a_lo = 1.0, a_hi = 1.0;
    if (high_side(1.0)) {
        while (high_side(a_lo)) { a_lo *= 0.5; if (a_lo < 1e-8) throw std::runtime_error("oracle: no low bracket"); }
        a_hi = 2.0 * a_lo;
    } else {
        while (!high_side(a_hi)) { a_hi *= 2.0; if (a_hi > 1e8) throw std::runtime_error("oracle: no high bracket"); }
        a_lo = 0.5 * a_hi;
    }
    for (int i = 0; i < 80; ++i) {
        double mid = 0.5 * (a_lo + a_hi);
        (high_side(mid) ? a_hi : a_lo) = mid;
    }

    detail::ShootTrajectory traj;
    shoot(N, nl, -1.0, a_lo, r_max, opts.decay_tol, &traj, g.sphere_area);

    // truncate the trajectory at its magnitude minimum (separatrix departure)
    std::size_t jmin = 0;
    double vmin = 1e300;
    for (std::size_t j = 0; j < traj.u.size(); ++j) {
        if (!std::isfinite(traj.u[j])) break;
        if (std::abs(traj.u[j]) < vmin) { vmin = std::abs(traj.u[j]); jmin = j; }
    }
    if (jmin < 2) throw std::runtime_error("oracle: degenerate trajectory");
    double rhat = traj.r[jmin];
    double mass_w = traj.m[jmin] +
                    g.sphere_area * traj.u[jmin] * traj.u[jmin] *
                        std::pow(rhat, N - 1) / 2.0;  // exponential tail, kappa = 1

    double expo = 2.0 / (N * (p - 2.0) - 4.0);
    double c = std::pow(mass_w, expo);
    double d = std::pow(c, 0.5 * (p - 2.0));
    double lambda = -d * d;

    // resample u(r) = c w(d r) via cubic Hermite on the trajectory
    RadialField u(g);
    std::size_t seg = 0;
    for (int j = 0; j < g.count; ++j) {
        double rw = d * g.nodes[j];
        double w;
        if (rw <= traj.r.front()) {
            w = traj.u.front();
        } else if (rw >= rhat) {
            w = traj.u[jmin] * std::exp(-(rw - rhat)) *
                std::pow(rhat / rw, 0.5 * (N - 1));
        } else {
            while (seg + 1 < jmin && traj.r[seg + 1] < rw) ++seg;
            double r0 = traj.r[seg], r1 = traj.r[seg + 1], hh = r1 - r0;
            double t = (rw - r0) / hh, t2 = t * t, t3 = t2 * t;
            w = (2 * t3 - 3 * t2 + 1) * traj.u[seg] + (t3 - 2 * t2 + t) * hh * traj.v[seg] +
                (-2 * t3 + 3 * t2) * traj.u[seg + 1] + (t3 - t2) * hh * traj.v[seg + 1];
        }
        u[j] = c * w;
    }
    u[g.count] = 0.0;

    SolutionRecord rec;
    try {
        RadialField guess = u;
        detail::normalize_mass(g, guess);
        rec = newton_refine(g, nl, guess, lambda, {}, opts);
        if (rec.nodes != 0) throw std::runtime_error("oracle: polish left 0-node branch");
    } catch (const std::exception&) {
        rec = excited_state(g, nl, 0, opts, lambda);
    }
    rec.solver = SolverKind::newton;
    return rec;
}

}  // namespace nls
