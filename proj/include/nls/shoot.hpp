#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nls/nonlinearity.hpp"

namespace nls {

enum class ShotClass { undershoot, overshoot, decay };

struct ShootingOutcome {
    ShotClass classification = ShotClass::undershoot;
    int nodes = 0;
    double exit_radius = 0.0;
    double terminal_value = 0.0;
};

namespace detail {

/// Accepted-step trajectory of the radial shoot, with the running mass
/// integral m(r) = omega_N int_0^r u^2 t^{N-1} dt carried as a third state.
struct ShootTrajectory {
    std::vector<double> r, u, v, m;
};

struct Rhs {
    int N;
    const PowerSumNonlinearity* nl;
    double lambda;
    double omega;  // sphere area, for the mass quadrature state

    void operator()(double r, const double y[3], double dy[3]) const {
        dy[0] = y[1];
        dy[1] = -(N - 1) / r * y[1] - lambda * y[0] - g_eval(*nl, y[0]);
        dy[2] = omega * std::pow(r, N - 1) * y[0] * y[0];
    }
};

// Dormand-Prince 5(4) embedded pair, one adaptive step attempt.
inline bool dp45_step(const Rhs& f, double r, const double y[3], double h,
                      double ynew[3], double* err_est) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    double k1[3], k2[3], k3[3], k4[3], k5[3], k6[3], k7[3], yt[3];
    f(r, y, k1);
    for (int i = 0; i < 3; ++i) yt[i] = y[i] + h * a21 * k1[i];
    f(r + c2 * h, yt, k2);
    for (int i = 0; i < 3; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(r + c3 * h, yt, k3);
    for (int i = 0; i < 3; ++i)
        yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(r + c4 * h, yt, k4);
    for (int i = 0; i < 3; ++i)
        yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(r + c5 * h, yt, k5);
    for (int i = 0; i < 3; ++i)
        yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                            a65 * k5[i]);
    f(r + h, yt, k6);
    for (int i = 0; i < 3; ++i)
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                              b6 * k6[i]);
    f(r + h, ynew, k7);
    double err = 0.0;
    for (int i = 0; i < 3; ++i) {
        double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                        e6 * k6[i] + e7 * k7[i]);
        double sc = 1e-12 + 1e-10 * std::max(std::abs(y[i]), std::abs(ynew[i]));
        err = std::max(err, std::abs(e) / sc);
    }
    *err_est = err;
    return std::isfinite(ynew[0]) && std::isfinite(ynew[1]) && err <= 1.0;
}

}  // namespace detail

/// Integrate u'' + (N-1)/r u' + lambda u + g(u) = 0, u(0)=a, u'(0)=0, from the
/// regular series start, with adaptive 4/5-order stepping. Classifies the
/// trajectory for shooting bisection:
///   - overshoot: |u| exceeds a blow-up cap (the profile crossed and diverges);
///   - undershoot: after an extremum the trajectory turns back away from zero
///     (s u' > 0 and s u > 0 with s the sign carried since the last crossing),
///     spiraling toward the nonzero equilibrium instead of decaying;
///   - decay: reaches r_max below decay_tol with logarithmic slope within 10%
///     of -sqrt(-lambda).
/// Amplitudes so small that g is negligible against |lambda| u sit on the low
/// side of the separatrix by construction and are reported as undershoot.
inline ShootingOutcome shoot(int N, const PowerSumNonlinearity& nl, double lambda,
                             double a, double r_max, double decay_tol = 1e-8,
                             detail::ShootTrajectory* traj = nullptr,
                             double omega = 0.0) {
    if (!(lambda < 0.0)) throw std::invalid_argument("shoot: lambda must be negative");
    if (!(a > 0.0)) throw std::invalid_argument("shoot: amplitude must be positive");
    const double kappa = std::sqrt(-lambda);
    const double cap = 1e6 * std::max(a, 1.0);
    const bool linear_regime = g_eval(nl, a) < 1e-4 * (-lambda) * a;

    detail::Rhs f{N, &nl, lambda, omega};
    double r = std::min(1e-3, 1e-3 / kappa);
    double curv = (lambda * a + g_eval(nl, a)) / (2.0 * N);
    double y[3] = {a - curv * r * r, -2.0 * curv * r, omega * std::pow(r, N) / N * a * a};

    int crossings = 0;
    double sign = 1.0;
    bool had_extremum = true;  // u'(0) = 0 counts
    double prev_v = y[1];
    double h = r;

    ShootingOutcome out;
    if (traj) {
        traj->r.push_back(r); traj->u.push_back(y[0]);
        traj->v.push_back(y[1]); traj->m.push_back(y[2]);
    }
    while (r < r_max) {
        if (h > r_max - r) h = r_max - r;
        double ynew[3], err;
        bool ok = detail::dp45_step(f, r, y, h, ynew, &err);
        if (!ok) {
            if (!std::isfinite(ynew[0]) || !std::isfinite(ynew[1])) {
                // blow-up inside the step: treat like exceeding the cap
                out.classification = crossings > 0 || sign < 0 ? ShotClass::overshoot
                                                              : ShotClass::undershoot;
                if (linear_regime) out.classification = ShotClass::undershoot;
                out.nodes = crossings;
                out.exit_radius = r;
                out.terminal_value = y[0];
                return out;
            }
            h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
            if (h < 1e-14 * std::max(1.0, r))
                throw std::runtime_error("shoot: step size underflow");
            continue;
        }
        r += h;
        for (int i = 0; i < 3; ++i) y[i] = ynew[i];
        h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        if (traj) {
            traj->r.push_back(r); traj->u.push_back(y[0]);
            traj->v.push_back(y[1]); traj->m.push_back(y[2]);
        }

        if (sign * y[0] < 0.0) {  // crossed zero
            ++crossings;
            sign = -sign;
            had_extremum = false;
        }
        if (prev_v * y[1] < 0.0) had_extremum = true;
        prev_v = y[1];

        if (std::abs(y[0]) > cap) {
            out.classification = ShotClass::overshoot;
            out.nodes = crossings;
            out.exit_radius = r;
            out.terminal_value = y[0];
            return out;
        }
        if (had_extremum && sign * y[1] > 0.0 && sign * y[0] > 0.0 && r > 2.0 * h) {
            out.classification = ShotClass::undershoot;
            out.nodes = crossings;
            out.exit_radius = r;
            out.terminal_value = y[0];
            return out;
        }
    }
    out.nodes = crossings;
    out.exit_radius = r;
    out.terminal_value = y[0];
    double slope_ratio = y[0] != 0.0 ? -y[1] / y[0] : kappa;
    if (std::abs(y[0]) < decay_tol && std::abs(slope_ratio - kappa) < 0.1 * kappa &&
        !linear_regime) {
        out.classification = ShotClass::decay;
    } else if (linear_regime || sign * y[0] >= 0.0) {
        out.classification = ShotClass::undershoot;
    } else {
        out.classification = ShotClass::overshoot;
    }
    return out;
}

}  // namespace nls
