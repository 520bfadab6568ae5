#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nls/grid.hpp"
#include "nls/nonlinearity.hpp"

namespace nls {

/// Scalar ingredients of the energy at a field:
/// A = |grad u|_2^2, B_i = |u|_{p_i}^{p_i}, J = A/2 - sum a_i B_i / p_i.
struct EnergyBreakdown {
    double kinetic = 0.0;           // A
    std::vector<double> moments;    // B_i per term
    double energy = 0.0;            // J(u)
    double multiplier = 0.0;        // lambda_u = A - sum a_i B_i
    double pohozaev = 0.0;          // P(u)
};

/// theta_i = N (p_i - 2) / 2, the dilation scaling exponent of |u|_{p_i}^{p_i}.
inline double theta_exponent(int N, double p) { return 0.5 * N * (p - 2.0); }

/// P(u) = A + N sum a_i B_i / p_i - (N/2) sum a_i B_i
///      = A - sum a_i theta_i B_i / p_i.
inline double pohozaev_from_parts(const PowerSumNonlinearity& nl, double A,
                                  const std::vector<double>& B) {
    double s = A;
    for (std::size_t i = 0; i < nl.terms.size(); ++i)
        s -= nl.terms[i].a * theta_exponent(nl.dimension, nl.terms[i].p) * B[i] /
             nl.terms[i].p;
    return s;
}

inline EnergyBreakdown energy_J(const RadialGrid& g, const PowerSumNonlinearity& nl,
                                const RadialField& u) {
    EnergyBreakdown e;
    e.kinetic = grad_l2_sq(g, u);
    e.moments.resize(nl.terms.size());
    double nonlin = 0.0, gu_u = 0.0;
    for (std::size_t i = 0; i < nl.terms.size(); ++i) {
        e.moments[i] = lp_norm_pow(g, u, nl.terms[i].p);
        nonlin += nl.terms[i].a * e.moments[i] / nl.terms[i].p;
        gu_u += nl.terms[i].a * e.moments[i];
    }
    e.energy = 0.5 * e.kinetic - nonlin;
    e.multiplier = e.kinetic - gu_u;
    e.pohozaev = pohozaev_from_parts(nl, e.kinetic, e.moments);
    return e;
}

/// Unconstrained L2 gradient -Delta u - g(u).
inline RadialField gradient_J(const RadialGrid& g, const PowerSumNonlinearity& nl,
                              const RadialField& u) {
    RadialField out = laplacian(g, u);
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = -out[j] - g_eval(nl, u[j]);
    out[g.count] = 0.0;
    return out;
}

/// Gradient of J restricted to the unit L2 sphere, plus the multiplier:
/// grad J_S(u) = grad J(u) - lambda_u u with lambda_u = <grad J(u), u>.
inline std::pair<RadialField, double> constrained_grad(const RadialGrid& g,
                                                       const PowerSumNonlinearity& nl,
                                                       const RadialField& u) {
    double mass = l2_norm_sq(g, u);
    if (std::abs(mass - 1.0) > 1e-8)
        throw std::invalid_argument("constrained_grad: field not L2-normalized");
    RadialField grad = gradient_J(g, nl, u);
    double lam = l2_inner(g, grad, u);
    RadialField out(g);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = grad[j] - lam * u[j];
    return {std::move(out), lam};
}

/// Closed-form stretched energy J(s*u) = e^{2s} A/2 - sum a_i e^{theta_i s} B_i/p_i.
inline double stretched_J(double A, const std::vector<double>& B,
                          const PowerSumNonlinearity& nl, double s) {
    double v = 0.5 * std::exp(2.0 * s) * A;
    for (std::size_t i = 0; i < nl.terms.size(); ++i)
        v -= nl.terms[i].a *
             std::exp(theta_exponent(nl.dimension, nl.terms[i].p) * s) * B[i] /
             nl.terms[i].p;
    return v;
}

/// d/ds of the stretched energy.
inline double stretched_J_ds(double A, const std::vector<double>& B,
                             const PowerSumNonlinearity& nl, double s) {
    double v = std::exp(2.0 * s) * A;
    for (std::size_t i = 0; i < nl.terms.size(); ++i) {
        double th = theta_exponent(nl.dimension, nl.terms[i].p);
        v -= nl.terms[i].a * th * std::exp(th * s) * B[i] / nl.terms[i].p;
    }
    return v;
}

inline double stretched_J_dss(double A, const std::vector<double>& B,
                              const PowerSumNonlinearity& nl, double s) {
    double v = 2.0 * std::exp(2.0 * s) * A;
    for (std::size_t i = 0; i < nl.terms.size(); ++i) {
        double th = theta_exponent(nl.dimension, nl.terms[i].p);
        v -= nl.terms[i].a * th * th * std::exp(th * s) * B[i] / nl.terms[i].p;
    }
    return v;
}

/// Unique maximizer s* of s -> J(s*u). Exists and is unique because every
/// theta_i > 2 in the mass-supercritical regime: the derivative e^{2s} A -
/// sum a_i theta_i e^{theta_i s} B_i/p_i changes sign exactly once.
inline double fiber_max(double A, const std::vector<double>& B,
                        const PowerSumNonlinearity& nl) {
    if (!(A > 0.0)) throw std::invalid_argument("fiber_max: kinetic term must be positive");
    bool any_moment = false;
    for (double b : B) any_moment = any_moment || b > 0.0;
    if (!any_moment) throw std::invalid_argument("fiber_max: all moments vanish");

    auto d1 = [&](double s) { return stretched_J_ds(A, B, nl, s); };
    // bracket the sign change of d1 (positive for s << 0, negative for s >> 0)
    double lo = 0.0, hi = 0.0;
    if (d1(0.0) > 0.0) {
        hi = 1.0;
        while (d1(hi) > 0.0) { lo = hi; hi *= 2.0; if (hi > 1e3) throw std::runtime_error("fiber_max: no bracket"); }
    } else {
        lo = -1.0;
        while (d1(lo) <= 0.0) { hi = lo; lo *= 2.0; if (lo < -1e3) throw std::runtime_error("fiber_max: no bracket"); }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
        double mid = 0.5 * (lo + hi);
        (d1(mid) > 0.0 ? lo : hi) = mid;
    }
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 50; ++it) {  // Newton polish
        double f = d1(s);
        if (std::abs(f) < 1e-12 * A) break;
        double df = stretched_J_dss(A, B, nl, s);
        if (df == 0.0) break;
        double step = f / df;
        if (std::abs(step) > 0.5) step = step > 0 ? 0.5 : -0.5;
        s -= step;
    }
    return s;
}

/// Pohozaev functional on the grid; equals d/ds J(s*u) at s=0.
inline double pohozaev(const RadialGrid& g, const PowerSumNonlinearity& nl,
                       const RadialField& u) {
    EnergyBreakdown e = energy_J(g, nl, u);
    return e.pohozaev;
}

}  // namespace nls
