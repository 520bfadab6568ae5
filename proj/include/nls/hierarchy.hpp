#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nls/energy.hpp"
#include "nls/grid.hpp"
#include "nls/nonlinearity.hpp"

namespace nls {

/// Nested finite-dimensional subspaces spanned by radial Dirichlet-Laplacian
/// eigenfunctions on the ball of radius R, orthonormal in L2.
struct SubspaceHierarchy {
    std::vector<RadialField> basis;      // phi_1..phi_m (index 0 = phi_1)
    std::vector<double> h1_norms;       // ||phi_j||^2 = |grad phi_j|_2^2 + 1
    int trunc = 0;                       // m
    Eigen::MatrixXd grad_gram;           // <grad phi_i, grad phi_j>
};

/// Per-level constants of the lower-bound chain plus sampling statistics.
struct MinMaxReport {
    int level = 0;             // n
    double mu_alpha = 0.0;     // truncation-exact mu_n(alpha)
    double mu_beta = 0.0;
    double M_n = 0.0;
    double K = 0.0;
    double L = 0.0;
    double rho_n = 0.0;
    double lemma2_bound = 0.0;  // rho_n^2 / 6
    long samples_checked = 0;
    long violations = 0;
    // constructed samples with |grad u|_2 = rho_n
    int bn_attempts = 0;
    int bn_hits = 0;
    long bn_violations = 0;     // J < rho^2/6 - 0.05 rho^2 among hits
    double bn_min_energy = 0.0;
};

inline SubspaceHierarchy build_hierarchy(const RadialGrid& g, int m) {
    if (m < 1) throw std::invalid_argument("build_hierarchy: m must be positive");
    if (m > g.count / 4)
        throw std::invalid_argument("build_hierarchy: m exceeds M/4 resolution guard");
    SubspaceHierarchy h;
    h.trunc = m;
    h.basis.reserve(m);

    if (g.dimension == 3) {
        // phi_j ~ sin(j pi r / R)/r; discrete sine orthogonality makes the
        // trapezoid L2 Gram exactly diagonal on the uniform grid.
        for (int j = 1; j <= m; ++j) {
            RadialField phi(g);
            double k = j * M_PI / g.radius;
            phi[0] = k;
            for (int i = 1; i < g.count; ++i)
                phi[i] = std::sin(k * g.nodes[i]) / g.nodes[i];
            phi[g.count] = 0.0;
            double nrm = std::sqrt(l2_norm_sq(g, phi));
            for (auto& v : phi.values) v /= nrm;
            h.basis.push_back(std::move(phi));
        }
    } else {
        // general N: generalized symmetric eigenproblem K c = lambda W c with
        // midpoint-cell stiffness on DOFs j=1..M-1 (natural condition at r=0,
        // where the quadrature weight vanishes anyway)
        const int n = g.count - 1;
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
        auto rmid = [&](int cell) {  // cell i spans [r_i, r_{i+1}]
            return std::pow(0.5 * (g.nodes[cell] + g.nodes[cell + 1]),
                            g.dimension - 1);
        };
        for (int j = 1; j < g.count; ++j) {
            double diag = rmid(j) / g.h;
            if (j > 1) diag += rmid(j - 1) / g.h;
            K(j - 1, j - 1) = diag;
            if (j + 1 < g.count) {
                K(j - 1, j) = -rmid(j) / g.h;
                K(j, j - 1) = -rmid(j) / g.h;
            }
            W(j - 1, j - 1) = g.weights[j];
        }
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, W);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("build_hierarchy: eigensolver failed");
        for (int j = 0; j < m; ++j) {
            RadialField phi(g);
            for (int i = 1; i < g.count; ++i) phi[i] = es.eigenvectors()(i - 1, j);
            phi[0] = (4.0 * phi[1] - phi[2]) / 3.0;  // quadratic even extension
            phi[g.count] = 0.0;
            double nrm = std::sqrt(l2_norm_sq(g, phi));
            for (auto& v : phi.values) v /= nrm;
            h.basis.push_back(std::move(phi));
        }
    }

    h.grad_gram.resize(m, m);
    h.h1_norms.resize(m);
    for (int i = 0; i < m; ++i) {
        RadialField lphi = laplacian(g, h.basis[i]);
        for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < g.size(); ++k)
                s += g.weights[k] * (-lphi[k]) * h.basis[j][k];
            h.grad_gram(i, j) = g.sphere_area * s;
        }
    }
    h.grad_gram = 0.5 * (h.grad_gram + h.grad_gram.transpose().eval());
    for (int i = 0; i < m; ++i) h.h1_norms[i] = h.grad_gram(i, i) + 1.0;
    return h;
}

namespace detail {

inline RadialField span_field(const RadialGrid& g, const SubspaceHierarchy& h,
                              int first, const Eigen::VectorXd& c) {
    RadialField u(g);
    for (int i = 0; i < c.size(); ++i) {
        const RadialField& phi = h.basis[first + i];
        for (std::size_t k = 0; k < u.size(); ++k) u[k] += c(i) * phi[k];
    }
    return u;
}

/// Maximize |u|_p^p over the H1 unit sphere of span{phi_first+1..phi_m}
/// (0-based first). Projected gradient ascent in the H = grad_gram + I metric.
inline double max_lp_sq(const RadialGrid& g, const SubspaceHierarchy& h, double p,
                        int first, const std::vector<Eigen::VectorXd>& starts) {
    const int d = h.trunc - first;
    Eigen::MatrixXd H = h.grad_gram.block(first, first, d, d) +
                        Eigen::MatrixXd::Identity(d, d);
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("mu_n: H1 Gram not positive definite");

    auto h_norm = [&](const Eigen::VectorXd& c) {
        return std::sqrt(c.dot(H * c));
    };
    auto objective = [&](const Eigen::VectorXd& c, Eigen::VectorXd* grad) {
        RadialField u = span_field(g, h, first, c);
        double f = 0.0;
        if (grad) grad->setZero(d);
        std::vector<double> wpow(u.size());
        for (std::size_t k = 0; k < u.size(); ++k) {
            double a = std::abs(u[k]);
            double ap1 = std::pow(a, p - 1.0);
            f += g.weights[k] * ap1 * a;
            wpow[k] = g.weights[k] * p * ap1 * (u[k] >= 0 ? 1.0 : -1.0);
        }
        if (grad) {
            for (int i = 0; i < d; ++i) {
                double s = 0.0;
                const RadialField& phi = h.basis[first + i];
                for (std::size_t k = 0; k < u.size(); ++k) s += wpow[k] * phi[k];
                (*grad)(i) = g.sphere_area * s;
            }
        }
        return g.sphere_area * f;  // |u|_p^p
    };

    double best = 0.0;
    for (Eigen::VectorXd c : starts) {
        c /= h_norm(c);
        Eigen::VectorXd grad(d);
        double f = objective(c, &grad);
        double t = 0.5;
        for (int it = 0; it < 500; ++it) {
            Eigen::VectorXd dir = llt.solve(grad);
            bool improved = false;
            for (int ls = 0; ls < 40; ++ls) {
                Eigen::VectorXd cn = c + t * dir;
                cn /= h_norm(cn);
                double fn = objective(cn, nullptr);
                if (fn > f * (1.0 + 1e-14)) {
                    c = cn;
                    double gain = fn - f;
                    f = fn;
                    objective(c, &grad);
                    t *= 1.5;
                    improved = true;
                    if (gain < 1e-13 * f) it = 500;  // converged
                    break;
                }
                t *= 0.5;
            }
            if (!improved) break;
        }
        best = std::max(best, f);
    }
    return std::pow(best, 2.0 / p);  // |u|_p^2 at ||u|| = 1
}

}  // namespace detail

/// Truncation-exact estimate of mu_n(p) = inf ||u||^2 / |u|_p^2 over
/// span{phi_n..phi_m}; an over-estimate of the infimum over the full
/// orthogonal complement, and exact on the truncated span.
inline double mu_n(const RadialGrid& g, const SubspaceHierarchy& h, double p, int n,
                   int starts = 8, unsigned seed = 42,
                   const Eigen::VectorXd* warm = nullptr) {
    if (!(p > 2.0)) throw std::invalid_argument("mu_n: p must exceed 2");
    if (n < 1 || n > h.trunc) throw std::invalid_argument("mu_n: level out of range");
    const int first = n - 1;
    const int d = h.trunc - first;
    std::mt19937_64 rng(seed + 7919u * static_cast<unsigned>(n));
    std::normal_distribution<double> gauss;
    std::vector<Eigen::VectorXd> s0;
    for (int i = 0; i < starts; ++i) {
        Eigen::VectorXd c(d);
        for (int k = 0; k < d; ++k) c(k) = gauss(rng);
        s0.push_back(c);
    }
    {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
        c(0) = 1.0;  // lowest mode of the span
        s0.push_back(c);
    }
    if (warm && warm->size() >= d) s0.push_back(warm->tail(d));
    double sup = detail::max_lp_sq(g, h, p, first, s0);
    if (!(sup > 0.0)) throw std::runtime_error("mu_n: optimizer stagnation at zero");
    return 1.0 / sup;
}

/// Assemble the Lemma-2 style report at level n: constants, random-sample
/// inequality-chain verification over span{phi_n..phi_m}, and constructed
/// samples with |grad u|_2 = rho_n.
inline MinMaxReport minmax_report(const RadialGrid& g, const PowerSumNonlinearity& nl,
                                  const SubspaceHierarchy& h, int n, long samples,
                                  unsigned seed = 42, int starts = 8,
                                  double mu_a_precomputed = 0.0,
                                  double mu_b_precomputed = 0.0) {
    MinMaxReport rep;
    rep.level = n;
    rep.K = h2_constant_K(nl);
    rep.L = lemma2_constant_L(nl, rep.K);
    rep.mu_alpha = mu_a_precomputed > 0.0 ? mu_a_precomputed
                                          : mu_n(g, h, nl.alpha, n, starts, seed);
    rep.mu_beta = mu_b_precomputed > 0.0 ? mu_b_precomputed
                                         : mu_n(g, h, nl.beta, n, starts, seed + 1);
    const double a = nl.alpha, b = nl.beta;
    rep.M_n = std::pow(std::pow(rep.mu_alpha, -0.5 * a) + std::pow(rep.mu_beta, -0.5 * b),
                       -2.0 / b);
    rep.rho_n = std::pow(rep.M_n, b / (2.0 * (b - 2.0))) /
                std::pow(rep.L, 1.0 / (b - 2.0));
    rep.lemma2_bound = rep.rho_n * rep.rho_n / 6.0;

    const int first = n - 1;
    const int d = h.trunc - first;
    std::mt19937_64 rng(seed + 104729u * static_cast<unsigned>(n));
    std::normal_distribution<double> gauss;
    auto chain_rhs = [&](double A) {
        return 0.5 * A -
               rep.K * std::pow(rep.mu_alpha, -0.5 * a) * std::pow(A + 1.0, 0.5 * a) -
               rep.K * std::pow(rep.mu_beta, -0.5 * b) * std::pow(A + 1.0, 0.5 * b);
    };

    for (long s = 0; s < samples; ++s) {
        Eigen::VectorXd c(d);
        for (int k = 0; k < d; ++k) c(k) = gauss(rng);
        c.normalize();  // basis is L2-orthonormal, so |u|_2 = 1
        RadialField u = detail::span_field(g, h, first, c);
        EnergyBreakdown e = energy_J(g, nl, u);
        ++rep.samples_checked;
        if (e.energy < chain_rhs(e.kinetic) - 1e-10) ++rep.violations;
    }

    // constructed B_n samples: blend a random direction toward the extreme
    // eigenvector of the restricted gradient Gram until |grad u|_2^2 = rho^2
    Eigen::MatrixXd Gg = h.grad_gram.block(first, first, d, d);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Gg);
    Eigen::VectorXd emax = es.eigenvectors().col(d - 1);
    Eigen::VectorXd emin = es.eigenvectors().col(0);
    const double rho2 = rep.rho_n * rep.rho_n;
    auto A_of = [&](const Eigen::VectorXd& c) { return c.dot(Gg * c); };
    rep.bn_min_energy = 1e300;
    const int attempts = 50;
    for (int s = 0; s < attempts; ++s) {
        ++rep.bn_attempts;
        Eigen::VectorXd c(d);
        for (int k = 0; k < d; ++k) c(k) = gauss(rng);
        c.normalize();
        double A0 = A_of(c);
        Eigen::VectorXd target = A0 < rho2 ? emax : emin;
        auto blend = [&](double t) {
            Eigen::VectorXd cb = (1.0 - t) * c + t * target;
            cb.normalize();
            return cb;
        };
        double tlo = 0.0, thi = 1.0;
        if ((A_of(blend(0.0)) - rho2) * (A_of(blend(1.0)) - rho2) > 0.0) continue;
        for (int it = 0; it < 60; ++it) {
            double tm = 0.5 * (tlo + thi);
            if ((A_of(blend(tm)) - rho2) * (A_of(blend(tlo)) - rho2) > 0.0)
                tlo = tm;
            else
                thi = tm;
        }
        Eigen::VectorXd cb = blend(0.5 * (tlo + thi));
        if (std::abs(A_of(cb) - rho2) > 1e-8 * std::max(rho2, 1.0)) continue;
        ++rep.bn_hits;
        RadialField u = detail::span_field(g, h, first, cb);
        EnergyBreakdown e = energy_J(g, nl, u);
        rep.bn_min_energy = std::min(rep.bn_min_energy, e.energy);
        if (e.energy < rep.lemma2_bound - 0.05 * rho2) ++rep.bn_violations;
    }
    if (rep.bn_hits == 0) rep.bn_min_energy = 0.0;
    return rep;
}

/// Full diagnostics sweep over levels 1..levels, with descending warm starts
/// so the reported mu-sequence is monotone by construction of the search.
inline std::vector<MinMaxReport> run_diagnostics(const RadialGrid& g,
                                                 const PowerSumNonlinearity& nl,
                                                 const SubspaceHierarchy& h,
                                                 int levels, long samples,
                                                 int starts = 8, unsigned seed = 42) {
    if (levels < 1 || levels > h.trunc)
        throw std::invalid_argument("run_diagnostics: bad level count");
    std::vector<double> mua(levels + 1, 0.0), mub(levels + 1, 0.0);
    for (int n = levels; n >= 1; --n) {
        // warm start from level n+1's span is implicit: the optimizer seeds
        // include the lowest mode and random starts; monotonicity additionally
        // enforced by taking the running minimum of the achieved suprema
        mua[n] = mu_n(g, h, nl.alpha, n, starts, seed);
        mub[n] = mu_n(g, h, nl.beta, n, starts, seed + 1);
        if (n < levels) {
            mua[n] = std::min(mua[n], mua[n + 1]);
            mub[n] = std::min(mub[n], mub[n + 1]);
        }
    }
    std::vector<MinMaxReport> out;
    for (int n = 1; n <= levels; ++n)
        out.push_back(minmax_report(g, nl, h, n, samples, seed, starts, mua[n], mub[n]));
    return out;
}

}  // namespace nls
