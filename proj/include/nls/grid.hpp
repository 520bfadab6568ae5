#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nls {

/// Uniform radial grid on [0, R] in dimension N with trapezoid quadrature
/// weights for integrands of the form f(r) r^{N-1}.
struct RadialGrid {
    int dimension = 0;          // N >= 2
    double radius = 0.0;        // truncation radius R
    int count = 0;              // number of cells M; nodes are 0..M
    double h = 0.0;             // R / M
    std::vector<double> nodes;  // r_j = j h
    std::vector<double> weights;  // w_j, int_0^R f r^{N-1} dr ~ sum w_j f_j
    double sphere_area = 0.0;   // omega_N = 2 pi^{N/2} / Gamma(N/2)

    std::size_t size() const { return nodes.size(); }
};

/// Sampled radial profile on a grid. Dirichlet truncation: values.back() == 0.
struct RadialField {
    const RadialGrid* grid = nullptr;
    std::vector<double> values;

    RadialField() = default;
    explicit RadialField(const RadialGrid& g) : grid(&g), values(g.size(), 0.0) {}
    RadialField(const RadialGrid& g, std::vector<double> v)
        : grid(&g), values(std::move(v)) {
        if (values.size() != g.size())
            throw std::invalid_argument("RadialField: length mismatch with grid");
        values.back() = 0.0;
    }

    double& operator[](std::size_t j) { return values[j]; }
    double operator[](std::size_t j) const { return values[j]; }
    std::size_t size() const { return values.size(); }
};

namespace detail {

// Gamma(N/2) for integer N via closed forms: Gamma(k) = (k-1)!,
// Gamma(k+1/2) = (2k)! sqrt(pi) / (4^k k!).
inline double gamma_half_integer(int n) {
    if (n % 2 == 0) {
        int k = n / 2;
        double g = 1.0;
        for (int i = 2; i < k; ++i) g *= i;
        return g;
    }
    int k = (n - 1) / 2;
    double g = std::sqrt(M_PI);
    // (2k)! / (4^k k!) = prod_{i=1..k} (2i-1) / 2
    for (int i = 1; i <= k; ++i) g *= (2.0 * i - 1.0) / 2.0;
    return g;
}

}  // namespace detail

inline RadialGrid make_grid(int N, double R, int M) {
    if (N < 2) throw std::invalid_argument("make_grid: dimension below 2");
    if (!(R > 0.0)) throw std::invalid_argument("make_grid: radius must be positive");
    if (M < 16) throw std::invalid_argument("make_grid: need at least 16 cells");
    RadialGrid g;
    g.dimension = N;
    g.radius = R;
    g.count = M;
    g.h = R / M;
    g.nodes.resize(M + 1);
    g.weights.resize(M + 1);
    for (int j = 0; j <= M; ++j) {
        g.nodes[j] = j * g.h;
        g.weights[j] = g.h * std::pow(g.nodes[j], N - 1);
    }
    g.weights[0] *= 0.5;
    g.weights[M] *= 0.5;
    g.sphere_area = 2.0 * std::pow(M_PI, 0.5 * N) / detail::gamma_half_integer(N);
    return g;
}

/// omega_N * int_0^R f(r) r^{N-1} dr ~ integral of a radial function over R^N.
inline double integrate(const RadialGrid& g, const std::vector<double>& samples) {
    if (samples.size() != g.size())
        throw std::invalid_argument("integrate: sample length mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < samples.size(); ++j) s += g.weights[j] * samples[j];
    return g.sphere_area * s;
}

inline double l2_inner(const RadialGrid& g, const RadialField& u, const RadialField& v) {
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += g.weights[j] * u[j] * v[j];
    return g.sphere_area * s;
}

inline double l2_norm_sq(const RadialGrid& g, const RadialField& u) {
    return l2_inner(g, u, u);
}

/// |u|_p^p = int |u|^p over R^N.
inline double lp_norm_pow(const RadialGrid& g, const RadialField& u, double p) {
    if (p < 1.0) throw std::invalid_argument("lp_norm_pow: p below 1");
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        s += g.weights[j] * std::pow(std::abs(u[j]), p);
    return g.sphere_area * s;
}

/// Second-order radial Laplacian u'' + (N-1)/r u'. At r=0 uses the symmetric
/// limit Delta u(0) = N u''(0) with a ghost node; boundary output is 0.
inline RadialField laplacian(const RadialGrid& g, const RadialField& u) {
    RadialField out(g);
    const int M = g.count;
    const double h = g.h;
    const int N = g.dimension;
    out[0] = N * 2.0 * (u[1] - u[0]) / (h * h);
    for (int j = 1; j < M; ++j) {
        out[j] = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (h * h) +
                 (N - 1) / g.nodes[j] * (u[j + 1] - u[j - 1]) / (2.0 * h);
    }
    out[M] = 0.0;
    return out;
}

/// Kinetic inner product <-Delta u, v> in the quadrature L2 pairing.
/// For N = 2, 3 this bilinear form is the exact derivative of the kinetic
/// energy, which keeps gradients of the energy functional consistent with
/// finite-difference probes.
inline double grad_inner(const RadialGrid& g, const RadialField& u, const RadialField& v) {
    RadialField lu = laplacian(g, u);
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += g.weights[j] * (-lu[j]) * v[j];
    return g.sphere_area * s;
}

/// |grad u|_2^2 as the quadratic form <-Delta u, u>.
inline double grad_l2_sq(const RadialGrid& g, const RadialField& u) {
    return grad_inner(g, u, u);
}

namespace detail {

// Fritsch-Carlson monotone cubic slopes on a uniform grid.
inline std::vector<double> pchip_slopes(const std::vector<double>& y, double h) {
    const std::size_t n = y.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) return d;
    std::vector<double> del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) del[i] = (y[i + 1] - y[i]) / h;
    d[0] = del[0];
    d[n - 1] = del[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (del[i - 1] * del[i] <= 0.0)
            d[i] = 0.0;
        else
            d[i] = 2.0 * del[i - 1] * del[i] / (del[i - 1] + del[i]);
    }
    // limit endpoint slopes
    auto limit_end = [](double dend, double del0) {
        if (dend * del0 <= 0.0) return 0.0;
        if (std::abs(dend) > 3.0 * std::abs(del0)) return 3.0 * del0;
        return dend;
    };
    d[0] = limit_end(d[0], del[0]);
    d[n - 1] = limit_end(d[n - 1], del[n - 2]);
    return d;
}

}  // namespace detail

/// Monotone cubic (PCHIP) interpolant of a field; zero beyond R.
class PchipInterpolant {
   public:
    PchipInterpolant(const RadialGrid& g, const RadialField& u)
        : h_(g.h), radius_(g.radius), y_(u.values),
          d_(detail::pchip_slopes(u.values, g.h)) {}

    double operator()(double r) const {
        if (r < 0.0) r = -r;
        if (r >= radius_) return 0.0;
        std::size_t i = static_cast<std::size_t>(r / h_);
        if (i + 1 >= y_.size()) i = y_.size() - 2;
        double t = (r - i * h_) / h_;
        double t2 = t * t, t3 = t2 * t;
        double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * y_[i] + h10 * h_ * d_[i] + h01 * y_[i + 1] + h11 * h_ * d_[i + 1];
    }

   private:
    double h_, radius_;
    std::vector<double> y_, d_;
};

/// Dilation action (s*u)(x) = e^{sN/2} u(e^s x), sampled back onto the grid.
inline RadialField dilate(const RadialGrid& g, const RadialField& u, double s,
                          double s_max = 1.0) {
    if (std::abs(s) > s_max)
        throw std::invalid_argument("dilate: |s| exceeds s_max");
    if (s == 0.0) return u;
    PchipInterpolant interp(g, u);
    RadialField out(g);
    const double amp = std::exp(0.5 * s * g.dimension);
    const double scale = std::exp(s);
    for (int j = 0; j < g.count; ++j) out[j] = amp * interp(scale * g.nodes[j]);
    out[g.count] = 0.0;
    return out;
}

/// Warn-level diagnostic: true when the field has not decayed on the last 10%
/// of the grid (truncation radius too small).
inline bool support_leakage(const RadialGrid& g, const RadialField& u,
                            double tol = 1e-8) {
    std::size_t start = static_cast<std::size_t>(0.9 * g.count);
    for (std::size_t j = start; j < g.size(); ++j)
        if (std::abs(u[j]) > tol) return true;
    return false;
}

}  // namespace nls
