#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nls {

struct PowerTerm {
    double a;  // coefficient, > 0
    double p;  // exponent
};

/// g(x) = sum_i a_i |x|^{p_i-2} x with mass-supercritical, Sobolev-subcritical
/// exponents: 2 + 4/N < p_1 < ... < p_k < 2N/(N-2) (upper bound void for N=2).
struct PowerSumNonlinearity {
    std::vector<PowerTerm> terms;  // sorted by increasing exponent
    int dimension = 0;
    double alpha = 0.0;  // p_1
    double beta = 0.0;   // p_k
};

inline double critical_exponent(int N) {
    return N >= 3 ? 2.0 * N / (N - 2.0) : std::numeric_limits<double>::infinity();
}

inline PowerSumNonlinearity validate_powers(int N, std::vector<PowerTerm> terms) {
    std::vector<std::string> errs;
    if (N < 2) errs.push_back("dimension below 2");
    if (terms.empty()) errs.push_back("empty term list");
    std::sort(terms.begin(), terms.end(),
              [](const PowerTerm& x, const PowerTerm& y) { return x.p < y.p; });
    const double lo = 2.0 + 4.0 / N;
    const double hi = critical_exponent(N);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        std::ostringstream os;
        if (!(terms[i].a > 0.0)) {
            os << "coefficient a=" << terms[i].a << " must be positive";
            errs.push_back(os.str());
            continue;
        }
        if (!(terms[i].p > lo) || !(terms[i].p < hi)) {
            os << "exponent p=" << terms[i].p << " outside admissible interval ("
               << lo << ", " << hi << ") for N=" << N;
            errs.push_back(os.str());
        }
        if (i > 0 && terms[i].p == terms[i - 1].p) {
            os.str("");
            os << "duplicate exponent p=" << terms[i].p;
            errs.push_back(os.str());
        }
    }
    if (!errs.empty()) {
        std::string msg = "invalid nonlinearity:";
        for (const auto& e : errs) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }
    PowerSumNonlinearity nl;
    nl.terms = std::move(terms);
    nl.dimension = N;
    nl.alpha = nl.terms.front().p;
    nl.beta = nl.terms.back().p;
    return nl;
}

inline double g_eval(const PowerSumNonlinearity& nl, double x) {
    double s = 0.0;
    double ax = std::abs(x);
    for (const auto& t : nl.terms) s += t.a * std::pow(ax, t.p - 2.0);
    return s * x;
}

inline double G_eval(const PowerSumNonlinearity& nl, double x) {
    double s = 0.0;
    double ax = std::abs(x);
    for (const auto& t : nl.terms) s += t.a * std::pow(ax, t.p) / t.p;
    return s;
}

/// g'(x), needed by Newton linearization.
inline double g_prime(const PowerSumNonlinearity& nl, double x) {
    double s = 0.0;
    double ax = std::abs(x);
    for (const auto& t : nl.terms) s += t.a * (t.p - 1.0) * std::pow(ax, t.p - 2.0);
    return s;
}

namespace detail {

// Golden-section maximization of f over [a, b] (log-parametrized by caller).
template <class F>
double golden_max(F f, double a, double b, double tol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a); fd = f(d);
        }
    }
    return f(0.5 * (a + b));
}

}  // namespace detail

/// K = max_{x>0} G(x) / (x^alpha + x^beta). Log-spaced scan plus
/// golden-section refinement; relative accuracy ~1e-8.
inline double h2_constant_K(const PowerSumNonlinearity& nl) {
    auto ratio = [&](double t) {  // t = log x
        double x = std::exp(t);
        return G_eval(nl, x) / (std::pow(x, nl.alpha) + std::pow(x, nl.beta));
    };
    const int n_scan = 2000;
    double t_lo = std::log(1e-8), t_hi = std::log(1e8);
    double best_t = 0.0, best = -1.0;
    for (int i = 0; i <= n_scan; ++i) {
        double t = t_lo + (t_hi - t_lo) * i / n_scan;
        double v = ratio(t);
        if (v > best) { best = v; best_t = t; }
    }
    double w = (t_hi - t_lo) / n_scan;
    return detail::golden_max(ratio, best_t - 2 * w, best_t + 2 * w, 1e-12);
}

/// L = 3K * max_{x>0} (1+x^2)^{beta/2} / (1+x^beta). The inner objective is
/// invariant under x -> 1/x and exceeds its limits at 0 and infinity, so the
/// maximum sits at x = 1 with value 2^{(beta-2)/2}.
inline double lemma2_constant_L(const PowerSumNonlinearity& nl, double K) {
    return 3.0 * K * std::pow(2.0, 0.5 * (nl.beta - 2.0));
}

inline double lemma2_constant_L(const PowerSumNonlinearity& nl) {
    return lemma2_constant_L(nl, h2_constant_K(nl));
}

}  // namespace nls
