#include <cmath>
#include <random>

#include "doctest.h"
#include "nls/energy.hpp"

using namespace nls;

namespace {

RadialField random_field(const RadialGrid& g, std::mt19937_64& rng, double decay = 0.5) {
    std::normal_distribution<double> gauss;
    RadialField u(g);
    for (int j = 0; j < g.count; ++j)
        u[j] = gauss(rng) * std::exp(-decay * g.nodes[j]);
    u[0] = (4.0 * u[1] - u[2]) / 3.0;
    u[g.count] = 0.0;
    return u;
}

void normalize(const RadialGrid& g, RadialField& u) {
    double m = std::sqrt(l2_norm_sq(g, u));
    for (auto& v : u.values) v /= m;
}

}  // namespace

TEST_CASE("energy_J zero field and breakdown identity") {
    RadialGrid g = make_grid(3, 6.0, 300);
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
    RadialField z(g);
    EnergyBreakdown e0 = energy_J(g, nl, z);
    CHECK(e0.energy == 0.0);
    CHECK(e0.pohozaev == 0.0);
    CHECK(e0.kinetic == 0.0);

    std::mt19937_64 rng(11);
    RadialField u = random_field(g, rng);
    normalize(g, u);
    EnergyBreakdown e = energy_J(g, nl, u);
    double rebuilt = e.kinetic / 2.0;
    for (std::size_t i = 0; i < nl.terms.size(); ++i)
        rebuilt -= nl.terms[i].a * e.moments[i] / nl.terms[i].p;
    CHECK(e.energy == doctest::Approx(rebuilt).epsilon(1e-12));

    double lam = e.kinetic;
    for (std::size_t i = 0; i < nl.terms.size(); ++i)
        lam -= nl.terms[i].a * e.moments[i];
    CHECK(e.multiplier == doctest::Approx(lam).epsilon(1e-12));
}

TEST_CASE("energy_J Gaussian vs refined reference") {
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 4.0}});
    auto value = [&](int M) {
        RadialGrid g = make_grid(3, 10.0, M);
        RadialField u(g);
        for (std::size_t j = 0; j < g.size(); ++j)
            u[j] = std::exp(-g.nodes[j] * g.nodes[j] / 2.0);
        u[g.count] = 0.0;
        normalize(g, u);
        return energy_J(g, nl, u).energy;
    };
    // second-order quadrature: h = 0.02 at M = 500 leaves a ~1e-4 gap
    CHECK(value(500) == doctest::Approx(value(4000)).epsilon(5e-4));
    CHECK(value(2000) == doctest::Approx(value(4000)).epsilon(5e-5));
}

TEST_CASE("scalar outputs invariant under sign flip") {
    RadialGrid g = make_grid(3, 6.0, 300);
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
    std::mt19937_64 rng(7);
    RadialField u = random_field(g, rng);
    normalize(g, u);
    RadialField v(g);
    for (std::size_t j = 0; j < g.size(); ++j) v[j] = -u[j];
    EnergyBreakdown eu = energy_J(g, nl, u), ev = energy_J(g, nl, v);
    CHECK(eu.energy == doctest::Approx(ev.energy).epsilon(1e-14));
    CHECK(eu.pohozaev == doctest::Approx(ev.pohozaev).epsilon(1e-14));
    CHECK(eu.multiplier == doctest::Approx(ev.multiplier).epsilon(1e-14));
}

TEST_CASE("gradient_J: directional derivative, zero, linear regime") {
    RadialGrid g = make_grid(3, 6.0, 300);
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
    std::mt19937_64 rng(23);

    for (int trial = 0; trial < 20; ++trial) {
        RadialField u = random_field(g, rng);
        RadialField v = random_field(g, rng);
        RadialField grad = gradient_J(g, nl, u);
        double lhs = l2_inner(g, grad, v);
        double step = 1e-5;
        RadialField up(g), um(g);
        for (std::size_t j = 0; j < g.size(); ++j) {
            up[j] = u[j] + step * v[j];
            um[j] = u[j] - step * v[j];
        }
        double rhs = (energy_J(g, nl, up).energy - energy_J(g, nl, um).energy) / (2.0 * step);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }

    RadialField z(g);
    RadialField gz = gradient_J(g, nl, z);
    for (std::size_t j = 0; j < g.size(); ++j) CHECK(gz[j] == 0.0);

    RadialField tiny = random_field(g, rng);
    double mx = 0.0;
    for (double x : tiny.values) mx = std::max(mx, std::abs(x));
    for (auto& x : tiny.values) x *= 1e-8 / mx;
    RadialField gt = gradient_J(g, nl, tiny);
    RadialField lap = laplacian(g, tiny);
    for (std::size_t j = 0; j < g.size(); ++j)
        CHECK(std::abs(gt[j] + lap[j]) < 1e-12);
}

TEST_CASE("constrained_grad projection and multiplier identity") {
    RadialGrid g = make_grid(3, 6.0, 300);
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
    std::mt19937_64 rng(5);
    RadialField u = random_field(g, rng);
    normalize(g, u);

    auto [v, lam] = constrained_grad(g, nl, u);
    CHECK(std::abs(l2_inner(g, v, u)) < 1e-10);
    CHECK(lam == doctest::Approx(energy_J(g, nl, u).multiplier).epsilon(1e-12));

    RadialField bad = u;
    for (auto& x : bad.values) x *= 1.1;
    CHECK_THROWS(constrained_grad(g, nl, bad));
}

TEST_CASE("stretched_J closed form: s=0 identity and decay as s -> -inf") {
    RadialGrid g = make_grid(3, 8.0, 400);
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
    std::mt19937_64 rng(3);
    RadialField u = random_field(g, rng);
    normalize(g, u);
    EnergyBreakdown e = energy_J(g, nl, u);
    CHECK(stretched_J(e.kinetic, e.moments, nl, 0.0) ==
          doctest::Approx(e.energy).epsilon(1e-14));
    double far = stretched_J(e.kinetic, e.moments, nl, -10.0);
    CHECK(std::abs(far) < std::exp(-19.0) * e.kinetic);
}

TEST_CASE("stretched_J closed form vs grid dilation") {
    RadialGrid g = make_grid(3, 12.0, 2400);
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
    RadialField u(g);
    for (std::size_t j = 0; j < g.size(); ++j)
        u[j] = std::exp(-g.nodes[j] * g.nodes[j] / 2.0);
    u[g.count] = 0.0;
    normalize(g, u);
    EnergyBreakdown e = energy_J(g, nl, u);
    for (double s : {-0.5, -0.2, 0.2, 0.5}) {
        double closed = stretched_J(e.kinetic, e.moments, nl, s);
        double grid_val = energy_J(g, nl, dilate(g, u, s)).energy;
        CHECK(grid_val == doctest::Approx(closed).epsilon(1e-3));
    }
}

TEST_CASE("pohozaev equals the s-derivative of the stretched functional") {
    RadialGrid g = make_grid(3, 6.0, 300);
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        RadialField u = random_field(g, rng);
        EnergyBreakdown e = energy_J(g, nl, u);
        double ds0 = stretched_J_ds(e.kinetic, e.moments, nl, 0.0);
        double P = pohozaev(g, nl, u);
        CHECK(P == doctest::Approx(ds0).epsilon(1e-10));
        CHECK(P == doctest::Approx(e.pohozaev).epsilon(1e-10));
    }
    RadialField z(g);
    CHECK(pohozaev(g, nl, z) == 0.0);
}

TEST_CASE("fiber_max: single-power closed form and maximum conditions") {
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 4.0}});
    double theta = theta_exponent(3, 4.0);  // = 3
    for (double A : {0.5, 2.0, 37.0}) {
        for (double B : {0.1, 1.0, 12.0}) {
            double s = fiber_max(A, {B}, nl);
            double closed = std::log(4.0 * A / (theta * B)) / (theta - 2.0);
            CHECK(s == doctest::Approx(closed).epsilon(1e-10));
            CHECK(stretched_J_dss(A, {B}, nl, s) < 0.0);
        }
    }
    // monotone increase of s* in A
    double prev = -1e300;
    for (double A : {0.5, 1.0, 2.0, 4.0}) {
        double s = fiber_max(A, {1.0}, nl);
        CHECK(s > prev);
        prev = s;
    }
    CHECK_THROWS(fiber_max(0.0, {1.0}, nl));
    CHECK_THROWS(fiber_max(1.0, {0.0}, nl));
}

TEST_CASE("fiber derivative has exactly one sign change on a log grid") {
    RadialGrid g = make_grid(3, 6.0, 300);
    PowerSumNonlinearity nl = validate_powers(3, {{1.0, 3.6}, {1.0, 4.4}});
    std::mt19937_64 rng(29);
    RadialField u = random_field(g, rng);
    normalize(g, u);
    EnergyBreakdown e = energy_J(g, nl, u);
    int sign_changes = 0;
    double prev = stretched_J_ds(e.kinetic, e.moments, nl, -20.0);
    for (int i = 1; i < 10000; ++i) {
        double s = -20.0 + 40.0 * i / 9999.0;
        double cur = stretched_J_ds(e.kinetic, e.moments, nl, s);
        if (prev * cur < 0.0) ++sign_changes;
        prev = cur;
    }
    CHECK(sign_changes == 1);
}
