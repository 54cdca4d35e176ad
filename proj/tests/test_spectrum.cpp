// Lyapunov and integrated-density-of-states estimators, the Thouless
// transform, the Holder probes, and the energy-derivative expansion.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ablab/rng.hpp"
#include "ablab/spectrum.hpp"

using namespace ablab;
using namespace ablab::spectrum;

namespace {
const double kPi = 3.14159265358979323846;
const double kLambdaRef = std::sqrt(5.0) - 2.0;
}  // namespace

TEST_CASE("Lyapunov integrand matches a direct evaluation") {
    Rng rng(derive_seed(31, "phi", 0));
    for (int i = 0; i < 50; ++i) {
        double energy = 4 * rand_u01(rng) - 2, lambda = rand_u01(rng), x = rand_u01(rng);
        double expect = cocycle::log_norm_average(energy, lambda, x);
        CHECK(phi_E(energy, lambda, cocycle::ProjectivePoint(x)) ==
              doctest::Approx(expect).epsilon(1e-14));
    }
}

TEST_CASE("energy derivative of the integrand matches a finite difference") {
    Rng rng(derive_seed(31, "phi_de", 0));
    for (int i = 0; i < 50; ++i) {
        double energy = 3 * rand_u01(rng) - 1.5, lambda = rand_u01(rng), x = rand_u01(rng);
        double h = 1e-6;
        double fd = (cocycle::log_norm_average(energy + h, lambda, x) -
                     cocycle::log_norm_average(energy - h, lambda, x)) /
                    (2 * h);
        CHECK(phi_E_energy_derivative(energy, lambda, x) ==
              doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("Lyapunov MC: exact deterministic limits at lambda = 0") {
    // E = 3: single hyperbolic matrix, L = arccosh(3/2).
    auto est = lyapunov_mc(3.0, 0.0, 10000, 1);
    CHECK(est.value == doctest::Approx(std::acosh(1.5)).epsilon(1e-9));
    CHECK(est.se <= 1e-9);
    // E = 0: rotation by pi/2, L = 0 and every increment is 0.
    auto est0 = lyapunov_mc(0.0, 0.0, 10000, 1);
    CHECK(std::abs(est0.value) <= 1e-12);
    // E = 1: elliptic with period 6 in PSL2, the Birkhoff average telescopes.
    auto est1 = lyapunov_mc(1.0, 0.0, 100000, 1);
    CHECK(std::abs(est1.value) <= 1e-3);
}

TEST_CASE("Lyapunov MC is reproducible and seed-stable") {
    auto a = lyapunov_mc(0.5, kLambdaRef, 50000, 42);
    auto b = lyapunov_mc(0.5, kLambdaRef, 50000, 42);
    CHECK(a.value == b.value);
    CHECK(a.se == b.se);
    auto c = lyapunov_mc(0.5, kLambdaRef, 50000, 43);
    CHECK(c.value != a.value);  // different stream
    CHECK(std::abs(c.value - a.value) <= 6 * (a.se + c.se));  // same law
    CHECK_THROWS_AS(lyapunov_mc(0.5, kLambdaRef, 10, 1), std::invalid_argument);
}

TEST_CASE("operator and MC Lyapunov estimates agree") {
    auto A = transferop::build_operator(0.5, kLambdaRef, 64, 1024);
    auto op = lyapunov_operator(A, 40);
    CHECK(op.residual <= 1e-3);  // the iterate flattens to a constant
    auto mc = lyapunov_mc(0.5, kLambdaRef, 400000, 7);
    CHECK(std::abs(op.value - mc.value) <= 5 * mc.se + 2e-3);
    CHECK(op.value > 0);
}

TEST_CASE("energy grids respect margins") {
    auto g = EnergyGrid::uniform(-1.5, 1.5, 31, 0.2);
    CHECK(g.points.size() == 31);
    CHECK(g.points.front() == -1.5);
    CHECK(g.points.back() == 1.5);
    CHECK(g.delta == 0.2);
    CHECK_THROWS_AS(EnergyGrid::uniform(-2.0, 1.5, 31, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(EnergyGrid::uniform(1.0, -1.0, 5, 0.2), std::invalid_argument);
    auto single = EnergyGrid::uniform(0.3, 0.3, 1, 0.2);
    CHECK(single.points.size() == 1);
}

TEST_CASE("Sturm IDS equals the exact free counting function") {
    // lambda = 0: eigenvalues are 2 cos(pi k / (n+1)), k = 1..n, independent of
    // the disorder draw, so the counting is exact.
    int sites = 500;
    for (double energy : {-1.3, -0.4, 0.0, 0.7, 1.6}) {
        auto pts = ids_sturm(std::vector<double>{energy}, 0.0, sites, 1, 99);
        int count = 0;
        for (int k = 1; k <= sites; ++k)
            if (2 * std::cos(kPi * k / (sites + 1)) < energy) ++count;
        CHECK(pts[0].N == doctest::Approx(static_cast<double>(count) / sites).epsilon(1e-14));
        CHECK(pts[0].se == 0.0);
    }
}

TEST_CASE("IDS is symmetric under E -> -E in distribution") {
    double lambda = 0.5;
    std::vector<double> energies = {-1.1, -0.6, 0.6, 1.1};
    auto pts = ids_sturm(energies, lambda, 400, 24, 5, 2);
    // N(-E) + N(E) = 1 up to sampling error.
    for (int i : {0, 1}) {
        double s = pts[static_cast<size_t>(i)].N + pts[pts.size() - 1 - static_cast<size_t>(i)].N;
        double tol = 6 * (pts[static_cast<size_t>(i)].se + pts[pts.size() - 1 - i].se) + 3.0 / 400;
        CHECK(std::abs(s - 1.0) <= tol);
    }
}

TEST_CASE("IDS runs are deterministic for a fixed seed across thread counts") {
    std::vector<double> energies = {-0.9, 0.1, 0.8};
    auto a = ids_sturm(energies, 0.3, 200, 10, 77, 1);
    auto b = ids_sturm(energies, 0.3, 200, 10, 77, 4);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].N == b[i].N);
        CHECK(a[i].se == b[i].se);
    }
}

TEST_CASE("Thouless transform reproduces the free-lattice pair") {
    // Free case: N(E) = 1 - arccos(E/2)/pi inside [-2,2], L(E) = 0 in the band
    // and arccosh(|E|/2) outside.
    const int n = 801;
    std::vector<std::pair<double, double>> ids(n);
    for (int i = 0; i < n; ++i) {
        double energy = -3.2 + 6.4 * i / (n - 1.0);
        double v;
        if (energy <= -2)
            v = 0;
        else if (energy >= 2)
            v = 1;
        else
            v = 1 - std::acos(energy / 2) / kPi;
        ids[static_cast<size_t>(i)] = {energy, v};
    }
    auto L = thouless(ids, ThoulessDirection::N_to_L);
    REQUIRE(L.size() == ids.size());
    double worst_in = 0, worst_out = 0;
    for (const auto& [energy, val] : L) {
        if (std::abs(energy) <= 1.5) worst_in = std::max(worst_in, std::abs(val));
        if (std::abs(energy) >= 2.9)
            worst_out = std::max(worst_out, std::abs(val - std::acosh(std::abs(energy) / 2)));
    }
    CHECK(worst_in <= 6e-3);
    CHECK(worst_out <= 6e-3);

    // Round trip back to the counting function.
    auto N2 = thouless(L, ThoulessDirection::L_to_N);
    double worst_rt = 0;
    for (size_t i = 0; i < N2.size(); ++i)
        if (std::abs(N2[i].first) <= 1.5)
            worst_rt = std::max(worst_rt, std::abs(N2[i].second - ids[i].second));
    CHECK(worst_rt <= 2e-2);
}

TEST_CASE("Thouless guards its preconditions") {
    std::vector<std::pair<double, double>> two = {{0.0, 0.1}, {1.0, 0.9}};
    CHECK_THROWS_AS(thouless(two, ThoulessDirection::N_to_L), std::invalid_argument);
    // Support truncation: N must start at ~0 and end at ~1.
    std::vector<std::pair<double, double>> trunc;
    for (int i = 0; i < 50; ++i) trunc.emplace_back(i * 0.05, 0.3 + 0.008 * i);
    CHECK_THROWS_AS(thouless(trunc, ThoulessDirection::N_to_L), SupportTruncated);
}

TEST_CASE("Halperin exponent: frozen value and monotonicity") {
    CHECK(halperin_alpha(kLambdaRef) == doctest::Approx(2.05563).epsilon(5e-4));
    CHECK(halperin_alpha(1.0) == doctest::Approx(2 * std::log(2.0) / std::acosh(2.0)).epsilon(1e-12));
    double prev = 1e9;
    for (int i = 1; i <= 20; ++i) {
        double a = halperin_alpha(0.045 * i);
        CHECK(a < prev);
        prev = a;
    }
    CHECK_THROWS_AS(halperin_alpha(0.0), std::invalid_argument);
}

TEST_CASE("Holder probe recovers a planted exponent") {
    // N(E) = |E|^0.7 * sign(E), rescaled into a CDF-like shape on [-1, 1].
    const int n = 4001;
    std::vector<std::pair<double, double>> ids(n);
    for (int i = 0; i < n; ++i) {
        double energy = -1.0 + 2.0 * i / (n - 1.0);
        double v = 0.5 + 0.5 * (energy < 0 ? -1 : 1) * std::pow(std::abs(energy), 0.7);
        ids[static_cast<size_t>(i)] = {energy, v};
    }
    std::vector<double> scales;
    for (double w = 0.5; w >= 0.01; w /= 2) scales.push_back(w);
    auto probe = holder_probe(ids, scales);
    CHECK(probe.alpha_hat == doctest::Approx(0.7).epsilon(0.15));
    CHECK(probe.r2 >= 0.9);
    CHECK(probe.scales_used >= 4);
    CHECK_THROWS_AS(holder_probe(ids, std::vector<double>{0.5}), InsufficientResolution);
}

TEST_CASE("energy-derivative expansion agrees with the finite difference") {
    auto probe = energy_derivative_probe(0.5, kLambdaRef, 2, 6, 32, 512);
    CHECK(probe.agreement <= 1e-4 + 10 * probe.fd_h * probe.fd_h);
    CHECK(probe.sup_curve.size() == 7);
    CHECK(probe.sup_curve[0] > 0);
    CHECK_FALSE(probe.nested_sups.empty());
    // First order exercises the same recursion without the nested sweep.
    auto p1 = energy_derivative_probe(0.5, kLambdaRef, 1, 6, 32, 512);
    CHECK(p1.agreement <= 1e-4 + 10 * p1.fd_h * p1.fd_h);
    CHECK_THROWS_AS(energy_derivative_probe(0.5, kLambdaRef, 3, 6, 32, 512),
                    std::invalid_argument);
}
