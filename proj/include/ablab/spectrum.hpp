#pragma once

// Lyapunov exponent and integrated-density-of-states estimators, the
// Thouless transform linking them, the Halperin Holder bound, and
// energy-derivative probes of the operator iteration.

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ablab/cocycle.hpp"
#include "ablab/fourier.hpp"
#include "ablab/transferop.hpp"

namespace ablab::spectrum {

struct SturmBreakdown : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SupportTruncated : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientResolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Phi_E(x) = Av_± log || g_±(E) (cos pi x, sin pi x)^T ||.
double phi_E(double E, double lambda, cocycle::ProjectivePoint p);
// d/dE of Phi_E at fixed x.
double phi_E_energy_derivative(double E, double lambda, double x);

struct MCEstimate {
    double value = 0;
    double se = 0;
};

// Renormalized random-cocycle orbit; burn-in 1000 steps, standard error via
// 100 batch means. Requires steps >= 1000.
MCEstimate lyapunov_mc(double E, double lambda, long long steps, uint64_t seed);

struct OperatorLyapunov {
    double value = 0;     // grid mean of T^ell Phi_E
    double residual = 0;  // sup - inf of T^ell Phi_E over the dense grid
};

// Requires a plain-variant raw-frame operator at the same (E, lambda).
OperatorLyapunov lyapunov_operator(const transferop::OperatorMatrix& A, int ell);

struct EnergyGrid {
    double delta = 0;
    std::vector<double> points;  // strictly increasing, inside [-2+delta, 2-delta]
    static EnergyGrid uniform(double lo, double hi, int count, double delta);
};

struct IdsPoint {
    double E = 0, N = 0, se = 0;
};

// Dirichlet tridiagonal with i.i.d. +-lambda diagonal; eigenvalue counting by
// the Sturm ratio recurrence. The plain-vector overload serves wide windows
// (e.g. the Thouless support window [-2-lambda, 2+lambda]).
std::vector<IdsPoint> ids_sturm(const std::vector<double>& energies, double lambda, int sites,
                                int samples, uint64_t seed, int threads = 1);
std::vector<IdsPoint> ids_sturm(const EnergyGrid& grid, double lambda, int sites, int samples,
                                uint64_t seed, int threads = 1);

enum class ThoulessDirection { N_to_L, L_to_N };

// N_to_L: L(E) = int log|E - E'| dN(E') with the singular cell integrated by
// the exact primitive t log|t| - t. L_to_N: finite-Hilbert (airfoil)
// inversion on the mapped interval, homogeneous part handled analytically.
std::vector<std::pair<double, double>> thouless(
    const std::vector<std::pair<double, double>>& data, ThoulessDirection dir);

// 2 log 2 / arccosh(1 + lambda); requires lambda > 0.
double halperin_alpha(double lambda);

struct HolderProbe {
    double alpha_hat = 0;
    double r2 = 0;
    int scales_used = 0;
};

// Regression of log max-oscillation of N over partition windows vs log scale.
HolderProbe holder_probe(const std::vector<std::pair<double, double>>& ids,
                         const std::vector<double>& window_scales);

struct DerivativeProbe {
    std::vector<double> sup_curve;  // sup |d/dE (T^m Phi)| for m = 0..ell
    double agreement = 0;           // sup |expansion - finite difference| at m = ell
    double fd_h = 1e-4;
    double mean_dE = 0;  // grid mean of the expansion at m = ell
    std::vector<std::pair<int, double>> nested_sups;  // (m2+m3, sup), order 2 only
};

// Exact expansion of d/dE (T_E^ell Phi_E): the derivative of the composed
// branch maps contributes -(T - I/3) applied to sin^2 * (d/dtheta) of the
// running iterate; cross-checked against a centered finite difference in E.
DerivativeProbe energy_derivative_probe(double E, double lambda, int order_k, int ell, int n_max,
                                        int M, int threads = 1);

}  // namespace ablab::spectrum
