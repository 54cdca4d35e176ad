#pragma once

// Fourier-Galerkin discretization of the 3-branch averaging operator
//   (T f)(x) = (1/3) [ f(x) + f(t_plus(x)) + f(t_minus(x)) ]
// on the projective coordinate x in [0,1), its unitary-weighted variant,
// restricted-norm (spectral gap) estimation, and smoothing diagnostics.

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ablab/cocycle.hpp"
#include "ablab/fourier.hpp"
#include "ablab/numberfield.hpp"

namespace ablab::transferop {

using fourier::FourierVector;
using fourier::cdouble;

struct QuadratureUnderResolved : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TruncationLeak : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PowerIterationStall : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CacheCorrupt : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Variant { plain, unitary };
enum class Frame { raw, tilde };

struct OperatorMatrix {
    int n_max = 0;
    int M = 0;
    double E = 0, lambda = 0;
    Variant variant = Variant::plain;
    Frame frame = Frame::raw;
    Eigen::MatrixXcd A;  // (2n_max+1)^2, index n + n_max

    int size() const { return 2 * n_max + 1; }
    cdouble at(int n, int np) const { return A(n + n_max, np + n_max); }
};

// Galerkin matrix of pref * sum_g [ w_g(x) f(t_g(x)) ] in the e(nx) basis,
// with w_g = (t_g')^{1/2} when sqrt_weight is set, else 1.
Eigen::MatrixXcd galerkin_matrix(const std::vector<cocycle::Mat2d>& maps, bool sqrt_weight,
                                 double pref, int n_max, int M, int threads = 1);

// Builds the operator matrix; always rechecks the quadrature at 2M and
// throws QuadratureUnderResolved if any entry moves by more than 1e-8.
OperatorMatrix build_operator(double E, double lambda, int n_max, int M,
                              Variant variant = Variant::plain, Frame frame = Frame::raw,
                              int threads = 1);

struct PowerResult {
    FourierVector f;
    std::vector<double> leaks;  // per-step mass in the top 10% of modes
    double max_leak = 0;
};

// f <- A^m f with per-step leakage tracking; throws TruncationLeak when the
// top-mode mass exceeds 1e-4 * ||f_0||_2 (disable with throw_on_leak=false).
PowerResult apply_power(const OperatorMatrix& A, const FourierVector& f, int m,
                        bool throw_on_leak = true);

struct RestrictedNorm {
    double value = 0;       // ||Q_K A Q_K||_2, modes |n| >= K
    double half_value = 0;  // same norm from the central n_max/2 block
    int iterations = 0;
};

// Power iteration on (Q_K A Q_K)^* (Q_K A Q_K), relative tolerance 1e-6;
// PowerIterationStall after 1e4 iterations. Requires K < n_max/2.
RestrictedNorm restricted_norm(const OperatorMatrix& A, int K, uint64_t seed = 0x5eedULL);

// ||Q_K Avg Q_K|| for Avg = (1/2R) sum_r (rho_{g_r} + rho_{g_r^{-1}}) built
// from the unitary-variant Galerkin matrices of the expander family.
double expander_average_norm(const numberfield::AlgebraicNumber& alpha, double tau, int K,
                             int n_max, int M, int threads = 1);

struct FitResult {
    double rate = 0;       // fitted exponential decay rate (per step)
    double r2 = 0;         // coefficient of determination of the log-linear fit
    double intercept = 0;  // fitted log-intercept
    int points = 0;
};

// Least-squares fit of log(y) = intercept - rate * m over samples with
// y > floor_value; r2 measured on the same samples.
FitResult fit_exponential(const std::vector<double>& m, const std::vector<double>& y,
                          double floor_value = 1e-13);

struct SmoothingParams {
    int n_max = 128;
    int M = 2048;
    Frame frame = Frame::raw;
    int m_max = 60;
    std::vector<int> k_list = {5};  // high-mode support cutoffs 2^k
    int n_random = 8;               // random test functions per curve
    uint64_t seed = 1;
    int threads = 1;
};

struct SmoothingReport {
    // (i) L2 boundedness: max over random f and m of ||T^m f||_2 / ||f||_2
    double boundedness_sup = 0;
    // (ii) high-mode decay per k: curves of ||T^m f||_2 and their fits
    std::vector<int> k_values;
    std::vector<std::vector<double>> highmode_curves;
    std::vector<FitResult> highmode_fits;
    bool no_gap = false;  // fitted decay rate ~0, or the curve plateaus above half its start
    // (iii) H^s boundedness, s = 1, 2: curve of ||T^m f||_{H^s}, plateau and
    // exponential fit of the decay toward the plateau
    std::vector<double> hs1_curve, hs2_curve;
    FitResult hs1_fit, hs2_fit;
    double hs1_plateau = 0, hs2_plateau = 0;
    // (iv) derivative decay of the Lyapunov integrand: ||(T^m Phi_E)' ||_inf
    std::vector<double> deriv_curve;
    FitResult deriv_fit;
};

SmoothingReport smoothing_suite(double E, double lambda, const SmoothingParams& params);

struct DeviationReport {
    std::vector<double> d;  // d_l = sup |T^l f - <nu, f>| on a dense grid
    FitResult fit;
    cdouble pairing = 0;  // <nu, f>
};

// nu_hat holds the measure's Fourier coefficients nu_hat(n), |n| <= f.n_max.
DeviationReport deviation_decay(const OperatorMatrix& A, const FourierVector& f, int ell_max,
                                const FourierVector& nu_hat);

// <nu, f> = sum_n f_hat(n) nu_hat(-n).
cdouble measure_pairing(const FourierVector& nu_hat, const FourierVector& f);

// Binary operator cache ("ABTO"): header + row-major complex doubles,
// little-endian, with an FNV-1a payload checksum. load_operator throws
// CacheCorrupt on any structural or checksum mismatch.
void save_operator(const std::string& path, const OperatorMatrix& A);
OperatorMatrix load_operator(const std::string& path);

}  // namespace ablab::transferop
