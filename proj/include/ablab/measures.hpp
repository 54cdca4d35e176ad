#pragma once

// Stationary (Furstenberg) measures of the random projective action and
// classical Bernoulli convolutions, with Fourier-decay diagnostics.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ablab/fourier.hpp"
#include "ablab/transferop.hpp"

namespace ablab::measures {

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientCutoff : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kHistogramBins = 1024;

struct MeasureEstimate {
    enum class Source { fixed_point, monte_carlo, product_formula };
    Source source = Source::fixed_point;
    double E = 0, lambda = 0;
    uint64_t seed = 0;
    fourier::FourierVector fourier;  // nu_hat(n), |n| <= n_max; nu_hat(0) = 1
    std::vector<double> histogram;   // kHistogramBins bins, total mass 1
    double interval_lo = 0, interval_hi = 1;
    // Diagnostics (fixed point: residual/iterations; MC: per-|n| standard errors).
    double stationarity_residual = -1;
    int iterations = 0;
    std::vector<double> fourier_se;
};

// Adjoint-iteration fixed point of the plain-variant Galerkin matrix; the
// coefficient nu_hat(0) = 1 is preserved exactly by the iteration. Histogram
// by Fejer-smoothed inversion with analytic bin integrals.
MeasureEstimate furstenberg_fixed_point(const transferop::OperatorMatrix& A);

// Random projective orbit x <- tau_{g_pm}(x) with fair signs.
MeasureEstimate furstenberg_mc(double E, double lambda, long long n_samples, long long burn_in,
                               uint64_t seed, int n_max = 64);

struct SmoothnessProbe {
    std::vector<double> block_energy;  // B_k over dyadic coefficient blocks
    std::vector<int> block_k;
    double slope = 0;  // fitted log2(B_k) vs k slope
    double r2 = 0;
    std::vector<double> pairing_bound;  // max |<nu, f>| over random block test functions
    enum class Verdict { zero_tail, density_like, not_a_density, inconclusive };
    Verdict verdict = Verdict::inconclusive;
};

SmoothnessProbe density_smoothness_probe(const MeasureEstimate& nu, int n_random = 8,
                                         uint64_t seed = 7);

struct BernoulliValue {
    double value = 0;
    double tail_bound = 0;
    int terms_used = 0;
};

// nu_hat of sum_n v_n lambda^n at frequency xi: prod_n cos(2 pi lambda^n xi).
BernoulliValue bernoulli_fourier(double lambda, double xi, int terms);

// |nu_hat(lambda^{-k})| for k = 0..k_max.
std::vector<double> pisot_nondecay_probe(double lambda, int k_max);

}  // namespace ablab::measures
