#pragma once

// Dense Fourier-coefficient vectors on the unit circle and thin FFT helpers.
// A FourierVector stores c_n for n in [-n_max, n_max] against the basis
// e(n x) = exp(2*pi*i*n*x) on x in [0,1).

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ablab::fourier {

using cdouble = std::complex<double>;

struct FourierVector {
    int n_max = 0;
    std::vector<cdouble> c;  // index n + n_max

    FourierVector() = default;
    explicit FourierVector(int n_max_) : n_max(n_max_), c(2 * static_cast<size_t>(n_max_) + 1) {
        if (n_max_ < 0) throw std::invalid_argument("n_max must be >= 0");
    }
    static FourierVector basis(int n_max, int n) {
        FourierVector f(n_max);
        f.at(n) = 1.0;
        return f;
    }

    int size() const { return 2 * n_max + 1; }
    cdouble& at(int n) { return c[static_cast<size_t>(n + n_max)]; }
    const cdouble& at(int n) const { return c[static_cast<size_t>(n + n_max)]; }

    double l2_norm() const;
    double sobolev_norm(double s) const;  // weights (1 + (2*pi*n)^2)^s
    double sup_norm() const;              // refined-grid estimate

    // d/d(theta) with theta = pi*x, i.e. coefficient-wise multiply by 2*i*n.
    FourierVector theta_derivative() const;
    // pointwise multiply by sin^2(theta): 3-tap stencil {0: 1/2, +-1: -1/4}.
    FourierVector sin2_multiply() const;
};

// X_k = sum_m x_m e(-k m / M)   (unscaled forward DFT)
std::vector<cdouble> dft_forward(std::vector<cdouble> data);
// x_m = sum_k X_k e(+k m / M)   (unscaled backward DFT)
std::vector<cdouble> dft_backward(std::vector<cdouble> data);

// f(m/M) for m = 0..M-1; requires M >= 2*n_max + 1.
std::vector<cdouble> grid_values(const FourierVector& f, int M);
// Trapezoid-rule coefficients from equispaced samples; requires M >= 2*n_max + 1.
FourierVector from_samples(const std::vector<cdouble>& samples, int n_max);

}  // namespace ablab::fourier
