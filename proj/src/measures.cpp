#include "ablab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "ablab/cocycle.hpp"
#include "ablab/rng.hpp"

namespace ablab::measures {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

void fejer_histogram(MeasureEstimate& est) {
    const int B = kHistogramBins;
    const int n_max = est.fourier.n_max;
    est.histogram.assign(static_cast<size_t>(B), 0.0);
    for (int n = -n_max; n <= n_max; ++n) {
        double w = 1.0 - std::abs(n) / static_cast<double>(n_max + 1);
        fourier::cdouble cn = est.fourier.at(n) * w;
        if (n == 0) {
            for (int b = 0; b < B; ++b) est.histogram[static_cast<size_t>(b)] += cn.real() / B;
            continue;
        }
        // integral of e(n x) over [b/B, (b+1)/B]
        fourier::cdouble denom(0.0, kTwoPi * n);
        for (int b = 0; b < B; ++b) {
            fourier::cdouble hi = std::polar(1.0, kTwoPi * n * (b + 1.0) / B);
            fourier::cdouble lo = std::polar(1.0, kTwoPi * n * (b + 0.0) / B);
            est.histogram[static_cast<size_t>(b)] += (cn * (hi - lo) / denom).real();
        }
    }
}

}  // namespace

MeasureEstimate furstenberg_fixed_point(const transferop::OperatorMatrix& A) {
    if (A.variant != transferop::Variant::plain)
        throw std::invalid_argument("fixed point needs the plain-variant operator");
    const int n_max = A.n_max;
    const int sz = 2 * n_max + 1;
    Eigen::VectorXcd u = Eigen::VectorXcd::Zero(sz);
    u(n_max) = 1.0;
    Eigen::MatrixXcd At = A.A.transpose();
    const int max_iters = 100000;
    int it = 0;
    double diff = 0;
    for (it = 1; it <= max_iters; ++it) {
        Eigen::VectorXcd next = At * u;
        next /= next(n_max);  // the constant mode is preserved up to roundoff
        diff = (next - u).norm();
        u = next;
        if (diff < 1e-9) break;
    }
    if (diff >= 1e-9)
        throw NonConvergence("adjoint iteration did not reach 1e-9 in 1e5 steps");
    MeasureEstimate est;
    est.source = MeasureEstimate::Source::fixed_point;
    est.E = A.E;
    est.lambda = A.lambda;
    est.fourier = fourier::FourierVector(n_max);
    for (int n = -n_max; n <= n_max; ++n) est.fourier.at(n) = u(-n + n_max);
    est.stationarity_residual = (At * u - u).norm();
    est.iterations = it;
    fejer_histogram(est);
    return est;
}

MeasureEstimate furstenberg_mc(double E, double lambda, long long n_samples, long long burn_in,
                               uint64_t seed, int n_max) {
    if (n_samples < 10000) throw std::invalid_argument("furstenberg_mc needs n_samples >= 1e4");
    Rng rng(seed);
    cocycle::Mat2d gp = cocycle::transfer_matrix(E, lambda, +1);
    cocycle::Mat2d gm = cocycle::transfer_matrix(E, lambda, -1);
    double x = rand_u01(rng);
    for (long long i = 0; i < burn_in; ++i)
        x = cocycle::mobius_angle(rand_sign(rng) > 0 ? gp : gm, x);

    MeasureEstimate est;
    est.source = MeasureEstimate::Source::monte_carlo;
    est.E = E;
    est.lambda = lambda;
    est.seed = seed;
    est.fourier = fourier::FourierVector(n_max);
    est.histogram.assign(kHistogramBins, 0.0);

    const int n_batches = 100;
    const long long batch = n_samples / n_batches;
    const long long total = batch * n_batches;
    std::vector<fourier::cdouble> acc(static_cast<size_t>(n_max) + 1, 0.0);
    std::vector<std::vector<fourier::cdouble>> batch_means(
        static_cast<size_t>(n_batches),
        std::vector<fourier::cdouble>(static_cast<size_t>(n_max) + 1, 0.0));
    for (int b = 0; b < n_batches; ++b) {
        auto& bm = batch_means[static_cast<size_t>(b)];
        for (long long i = 0; i < batch; ++i) {
            x = cocycle::mobius_angle(rand_sign(rng) > 0 ? gp : gm, x);
            int bin = std::min(kHistogramBins - 1, static_cast<int>(x * kHistogramBins));
            est.histogram[static_cast<size_t>(bin)] += 1.0;
            fourier::cdouble z = std::polar(1.0, -kTwoPi * x), w = 1.0;
            for (int n = 1; n <= n_max; ++n) {
                w *= z;
                bm[static_cast<size_t>(n)] += w;
            }
        }
        for (int n = 1; n <= n_max; ++n) {
            bm[static_cast<size_t>(n)] /= static_cast<double>(batch);
            acc[static_cast<size_t>(n)] += bm[static_cast<size_t>(n)];
        }
    }
    est.fourier.at(0) = 1.0;
    est.fourier_se.assign(static_cast<size_t>(n_max) + 1, 0.0);
    for (int n = 1; n <= n_max; ++n) {
        fourier::cdouble mean = acc[static_cast<size_t>(n)] / static_cast<double>(n_batches);
        est.fourier.at(n) = mean;
        est.fourier.at(-n) = std::conj(mean);
        double var = 0;
        for (int b = 0; b < n_batches; ++b)
            var += std::norm(batch_means[static_cast<size_t>(b)][static_cast<size_t>(n)] - mean);
        var /= (n_batches - 1);
        est.fourier_se[static_cast<size_t>(n)] = std::sqrt(var / n_batches);
    }
    for (auto& h : est.histogram) h /= static_cast<double>(total);
    return est;
}

SmoothnessProbe density_smoothness_probe(const MeasureEstimate& nu, int n_random,
                                         uint64_t seed) {
    const int n_max = nu.fourier.n_max;
    SmoothnessProbe probe;
    for (int k = 0;; ++k) {
        int lo = 1 << k, hi = 2 * (1 << k) - 1;
        if (hi > n_max) break;
        double e2 = 0;
        for (int n = lo; n <= hi; ++n)
            e2 += std::norm(nu.fourier.at(n)) + std::norm(nu.fourier.at(-n));
        probe.block_k.push_back(k);
        probe.block_energy.push_back(std::sqrt(e2));
    }
    if (probe.block_k.size() < 4)
        throw InsufficientCutoff("fewer than 4 dyadic blocks fit under n_max");

    // Pairing bound |<nu, f>| over random unit test functions per block.
    for (size_t bi = 0; bi < probe.block_k.size(); ++bi) {
        int k = probe.block_k[bi];
        int lo = 1 << k, hi = 2 * (1 << k) - 1;
        Rng rng(derive_seed(seed, "smoothness.pairing", static_cast<uint64_t>(k)));
        double best = 0;
        for (int t = 0; t < n_random; ++t) {
            fourier::FourierVector f(n_max);
            for (int n = lo; n <= hi; ++n) {
                fourier::cdouble z(rand_u01(rng) - 0.5, rand_u01(rng) - 0.5);
                f.at(n) = z;
                f.at(-n) = std::conj(z);
            }
            double nrm = f.l2_norm();
            if (nrm == 0) continue;
            for (auto& c : f.c) c /= nrm;
            best = std::max(best, std::abs(transferop::measure_pairing(nu.fourier, f)));
        }
        probe.pairing_bound.push_back(best);
    }

    std::vector<double> ks, lb;
    for (size_t i = 0; i < probe.block_k.size(); ++i)
        if (probe.block_energy[i] > 1e-14) {
            ks.push_back(probe.block_k[i]);
            lb.push_back(std::log2(probe.block_energy[i]));
        }
    if (lb.empty()) {
        probe.verdict = SmoothnessProbe::Verdict::zero_tail;
        return probe;
    }
    double n = static_cast<double>(ks.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < ks.size(); ++i) {
        sx += ks[i];
        sy += lb[i];
        sxx += ks[i] * ks[i];
        sxy += ks[i] * lb[i];
    }
    double denom = n * sxx - sx * sx;
    probe.slope = denom == 0 ? 0.0 : (n * sxy - sx * sy) / denom;
    double inter = (sy - probe.slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ybar = sy / n;
    for (size_t i = 0; i < ks.size(); ++i) {
        double pred = inter + probe.slope * ks[i];
        ss_res += (lb[i] - pred) * (lb[i] - pred);
        ss_tot += (lb[i] - ybar) * (lb[i] - ybar);
    }
    probe.r2 = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
    bool all_tiny = true;
    for (double b : probe.block_energy)
        if (b > 1e-12) all_tiny = false;
    if (all_tiny)
        probe.verdict = SmoothnessProbe::Verdict::zero_tail;
    else if (probe.slope >= 0.25)
        probe.verdict = SmoothnessProbe::Verdict::not_a_density;
    else if (probe.slope <= -0.1)
        probe.verdict = SmoothnessProbe::Verdict::density_like;
    return probe;
}

BernoulliValue bernoulli_fourier(double lambda, double xi, int terms) {
    if (!(lambda > 0 && lambda < 1))
        throw std::invalid_argument("bernoulli_fourier needs 0 < lambda < 1");
    const int cap = 10000;
    int needed = static_cast<int>(std::ceil(std::log(1e-16) / std::log(lambda)));
    if (terms < std::min(needed, cap))
        throw std::invalid_argument("too few product terms for full-precision truncation");
    BernoulliValue out;
    int T = std::min(terms, cap);
    out.terms_used = T;
    double value = 1.0, scale = 1.0;
    for (int n = 0; n <= T; ++n) {
        value *= std::cos(kTwoPi * scale * xi);
        scale *= lambda;
    }
    out.value = value;
    // scale now holds lambda^{T+1}
    double s2 = kTwoPi * xi * scale;
    out.tail_bound = std::expm1(s2 * s2 / (2.0 * (1.0 - lambda * lambda)));
    return out;
}

std::vector<double> pisot_nondecay_probe(double lambda, int k_max) {
    if (!(lambda > 0 && lambda < 1))
        throw std::invalid_argument("pisot_nondecay_probe needs 0 < lambda < 1");
    std::vector<double> out;
    double xi = 1.0;
    for (int k = 0; k <= k_max; ++k) {
        out.push_back(std::abs(bernoulli_fourier(lambda, xi, 10000).value));
        xi /= lambda;
    }
    return out;
}

}  // namespace ablab::measures
