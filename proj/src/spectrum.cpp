#include "ablab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ablab/rng.hpp"

namespace ablab::spectrum {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXcd to_eigen(const fourier::FourierVector& f) {
    Eigen::VectorXcd v(f.size());
    for (int i = 0; i < f.size(); ++i) v(i) = f.c[static_cast<size_t>(i)];
    return v;
}

fourier::FourierVector from_eigen(const Eigen::VectorXcd& v, int n_max) {
    fourier::FourierVector f(n_max);
    for (int i = 0; i < f.size(); ++i) f.c[static_cast<size_t>(i)] = v(i);
    return f;
}

fourier::FourierVector expand_on_grid(int n_max, int M, const std::function<double(double)>& fn) {
    std::vector<fourier::cdouble> samples(static_cast<size_t>(M));
    for (int m = 0; m < M; ++m)
        samples[static_cast<size_t>(m)] = fn(static_cast<double>(m) / M);
    return fourier::from_samples(samples, n_max);
}

}  // namespace

double phi_E(double E, double lambda, cocycle::ProjectivePoint p) {
    return cocycle::log_norm_average(E, lambda, p.x);
}

double phi_E_energy_derivative(double E, double lambda, double x) {
    double th = kPi * x;
    double cth = std::cos(th), sth = std::sin(th);
    double out = 0;
    for (int sgn : {+1, -1}) {
        double X = (E + sgn * lambda) * cth - sth;
        double Y = cth;
        out += 0.5 * X * cth / (X * X + Y * Y);
    }
    return out;
}

MCEstimate lyapunov_mc(double E, double lambda, long long steps, uint64_t seed) {
    if (steps < 1000) throw std::invalid_argument("lyapunov_mc needs steps >= 1000");
    Rng rng(seed);
    cocycle::Mat2d gp = cocycle::transfer_matrix(E, lambda, +1);
    cocycle::Mat2d gm = cocycle::transfer_matrix(E, lambda, -1);
    double vx = 1, vy = 0;
    auto step = [&](double& acc) {
        const cocycle::Mat2d& g = rand_sign(rng) > 0 ? gp : gm;
        double nx = g.a * vx + g.b * vy;
        double ny = g.c * vx + g.d * vy;
        double nrm = std::hypot(nx, ny);
        acc += std::log(nrm);
        vx = nx / nrm;
        vy = ny / nrm;
    };
    double burn_acc = 0;
    for (int i = 0; i < 1000; ++i) step(burn_acc);
    const int n_batches = 100;
    const long long batch = steps / n_batches;
    std::vector<double> means(n_batches);
    for (int b = 0; b < n_batches; ++b) {
        double acc = 0;
        for (long long i = 0; i < batch; ++i) step(acc);
        means[static_cast<size_t>(b)] = acc / static_cast<double>(batch);
    }
    double mean = 0;
    for (double m : means) mean += m;
    mean /= n_batches;
    double var = 0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= (n_batches - 1);
    return {mean, std::sqrt(var / n_batches)};
}

OperatorLyapunov lyapunov_operator(const transferop::OperatorMatrix& A, int ell) {
    if (A.variant != transferop::Variant::plain || A.frame != transferop::Frame::raw)
        throw std::invalid_argument("lyapunov_operator expects the plain raw-frame operator");
    fourier::FourierVector phi = expand_on_grid(
        A.n_max, A.M, [&](double x) { return cocycle::log_norm_average(A.E, A.lambda, x); });
    auto powered = transferop::apply_power(A, phi, ell);
    auto vals = fourier::grid_values(powered.f, 4 * (2 * A.n_max + 1));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0;
    for (const auto& z : vals) {
        mean += z.real();
        lo = std::min(lo, z.real());
        hi = std::max(hi, z.real());
    }
    mean /= static_cast<double>(vals.size());
    return {mean, hi - lo};
}

EnergyGrid EnergyGrid::uniform(double lo, double hi, int count, double delta) {
    if (!(delta > 0)) throw std::invalid_argument("delta must be positive");
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    if (!(lo <= hi)) throw std::invalid_argument("lo must not exceed hi");
    if (lo < -2 + delta || hi > 2 - delta)
        throw std::invalid_argument("grid leaves the margin window [-2+delta, 2-delta]");
    EnergyGrid g;
    g.delta = delta;
    if (count == 1) {
        g.points = {lo};
        return g;
    }
    for (int i = 0; i < count; ++i)
        g.points.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
    return g;
}

namespace {

// Eigenvalue count below E for the Dirichlet tridiagonal with diagonal diag[]
// and off-diagonal 1, via negative pivots of the LDL^T ratio recurrence.
int sturm_count(const std::vector<double>& diag, double E) {
    int count = 0;
    double d = 0;
    for (size_t i = 0; i < diag.size(); ++i) {
        d = (i == 0) ? diag[i] - E : diag[i] - E - 1.0 / d;
        if (std::abs(d) < 1e-300) throw SturmBreakdown("pivot underflow in Sturm recurrence");
        if (d < 0) ++count;
    }
    return count;
}

int sturm_count_retry(const std::vector<double>& diag, double E) {
    for (int attempt = 0; attempt <= 3; ++attempt) {
        double Ep = E + attempt * 1e-12 * (1.0 + std::abs(E));
        try {
            return sturm_count(diag, Ep);
        } catch (const SturmBreakdown&) {
            if (attempt == 3) throw;
        }
    }
    throw SturmBreakdown("unreachable");
}

}  // namespace

std::vector<IdsPoint> ids_sturm(const std::vector<double>& energies, double lambda, int sites,
                                int samples, uint64_t seed, int threads) {
    if (sites < 100) throw std::invalid_argument("ids_sturm needs sites >= 100");
    if (samples < 1) throw std::invalid_argument("ids_sturm needs samples >= 1");
    const size_t nE = energies.size();
    std::vector<std::vector<double>> per_sample(static_cast<size_t>(samples));
    parallel_for(samples, threads, [&](int s) {
        Rng rng(derive_seed(seed, "ids_sturm", static_cast<uint64_t>(s)));
        std::vector<double> diag(static_cast<size_t>(sites));
        for (auto& v : diag) v = lambda * rand_sign(rng);
        std::vector<double> row(nE);
        for (size_t i = 0; i < nE; ++i)
            row[i] = static_cast<double>(sturm_count_retry(diag, energies[i])) / sites;
        per_sample[static_cast<size_t>(s)] = std::move(row);
    });
    std::vector<IdsPoint> out(nE);
    for (size_t i = 0; i < nE; ++i) {
        double mean = 0;
        for (int s = 0; s < samples; ++s) mean += per_sample[static_cast<size_t>(s)][i];
        mean /= samples;
        double var = 0;
        for (int s = 0; s < samples; ++s) {
            double d = per_sample[static_cast<size_t>(s)][i] - mean;
            var += d * d;
        }
        double se = samples > 1 ? std::sqrt(var / (samples - 1) / samples) : 0.0;
        out[i] = {energies[i], mean, se};
    }
    return out;
}

std::vector<IdsPoint> ids_sturm(const EnergyGrid& grid, double lambda, int sites, int samples,
                                uint64_t seed, int threads) {
    return ids_sturm(grid.points, lambda, sites, samples, seed, threads);
}

namespace {

double log_primitive(double t) { return t == 0 ? 0.0 : t * std::log(std::abs(t)) - t; }

std::vector<std::pair<double, double>> thouless_n_to_l(
    const std::vector<std::pair<double, double>>& data) {
    if (data.size() < 3) throw std::invalid_argument("thouless needs at least 3 grid points");
    if (data.back().second < 1.0 - 1e-3)
        throw SupportTruncated("N at the top of the window is below 1 - 1e-3");
    std::vector<std::pair<double, double>> out;
    out.reserve(data.size());
    for (const auto& [E, N_at_E] : data) {
        (void)N_at_E;
        double L = 0;
        for (size_t j = 0; j + 1 < data.size(); ++j) {
            double dN = data[j + 1].second - data[j].second;
            double dE = data[j + 1].first - data[j].first;
            if (dE <= 0) throw std::invalid_argument("energies must be strictly increasing");
            if (dN == 0) continue;
            L += dN / dE * (log_primitive(E - data[j].first) - log_primitive(E - data[j + 1].first));
        }
        out.emplace_back(E, L);
    }
    return out;
}

std::vector<std::pair<double, double>> thouless_l_to_n(
    const std::vector<std::pair<double, double>>& data) {
    const size_t n = data.size();
    if (n < 5) throw std::invalid_argument("thouless inversion needs at least 5 grid points");
    const double a = data.front().first, b = data.back().first;
    const double c = 0.5 * (a + b), s = 0.5 * (b - a);
    // dL/dE on the input grid.
    std::vector<double> Lp(n);
    for (size_t i = 0; i < n; ++i) {
        size_t lo = i == 0 ? 0 : i - 1;
        size_t hi = i + 1 == n ? i : i + 1;
        Lp[i] = (data[hi].second - data[lo].second) / (data[hi].first - data[lo].first);
    }
    auto lp_at = [&](double E) {
        if (E <= data.front().first) return Lp.front();
        if (E >= data.back().first) return Lp.back();
        size_t j = 0;
        while (j + 2 < n && data[j + 1].first < E) ++j;
        double w = (E - data[j].first) / (data[j + 1].first - data[j].first);
        return (1 - w) * Lp[j] + w * Lp[j + 1];
    };
    const int K = 2048;
    const double dt = 2.0 / K;
    std::vector<double> t(K), lpt(K), root(K);
    for (int k = 0; k < K; ++k) {
        t[static_cast<size_t>(k)] = -1.0 + (k + 0.5) * dt;
        root[static_cast<size_t>(k)] = std::sqrt(1.0 - t[static_cast<size_t>(k)] * t[static_cast<size_t>(k)]);
        lpt[static_cast<size_t>(k)] = lp_at(c + s * t[static_cast<size_t>(k)]) * s;  // dL/dx on [-1,1]
    }
    // Particular part of the airfoil inversion; homogeneous mass handled
    // analytically below via arcsin.
    std::vector<double> sigma_pv(K);
    for (int k = 0; k < K; ++k) {
        double acc = 0;
        for (int j = 0; j < K; ++j) {
            if (j == k) continue;
            acc += root[static_cast<size_t>(j)] * lpt[static_cast<size_t>(j)] /
                   (t[static_cast<size_t>(j)] - t[static_cast<size_t>(k)]);
        }
        sigma_pv[static_cast<size_t>(k)] =
            acc * dt / (kPi * kPi * root[static_cast<size_t>(k)]);
    }
    // Cumulative mass of the particular part at the cell bounds.
    std::vector<double> cum(static_cast<size_t>(K) + 1, 0.0);
    for (int k = 0; k < K; ++k)
        cum[static_cast<size_t>(k) + 1] = cum[static_cast<size_t>(k)] + sigma_pv[static_cast<size_t>(k)] * dt;
    auto cum_at = [&](double x) {
        if (x <= -1) return 0.0;
        if (x >= 1) return cum.back();
        double pos = (x + 1.0) / dt;
        int k = std::min(K - 1, static_cast<int>(pos));
        double w = pos - k;
        return (1 - w) * cum[static_cast<size_t>(k)] + w * cum[static_cast<size_t>(k) + 1];
    };
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (const auto& [E, Lval] : data) {
        (void)Lval;
        double x = std::clamp((E - c) / s, -1.0, 1.0);
        double hom = (std::asin(x) + kPi / 2) / kPi;
        out.emplace_back(E, hom + cum_at(x));
    }
    return out;
}

}  // namespace

std::vector<std::pair<double, double>> thouless(
    const std::vector<std::pair<double, double>>& data, ThoulessDirection dir) {
    return dir == ThoulessDirection::N_to_L ? thouless_n_to_l(data) : thouless_l_to_n(data);
}

double halperin_alpha(double lambda) {
    if (!(lambda > 0)) throw std::invalid_argument("halperin_alpha needs lambda > 0");
    return 2.0 * std::log(2.0) / std::acosh(1.0 + lambda);
}

HolderProbe holder_probe(const std::vector<std::pair<double, double>>& ids,
                         const std::vector<double>& window_scales) {
    if (ids.size() < 4) throw InsufficientResolution("too few IDS points");
    const double E0 = ids.front().first, E1 = ids.back().first;
    std::vector<double> lx, ly;
    for (double w : window_scales) {
        if (!(w > 0) || w > E1 - E0) continue;
        int n_windows = static_cast<int>((E1 - E0) / w);
        double max_osc = 0;
        for (int wi = 0; wi < n_windows; ++wi) {
            double lo = E0 + wi * w, hi = lo + w;
            double nmin = std::numeric_limits<double>::infinity(), nmax = -nmin;
            int pts = 0;
            for (const auto& [E, N] : ids)
                if (E >= lo && E <= hi) {
                    nmin = std::min(nmin, N);
                    nmax = std::max(nmax, N);
                    ++pts;
                }
            if (pts >= 2) max_osc = std::max(max_osc, nmax - nmin);
        }
        if (max_osc > 0) {
            lx.push_back(std::log(w));
            ly.push_back(std::log(max_osc));
        }
    }
    if (lx.size() < 4) throw InsufficientResolution("fewer than 4 usable window scales");
    double n = static_cast<double>(lx.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double inter = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ybar = sy / n;
    for (size_t i = 0; i < lx.size(); ++i) {
        double pred = inter + slope * lx[i];
        ss_res += (ly[i] - pred) * (ly[i] - pred);
        ss_tot += (ly[i] - ybar) * (ly[i] - ybar);
    }
    HolderProbe probe;
    probe.alpha_hat = slope;
    probe.r2 = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
    probe.scales_used = static_cast<int>(lx.size());
    return probe;
}

DerivativeProbe energy_derivative_probe(double E, double lambda, int order_k, int ell, int n_max,
                                        int M, int threads) {
    if (order_k < 1 || order_k > 2) throw std::invalid_argument("order_k must be 1 or 2");
    using transferop::build_operator;
    using transferop::Frame;
    using transferop::Variant;
    DerivativeProbe probe;
    auto A = build_operator(E, lambda, n_max, M, Variant::plain, Frame::raw, threads);
    auto phi_vec = [&](double Ev) {
        return expand_on_grid(n_max, M,
                              [&](double x) { return cocycle::log_norm_average(Ev, lambda, x); });
    };
    Eigen::VectorXcd F = to_eigen(phi_vec(E));
    Eigen::VectorXcd D = to_eigen(expand_on_grid(
        n_max, M, [&](double x) { return phi_E_energy_derivative(E, lambda, x); }));
    probe.sup_curve.push_back(from_eigen(D, n_max).sup_norm());
    for (int step = 1; step <= ell; ++step) {
        Eigen::VectorXcd w =
            to_eigen(from_eigen(F, n_max).theta_derivative().sin2_multiply());
        D = A.A * D - (A.A * w - w / 3.0);
        F = A.A * F;
        probe.sup_curve.push_back(from_eigen(D, n_max).sup_norm());
    }
    probe.mean_dE = D(n_max).real();

    // Centered finite difference of T_{E+h}^ell Phi_{E+h}.
    const double h = probe.fd_h;
    auto Ap = build_operator(E + h, lambda, n_max, M, Variant::plain, Frame::raw, threads);
    auto Am = build_operator(E - h, lambda, n_max, M, Variant::plain, Frame::raw, threads);
    Eigen::VectorXcd fp = to_eigen(phi_vec(E + h));
    Eigen::VectorXcd fm = to_eigen(phi_vec(E - h));
    for (int step = 0; step < ell; ++step) {
        fp = Ap.A * fp;
        fm = Am.A * fm;
    }
    Eigen::VectorXcd fd = (fp - fm) / (2 * h);
    probe.agreement = from_eigen(D - fd, n_max).sup_norm();

    if (order_k == 2) {
        auto sigma_dtheta = [&](const Eigen::VectorXcd& v) {
            return to_eigen(from_eigen(v, n_max).theta_derivative().sin2_multiply());
        };
        for (int s : {0, 2, 4, 8}) {
            if (s + 2 > ell) continue;
            int m3 = s / 2, m2 = s - m3, m1 = ell - s;
            Eigen::VectorXcd g = to_eigen(phi_vec(E));
            for (int i = 0; i < m3; ++i) g = A.A * g;
            g = sigma_dtheta(g);
            for (int i = 0; i < m2; ++i) g = A.A * g;
            g = sigma_dtheta(g);
            for (int i = 0; i < m1; ++i) g = A.A * g;
            probe.nested_sups.emplace_back(s, from_eigen(g, n_max).sup_norm());
        }
    }
    return probe;
}

}  // namespace ablab::spectrum
