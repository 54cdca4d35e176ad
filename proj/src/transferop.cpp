#include "ablab/transferop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "ablab/rng.hpp"

namespace ablab::transferop {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

int wrap_bin(int n, int M) { return ((n % M) + M) % M; }

// Random real-valued trigonometric polynomial supported on lo <= |n| <= hi.
FourierVector random_real_poly(int n_max, int lo, int hi, Rng& rng) {
    FourierVector f(n_max);
    for (int n = std::max(1, lo); n <= hi; ++n) {
        cdouble z(rand_u01(rng) - 0.5, rand_u01(rng) - 0.5);
        f.at(n) = z;
        f.at(-n) = std::conj(z);
    }
    if (lo == 0) f.at(0) = rand_u01(rng) - 0.5;
    return f;
}

Eigen::VectorXcd to_eigen(const FourierVector& f, int n_max) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * n_max + 1);
    for (int n = -f.n_max; n <= f.n_max; ++n)
        if (std::abs(n) <= n_max) v(n + n_max) = f.at(n);
    return v;
}

FourierVector from_eigen(const Eigen::VectorXcd& v, int n_max) {
    FourierVector f(n_max);
    for (int n = -n_max; n <= n_max; ++n) f.at(n) = v(n + n_max);
    return f;
}

double top_mode_mass(const Eigen::VectorXcd& v, int n_max) {
    int cut = static_cast<int>(std::floor(0.9 * n_max));
    double s = 0;
    for (int n = -n_max; n <= n_max; ++n)
        if (std::abs(n) > cut) s += std::norm(v(n + n_max));
    return std::sqrt(s);
}

struct NormEstimate {
    double value = 0;
    int iterations = 0;
};

// ||Q_K A Q_K|| by power iteration on the normal operator, modes |n| >= K.
NormEstimate masked_norm(const Eigen::MatrixXcd& A, int n_max, int K, uint64_t seed) {
    const int sz = 2 * n_max + 1;
    auto mask = [&](Eigen::VectorXcd& v) {
        for (int n = -n_max; n <= n_max; ++n)
            if (std::abs(n) < K) v(n + n_max) = 0;
    };
    Rng rng(seed);
    Eigen::VectorXcd v(sz);
    for (int i = 0; i < sz; ++i) v(i) = cdouble(rand_u01(rng) - 0.5, rand_u01(rng) - 0.5);
    mask(v);
    double nv = v.norm();
    if (nv == 0) return {0.0, 0};
    v /= nv;

    double sigma = 0, sigma_prev = -1;
    const int max_iters = 10000;
    for (int it = 1; it <= max_iters; ++it) {
        Eigen::VectorXcd u = A * v;
        mask(u);
        sigma = u.norm();  // ||B v|| with ||v|| = 1
        Eigen::VectorXcd w = A.adjoint() * u;
        mask(w);
        double nw = w.norm();
        if (nw == 0) return {0.0, it};
        v = w / nw;
        if (std::abs(sigma - sigma_prev) <= 1e-6 * std::max(sigma, 1e-30))
            return {sigma, it};
        sigma_prev = sigma;
    }
    throw PowerIterationStall("restricted-norm power iteration did not converge in 1e4 steps");
}

}  // namespace

Eigen::MatrixXcd galerkin_matrix(const std::vector<cocycle::Mat2d>& maps, bool sqrt_weight,
                                 double pref, int n_max, int M, int threads) {
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    if (M < 2 * n_max + 1) throw std::invalid_argument("quadrature grid smaller than mode range");
    const int sz = 2 * n_max + 1;
    // Per-map images t_g(x_m) and weights, shared across columns.
    std::vector<std::vector<double>> t(maps.size(), std::vector<double>(static_cast<size_t>(M)));
    std::vector<std::vector<double>> w(maps.size(),
                                       std::vector<double>(static_cast<size_t>(M), 1.0));
    for (size_t gi = 0; gi < maps.size(); ++gi) {
        for (int m = 0; m < M; ++m) {
            double x = static_cast<double>(m) / M;
            t[gi][static_cast<size_t>(m)] = cocycle::mobius_angle(maps[gi], x);
            if (sqrt_weight)
                w[gi][static_cast<size_t>(m)] =
                    std::sqrt(cocycle::mobius_derivative(maps[gi], x));
        }
    }
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(sz, sz);
    parallel_for(sz, threads, [&](int col) {
        int np = col - n_max;
        std::vector<cdouble> s(static_cast<size_t>(M), cdouble(0, 0));
        for (size_t gi = 0; gi < maps.size(); ++gi)
            for (int m = 0; m < M; ++m)
                s[static_cast<size_t>(m)] +=
                    w[gi][static_cast<size_t>(m)] *
                    std::polar(1.0, kTwoPi * np * t[gi][static_cast<size_t>(m)]);
        auto bins = fourier::dft_forward(std::move(s));
        for (int n = -n_max; n <= n_max; ++n)
            A(n + n_max, col) = pref * bins[static_cast<size_t>(wrap_bin(n, M))] /
                                static_cast<double>(M);
    });
    return A;
}

OperatorMatrix build_operator(double E, double lambda, int n_max, int M, Variant variant,
                              Frame frame, int threads) {
    if (M < 16 * n_max)
        throw std::invalid_argument("quadrature size must satisfy M >= 16*n_max");
    std::vector<cocycle::Mat2d> maps;
    if (frame == Frame::raw) {
        maps = {cocycle::transfer_matrix(E, lambda, +1), cocycle::transfer_matrix(E, lambda, -1)};
    } else {
        auto fp = cocycle::fp_frame(E, lambda);  // throws EnergyOutOfRange for |E| >= 2
        maps = {fp.g_plus_tilde, fp.g_minus_tilde};
    }
    auto assemble = [&](int Mq) {
        Eigen::MatrixXcd A =
            galerkin_matrix(maps, variant == Variant::unitary, 1.0 / 3.0, n_max, Mq, threads);
        A.diagonal().array() += 1.0 / 3.0;
        return A;
    };
    Eigen::MatrixXcd A = assemble(M);
    Eigen::MatrixXcd A2 = assemble(2 * M);
    double drift = (A - A2).cwiseAbs().maxCoeff();
    if (drift > 1e-8) {
        char msg[128];
        std::snprintf(msg, sizeof msg,
                      "entries moved by %.3g between M and 2M (limit 1e-8)", drift);
        throw QuadratureUnderResolved(msg);
    }
    OperatorMatrix out;
    out.n_max = n_max;
    out.M = M;
    out.E = E;
    out.lambda = lambda;
    out.variant = variant;
    out.frame = frame;
    out.A = std::move(A);
    return out;
}

PowerResult apply_power(const OperatorMatrix& A, const FourierVector& f, int m,
                        bool throw_on_leak) {
    if (f.n_max > A.n_max) throw std::invalid_argument("vector has more modes than the operator");
    Eigen::VectorXcd v = to_eigen(f, A.n_max);
    const double norm0 = v.norm();
    PowerResult res;
    for (int step = 0; step < m; ++step) {
        v = A.A * v;
        double leak = top_mode_mass(v, A.n_max);
        res.leaks.push_back(leak);
        res.max_leak = std::max(res.max_leak, leak);
        if (throw_on_leak && leak > 1e-4 * norm0)
            throw TruncationLeak("top-mode mass exceeded 1e-4 of the input norm; raise n_max");
    }
    res.f = from_eigen(v, A.n_max);
    return res;
}

RestrictedNorm restricted_norm(const OperatorMatrix& A, int K, uint64_t seed) {
    if (K < 0 || K >= A.n_max / 2)
        throw std::invalid_argument("restricted_norm requires 0 <= K < n_max/2");
    RestrictedNorm out;
    auto full = masked_norm(A.A, A.n_max, K, seed);
    out.value = full.value;
    out.iterations = full.iterations;
    // Truncation sensitivity: the central block is exactly the operator built
    // at half the cutoff (entries depend only on (n, n', E, lambda, M, frame)).
    int nh = A.n_max / 2;
    int off = A.n_max - nh;
    Eigen::MatrixXcd hb = A.A.block(off, off, 2 * nh + 1, 2 * nh + 1);
    out.half_value = masked_norm(hb, nh, K, seed).value;
    return out;
}

double expander_average_norm(const numberfield::AlgebraicNumber& alpha, double tau, int K,
                             int n_max, int M, int threads) {
    auto family = cocycle::expander_family(alpha, tau);
    std::vector<cocycle::Mat2d> maps;
    for (const auto& g : family) {
        maps.push_back(g.inverse_unimodular());  // rho_g acts through tau_{g^{-1}}
        maps.push_back(g);                       // rho_{g^{-1}} acts through tau_g
    }
    double pref = 1.0 / static_cast<double>(maps.size());
    Eigen::MatrixXcd avg = galerkin_matrix(maps, true, pref, n_max, M, threads);
    return masked_norm(avg, n_max, K, 0x5eedULL).value;
}

FitResult fit_exponential(const std::vector<double>& m, const std::vector<double>& y,
                          double floor_value) {
    FitResult fit;
    std::vector<double> xs, ys;
    for (size_t i = 0; i < y.size() && i < m.size(); ++i)
        if (y[i] > floor_value) {
            xs.push_back(m[i]);
            ys.push_back(std::log(y[i]));
        }
    fit.points = static_cast<int>(xs.size());
    if (fit.points < 2) return fit;
    double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom == 0) return fit;
    double slope = (n * sxy - sx * sy) / denom;
    double inter = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0, ybar = sy / n;
    for (size_t i = 0; i < xs.size(); ++i) {
        double pred = inter + slope * xs[i];
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
    }
    fit.rate = -slope;
    fit.intercept = inter;
    fit.r2 = (ss_tot == 0) ? 1.0 : 1.0 - ss_res / ss_tot;
    return fit;
}

SmoothingReport smoothing_suite(double E, double lambda, const SmoothingParams& params) {
    SmoothingReport rep;
    OperatorMatrix op = build_operator(E, lambda, params.n_max, params.M, Variant::plain,
                                       params.frame, params.threads);
    const int n_max = params.n_max;
    std::vector<double> msteps(static_cast<size_t>(params.m_max) + 1);
    for (int i = 0; i <= params.m_max; ++i) msteps[static_cast<size_t>(i)] = i;

    // (i) L2 boundedness over random test functions.
    for (int i = 0; i < params.n_random; ++i) {
        Rng rng(derive_seed(params.seed, "smoothing.bounded", static_cast<uint64_t>(i)));
        FourierVector f = random_real_poly(n_max, 0, n_max / 4, rng);
        Eigen::VectorXcd v = to_eigen(f, n_max);
        double n0 = v.norm();
        for (int m = 1; m <= params.m_max; ++m) {
            v = op.A * v;
            rep.boundedness_sup = std::max(rep.boundedness_sup, v.norm() / n0);
        }
    }

    // (ii) decay of high-mode functions, support 2^k < |n| <= 2^{k+1}.
    for (int k : params.k_list) {
        int lo = (1 << k) + 1;
        int hi = std::min(2 * (1 << k), n_max);
        if (lo > n_max) throw std::invalid_argument("k too large for n_max in smoothing_suite");
        Rng rng(derive_seed(params.seed, "smoothing.highmode", static_cast<uint64_t>(k)));
        FourierVector f = random_real_poly(n_max, lo, hi, rng);
        Eigen::VectorXcd v = to_eigen(f, n_max);
        std::vector<double> curve;
        curve.push_back(v.norm());
        for (int m = 1; m <= params.m_max; ++m) {
            v = op.A * v;
            curve.push_back(v.norm());
        }
        rep.k_values.push_back(k);
        rep.highmode_fits.push_back(fit_exponential(msteps, curve));
        rep.highmode_curves.push_back(std::move(curve));
    }
    // Gapless dynamics show up either as a flat fit or as a curve that decays
    // only transiently and then plateaus (persistent high modes).
    for (size_t i = 0; i < rep.highmode_fits.size(); ++i) {
        const auto& curve = rep.highmode_curves[i];
        if (rep.highmode_fits[i].rate < 1e-3 || curve.back() > 0.5 * curve.front())
            rep.no_gap = true;
    }

    // (iii) H^s boundedness for s = 1, 2.
    {
        Rng rng(derive_seed(params.seed, "smoothing.sobolev", 0));
        FourierVector f = random_real_poly(n_max, 0, n_max / 4, rng);
        Eigen::VectorXcd v = to_eigen(f, n_max);
        for (int m = 0; m <= params.m_max; ++m) {
            FourierVector g = from_eigen(v, n_max);
            rep.hs1_curve.push_back(g.sobolev_norm(1.0));
            rep.hs2_curve.push_back(g.sobolev_norm(2.0));
            if (m < params.m_max) v = op.A * v;
        }
        auto envelope_fit = [&](const std::vector<double>& curve, double& plateau) {
            plateau = *std::min_element(curve.begin(), curve.end());
            std::vector<double> excess;
            for (double h : curve) excess.push_back(h - plateau);
            double floor_val = std::max(1e-12, 1e-3 * excess.front());
            return fit_exponential(msteps, excess, floor_val);
        };
        rep.hs1_fit = envelope_fit(rep.hs1_curve, rep.hs1_plateau);
        rep.hs2_fit = envelope_fit(rep.hs2_curve, rep.hs2_plateau);
    }

    // (iv) sup norm of the (theta-scale) derivative of T^m Phi_E; always in
    // the raw frame, where Phi_E lives.
    {
        const OperatorMatrix* raw_op = &op;
        OperatorMatrix raw_built;
        if (params.frame != Frame::raw) {
            raw_built = build_operator(E, lambda, params.n_max, params.M, Variant::plain,
                                       Frame::raw, params.threads);
            raw_op = &raw_built;
        }
        std::vector<cdouble> samples(static_cast<size_t>(params.M));
        for (int m = 0; m < params.M; ++m)
            samples[static_cast<size_t>(m)] =
                cocycle::log_norm_average(E, lambda, static_cast<double>(m) / params.M);
        FourierVector phi = fourier::from_samples(samples, n_max);
        Eigen::VectorXcd v = to_eigen(phi, n_max);
        for (int m = 0; m <= params.m_max; ++m) {
            FourierVector g = from_eigen(v, n_max);
            rep.deriv_curve.push_back(g.theta_derivative().sup_norm());
            if (m < params.m_max) v = raw_op->A * v;
        }
        rep.deriv_fit = fit_exponential(msteps, rep.deriv_curve);
    }
    return rep;
}

cdouble measure_pairing(const FourierVector& nu_hat, const FourierVector& f) {
    cdouble s = 0;
    int lim = std::min(nu_hat.n_max, f.n_max);
    for (int n = -lim; n <= lim; ++n) s += f.at(n) * nu_hat.at(-n);
    return s;
}

DeviationReport deviation_decay(const OperatorMatrix& A, const FourierVector& f, int ell_max,
                                const FourierVector& nu_hat) {
    DeviationReport rep;
    rep.pairing = measure_pairing(nu_hat, f);
    Eigen::VectorXcd v = to_eigen(f, A.n_max);
    const int grid = 4 * (2 * A.n_max + 1);
    for (int ell = 0; ell <= ell_max; ++ell) {
        auto vals = fourier::grid_values(from_eigen(v, A.n_max), grid);
        double d = 0;
        for (const auto& z : vals) d = std::max(d, std::abs(z - rep.pairing));
        rep.d.push_back(d);
        if (ell < ell_max) v = A.A * v;
    }
    std::vector<double> ls(rep.d.size());
    for (size_t i = 0; i < ls.size(); ++i) ls[i] = static_cast<double>(i);
    rep.fit = fit_exponential(ls, rep.d);
    return rep;
}

namespace {

template <typename T>
void put(std::string& buf, const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    buf.append(p, sizeof(T));
}

template <typename T>
T take(const std::string& buf, size_t& pos) {
    if (pos + sizeof(T) > buf.size()) throw CacheCorrupt("operator cache file truncated");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

}  // namespace

void save_operator(const std::string& path, const OperatorMatrix& A) {
    std::string payload;
    const int sz = A.size();
    payload.reserve(static_cast<size_t>(sz) * sz * 16);
    for (int r = 0; r < sz; ++r)
        for (int c = 0; c < sz; ++c) {
            put(payload, A.A(r, c).real());
            put(payload, A.A(r, c).imag());
        }
    std::string head;
    head.append("ABTO", 4);
    put(head, static_cast<uint32_t>(1));
    put(head, static_cast<int32_t>(A.n_max));
    put(head, static_cast<int32_t>(A.M));
    put(head, A.E);
    put(head, A.lambda);
    put(head, static_cast<uint8_t>(A.variant));
    put(head, static_cast<uint8_t>(A.frame));
    for (int i = 0; i < 6; ++i) put(head, static_cast<uint8_t>(0));
    put(head, fnv1a(std::string_view(payload)));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw std::runtime_error("short write to " + path);
}

OperatorMatrix load_operator(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CacheCorrupt("cannot open operator cache file " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    size_t pos = 0;
    if (buf.size() < 4 || buf.compare(0, 4, "ABTO") != 0)
        throw CacheCorrupt("bad magic in operator cache");
    pos = 4;
    if (take<uint32_t>(buf, pos) != 1) throw CacheCorrupt("unsupported operator cache version");
    OperatorMatrix A;
    A.n_max = take<int32_t>(buf, pos);
    A.M = take<int32_t>(buf, pos);
    A.E = take<double>(buf, pos);
    A.lambda = take<double>(buf, pos);
    A.variant = static_cast<Variant>(take<uint8_t>(buf, pos));
    A.frame = static_cast<Frame>(take<uint8_t>(buf, pos));
    for (int i = 0; i < 6; ++i) take<uint8_t>(buf, pos);
    uint64_t want_hash = take<uint64_t>(buf, pos);
    if (A.n_max < 0 || A.n_max > (1 << 20)) throw CacheCorrupt("implausible n_max in cache");
    const int sz = 2 * A.n_max + 1;
    size_t need = static_cast<size_t>(sz) * sz * 16;
    if (buf.size() - pos != need) throw CacheCorrupt("operator cache payload size mismatch");
    std::string_view payload(buf.data() + pos, need);
    if (fnv1a(payload) != want_hash) throw CacheCorrupt("operator cache checksum mismatch");
    A.A.resize(sz, sz);
    for (int r = 0; r < sz; ++r)
        for (int c = 0; c < sz; ++c) {
            double re = take<double>(buf, pos);
            double im = take<double>(buf, pos);
            A.A(r, c) = cdouble(re, im);
        }
    return A;
}

}  // namespace ablab::transferop
