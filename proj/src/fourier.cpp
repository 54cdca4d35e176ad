#include "ablab/fourier.hpp"

#include <fftw3.h>

#include <atomic>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <thread>

#include "ablab/rng.hpp"

namespace ablab::fourier {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

// FFTW plan creation is not thread-safe; executions on distinct buffers are.
// Plans are cached per (length, direction) and executed with the new-array
// interface on fftw_malloc'd buffers (uniform alignment).
std::mutex& plan_mutex() {
    static std::mutex mu;
    return mu;
}

struct PlanCache {
    std::map<std::pair<int, int>, fftw_plan> plans;
    ~PlanCache() {
        for (auto& [key, plan] : plans) fftw_destroy_plan(plan);
    }
};

fftw_plan get_plan(int n, int sign) {
    static PlanCache cache;
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto key = std::make_pair(n, sign);
    auto it = cache.plans.find(key);
    if (it != cache.plans.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE);
    fftw_free(buf);
    cache.plans.emplace(key, plan);
    return plan;
}

std::vector<cdouble> run_dft(std::vector<cdouble> data, int sign) {
    const int n = static_cast<int>(data.size());
    if (n == 0) return data;
    fftw_plan plan = get_plan(n, sign);
    fftw_complex* buf = fftw_alloc_complex(static_cast<size_t>(n));
    auto* cbuf = reinterpret_cast<cdouble*>(buf);  // layout-compatible with double[2]
    std::copy(data.begin(), data.end(), cbuf);
    fftw_execute_dft(plan, buf, buf);
    std::copy(cbuf, cbuf + n, data.begin());
    fftw_free(buf);
    return data;
}

}  // namespace

std::vector<cdouble> dft_forward(std::vector<cdouble> data) {
    return run_dft(std::move(data), FFTW_FORWARD);
}

std::vector<cdouble> dft_backward(std::vector<cdouble> data) {
    return run_dft(std::move(data), FFTW_BACKWARD);
}

std::vector<cdouble> grid_values(const FourierVector& f, int M) {
    if (M < f.size()) throw std::invalid_argument("grid too coarse for the mode range");
    std::vector<cdouble> bins(static_cast<size_t>(M));
    for (int n = -f.n_max; n <= f.n_max; ++n) {
        int k = ((n % M) + M) % M;
        bins[static_cast<size_t>(k)] += f.at(n);
    }
    return dft_backward(std::move(bins));
}

FourierVector from_samples(const std::vector<cdouble>& samples, int n_max) {
    const int M = static_cast<int>(samples.size());
    if (M < 2 * n_max + 1) throw std::invalid_argument("too few samples for the mode range");
    auto bins = dft_forward(samples);
    FourierVector f(n_max);
    for (int n = -n_max; n <= n_max; ++n) {
        int k = ((n % M) + M) % M;
        f.at(n) = bins[static_cast<size_t>(k)] / static_cast<double>(M);
    }
    return f;
}

double FourierVector::l2_norm() const {
    double s = 0;
    for (const auto& z : c) s += std::norm(z);
    return std::sqrt(s);
}

double FourierVector::sobolev_norm(double s) const {
    double acc = 0;
    for (int n = -n_max; n <= n_max; ++n) {
        double w = std::pow(1.0 + kTwoPi * n * kTwoPi * n, s);
        acc += w * std::norm(at(n));
    }
    return std::sqrt(acc);
}

double FourierVector::sup_norm() const {
    int M = std::max(8, 4 * size());
    auto vals = grid_values(*this, M);
    double best = 0;
    for (const auto& z : vals) best = std::max(best, std::abs(z));
    return best;
}

FourierVector FourierVector::theta_derivative() const {
    FourierVector out(n_max);
    for (int n = -n_max; n <= n_max; ++n) out.at(n) = at(n) * cdouble(0.0, 2.0 * n);
    return out;
}

FourierVector FourierVector::sin2_multiply() const {
    FourierVector out(n_max);
    for (int n = -n_max; n <= n_max; ++n) {
        cdouble v = 0.5 * at(n);
        if (n - 1 >= -n_max) v -= 0.25 * at(n - 1);
        if (n + 1 <= n_max) v -= 0.25 * at(n + 1);
        out.at(n) = v;
    }
    return out;
}

}  // namespace ablab::fourier

namespace ablab {

void parallel_for(int n_tasks, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n_tasks));
    if (threads <= 1) {
        for (int i = 0; i < n_tasks; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n_tasks) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace ablab
