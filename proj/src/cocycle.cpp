#include "ablab/cocycle.hpp"

#include <atomic>
#include <cmath>

#include "ablab/rng.hpp"

namespace ablab::cocycle {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Mat2f mat2_identity(const FieldElement::Field& f) {
    auto one = FieldElement::one(f), zero = FieldElement::zero(f);
    return {one, zero, zero, one};
}

double frobenius_norm(const Mat2d& g) {
    return std::sqrt(g.a * g.a + g.b * g.b + g.c * g.c + g.d * g.d);
}

double spectral_norm(const Mat2d& g) {
    // singular values from the eigenvalues of g^T g
    double t = g.a * g.a + g.b * g.b + g.c * g.c + g.d * g.d;
    double det = g.a * g.d - g.b * g.c;
    double disc = std::sqrt(std::max(0.0, t * t - 4 * det * det));
    return std::sqrt((t + disc) / 2);
}

double max_norm(const Mat2d& g) {
    return std::max(std::max(std::abs(g.a), std::abs(g.b)),
                    std::max(std::abs(g.c), std::abs(g.d)));
}

ProjectivePoint::ProjectivePoint(double v) {
    x = v - std::floor(v);
    if (x >= 1.0) x -= 1.0;
    if (x < 0.0) x = 0.0;
}

Mat2d transfer_matrix(double E, double lambda, int sign) {
    return {E + sign * lambda, -1.0, 1.0, 0.0};
}

Mat2f transfer_matrix(const BigRat& E, const FieldElement::Field& field, int sign) {
    auto e = FieldElement::rational(field, E);
    auto lam = FieldElement::generator(field);
    auto one = FieldElement::one(field), zero = FieldElement::zero(field);
    FieldElement tl = (sign >= 0) ? e + lam : e - lam;
    return {tl, -one, one, zero};
}

std::pair<Mat2d, Mat2d> parabolic_pair(double E, double lambda) {
    Mat2d gp = transfer_matrix(E, lambda, +1), gm = transfer_matrix(E, lambda, -1);
    Mat2d h1 = gp * gm.inverse_unimodular();
    Mat2d h2 = gp.inverse_unimodular() * gm;
    Mat2d w1{1, 2 * lambda, 0, 1}, w2{1, 0, 2 * lambda, 1};
    auto close = [](const Mat2d& u, const Mat2d& v) {
        return std::abs(u.a - v.a) <= 1e-12 && std::abs(u.b - v.b) <= 1e-12 &&
               std::abs(u.c - v.c) <= 1e-12 && std::abs(u.d - v.d) <= 1e-12;
    };
    if (!close(h1, w1) || !close(h2, w2))
        throw IdentityMismatch("parabolic pair does not match [[1,2l],[0,1]] / [[1,0],[2l,1]]");
    return {h1, h2};
}

std::pair<Mat2f, Mat2f> parabolic_pair(const BigRat& E, const FieldElement::Field& field) {
    Mat2f gp = transfer_matrix(E, field, +1), gm = transfer_matrix(E, field, -1);
    Mat2f h1 = gp * gm.inverse_unimodular();
    Mat2f h2 = gp.inverse_unimodular() * gm;
    auto one = FieldElement::one(field), zero = FieldElement::zero(field);
    auto two_lam = FieldElement::generator(field) + FieldElement::generator(field);
    Mat2f w1{one, two_lam, zero, one}, w2{one, zero, two_lam, one};
    if (!(h1 == w1) || !(h2 == w2))
        throw IdentityMismatch("exact parabolic pair mismatch");
    return {h1, h2};
}

FPFrame fp_frame(double E, double lambda) {
    if (!(std::abs(E) < 2.0)) throw EnergyOutOfRange("fp_frame needs |E| < 2");
    FPFrame f;
    f.E = E;
    f.kappa = std::acos(E / 2.0);
    double s = std::sin(f.kappa), cs = std::cos(f.kappa);
    double rs = 1.0 / std::sqrt(s);
    f.S = {rs, -cs * rs, 0, s * rs};
    f.S_inv = f.S.inverse_unimodular();
    Mat2d gp = transfer_matrix(E, lambda, +1), gm = transfer_matrix(E, lambda, -1);
    f.g_plus_tilde = f.S * gp * f.S_inv;
    f.g_minus_tilde = f.S * gm * f.S_inv;

    Mat2d rot{cs, -s, s, cs};
    double ct = cs / s;
    auto check = [&](const Mat2d& got, double sgn) {
        Mat2d want{rot.a + sgn * lambda, rot.b + sgn * lambda * ct, rot.c, rot.d};
        if (std::abs(got.a - want.a) > 1e-12 || std::abs(got.b - want.b) > 1e-12 ||
            std::abs(got.c - want.c) > 1e-12 || std::abs(got.d - want.d) > 1e-12)
            throw IdentityMismatch("rotation-frame closed form violated");
    };
    check(f.g_plus_tilde, +1.0);
    check(f.g_minus_tilde, -1.0);
    f.cond = spectral_norm(f.S) * spectral_norm(f.S_inv);
    return f;
}

double mobius_angle(const Mat2d& g, double x) {
    double th = kPi * x;
    double cth = std::cos(th), sth = std::sin(th);
    double X = g.a * cth + g.b * sth;
    double Y = g.c * cth + g.d * sth;
    double t = std::atan2(Y, X) / kPi;
    t -= std::floor(t);
    if (t >= 1.0) t -= 1.0;
    return t;
}

ProjectivePoint mobius_angle(const Mat2d& g, ProjectivePoint p) {
    return ProjectivePoint(mobius_angle(g, p.x));
}

double mobius_derivative(const Mat2d& g, double x) {
    double th = kPi * x;
    double cth = std::cos(th), sth = std::sin(th);
    double X = g.a * cth + g.b * sth;
    double Y = g.c * cth + g.d * sth;
    return 1.0 / (X * X + Y * Y);
}

double mobius_derivative(const Mat2d& g, ProjectivePoint p) {
    return mobius_derivative(g, p.x);
}

double log_norm_average(double E, double lambda, double x) {
    double th = kPi * x;
    double cth = std::cos(th), sth = std::sin(th);
    double out = 0;
    for (int sgn : {+1, -1}) {
        double X = (E + sgn * lambda) * cth - sth;
        double Y = cth;
        out += 0.5 * std::log(std::hypot(X, Y));
    }
    return out;
}

Letter letter_inverse(Letter l) {
    switch (l) {
        case Letter::A: return Letter::Ainv;
        case Letter::Ainv: return Letter::A;
        case Letter::B: return Letter::Binv;
        case Letter::Binv: return Letter::B;
    }
    throw std::logic_error("unreachable");
}

bool Word::reduced() const {
    for (size_t i = 1; i < letters.size(); ++i)
        if (letters[i] == letter_inverse(letters[i - 1])) return false;
    return true;
}

std::string Word::str() const {
    static const char* names[4] = {"A", "A^-1", "B", "B^-1"};
    std::string out;
    for (size_t i = 0; i < letters.size(); ++i) {
        if (i) out += ' ';
        out += names[static_cast<int>(letters[i])];
    }
    return out;
}

namespace {

void dfs_words(Word& w, int l_max, const std::function<void(const Word&)>& visit) {
    static const Letter all[4] = {Letter::A, Letter::Ainv, Letter::B, Letter::Binv};
    for (Letter l : all) {
        if (!w.letters.empty() && l == letter_inverse(w.letters.back())) continue;
        w.letters.push_back(l);
        visit(w);
        if (static_cast<int>(w.letters.size()) < l_max) dfs_words(w, l_max, visit);
        w.letters.pop_back();
    }
}

}  // namespace

void for_each_reduced_word(int l_max, const std::function<void(const Word&)>& visit,
                           std::optional<Letter> first) {
    if (l_max < 1) throw std::invalid_argument("word length must be >= 1");
    if (l_max > 14) throw LengthCapExceeded("word length cap is 14");
    Word w;
    if (first) {
        w.letters.push_back(*first);
        visit(w);
        if (l_max > 1) dfs_words(w, l_max, visit);
    } else {
        dfs_words(w, l_max, visit);
    }
}

std::vector<Word> reduced_words(int l_max) {
    std::vector<Word> out;
    for_each_reduced_word(l_max, [&](const Word& w) { out.push_back(w); });
    return out;
}

namespace {

struct BranchResult {
    bool collision = false;
    size_t witness_len = 0;
    uint64_t witness_order = 0;  // preorder counter within the branch
    Word witness;
    BigRat min_dist;  // valid if any non-collision word was bounded
    bool have_dist = false;
    uint64_t visited = 0;
};

// Lower bound on |beta| for nonzero beta in Q(lambda):
// |Norm(beta)| / prod_{j>=2} |sigma_j(beta)| with each |sigma_j(beta)|
// bounded by sum_k |c_k| (1+H)^k.
BigRat entry_lower_bound(const FieldElement& beta, const BigInt& H, int d) {
    BigRat nrm = beta.norm();
    if (nrm < 0) nrm = -nrm;
    if (d == 1) return nrm;
    BigRat ub = 0;
    BigInt pw = 1;
    BigInt base = 1 + H;
    for (const auto& c : beta.coords()) {
        BigRat ac = c < 0 ? BigRat(-c) : c;
        ub += ac * BigRat(pw);
        pw *= base;
    }
    BigRat denom = 1;
    for (int j = 0; j < d - 1; ++j) denom *= ub;
    return nrm / denom;
}

}  // namespace

FreenessCertificate freeness_certificate(const AlgebraicNumber& alpha, MuMode mu_mode,
                                         int l_max, int threads) {
    if (l_max < 1) throw std::invalid_argument("l_max must be >= 1");
    if (l_max > 12) throw LengthCapExceeded("freeness search cap is 12");

    auto field = std::make_shared<const AlgebraicNumber>(alpha);
    FieldElement lam = FieldElement::generator(field);
    FieldElement mu = (mu_mode == MuMode::entry_two_lambda) ? lam + lam : lam;
    auto one = FieldElement::one(field), zero = FieldElement::zero(field);
    Mat2f gens[4] = {
        {one, mu, zero, one},    // A
        {one, -mu, zero, one},   // A^-1
        {one, zero, mu, one},    // B
        {one, zero, -mu, one},   // B^-1
    };
    const BigInt H = alpha.height();
    const int d = alpha.degree();
    const FieldElement neg_one = -one;

    std::atomic<bool> collision_seen{false};
    std::vector<BranchResult> results(4);

    auto run_branch = [&](int branch) {
        BranchResult& res = results[static_cast<size_t>(branch)];
        std::vector<Mat2f> stack;
        stack.push_back(mat2_identity(field));
        uint64_t order = 0;
        auto visit = [&](const Word& w) {
            ++order;
            ++res.visited;
            // the word grew or shrank; rebuild lazily from the stack
            while (stack.size() > w.length()) stack.pop_back();
            while (stack.size() < w.length() + 1) {
                const Mat2f& prev = stack.back();
                Letter l = w.letters[stack.size() - 1];
                stack.push_back(prev * gens[static_cast<int>(l)]);
            }
            const Mat2f& m = stack.back();
            bool off_zero = m.b.is_zero() && m.c.is_zero();
            if (off_zero && ((m.a == one && m.d == one) || (m.a == neg_one && m.d == neg_one))) {
                if (!res.collision || w.length() < res.witness_len) {
                    res.collision = true;
                    res.witness_len = w.length();
                    res.witness_order = order;
                    res.witness = w;
                }
                collision_seen.store(true, std::memory_order_relaxed);
                return;
            }
            if (collision_seen.load(std::memory_order_relaxed)) return;
            FieldElement e[4] = {m.a - one, m.b, m.c, m.d - one};
            BigRat best;  // max over nonzero entries of the per-entry bound
            bool have = false;
            for (const auto& x : e) {
                if (x.is_zero()) continue;
                BigRat lb = entry_lower_bound(x, H, d);
                if (!have || lb > best) { best = lb; have = true; }
            }
            if (have && (!res.have_dist || best < res.min_dist)) {
                res.min_dist = best;
                res.have_dist = true;
            }
        };
        static const Letter firsts[4] = {Letter::A, Letter::Ainv, Letter::B, Letter::Binv};
        for_each_reduced_word(l_max, visit, firsts[branch]);
    };

    parallel_for(4, std::max(1, threads), run_branch);

    FreenessCertificate cert;
    cert.lambda_poly = alpha.poly_string();
    cert.lambda_coeffs = alpha.coeffs();
    cert.mu_entry = mu_mode;
    cert.max_length = l_max;
    cert.floor = numberfield::diophantine_floor(alpha, 1, l_max);

    int best_branch = -1;
    for (int i = 0; i < 4; ++i) {
        const auto& r = results[static_cast<size_t>(i)];
        cert.words_checked += r.visited;
        if (!r.collision) continue;
        if (best_branch < 0) { best_branch = i; continue; }
        const auto& b = results[static_cast<size_t>(best_branch)];
        if (r.witness_len < b.witness_len ||
            (r.witness_len == b.witness_len && r.witness_order < b.witness_order))
            best_branch = i;
    }
    if (best_branch >= 0) {
        cert.status = FreenessCertificate::Status::collision_found;
        cert.witness = results[static_cast<size_t>(best_branch)].witness;
        cert.min_distance_exact = 0;
        cert.min_distance = 0;
    } else {
        cert.status = FreenessCertificate::Status::free_up_to_length;
        bool have = false;
        for (const auto& r : results)
            if (r.have_dist && (!have || r.min_dist < cert.min_distance_exact)) {
                cert.min_distance_exact = r.min_dist;
                have = true;
            }
        cert.min_distance = cert.min_distance_exact.convert_to<double>();
    }
    return cert;
}

std::vector<Mat2d> expander_family(const AlgebraicNumber& alpha, double tau) {
    if (!(tau > 0 && tau < 0.5)) throw std::invalid_argument("tau must lie in (0, 1/2)");
    double lam = alpha.float_value();
    long R = 1;
    if (lam != 0.0) {
        double rf = std::pow(std::abs(lam), -tau);
        if (rf > 1e6) throw std::invalid_argument("R = floor(|lambda|^-tau) too large");
        R = std::max(1L, static_cast<long>(std::floor(rf)));
    }
    std::vector<Mat2d> out;
    double bound = std::sqrt(std::abs(lam));
    for (long r = 1; r <= R; ++r) {
        double rl = static_cast<double>(r) * lam;
        Mat2d up{1, rl, 0, 1}, low{1, 0, rl, 1};
        Mat2d g = up * low;
        if (lam != 0.0) {
            Mat2d diff{1 - g.a, -g.b, -g.c, 1 - g.d};
            double nrm = spectral_norm(diff);
            if (!(nrm < bound))
                throw NormBoundViolated("||1 - g_r|| = " + std::to_string(nrm) +
                                        " >= sqrt(lambda) at r = " + std::to_string(r));
        }
        out.push_back(g);
    }
    return out;
}

}  // namespace ablab::cocycle
