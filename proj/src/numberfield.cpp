#include "ablab/numberfield.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace ablab::numberfield {
namespace {

using Poly = std::vector<BigRat>;  // coefficient list, index = power

int sign_of(const BigRat& v) {
    if (v == 0) return 0;
    return v < 0 ? -1 : 1;
}

int degree_of(const Poly& p) {
    for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
        if (p[static_cast<size_t>(i)] != 0) return i;
    return -1;
}

void trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

BigRat eval(const Poly& p, const BigRat& x) {
    BigRat acc = 0;
    for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
        acc = acc * x + p[static_cast<size_t>(i)];
    return acc;
}

Poly derivative(const Poly& p) {
    Poly d;
    for (size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * BigInt(i));
    return d;
}

// Remainder of a by b (b nonzero), monic-free long division over Q.
Poly poly_rem(Poly a, const Poly& b) {
    int db = degree_of(b);
    trim(a);
    while (degree_of(a) >= db && db >= 0) {
        int da = degree_of(a);
        BigRat q = a[static_cast<size_t>(da)] / b[static_cast<size_t>(db)];
        for (int i = 0; i <= db; ++i)
            a[static_cast<size_t>(da - db + i)] -= q * b[static_cast<size_t>(i)];
        trim(a);
        if (a.empty()) break;
    }
    return a;
}

std::vector<Poly> sturm_chain(const Poly& p) {
    std::vector<Poly> chain;
    chain.push_back(p);
    Poly d = derivative(p);
    trim(d);
    if (!d.empty()) chain.push_back(d);
    while (chain.size() >= 2) {
        Poly r = poly_rem(chain[chain.size() - 2], chain.back());
        trim(r);
        if (r.empty()) break;
        for (auto& c : r) c = -c;
        chain.push_back(std::move(r));
    }
    return chain;
}

int sign_variations(const std::vector<Poly>& chain, const BigRat& x) {
    int var = 0, prev = 0;
    for (const auto& p : chain) {
        int s = sign_of(eval(p, x));
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++var;
        prev = s;
    }
    return var;
}

// Distinct real roots of squarefree p in (lo, hi], both endpoints nonroots.
int sturm_count(const std::vector<Poly>& chain, const BigRat& lo, const BigRat& hi) {
    return sign_variations(chain, lo) - sign_variations(chain, hi);
}

BigInt int_gcd(BigInt a, BigInt b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        BigInt t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// All divisors of |n| (positive), or empty when the factor search exceeds its
// work cap; n != 0.
std::vector<BigInt> divisors_of(BigInt n) {
    if (n < 0) n = -n;
    std::vector<std::pair<BigInt, int>> fac;
    BigInt p = 2;
    const BigInt trial_cap = 2'000'000;
    while (p * p <= n && p <= trial_cap) {
        if (n % p == 0) {
            int e = 0;
            while (n % p == 0) { n /= p; ++e; }
            fac.emplace_back(p, e);
        }
        p += (p == 2) ? 1 : 2;
    }
    if (n > 1) {
        if (n > trial_cap * trial_cap) return {};  // can't certify primality cheaply
        fac.emplace_back(n, 1);
    }
    std::vector<BigInt> divs{1};
    for (const auto& [q, e] : fac) {
        size_t base = divs.size();
        BigInt qe = 1;
        for (int k = 1; k <= e; ++k) {
            qe *= q;
            for (size_t i = 0; i < base; ++i) divs.push_back(divs[i] * qe);
        }
        if (divs.size() > 20000) return {};
    }
    return divs;
}

// Exact reducibility decision over Q for primitive integer p of degree 2..4.
// Returns 1 = reducible, 0 = irreducible, -1 = undecided (work cap hit).
int reducible_check(const std::vector<BigInt>& a) {
    int d = static_cast<int>(a.size()) - 1;
    if (a[0] == 0) return 1;  // x divides
    auto P = divisors_of(a[0]);
    auto Q = divisors_of(a.back());
    if (P.empty() || Q.empty()) return -1;
    Poly pr(a.size());
    for (size_t i = 0; i < a.size(); ++i) pr[i] = BigRat(a[i]);
    for (const auto& p : P)
        for (const auto& q : Q) {
            if (int_gcd(p, q) != 1) continue;
            if (eval(pr, BigRat(p, q)) == 0 || eval(pr, BigRat(-p, q)) == 0) return 1;
        }
    if (d < 4) return 0;
    // degree 4: search integer quadratic factors (p x^2 + q x + s)(r x^2 + t x + u)
    BigInt H = 0;
    for (const auto& c : a) H = std::max(H, BigInt(abs(c)));
    auto Pd = divisors_of(a[4]);
    auto Sd = divisors_of(a[0]);
    for (const auto& p : Pd) {
        BigInt r = a[4] / p;
        for (const auto& s0 : Sd)
            for (int ssign = 0; ssign < 2; ++ssign) {
                BigInt s = ssign ? -s0 : s0;
                BigInt u = a[0] / s;
                BigInt det = r * s - p * u;
                auto check = [&](const BigInt& qc, const BigInt& tc) {
                    return p * tc + qc * r == a[3] && qc * u + s * tc == a[1] &&
                           p * u + qc * tc + s * r == a[2];
                };
                if (det != 0) {
                    BigInt qn = a[3] * s - a[1] * p, tn = a[1] * r - a[3] * u;
                    if (qn % det == 0 && tn % det == 0 && check(qn / det, tn / det)) return 1;
                } else {
                    BigInt bound = 2 * p * (1 + H);
                    if (bound > 1'000'000) return -1;
                    for (BigInt qc = -bound; qc <= bound; ++qc) {
                        BigInt tnum = a[3] - qc * r;
                        if (tnum % p != 0) continue;
                        if (check(qc, tnum / p)) return 1;
                    }
                }
            }
    }
    return 0;
}

double tol_residual(int d, double H, double absroot) {
    return 1e-8 * (d + 1) * H * std::pow(std::max(1.0, absroot), d);
}

std::complex<double> horner(const std::vector<BigInt>& a, std::complex<double> z) {
    std::complex<double> acc = 0;
    for (int i = static_cast<int>(a.size()) - 1; i >= 0; --i)
        acc = acc * z + a[static_cast<size_t>(i)].convert_to<double>();
    return acc;
}

}  // namespace

BigInt AlgebraicNumber::height() const {
    BigInt h = 0;
    for (const auto& c : coeffs_) h = std::max(h, BigInt(abs(c)));
    return h;
}

BigRat AlgebraicNumber::rational_value() const {
    if (degree() != 1) throw std::logic_error("rational_value: degree != 1");
    return BigRat(-coeffs_[0], coeffs_[1]);
}

std::string AlgebraicNumber::poly_string() const {
    std::ostringstream os;
    bool first = true;
    for (int i = degree(); i >= 0; --i) {
        const BigInt& c = coeffs_[static_cast<size_t>(i)];
        if (c == 0) continue;
        if (!first) os << (c > 0 ? "+" : "-");
        else if (c < 0) os << "-";
        BigInt ac = abs(c);
        if (ac != 1 || i == 0) os << ac;
        if (i >= 1) os << "x";
        if (i >= 2) os << "^" << i;
        first = false;
    }
    return os.str();
}

AlgebraicNumber real_root(std::vector<BigInt> coeffs, BigRat lo, BigRat hi) {
    while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
    if (coeffs.empty()) throw NoRootInInterval("polynomial is zero");
    if (coeffs.size() == 1) throw NoRootInInterval("constant polynomial has no roots");
    if (!(lo < hi)) throw std::invalid_argument("real_root: need lo < hi");

    BigInt content = 0;
    for (const auto& c : coeffs) content = int_gcd(content, c);
    for (auto& c : coeffs) c /= content;
    if (coeffs.back() < 0)
        for (auto& c : coeffs) c = -c;

    int d = static_cast<int>(coeffs.size()) - 1;
    Poly p(coeffs.size());
    for (size_t i = 0; i < coeffs.size(); ++i) p[i] = BigRat(coeffs[i]);

    bool irr_verified = false;
    if (d >= 2) {
        // squarefree test: gcd(P, P') constant <=> no repeated factor
        Poly g = p, h = derivative(p);
        trim(g); trim(h);
        while (degree_of(h) >= 1) {
            Poly r = poly_rem(g, h);
            g = std::move(h);
            h = std::move(r);
            trim(h);
        }
        if (h.empty() && degree_of(g) >= 1)
            throw ReduciblePolynomial("repeated factor (gcd(P, P') nonconstant)");
        if (d <= 4) {
            int rc = reducible_check(coeffs);
            if (rc == 1) throw ReduciblePolynomial("integer factorization exists");
            irr_verified = (rc == 0);
        }
    } else {
        irr_verified = true;
    }

    if (eval(p, lo) == 0 || eval(p, hi) == 0)
        throw NoRootInInterval("interval endpoint is a root; shrink the interval");
    auto chain = sturm_chain(p);
    int count = sturm_count(chain, lo, hi);
    if (count == 0) throw NoRootInInterval("Sturm count is 0 in the interval");
    if (count > 1) throw MultipleRootsInInterval("Sturm count is " + std::to_string(count));

    // bisection to width < 1e-12, keeping a strict sign change
    const BigRat target(BigInt(1), BigInt(1000000000000LL));
    int slo = sign_of(eval(p, lo));
    while (hi - lo >= target) {
        BigRat mid = (lo + hi) / 2;
        BigRat v = eval(p, mid);
        if (v == 0) {  // exact rational root (degree-1 inputs)
            BigRat w = target / 4;
            lo = mid - w;
            hi = mid + w;
            break;
        }
        if (sign_of(v) == slo) lo = mid;
        else hi = mid;
    }

    AlgebraicNumber out;
    out.coeffs_ = std::move(coeffs);
    out.lo_ = lo;
    out.hi_ = hi;
    // Polish the midpoint with Newton steps in double so float_value() is
    // accurate to machine precision, not just to the interval width.
    double x = (BigRat((lo + hi) / 2)).convert_to<double>();
    double flo = lo.convert_to<double>(), fhi = hi.convert_to<double>();
    for (int it = 0; it < 8; ++it) {
        double v = 0, dv = 0;
        for (size_t k = out.coeffs_.size(); k-- > 0;) {
            dv = dv * x + v;
            v = v * x + out.coeffs_[k].convert_to<double>();
        }
        if (dv == 0) break;
        double next = x - v / dv;
        if (!(next >= flo - 1e-9 && next <= fhi + 1e-9)) break;
        if (next == x) break;
        x = next;
    }
    out.float_value_ = x;
    out.irreducibility_verified_ = irr_verified;
    return out;
}

AlgebraicNumber rational_number(const BigRat& v) {
    BigInt num = numerator(v), den = denominator(v);
    BigRat w(1, 1000000);
    return real_root({-num, den}, v - w, v + w);
}

std::vector<std::complex<double>> conjugates(const AlgebraicNumber& alpha) {
    int d = alpha.degree();
    const auto& a = alpha.coeffs();
    if (d == 1)
        return {std::complex<double>(BigRat(-a[0], a[1]).convert_to<double>(), 0.0)};

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(d, d);
    double ad = a[static_cast<size_t>(d)].convert_to<double>();
    for (int i = 0; i < d; ++i) {
        if (i + 1 < d) comp(i + 1, i) = 1.0;
        comp(i, d - 1) = -a[static_cast<size_t>(i)].convert_to<double>() / ad;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp);

    double H = alpha.height().convert_to<double>();
    std::vector<BigInt> dp;  // derivative coefficients
    for (int i = 1; i <= d; ++i) dp.push_back(a[static_cast<size_t>(i)] * i);

    std::vector<std::complex<double>> roots;
    for (int i = 0; i < d; ++i) {
        std::complex<double> z = es.eigenvalues()(i);
        bool ok = false;
        for (int it = 0; it < 100; ++it) {
            std::complex<double> pv = horner(a, z);
            if (std::abs(pv) <= tol_residual(d, H, std::abs(z))) { ok = true; break; }
            std::complex<double> dv = horner(dp, z);
            if (dv == std::complex<double>(0, 0)) break;
            z -= pv / dv;
        }
        if (!ok && std::abs(horner(a, z)) > tol_residual(d, H, std::abs(z)))
            throw ConvergenceFailure("Newton polish failed for a conjugate");
        roots.push_back(z);
    }
    std::sort(roots.begin(), roots.end(), [](const auto& x, const auto& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return roots;
}

// ---- FieldElement ----

namespace {

// Reduces a coordinate vector of length up to 2d-1 modulo the minimal
// polynomial, in place, returning the canonical length-d vector.
std::vector<BigRat> reduce_mod(const AlgebraicNumber& f, std::vector<BigRat> c) {
    int d = f.degree();
    const auto& a = f.coeffs();
    BigRat ad(a[static_cast<size_t>(d)]);
    for (int k = static_cast<int>(c.size()) - 1; k >= d; --k) {
        BigRat q = c[static_cast<size_t>(k)] / ad;
        if (q != 0)
            for (int j = 0; j < d; ++j)
                c[static_cast<size_t>(k - d + j)] -= q * BigRat(a[static_cast<size_t>(j)]);
        c[static_cast<size_t>(k)] = 0;
    }
    c.resize(static_cast<size_t>(d));
    return c;
}

}  // namespace

FieldElement FieldElement::zero(const Field& f) {
    return FieldElement(f, std::vector<BigRat>(static_cast<size_t>(f->degree()), BigRat(0)));
}

FieldElement FieldElement::one(const Field& f) {
    auto c = std::vector<BigRat>(static_cast<size_t>(f->degree()), BigRat(0));
    c[0] = 1;
    return FieldElement(f, std::move(c));
}

FieldElement FieldElement::generator(const Field& f) {
    int d = f->degree();
    std::vector<BigRat> c(static_cast<size_t>(d), BigRat(0));
    if (d == 1) c[0] = f->rational_value();
    else c[1] = 1;
    return FieldElement(f, std::move(c));
}

FieldElement FieldElement::rational(const Field& f, const BigRat& v) {
    auto c = std::vector<BigRat>(static_cast<size_t>(f->degree()), BigRat(0));
    c[0] = v;
    return FieldElement(f, std::move(c));
}

bool FieldElement::is_zero() const {
    for (const auto& c : coords_)
        if (c != 0) return false;
    return true;
}

FieldElement FieldElement::operator+(const FieldElement& o) const {
    auto c = coords_;
    for (size_t i = 0; i < c.size(); ++i) c[i] += o.coords_[i];
    return FieldElement(field_, std::move(c));
}

FieldElement FieldElement::operator-(const FieldElement& o) const {
    auto c = coords_;
    for (size_t i = 0; i < c.size(); ++i) c[i] -= o.coords_[i];
    return FieldElement(field_, std::move(c));
}

FieldElement FieldElement::operator-() const {
    auto c = coords_;
    for (auto& v : c) v = -v;
    return FieldElement(field_, std::move(c));
}

FieldElement FieldElement::operator*(const FieldElement& o) const {
    size_t d = coords_.size();
    std::vector<BigRat> prod(2 * d - 1, BigRat(0));
    for (size_t i = 0; i < d; ++i) {
        if (coords_[i] == 0) continue;
        for (size_t j = 0; j < d; ++j)
            if (o.coords_[j] != 0) prod[i + j] += coords_[i] * o.coords_[j];
    }
    return FieldElement(field_, reduce_mod(*field_, std::move(prod)));
}

bool FieldElement::operator==(const FieldElement& o) const { return coords_ == o.coords_; }

FieldElement FieldElement::inv() const {
    if (is_zero()) throw DivisionByZero("inverse of zero field element");
    int d = field_->degree();
    if (d == 1) {
        std::vector<BigRat> c{BigRat(1) / coords_[0]};
        return FieldElement(field_, std::move(c));
    }
    // extended Euclid: u*self + v*P = gcd = const
    Poly r0(field_->coeffs().size());
    for (size_t i = 0; i < r0.size(); ++i) r0[i] = BigRat(field_->coeffs()[i]);
    Poly r1(coords_.begin(), coords_.end());
    trim(r1);
    Poly s0{BigRat(0)}, s1{BigRat(1)};  // coefficients of self
    while (degree_of(r1) > 0) {
        // quotient of r0 by r1
        Poly q(static_cast<size_t>(degree_of(r0) - degree_of(r1) + 1), BigRat(0));
        Poly rem = r0;
        int db = degree_of(r1);
        while (degree_of(rem) >= db) {
            int da = degree_of(rem);
            BigRat qc = rem[static_cast<size_t>(da)] / r1[static_cast<size_t>(db)];
            q[static_cast<size_t>(da - db)] = qc;
            for (int i = 0; i <= db; ++i)
                rem[static_cast<size_t>(da - db + i)] -= qc * r1[static_cast<size_t>(i)];
            trim(rem);
            if (rem.empty()) break;
        }
        // s_new = s0 - q*s1
        Poly snew = s0;
        snew.resize(std::max(snew.size(), q.size() + s1.size()), BigRat(0));
        for (size_t i = 0; i < q.size(); ++i)
            if (q[i] != 0)
                for (size_t j = 0; j < s1.size(); ++j) snew[i + j] -= q[i] * s1[j];
        r0 = std::move(r1);
        r1 = std::move(rem);
        s0 = std::move(s1);
        s1 = std::move(snew);
        trim(r1);
        if (r1.empty()) throw DivisionByZero("element shares a factor with P (not a field?)");
    }
    BigRat g = r1[0];
    std::vector<BigRat> c(static_cast<size_t>(d), BigRat(0));
    for (size_t i = 0; i < s1.size() && i < c.size(); ++i) c[i] = s1[i] / g;
    // s1 may exceed degree d-1 formally; reduce to canonical form
    if (s1.size() > static_cast<size_t>(d)) {
        std::vector<BigRat> full(s1.begin(), s1.end());
        for (auto& v : full) v /= g;
        full.resize(std::max(full.size(), static_cast<size_t>(2 * d - 1)), BigRat(0));
        c = reduce_mod(*field_, std::move(full));
    }
    return FieldElement(field_, std::move(c));
}

double FieldElement::to_double() const {
    double lam = field_->float_value(), acc = 0;
    for (int i = static_cast<int>(coords_.size()) - 1; i >= 0; --i)
        acc = acc * lam + coords_[static_cast<size_t>(i)].convert_to<double>();
    return acc;
}

BigRat FieldElement::norm() const {
    int d = field_->degree();
    if (d == 1) return coords_[0];
    // multiplication matrix: column j = coords of self * lambda^j
    std::vector<std::vector<BigRat>> m(static_cast<size_t>(d));
    FieldElement cur = *this;
    FieldElement lam = FieldElement::generator(field_);
    for (int j = 0; j < d; ++j) {
        m[static_cast<size_t>(j)] = cur.coords();
        if (j + 1 < d) cur = cur * lam;
    }
    // det by fraction-full Gaussian elimination (columns stored in m)
    BigRat det = 1;
    for (int col = 0; col < d; ++col) {
        int piv = -1;
        for (int row = col; row < d; ++row)
            if (m[static_cast<size_t>(col)][static_cast<size_t>(row)] != 0) { piv = row; break; }
        if (piv < 0) return BigRat(0);
        if (piv != col) {
            for (int j = col; j < d; ++j)
                std::swap(m[static_cast<size_t>(j)][static_cast<size_t>(piv)],
                          m[static_cast<size_t>(j)][static_cast<size_t>(col)]);
            det = -det;
        }
        BigRat pv = m[static_cast<size_t>(col)][static_cast<size_t>(col)];
        det *= pv;
        for (int row = col + 1; row < d; ++row) {
            BigRat f = m[static_cast<size_t>(col)][static_cast<size_t>(row)] / pv;
            if (f == 0) continue;
            for (int j = col; j < d; ++j)
                m[static_cast<size_t>(j)][static_cast<size_t>(row)] -=
                    f * m[static_cast<size_t>(j)][static_cast<size_t>(col)];
        }
    }
    return det;
}

FieldElement field_ops(const FieldElement& a, const FieldElement& b, FieldOp op) {
    switch (op) {
        case FieldOp::add: return a + b;
        case FieldOp::sub: return a - b;
        case FieldOp::mul: return a * b;
        case FieldOp::inv: return a.inv();
    }
    throw std::logic_error("unreachable");
}

BigInt integrality_scale(const AlgebraicNumber& alpha) { return alpha.leading(); }

std::vector<BigInt> monic_scaled_coeffs(const AlgebraicNumber& alpha) {
    // Q(y) = a_d^{d-1} P(y / a_d): coefficient of y^j is a_j a_d^{d-1-j}
    int d = alpha.degree();
    const auto& a = alpha.coeffs();
    std::vector<BigInt> q(a.size());
    q[static_cast<size_t>(d)] = 1;
    for (int j = 0; j < d; ++j) {
        BigInt pw = 1;
        for (int k = 0; k < d - 1 - j; ++k) pw *= a.back();
        q[static_cast<size_t>(j)] = a[static_cast<size_t>(j)] * pw;
    }
    return q;
}

HypothesisReport hypothesis_check(const AlgebraicNumber& alpha, double C) {
    double lam = alpha.float_value();
    if (!(lam > 0 && lam < 1))
        throw std::invalid_argument("hypothesis_check needs 0 < lambda < 1");
    HypothesisReport rep;
    rep.degree = alpha.degree();
    rep.C = C;
    rep.degree_ok = rep.degree < C;
    rep.height = alpha.height();
    rep.height_bound = std::pow(1.0 / lam, C);
    rep.height_ok = rep.height.convert_to<double>() < rep.height_bound;

    auto roots = conjugates(alpha);
    // exclude the root this AlgebraicNumber designates
    size_t self = 0;
    double best = 1e300;
    for (size_t i = 0; i < roots.size(); ++i) {
        double dist = std::abs(roots[i] - std::complex<double>(lam, 0));
        if (dist < best) { best = dist; self = i; }
    }
    rep.max_other_conjugate_mod = 0;
    for (size_t i = 0; i < roots.size(); ++i)
        if (i != self)
            rep.max_other_conjugate_mod = std::max(rep.max_other_conjugate_mod, std::abs(roots[i]));
    rep.conjugate_ok = rep.max_other_conjugate_mod >= 1.0;

    rep.max_brenner_mod = 0;
    for (const auto& r : roots) rep.max_brenner_mod = std::max(rep.max_brenner_mod, 2 * std::abs(r));
    rep.brenner_ok = rep.max_brenner_mod >= 2.0;

    rep.pisot = pisot_check(alpha);
    rep.irreducibility_verified = alpha.irreducibility_verified();
    return rep;
}

bool pisot_check(const AlgebraicNumber& alpha) {
    double lam = alpha.float_value();
    if (!(lam > 0 && lam < 1))
        throw std::invalid_argument("pisot_check needs 0 < lambda < 1");
    if (abs(alpha.coeffs()[0]) != 1) return false;  // 1/lambda not an algebraic integer
    if (alpha.degree() == 1) return true;           // 1/lambda is an integer >= 2
    auto roots = conjugates(alpha);
    size_t self = 0;
    double best = 1e300;
    for (size_t i = 0; i < roots.size(); ++i) {
        double dist = std::abs(roots[i] - std::complex<double>(lam, 0));
        if (dist < best) { best = dist; self = i; }
    }
    for (size_t i = 0; i < roots.size(); ++i)
        if (i != self && std::abs(roots[i]) <= 1.0 + 1e-9) return false;
    return true;
}

DioFloor diophantine_floor(const AlgebraicNumber& alpha, int R, int ell) {
    if (R < 1 || ell < 1) throw std::invalid_argument("diophantine_floor needs R, ell >= 1");
    int d = alpha.degree();
    long D = 2L * ell;
    BigInt N = integrality_scale(alpha);
    BigInt H = alpha.height();
    BigInt base = BigInt(2 + R) * (1 + H);
    long e2 = 2L * ell * (d - 1);

    DioFloor out;
    BigInt denom = 1;
    for (long i = 0; i < static_cast<long>(d) * D; ++i) denom *= N;
    for (long i = 0; i < e2; ++i) denom *= base;
    out.exact = BigRat(BigInt(1), denom);

    double lg = -(static_cast<double>(d) * static_cast<double>(D) *
                      std::log10(N.convert_to<double>()) +
                  static_cast<double>(e2) * std::log10(base.convert_to<double>()));
    out.exponent = static_cast<long>(std::floor(lg));
    out.mantissa = std::pow(10.0, lg - static_cast<double>(out.exponent));
    out.value = std::pow(10.0, lg);
    return out;
}

}  // namespace ablab::numberfield
