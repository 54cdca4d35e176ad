// Exact arithmetic in Q(lambda) and the arithmetic hypothesis checks on the
// coupling: minimal polynomials with isolated real roots, conjugates, field
// operations, Pisot test, and the certified diophantine floor.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ablab::numberfield {

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

struct NoRootInInterval : std::runtime_error { using std::runtime_error::runtime_error; };
struct MultipleRootsInInterval : std::runtime_error { using std::runtime_error::runtime_error; };
struct ReduciblePolynomial : std::runtime_error { using std::runtime_error::runtime_error; };
struct ConvergenceFailure : std::runtime_error { using std::runtime_error::runtime_error; };
struct DivisionByZero : std::runtime_error { using std::runtime_error::runtime_error; };

/// A real algebraic number: primitive integer polynomial (content 1, leading
/// coefficient positive) plus a rational isolating interval containing exactly
/// one real root. Immutable; safe to share across threads.
class AlgebraicNumber {
public:
    const std::vector<BigInt>& coeffs() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const BigRat& lo() const { return lo_; }
    const BigRat& hi() const { return hi_; }
    double float_value() const { return float_value_; }
    BigInt height() const;
    const BigInt& leading() const { return coeffs_.back(); }
    bool irreducibility_verified() const { return irreducibility_verified_; }

    bool is_rational() const { return degree() == 1; }
    BigRat rational_value() const;  // degree 1 only

    /// Polynomial text like "x^2+4x-1", for reports.
    std::string poly_string() const;

private:
    AlgebraicNumber() = default;
    friend AlgebraicNumber real_root(std::vector<BigInt>, BigRat, BigRat);

    std::vector<BigInt> coeffs_;
    BigRat lo_, hi_;
    double float_value_ = 0.0;
    bool irreducibility_verified_ = false;
};

/// Validates and normalizes the polynomial, verifies the isolating interval by
/// Sturm count, rejects reducible inputs (exactly for degree <= 4), and
/// bisects until the interval width is below 1e-12.
AlgebraicNumber real_root(std::vector<BigInt> coeffs, BigRat lo, BigRat hi);

/// Degree-1 convenience: the rational value v as an AlgebraicNumber.
AlgebraicNumber rational_number(const BigRat& v);

/// All d roots of the minimal polynomial as complex doubles: companion-matrix
/// eigenvalues polished by Newton steps until
/// |P(root)| <= 1e-8 (d+1) H max(1,|root|)^d.
std::vector<std::complex<double>> conjugates(const AlgebraicNumber& alpha);

/// An element of Q(lambda) in the power basis 1, lambda, ..., lambda^{d-1}.
/// Carries a shared handle to its field; all arithmetic is exact.
class FieldElement {
public:
    using Field = std::shared_ptr<const AlgebraicNumber>;

    static FieldElement zero(const Field& f);
    static FieldElement one(const Field& f);
    static FieldElement generator(const Field& f);  // lambda itself
    static FieldElement rational(const Field& f, const BigRat& v);

    const std::vector<BigRat>& coords() const { return coords_; }
    const Field& field() const { return field_; }
    bool is_zero() const;

    FieldElement operator+(const FieldElement& o) const;
    FieldElement operator-(const FieldElement& o) const;
    FieldElement operator*(const FieldElement& o) const;
    FieldElement operator-() const;
    FieldElement inv() const;  // throws DivisionByZero on zero
    bool operator==(const FieldElement& o) const;

    double to_double() const;  // diagnostic only

    /// Norm from Q(lambda) to Q: determinant of the multiplication-by-this
    /// matrix in the power basis. Zero iff the element is zero.
    BigRat norm() const;

private:
    FieldElement(Field f, std::vector<BigRat> c) : field_(std::move(f)), coords_(std::move(c)) {}
    Field field_;
    std::vector<BigRat> coords_;
};

enum class FieldOp { add, sub, mul, inv };
FieldElement field_ops(const FieldElement& a, const FieldElement& b, FieldOp op);

/// N = leading coefficient; N*lambda is an algebraic integer (monic integer
/// minimal polynomial), with N <= H.
BigInt integrality_scale(const AlgebraicNumber& alpha);

/// Coefficients of the monic integer polynomial satisfied by N*lambda.
std::vector<BigInt> monic_scaled_coeffs(const AlgebraicNumber& alpha);

struct HypothesisReport {
    bool degree_ok = false;        // d < C
    int degree = 0;
    double C = 0;
    bool height_ok = false;        // H < (1/lambda)^C
    BigInt height;
    double height_bound = 0;
    bool conjugate_ok = false;     // some other conjugate has modulus >= 1
    double max_other_conjugate_mod = 0;
    bool brenner_ok = false;       // some conjugate of 2*lambda has modulus >= 2
    double max_brenner_mod = 0;
    bool pisot = false;
    bool irreducibility_verified = false;
};

/// Flags are pure functions of (alpha, C). Requires 0 < float_value < 1.
HypothesisReport hypothesis_check(const AlgebraicNumber& alpha, double C);

/// True iff 1/lambda is a Pisot number: |a_0| = 1 (so 1/lambda is an algebraic
/// integer) and every other conjugate of lambda has modulus > 1, i.e. every
/// other conjugate of 1/lambda lies strictly inside the unit circle. A margin
/// of 1e-9 guards against calling a unit-modulus conjugate "inside".
bool pisot_check(const AlgebraicNumber& alpha);

struct DioFloor {
    double mantissa = 0;   // in [1, 10)
    long exponent = 0;     // floor = mantissa * 10^exponent
    double value = 0;      // double approximation (may underflow to 0)
    BigRat exact;          // the bound as an exact rational
};

/// The certified lower bound N^{-dD} [(2+R)(1+H)]^{-2l(d-1)} with D = 2l,
/// N = integrality_scale, H = height; computed in log space.
DioFloor diophantine_floor(const AlgebraicNumber& alpha, int R, int ell);

}  // namespace ablab::numberfield
