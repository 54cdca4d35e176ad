// SL2 matrices over doubles or field elements, transfer cocycles, the
// rotation-frame conjugation, the projective circle action, word enumeration,
// and exact freeness certification.
#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ablab/numberfield.hpp"

namespace ablab::cocycle {

using numberfield::AlgebraicNumber;
using numberfield::BigInt;
using numberfield::BigRat;
using numberfield::DioFloor;
using numberfield::FieldElement;

struct IdentityMismatch : std::runtime_error { using std::runtime_error::runtime_error; };
struct EnergyOutOfRange : std::runtime_error { using std::runtime_error::runtime_error; };
struct LengthCapExceeded : std::runtime_error { using std::runtime_error::runtime_error; };
struct NormBoundViolated : std::runtime_error { using std::runtime_error::runtime_error; };

/// Unit-determinant 2x2 matrix over a scalar domain.
template <class T>
struct Mat2 {
    T a, b, c, d;

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    /// Adjugate; the inverse when det = 1.
    Mat2 inverse_unimodular() const { return {d, -b, -c, a}; }
    T det() const { return a * d - b * c; }
    bool operator==(const Mat2& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
};

using Mat2d = Mat2<double>;
using Mat2f = Mat2<FieldElement>;

inline Mat2d mat2_identity() { return {1, 0, 0, 1}; }
Mat2f mat2_identity(const FieldElement::Field& f);

double frobenius_norm(const Mat2d& g);
/// Largest singular value, closed form for 2x2.
double spectral_norm(const Mat2d& g);
double max_norm(const Mat2d& g);

/// x in [0,1) parametrizes the line at angle theta = pi*x.
struct ProjectivePoint {
    double x;
    explicit ProjectivePoint(double v);
};

/// [[E +- lambda, -1], [1, 0]].
Mat2d transfer_matrix(double E, double lambda, int sign);
Mat2f transfer_matrix(const BigRat& E, const FieldElement::Field& field, int sign);

/// h1 = g+ g-^{-1}, h2 = g+^{-1} g-; verified against [[1,2l],[0,1]] and
/// [[1,0],[2l,1]] (exact in the field domain, 1e-12 in doubles).
std::pair<Mat2d, Mat2d> parabolic_pair(double E, double lambda);
std::pair<Mat2f, Mat2f> parabolic_pair(const BigRat& E, const FieldElement::Field& field);

/// Rotation frame at energy E = 2 cos kappa: S g+- S^{-1} is a rotation by
/// kappa plus a rank-one O(lambda) perturbation.
struct FPFrame {
    double E = 0;
    double kappa = 0;
    Mat2d S{1, 0, 0, 1}, S_inv{1, 0, 0, 1};
    Mat2d g_plus_tilde{1, 0, 0, 1}, g_minus_tilde{1, 0, 0, 1};
    double cond = 1;  // ||S|| * ||S^{-1}||
};

/// Requires |E| < 2; verifies the closed form entrywise to 1e-12.
FPFrame fp_frame(double E, double lambda);

/// Projective action x' = tau_g(pi x)/pi mod 1 via atan2; wrap point at x = 1.
ProjectivePoint mobius_angle(const Mat2d& g, ProjectivePoint p);
double mobius_angle(const Mat2d& g, double x);

/// tau_g'(theta) = 1 / ((a cos + b sin)^2 + (c cos + d sin)^2); satisfies
/// ||g||^{-2} <= tau' <= ||g||^2.
double mobius_derivative(const Mat2d& g, ProjectivePoint p);
double mobius_derivative(const Mat2d& g, double x);

/// Average over the sign of log||g_pm(E) v_theta||; the Lyapunov integrand.
double log_norm_average(double E, double lambda, double x);

enum class Letter : uint8_t { A, Ainv, B, Binv };
Letter letter_inverse(Letter l);

struct Word {
    std::vector<Letter> letters;
    bool reduced() const;
    size_t length() const { return letters.size(); }
    std::string str() const;  // e.g. "A B^-1 A"
};

/// Visits every reduced word of length 1..l_max in depth-first order,
/// restricted to those starting with `first` when given. The callback sees a
/// reference to the enumerator's scratch word.
void for_each_reduced_word(int l_max, const std::function<void(const Word&)>& visit,
                           std::optional<Letter> first = std::nullopt);

/// Materialized list; guarded by the l <= 14 cap (LengthCapExceeded).
std::vector<Word> reduced_words(int l_max);

enum class MuMode { entry_lambda, entry_two_lambda };

struct FreenessCertificate {
    std::string lambda_poly;
    std::vector<BigInt> lambda_coeffs;
    MuMode mu_entry = MuMode::entry_two_lambda;
    int max_length = 0;
    enum class Status { free_up_to_length, collision_found } status = Status::free_up_to_length;
    std::optional<Word> witness;
    double min_distance = 0;  // double view of the exact bound below
    BigRat min_distance_exact;
    DioFloor floor;  // diophantine floor at R = 1, l = max_length
    uint64_t words_checked = 0;
};

/// Exact projective freeness search over the parabolic pair with entry mu
/// (lambda or 2*lambda): every reduced word of length <= l_max is evaluated in
/// Q(lambda); a word equal to +-identity is a collision; otherwise the
/// certificate carries an exact rational lower bound on min ||w - 1||_inf via
/// conjugate products. l_max <= 12.
FreenessCertificate freeness_certificate(const AlgebraicNumber& alpha, MuMode mu_mode,
                                         int l_max, int threads = 1);

/// g_r = [[1, r l],[0,1]] [[1,0],[r l,1]] for r = 1..R, R = floor(|l|^{-tau});
/// each must satisfy ||1 - g_r|| < sqrt(l) (NormBoundViolated otherwise).
/// lambda = 0 degenerates to the single identity matrix.
std::vector<Mat2d> expander_family(const AlgebraicNumber& alpha, double tau);

}  // namespace ablab::cocycle
