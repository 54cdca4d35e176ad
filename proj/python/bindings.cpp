// Python bindings for the core operations: cocycle algebra, spectral
// estimators, transfer-operator builds, and stationary-measure tools.
#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ablab/cocycle.hpp"
#include "ablab/measures.hpp"
#include "ablab/numberfield.hpp"
#include "ablab/spectrum.hpp"
#include "ablab/transferop.hpp"

namespace py = pybind11;
using namespace ablab;

namespace {

using MatList = std::vector<std::vector<double>>;

MatList mat_out(const cocycle::Mat2d& g) {
    return {{g.a, g.b}, {g.c, g.d}};
}

cocycle::Mat2d mat_in(const MatList& m) {
    if (m.size() != 2 || m[0].size() != 2 || m[1].size() != 2)
        throw std::invalid_argument("matrix must be 2x2");
    return {m[0][0], m[0][1], m[1][0], m[1][1]};
}

numberfield::AlgebraicNumber make_root(const std::vector<long long>& coeffs,
                                       const std::string& lo, const std::string& hi) {
    std::vector<numberfield::BigInt> c(coeffs.begin(), coeffs.end());
    return numberfield::real_root(std::move(c), numberfield::BigRat(lo),
                                  numberfield::BigRat(hi));
}

transferop::Variant variant_in(const std::string& s) {
    if (s == "plain") return transferop::Variant::plain;
    if (s == "unitary") return transferop::Variant::unitary;
    throw std::invalid_argument("variant must be 'plain' or 'unitary'");
}

transferop::Frame frame_in(const std::string& s) {
    if (s == "raw") return transferop::Frame::raw;
    if (s == "tilde") return transferop::Frame::tilde;
    throw std::invalid_argument("frame must be 'raw' or 'tilde'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Core operations of the Anderson-Bernoulli numerical laboratory";
    m.attr("__version__") = "0.1.0";

    py::class_<numberfield::AlgebraicNumber>(m, "AlgebraicNumber")
        .def_property_readonly("degree", &numberfield::AlgebraicNumber::degree)
        .def_property_readonly("float_value", &numberfield::AlgebraicNumber::float_value)
        .def_property_readonly("poly",
                               [](const numberfield::AlgebraicNumber& a) { return a.poly_string(); })
        .def_property_readonly("height",
                               [](const numberfield::AlgebraicNumber& a) { return a.height().str(); })
        .def("__repr__", [](const numberfield::AlgebraicNumber& a) {
            return "AlgebraicNumber(" + a.poly_string() + ")";
        });

    m.def("real_root", &make_root, py::arg("coeffs"), py::arg("lo"), py::arg("hi"),
          "Real algebraic number from ascending integer coefficients and an isolating "
          "interval given as rational strings");

    m.def("pisot_check", &numberfield::pisot_check, py::arg("alpha"));

    m.def(
        "hypothesis_check",
        [](const numberfield::AlgebraicNumber& a, double C) {
            auto h = numberfield::hypothesis_check(a, C);
            py::dict d;
            d["degree"] = h.degree;
            d["degree_ok"] = h.degree_ok;
            d["height"] = h.height.str();
            d["height_ok"] = h.height_ok;
            d["conjugate_ok"] = h.conjugate_ok;
            d["brenner_ok"] = h.brenner_ok;
            d["pisot"] = h.pisot;
            return d;
        },
        py::arg("alpha"), py::arg("C"));

    m.def(
        "diophantine_floor",
        [](const numberfield::AlgebraicNumber& a, int R, int ell) {
            auto f = numberfield::diophantine_floor(a, R, ell);
            py::dict d;
            d["mantissa"] = f.mantissa;
            d["exponent10"] = f.exponent;
            d["value"] = f.value;
            return d;
        },
        py::arg("alpha"), py::arg("R"), py::arg("ell"));

    m.def(
        "transfer_matrix",
        [](double E, double lambda, int sign) {
            return mat_out(cocycle::transfer_matrix(E, lambda, sign));
        },
        py::arg("E"), py::arg("lam"), py::arg("sign"));

    m.def(
        "parabolic_pair",
        [](double E, double lambda) {
            auto [h1, h2] = cocycle::parabolic_pair(E, lambda);
            return py::make_tuple(mat_out(h1), mat_out(h2));
        },
        py::arg("E"), py::arg("lam"));

    m.def(
        "fp_frame",
        [](double E, double lambda) {
            auto fr = cocycle::fp_frame(E, lambda);
            py::dict d;
            d["kappa"] = fr.kappa;
            d["S"] = mat_out(fr.S);
            d["S_inv"] = mat_out(fr.S_inv);
            d["g_plus_tilde"] = mat_out(fr.g_plus_tilde);
            d["g_minus_tilde"] = mat_out(fr.g_minus_tilde);
            d["cond"] = fr.cond;
            return d;
        },
        py::arg("E"), py::arg("lam"));

    m.def(
        "mobius_angle",
        [](const MatList& g, double x) { return cocycle::mobius_angle(mat_in(g), x); },
        py::arg("g"), py::arg("x"));
    m.def(
        "mobius_derivative",
        [](const MatList& g, double x) { return cocycle::mobius_derivative(mat_in(g), x); },
        py::arg("g"), py::arg("x"));

    m.def(
        "phi",
        [](double E, double lambda, double x) { return cocycle::log_norm_average(E, lambda, x); },
        py::arg("E"), py::arg("lam"), py::arg("x"),
        "Lyapunov integrand: signed average of log||g_pm(E) v_theta||");

    m.def(
        "freeness_certificate",
        [](const numberfield::AlgebraicNumber& a, const std::string& mu, int l_max, int threads) {
            auto mode = mu == "entry_lambda" ? cocycle::MuMode::entry_lambda
                                             : cocycle::MuMode::entry_two_lambda;
            auto cert = cocycle::freeness_certificate(a, mode, l_max, threads);
            py::dict d;
            d["status"] = cert.status == cocycle::FreenessCertificate::Status::free_up_to_length
                              ? "free_up_to_length"
                              : "collision_found";
            d["witness"] = cert.witness ? py::object(py::str(cert.witness->str()))
                                        : py::object(py::none());
            d["min_distance"] = cert.min_distance;
            d["floor_value"] = cert.floor.value;
            d["words_checked"] = cert.words_checked;
            return d;
        },
        py::arg("alpha"), py::arg("mu") = "entry_two_lambda", py::arg("l_max") = 6,
        py::arg("threads") = 1);

    m.def(
        "lyapunov_mc",
        [](double E, double lambda, long long steps, uint64_t seed) {
            auto est = spectrum::lyapunov_mc(E, lambda, steps, seed);
            return py::make_tuple(est.value, est.se);
        },
        py::arg("E"), py::arg("lam"), py::arg("steps"), py::arg("seed"));

    m.def(
        "ids_sturm",
        [](const std::vector<double>& energies, double lambda, int sites, int samples,
           uint64_t seed, int threads) {
            auto pts = spectrum::ids_sturm(energies, lambda, sites, samples, seed, threads);
            std::vector<py::tuple> out;
            out.reserve(pts.size());
            for (const auto& p : pts) out.push_back(py::make_tuple(p.E, p.N, p.se));
            return out;
        },
        py::arg("energies"), py::arg("lam"), py::arg("sites"), py::arg("samples"),
        py::arg("seed"), py::arg("threads") = 1);

    m.def(
        "thouless",
        [](const std::vector<std::pair<double, double>>& data, const std::string& dir) {
            auto d = dir == "N_to_L" ? spectrum::ThoulessDirection::N_to_L
                                     : spectrum::ThoulessDirection::L_to_N;
            return spectrum::thouless(data, d);
        },
        py::arg("data"), py::arg("direction"));

    m.def("halperin_alpha", &spectrum::halperin_alpha, py::arg("lam"));

    py::class_<transferop::OperatorMatrix>(m, "Operator")
        .def_readonly("n_max", &transferop::OperatorMatrix::n_max)
        .def_readonly("M", &transferop::OperatorMatrix::M)
        .def_readonly("E", &transferop::OperatorMatrix::E)
        .def_readonly("lam", &transferop::OperatorMatrix::lambda)
        .def("at", [](const transferop::OperatorMatrix& A, int n,
                      int np) { return A.at(n, np); })
        .def("__repr__", [](const transferop::OperatorMatrix& A) {
            return "Operator(n_max=" + std::to_string(A.n_max) +
                   ", M=" + std::to_string(A.M) + ")";
        });

    m.def(
        "build_operator",
        [](double E, double lambda, int n_max, int M, const std::string& variant,
           const std::string& frame, int threads) {
            return transferop::build_operator(E, lambda, n_max, M, variant_in(variant),
                                              frame_in(frame), threads);
        },
        py::arg("E"), py::arg("lam"), py::arg("n_max"), py::arg("M"),
        py::arg("variant") = "plain", py::arg("frame") = "raw", py::arg("threads") = 1);

    m.def(
        "restricted_norm",
        [](const transferop::OperatorMatrix& A, int K, uint64_t seed) {
            auto rn = transferop::restricted_norm(A, K, seed);
            py::dict d;
            d["value"] = rn.value;
            d["half_value"] = rn.half_value;
            d["iterations"] = rn.iterations;
            return d;
        },
        py::arg("A"), py::arg("K"), py::arg("seed") = uint64_t{0x5eed});

    m.def(
        "expander_average_norm",
        [](const numberfield::AlgebraicNumber& a, double tau, int K, int n_max, int M,
           int threads) {
            return transferop::expander_average_norm(a, tau, K, n_max, M, threads);
        },
        py::arg("alpha"), py::arg("tau"), py::arg("K"), py::arg("n_max"), py::arg("M"),
        py::arg("threads") = 1);

    m.def(
        "furstenberg_fixed_point",
        [](const transferop::OperatorMatrix& A) {
            auto nu = measures::furstenberg_fixed_point(A);
            py::dict d;
            std::vector<std::complex<double>> coeffs;
            for (int n = 0; n <= nu.fourier.n_max; ++n) coeffs.push_back(nu.fourier.at(n));
            d["coeffs"] = coeffs;
            d["residual"] = nu.stationarity_residual;
            d["iterations"] = nu.iterations;
            d["histogram"] = nu.histogram;
            return d;
        },
        py::arg("A"));

    m.def(
        "furstenberg_mc",
        [](double E, double lambda, long long n_samples, long long burn_in, uint64_t seed,
           int n_max) {
            auto nu = measures::furstenberg_mc(E, lambda, n_samples, burn_in, seed, n_max);
            py::dict d;
            std::vector<std::complex<double>> coeffs;
            for (int n = 0; n <= nu.fourier.n_max; ++n) coeffs.push_back(nu.fourier.at(n));
            d["coeffs"] = coeffs;
            d["histogram"] = nu.histogram;
            return d;
        },
        py::arg("E"), py::arg("lam"), py::arg("n_samples"), py::arg("burn_in"), py::arg("seed"),
        py::arg("n_max") = 64);

    m.def(
        "bernoulli_fourier",
        [](double lambda, double xi, int terms) {
            auto v = measures::bernoulli_fourier(lambda, xi, terms);
            return py::make_tuple(v.value, v.tail_bound, v.terms_used);
        },
        py::arg("lam"), py::arg("xi"), py::arg("terms") = 10000);

    m.def("pisot_nondecay_probe", &measures::pisot_nondecay_probe, py::arg("lam"),
          py::arg("k_max"));
}
