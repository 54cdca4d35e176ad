#include "ablab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <CLI11.hpp>

#include "ablab/cocycle.hpp"
#include "ablab/measures.hpp"
#include "ablab/rng.hpp"
#include "ablab/spectrum.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ablab::runner {

namespace {

struct StageTimer {
    RunReport& rep;
    std::string name;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    StageTimer(RunReport& r, std::string n) : rep(r), name(std::move(n)) {}
    ~StageTimer() {
        double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep.timings.emplace_back(name, s);
    }
};

uint64_t seed_for(RunReport& rep, uint64_t master, const std::string& purpose, uint64_t idx) {
    uint64_t s = derive_seed(master, purpose, idx);
    rep.seed_provenance.emplace_back(purpose + "[" + std::to_string(idx) + "]", s);
    return s;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("short write to " + path);
}

void write_json_file(RunReport& rep, const std::string& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
    rep.artifacts.push_back(path);
}

json rat_to_json(const numberfield::BigRat& r) { return r.str(); }

numberfield::BigRat rat_from_json(const json& j, const std::string& field) {
    try {
        if (j.is_string()) return numberfield::BigRat(j.get<std::string>());
        if (j.is_number_integer()) return numberfield::BigRat(j.get<long long>());
        if (j.is_number_float()) return numberfield::BigRat(j.get<double>());
    } catch (const std::exception& e) {
        throw ConfigInvalid(field, std::string("bad rational: ") + e.what());
    }
    throw ConfigInvalid(field, "expected a number or a \"p/q\" string");
}

json bigint_to_json(const numberfield::BigInt& v) {
    static const numberfield::BigInt lim = numberfield::BigInt(1) << 53;
    if (v < lim && v > -lim) return static_cast<long long>(v);
    return v.str();
}

numberfield::BigInt bigint_from_json(const json& j, const std::string& field) {
    try {
        if (j.is_number_integer()) return numberfield::BigInt(j.get<long long>());
        if (j.is_string()) return numberfield::BigInt(j.get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigInvalid(field, std::string("bad integer: ") + e.what());
    }
    throw ConfigInvalid(field, "expected an integer or integer string");
}

template <typename T>
T get_field(const json& j, const char* key, T dflt) {
    if (!j.contains(key)) return dflt;
    try {
        return j.at(key).get<T>();
    } catch (const std::exception& e) {
        throw ConfigInvalid(key, e.what());
    }
}

// Linear interpolation over an increasing (x, y) table.
double interp(const std::vector<std::pair<double, double>>& tab, double x) {
    if (tab.empty()) throw std::invalid_argument("empty interpolation table");
    if (x <= tab.front().first) return tab.front().second;
    if (x >= tab.back().first) return tab.back().second;
    size_t j = 0;
    while (j + 2 < tab.size() && tab[j + 1].first < x) ++j;
    double w = (x - tab[j].first) / (tab[j + 1].first - tab[j].first);
    return (1 - w) * tab[j].second + w * tab[j + 1].second;
}

fourier::FourierVector expand_phi(double E, double lambda, int n_max, int M) {
    std::vector<fourier::cdouble> samples(static_cast<size_t>(M));
    for (int m = 0; m < M; ++m)
        samples[static_cast<size_t>(m)] =
            cocycle::log_norm_average(E, lambda, static_cast<double>(m) / M);
    return fourier::from_samples(samples, n_max);
}

}  // namespace

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::string text;
    for (size_t i = 0; i < header.size(); ++i) {
        if (i) text += ',';
        text += header[i];
    }
    text += '\n';
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) text += ',';
            text += row[i];
        }
        text += '\n';
    }
    write_text(path, text);
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigInvalid("json", e.what());
    }
    return from_json(j);
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigInvalid("json", "config must be a JSON object");
    static const std::set<std::string> known = {
        "lambda", "C",       "tau",      "delta",     "energy", "grid",
        "operator", "mc",    "free_cert", "measure",  "bernoulli", "smoothing",
        "seed",   "threads", "outdir"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ConfigInvalid(it.key(), "unknown config field");

    ExperimentConfig c;
    if (j.contains("lambda")) {
        const json& l = j.at("lambda");
        if (l.is_number()) {
            c.lambda_spec.is_float = true;
            c.lambda_spec.value = l.get<double>();
        } else if (l.is_object()) {
            c.lambda_spec.is_float = false;
            if (!l.contains("min_poly") || !l.contains("interval"))
                throw ConfigInvalid("lambda", "algebraic form needs min_poly and interval");
            for (const auto& co : l.at("min_poly"))
                c.lambda_spec.min_poly.push_back(bigint_from_json(co, "lambda.min_poly"));
            const json& iv = l.at("interval");
            if (!iv.is_array() || iv.size() != 2)
                throw ConfigInvalid("lambda.interval", "expected [lo, hi]");
            c.lambda_spec.lo = rat_from_json(iv[0], "lambda.interval[0]");
            c.lambda_spec.hi = rat_from_json(iv[1], "lambda.interval[1]");
        } else {
            throw ConfigInvalid("lambda", "expected a number or {min_poly, interval}");
        }
    }
    c.C = get_field(j, "C", c.C);
    c.tau = get_field(j, "tau", c.tau);
    c.delta = get_field(j, "delta", c.delta);
    c.energy = get_field(j, "energy", c.energy);
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        c.grid.lo = get_field(g, "lo", c.grid.lo);
        c.grid.hi = get_field(g, "hi", c.grid.hi);
        c.grid.count = get_field(g, "count", c.grid.count);
    }
    if (j.contains("operator")) {
        const json& g = j.at("operator");
        c.op.n_max = get_field(g, "n_max", c.op.n_max);
        c.op.M = get_field(g, "M", c.op.M);
        c.op.K_list = get_field(g, "K_list", c.op.K_list);
        c.op.lyapunov_ell = get_field(g, "lyapunov_ell", c.op.lyapunov_ell);
    }
    if (j.contains("mc")) {
        const json& g = j.at("mc");
        c.mc.steps = get_field(g, "steps", c.mc.steps);
        c.mc.samples = get_field(g, "samples", c.mc.samples);
        c.mc.sites = get_field(g, "sites", c.mc.sites);
        c.mc.burn_in = get_field(g, "burn_in", c.mc.burn_in);
    }
    if (j.contains("free_cert")) {
        const json& g = j.at("free_cert");
        c.free_cert.mu = get_field<std::string>(g, "mu", c.free_cert.mu);
        c.free_cert.l_max = get_field(g, "l_max", c.free_cert.l_max);
    }
    if (j.contains("measure")) {
        const json& g = j.at("measure");
        c.measure.n_max = get_field(g, "n_max", c.measure.n_max);
        c.measure.mc_samples = get_field(g, "mc_samples", c.measure.mc_samples);
    }
    if (j.contains("bernoulli")) {
        const json& g = j.at("bernoulli");
        c.bernoulli.k_max = get_field(g, "k_max", c.bernoulli.k_max);
        c.bernoulli.xi_list = get_field(g, "xi_list", c.bernoulli.xi_list);
        c.bernoulli.terms = get_field(g, "terms", c.bernoulli.terms);
    }
    if (j.contains("smoothing")) {
        const json& g = j.at("smoothing");
        c.smoothing.k_list = get_field(g, "k_list", c.smoothing.k_list);
        c.smoothing.m_max = get_field(g, "m_max", c.smoothing.m_max);
        c.smoothing.ell = get_field(g, "ell", c.smoothing.ell);
    }
    c.seed = get_field<uint64_t>(j, "seed", c.seed);
    c.threads = get_field(j, "threads", c.threads);
    c.outdir = get_field<std::string>(j, "outdir", c.outdir);
    return c;
}

json ExperimentConfig::to_json() const {
    json j;
    if (lambda_spec.is_float) {
        j["lambda"] = lambda_spec.value;
    } else {
        json poly = json::array();
        for (const auto& co : lambda_spec.min_poly) poly.push_back(bigint_to_json(co));
        j["lambda"] = {{"min_poly", poly},
                       {"interval", json::array({rat_to_json(lambda_spec.lo),
                                                 rat_to_json(lambda_spec.hi)})}};
    }
    j["C"] = C;
    j["tau"] = tau;
    j["delta"] = delta;
    j["energy"] = energy;
    j["grid"] = {{"lo", grid.lo}, {"hi", grid.hi}, {"count", grid.count}};
    j["operator"] = {{"n_max", op.n_max},
                     {"M", op.M},
                     {"K_list", op.K_list},
                     {"lyapunov_ell", op.lyapunov_ell}};
    j["mc"] = {{"steps", mc.steps},
               {"samples", mc.samples},
               {"sites", mc.sites},
               {"burn_in", mc.burn_in}};
    j["free_cert"] = {{"mu", free_cert.mu}, {"l_max", free_cert.l_max}};
    j["measure"] = {{"n_max", measure.n_max}, {"mc_samples", measure.mc_samples}};
    json xi = json::array();
    for (double x : bernoulli.xi_list) xi.push_back(x);
    j["bernoulli"] = {{"k_max", bernoulli.k_max}, {"xi_list", xi}, {"terms", bernoulli.terms}};
    j["smoothing"] = {{"k_list", smoothing.k_list},
                      {"m_max", smoothing.m_max},
                      {"ell", smoothing.ell}};
    j["seed"] = seed;
    j["threads"] = threads;
    j["outdir"] = outdir;
    return j;
}

void ExperimentConfig::validate() const {
    if (!(tau > 0 && tau < 0.5)) throw ConfigInvalid("tau", "must lie in (0, 1/2)");
    if (!(delta > 0)) throw ConfigInvalid("delta", "must be positive");
    if (!std::isfinite(energy)) throw ConfigInvalid("energy", "must be finite");
    if (lambda_spec.is_float && !std::isfinite(lambda_spec.value))
        throw ConfigInvalid("lambda", "must be finite");
    if (!lambda_spec.is_float) {
        if (lambda_spec.min_poly.empty()) throw ConfigInvalid("lambda.min_poly", "empty");
        if (!(lambda_spec.lo < lambda_spec.hi))
            throw ConfigInvalid("lambda.interval", "needs lo < hi");
    }
    if (grid.count < 1) throw ConfigInvalid("grid.count", "must be >= 1");
    if (!(grid.lo <= grid.hi)) throw ConfigInvalid("grid", "needs lo <= hi");
    if (grid.lo < -2 + delta - 1e-12 || grid.hi > 2 - delta + 1e-12)
        throw ConfigInvalid("grid", "must stay inside [-2+delta, 2-delta]");
    if (op.n_max < 4) throw ConfigInvalid("operator.n_max", "must be >= 4");
    if (op.M < 16 * op.n_max) throw ConfigInvalid("operator.M", "must be >= 16*n_max");
    if (op.K_list.empty()) throw ConfigInvalid("operator.K_list", "must be nonempty");
    for (int K : op.K_list)
        if (K < 0 || K >= op.n_max / 2)
            throw ConfigInvalid("operator.K_list", "entries must satisfy 0 <= K < n_max/2");
    if (op.lyapunov_ell < 1) throw ConfigInvalid("operator.lyapunov_ell", "must be >= 1");
    if (mc.steps < 1000) throw ConfigInvalid("mc.steps", "must be >= 1000");
    if (mc.samples < 1) throw ConfigInvalid("mc.samples", "must be >= 1");
    if (mc.sites < 100) throw ConfigInvalid("mc.sites", "must be >= 100");
    if (mc.burn_in < 0) throw ConfigInvalid("mc.burn_in", "must be >= 0");
    if (free_cert.mu != "entry_lambda" && free_cert.mu != "entry_two_lambda")
        throw ConfigInvalid("free_cert.mu", "must be entry_lambda or entry_two_lambda");
    if (free_cert.l_max < 1 || free_cert.l_max > 12)
        throw ConfigInvalid("free_cert.l_max", "must lie in [1, 12]");
    if (measure.n_max < 4) throw ConfigInvalid("measure.n_max", "must be >= 4");
    if (measure.mc_samples < 10000)
        throw ConfigInvalid("measure.mc_samples", "must be >= 10000");
    if (bernoulli.k_max < 1) throw ConfigInvalid("bernoulli.k_max", "must be >= 1");
    if (bernoulli.terms < 1) throw ConfigInvalid("bernoulli.terms", "must be >= 1");
    for (double x : bernoulli.xi_list)
        if (!std::isfinite(x)) throw ConfigInvalid("bernoulli.xi_list", "entries must be finite");
    if (smoothing.k_list.empty()) throw ConfigInvalid("smoothing.k_list", "must be nonempty");
    if (smoothing.m_max < 2) throw ConfigInvalid("smoothing.m_max", "must be >= 2");
    if (smoothing.ell < 2) throw ConfigInvalid("smoothing.ell", "must be >= 2");
    if (threads < 1) throw ConfigInvalid("threads", "must be >= 1");
    if (outdir.empty()) throw ConfigInvalid("outdir", "must be nonempty");
}

double ExperimentConfig::lambda_value() const {
    if (lambda_spec.is_float) return lambda_spec.value;
    return algebraic_lambda().float_value();
}

numberfield::AlgebraicNumber ExperimentConfig::algebraic_lambda() const {
    using numberfield::BigInt;
    using numberfield::BigRat;
    if (!lambda_spec.is_float)
        return numberfield::real_root(lambda_spec.min_poly, lambda_spec.lo, lambda_spec.hi);
    // Exact binary fraction of the double value, as a degree-1 root.
    BigRat v(lambda_spec.value);
    BigInt num = numerator(v), den = denominator(v);
    return numberfield::real_root({-num, den}, v - BigRat(1, 1000000), v + BigRat(1, 1000000));
}

json RunReport::to_json() const {
    json j;
    j["subcommand"] = subcommand;
    j["version"] = version;
    j["config"] = config_echo;
    json t = json::array();
    for (const auto& [name, sec] : timings) t.push_back({{"stage", name}, {"seconds", sec}});
    j["timings"] = t;
    j["artifacts"] = artifacts;
    j["summary"] = summary;
    json seeds = json::array();
    for (const auto& [purpose, s] : seed_provenance)
        seeds.push_back({{"purpose", purpose}, {"seed", s}});
    j["seed_provenance"] = seeds;
    j["cache_events"] = cache_events;
    return j;
}

transferop::OperatorMatrix obtain_operator(double E, double lambda, int n_max, int M,
                                           transferop::Variant variant, transferop::Frame frame,
                                           const ExperimentConfig& config, RunReport& report) {
    std::string dir;
    if (const char* env = std::getenv("ABLAB_CACHE_DIR"); env && *env)
        dir = env;
    else
        dir = config.outdir + "/cache";
    fs::create_directories(dir);
    char key[256];
    std::snprintf(key, sizeof key, "op|%.17g|%.17g|%d|%d|%d|%d", E, lambda, n_max, M,
                  static_cast<int>(variant), static_cast<int>(frame));
    char name[32];
    std::snprintf(name, sizeof name, "%016llx.abto",
                  static_cast<unsigned long long>(fnv1a(key)));
    std::string path = dir + "/" + name;
    if (fs::exists(path)) {
        try {
            auto A = transferop::load_operator(path);
            if (A.E == E && A.lambda == lambda && A.n_max == n_max && A.M == M &&
                A.variant == variant && A.frame == frame) {
                report.cache_events.push_back(std::string("cache hit: ") + key);
                return A;
            }
            report.cache_events.push_back(std::string("cache key collision, recompute: ") + key);
        } catch (const transferop::CacheCorrupt& e) {
            report.cache_events.push_back(std::string("cache corrupt (") + e.what() +
                                          "), recompute: " + key);
        }
    } else {
        report.cache_events.push_back(std::string("cache miss: ") + key);
    }
    auto A = transferop::build_operator(E, lambda, n_max, M, variant, frame, config.threads);
    transferop::save_operator(path, A);
    return A;
}

namespace {

void run_check_lambda(const ExperimentConfig& cfg, RunReport& rep) {
    StageTimer t(rep, "check-lambda");
    auto alpha = cfg.algebraic_lambda();
    auto hyp = numberfield::hypothesis_check(alpha, cfg.C);
    json out;
    out["poly"] = alpha.poly_string();
    out["lambda_float"] = alpha.float_value();
    out["degree"] = hyp.degree;
    out["degree_ok"] = hyp.degree_ok;
    out["C"] = hyp.C;
    out["height"] = bigint_to_json(hyp.height);
    out["height_bound"] = hyp.height_bound;
    out["height_ok"] = hyp.height_ok;
    out["max_other_conjugate_mod"] = hyp.max_other_conjugate_mod;
    out["conjugate_ok"] = hyp.conjugate_ok;
    out["max_brenner_mod"] = hyp.max_brenner_mod;
    out["brenner_ok"] = hyp.brenner_ok;
    out["pisot"] = hyp.pisot;
    out["irreducibility_verified"] = hyp.irreducibility_verified;
    json conj = json::array();
    for (const auto& z : numberfield::conjugates(alpha))
        conj.push_back(json::array({z.real(), z.imag()}));
    out["conjugates"] = conj;
    write_json_file(rep, cfg.outdir + "/check_lambda.json", out);
    rep.summary["all_ok"] =
        hyp.degree_ok && hyp.height_ok && hyp.conjugate_ok && hyp.brenner_ok;
    rep.summary["pisot"] = hyp.pisot;
}

void run_free_cert(const ExperimentConfig& cfg, RunReport& rep) {
    StageTimer t(rep, "free-cert");
    auto alpha = cfg.algebraic_lambda();
    auto mode = cfg.free_cert.mu == "entry_lambda" ? cocycle::MuMode::entry_lambda
                                                   : cocycle::MuMode::entry_two_lambda;
    auto cert = cocycle::freeness_certificate(alpha, mode, cfg.free_cert.l_max, cfg.threads);
    json out;
    out["lambda_poly"] = cert.lambda_poly;
    out["mu_entry"] = cfg.free_cert.mu;
    out["max_length"] = cert.max_length;
    out["status"] = cert.status == cocycle::FreenessCertificate::Status::free_up_to_length
                        ? "free_up_to_length"
                        : "collision_found";
    out["witness"] = cert.witness ? json(cert.witness->str()) : json(nullptr);
    out["min_distance"] = cert.min_distance;
    out["min_distance_exact"] = cert.min_distance_exact.str();
    out["floor"] = {{"value", cert.floor.value},
                    {"mantissa", cert.floor.mantissa},
                    {"exponent10", cert.floor.exponent}};
    out["words_checked"] = cert.words_checked;
    write_json_file(rep, cfg.outdir + "/free_cert.json", out);
    rep.summary["status"] = out["status"];
    rep.summary["words_checked"] = cert.words_checked;
}

void run_gap(const ExperimentConfig& cfg, RunReport& rep) {
    if (!(std::abs(cfg.energy) < 2))
        throw ConfigInvalid("energy", "gap subcommand needs |E| < 2");
    double lambda = cfg.lambda_value();
    transferop::OperatorMatrix A;
    {
        StageTimer t(rep, "gap.build");
        A = obtain_operator(cfg.energy, lambda, cfg.op.n_max, cfg.op.M,
                            transferop::Variant::plain, transferop::Frame::tilde, cfg, rep);
    }
    std::vector<std::vector<std::string>> rows;
    double min_norm = 2;
    int best_K = -1;
    {
        StageTimer t(rep, "gap.kscan");
        for (int K : cfg.op.K_list) {
            auto rn = transferop::restricted_norm(
                A, K, seed_for(rep, cfg.seed, "restricted_norm", static_cast<uint64_t>(K)));
            rows.push_back({std::to_string(K), format_g17(rn.value), format_g17(1 - rn.value),
                            format_g17(rn.half_value), std::to_string(rn.iterations)});
            if (rn.value < min_norm) {
                min_norm = rn.value;
                best_K = K;
            }
        }
    }
    std::string csv = cfg.outdir + "/gap.csv";
    write_csv(csv, {"K", "norm", "gap", "half_norm", "iterations"}, rows);
    rep.artifacts.push_back(csv);
    double exp_norm;
    {
        StageTimer t(rep, "gap.expander");
        exp_norm = transferop::expander_average_norm(cfg.algebraic_lambda(), cfg.tau,
                                                     cfg.op.K_list.front(), cfg.op.n_max,
                                                     cfg.op.M, cfg.threads);
    }
    json out;
    out["min_norm"] = min_norm;
    out["best_K"] = best_K;
    out["max_gap"] = 1 - min_norm;
    out["expander_average_norm"] = exp_norm;
    out["expander_below_half"] = exp_norm < 0.5;
    write_json_file(rep, cfg.outdir + "/gap.json", out);
    rep.summary = out;
}

void run_spectrum(const ExperimentConfig& cfg, RunReport& rep) {
    const double lambda = cfg.lambda_value();
    auto grid = spectrum::EnergyGrid::uniform(cfg.grid.lo, cfg.grid.hi, cfg.grid.count,
                                              cfg.delta);
    const size_t nE = grid.points.size();

    std::vector<spectrum::IdsPoint> ids;
    {
        StageTimer t(rep, "spectrum.ids");
        ids = spectrum::ids_sturm(grid, lambda, cfg.mc.sites, cfg.mc.samples,
                                  seed_for(rep, cfg.seed, "ids_grid", 0), cfg.threads);
    }

    // Wide-window IDS for the Thouless transform.
    std::vector<std::pair<double, double>> L_of_E;
    {
        StageTimer t(rep, "spectrum.thouless");
        double W = 2 + std::abs(lambda) + 0.5;
        const int nw = 401;
        std::vector<double> wide(nw);
        for (int i = 0; i < nw; ++i) wide[static_cast<size_t>(i)] = -W + 2 * W * i / (nw - 1.0);
        auto idsw = spectrum::ids_sturm(wide, lambda, cfg.mc.sites, cfg.mc.samples,
                                        seed_for(rep, cfg.seed, "ids_wide", 0), cfg.threads);
        std::vector<std::pair<double, double>> nw_pairs;
        for (const auto& p : idsw) nw_pairs.emplace_back(p.E, p.N);
        L_of_E = spectrum::thouless(nw_pairs, spectrum::ThoulessDirection::N_to_L);
    }

    std::vector<spectrum::MCEstimate> lmc(nE);
    std::vector<spectrum::OperatorLyapunov> lop(nE);
    std::vector<uint64_t> mc_seeds(nE);
    for (size_t i = 0; i < nE; ++i)
        mc_seeds[i] = seed_for(rep, cfg.seed, "lyapunov_mc", static_cast<uint64_t>(i));
    {
        StageTimer t(rep, "spectrum.lyapunov");
        parallel_for(static_cast<int>(nE), cfg.threads, [&](int i) {
            double E = grid.points[static_cast<size_t>(i)];
            lmc[static_cast<size_t>(i)] = spectrum::lyapunov_mc(E, lambda, cfg.mc.steps,
                                                                mc_seeds[static_cast<size_t>(i)]);
            auto A = transferop::build_operator(E, lambda, cfg.op.n_max, cfg.op.M,
                                                transferop::Variant::plain,
                                                transferop::Frame::raw, 1);
            lop[static_cast<size_t>(i)] = spectrum::lyapunov_operator(A, cfg.op.lyapunov_ell);
        });
    }
    double alpha0 = lambda > 0 ? spectrum::halperin_alpha(lambda)
                               : std::numeric_limits<double>::infinity();

    std::vector<std::vector<std::string>> rows;
    double thouless_max_err = 0;
    std::vector<std::vector<std::string>> trows;
    for (size_t i = 0; i < nE; ++i) {
        double E = grid.points[i];
        rows.push_back({format_g17(E), format_g17(lmc[i].value), format_g17(lmc[i].se),
                        format_g17(lop[i].value), format_g17(lop[i].residual),
                        format_g17(ids[i].N), format_g17(ids[i].se), format_g17(alpha0)});
        double lt = interp(L_of_E, E);
        thouless_max_err = std::max(thouless_max_err, std::abs(lt - lmc[i].value));
        trows.push_back({format_g17(E), format_g17(lt), format_g17(lmc[i].value),
                         format_g17(std::abs(lt - lmc[i].value))});
    }
    std::string csv = cfg.outdir + "/spectrum.csv";
    write_csv(csv, {"E", "L_mc", "L_mc_se", "L_op", "L_op_resid", "N", "N_se", "alpha0"}, rows);
    rep.artifacts.push_back(csv);
    std::string tcsv = cfg.outdir + "/thouless.csv";
    write_csv(tcsv, {"E", "L_thouless", "L_mc", "abs_diff"}, trows);
    rep.artifacts.push_back(tcsv);

    json out;
    out["thouless_max_abs_err"] = thouless_max_err;
    out["alpha0"] = alpha0;
    {
        StageTimer t(rep, "spectrum.holder");
        std::vector<std::pair<double, double>> nn;
        for (const auto& p : ids) nn.emplace_back(p.E, p.N);
        double range = cfg.grid.hi - cfg.grid.lo;
        std::vector<double> scales;
        for (double w = range / 2; w > 0 && nE > 1 && w >= 2.5 * range / (nE - 1.0); w /= 2)
            scales.push_back(w);
        try {
            auto probe = spectrum::holder_probe(nn, scales);
            out["holder"] = {{"alpha_hat", probe.alpha_hat},
                             {"r2", probe.r2},
                             {"scales_used", probe.scales_used}};
        } catch (const spectrum::InsufficientResolution& e) {
            out["holder"] = {{"error", e.what()}};
        }
    }
    write_json_file(rep, cfg.outdir + "/spectrum_summary.json", out);
    rep.summary = out;
}

void run_smoothing(const ExperimentConfig& cfg, RunReport& rep) {
    if (!(std::abs(cfg.energy) < 2))
        throw ConfigInvalid("energy", "smoothing subcommand needs |E| < 2");
    const double lambda = cfg.lambda_value();
    transferop::SmoothingParams params;
    params.n_max = cfg.op.n_max;
    params.M = cfg.op.M;
    params.m_max = cfg.smoothing.m_max;
    params.k_list = cfg.smoothing.k_list;
    params.seed = seed_for(rep, cfg.seed, "smoothing", 0);
    params.threads = cfg.threads;
    transferop::SmoothingReport sm;
    {
        StageTimer t(rep, "smoothing.suite");
        sm = transferop::smoothing_suite(cfg.energy, lambda, params);
    }
    json out;
    out["boundedness_sup"] = sm.boundedness_sup;
    out["no_gap"] = sm.no_gap;
    json hk = json::array();
    for (size_t i = 0; i < sm.k_values.size(); ++i)
        hk.push_back({{"k", sm.k_values[i]},
                      {"rate", sm.highmode_fits[i].rate},
                      {"r2", sm.highmode_fits[i].r2}});
    out["highmode_fits"] = hk;
    out["hs1"] = {{"rate", sm.hs1_fit.rate}, {"r2", sm.hs1_fit.r2}, {"plateau", sm.hs1_plateau}};
    out["hs2"] = {{"rate", sm.hs2_fit.rate}, {"r2", sm.hs2_fit.r2}, {"plateau", sm.hs2_plateau}};
    out["deriv"] = {{"rate", sm.deriv_fit.rate}, {"r2", sm.deriv_fit.r2}};

    // Per-step curves.
    {
        std::vector<std::string> header = {"m"};
        for (int k : sm.k_values) header.push_back("l2_highmode_k" + std::to_string(k));
        header.insert(header.end(), {"hs1", "hs2", "deriv_sup"});
        std::vector<std::vector<std::string>> rows;
        for (int m = 0; m <= params.m_max; ++m) {
            std::vector<std::string> row = {std::to_string(m)};
            for (const auto& curve : sm.highmode_curves)
                row.push_back(format_g17(curve[static_cast<size_t>(m)]));
            row.push_back(format_g17(sm.hs1_curve[static_cast<size_t>(m)]));
            row.push_back(format_g17(sm.hs2_curve[static_cast<size_t>(m)]));
            row.push_back(format_g17(sm.deriv_curve[static_cast<size_t>(m)]));
            rows.push_back(std::move(row));
        }
        std::string csv = cfg.outdir + "/smoothing_curves.csv";
        write_csv(csv, header, rows);
        rep.artifacts.push_back(csv);
    }

    // Deviation from the stationary pairing (Phi_E as test function).
    {
        StageTimer t(rep, "smoothing.deviation");
        auto A = obtain_operator(cfg.energy, lambda, cfg.op.n_max, cfg.op.M,
                                 transferop::Variant::plain, transferop::Frame::raw, cfg, rep);
        auto nu = measures::furstenberg_fixed_point(A);
        auto phi = expand_phi(cfg.energy, lambda, cfg.op.n_max, cfg.op.M);
        auto dev = transferop::deviation_decay(A, phi, cfg.smoothing.m_max, nu.fourier);
        std::vector<std::vector<std::string>> rows;
        for (size_t i = 0; i < dev.d.size(); ++i)
            rows.push_back({std::to_string(i), format_g17(dev.d[i])});
        std::string csv = cfg.outdir + "/deviation.csv";
        write_csv(csv, {"ell", "deviation_sup"}, rows);
        rep.artifacts.push_back(csv);
        out["deviation"] = {{"rate", dev.fit.rate},
                            {"r2", dev.fit.r2},
                            {"pairing", dev.pairing.real()}};
    }

    // Energy-derivative probe.
    {
        StageTimer t(rep, "smoothing.derivative");
        auto probe = spectrum::energy_derivative_probe(cfg.energy, lambda, 2, cfg.smoothing.ell,
                                                       cfg.op.n_max, cfg.op.M, cfg.threads);
        json nested = json::array();
        for (const auto& [s, v] : probe.nested_sups)
            nested.push_back({{"m2_plus_m3", s}, {"sup", v}});
        out["derivative_probe"] = {{"agreement", probe.agreement},
                                   {"fd_h", probe.fd_h},
                                   {"mean_dE", probe.mean_dE},
                                   {"nested", nested}};
    }
    write_json_file(rep, cfg.outdir + "/smoothing.json", out);
    rep.summary = out;
}

void run_measure(const ExperimentConfig& cfg, RunReport& rep) {
    if (!(std::abs(cfg.energy) < 2))
        throw ConfigInvalid("energy", "measure subcommand needs |E| < 2");
    const double lambda = cfg.lambda_value();
    const int n_max = cfg.measure.n_max;
    const int M = std::max(16 * n_max, 512);
    measures::MeasureEstimate fp, mc;
    {
        StageTimer t(rep, "measure.fixed_point");
        auto A = obtain_operator(cfg.energy, lambda, n_max, M, transferop::Variant::plain,
                                 transferop::Frame::raw, cfg, rep);
        fp = measures::furstenberg_fixed_point(A);
    }
    {
        StageTimer t(rep, "measure.mc");
        mc = measures::furstenberg_mc(cfg.energy, lambda, cfg.measure.mc_samples,
                                      cfg.mc.burn_in,
                                      seed_for(rep, cfg.seed, "furstenberg_mc", 0), n_max);
    }
    double agree = 0;
    int lim = std::min(32, n_max);
    for (int n = -lim; n <= lim; ++n)
        agree = std::max(agree, std::abs(fp.fourier.at(n) - mc.fourier.at(n)));
    json out;
    out["stationarity_residual"] = fp.stationarity_residual;
    out["fixed_point_iterations"] = fp.iterations;
    out["mc_agreement_sup"] = agree;
    json coeffs = json::array();
    for (int n = 0; n <= lim; ++n)
        coeffs.push_back({{"n", n},
                          {"fp_re", fp.fourier.at(n).real()},
                          {"fp_im", fp.fourier.at(n).imag()},
                          {"mc_re", mc.fourier.at(n).real()},
                          {"mc_im", mc.fourier.at(n).imag()}});
    out["coefficients"] = coeffs;
    try {
        auto probe = measures::density_smoothness_probe(fp);
        const char* verdicts[] = {"zero_tail", "density_like", "not_a_density", "inconclusive"};
        out["smoothness"] = {{"slope", probe.slope},
                             {"r2", probe.r2},
                             {"verdict", verdicts[static_cast<int>(probe.verdict)]}};
    } catch (const measures::InsufficientCutoff& e) {
        out["smoothness"] = {{"error", e.what()}};
    }
    write_json_file(rep, cfg.outdir + "/measure.json", out);
    std::vector<std::vector<std::string>> rows;
    for (int b = 0; b < measures::kHistogramBins; ++b) {
        double lo = static_cast<double>(b) / measures::kHistogramBins;
        double hi = static_cast<double>(b + 1) / measures::kHistogramBins;
        rows.push_back({format_g17(lo), format_g17(hi),
                        format_g17(fp.histogram[static_cast<size_t>(b)]),
                        format_g17(mc.histogram[static_cast<size_t>(b)])});
    }
    std::string csv = cfg.outdir + "/histogram.csv";
    write_csv(csv, {"bin_lo", "bin_hi", "fixed_point_mass", "mc_mass"}, rows);
    rep.artifacts.push_back(csv);
    rep.summary["mc_agreement_sup"] = agree;
    rep.summary["stationarity_residual"] = fp.stationarity_residual;
}

void run_bernoulli(const ExperimentConfig& cfg, RunReport& rep) {
    StageTimer t(rep, "bernoulli");
    const double lambda = cfg.lambda_value();
    std::vector<std::vector<std::string>> rows;
    for (double xi : cfg.bernoulli.xi_list) {
        auto v = measures::bernoulli_fourier(lambda, xi, cfg.bernoulli.terms);
        rows.push_back({format_g17(xi), format_g17(v.value), format_g17(v.tail_bound)});
    }
    std::string csv = cfg.outdir + "/bernoulli.csv";
    write_csv(csv, {"xi", "value", "tail_bound"}, rows);
    rep.artifacts.push_back(csv);

    auto probe = measures::pisot_nondecay_probe(lambda, cfg.bernoulli.k_max);
    std::vector<std::vector<std::string>> prows;
    double xi = 1.0;
    for (int k = 0; k < static_cast<int>(probe.size()); ++k) {
        prows.push_back({std::to_string(k), format_g17(xi),
                         format_g17(probe[static_cast<size_t>(k)])});
        xi /= lambda;
    }
    std::string pcsv = cfg.outdir + "/pisot.csv";
    write_csv(pcsv, {"k", "xi", "abs_fourier"}, prows);
    rep.artifacts.push_back(pcsv);

    json out;
    out["pisot_inverse_coupling"] = numberfield::pisot_check(cfg.algebraic_lambda());
    double plateau_min = std::numeric_limits<double>::infinity();
    for (int k = 5; k <= cfg.bernoulli.k_max && k < static_cast<int>(probe.size()); ++k)
        plateau_min = std::min(plateau_min, probe[static_cast<size_t>(k)]);
    out["nondecay_min_k5_up"] = plateau_min;
    write_json_file(rep, cfg.outdir + "/bernoulli.json", out);
    rep.summary = out;
}

void run_report(const ExperimentConfig& cfg, RunReport& rep) {
    StageTimer t(rep, "report");
    json artifacts = json::object();
    std::vector<std::string> csvs;
    if (fs::exists(cfg.outdir))
        for (const auto& entry : fs::directory_iterator(cfg.outdir)) {
            if (!entry.is_regular_file()) continue;
            std::string name = entry.path().filename().string();
            if (name == "report.json" || name.rfind("runreport_", 0) == 0) continue;
            if (entry.path().extension() == ".json") {
                std::ifstream in(entry.path());
                try {
                    artifacts[name] = json::parse(in);
                } catch (const std::exception&) {
                    artifacts[name] = {{"error", "unparseable"}};
                }
            } else if (entry.path().extension() == ".csv") {
                csvs.push_back(name);
            }
        }
    if (artifacts.empty() && csvs.empty())
        throw ConfigInvalid("outdir", "no artifacts found");
    std::sort(csvs.begin(), csvs.end());
    json out;
    out["artifacts"] = artifacts;
    out["csv_files"] = csvs;
    out["version"] = rep.version;
    write_json_file(rep, cfg.outdir + "/report.json", out);
    rep.summary["artifact_count"] = artifacts.size() + csvs.size();
}

}  // namespace

RunReport run(const std::string& subcommand, const ExperimentConfig& config) {
    config.validate();
    RunReport rep;
    rep.subcommand = subcommand;
    rep.config_echo = config.to_json();
    fs::create_directories(config.outdir);
    try {
        if (subcommand == "check-lambda")
            run_check_lambda(config, rep);
        else if (subcommand == "free-cert")
            run_free_cert(config, rep);
        else if (subcommand == "gap")
            run_gap(config, rep);
        else if (subcommand == "spectrum")
            run_spectrum(config, rep);
        else if (subcommand == "smoothing")
            run_smoothing(config, rep);
        else if (subcommand == "measure")
            run_measure(config, rep);
        else if (subcommand == "bernoulli")
            run_bernoulli(config, rep);
        else if (subcommand == "report")
            run_report(config, rep);
        else
            throw ConfigInvalid("subcommand", "unknown subcommand '" + subcommand + "'");
    } catch (const ConfigInvalid&) {
        throw;
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(subcommand, e.what());
    }
    write_text(config.outdir + "/runreport_" + subcommand + ".json",
               rep.to_json().dump(2) + "\n");
    return rep;
}

int main_cli(int argc, char** argv) {
    CLI::App app{"ablab: numerical laboratory for the 1D Anderson-Bernoulli model"};
    app.fallthrough();
    std::string config_path, outdir;
    uint64_t seed = 0;
    int threads = 0;
    app.add_option("--config", config_path, "path to the JSON experiment config")->required();
    auto* opt_outdir = app.add_option("--outdir", outdir, "override config outdir");
    auto* opt_seed = app.add_option("--seed", seed, "override config master seed");
    auto* opt_threads = app.add_option("--threads", threads, "override config thread count");
    static const char* subs[] = {"check-lambda", "free-cert", "gap",       "spectrum",
                                 "smoothing",    "measure",   "bernoulli", "report"};
    for (const char* s : subs) app.add_subcommand(s, "");
    app.require_subcommand(1);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        std::ifstream in(config_path);
        if (!in) throw ConfigInvalid("config", "cannot read " + config_path);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        auto cfg = ExperimentConfig::from_json_text(text);
        if (opt_outdir->count()) cfg.outdir = outdir;
        if (opt_seed->count()) cfg.seed = seed;
        if (opt_threads->count()) cfg.threads = threads;
        std::string sub = app.get_subcommands().front()->get_name();
        auto rep = run(sub, cfg);
        std::printf("%s: ok (%zu artifacts, report %s/runreport_%s.json)\n", sub.c_str(),
                    rep.artifacts.size(), cfg.outdir.c_str(), sub.c_str());
        for (const auto& ev : rep.cache_events) std::printf("  %s\n", ev.c_str());
        return 0;
    } catch (const ConfigInvalid& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const StageError& e) {
        std::fprintf(stderr, "stage error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}

}  // namespace ablab::runner
