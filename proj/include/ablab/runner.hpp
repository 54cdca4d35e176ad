#pragma once

// Reproducible experiment runner: JSON configuration, orchestration of the
// numeric modules, artifact persistence (CSV/JSON + binary operator cache),
// and aggregated run reports.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ablab/numberfield.hpp"
#include "ablab/transferop.hpp"

namespace ablab::runner {

struct ConfigInvalid : std::runtime_error {
    std::string field;
    ConfigInvalid(std::string field_, const std::string& msg)
        : std::runtime_error(field_ + ": " + msg), field(std::move(field_)) {}
};

struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string stage_, const std::string& msg)
        : std::runtime_error(stage_ + ": " + msg), stage(std::move(stage_)) {}
};

struct LambdaSpec {
    bool is_float = true;
    double value = 0;
    std::vector<numberfield::BigInt> min_poly;  // used when !is_float
    numberfield::BigRat lo = 0, hi = 0;
};

struct ExperimentConfig {
    LambdaSpec lambda_spec;
    double C = 3.0;
    double tau = 0.4;
    double delta = 0.2;
    double energy = 0.5;
    struct Grid {
        double lo = -1.5, hi = 1.5;
        int count = 31;
    } grid;
    struct Operator {
        int n_max = 64;
        int M = 1024;
        std::vector<int> K_list = {4, 8, 16};
        int lyapunov_ell = 40;
    } op;
    struct Mc {
        long long steps = 100000;
        int samples = 20;
        int sites = 1000;
        long long burn_in = 1000;
    } mc;
    struct FreeCert {
        std::string mu = "entry_two_lambda";
        int l_max = 6;
    } free_cert;
    struct Measure {
        int n_max = 32;
        long long mc_samples = 100000;
    } measure;
    struct Bernoulli {
        int k_max = 20;
        std::vector<double> xi_list = {0.3};
        int terms = 10000;
    } bernoulli;
    struct Smoothing {
        std::vector<int> k_list = {4};
        int m_max = 40;
        int ell = 10;
    } smoothing;
    uint64_t seed = 1;
    int threads = 1;
    std::string outdir = "out";

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_json_text(const std::string& text);
    nlohmann::json to_json() const;
    void validate() const;  // throws ConfigInvalid

    double lambda_value() const;
    numberfield::AlgebraicNumber algebraic_lambda() const;
};

struct RunReport {
    std::string subcommand;
    nlohmann::json config_echo;
    std::vector<std::pair<std::string, double>> timings;  // (stage, seconds)
    std::vector<std::string> artifacts;                   // files written
    nlohmann::json summary;
    std::vector<std::pair<std::string, uint64_t>> seed_provenance;
    std::vector<std::string> cache_events;
    std::string version = "ablab 0.1.0";
    nlohmann::json to_json() const;
};

// Subcommands: check-lambda, free-cert, gap, spectrum, smoothing, measure,
// bernoulli, report. Throws ConfigInvalid / StageError.
RunReport run(const std::string& subcommand, const ExperimentConfig& config);

// Content-addressed operator cache; honors ABLAB_CACHE_DIR, falls back to
// <outdir>/cache. Corrupt entries are recomputed and overwritten.
transferop::OperatorMatrix obtain_operator(double E, double lambda, int n_max, int M,
                                           transferop::Variant variant, transferop::Frame frame,
                                           const ExperimentConfig& config, RunReport& report);

std::string format_g17(double v);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Exit codes: 0 success, 2 config error, 3 stage error.
int main_cli(int argc, char** argv);

}  // namespace ablab::runner
