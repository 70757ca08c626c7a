#pragma once

// Run configuration: a schema-versioned JSON document with model, solver,
// experiment and output blocks. Parsing fails fast with ValidationError naming
// the offending field path (e.g. "model.rho").

#include "swspde/certify.hpp"
#include "swspde/core.hpp"
#include "swspde/lab.hpp"
#include "swspde/sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace swspde::cli {

constexpr int kSchemaVersion = 1;

struct CoefficientOverride {
    Eigen::VectorXd lambda1;
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    double L = 0.0;
};

struct ModelConfig {
    int n_modes = 0;
    int m_W = 0;
    double r = 0.0;
    std::vector<DelayMeasure::Atom> rho;
    Eigen::MatrixXd Q;
    std::optional<Eigen::MatrixXd> eigenvalues;   // states x modes
    std::vector<sim::AffineRegime> states;        // empty when only coefficients are given
    std::optional<CoefficientOverride> coefficients;
    certify::AttestedBounds bounds;
    std::optional<std::vector<double>> boundaries; // partition boundaries i_1 < ... < i_m
    std::optional<double> theta;                   // coupling rate used for kappa
};

struct SolverBlock {
    double dt = 0.0;
    std::optional<double> t_hist; // default horizon for r when absent
    std::uint64_t seed = 0;
};

/// Initial history: either a constant path or explicit grid values.
struct HistorySpec {
    std::optional<Eigen::VectorXd> constant;
    std::optional<Eigen::MatrixXd> values; // column m holds x(-m dt)
    std::optional<Eigen::VectorXd> tail;
};

struct InitialBlock {
    int regime = 0;
    HistorySpec history;
};

struct CouplingBlock {
    int state = 0;
    double s1 = 0.0;
    double s2 = 0.0;
    std::size_t n_keys = 0;
    double t_max = 0.0;
    double grid_step = 0.1;
    std::optional<std::string> F; // "abs"
};

struct RemoteStartBlock {
    std::vector<double> schedule;
    std::size_t n_keys = 0;
};

struct ObservableSpec {
    std::string kind; // norm_clip | indicator | first_mode_clip | constant
    std::optional<double> cap;
    std::optional<int> state;
    std::optional<double> value;
};

struct MixingBlock {
    std::vector<double> times;
    std::size_t n_paths = 0;
    std::vector<ObservableSpec> observables;
};

struct ExperimentConfig {
    std::optional<InitialBlock> initial;
    std::optional<HistorySpec> second; // psi for the contraction experiment
    std::optional<double> t_start;
    std::optional<double> t_end;
    std::optional<int> record_every;
    std::optional<std::size_t> n_paths;
    std::optional<CouplingBlock> coupling;
    std::optional<RemoteStartBlock> remote_start;
    std::optional<MixingBlock> mixing;
    std::optional<double> t_push; // invariance check after remote-start
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json"};

    bool wants(const std::string& fmt) const;
};

struct RunConfig {
    int schema_version = kSchemaVersion;
    ModelConfig model;
    std::optional<SolverBlock> solver;
    ExperimentConfig experiment;
    OutputConfig output;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Model assembled from the config; requires eigenvalues and state blocks.
sim::Model build_model(const ModelConfig& m);
DelayMeasure build_rho(const ModelConfig& m);

/// Override coefficients when given, certify_affine of the model otherwise.
certify::ModelCoefficients build_coefficients(const ModelConfig& m);

sim::SolverConfig build_solver(const ModelConfig& m, const SolverBlock& s, std::uint64_t wiener_key,
                               std::uint64_t poisson_key);
Segment build_history(const HistorySpec& h, const ModelConfig& m, const sim::SolverConfig& cfg,
                      const std::string& path);
lab::Observable build_observable(const ObservableSpec& spec, const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

} // namespace swspde::cli
