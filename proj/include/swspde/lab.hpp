#pragma once

// Ergodicity experiments over ensembles of keyed paths: moment bounds,
// shared-noise contraction, coupling-time tails, remote-start approximation of
// the invariant measure, exponential mixing and invariance checks.
//
// Path p of an ensemble with seed s uses the Wiener key derive(s, p, 1) and the
// Poisson key derive(s, p, 2); results never depend on the thread count.

#include "swspde/chain.hpp"
#include "swspde/core.hpp"
#include "swspde/sim.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace swspde::lab {

// ---------------------------------------------------------------------------
// Statistics

/// Pairwise (cascade) summation: the result depends only on the order of `x`.
double pairwise_sum(const double* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
};

/// Mean with its jackknife standard error (delete-one over samples).
MeanSE jackknife_mean_se(const std::vector<double>& x);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct DecayFit {
    double rate = 0.0;      // -slope of log(stat) against t
    double intercept = 0.0; // log-scale intercept
    double r_squared = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t n_points = 0;
    std::size_t n_floored = 0; // points at or below the floor, excluded
    bool degenerate = false;   // fewer than two usable points
    bool low_r_squared = false; // r_squared < 0.8: the rate should not be trusted
};

struct FitWindow {
    double burn_in = 0.1; // fraction of [t_first, t_last] skipped at the start
    std::optional<double> t_lo;
    std::optional<double> t_hi;
};

constexpr double kLogFloor = 1e-300;

/// Least squares of log(values) against times over the window.
DecayFit fit_log_decay(const std::vector<double>& times, const std::vector<double>& values,
                       const FitWindow& window = {});

/// Runs fn(i) for i in [0, n) on up to `threads` workers. fn must only write
/// to slot i of its outputs.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Per-path key derivation shared by all experiments.
sim::SolverConfig path_config(const sim::SolverConfig& base, std::uint64_t seed, std::size_t path);

// ---------------------------------------------------------------------------
// Ensembles

struct EnsembleSpec {
    std::size_t n_paths = 2;
    std::uint64_t seed = 0;
    sim::SolverConfig solver; // keys are replaced per path
    std::int64_t start_step = 0;
    std::int64_t end_step = 0;
    int record_every = 1;
    int threads = 1;
    FitWindow window;

    /// Throws ValidationError unless n_paths >= 2 and end_step >= start_step.
    void validate() const;
};

struct MomentReport {
    std::vector<double> times;
    std::vector<double> mean_sq;         // E ||X(t)||^2
    std::vector<double> se_sq;           // jackknife SE of mean_sq
    std::vector<double> mean_sq_segment; // E ||X_t||_r^2
    double plateau = 0.0;                // mean of mean_sq over the last 20% of the horizon
    double sup_mean_sq = 0.0;
    DecayFit transient;                  // fit of mean_sq - plateau
    std::size_t n_divergent = 0;
    std::optional<double> certified_rate;
    bool rate_ok = true;                 // transient.rate >= 0.8 certified (when both are available)
    bool pass = false;                   // at most 1% divergent and rate_ok
    std::vector<double> final_first_mode; // X(t_end)_0 per path (NaN for divergent paths)
};

MomentReport moment_bound_experiment(const sim::Model& model, const Segment& phi, int regime,
                                     const EnsembleSpec& spec, std::optional<double> certified_rate = std::nullopt);

struct ContractionReport {
    std::vector<double> times;
    std::vector<double> mean_gamma_sq;         // E ||Gamma(t)||^2
    std::vector<double> mean_gamma_segment_sq; // E ||Gamma_t||_r^2
    DecayFit fit_head;
    DecayFit fit_segment;
    bool degenerate = false; // phi == psi: statistic identically zero
    std::size_t n_divergent = 0;
    std::optional<double> certified_rate;
    bool pass = false;
};

ContractionReport contraction_experiment(const sim::Model& model, const Segment& phi, const Segment& psi,
                                         int regime, const EnsembleSpec& spec,
                                         std::optional<double> certified_rate = std::nullopt);

// ---------------------------------------------------------------------------
// Coupling

struct CouplingSpec {
    int start_state = 0;
    double s1 = 0.0;
    double s2 = 0.0;
    std::size_t n_keys = 1000;
    std::uint64_t seed = 0;
    double t_max = 50.0;      // pairs not met by t_max are censored
    double grid_step = 0.1;   // spacing of the survival curve
    double survival_floor = 0.01;
    int threads = 1;
};

struct CouplingReport {
    std::vector<double> taus;     // +inf for censored pairs
    std::vector<double> grid;     // t - s2
    std::vector<double> survival; // fraction with tau > s2 + grid
    DecayFit fit;                 // theta_hat = fit.rate
    bool coalescence_exact = true; // paths identical after tau at every grid time
    std::size_t n_censored = 0;
    std::optional<chain::CouplingFunctionReport> f_report;
};

/// Throws ValidationError for a reducible generator.
CouplingReport coupling_tail_experiment(const chain::GeneratorMatrix& q, const CouplingSpec& spec,
                                        const chain::DifferenceFunction* f = nullptr,
                                        std::optional<double> m_bound = std::nullopt);

// ---------------------------------------------------------------------------
// Remote start and the invariant measure

struct EmpiricalMeasure {
    std::vector<StatePoint> samples;
};

struct RemoteStartSpec {
    std::vector<double> schedule; // start times, non-increasing, all <= 0
    std::size_t n_keys = 100;
    std::uint64_t seed = 0;
    sim::SolverConfig solver;
    int threads = 1;
};

struct RemoteStartReport {
    std::vector<double> schedule;
    std::vector<double> mean_distance; // mean d between outputs for schedule[j] and schedule[j + 1]
    std::vector<double> se_distance;
    std::vector<double> ratios;        // mean_distance[j + 1] / mean_distance[j]
    bool strictly_decreasing = false;
    double max_ratio = 0.0;
    bool warning = false;              // non-decreasing over >= 3 consecutive schedule points
    DecayFit fit;                      // of log mean distance against |s|
    std::vector<std::vector<double>> distances; // [key][j]
    EmpiricalMeasure measure;          // outputs for the deepest start, one per key
};

RemoteStartReport remote_start_measure(const sim::Model& model, const Segment& phi, int regime,
                                       const RemoteStartSpec& spec);

// ---------------------------------------------------------------------------
// Observables, mixing and invariance

struct Observable {
    std::string name;
    double lipschitz = 0.0; // with respect to d
    std::function<double(const StatePoint&)> fn;
};

/// min(||x||_r, cap).
Observable norm_clip(double cap);
/// 1{k = k0}.
Observable indicator(int k0);
/// x(0) first coefficient clipped to [-cap, cap].
Observable first_mode_clip(double cap);
Observable constant_observable(double c);

/// Built-in set used by the invariance check.
std::vector<Observable> builtin_observables(int k0 = 0, double cap = 5.0);

/// Throws ValidationError for a missing function or a non-finite or negative Lipschitz bound.
void validate_observable(const Observable& f);

struct MixingSpec {
    std::vector<double> times; // evaluation times t > 0 (on the dt grid)
    std::size_t n_paths = 200;
    std::uint64_t seed = 0;
    sim::SolverConfig solver;
    int threads = 1;
    FitWindow window{0.0, std::nullopt, std::nullopt};
};

struct MixingCurve {
    std::string name;
    double lipschitz = 0.0;
    std::vector<double> times;
    std::vector<double> pt_f;    // P_t f(phi, i)
    std::vector<double> pt_f_se;
    double mu_f = 0.0;
    double mu_f_se = 0.0;
    std::vector<double> abs_diff;
    DecayFit fit;
    bool degenerate = false; // zero Lipschitz constant or zero differences
};

struct MixingReport {
    std::vector<MixingCurve> curves;
    std::size_t n_divergent = 0;
};

MixingReport mixing_experiment(const sim::Model& model, const Segment& phi, int regime,
                               const std::vector<Observable>& observables, const EmpiricalMeasure& measure,
                               const MixingSpec& spec);

struct InvarianceEntry {
    std::string name;
    double before = 0.0;
    double after = 0.0;
    double diff = 0.0; // |after - before|
    double se = 0.0;   // jackknife SE of the paired differences
    bool pass = false;
};

struct InvarianceReport {
    double t_push = 0.0;
    std::vector<InvarianceEntry> entries;
    bool pass = false;
};

/// Pushes every sample forward by t_push on fresh keys derived from `seed`.
InvarianceReport invariance_check(const sim::Model& model, const EmpiricalMeasure& measure, double t_push,
                                  const std::vector<Observable>& observables, const sim::SolverConfig& solver,
                                  std::uint64_t seed, int threads = 1);

} // namespace swspde::lab
