#pragma once

// Mild-solution integrator for the switching equation with infinite delay.
//
// All operators A(k) are diagonal in one shared eigenbasis, so the random
// semigroup between chain jumps is a product of per-mode exponentials. Each
// base step of length dt is split at the jump times of the chain, and every
// piece is advanced with the exponential-Euler map
//
//   X+ = e^{-lambda h} X + (1 - e^{-lambda h}) / lambda * b + e^{-lambda h} sigma dW.

#include "swspde/certify.hpp"
#include "swspde/chain.hpp"
#include "swspde/core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace swspde::sim {

/// Eigenvalues of -A(k): one row per regime, one column per mode.
class OperatorFamily {
public:
    explicit OperatorFamily(Eigen::MatrixXd eigenvalues);

    int n_states() const noexcept { return static_cast<int>(eig_.rows()); }
    int n_modes() const noexcept { return static_cast<int>(eig_.cols()); }
    double eigenvalue(int k, int n) const { return eig_(k, n); }
    Eigen::VectorXd spectrum(int k) const { return eig_.row(k).transpose(); }
    double lambda1(int k) const { return eig_(k, 0); }
    const Eigen::MatrixXd& table() const noexcept { return eig_; }

private:
    Eigen::MatrixXd eig_;
};

/// One regime of the affine-with-delay coefficient family:
///   b(x) = G x(0) + D y + g,   y = int x(theta) rho(dtheta)
///   sigma(x) column c = S0[:,c] + S1[:,c] .* x(0) + S2[:,c] .* y
struct AffineRegime {
    Eigen::MatrixXd G;  // symmetric, n_modes x n_modes
    Eigen::MatrixXd D;  // n_modes x n_modes
    Eigen::VectorXd g;  // n_modes
    Eigen::MatrixXd S0; // n_modes x m_W
    Eigen::MatrixXd S1; // n_modes x m_W
    Eigen::MatrixXd S2; // n_modes x m_W
};

class AffineCoefficients {
public:
    explicit AffineCoefficients(std::vector<AffineRegime> regimes);

    int n_states() const noexcept { return static_cast<int>(regimes_.size()); }
    int n_modes() const noexcept { return static_cast<int>(regimes_.front().G.rows()); }
    int noise_dim() const noexcept { return static_cast<int>(regimes_.front().S0.cols()); }
    const AffineRegime& regime(int k) const { return regimes_.at(static_cast<std::size_t>(k)); }
    const std::vector<AffineRegime>& regimes() const noexcept { return regimes_; }

    Eigen::VectorXd drift(int k, const Eigen::VectorXd& x0, const Eigen::VectorXd& delayed) const;
    /// sigma(x, k) as an n_modes x m_W matrix.
    Eigen::MatrixXd diffusion(int k, const Eigen::VectorXd& x0, const Eigen::VectorXd& delayed) const;

private:
    std::vector<AffineRegime> regimes_;
};

/// Fully specified switching model.
struct Model {
    Model(OperatorFamily ops, AffineCoefficients coeffs, DelayMeasure rho, double r, chain::GeneratorMatrix q,
          double m_bound = std::numeric_limits<double>::quiet_NaN());

    OperatorFamily ops;
    AffineCoefficients coeffs;
    DelayMeasure rho;
    double r;
    chain::GeneratorMatrix q;
    chain::IntervalTable table;

    int n_states() const noexcept { return q.n_states(); }
    int n_modes() const noexcept { return ops.n_modes(); }
    int noise_dim() const noexcept { return coeffs.noise_dim(); }
};

/// Constants under which the affine family satisfies the dissipativity and
/// noise-Lipschitz hypotheses:
///   alpha(k) = 2 max eig(G) + |D|,  beta(k) = |D|,  L = 2 max_k (|S1|_F^2 + |S2|_F^2).
/// Zero beta or L are clamped to 1e-300 (both must be strictly positive).
certify::ModelCoefficients certify_affine(const AffineCoefficients& fam, const OperatorFamily& ops,
                                          const DelayMeasure& rho, double r);
certify::ModelCoefficients certify_affine(const Model& model);

/// (1 - e^{-lambda dt}) / lambda, with a series branch for lambda dt < 1e-6.
double phi_factor(double lambda, double dt);

/// Double-sided m_W-channel Brownian motion.
///
/// On each unit slot [m, m+1) the path is built by midpoint (Levy) refinement:
/// the slot increment and every bridge midpoint are keyed on (key, m, channel,
/// node). W(t) is therefore a pure function of t, consistent across step sizes,
/// start times and splitting of steps at jump times. Refinement stops at depth
/// kDepth, below which the path is interpolated linearly.
class WienerField {
public:
    static constexpr int kDepth = 24;

    WienerField(std::uint64_t key, int channels);

    std::uint64_t key() const noexcept { return key_; }
    int channels() const noexcept { return channels_; }

    /// Gaussian attached to a refinement node. Node 0 is the slot increment and
    /// node j >= 1 the midpoint of the j-th heap-ordered dyadic interval.
    double node_gaussian(std::int64_t slot, int channel, std::uint64_t node) const;

    /// W(b) - W(a) for a <= b, without caching.
    Eigen::VectorXd increment(double a, double b) const;

private:
    std::uint64_t key_;
    int channels_;
};

/// Caches the last refinement path per channel; sequential queries that are
/// close in time reuse most of it. Results are identical to the uncached field.
class WienerCursor {
public:
    explicit WienerCursor(const WienerField& field);

    /// W(b) - W(a), written into `out` (size m_W).
    void increment(double a, double b, Eigen::VectorXd& out);

    /// Bridge value B_m(frac) = W(m + frac) - W(m), frac in [0, 1].
    double bridge(int channel, std::int64_t slot, double frac);

private:
    struct Frame {
        double lo, hi, wlo, whi;
        std::uint64_t node;
    };
    WienerField field_;
    std::int64_t slot_ = 0;
    bool valid_ = false;
    std::vector<std::vector<Frame>> stacks_;
};

struct SolverConfig {
    int steps_per_unit = 100;          // 1 / dt
    std::size_t history_points = 1;    // grid points of the segment, T_hist = (n - 1) dt
    std::uint64_t wiener_key = 0;
    std::uint64_t poisson_key = 0;

    double dt() const noexcept { return 1.0 / steps_per_unit; }
    double time_of(std::int64_t step) const noexcept {
        return static_cast<double>(step) / steps_per_unit;
    }
    /// Grid index of t; throws ValidationError when t is not on the grid.
    std::int64_t step_of(double t) const;

    /// dt must satisfy 1/dt integral. T_hist <= 0 selects the default horizon for r.
    static SolverConfig make(double dt, double r, double t_hist, std::uint64_t wiener_key,
                             std::uint64_t poisson_key);
};

/// New head after one exponential-Euler piece of length h in regime k.
Eigen::VectorXd exp_euler_head(const Model& model, int k, const Eigen::VectorXd& x0, const Eigen::VectorXd& delayed,
                               double h, const Eigen::VectorXd& dW);

/// One step on a segment whose grid step equals dt: computes the head with
/// exp_euler_head and rolls the grid. dt == 0 returns the segment unchanged.
Segment exp_euler_step(const Model& model, const Segment& seg, int k, double dt, const Eigen::VectorXd& dW);

/// Noise consumed on one integration piece.
struct NoiseRecord {
    double t0;
    double t1;
    Eigen::VectorXd dW;
};

/// Advances one path along a fixed chain realization and Wiener field.
class PathIntegrator {
public:
    PathIntegrator(const Model& model, const SolverConfig& cfg, Segment history, int regime, std::int64_t start_step,
                   const chain::ChainPath& chain, const WienerField& wiener);

    /// Advances by one base step, split at every chain jump inside it.
    /// Throws DivergenceError if the state becomes non-finite.
    void step();
    void run_until(std::int64_t end_step);

    std::int64_t step_index() const noexcept { return step_; }
    double time() const noexcept { return cfg_.time_of(step_); }
    int regime() const noexcept { return regime_; }
    const Segment& segment() const noexcept { return seg_; }
    StatePoint state() const { return {seg_, regime_}; }

    void set_noise_log(std::vector<NoiseRecord>* log) noexcept { noise_log_ = log; }

private:
    void piece(double t0, double t1, int k, double base_time);
    void delayed_value(double t0, double base_time, Eigen::VectorXd& out);

    const Model* model_;
    SolverConfig cfg_;
    Segment seg_;
    int regime_;
    std::int64_t step_;
    chain::ChainPath chain_;
    std::size_t next_jump_ = 0;
    WienerCursor cursor_;
    std::vector<NoiseRecord>* noise_log_ = nullptr;

    // Base-step factors per regime: e^{-lambda dt} and phi(lambda, dt).
    std::vector<Eigen::VectorXd> decay_;
    std::vector<Eigen::VectorXd> phi_;

    Eigen::VectorXd x_, x_base_, delayed_, drift_, noise_, dW_, tmp_, tmp2_, e_, ph_;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<int> regimes;
    Eigen::MatrixXd states; // n_modes x n_records
    std::vector<double> head_norms;
    std::vector<double> segment_norms;
};

/// Simulates from (start_step, history, regime) to end_step with the fields
/// named by cfg's keys; records every `record_every` steps and at the end.
Trajectory simulate_path(const Model& model, const SolverConfig& cfg, const Segment& history, int regime,
                         std::int64_t start_step, std::int64_t end_step, int record_every = 1);

/// Continues a path from a saved integrator state; identical to an uninterrupted run.
struct PathState {
    std::int64_t step = 0;
    int regime = 0;
    Segment segment = Segment::zero(1.0, 1.0, 1, 1);
};

PathState simulate_to(const Model& model, const SolverConfig& cfg, const PathState& start, std::int64_t end_step);

struct PairTrajectory {
    std::vector<double> times;
    std::vector<double> gamma_norms;         // ||Gamma(t)||
    std::vector<double> gamma_segment_norms; // ||Gamma_t||_r
    PathState first;
    PathState second;
};

/// Two solutions from the same start time and regime, driven by the same chain
/// realization and the same Wiener path.
PairTrajectory simulate_pair_shared_noise(const Model& model, const SolverConfig& cfg, const Segment& phi,
                                          const Segment& psi, int regime, std::int64_t start_step,
                                          std::int64_t end_step, int record_every = 1);

/// Time-`end_step` states of solutions started at each of `start_steps` from
/// (phi, i), all driven by the same double-sided fields.
std::vector<StatePoint> remote_start_solve(const Model& model, const SolverConfig& cfg, const Segment& phi,
                                           int regime, const std::vector<std::int64_t>& start_steps,
                                           std::int64_t end_step = 0,
                                           std::vector<std::vector<NoiseRecord>>* noise_logs = nullptr);

// Trajectory CSV: "# swspde trajectory v1", then
// time,regime,x_0..x_{n-1},norm_head,norm_segment
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& os, const PathState& state, const SolverConfig& cfg);
/// Throws ValidationError on a bad magic, version, or grid mismatch with cfg.
PathState read_checkpoint(std::istream& is, const SolverConfig& cfg);

} // namespace swspde::sim
