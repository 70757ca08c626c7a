#pragma once

// Ergodicity certificates: non-singular M-matrix tests, the finite-state
// certificate (A, xi, K and the decay rates lambda, lambda_hat), and the
// finite-partition certificate for countable state spaces.

#include "swspde/chain.hpp"
#include "swspde/core.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace swspde::certify {

/// Constants of the dissipativity and noise-Lipschitz hypotheses, per regime.
struct ModelCoefficients {
    Eigen::VectorXd lambda1; // smallest eigenvalue of -A(k), > 0
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;    // > 0
    double L = 0.0;          // > 0
    double r = 1.0;
    DelayMeasure rho = DelayMeasure::point_mass();

    int n_states() const noexcept { return static_cast<int>(lambda1.size()); }
    /// Throws ValidationError on size mismatch or sign violations.
    void validate() const;
};

enum class Reason {
    none,
    pattern,      // not a Z-matrix
    singular,
    not_m_matrix, // Z-matrix failing the positivity tests
    delay_condition,
    no_rate,
    monotonicity,
    comparison,
    size_mismatch,
};

std::string to_string(Reason reason);

struct MMatrixDiagnostics {
    bool z_pattern = false;
    bool singular = false;
    bool eigenvalues_positive = false; // every real eigenvalue > tol
    bool semipositive = false;         // x = A^{-1} 1 is >> 0
    bool inverse_positive = false;     // A^{-1} >= 0 entrywise
    Eigen::VectorXcd eigenvalues;
    Eigen::VectorXd x;                 // A^{-1} 1 (empty when singular)
    Eigen::MatrixXd inverse;           // empty when singular
    bool pass = false;                 // all three agree on "yes"
    bool agree = false;                // the three criteria give the same answer
    Reason reason = Reason::none;
};

/// Runs the eigenvalue, semipositivity and inverse-positivity tests independently.
MMatrixDiagnostics is_nonsingular_m_matrix(const Eigen::MatrixXd& a, double tol = 1e-9);

/// -(Q + diag(alpha(k) - 2 lambda1(k) + L)).
Eigen::MatrixXd build_A_finite(const chain::GeneratorMatrix& q, const ModelCoefficients& coeffs);

struct DelayCondition {
    double K = 0.0;
    bool pass = false;
};

/// K = max_k (beta(k) + L) xi(k); passes iff K < 1 (with 1e-10 margin).
DelayCondition check_delay_condition(const Eigen::VectorXd& xi, const ModelCoefficients& coeffs);

struct DecayRates {
    double epsilon = 0.0;
    double lambda = 0.0;      // largest lambda in (0, 2r) with K1(lambda) <= 0
    double lambda_hat = 0.0;  // largest lambda_hat in (0, 2r) with K2(lambda_hat) <= 0
    bool lambda_capped = false;
    bool lambda_hat_capped = false;
};

/// K1(lambda) = (lambda + 2 eps) xi_max - 1 + (K + eps xi_max) rho^(lambda).
double k1(double lambda, double epsilon, double xi_max, double K, const DelayMeasure& rho);
/// K2(lambda) = lambda xi_max - 1 + K rho^(lambda).
double k2(double lambda, double xi_max, double K, const DelayMeasure& rho);

/// Bisection to 1e-10 for both rates with eps = (1 - K) / (6 xi_max).
/// Throws ValidationError when K >= 1.
DecayRates solve_decay_rates(double xi_max, double K, const DelayMeasure& rho, double r);

struct Certificate {
    Eigen::MatrixXd A;
    Eigen::VectorXd xi;
    double K = 0.0;
    DecayRates rates;
    std::optional<double> theta;  // coupling rate used for kappa
    std::optional<double> kappa;  // min(lambda_hat / 4, theta / 4)
    MMatrixDiagnostics m_matrix;
    bool xi_positive = false;
    bool delay_condition = false;
    bool rates_positive = false;
    bool pass = false;
    Reason reason = Reason::none;
};

Certificate certify_finite(const chain::GeneratorMatrix& q, const ModelCoefficients& coeffs,
                           std::optional<double> theta = std::nullopt);

/// Blocks F_d = {k : alpha(k) in (i_{d-1}, i_d]}, i_0 = -inf. `boundaries` lists
/// i_1 < ... < i_m (a leading -inf entry is accepted and ignored).
std::vector<std::vector<int>> build_partition(const Eigen::VectorXd& alpha, std::vector<double> boundaries);

/// Block generator: inf over the source block for l > k, sup for l < k.
chain::GeneratorMatrix build_QF(const chain::GeneratorMatrix& q, const std::vector<std::vector<int>>& blocks);

/// Upper-triangular matrix of ones.
Eigen::MatrixXd upper_ones(int m);

/// Bounds the user attests for the full (untruncated) state space.
struct AttestedBounds {
    std::optional<double> m_bound;
    std::optional<double> alpha_sup;
    std::optional<double> beta_sup;
};

struct Partition {
    std::vector<double> boundaries;
    std::vector<std::vector<int>> blocks;
    std::vector<int> block_of; // h(k)
    Eigen::MatrixXd QF;
    Eigen::VectorXd alphaF;
    Eigen::VectorXd betaF;
    Eigen::VectorXd lambda1F;
    Eigen::MatrixXd Hm;
    Eigen::MatrixXd AF;
    Eigen::VectorXd etaF;
    Eigen::VectorXd xiF;
    bool xiF_decreasing = false;
    double comparison_worst = 0.0; // max_k (Q xi)(k) - (QF xiF)(h(k))
    bool comparison_pass = false;
};

struct PartitionedCertificate {
    Partition partition;
    Certificate certificate; // A = A^F, xi = extended xi over the states
};

PartitionedCertificate certify_partitioned(const chain::GeneratorMatrix& q, const ModelCoefficients& coeffs,
                                           std::vector<double> boundaries, const AttestedBounds& bounds = {},
                                           std::optional<double> theta = std::nullopt);

} // namespace swspde::certify
