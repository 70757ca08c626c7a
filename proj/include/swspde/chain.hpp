#pragma once

// Markovian switching: the interval table of the Skorokhod representation,
// the mark-to-jump map h(k, u), a slot-keyed double-sided Poisson field, chain
// paths driven by that field, and the two-chain difference generator.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace swspde::chain {

/// Generator of a continuous-time Markov chain on {0, ..., n-1}.
class GeneratorMatrix {
public:
    /// Throws ValidationError unless off-diagonals are >= 0 and rows sum to 0 (1e-12).
    explicit GeneratorMatrix(Eigen::MatrixXd q);

    int n_states() const noexcept { return static_cast<int>(q_.rows()); }
    const Eigen::MatrixXd& matrix() const noexcept { return q_; }
    double rate(int k, int l) const { return q_(k, l); }
    double exit_rate(int k) const { return -q_(k, k); }
    double max_exit_rate() const;
    bool irreducible() const;

private:
    Eigen::MatrixXd q_;
};

struct Interval {
    int target;
    double left;
    double right; // [left, right)
};

/// Rows of disjoint intervals Delta_kl with length q_kl, laid out contiguously
/// from 0 in increasing target order (k itself skipped).
class IntervalTable {
public:
    IntervalTable(std::vector<std::vector<Interval>> rows, double m_bound);

    int n_states() const noexcept { return static_cast<int>(rows_.size()); }
    const std::vector<Interval>& row(int k) const { return rows_.at(static_cast<std::size_t>(k)); }
    double m_bound() const noexcept { return m_bound_; }

private:
    std::vector<std::vector<Interval>> rows_;
    double m_bound_;
};

/// `m_bound` defaults to max_k q_k; a larger attested bound M may be supplied
/// (countable state spaces truncated under a uniform exit-rate bound).
IntervalTable build_intervals(const GeneratorMatrix& q,
                              double m_bound = std::numeric_limits<double>::quiet_NaN());

/// h(k, u) = l - k for u in Delta_kl, 0 outside U_k. Throws for u outside [0, M].
int jump_h(const IntervalTable& table, int k, double u);

struct PoissonPoint {
    double time;
    double mark;
};

/// Poisson random measure on R x [0, M] with intensity dt x Lebesgue.
///
/// Points of the unit slot [m, m+1) are a pure function of (key, m), for every
/// integer m including negative ones, so the field is consistent under any
/// change of the simulation window.
class PoissonField {
public:
    PoissonField(std::uint64_t key, double m_bound);

    std::uint64_t key() const noexcept { return key_; }
    double m_bound() const noexcept { return m_bound_; }

    /// Points of slot m sorted by (time, mark).
    std::vector<PoissonPoint> slot(std::int64_t m) const;

    /// Calls fn(point) for every point with s < time <= t, in time order.
    void for_each(double s, double t, const std::function<void(const PoissonPoint&)>& fn) const;

private:
    std::uint64_t key_;
    double m_bound_;
};

struct Jump {
    double time;
    int state;
};

/// Right-continuous step path started at (start_time, start_state).
struct ChainPath {
    double start_time = 0.0;
    int start_state = 0;
    double end_time = 0.0;
    std::vector<Jump> jumps;

    int state_at(double t) const;
};

ChainPath simulate_chain(const IntervalTable& table, int i, double s, double t, const PoissonField& field);

/// Independent reference simulator: exponential holding times, jump to l w.p. q_kl / q_k.
ChainPath gillespie_chain(const GeneratorMatrix& q, int i, double s, double t, std::mt19937_64& rng);

struct CoupledChains {
    ChainPath first;  // started at s1
    ChainPath second; // started at s2
    double tau;       // +inf when the paths have not met by the end time
};

/// Both chains start in state i (at s1 <= s2) and read the same field up to t_end.
CoupledChains couple_chains(const IntervalTable& table, int i, double s1, double s2, const PoissonField& field,
                            double t_end);

/// First meeting time of the two coupled chains, simulated lazily until t_max.
double coupling_time(const IntervalTable& table, int i, double s1, double s2, const PoissonField& field,
                     double t_max);

using DifferenceFunction = std::function<double(long)>;

/// LV(k, l) = int_[0,M] (V(k - l + h(k,u) - h(l,u)) - V(k - l)) du, integrated
/// exactly over the pieces cut by the interval endpoints of rows k and l.
double two_chain_generator(const IntervalTable& table, const DifferenceFunction& v, int k, int l);

struct CouplingFunctionReport {
    bool pass = false;
    double max_value = -std::numeric_limits<double>::infinity();
    int worst_k = -1;
    int worst_l = -1;
    double sup_norm = 0.0;
    double theta_max = 0.0; // admissible coupling rates are (0, theta_max)
    bool nonnegative = true;
};

/// Checks LF(k, l) <= -1 for all k != l on the table's state range.
CouplingFunctionReport verify_coupling_function(const IntervalTable& table, const DifferenceFunction& f);

} // namespace swspde::chain
