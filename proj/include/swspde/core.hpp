#pragma once

// Function-space scaffolding: truncated spectral vectors, infinite-delay
// segments with the exponentially weighted sup norm, finitely supported delay
// measures and the product metric on segments x regimes.

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace swspde {

/// Coefficients of an element of H in the shared eigenbasis of the operators -A(k).
/// The Euclidean norm of the coefficients is the (truncated) H norm.
using SpectralVector = Eigen::VectorXd;

/// Finitely supported probability measure on (-inf, 0].
class DelayMeasure {
public:
    struct Atom {
        double theta; // lag, <= 0
        double weight;
    };

    /// Atoms may be given in any order; they are stored by decreasing lag
    /// (theta = 0 first). Throws ValidationError on bad weights or lags.
    explicit DelayMeasure(std::vector<Atom> atoms);

    static DelayMeasure point_mass(double theta = 0.0);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }

    /// sum_j p_j exp(-s theta_j), the rho^(s) moment. Requires s >= 0.
    double moment(double s) const;

    /// Deepest lag, i.e. the smallest theta_j.
    double deepest_lag() const noexcept { return atoms_.back().theta; }

private:
    std::vector<Atom> atoms_;
};

double rho_moment(const DelayMeasure& rho, double s);

/// Discretized history x(theta), theta <= 0, on the grid 0, -dt, ..., -T_hist.
///
/// Beyond the grid horizon the path is taken to be e^{-r theta} * tail_limit,
/// which is the only behaviour compatible with lim e^{r theta} x(theta) =
/// tail_limit. Storage is a ring buffer so that `advance` is O(n_modes).
class Segment {
public:
    /// `values` has one column per grid point: column m holds x(-m dt).
    Segment(double r, double dt, const Eigen::MatrixXd& values, SpectralVector tail_limit);

    static Segment zero(double r, double dt, std::size_t n_points, std::size_t n_modes);
    static Segment constant(double r, double dt, std::size_t n_points, const SpectralVector& value);

    double r() const noexcept { return r_; }
    double dt() const noexcept { return dt_; }
    std::size_t n_points() const noexcept { return static_cast<std::size_t>(storage_.cols()); }
    std::size_t n_modes() const noexcept { return static_cast<std::size_t>(storage_.rows()); }
    double horizon() const noexcept { return static_cast<double>(n_points() - 1) * dt_; }
    const SpectralVector& tail_limit() const noexcept { return tail_; }

    /// Value at grid point m (time -m dt).
    auto value(std::size_t m) const { return storage_.col(column(m)); }
    SpectralVector head() const { return value(0); }

    /// x(theta) for theta <= 0: linear interpolation on the grid, tail rule beyond it.
    SpectralVector eval(double theta) const;

    /// Shifts the grid by one step: `new_head` becomes x(0), the oldest point is dropped.
    void advance(const Eigen::Ref<const SpectralVector>& new_head);

    /// Values ordered from theta = 0 backwards (a plain copy of the ring buffer).
    Eigen::MatrixXd ordered_values() const;

    bool same_grid(const Segment& other) const noexcept;

    Segment operator-(const Segment& other) const;
    Segment scaled(double c) const;

private:
    std::size_t column(std::size_t m) const noexcept {
        const std::size_t n = n_points();
        return (head_ + m) % n;
    }

    double r_;
    double dt_;
    Eigen::MatrixXd storage_;
    std::size_t head_ = 0;
    SpectralVector tail_;
};

/// Number of grid points needed so that e^{-2 r T_hist} < tol.
std::size_t default_history_points(double r, double dt, double tol = 1e-8);

/// sup_{theta <= 0} e^{r theta} ||x(theta)||, evaluated on the grid and against
/// the tail limit. Throws ValidationError if any coefficient is NaN.
double segment_norm_r(const Segment& seg);

/// sum_j p_j x(theta_j).
SpectralVector delay_integral(const Segment& seg, const DelayMeasure& rho);

/// Element of C_r x S.
struct StatePoint {
    Segment segment;
    int regime = 0;
};

/// ||x - y||_r + 1{k != l}. Throws ValidationError when the grids differ.
double metric_d(const StatePoint& a, const StatePoint& b);

} // namespace swspde
