#include "swspde/core.hpp"

#include "swspde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swspde {

DelayMeasure::DelayMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) {
        throw ValidationError("rho", "delay measure needs at least one atom");
    }
    double total = 0.0;
    for (const auto& a : atoms_) {
        if (!std::isfinite(a.theta) || a.theta > 0.0) {
            throw ValidationError("rho", "atom lag must be finite and <= 0");
        }
        if (!std::isfinite(a.weight) || a.weight <= 0.0) {
            throw ValidationError("rho", "atom weight must be positive");
        }
        total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw ValidationError("rho", "weights sum to " + std::to_string(total) + ", expected 1");
    }
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.theta > b.theta; });
    for (std::size_t j = 1; j < atoms_.size(); ++j) {
        if (atoms_[j].theta == atoms_[j - 1].theta) {
            throw ValidationError("rho", "duplicate atom lag");
        }
    }
}

DelayMeasure DelayMeasure::point_mass(double theta) { return DelayMeasure({{theta, 1.0}}); }

double DelayMeasure::moment(double s) const {
    if (!(s >= 0.0)) {
        throw ValidationError("s", "moment order must be >= 0");
    }
    double sum = 0.0;
    for (const auto& a : atoms_) {
        sum += a.weight * std::exp(-s * a.theta);
    }
    return sum;
}

double rho_moment(const DelayMeasure& rho, double s) { return rho.moment(s); }

Segment::Segment(double r, double dt, const Eigen::MatrixXd& values, SpectralVector tail_limit)
    : r_(r), dt_(dt), storage_(values), tail_(std::move(tail_limit)) {
    if (!(r > 0.0)) throw ValidationError("segment.r", "weight exponent must be positive");
    if (!(dt > 0.0)) throw ValidationError("segment.dt", "grid step must be positive");
    if (values.cols() < 1 || values.rows() < 1) {
        throw ValidationError("segment.values", "segment needs at least one grid point and one mode");
    }
    if (tail_.size() != values.rows()) {
        throw ValidationError("segment.tail_limit", "tail limit has the wrong number of modes");
    }
}

Segment Segment::zero(double r, double dt, std::size_t n_points, std::size_t n_modes) {
    const auto rows = static_cast<Eigen::Index>(n_modes);
    return Segment(r, dt, Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(n_points)),
                   SpectralVector::Zero(rows));
}

Segment Segment::constant(double r, double dt, std::size_t n_points, const SpectralVector& value) {
    Eigen::MatrixXd values = value.replicate(1, static_cast<Eigen::Index>(n_points));
    return Segment(r, dt, values, SpectralVector::Zero(value.size()));
}

SpectralVector Segment::eval(double theta) const {
    if (theta > 0.0) {
        throw ValidationError("theta", "segments are defined for theta <= 0 only");
    }
    const double pos = -theta / dt_;
    const auto last = static_cast<double>(n_points() - 1);
    if (pos > last) {
        return std::exp(-r_ * theta) * tail_;
    }
    const double fl = std::floor(pos);
    const auto m = static_cast<std::size_t>(fl);
    const double w = pos - fl;
    if (w == 0.0 || m + 1 >= n_points()) {
        return value(m);
    }
    return (1.0 - w) * value(m) + w * value(m + 1);
}

void Segment::advance(const Eigen::Ref<const SpectralVector>& new_head) {
    const std::size_t n = n_points();
    head_ = (head_ + n - 1) % n;
    storage_.col(static_cast<Eigen::Index>(head_)) = new_head;
}

Eigen::MatrixXd Segment::ordered_values() const {
    Eigen::MatrixXd out(storage_.rows(), storage_.cols());
    for (std::size_t m = 0; m < n_points(); ++m) {
        out.col(static_cast<Eigen::Index>(m)) = value(m);
    }
    return out;
}

bool Segment::same_grid(const Segment& other) const noexcept {
    return r_ == other.r_ && dt_ == other.dt_ && n_points() == other.n_points() &&
           n_modes() == other.n_modes();
}

Segment Segment::operator-(const Segment& other) const {
    if (!same_grid(other)) {
        throw ValidationError("segment", "segments live on different grids");
    }
    return Segment(r_, dt_, ordered_values() - other.ordered_values(), tail_ - other.tail_);
}

Segment Segment::scaled(double c) const {
    return Segment(r_, dt_, c * ordered_values(), c * tail_);
}

std::size_t default_history_points(double r, double dt, double tol) {
    const double horizon = std::log(1.0 / tol) / (2.0 * r);
    // Strict inequality e^{-2 r T} < tol.
    auto steps = static_cast<std::size_t>(std::floor(horizon / dt)) + 1;
    return steps + 1;
}

double segment_norm_r(const Segment& seg) {
    double best = 0.0;
    for (std::size_t m = 0; m < seg.n_points(); ++m) {
        const double n = seg.value(m).norm();
        if (std::isnan(n)) {
            throw ValidationError("segment.values", "NaN coefficient at grid point " + std::to_string(m));
        }
        const double theta = -static_cast<double>(m) * seg.dt();
        best = std::max(best, std::exp(seg.r() * theta) * n);
    }
    const double tail = seg.tail_limit().norm();
    if (std::isnan(tail)) {
        throw ValidationError("segment.tail_limit", "NaN coefficient");
    }
    return std::max(best, tail);
}

SpectralVector delay_integral(const Segment& seg, const DelayMeasure& rho) {
    SpectralVector acc = SpectralVector::Zero(static_cast<Eigen::Index>(seg.n_modes()));
    for (const auto& a : rho.atoms()) {
        acc += a.weight * seg.eval(a.theta);
    }
    return acc;
}

double metric_d(const StatePoint& a, const StatePoint& b) {
    const double dist = segment_norm_r(a.segment - b.segment);
    return dist + (a.regime == b.regime ? 0.0 : 1.0);
}

} // namespace swspde
