#include "swspde/sim.hpp"

#include "swspde/errors.hpp"
#include "swspde/keyed_rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace swspde::sim {

OperatorFamily::OperatorFamily(Eigen::MatrixXd eigenvalues) : eig_(std::move(eigenvalues)) {
    if (eig_.rows() < 1 || eig_.cols() < 1) {
        throw ValidationError("model.eigenvalues", "need at least one regime and one mode");
    }
    for (Eigen::Index k = 0; k < eig_.rows(); ++k) {
        for (Eigen::Index n = 0; n < eig_.cols(); ++n) {
            if (!(eig_(k, n) > 0.0) || !std::isfinite(eig_(k, n))) {
                throw ValidationError("model.eigenvalues", "eigenvalues must be finite and positive");
            }
            if (n > 0 && eig_(k, n) < eig_(k, n - 1)) {
                throw ValidationError("model.eigenvalues", "eigenvalues must be non-decreasing in the mode index");
            }
        }
    }
}

AffineCoefficients::AffineCoefficients(std::vector<AffineRegime> regimes) : regimes_(std::move(regimes)) {
    if (regimes_.empty()) throw ValidationError("model.states", "need at least one regime");
    const Eigen::Index n = regimes_.front().G.rows();
    const Eigen::Index w = regimes_.front().S0.cols();
    if (n < 1 || w < 1) throw ValidationError("model.states", "need at least one mode and one noise channel");
    for (std::size_t k = 0; k < regimes_.size(); ++k) {
        const auto& a = regimes_[k];
        const std::string where = "model.states[" + std::to_string(k) + "]";
        auto shape = [&](const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
            if (m.rows() != rows || m.cols() != cols) {
                throw ValidationError(where + "." + name, "expected " + std::to_string(rows) + "x" +
                                                              std::to_string(cols));
            }
            if (!m.allFinite()) throw ValidationError(where + "." + name, "non-finite entry");
        };
        shape(a.G, n, n, "G");
        shape(a.D, n, n, "D");
        shape(a.g, n, 1, "g");
        shape(a.S0, n, w, "S0");
        shape(a.S1, n, w, "S1");
        shape(a.S2, n, w, "S2");
        if ((a.G - a.G.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
            throw ValidationError(where + ".G", "instantaneous drift must be symmetric");
        }
    }
}

Eigen::VectorXd AffineCoefficients::drift(int k, const Eigen::VectorXd& x0, const Eigen::VectorXd& delayed) const {
    const auto& a = regime(k);
    return a.G * x0 + a.D * delayed + a.g;
}

Eigen::MatrixXd AffineCoefficients::diffusion(int k, const Eigen::VectorXd& x0, const Eigen::VectorXd& delayed) const {
    const auto& a = regime(k);
    Eigen::MatrixXd s = a.S0;
    for (Eigen::Index c = 0; c < s.cols(); ++c) {
        s.col(c).array() += a.S1.col(c).array() * x0.array() + a.S2.col(c).array() * delayed.array();
    }
    return s;
}

Model::Model(OperatorFamily ops_, AffineCoefficients coeffs_, DelayMeasure rho_, double r_, chain::GeneratorMatrix q_,
             double m_bound)
    : ops(std::move(ops_)), coeffs(std::move(coeffs_)), rho(std::move(rho_)), r(r_), q(std::move(q_)),
      table(chain::build_intervals(q, m_bound)) {
    if (!(r > 0.0)) throw ValidationError("model.r", "must be positive");
    if (ops.n_states() != q.n_states()) {
        throw ValidationError("model.eigenvalues", "one eigenvalue row per regime is required");
    }
    if (coeffs.n_states() != q.n_states()) {
        throw ValidationError("model.states", "one coefficient block per regime is required");
    }
    if (coeffs.n_modes() != ops.n_modes()) {
        throw ValidationError("model.states", "coefficient blocks do not match n_modes");
    }
}

certify::ModelCoefficients certify_affine(const AffineCoefficients& fam, const OperatorFamily& ops,
                                          const DelayMeasure& rho, double r) {
    constexpr double kPositiveFloor = 1e-300;
    const int n = fam.n_states();
    if (ops.n_states() != n) throw ValidationError("model.eigenvalues", "regime count mismatch");
    certify::ModelCoefficients out;
    out.lambda1.resize(n);
    out.alpha.resize(n);
    out.beta.resize(n);
    out.r = r;
    out.rho = rho;
    double lip = 0.0;
    for (int k = 0; k < n; ++k) {
        const auto& a = fam.regime(k);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.G, Eigen::EigenvaluesOnly);
        const double g_max = es.eigenvalues().maxCoeff();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.D);
        const double d_norm = svd.singularValues()(0);
        out.lambda1(k) = ops.lambda1(k);
        out.alpha(k) = 2.0 * g_max + d_norm;
        out.beta(k) = std::max(d_norm, kPositiveFloor);
        lip = std::max(lip, a.S1.squaredNorm() + a.S2.squaredNorm());
    }
    out.L = std::max(2.0 * lip, kPositiveFloor);
    return out;
}

certify::ModelCoefficients certify_affine(const Model& model) {
    return certify_affine(model.coeffs, model.ops, model.rho, model.r);
}

double phi_factor(double lambda, double dt) {
    const double x = lambda * dt;
    if (x < 1e-6) {
        // (1 - e^{-x}) / lambda = dt (1 - x/2 + x^2/6 - ...)
        return dt * (1.0 - x / 2.0 + x * x / 6.0);
    }
    return -std::expm1(-x) / lambda;
}

// ---------------------------------------------------------------------------
// Wiener field

WienerField::WienerField(std::uint64_t key, int channels) : key_(key), channels_(channels) {
    if (channels < 1) throw ValidationError("model.m_W", "need at least one noise channel");
}

double WienerField::node_gaussian(std::int64_t slot, int channel, std::uint64_t node) const {
    return rng::gaussian_at(rng::derive(key_, slot, channel, node));
}

Eigen::VectorXd WienerField::increment(double a, double b) const {
    WienerCursor cursor(*this);
    Eigen::VectorXd out(channels_);
    cursor.increment(a, b, out);
    return out;
}

WienerCursor::WienerCursor(const WienerField& field)
    : field_(field), stacks_(static_cast<std::size_t>(field.channels())) {}

double WienerCursor::bridge(int channel, std::int64_t slot, double frac) {
    if (!valid_ || slot != slot_) {
        for (auto& s : stacks_) s.clear();
        slot_ = slot;
        valid_ = true;
    }
    auto& stack = stacks_[static_cast<std::size_t>(channel)];
    if (stack.empty()) {
        stack.push_back({0.0, 1.0, 0.0, field_.node_gaussian(slot, channel, 0), 1});
    }
    while (stack.size() > 1 && !(stack.back().lo <= frac && frac <= stack.back().hi)) {
        stack.pop_back();
    }
    for (;;) {
        const Frame f = stack.back();
        if (frac == f.lo) return f.wlo;
        if (frac == f.hi) return f.whi;
        if (static_cast<int>(stack.size()) > WienerField::kDepth) {
            const double w = (frac - f.lo) / (f.hi - f.lo);
            return f.wlo + w * (f.whi - f.wlo);
        }
        const double mid = 0.5 * (f.lo + f.hi);
        const double wmid =
            0.5 * (f.wlo + f.whi) + std::sqrt(0.25 * (f.hi - f.lo)) * field_.node_gaussian(slot, channel, f.node);
        if (frac < mid) {
            stack.push_back({f.lo, mid, f.wlo, wmid, 2 * f.node});
        } else {
            stack.push_back({mid, f.hi, wmid, f.whi, 2 * f.node + 1});
        }
    }
}

void WienerCursor::increment(double a, double b, Eigen::VectorXd& out) {
    if (b < a) throw ValidationError("wiener", "increment end precedes start");
    const auto sa = static_cast<std::int64_t>(std::floor(a));
    const auto sb = static_cast<std::int64_t>(std::floor(b));
    const double fa = a - static_cast<double>(sa);
    const double fb = b - static_cast<double>(sb);
    const int w = field_.channels();
    out.resize(w);
    for (int c = 0; c < w; ++c) {
        if (sa == sb) {
            const double wa = bridge(c, sa, fa);
            out(c) = bridge(c, sa, fb) - wa;
            continue;
        }
        double acc = field_.node_gaussian(sa, c, 0) - bridge(c, sa, fa);
        for (std::int64_t m = sa + 1; m < sb; ++m) acc += field_.node_gaussian(m, c, 0);
        acc += bridge(c, sb, fb);
        out(c) = acc;
    }
}

// ---------------------------------------------------------------------------
// Solver configuration and single steps

std::int64_t SolverConfig::step_of(double t) const {
    const double x = t * steps_per_unit;
    const double rounded = std::round(x);
    if (std::abs(x - rounded) > 1e-6) {
        throw ValidationError("time", "t=" + std::to_string(t) + " is not on the dt grid");
    }
    return static_cast<std::int64_t>(rounded);
}

SolverConfig SolverConfig::make(double dt, double r, double t_hist, std::uint64_t wiener_key,
                                std::uint64_t poisson_key) {
    if (!(dt > 0.0) || dt > 1.0) throw ValidationError("solver.dt", "dt must lie in (0, 1]");
    const double inv = 1.0 / dt;
    const double n = std::round(inv);
    if (std::abs(inv - n) > 1e-9 * inv) throw ValidationError("solver.dt", "1/dt must be an integer");
    SolverConfig cfg;
    cfg.steps_per_unit = static_cast<int>(n);
    if (t_hist > 0.0) {
        cfg.history_points = static_cast<std::size_t>(std::ceil(t_hist * n - 1e-9)) + 1;
    } else {
        cfg.history_points = default_history_points(r, cfg.dt());
    }
    cfg.wiener_key = wiener_key;
    cfg.poisson_key = poisson_key;
    return cfg;
}

Eigen::VectorXd exp_euler_head(const Model& model, int k, const Eigen::VectorXd& x0, const Eigen::VectorXd& delayed,
                               double h, const Eigen::VectorXd& dW) {
    if (dW.size() != model.noise_dim()) throw ValidationError("dW", "noise increment has the wrong length");
    const Eigen::VectorXd b = model.coeffs.drift(k, x0, delayed);
    const Eigen::VectorXd noise = model.coeffs.diffusion(k, x0, delayed) * dW;
    Eigen::VectorXd out(x0.size());
    for (Eigen::Index n = 0; n < x0.size(); ++n) {
        const double lam = model.ops.eigenvalue(k, static_cast<int>(n));
        const double e = std::exp(-lam * h);
        out(n) = e * x0(n) + phi_factor(lam, h) * b(n) + e * noise(n);
    }
    return out;
}

Segment exp_euler_step(const Model& model, const Segment& seg, int k, double dt, const Eigen::VectorXd& dW) {
    if (dW.size() != model.noise_dim()) throw ValidationError("dW", "noise increment has the wrong length");
    if (dt == 0.0) return seg;
    const Eigen::VectorXd head = exp_euler_head(model, k, seg.head(), delay_integral(seg, model.rho), dt, dW);
    Segment out = seg;
    out.advance(head);
    return out;
}

// ---------------------------------------------------------------------------
// Path integration

PathIntegrator::PathIntegrator(const Model& model, const SolverConfig& cfg, Segment history, int regime,
                               std::int64_t start_step, const chain::ChainPath& chain, const WienerField& wiener)
    : model_(&model), cfg_(cfg), seg_(std::move(history)), regime_(regime), step_(start_step), chain_(chain),
      cursor_(wiener) {
    if (seg_.n_modes() != static_cast<std::size_t>(model.n_modes())) {
        throw ValidationError("initial.history", "history has the wrong number of modes");
    }
    if (seg_.dt() != cfg.dt()) throw ValidationError("initial.history", "history grid step differs from dt");
    if (seg_.r() != model.r) throw ValidationError("initial.history", "history weight differs from model r");
    if (regime < 0 || regime >= model.n_states()) throw ValidationError("initial.regime", "out of range");
    if (wiener.channels() != model.noise_dim()) throw ValidationError("model.m_W", "Wiener field dimension mismatch");
    const double t0 = cfg_.time_of(start_step);
    while (next_jump_ < chain_.jumps.size() && chain_.jumps[next_jump_].time <= t0) ++next_jump_;

    const int n = model.n_modes();
    for (int k = 0; k < model.n_states(); ++k) {
        Eigen::VectorXd e(n), p(n);
        for (int m = 0; m < n; ++m) {
            const double lam = model.ops.eigenvalue(k, m);
            e(m) = std::exp(-lam * cfg_.dt());
            p(m) = phi_factor(lam, cfg_.dt());
        }
        decay_.push_back(e);
        phi_.push_back(p);
    }
    x_ = seg_.head();
    x_base_.resize(n);
    delayed_.resize(n);
    drift_.resize(n);
    noise_.resize(n);
    tmp_.resize(n);
    tmp2_.resize(n);
    e_.resize(n);
    ph_.resize(n);
    dW_.resize(model.noise_dim());
}

void PathIntegrator::delayed_value(double t0, double base_time, Eigen::VectorXd& out) {
    out.setZero();
    const double offset = t0 - base_time; // position of t0 inside the current base step
    for (const auto& atom : model_->rho.atoms()) {
        if (atom.theta == 0.0) {
            out += atom.weight * x_;
            continue;
        }
        const double rel = offset + atom.theta;
        if (rel >= 0.0) {
            // Between the last grid point and the current head.
            const double w = offset > 0.0 ? rel / offset : 0.0;
            out += atom.weight * ((1.0 - w) * x_base_ + w * x_);
        } else {
            out += atom.weight * seg_.eval(rel);
        }
    }
}

void PathIntegrator::piece(double t0, double t1, int k, double base_time) {
    const double h = t1 - t0;
    if (h <= 0.0) return;
    cursor_.increment(t0, t1, dW_);
    if (noise_log_) noise_log_->push_back({t0, t1, dW_});

    delayed_value(t0, base_time, delayed_);
    const auto& a = model_->coeffs.regime(k);
    drift_.noalias() = a.G * x_;
    drift_.noalias() += a.D * delayed_;
    drift_ += a.g;
    noise_.noalias() = a.S0 * dW_;
    tmp_.noalias() = a.S1 * dW_;
    tmp2_.noalias() = a.S2 * dW_;
    noise_.array() += x_.array() * tmp_.array() + delayed_.array() * tmp2_.array();

    const bool full = (h == cfg_.dt());
    if (full) {
        e_ = decay_[static_cast<std::size_t>(k)];
        ph_ = phi_[static_cast<std::size_t>(k)];
    } else {
        for (Eigen::Index m = 0; m < x_.size(); ++m) {
            const double lam = model_->ops.eigenvalue(k, static_cast<int>(m));
            e_(m) = std::exp(-lam * h);
            ph_(m) = phi_factor(lam, h);
        }
    }
    x_.array() = e_.array() * (x_.array() + noise_.array()) + ph_.array() * drift_.array();
}

void PathIntegrator::step() {
    const double a = cfg_.time_of(step_);
    const double b = cfg_.time_of(step_ + 1);
    x_base_ = x_;
    double cur = a;
    int k = regime_;
    while (next_jump_ < chain_.jumps.size() && chain_.jumps[next_jump_].time <= b) {
        const auto& j = chain_.jumps[next_jump_];
        piece(cur, j.time, k, a);
        cur = j.time;
        k = j.state;
        ++next_jump_;
    }
    piece(cur, b, k, a);
    regime_ = k;
    ++step_;
    if (!x_.allFinite()) throw DivergenceError(b);
    seg_.advance(x_);
}

void PathIntegrator::run_until(std::int64_t end_step) {
    while (step_ < end_step) step();
}

namespace {

void record(Trajectory& traj, const PathIntegrator& integ, std::size_t col) {
    traj.times.push_back(integ.time());
    traj.regimes.push_back(integ.regime());
    const auto head = integ.segment().head();
    traj.states.col(static_cast<Eigen::Index>(col)) = head;
    traj.head_norms.push_back(head.norm());
    traj.segment_norms.push_back(segment_norm_r(integ.segment()));
}

} // namespace

Trajectory simulate_path(const Model& model, const SolverConfig& cfg, const Segment& history, int regime,
                         std::int64_t start_step, std::int64_t end_step, int record_every) {
    if (end_step < start_step) throw ValidationError("horizon", "end precedes start");
    if (record_every < 1) throw ValidationError("record_every", "must be >= 1");
    const chain::PoissonField poisson(cfg.poisson_key, model.table.m_bound());
    const WienerField wiener(cfg.wiener_key, model.noise_dim());
    const auto chain_path =
        chain::simulate_chain(model.table, regime, cfg.time_of(start_step), cfg.time_of(end_step), poisson);
    PathIntegrator integ(model, cfg, history, regime, start_step, chain_path, wiener);

    const std::int64_t total = end_step - start_step;
    const std::int64_t n_rec = total / record_every + 1 + ((total % record_every) != 0 ? 1 : 0);
    Trajectory traj;
    traj.states.resize(model.n_modes(), static_cast<Eigen::Index>(n_rec));
    std::size_t col = 0;
    record(traj, integ, col++);
    while (integ.step_index() < end_step) {
        integ.step();
        const std::int64_t done = integ.step_index() - start_step;
        if (done % record_every == 0 || integ.step_index() == end_step) record(traj, integ, col++);
    }
    return traj;
}

PathState simulate_to(const Model& model, const SolverConfig& cfg, const PathState& start, std::int64_t end_step) {
    if (end_step < start.step) throw ValidationError("horizon", "end precedes start");
    const chain::PoissonField poisson(cfg.poisson_key, model.table.m_bound());
    const WienerField wiener(cfg.wiener_key, model.noise_dim());
    const auto chain_path =
        chain::simulate_chain(model.table, start.regime, cfg.time_of(start.step), cfg.time_of(end_step), poisson);
    PathIntegrator integ(model, cfg, start.segment, start.regime, start.step, chain_path, wiener);
    integ.run_until(end_step);
    return {integ.step_index(), integ.regime(), integ.segment()};
}

PairTrajectory simulate_pair_shared_noise(const Model& model, const SolverConfig& cfg, const Segment& phi,
                                          const Segment& psi, int regime, std::int64_t start_step,
                                          std::int64_t end_step, int record_every) {
    if (end_step < start_step) throw ValidationError("horizon", "end precedes start");
    if (record_every < 1) throw ValidationError("record_every", "must be >= 1");
    const chain::PoissonField poisson(cfg.poisson_key, model.table.m_bound());
    const WienerField wiener(cfg.wiener_key, model.noise_dim());
    const auto chain_path =
        chain::simulate_chain(model.table, regime, cfg.time_of(start_step), cfg.time_of(end_step), poisson);
    PathIntegrator p1(model, cfg, phi, regime, start_step, chain_path, wiener);
    PathIntegrator p2(model, cfg, psi, regime, start_step, chain_path, wiener);

    PairTrajectory out;
    auto rec = [&] {
        out.times.push_back(p1.time());
        out.gamma_norms.push_back((p1.segment().head() - p2.segment().head()).norm());
        out.gamma_segment_norms.push_back(segment_norm_r(p1.segment() - p2.segment()));
    };
    rec();
    while (p1.step_index() < end_step) {
        p1.step();
        p2.step();
        const std::int64_t done = p1.step_index() - start_step;
        if (done % record_every == 0 || p1.step_index() == end_step) rec();
    }
    out.first = {p1.step_index(), p1.regime(), p1.segment()};
    out.second = {p2.step_index(), p2.regime(), p2.segment()};
    return out;
}

std::vector<StatePoint> remote_start_solve(const Model& model, const SolverConfig& cfg, const Segment& phi,
                                           int regime, const std::vector<std::int64_t>& start_steps,
                                           std::int64_t end_step,
                                           std::vector<std::vector<NoiseRecord>>* noise_logs) {
    const chain::PoissonField poisson(cfg.poisson_key, model.table.m_bound());
    const WienerField wiener(cfg.wiener_key, model.noise_dim());
    std::vector<StatePoint> out;
    out.reserve(start_steps.size());
    if (noise_logs) noise_logs->assign(start_steps.size(), {});
    for (std::size_t idx = 0; idx < start_steps.size(); ++idx) {
        const std::int64_t s = start_steps[idx];
        if (s > end_step) throw ValidationError("schedule", "start times must not exceed the evaluation time");
        const auto chain_path =
            chain::simulate_chain(model.table, regime, cfg.time_of(s), cfg.time_of(end_step), poisson);
        PathIntegrator integ(model, cfg, phi, regime, s, chain_path, wiener);
        if (noise_logs) integ.set_noise_log(&(*noise_logs)[idx]);
        integ.run_until(end_step);
        out.push_back(integ.state());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

constexpr char kMagic[8] = {'S', 'W', 'S', 'P', 'D', 'E', 'C', 'K'};

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ValidationError("checkpoint", "truncated checkpoint");
    return v;
}

} // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const auto n_modes = traj.states.rows();
    os << "# swspde trajectory v1\n";
    os << "time,regime";
    for (Eigen::Index m = 0; m < n_modes; ++m) os << ",x_" << m;
    os << ",norm_head,norm_segment\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        os << format_double(traj.times[i]) << ',' << traj.regimes[i];
        for (Eigen::Index m = 0; m < n_modes; ++m) {
            os << ',' << format_double(traj.states(m, static_cast<Eigen::Index>(i)));
        }
        os << ',' << format_double(traj.head_norms[i]) << ',' << format_double(traj.segment_norms[i]) << '\n';
    }
}

void write_checkpoint(std::ostream& os, const PathState& state, const SolverConfig& cfg) {
    os.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(os, kCheckpointVersion);
    put<std::int64_t>(os, state.step);
    put<std::int32_t>(os, state.regime);
    put<std::int32_t>(os, cfg.steps_per_unit);
    put<std::uint64_t>(os, cfg.wiener_key);
    put<std::uint64_t>(os, cfg.poisson_key);
    put<double>(os, state.segment.r());
    put<std::uint64_t>(os, state.segment.n_points());
    put<std::uint64_t>(os, state.segment.n_modes());
    for (Eigen::Index m = 0; m < state.segment.tail_limit().size(); ++m) put<double>(os, state.segment.tail_limit()(m));
    const Eigen::MatrixXd values = state.segment.ordered_values();
    for (Eigen::Index c = 0; c < values.cols(); ++c)
        for (Eigen::Index m = 0; m < values.rows(); ++m) put<double>(os, values(m, c));
}

PathState read_checkpoint(std::istream& is, const SolverConfig& cfg) {
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ValidationError("checkpoint", "not a swspde checkpoint");
    }
    const auto version = get<std::uint32_t>(is);
    if (version != kCheckpointVersion) throw ValidationError("checkpoint", "unsupported checkpoint version");
    PathState st{get<std::int64_t>(is), get<std::int32_t>(is), Segment::zero(1.0, 1.0, 1, 1)};
    const auto spu = get<std::int32_t>(is);
    const auto wkey = get<std::uint64_t>(is);
    const auto pkey = get<std::uint64_t>(is);
    if (spu != cfg.steps_per_unit) throw ValidationError("checkpoint", "dt differs from the configured solver");
    if (wkey != cfg.wiener_key || pkey != cfg.poisson_key) {
        throw ValidationError("checkpoint", "noise keys differ from the configured solver");
    }
    const auto r = get<double>(is);
    const auto n_points = get<std::uint64_t>(is);
    const auto n_modes = get<std::uint64_t>(is);
    if (n_points == 0 || n_modes == 0 || n_points > (1ULL << 32) || n_modes > (1ULL << 20)) {
        throw ValidationError("checkpoint", "implausible segment shape");
    }
    Eigen::VectorXd tail(static_cast<Eigen::Index>(n_modes));
    for (Eigen::Index m = 0; m < tail.size(); ++m) tail(m) = get<double>(is);
    Eigen::MatrixXd values(static_cast<Eigen::Index>(n_modes), static_cast<Eigen::Index>(n_points));
    for (Eigen::Index c = 0; c < values.cols(); ++c)
        for (Eigen::Index m = 0; m < values.rows(); ++m) values(m, c) = get<double>(is);
    st.segment = Segment(r, cfg.dt(), values, tail);
    return st;
}

} // namespace swspde::sim
