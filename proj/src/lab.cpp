#include "swspde/lab.hpp"

#include "swspde/errors.hpp"
#include "swspde/keyed_rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace swspde::lab {

namespace {

constexpr std::uint64_t kWienerTag = 1;
constexpr std::uint64_t kPoissonTag = 2;

bool within_divergence_budget(std::size_t divergent, std::size_t total) {
    return static_cast<double>(divergent) <= 0.01 * static_cast<double>(total);
}

std::vector<double> record_times(const sim::SolverConfig& cfg, std::int64_t start, std::int64_t end, int every) {
    std::vector<double> t{cfg.time_of(start)};
    for (std::int64_t s = start + 1; s <= end; ++s) {
        if ((s - start) % every == 0 || s == end) t.push_back(cfg.time_of(s));
    }
    return t;
}

// Column-wise mean and SE over the rows that are present (finite).
void column_stats(const std::vector<std::vector<double>>& rows, std::size_t n_cols, std::vector<double>& mean,
                  std::vector<double>* se) {
    mean.assign(n_cols, 0.0);
    if (se) se->assign(n_cols, 0.0);
    std::vector<double> col;
    for (std::size_t c = 0; c < n_cols; ++c) {
        col.clear();
        for (const auto& r : rows)
            if (!r.empty()) col.push_back(r[c]);
        const auto ms = jackknife_mean_se(col);
        mean[c] = ms.mean;
        if (se) (*se)[c] = ms.se;
    }
}

} // namespace

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

MeanSE jackknife_mean_se(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    const double total = pairwise_sum(x);
    const double mean = total / static_cast<double>(n);
    if (n == 1) return {mean, 0.0};
    std::vector<double> dev(n);
    const double nm1 = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double loo = (total - x[i]) / nm1;
        dev[i] = (loo - mean) * (loo - mean);
    }
    return {mean, std::sqrt(nm1 / static_cast<double>(n) * pairwise_sum(dev))};
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ValidationError("fit", "x and y lengths differ");
    LinearFit fit;
    fit.n = x.size();
    if (fit.n < 2) return fit;
    const double n = static_cast<double>(fit.n);
    const double mx = pairwise_sum(x) / n;
    const double my = pairwise_sum(y) / n;
    std::vector<double> sxy(fit.n), sxx(fit.n), syy(fit.n);
    for (std::size_t i = 0; i < fit.n; ++i) {
        sxy[i] = (x[i] - mx) * (y[i] - my);
        sxx[i] = (x[i] - mx) * (x[i] - mx);
        syy[i] = (y[i] - my) * (y[i] - my);
    }
    const double cxy = pairwise_sum(sxy);
    const double cxx = pairwise_sum(sxx);
    const double cyy = pairwise_sum(syy);
    if (cxx == 0.0) return fit;
    fit.slope = cxy / cxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = cyy > 0.0 ? (cxy * cxy) / (cxx * cyy) : 1.0;
    return fit;
}

DecayFit fit_log_decay(const std::vector<double>& times, const std::vector<double>& values, const FitWindow& window) {
    if (times.size() != values.size()) throw ValidationError("fit", "times and values lengths differ");
    DecayFit out;
    if (times.empty()) {
        out.degenerate = true;
        return out;
    }
    const double first = times.front();
    const double last = times.back();
    out.t_lo = window.t_lo.value_or(first + window.burn_in * (last - first));
    out.t_hi = window.t_hi.value_or(last);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < out.t_lo || times[i] > out.t_hi) continue;
        if (!(values[i] > kLogFloor)) {
            ++out.n_floored;
            continue;
        }
        x.push_back(times[i]);
        y.push_back(std::log(values[i]));
    }
    out.n_points = x.size();
    if (x.size() < 2) {
        out.degenerate = true;
        return out;
    }
    const auto lf = least_squares(x, y);
    out.rate = -lf.slope;
    out.intercept = lf.intercept;
    out.r_squared = lf.r_squared;
    out.low_r_squared = lf.r_squared < 0.8;
    return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_index = n;
    std::exception_ptr failure;
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                // Keep the failure of the lowest index so the error is scheduling-independent.
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

sim::SolverConfig path_config(const sim::SolverConfig& base, std::uint64_t seed, std::size_t path) {
    sim::SolverConfig cfg = base;
    cfg.wiener_key = rng::derive(seed, path, kWienerTag);
    cfg.poisson_key = rng::derive(seed, path, kPoissonTag);
    return cfg;
}

void EnsembleSpec::validate() const {
    if (n_paths < 2) throw ValidationError("experiment.n_paths", "need at least two paths");
    if (end_step < start_step) throw ValidationError("experiment.t_end", "end precedes start");
    if (record_every < 1) throw ValidationError("experiment.record_every", "must be >= 1");
}

// ---------------------------------------------------------------------------

MomentReport moment_bound_experiment(const sim::Model& model, const Segment& phi, int regime,
                                     const EnsembleSpec& spec, std::optional<double> certified_rate) {
    spec.validate();
    MomentReport rep;
    rep.times = record_times(spec.solver, spec.start_step, spec.end_step, spec.record_every);
    const std::size_t n_t = rep.times.size();
    std::vector<std::vector<double>> head(spec.n_paths), seg(spec.n_paths);
    rep.final_first_mode.assign(spec.n_paths, std::numeric_limits<double>::quiet_NaN());

    parallel_for(spec.n_paths, spec.threads, [&](std::size_t p) {
        const auto cfg = path_config(spec.solver, spec.seed, p);
        try {
            const auto traj =
                sim::simulate_path(model, cfg, phi, regime, spec.start_step, spec.end_step, spec.record_every);
            head[p].resize(n_t);
            seg[p].resize(n_t);
            for (std::size_t i = 0; i < n_t; ++i) {
                head[p][i] = traj.head_norms[i] * traj.head_norms[i];
                seg[p][i] = traj.segment_norms[i] * traj.segment_norms[i];
            }
            rep.final_first_mode[p] = traj.states(0, static_cast<Eigen::Index>(n_t - 1));
        } catch (const DivergenceError&) {
            head[p].clear();
            seg[p].clear();
        }
    });
    for (const auto& h : head)
        if (h.empty()) ++rep.n_divergent;

    column_stats(head, n_t, rep.mean_sq, &rep.se_sq);
    column_stats(seg, n_t, rep.mean_sq_segment, nullptr);
    if (rep.n_divergent == spec.n_paths) return rep;

    const double t0 = rep.times.front();
    const double t1 = rep.times.back();
    std::vector<double> tail;
    for (std::size_t i = 0; i < n_t; ++i) {
        rep.sup_mean_sq = std::max(rep.sup_mean_sq, rep.mean_sq[i]);
        if (rep.times[i] >= t0 + 0.8 * (t1 - t0)) tail.push_back(rep.mean_sq[i]);
    }
    rep.plateau = pairwise_sum(tail) / static_cast<double>(tail.size());

    // Transient c2 e^{-lambda t}: the excess over the plateau, fitted until it
    // first drops below 5% of its value at the start of the window.
    std::vector<double> excess(n_t);
    for (std::size_t i = 0; i < n_t; ++i) excess[i] = rep.mean_sq[i] - rep.plateau;
    FitWindow w = spec.window;
    const double lo = w.t_lo.value_or(t0 + w.burn_in * (t1 - t0));
    w.t_lo = lo;
    if (!w.t_hi) {
        double ref = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < n_t; ++i) {
            if (rep.times[i] < lo) continue;
            if (std::isnan(ref)) ref = excess[i];
            if (!(excess[i] >= 0.05 * ref) || !(ref > 0.0)) {
                w.t_hi = rep.times[i];
                break;
            }
        }
    }
    rep.transient = fit_log_decay(rep.times, excess, w);
    rep.certified_rate = certified_rate;
    if (certified_rate && !rep.transient.degenerate) rep.rate_ok = rep.transient.rate >= 0.8 * *certified_rate;
    rep.pass = within_divergence_budget(rep.n_divergent, spec.n_paths) && rep.rate_ok;
    return rep;
}

ContractionReport contraction_experiment(const sim::Model& model, const Segment& phi, const Segment& psi,
                                         int regime, const EnsembleSpec& spec,
                                         std::optional<double> certified_rate) {
    spec.validate();
    ContractionReport rep;
    rep.certified_rate = certified_rate;
    rep.times = record_times(spec.solver, spec.start_step, spec.end_step, spec.record_every);
    const std::size_t n_t = rep.times.size();
    std::vector<std::vector<double>> head(spec.n_paths), seg(spec.n_paths);

    parallel_for(spec.n_paths, spec.threads, [&](std::size_t p) {
        const auto cfg = path_config(spec.solver, spec.seed, p);
        try {
            const auto pair = sim::simulate_pair_shared_noise(model, cfg, phi, psi, regime, spec.start_step,
                                                              spec.end_step, spec.record_every);
            head[p].resize(n_t);
            seg[p].resize(n_t);
            for (std::size_t i = 0; i < n_t; ++i) {
                head[p][i] = pair.gamma_norms[i] * pair.gamma_norms[i];
                seg[p][i] = pair.gamma_segment_norms[i] * pair.gamma_segment_norms[i];
            }
        } catch (const DivergenceError&) {
            head[p].clear();
            seg[p].clear();
        }
    });
    for (const auto& h : head)
        if (h.empty()) ++rep.n_divergent;
    column_stats(head, n_t, rep.mean_gamma_sq, nullptr);
    column_stats(seg, n_t, rep.mean_gamma_segment_sq, nullptr);

    rep.degenerate = std::all_of(rep.mean_gamma_sq.begin(), rep.mean_gamma_sq.end(),
                                 [](double v) { return v == 0.0; });
    if (rep.degenerate || rep.n_divergent == spec.n_paths) {
        rep.fit_head.degenerate = true;
        rep.fit_segment.degenerate = true;
        return rep;
    }
    rep.fit_head = fit_log_decay(rep.times, rep.mean_gamma_sq, spec.window);
    rep.fit_segment = fit_log_decay(rep.times, rep.mean_gamma_segment_sq, spec.window);
    bool ok = !rep.fit_head.degenerate && !rep.fit_head.low_r_squared;
    if (certified_rate) ok = ok && rep.fit_head.rate >= 0.8 * *certified_rate;
    rep.pass = ok && within_divergence_budget(rep.n_divergent, spec.n_paths);
    return rep;
}

// ---------------------------------------------------------------------------

CouplingReport coupling_tail_experiment(const chain::GeneratorMatrix& q, const CouplingSpec& spec,
                                        const chain::DifferenceFunction* f, std::optional<double> m_bound) {
    if (!q.irreducible()) throw ValidationError("model.Q", "coupling requires an irreducible generator");
    if (spec.s2 < spec.s1) throw ValidationError("experiment.coupling.s2", "requires s1 <= s2");
    if (spec.start_state < 0 || spec.start_state >= q.n_states()) {
        throw ValidationError("experiment.coupling.state", "out of range");
    }
    if (!(spec.t_max > spec.s2)) throw ValidationError("experiment.coupling.t_max", "must exceed s2");
    if (!(spec.grid_step > 0.0)) throw ValidationError("experiment.coupling.grid_step", "must be positive");
    if (spec.n_keys < 1) throw ValidationError("experiment.coupling.n_keys", "must be positive");

    const auto table = chain::build_intervals(q, m_bound.value_or(std::numeric_limits<double>::quiet_NaN()));
    CouplingReport rep;
    rep.taus.assign(spec.n_keys, 0.0);
    std::vector<char> exact(spec.n_keys, 1);

    const double span = spec.t_max - spec.s2;
    const auto n_grid = static_cast<std::size_t>(std::floor(span / spec.grid_step + 1e-9)) + 1;
    for (std::size_t g = 0; g < n_grid; ++g) rep.grid.push_back(static_cast<double>(g) * spec.grid_step);

    parallel_for(spec.n_keys, spec.threads, [&](std::size_t j) {
        const chain::PoissonField field(rng::derive(spec.seed, j, kPoissonTag), table.m_bound());
        const auto cc = chain::couple_chains(table, spec.start_state, spec.s1, spec.s2, field, spec.t_max);
        rep.taus[j] = cc.tau;
        if (!std::isfinite(cc.tau)) return;
        bool ok = true;
        for (double g : rep.grid) {
            const double t = spec.s2 + g;
            if (t >= cc.tau && cc.first.state_at(t) != cc.second.state_at(t)) ok = false;
        }
        // Jump records after tau must coincide exactly, times included.
        std::vector<chain::Jump> a, b;
        for (const auto& x : cc.first.jumps)
            if (x.time > cc.tau) a.push_back(x);
        for (const auto& x : cc.second.jumps)
            if (x.time > cc.tau) b.push_back(x);
        if (a.size() != b.size()) ok = false;
        for (std::size_t i = 0; ok && i < a.size(); ++i) {
            if (a[i].time != b[i].time || a[i].state != b[i].state) ok = false;
        }
        exact[j] = ok ? 1 : 0;
    });

    rep.coalescence_exact = std::all_of(exact.begin(), exact.end(), [](char c) { return c != 0; });
    for (double t : rep.taus)
        if (!std::isfinite(t)) ++rep.n_censored;

    rep.survival.assign(n_grid, 0.0);
    for (std::size_t g = 0; g < n_grid; ++g) {
        std::size_t alive = 0;
        for (double t : rep.taus)
            if (t > spec.s2 + rep.grid[g]) ++alive;
        rep.survival[g] = static_cast<double>(alive) / static_cast<double>(spec.n_keys);
    }
    std::vector<double> x, y;
    for (std::size_t g = 0; g < n_grid; ++g) {
        if (rep.survival[g] < spec.survival_floor) break;
        x.push_back(rep.grid[g]);
        y.push_back(rep.survival[g]);
    }
    FitWindow w;
    w.burn_in = 0.0;
    rep.fit = fit_log_decay(x, y, w);
    if (f) rep.f_report = chain::verify_coupling_function(table, *f);
    return rep;
}

// ---------------------------------------------------------------------------

RemoteStartReport remote_start_measure(const sim::Model& model, const Segment& phi, int regime,
                                       const RemoteStartSpec& spec) {
    if (spec.schedule.empty()) throw ValidationError("experiment.remote_start.schedule", "empty schedule");
    if (spec.n_keys < 1) throw ValidationError("experiment.remote_start.n_keys", "must be positive");
    std::vector<std::int64_t> steps;
    for (std::size_t j = 0; j < spec.schedule.size(); ++j) {
        const double s = spec.schedule[j];
        if (s > 0.0) throw ValidationError("experiment.remote_start.schedule", "start times must be <= 0");
        if (j > 0 && s > spec.schedule[j - 1]) {
            throw ValidationError("experiment.remote_start.schedule", "start times must be non-increasing");
        }
        steps.push_back(spec.solver.step_of(s));
    }

    RemoteStartReport rep;
    rep.schedule = spec.schedule;
    const std::size_t n_d = spec.schedule.size() - 1;
    rep.distances.assign(spec.n_keys, std::vector<double>(n_d, 0.0));
    rep.measure.samples.assign(spec.n_keys, StatePoint{phi, regime});

    parallel_for(spec.n_keys, spec.threads, [&](std::size_t j) {
        const auto cfg = path_config(spec.solver, spec.seed, j);
        const auto out = sim::remote_start_solve(model, cfg, phi, regime, steps, 0);
        for (std::size_t m = 0; m < n_d; ++m) rep.distances[j][m] = metric_d(out[m], out[m + 1]);
        rep.measure.samples[j] = out.back();
    });

    std::vector<double> col(spec.n_keys);
    for (std::size_t m = 0; m < n_d; ++m) {
        for (std::size_t j = 0; j < spec.n_keys; ++j) col[j] = rep.distances[j][m];
        const auto ms = jackknife_mean_se(col);
        rep.mean_distance.push_back(ms.mean);
        rep.se_distance.push_back(ms.se);
    }
    rep.strictly_decreasing = true;
    for (std::size_t m = 0; m + 1 < n_d; ++m) {
        const double ratio = rep.mean_distance[m] > 0.0 ? rep.mean_distance[m + 1] / rep.mean_distance[m]
                                                        : std::numeric_limits<double>::infinity();
        rep.ratios.push_back(ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        if (!(rep.mean_distance[m + 1] < rep.mean_distance[m])) {
            rep.strictly_decreasing = false;
            rep.warning = true;
        }
    }
    std::vector<double> depth;
    for (std::size_t m = 0; m < n_d; ++m) depth.push_back(-spec.schedule[m]);
    FitWindow w;
    w.burn_in = 0.0;
    rep.fit = fit_log_decay(depth, rep.mean_distance, w);
    return rep;
}

// ---------------------------------------------------------------------------

Observable norm_clip(double cap) {
    if (!(cap > 0.0) || !std::isfinite(cap)) throw ValidationError("observable.cap", "must be finite and positive");
    return {"norm_clip", 1.0, [cap](const StatePoint& p) { return std::min(segment_norm_r(p.segment), cap); }};
}

Observable indicator(int k0) {
    return {"indicator", 1.0, [k0](const StatePoint& p) { return p.regime == k0 ? 1.0 : 0.0; }};
}

Observable first_mode_clip(double cap) {
    if (!(cap > 0.0) || !std::isfinite(cap)) throw ValidationError("observable.cap", "must be finite and positive");
    return {"first_mode_clip", 1.0,
            [cap](const StatePoint& p) { return std::clamp(p.segment.value(0)(0), -cap, cap); }};
}

Observable constant_observable(double c) {
    return {"constant", 0.0, [c](const StatePoint&) { return c; }};
}

std::vector<Observable> builtin_observables(int k0, double cap) {
    return {norm_clip(cap), indicator(k0), first_mode_clip(cap)};
}

void validate_observable(const Observable& f) {
    if (!f.fn) throw ValidationError("observable." + f.name, "missing function");
    if (!std::isfinite(f.lipschitz) || f.lipschitz < 0.0) {
        throw ValidationError("observable." + f.name, "needs a finite Lipschitz bound");
    }
}

MixingReport mixing_experiment(const sim::Model& model, const Segment& phi, int regime,
                               const std::vector<Observable>& observables, const EmpiricalMeasure& measure,
                               const MixingSpec& spec) {
    for (const auto& f : observables) validate_observable(f);
    if (measure.samples.empty()) throw ValidationError("experiment.mixing", "empty empirical measure");
    if (spec.times.empty()) throw ValidationError("experiment.mixing.times", "no evaluation times");
    if (spec.n_paths < 2) throw ValidationError("experiment.mixing.n_paths", "need at least two paths");
    std::vector<std::int64_t> steps;
    for (std::size_t i = 0; i < spec.times.size(); ++i) {
        if (!(spec.times[i] > 0.0) || (i > 0 && spec.times[i] <= spec.times[i - 1])) {
            throw ValidationError("experiment.mixing.times", "times must be positive and increasing");
        }
        steps.push_back(spec.solver.step_of(spec.times[i]));
    }

    const std::size_t n_f = observables.size();
    const std::size_t n_t = steps.size();
    // values[p][f * n_t + i]
    std::vector<std::vector<double>> values(spec.n_paths);
    parallel_for(spec.n_paths, spec.threads, [&](std::size_t p) {
        const auto cfg = path_config(spec.solver, spec.seed, p);
        std::vector<double> v(n_f * n_t);
        sim::PathState st{0, regime, phi};
        try {
            for (std::size_t i = 0; i < n_t; ++i) {
                st = sim::simulate_to(model, cfg, st, steps[i]);
                const StatePoint sp{st.segment, st.regime};
                for (std::size_t f = 0; f < n_f; ++f) v[f * n_t + i] = observables[f].fn(sp);
            }
            values[p] = std::move(v);
        } catch (const DivergenceError&) {
            values[p].clear();
        }
    });

    MixingReport rep;
    for (const auto& v : values)
        if (v.empty()) ++rep.n_divergent;
    std::vector<double> col;
    for (std::size_t f = 0; f < n_f; ++f) {
        MixingCurve c;
        c.name = observables[f].name;
        c.lipschitz = observables[f].lipschitz;
        c.times = spec.times;
        std::vector<double> mu_vals;
        for (const auto& s : measure.samples) mu_vals.push_back(observables[f].fn(s));
        const auto mu = jackknife_mean_se(mu_vals);
        c.mu_f = mu.mean;
        c.mu_f_se = mu.se;
        for (std::size_t i = 0; i < n_t; ++i) {
            col.clear();
            for (const auto& v : values)
                if (!v.empty()) col.push_back(v[f * n_t + i]);
            const auto ms = jackknife_mean_se(col);
            c.pt_f.push_back(ms.mean);
            c.pt_f_se.push_back(ms.se);
            c.abs_diff.push_back(std::abs(ms.mean - c.mu_f));
        }
        c.degenerate = c.lipschitz == 0.0 ||
                       std::all_of(c.abs_diff.begin(), c.abs_diff.end(), [](double d) { return d == 0.0; });
        if (c.degenerate) {
            c.fit.degenerate = true;
        } else {
            c.fit = fit_log_decay(c.times, c.abs_diff, spec.window);
        }
        rep.curves.push_back(std::move(c));
    }
    return rep;
}

InvarianceReport invariance_check(const sim::Model& model, const EmpiricalMeasure& measure, double t_push,
                                  const std::vector<Observable>& observables, const sim::SolverConfig& solver,
                                  std::uint64_t seed, int threads) {
    for (const auto& f : observables) validate_observable(f);
    if (measure.samples.size() < 2) throw ValidationError("experiment.invariance", "need at least two samples");
    if (t_push < 0.0) throw ValidationError("experiment.invariance.t_push", "must be >= 0");
    const std::int64_t end = solver.step_of(t_push);
    const std::size_t n = measure.samples.size();
    std::vector<StatePoint> pushed(n, measure.samples.front());
    parallel_for(n, threads, [&](std::size_t j) {
        const auto cfg = path_config(solver, seed, j);
        const auto& s = measure.samples[j];
        const auto st = sim::simulate_to(model, cfg, sim::PathState{0, s.regime, s.segment}, end);
        pushed[j] = StatePoint{st.segment, st.regime};
    });

    InvarianceReport rep;
    rep.t_push = t_push;
    rep.pass = true;
    for (const auto& f : observables) {
        std::vector<double> before(n), after(n), diff(n);
        for (std::size_t j = 0; j < n; ++j) {
            before[j] = f.fn(measure.samples[j]);
            after[j] = f.fn(pushed[j]);
            diff[j] = after[j] - before[j];
        }
        InvarianceEntry e;
        e.name = f.name;
        e.before = jackknife_mean_se(before).mean;
        e.after = jackknife_mean_se(after).mean;
        const auto d = jackknife_mean_se(diff);
        e.diff = std::abs(d.mean);
        e.se = d.se;
        e.pass = e.diff == 0.0 || e.diff < 3.0 * e.se;
        rep.pass = rep.pass && e.pass;
        rep.entries.push_back(e);
    }
    return rep;
}

} // namespace swspde::lab
