#include "swspde/cli.hpp"

#include "swspde/errors.hpp"
#include "swspde/keyed_rng.hpp"
#include "swspde/lab.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#ifndef SWSPDE_VERSION
#define SWSPDE_VERSION "0.0.0"
#endif

namespace swspde::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json mat_json(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
        a.push_back(row);
    }
    return a;
}

json fit_json(const lab::DecayFit& f) {
    return {{"rate", f.rate},           {"intercept", f.intercept},   {"r_squared", f.r_squared},
            {"window", {f.t_lo, f.t_hi}}, {"n_points", f.n_points},     {"n_floored", f.n_floored},
            {"degenerate", f.degenerate}, {"low_r_squared", f.low_r_squared}};
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string vec_summary(const Eigen::VectorXd& v) {
    std::string s = "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += short_number(v(i));
    }
    return s + ")";
}

struct Context {
    RunConfig cfg;
    std::string command;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    int threads = 1;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
    std::vector<std::string> files;

    std::uint64_t wiener_key() const { return rng::derive(seed, 101); }
    std::uint64_t poisson_key() const { return rng::derive(seed, 102); }
    std::uint64_t ensemble_seed() const { return rng::derive(seed, 103); }

    // Resolved config as embedded in reports: the effective seed is filled in
    // and the output directory is dropped so results do not depend on it.
    json resolved() const {
        json j = to_json(cfg);
        if (j.contains("solver")) j["solver"]["seed"] = seed;
        j["output"].erase("directory");
        return j;
    }

    json report_header() const {
        return {{"command", command}, {"seed", seed}, {"code_version", SWSPDE_VERSION}, {"config", resolved()}};
    }

    void write(const std::string& name, const std::string& content) {
        fs::create_directories(out_dir);
        const fs::path target = fs::path(out_dir) / name;
        const fs::path tmp = fs::path(out_dir) / (name + ".tmp");
        {
            std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
            if (!os) throw std::runtime_error("cannot write " + tmp.string());
            os << content;
            if (!os) throw std::runtime_error("write failed for " + tmp.string());
        }
        fs::rename(tmp, target);
        files.push_back(name);
    }

    void write_json(const std::string& name, const json& j) {
        if (cfg.output.wants("json")) write(name, j.dump(2) + "\n");
    }

    void write_csv(const std::string& name, const std::string& content) {
        if (cfg.output.wants("csv")) write(name, content);
    }

    void write_manifest() {
        json index = json::array();
        for (const auto& f : files) {
            std::ifstream in(fs::path(out_dir) / f, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            const std::string bytes = ss.str();
            index.push_back({{"file", f}, {"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}});
        }
        json m{{"schema_version", kSchemaVersion},
               {"command", command},
               {"config_hash", hex64(fnv1a(resolved().dump()))},
               {"seed", seed},
               {"keys", {{"wiener", wiener_key()}, {"poisson", poisson_key()}, {"ensemble", ensemble_seed()}}},
               {"code_version", SWSPDE_VERSION},
               {"files", index}};
        const std::string name = "manifest.json";
        const fs::path target = fs::path(out_dir) / name;
        const fs::path tmp = fs::path(out_dir) / (name + ".tmp");
        fs::create_directories(out_dir);
        {
            std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
            os << m.dump(2) << "\n";
        }
        fs::rename(tmp, target);
    }
};

const SolverBlock& need_solver(const Context& ctx) {
    if (!ctx.cfg.solver) throw ValidationError("solver", "this command needs a solver block");
    return *ctx.cfg.solver;
}

const InitialBlock& need_initial(const Context& ctx) {
    if (!ctx.cfg.experiment.initial) throw ValidationError("experiment.initial", "required for this command");
    return *ctx.cfg.experiment.initial;
}

double need_t_end(const Context& ctx) {
    if (!ctx.cfg.experiment.t_end) throw ValidationError("experiment.t_end", "required for this command");
    return *ctx.cfg.experiment.t_end;
}

int check_regime(const sim::Model& model, int regime, const std::string& path) {
    if (regime < 0 || regime >= model.n_states()) throw ValidationError(path, "regime out of range");
    return regime;
}

std::int64_t grid_step(const sim::SolverConfig& s, double t, const std::string& path) {
    try {
        return s.step_of(t);
    } catch (const ValidationError& e) {
        throw ValidationError(path, e.message());
    }
}

certify::Certificate run_certificate(const Context& ctx, std::optional<certify::Partition>* partition) {
    const auto& m = ctx.cfg.model;
    const auto coeffs = build_coefficients(m);
    const chain::GeneratorMatrix q(m.Q);
    if (m.boundaries) {
        try {
            auto pc = certify::certify_partitioned(q, coeffs, *m.boundaries, m.bounds, m.theta);
            if (partition) *partition = pc.partition;
            return pc.certificate;
        } catch (const ValidationError& e) {
            const std::string& p = e.path();
            throw ValidationError(p.rfind("model", 0) == 0 ? p : "model.partition", e.message());
        }
    }
    return certify::certify_finite(q, coeffs, m.theta);
}

void print_certificate(std::ostream& os, const certify::Certificate& c) {
    os << "certificate: " << (c.pass ? "PASS" : "FAIL") << "\n";
    if (c.xi.size() > 0) os << "xi=" << vec_summary(c.xi) << "\n";
    if (c.m_matrix.pass) os << "K=" << short_number(c.K) << "\n";
    if (c.rates_positive) {
        os << "lambda=" << short_number(c.rates.lambda) << " lambda_hat=" << short_number(c.rates.lambda_hat) << "\n";
    }
    if (c.kappa) os << "kappa=" << short_number(*c.kappa) << "\n";
    if (!c.pass) {
        os << "reason: " << to_string(c.reason);
        if (c.reason == certify::Reason::delay_condition) os << " K=" << short_number(c.K);
        os << "\n";
    }
}

int cmd_certify(Context& ctx, bool require_partition) {
    if (require_partition && !ctx.cfg.model.boundaries) {
        throw ValidationError("model.partition", "the partition command needs partition boundaries");
    }
    std::optional<certify::Partition> partition;
    const auto cert = run_certificate(ctx, &partition);
    print_certificate(*ctx.out, cert);
    json rep = ctx.report_header();
    rep["certificate"] = certificate_json(cert);
    if (partition) {
        rep["partition"] = partition_json(*partition);
        *ctx.out << "partition: xiF=" << vec_summary(partition->xiF)
                 << " comparison=" << (partition->comparison_pass ? "ok" : "violated") << "\n";
    }
    ctx.write_json(require_partition ? "partition.json" : "certificate.json", rep);
    return cert.pass ? kExitOk : kExitDomain;
}

int cmd_simulate(Context& ctx) {
    const auto& solver = need_solver(ctx);
    const auto model = build_model(ctx.cfg.model);
    const auto cfg = build_solver(ctx.cfg.model, solver, ctx.wiener_key(), ctx.poisson_key());
    const auto& init = need_initial(ctx);
    const int regime = check_regime(model, init.regime, "experiment.initial.regime");
    const auto phi = build_history(init.history, ctx.cfg.model, cfg, "experiment.initial");
    const auto start = grid_step(cfg, ctx.cfg.experiment.t_start.value_or(0.0), "experiment.t_start");
    const auto end = grid_step(cfg, need_t_end(ctx), "experiment.t_end");
    if (end < start) throw ValidationError("experiment.t_end", "must not precede t_start");
    const int every = ctx.cfg.experiment.record_every.value_or(1);

    const auto traj = sim::simulate_path(model, cfg, phi, regime, start, end, every);
    std::ostringstream csv;
    sim::write_trajectory_csv(csv, traj);
    ctx.write_csv("trajectory.csv", csv.str());

    const auto final_state = sim::simulate_to(model, cfg, sim::PathState{start, regime, phi}, end);
    std::ostringstream ck;
    sim::write_checkpoint(ck, final_state, cfg);
    ctx.write("checkpoint.bin", ck.str());

    json rep = ctx.report_header();
    rep["n_records"] = traj.times.size();
    rep["final"] = {{"time", cfg.time_of(final_state.step)},
                    {"regime", final_state.regime},
                    {"head", vec_json(final_state.segment.head())},
                    {"norm_r", segment_norm_r(final_state.segment)}};
    ctx.write_json("simulate.json", rep);
    *ctx.out << "simulated " << traj.times.size() << " records to t=" << short_number(cfg.time_of(end)) << "\n";
    return kExitOk;
}

lab::EnsembleSpec ensemble_spec(const Context& ctx, const sim::SolverConfig& cfg) {
    lab::EnsembleSpec spec;
    if (!ctx.cfg.experiment.n_paths) throw ValidationError("experiment.n_paths", "required for this command");
    spec.n_paths = *ctx.cfg.experiment.n_paths;
    spec.seed = ctx.ensemble_seed();
    spec.solver = cfg;
    spec.start_step = grid_step(cfg, ctx.cfg.experiment.t_start.value_or(0.0), "experiment.t_start");
    spec.end_step = grid_step(cfg, need_t_end(ctx), "experiment.t_end");
    spec.record_every = ctx.cfg.experiment.record_every.value_or(1);
    spec.threads = ctx.threads;
    spec.validate();
    return spec;
}

// Rates of a passing certificate, used as one-sided references.
std::optional<certify::Certificate> passing_certificate(const Context& ctx) {
    try {
        auto c = run_certificate(ctx, nullptr);
        if (c.pass) return c;
        *ctx.err << "warning: certificate fails (" << to_string(c.reason) << "); rates are not compared\n";
    } catch (const ValidationError& e) {
        *ctx.err << "warning: no certificate: " << e.what() << "\n";
    }
    return std::nullopt;
}

int cmd_ensemble(Context& ctx) {
    const auto& solver = need_solver(ctx);
    const auto model = build_model(ctx.cfg.model);
    const auto cfg = build_solver(ctx.cfg.model, solver, ctx.wiener_key(), ctx.poisson_key());
    const auto& init = need_initial(ctx);
    const int regime = check_regime(model, init.regime, "experiment.initial.regime");
    const auto phi = build_history(init.history, ctx.cfg.model, cfg, "experiment.initial");
    const auto spec = ensemble_spec(ctx, cfg);
    const auto cert = passing_certificate(ctx);

    std::optional<double> lam, lam_hat;
    if (cert) {
        lam = cert->rates.lambda;
        lam_hat = cert->rates.lambda_hat;
    }
    const auto mom = lab::moment_bound_experiment(model, phi, regime, spec, lam);
    std::ostringstream csv;
    csv << "time,mean_sq,se_mean_sq,mean_sq_segment\n";
    for (std::size_t i = 0; i < mom.times.size(); ++i) {
        csv << fmt17(mom.times[i]) << ',' << fmt17(mom.mean_sq[i]) << ',' << fmt17(mom.se_sq[i]) << ','
            << fmt17(mom.mean_sq_segment[i]) << '\n';
    }
    ctx.write_csv("moments.csv", csv.str());

    json rep = ctx.report_header();
    rep["moments"] = {{"plateau", mom.plateau},
                      {"sup_mean_sq", mom.sup_mean_sq},
                      {"transient", fit_json(mom.transient)},
                      {"n_divergent", mom.n_divergent},
                      {"certified_rate", lam ? json(*lam) : json(nullptr)},
                      {"rate_ok", mom.rate_ok},
                      {"pass", mom.pass}};
    bool pass = mom.pass;
    *ctx.out << "moments: plateau=" << short_number(mom.plateau) << " transient_rate="
             << short_number(mom.transient.rate) << " divergent=" << mom.n_divergent << "\n";

    if (ctx.cfg.experiment.second) {
        const auto psi = build_history(*ctx.cfg.experiment.second, ctx.cfg.model, cfg, "experiment.second");
        const auto con = lab::contraction_experiment(model, phi, psi, regime, spec, lam_hat);
        std::ostringstream c2;
        c2 << "time,mean_gamma_sq,mean_gamma_segment_sq\n";
        for (std::size_t i = 0; i < con.times.size(); ++i) {
            c2 << fmt17(con.times[i]) << ',' << fmt17(con.mean_gamma_sq[i]) << ','
               << fmt17(con.mean_gamma_segment_sq[i]) << '\n';
        }
        ctx.write_csv("contraction.csv", c2.str());
        rep["contraction"] = {{"fit_head", fit_json(con.fit_head)},
                              {"fit_segment", fit_json(con.fit_segment)},
                              {"degenerate", con.degenerate},
                              {"n_divergent", con.n_divergent},
                              {"certified_rate", lam_hat ? json(*lam_hat) : json(nullptr)},
                              {"pass", con.pass}};
        *ctx.out << "contraction: rate=" << short_number(con.fit_head.rate)
                 << " r2=" << short_number(con.fit_head.r_squared) << (con.degenerate ? " (degenerate)" : "")
                 << "\n";
        if (!con.degenerate) pass = pass && con.pass;
    }
    rep["pass"] = pass;
    ctx.write_json("ensemble.json", rep);
    return pass ? kExitOk : kExitDomain;
}

int cmd_couple(Context& ctx) {
    const auto& block = ctx.cfg.experiment.coupling;
    if (!block) throw ValidationError("experiment.coupling", "required for this command");
    lab::CouplingSpec spec;
    spec.start_state = block->state;
    spec.s1 = block->s1;
    spec.s2 = block->s2;
    spec.n_keys = block->n_keys;
    spec.t_max = block->t_max;
    spec.grid_step = block->grid_step;
    spec.seed = ctx.ensemble_seed();
    spec.threads = ctx.threads;
    const chain::GeneratorMatrix q(ctx.cfg.model.Q);
    const chain::DifferenceFunction abs_f = [](long x) { return std::abs(static_cast<double>(x)); };
    const auto rep = lab::coupling_tail_experiment(q, spec, block->F ? &abs_f : nullptr, ctx.cfg.model.bounds.m_bound);

    std::ostringstream csv;
    csv << "t_minus_s2,survival\n";
    for (std::size_t g = 0; g < rep.grid.size(); ++g) csv << fmt17(rep.grid[g]) << ',' << fmt17(rep.survival[g]) << '\n';
    ctx.write_csv("survival.csv", csv.str());

    json j = ctx.report_header();
    j["theta_hat"] = rep.fit.rate;
    j["fit"] = fit_json(rep.fit);
    j["coalescence_exact"] = rep.coalescence_exact;
    j["n_censored"] = rep.n_censored;
    if (rep.f_report) {
        const auto& f = *rep.f_report;
        j["coupling_function"] = {{"pass", f.pass},         {"max_LF", f.max_value}, {"worst_pair", {f.worst_k, f.worst_l}},
                                  {"sup_norm", f.sup_norm}, {"theta_F_max", f.theta_max}};
    }
    ctx.write_json("coupling.json", j);
    *ctx.out << "theta_hat=" << short_number(rep.fit.rate) << " r2=" << short_number(rep.fit.r_squared)
             << " coalescence=" << (rep.coalescence_exact ? "exact" : "BROKEN") << "\n";
    if (rep.f_report) *ctx.out << "theta_F_max=" << short_number(rep.f_report->theta_max) << "\n";
    const bool ok = rep.coalescence_exact && (rep.fit.degenerate || rep.fit.rate > 0.0);
    return ok ? kExitOk : kExitDomain;
}

struct RemoteStartRun {
    sim::SolverConfig cfg;
    lab::RemoteStartReport report;
};

RemoteStartRun run_remote_start(Context& ctx, const sim::Model& model, const Segment& phi, int regime,
                                const sim::SolverConfig& cfg) {
    const auto& block = ctx.cfg.experiment.remote_start;
    if (!block) throw ValidationError("experiment.remote_start", "required for this command");
    lab::RemoteStartSpec spec;
    spec.schedule = block->schedule;
    spec.n_keys = block->n_keys;
    spec.seed = ctx.ensemble_seed();
    spec.solver = cfg;
    spec.threads = ctx.threads;
    for (double s : spec.schedule) grid_step(cfg, s, "experiment.remote_start.schedule");
    return {cfg, lab::remote_start_measure(model, phi, regime, spec)};
}

int cmd_remote_start(Context& ctx) {
    const auto& solver = need_solver(ctx);
    const auto model = build_model(ctx.cfg.model);
    const auto cfg = build_solver(ctx.cfg.model, solver, ctx.wiener_key(), ctx.poisson_key());
    const auto& init = need_initial(ctx);
    const int regime = check_regime(model, init.regime, "experiment.initial.regime");
    const auto phi = build_history(init.history, ctx.cfg.model, cfg, "experiment.initial");
    const auto run = run_remote_start(ctx, model, phi, regime, cfg);
    const auto& rep = run.report;

    std::ostringstream csv;
    csv << "s_from,s_to,mean_distance,se_distance\n";
    for (std::size_t m = 0; m < rep.mean_distance.size(); ++m) {
        csv << fmt17(rep.schedule[m]) << ',' << fmt17(rep.schedule[m + 1]) << ',' << fmt17(rep.mean_distance[m])
            << ',' << fmt17(rep.se_distance[m]) << '\n';
    }
    ctx.write_csv("distances.csv", csv.str());
    std::ostringstream samples;
    samples << "key,regime";
    for (int n = 0; n < model.n_modes(); ++n) samples << ",x_" << n;
    samples << ",norm_r\n";
    for (std::size_t j = 0; j < rep.measure.samples.size(); ++j) {
        const auto& s = rep.measure.samples[j];
        samples << j << ',' << s.regime;
        const auto head = s.segment.head();
        for (Eigen::Index n = 0; n < head.size(); ++n) samples << ',' << fmt17(head(n));
        samples << ',' << fmt17(segment_norm_r(s.segment)) << '\n';
    }
    ctx.write_csv("samples.csv", samples.str());

    json j = ctx.report_header();
    j["mean_distance"] = rep.mean_distance;
    j["se_distance"] = rep.se_distance;
    j["ratios"] = rep.ratios;
    j["strictly_decreasing"] = rep.strictly_decreasing;
    j["max_ratio"] = rep.max_ratio;
    j["warning"] = rep.warning;
    j["fit"] = fit_json(rep.fit);
    *ctx.out << "remote-start: distances=";
    for (double d : rep.mean_distance) *ctx.out << short_number(d) << ' ';
    *ctx.out << (rep.strictly_decreasing ? "decreasing" : "NOT decreasing") << "\n";
    if (rep.warning) *ctx.err << "warning: distances do not decrease along the schedule\n";

    int code = kExitOk;
    if (ctx.cfg.experiment.t_push) {
        const auto inv = lab::invariance_check(model, rep.measure, *ctx.cfg.experiment.t_push,
                                               lab::builtin_observables(0, 5.0), cfg,
                                               rng::derive(ctx.ensemble_seed(), 7), ctx.threads);
        json entries = json::array();
        for (const auto& e : inv.entries) {
            entries.push_back({{"observable", e.name},
                               {"before", e.before},
                               {"after", e.after},
                               {"abs_diff", e.diff},
                               {"se", e.se},
                               {"pass", e.pass}});
            *ctx.out << "invariance " << e.name << ": diff=" << short_number(e.diff) << " se=" << short_number(e.se)
                     << (e.pass ? " ok" : " FAIL") << "\n";
        }
        j["invariance"] = {{"t_push", inv.t_push}, {"entries", entries}, {"pass", inv.pass}};
        if (!inv.pass) code = kExitDomain;
    }
    ctx.write_json("remote_start.json", j);
    return code;
}

int cmd_mixing(Context& ctx) {
    const auto& solver = need_solver(ctx);
    const auto& block = ctx.cfg.experiment.mixing;
    if (!block) throw ValidationError("experiment.mixing", "required for this command");
    const auto model = build_model(ctx.cfg.model);
    const auto cfg = build_solver(ctx.cfg.model, solver, ctx.wiener_key(), ctx.poisson_key());
    const auto& init = need_initial(ctx);
    const int regime = check_regime(model, init.regime, "experiment.initial.regime");
    const auto phi = build_history(init.history, ctx.cfg.model, cfg, "experiment.initial");
    std::vector<lab::Observable> obs;
    for (std::size_t i = 0; i < block->observables.size(); ++i) {
        obs.push_back(build_observable(block->observables[i],
                                       "experiment.mixing.observables[" + std::to_string(i) + "]"));
    }
    for (double t : block->times) grid_step(cfg, t, "experiment.mixing.times");
    const auto measure = run_remote_start(ctx, model, phi, regime, cfg).report.measure;

    lab::MixingSpec spec;
    spec.times = block->times;
    spec.n_paths = block->n_paths;
    spec.seed = rng::derive(ctx.ensemble_seed(), 11);
    spec.solver = cfg;
    spec.threads = ctx.threads;
    const auto rep = lab::mixing_experiment(model, phi, regime, obs, measure, spec);

    std::ostringstream csv;
    csv << "observable,time,pt_f,se_pt_f,mu_f,abs_diff\n";
    json curves = json::array();
    for (const auto& c : rep.curves) {
        for (std::size_t i = 0; i < c.times.size(); ++i) {
            csv << c.name << ',' << fmt17(c.times[i]) << ',' << fmt17(c.pt_f[i]) << ',' << fmt17(c.pt_f_se[i]) << ','
                << fmt17(c.mu_f) << ',' << fmt17(c.abs_diff[i]) << '\n';
        }
        curves.push_back({{"observable", c.name},
                          {"lipschitz", c.lipschitz},
                          {"mu_f", c.mu_f},
                          {"mu_f_se", c.mu_f_se},
                          {"fit", fit_json(c.fit)},
                          {"degenerate", c.degenerate}});
        *ctx.out << "mixing " << c.name << ": rate=" << short_number(c.fit.rate)
                 << (c.degenerate ? " (degenerate)" : "") << "\n";
    }
    ctx.write_csv("mixing.csv", csv.str());
    json j = ctx.report_header();
    j["curves"] = curves;
    j["n_divergent"] = rep.n_divergent;
    ctx.write_json("mixing.json", j);
    return rep.n_divergent == spec.n_paths ? kExitDomain : kExitOk;
}

} // namespace

std::string short_number(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    std::string s = buf;
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

json certificate_json(const certify::Certificate& c) {
    json m{{"z_pattern", c.m_matrix.z_pattern},
           {"singular", c.m_matrix.singular},
           {"eigenvalues_positive", c.m_matrix.eigenvalues_positive},
           {"semipositive", c.m_matrix.semipositive},
           {"inverse_positive", c.m_matrix.inverse_positive},
           {"agree", c.m_matrix.agree},
           {"pass", c.m_matrix.pass}};
    json eig = json::array();
    for (Eigen::Index i = 0; i < c.m_matrix.eigenvalues.size(); ++i) {
        eig.push_back({c.m_matrix.eigenvalues(i).real(), c.m_matrix.eigenvalues(i).imag()});
    }
    m["eigenvalues"] = eig;
    if (c.m_matrix.inverse.size() > 0) m["inverse"] = mat_json(c.m_matrix.inverse);
    return {{"pass", c.pass},
            {"reason", to_string(c.reason)},
            {"A", mat_json(c.A)},
            {"xi", vec_json(c.xi)},
            {"K", c.K},
            {"xi_positive", c.xi_positive},
            {"delay_condition", c.delay_condition},
            {"rates",
             {{"epsilon", c.rates.epsilon},
              {"lambda", c.rates.lambda},
              {"lambda_hat", c.rates.lambda_hat},
              {"lambda_capped", c.rates.lambda_capped},
              {"lambda_hat_capped", c.rates.lambda_hat_capped}}},
            {"rates_positive", c.rates_positive},
            {"theta", c.theta ? json(*c.theta) : json(nullptr)},
            {"kappa", c.kappa ? json(*c.kappa) : json(nullptr)},
            {"m_matrix", m}};
}

json partition_json(const certify::Partition& p) {
    return {{"boundaries", p.boundaries},     {"blocks", p.blocks},
            {"block_of", p.block_of},         {"QF", mat_json(p.QF)},
            {"alphaF", vec_json(p.alphaF)},   {"betaF", vec_json(p.betaF)},
            {"lambda1F", vec_json(p.lambda1F)}, {"H", mat_json(p.Hm)},
            {"AF", mat_json(p.AF)},           {"etaF", vec_json(p.etaF)},
            {"xiF", vec_json(p.xiF)},         {"xiF_decreasing", p.xiF_decreasing},
            {"comparison_worst", p.comparison_worst}, {"comparison_pass", p.comparison_pass}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Regime-switching SPDE with infinite delay: certificates, simulation and ergodicity experiments",
                 "swspde"};
    app.require_subcommand(1);
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 1;
    app.add_option("--config", config_path, "Run configuration (JSON)")->required();
    auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides solver.seed)");
    app.add_option("--out", out_dir, "Output directory (overrides output.directory)");
    app.add_option("--threads", threads, "Worker threads; never changes results")->check(CLI::PositiveNumber);
    app.fallthrough();

    const std::vector<std::pair<std::string, std::string>> commands{
        {"certify", "Finite-state certificate"},
        {"partition", "Finite-partition certificate"},
        {"simulate", "Single trajectory to CSV plus checkpoint"},
        {"ensemble", "Moment bounds and shared-noise contraction"},
        {"couple", "Coupling-time tail of the chain"},
        {"remote-start", "Remote-start approximation of the invariant measure"},
        {"mixing", "Exponential mixing of observables"}};
    for (const auto& [name, desc] : commands) app.add_subcommand(name, desc);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitConfig;
    }

    Context ctx;
    ctx.out = &out;
    ctx.err = &err;
    ctx.threads = threads;
    ctx.command = app.get_subcommands().front()->get_name();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        ctx.cfg = load_config(config_path);
        ctx.seed_set = seed_opt->count() > 0;
        if (ctx.seed_set) {
            ctx.seed = seed;
            if (ctx.cfg.solver) ctx.cfg.solver->seed = seed;
        } else if (ctx.cfg.solver) {
            ctx.seed = ctx.cfg.solver->seed;
        }
        ctx.out_dir = out_dir.empty() ? ctx.cfg.output.directory : out_dir;

        int code = kExitOk;
        if (ctx.command == "certify") code = cmd_certify(ctx, false);
        else if (ctx.command == "partition") code = cmd_certify(ctx, true);
        else if (ctx.command == "simulate") code = cmd_simulate(ctx);
        else if (ctx.command == "ensemble") code = cmd_ensemble(ctx);
        else if (ctx.command == "couple") code = cmd_couple(ctx);
        else if (ctx.command == "remote-start") code = cmd_remote_start(ctx);
        else if (ctx.command == "mixing") code = cmd_mixing(ctx);
        ctx.write_manifest();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        err << "[swspde] " << ctx.command << " finished in " << std::fixed << std::setprecision(2) << secs
            << " s (exit " << code << ")\n";
        err.unsetf(std::ios::floatfield);
        return code;
    } catch (const ValidationError& e) {
        err << "config error [" << e.path() << "]: " << e.message() << "\n";
        return kExitConfig;
    } catch (const DivergenceError& e) {
        err << "divergence: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

} // namespace swspde::cli
