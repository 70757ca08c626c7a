#include "swspde/config.hpp"

#include "swspde/errors.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace swspde::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ValidationError(path, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!ok.count(it.key())) throw ValidationError(join(path, it.key()), "unknown field");
    }
}

const json& need(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(join(path, key), "required field is missing");
    return *it;
}

const json* maybe(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(path, "expected a finite number");
    return v;
}

long long as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ValidationError(path, "expected an integer");
    return j.get<long long>();
}

std::size_t as_count(const json& j, const std::string& path) {
    const auto v = as_int(j, path);
    if (v < 0) throw ValidationError(path, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::uint64_t as_u64(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
    throw ValidationError(path, "expected an unsigned 64-bit integer");
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ValidationError(path, "expected a string");
    return j.get<std::string>();
}

std::vector<double> as_list(const json& j, const std::string& path) {
    if (!j.is_array()) throw ValidationError(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Eigen::VectorXd as_vector(const json& j, const std::string& path) {
    const auto v = as_list(j, path);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ValidationError(path, "expected a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(as_list(j[i], path + "[" + std::to_string(i) + "]"));
    const std::size_t cols = rows.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) throw ValidationError(path, "rows have different lengths");
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
    return m;
}

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

HistorySpec parse_history(const json& j, const std::string& path, bool allow_regime) {
    if (allow_regime) {
        check_keys(j, path, {"regime", "constant", "values", "tail"});
    } else {
        check_keys(j, path, {"constant", "values", "tail"});
    }
    HistorySpec h;
    if (auto* c = maybe(j, "constant")) h.constant = as_vector(*c, join(path, "constant"));
    if (auto* v = maybe(j, "values")) h.values = as_matrix(*v, join(path, "values")).transpose();
    if (auto* t = maybe(j, "tail")) h.tail = as_vector(*t, join(path, "tail"));
    if (h.constant.has_value() == h.values.has_value()) {
        throw ValidationError(path, "give exactly one of 'constant' or 'values'");
    }
    if (h.constant && h.tail) throw ValidationError(join(path, "tail"), "only allowed with 'values'");
    return h;
}

json history_json(const HistorySpec& h) {
    json j = json::object();
    if (h.constant) j["constant"] = vec_json(*h.constant);
    if (h.values) j["values"] = mat_json(h.values->transpose());
    if (h.tail) j["tail"] = vec_json(*h.tail);
    return j;
}

ModelConfig parse_model(const json& j) {
    const std::string p = "model";
    check_keys(j, p, {"n_modes", "m_W", "r", "rho", "Q", "eigenvalues", "states", "coefficients", "bounds",
                      "partition", "theta"});
    ModelConfig m;
    const auto n_modes = as_int(need(j, "n_modes", p), "model.n_modes");
    const auto m_w = as_int(need(j, "m_W", p), "model.m_W");
    if (n_modes < 1) throw ValidationError("model.n_modes", "must be >= 1");
    if (m_w < 1) throw ValidationError("model.m_W", "must be >= 1");
    m.n_modes = static_cast<int>(n_modes);
    m.m_W = static_cast<int>(m_w);
    m.r = as_double(need(j, "r", p), "model.r");
    if (!(m.r > 0.0)) throw ValidationError("model.r", "must be positive");

    const auto& rho = need(j, "rho", p);
    if (!rho.is_array() || rho.empty()) throw ValidationError("model.rho", "expected a non-empty array of atoms");
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const std::string ap = "model.rho[" + std::to_string(i) + "]";
        check_keys(rho[i], ap, {"theta", "weight"});
        m.rho.push_back({as_double(need(rho[i], "theta", ap), ap + ".theta"),
                         as_double(need(rho[i], "weight", ap), ap + ".weight")});
    }
    m.Q = as_matrix(need(j, "Q", p), "model.Q");
    const auto n_states = m.Q.rows();

    if (auto* e = maybe(j, "eigenvalues")) {
        m.eigenvalues = as_matrix(*e, "model.eigenvalues");
        if (m.eigenvalues->rows() != n_states || m.eigenvalues->cols() != m.n_modes) {
            throw ValidationError("model.eigenvalues", "expected one row of n_modes values per state");
        }
    }
    if (auto* s = maybe(j, "states")) {
        if (!s->is_array()) throw ValidationError("model.states", "expected an array");
        if (static_cast<Eigen::Index>(s->size()) != n_states) {
            throw ValidationError("model.states", "expected one block per state of Q");
        }
        for (std::size_t k = 0; k < s->size(); ++k) {
            const std::string sp = "model.states[" + std::to_string(k) + "]";
            const auto& b = (*s)[k];
            check_keys(b, sp, {"G", "D", "g", "S0", "S1", "S2"});
            sim::AffineRegime a;
            a.G = as_matrix(need(b, "G", sp), sp + ".G");
            a.D = as_matrix(need(b, "D", sp), sp + ".D");
            a.g = as_vector(need(b, "g", sp), sp + ".g");
            a.S0 = as_matrix(need(b, "S0", sp), sp + ".S0");
            a.S1 = as_matrix(need(b, "S1", sp), sp + ".S1");
            a.S2 = as_matrix(need(b, "S2", sp), sp + ".S2");
            auto shape = [&](const Eigen::MatrixXd& x, Eigen::Index rows, Eigen::Index cols, const char* name) {
                if (x.rows() != rows || x.cols() != cols) {
                    throw ValidationError(sp + "." + name, "expected " + std::to_string(rows) + "x" +
                                                               std::to_string(cols));
                }
            };
            shape(a.G, m.n_modes, m.n_modes, "G");
            shape(a.D, m.n_modes, m.n_modes, "D");
            shape(a.g, m.n_modes, 1, "g");
            shape(a.S0, m.n_modes, m.m_W, "S0");
            shape(a.S1, m.n_modes, m.m_W, "S1");
            shape(a.S2, m.n_modes, m.m_W, "S2");
            m.states.push_back(std::move(a));
        }
        if (!m.eigenvalues) throw ValidationError("model.eigenvalues", "required together with 'states'");
    }
    if (auto* c = maybe(j, "coefficients")) {
        const std::string cp = "model.coefficients";
        check_keys(*c, cp, {"lambda1", "alpha", "beta", "L"});
        CoefficientOverride o;
        o.lambda1 = as_vector(need(*c, "lambda1", cp), cp + ".lambda1");
        o.alpha = as_vector(need(*c, "alpha", cp), cp + ".alpha");
        o.beta = as_vector(need(*c, "beta", cp), cp + ".beta");
        o.L = as_double(need(*c, "L", cp), cp + ".L");
        for (const auto* v : {&o.lambda1, &o.alpha, &o.beta}) {
            if (v->size() != n_states) throw ValidationError(cp, "expected one entry per state of Q");
        }
        m.coefficients = o;
    }
    if (m.states.empty() && !m.coefficients) {
        throw ValidationError("model.states", "give 'states' (with 'eigenvalues') or 'coefficients'");
    }
    if (auto* b = maybe(j, "bounds")) {
        check_keys(*b, "model.bounds", {"M", "alpha_sup", "beta_sup"});
        if (auto* x = maybe(*b, "M")) m.bounds.m_bound = as_double(*x, "model.bounds.M");
        if (auto* x = maybe(*b, "alpha_sup")) m.bounds.alpha_sup = as_double(*x, "model.bounds.alpha_sup");
        if (auto* x = maybe(*b, "beta_sup")) m.bounds.beta_sup = as_double(*x, "model.bounds.beta_sup");
    }
    if (auto* pt = maybe(j, "partition")) {
        check_keys(*pt, "model.partition", {"boundaries"});
        m.boundaries = as_list(need(*pt, "boundaries", "model.partition"), "model.partition.boundaries");
    }
    if (auto* t = maybe(j, "theta")) m.theta = as_double(*t, "model.theta");
    return m;
}

json model_json(const ModelConfig& m) {
    json j;
    j["n_modes"] = m.n_modes;
    j["m_W"] = m.m_W;
    j["r"] = m.r;
    json rho = json::array();
    for (const auto& a : m.rho) rho.push_back({{"theta", a.theta}, {"weight", a.weight}});
    j["rho"] = rho;
    j["Q"] = mat_json(m.Q);
    if (m.eigenvalues) j["eigenvalues"] = mat_json(*m.eigenvalues);
    if (!m.states.empty()) {
        json s = json::array();
        for (const auto& a : m.states) {
            s.push_back({{"G", mat_json(a.G)},
                         {"D", mat_json(a.D)},
                         {"g", vec_json(a.g)},
                         {"S0", mat_json(a.S0)},
                         {"S1", mat_json(a.S1)},
                         {"S2", mat_json(a.S2)}});
        }
        j["states"] = s;
    }
    if (m.coefficients) {
        j["coefficients"] = {{"lambda1", vec_json(m.coefficients->lambda1)},
                             {"alpha", vec_json(m.coefficients->alpha)},
                             {"beta", vec_json(m.coefficients->beta)},
                             {"L", m.coefficients->L}};
    }
    if (m.bounds.m_bound || m.bounds.alpha_sup || m.bounds.beta_sup) {
        json b = json::object();
        if (m.bounds.m_bound) b["M"] = *m.bounds.m_bound;
        if (m.bounds.alpha_sup) b["alpha_sup"] = *m.bounds.alpha_sup;
        if (m.bounds.beta_sup) b["beta_sup"] = *m.bounds.beta_sup;
        j["bounds"] = b;
    }
    if (m.boundaries) j["partition"] = {{"boundaries", *m.boundaries}};
    if (m.theta) j["theta"] = *m.theta;
    return j;
}

SolverBlock parse_solver(const json& j) {
    const std::string p = "solver";
    check_keys(j, p, {"dt", "T_hist", "seed"});
    SolverBlock s;
    s.dt = as_double(need(j, "dt", p), "solver.dt");
    if (auto* t = maybe(j, "T_hist")) s.t_hist = as_double(*t, "solver.T_hist");
    s.seed = as_u64(need(j, "seed", p), "solver.seed");
    return s;
}

ObservableSpec parse_observable(const json& j, const std::string& path) {
    check_keys(j, path, {"kind", "cap", "state", "value"});
    ObservableSpec o;
    o.kind = as_string(need(j, "kind", path), join(path, "kind"));
    if (auto* x = maybe(j, "cap")) o.cap = as_double(*x, join(path, "cap"));
    if (auto* x = maybe(j, "state")) o.state = static_cast<int>(as_int(*x, join(path, "state")));
    if (auto* x = maybe(j, "value")) o.value = as_double(*x, join(path, "value"));
    // Resolve now so that configuration errors surface at load time.
    build_observable(o, path);
    return o;
}

json observable_json(const ObservableSpec& o) {
    json j{{"kind", o.kind}};
    if (o.cap) j["cap"] = *o.cap;
    if (o.state) j["state"] = *o.state;
    if (o.value) j["value"] = *o.value;
    return j;
}

ExperimentConfig parse_experiment(const json& j) {
    const std::string p = "experiment";
    check_keys(j, p, {"initial", "second", "t_start", "t_end", "record_every", "n_paths", "coupling",
                      "remote_start", "mixing", "t_push"});
    ExperimentConfig e;
    if (auto* x = maybe(j, "initial")) {
        InitialBlock ib;
        ib.regime = static_cast<int>(as_int(need(*x, "regime", "experiment.initial"), "experiment.initial.regime"));
        ib.history = parse_history(*x, "experiment.initial", true);
        e.initial = ib;
    }
    if (auto* x = maybe(j, "second")) e.second = parse_history(*x, "experiment.second", false);
    if (auto* x = maybe(j, "t_start")) e.t_start = as_double(*x, "experiment.t_start");
    if (auto* x = maybe(j, "t_end")) e.t_end = as_double(*x, "experiment.t_end");
    if (auto* x = maybe(j, "record_every")) {
        const auto v = as_int(*x, "experiment.record_every");
        if (v < 1) throw ValidationError("experiment.record_every", "must be >= 1");
        e.record_every = static_cast<int>(v);
    }
    if (auto* x = maybe(j, "n_paths")) e.n_paths = as_count(*x, "experiment.n_paths");
    if (auto* x = maybe(j, "coupling")) {
        const std::string cp = "experiment.coupling";
        check_keys(*x, cp, {"state", "s1", "s2", "n_keys", "t_max", "grid_step", "F"});
        CouplingBlock c;
        c.state = static_cast<int>(as_int(need(*x, "state", cp), cp + ".state"));
        c.s1 = as_double(need(*x, "s1", cp), cp + ".s1");
        c.s2 = as_double(need(*x, "s2", cp), cp + ".s2");
        c.n_keys = as_count(need(*x, "n_keys", cp), cp + ".n_keys");
        c.t_max = as_double(need(*x, "t_max", cp), cp + ".t_max");
        if (auto* g = maybe(*x, "grid_step")) c.grid_step = as_double(*g, cp + ".grid_step");
        if (auto* f = maybe(*x, "F")) {
            c.F = as_string(*f, cp + ".F");
            if (*c.F != "abs") throw ValidationError(cp + ".F", "supported coupling functions: abs");
        }
        e.coupling = c;
    }
    if (auto* x = maybe(j, "remote_start")) {
        const std::string rp = "experiment.remote_start";
        check_keys(*x, rp, {"schedule", "n_keys"});
        RemoteStartBlock r;
        r.schedule = as_list(need(*x, "schedule", rp), rp + ".schedule");
        r.n_keys = as_count(need(*x, "n_keys", rp), rp + ".n_keys");
        e.remote_start = r;
    }
    if (auto* x = maybe(j, "mixing")) {
        const std::string mp = "experiment.mixing";
        check_keys(*x, mp, {"times", "n_paths", "observables"});
        MixingBlock mb;
        mb.times = as_list(need(*x, "times", mp), mp + ".times");
        mb.n_paths = as_count(need(*x, "n_paths", mp), mp + ".n_paths");
        const auto& obs = need(*x, "observables", mp);
        if (!obs.is_array()) throw ValidationError(mp + ".observables", "expected an array");
        for (std::size_t i = 0; i < obs.size(); ++i) {
            mb.observables.push_back(parse_observable(obs[i], mp + ".observables[" + std::to_string(i) + "]"));
        }
        e.mixing = mb;
    }
    if (auto* x = maybe(j, "t_push")) e.t_push = as_double(*x, "experiment.t_push");
    return e;
}

json experiment_json(const ExperimentConfig& e) {
    json j = json::object();
    if (e.initial) {
        json ib = history_json(e.initial->history);
        ib["regime"] = e.initial->regime;
        j["initial"] = ib;
    }
    if (e.second) j["second"] = history_json(*e.second);
    if (e.t_start) j["t_start"] = *e.t_start;
    if (e.t_end) j["t_end"] = *e.t_end;
    if (e.record_every) j["record_every"] = *e.record_every;
    if (e.n_paths) j["n_paths"] = *e.n_paths;
    if (e.coupling) {
        const auto& c = *e.coupling;
        json cj{{"state", c.state}, {"s1", c.s1},       {"s2", c.s2},
                {"n_keys", c.n_keys}, {"t_max", c.t_max}, {"grid_step", c.grid_step}};
        if (c.F) cj["F"] = *c.F;
        j["coupling"] = cj;
    }
    if (e.remote_start) {
        j["remote_start"] = {{"schedule", e.remote_start->schedule}, {"n_keys", e.remote_start->n_keys}};
    }
    if (e.mixing) {
        json obs = json::array();
        for (const auto& o : e.mixing->observables) obs.push_back(observable_json(o));
        j["mixing"] = {{"times", e.mixing->times}, {"n_paths", e.mixing->n_paths}, {"observables", obs}};
    }
    if (e.t_push) j["t_push"] = *e.t_push;
    return j;
}

} // namespace

bool OutputConfig::wants(const std::string& fmt) const {
    for (const auto& f : formats)
        if (f == fmt) return true;
    return false;
}

RunConfig parse_config(const json& j) {
    check_keys(j, "", {"schema_version", "model", "solver", "experiment", "output"});
    RunConfig cfg;
    cfg.schema_version = static_cast<int>(as_int(need(j, "schema_version", ""), "schema_version"));
    if (cfg.schema_version != kSchemaVersion) {
        throw ValidationError("schema_version", "unsupported version " + std::to_string(cfg.schema_version));
    }
    cfg.model = parse_model(need(j, "model", ""));
    // Delay measure and generator are validated eagerly.
    build_rho(cfg.model);
    try {
        chain::GeneratorMatrix q(cfg.model.Q);
        if (q.n_states() < 1) throw ValidationError("Q", "empty");
    } catch (const ValidationError& e) {
        throw ValidationError("model.Q", e.message());
    }
    if (auto* s = maybe(j, "solver")) cfg.solver = parse_solver(*s);
    if (auto* e = maybe(j, "experiment")) cfg.experiment = parse_experiment(*e);
    if (auto* o = maybe(j, "output")) {
        check_keys(*o, "output", {"directory", "formats"});
        if (auto* d = maybe(*o, "directory")) cfg.output.directory = as_string(*d, "output.directory");
        if (auto* f = maybe(*o, "formats")) {
            if (!f->is_array()) throw ValidationError("output.formats", "expected an array");
            cfg.output.formats.clear();
            for (std::size_t i = 0; i < f->size(); ++i) {
                const auto s = as_string((*f)[i], "output.formats[" + std::to_string(i) + "]");
                if (s != "csv" && s != "json") throw ValidationError("output.formats", "unknown format " + s);
                cfg.output.formats.push_back(s);
            }
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config", std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["model"] = model_json(cfg.model);
    if (cfg.solver) {
        json s{{"dt", cfg.solver->dt}, {"seed", cfg.solver->seed}};
        if (cfg.solver->t_hist) s["T_hist"] = *cfg.solver->t_hist;
        j["solver"] = s;
    }
    j["experiment"] = experiment_json(cfg.experiment);
    j["output"] = {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}};
    return j;
}

DelayMeasure build_rho(const ModelConfig& m) {
    try {
        return DelayMeasure(m.rho);
    } catch (const ValidationError& e) {
        throw ValidationError("model.rho", e.message());
    }
}

sim::Model build_model(const ModelConfig& m) {
    if (m.states.empty() || !m.eigenvalues) {
        throw ValidationError("model.states", "simulation needs 'eigenvalues' and 'states'");
    }
    auto rho = build_rho(m);
    try {
        std::optional<double> bound = m.bounds.m_bound;
        return sim::Model(sim::OperatorFamily(*m.eigenvalues), sim::AffineCoefficients(m.states), std::move(rho), m.r,
                          chain::GeneratorMatrix(m.Q),
                          bound.value_or(std::numeric_limits<double>::quiet_NaN()));
    } catch (const ValidationError& e) {
        const std::string& p = e.path();
        if (p.rfind("model", 0) == 0) throw;
        throw ValidationError(p == "bounds.M" ? "model.bounds.M" : "model." + p, e.message());
    }
}

certify::ModelCoefficients build_coefficients(const ModelConfig& m) {
    if (m.coefficients) {
        certify::ModelCoefficients c;
        c.lambda1 = m.coefficients->lambda1;
        c.alpha = m.coefficients->alpha;
        c.beta = m.coefficients->beta;
        c.L = m.coefficients->L;
        c.r = m.r;
        c.rho = build_rho(m);
        try {
            c.validate();
        } catch (const ValidationError& e) {
            throw ValidationError("model.coefficients", e.message());
        }
        return c;
    }
    return sim::certify_affine(build_model(m));
}

sim::SolverConfig build_solver(const ModelConfig& m, const SolverBlock& s, std::uint64_t wiener_key,
                               std::uint64_t poisson_key) {
    try {
        return sim::SolverConfig::make(s.dt, m.r, s.t_hist.value_or(0.0), wiener_key, poisson_key);
    } catch (const ValidationError& e) {
        throw ValidationError(e.path().rfind("solver", 0) == 0 ? e.path() : "solver." + e.path(), e.message());
    }
}

Segment build_history(const HistorySpec& h, const ModelConfig& m, const sim::SolverConfig& cfg,
                      const std::string& path) {
    if (h.constant) {
        if (h.constant->size() != m.n_modes) throw ValidationError(path + ".constant", "expected n_modes values");
        return Segment::constant(m.r, cfg.dt(), cfg.history_points, *h.constant);
    }
    const Eigen::MatrixXd& v = *h.values;
    if (v.rows() != m.n_modes) throw ValidationError(path + ".values", "each row needs n_modes values");
    if (static_cast<std::size_t>(v.cols()) != cfg.history_points) {
        throw ValidationError(path + ".values", "expected " + std::to_string(cfg.history_points) + " grid points");
    }
    Eigen::VectorXd tail = h.tail.value_or(Eigen::VectorXd::Zero(m.n_modes));
    if (tail.size() != m.n_modes) throw ValidationError(path + ".tail", "expected n_modes values");
    try {
        return Segment(m.r, cfg.dt(), v, tail);
    } catch (const ValidationError& e) {
        throw ValidationError(path, e.message());
    }
}

lab::Observable build_observable(const ObservableSpec& spec, const std::string& path) {
    try {
        if (spec.kind == "norm_clip") return lab::norm_clip(spec.cap.value_or(5.0));
        if (spec.kind == "first_mode_clip") return lab::first_mode_clip(spec.cap.value_or(5.0));
        if (spec.kind == "indicator") {
            if (!spec.state) throw ValidationError("state", "required for an indicator");
            return lab::indicator(*spec.state);
        }
        if (spec.kind == "constant") {
            if (!spec.value) throw ValidationError("value", "required for a constant observable");
            return lab::constant_observable(*spec.value);
        }
    } catch (const ValidationError& e) {
        throw ValidationError(path, e.message());
    }
    throw ValidationError(path + ".kind", "unknown observable '" + spec.kind + "'");
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace swspde::cli
