#include "swspde/chain.hpp"

#include "swspde/errors.hpp"
#include "swspde/keyed_rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swspde::chain {

GeneratorMatrix::GeneratorMatrix(Eigen::MatrixXd q) : q_(std::move(q)) {
    if (q_.rows() < 1 || q_.rows() != q_.cols()) {
        throw ValidationError("Q", "generator must be a non-empty square matrix");
    }
    const Eigen::Index n = q_.rows();
    for (Eigen::Index k = 0; k < n; ++k) {
        double off = 0.0;
        for (Eigen::Index l = 0; l < n; ++l) {
            if (!std::isfinite(q_(k, l))) {
                throw ValidationError("Q", "non-finite entry");
            }
            if (l != k) {
                if (q_(k, l) < 0.0) {
                    throw ValidationError("Q", "negative off-diagonal rate in row " + std::to_string(k));
                }
                off += q_(k, l);
            }
        }
        if (std::abs(off + q_(k, k)) > 1e-12 * std::max(1.0, off)) {
            throw ValidationError("Q", "row " + std::to_string(k) + " does not sum to zero");
        }
    }
}

double GeneratorMatrix::max_exit_rate() const {
    double m = 0.0;
    for (int k = 0; k < n_states(); ++k) m = std::max(m, exit_rate(k));
    return m;
}

bool GeneratorMatrix::irreducible() const {
    const int n = n_states();
    // Strong connectivity: every state reachable from 0 forwards and backwards.
    auto reach = [&](bool forward) {
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            const int k = stack.back();
            stack.pop_back();
            for (int l = 0; l < n; ++l) {
                const double rate = forward ? q_(k, l) : q_(l, k);
                if (l != k && rate > 0.0 && !seen[static_cast<std::size_t>(l)]) {
                    seen[static_cast<std::size_t>(l)] = 1;
                    stack.push_back(l);
                }
            }
        }
        return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
    };
    return reach(true) && reach(false);
}

IntervalTable::IntervalTable(std::vector<std::vector<Interval>> rows, double m_bound)
    : rows_(std::move(rows)), m_bound_(m_bound) {}

IntervalTable build_intervals(const GeneratorMatrix& q, double m_bound) {
    const int n = q.n_states();
    std::vector<std::vector<Interval>> rows(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double cursor = 0.0;
        for (int l = 0; l < n; ++l) {
            if (l == k || q.rate(k, l) == 0.0) continue;
            const double right = cursor + q.rate(k, l);
            rows[static_cast<std::size_t>(k)].push_back({l, cursor, right});
            cursor = right;
        }
    }
    const double natural = q.max_exit_rate();
    if (std::isnan(m_bound)) {
        m_bound = natural;
    } else if (m_bound < natural) {
        throw ValidationError("bounds.M", "attested bound M is below the largest exit rate");
    }
    return IntervalTable(std::move(rows), m_bound);
}

int jump_h(const IntervalTable& table, int k, double u) {
    if (!(u >= 0.0) || u > table.m_bound()) {
        throw ValidationError("u", "mark outside [0, M]");
    }
    const auto& row = table.row(k);
    auto it = std::upper_bound(row.begin(), row.end(), u,
                               [](double x, const Interval& iv) { return x < iv.left; });
    if (it == row.begin()) return 0;
    --it;
    return (u < it->right) ? it->target - k : 0;
}

PoissonField::PoissonField(std::uint64_t key, double m_bound) : key_(key), m_bound_(m_bound) {
    if (!(m_bound >= 0.0) || !std::isfinite(m_bound)) {
        throw ValidationError("M", "Poisson intensity bound must be finite and >= 0");
    }
}

std::vector<PoissonPoint> PoissonField::slot(std::int64_t m) const {
    std::vector<PoissonPoint> pts;
    if (m_bound_ == 0.0) return pts;
    rng::KeyedStream stream(rng::derive(key_, m));
    const auto base = static_cast<double>(m);
    double offset = 0.0;
    for (;;) {
        offset += stream.exponential(m_bound_);
        if (offset >= 1.0) break;
        const double mark = m_bound_ * stream.uniform();
        pts.push_back({base + offset, mark});
    }
    std::sort(pts.begin(), pts.end(), [](const PoissonPoint& a, const PoissonPoint& b) {
        return a.time < b.time || (a.time == b.time && a.mark < b.mark);
    });
    return pts;
}

void PoissonField::for_each(double s, double t, const std::function<void(const PoissonPoint&)>& fn) const {
    if (t <= s) return;
    const auto first = static_cast<std::int64_t>(std::floor(s));
    const auto last = static_cast<std::int64_t>(std::floor(t));
    for (std::int64_t m = first; m <= last; ++m) {
        for (const auto& p : slot(m)) {
            if (p.time > s && p.time <= t) fn(p);
        }
    }
}

int ChainPath::state_at(double t) const {
    auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                               [](double x, const Jump& j) { return x < j.time; });
    return it == jumps.begin() ? start_state : std::prev(it)->state;
}

ChainPath simulate_chain(const IntervalTable& table, int i, double s, double t, const PoissonField& field) {
    if (t < s) throw ValidationError("t", "end time precedes start time");
    if (i < 0 || i >= table.n_states()) throw ValidationError("i", "initial state out of range");
    ChainPath path{s, i, t, {}};
    int state = i;
    field.for_each(s, t, [&](const PoissonPoint& p) {
        const int inc = jump_h(table, state, p.mark);
        if (inc != 0) {
            state += inc;
            path.jumps.push_back({p.time, state});
        }
    });
    return path;
}

ChainPath gillespie_chain(const GeneratorMatrix& q, int i, double s, double t, std::mt19937_64& rng) {
    if (t < s) throw ValidationError("t", "end time precedes start time");
    ChainPath path{s, i, t, {}};
    auto uniform = [&] { return rng::to_unit_open(rng()); };
    int state = i;
    double now = s;
    for (;;) {
        const double rate = q.exit_rate(state);
        if (rate <= 0.0) break;
        now += -std::log(uniform()) / rate;
        if (now > t) break;
        double pick = uniform() * rate;
        int next = state;
        for (int l = 0; l < q.n_states(); ++l) {
            if (l == state || q.rate(state, l) <= 0.0) continue;
            next = l; // last positive-rate target absorbs rounding leftovers
            pick -= q.rate(state, l);
            if (pick < 0.0) break;
        }
        state = next;
        path.jumps.push_back({now, state});
    }
    return path;
}

CoupledChains couple_chains(const IntervalTable& table, int i, double s1, double s2, const PoissonField& field,
                            double t_end) {
    if (s2 < s1) throw ValidationError("s2", "coupling requires s1 <= s2");
    CoupledChains out{simulate_chain(table, i, s1, t_end, field), simulate_chain(table, i, s2, t_end, field),
                      std::numeric_limits<double>::infinity()};
    // The two paths can only meet at s2 or at one of their jump times.
    std::vector<double> candidates{s2};
    for (const auto& j : out.first.jumps)
        if (j.time >= s2) candidates.push_back(j.time);
    for (const auto& j : out.second.jumps) candidates.push_back(j.time);
    std::sort(candidates.begin(), candidates.end());
    for (double c : candidates) {
        if (out.first.state_at(c) == out.second.state_at(c)) {
            out.tau = c;
            break;
        }
    }
    return out;
}

double coupling_time(const IntervalTable& table, int i, double s1, double s2, const PoissonField& field,
                     double t_max) {
    if (s2 < s1) throw ValidationError("s2", "coupling requires s1 <= s2");
    int first = simulate_chain(table, i, s1, s2, field).state_at(s2);
    if (first == i) return s2;
    int second = i;
    auto m = static_cast<std::int64_t>(std::floor(s2));
    while (static_cast<double>(m) <= t_max) {
        for (const auto& p : field.slot(m)) {
            if (p.time <= s2 || p.time > t_max) continue;
            first += jump_h(table, first, p.mark);
            second += jump_h(table, second, p.mark);
            if (first == second) return p.time;
        }
        ++m;
    }
    return std::numeric_limits<double>::infinity();
}

double two_chain_generator(const IntervalTable& table, const DifferenceFunction& v, int k, int l) {
    const double m = table.m_bound();
    std::vector<double> cuts{0.0, m};
    for (int row : {k, l}) {
        for (const auto& iv : table.row(row)) {
            cuts.push_back(iv.left);
            cuts.push_back(iv.right);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const long base = static_cast<long>(k) - l;
    const double v_base = v(base);
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double a = cuts[p];
        const double b = cuts[p + 1];
        if (b <= a || a >= m) continue;
        const double mid = 0.5 * (a + b);
        const long shift = jump_h(table, k, mid) - jump_h(table, l, mid);
        if (shift == 0) continue;
        total += (v(base + shift) - v_base) * (b - a);
    }
    return total;
}

CouplingFunctionReport verify_coupling_function(const IntervalTable& table, const DifferenceFunction& f) {
    CouplingFunctionReport rep;
    const int n = table.n_states();
    for (long x = -(n - 1); x <= n - 1; ++x) {
        const double fx = f(x);
        if (fx < 0.0) rep.nonnegative = false;
        rep.sup_norm = std::max(rep.sup_norm, std::abs(fx));
    }
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            if (k == l) continue;
            const double val = two_chain_generator(table, f, k, l);
            if (val > rep.max_value) {
                rep.max_value = val;
                rep.worst_k = k;
                rep.worst_l = l;
            }
        }
    }
    rep.theta_max = rep.sup_norm > 0.0 ? 1.0 / rep.sup_norm : std::numeric_limits<double>::infinity();
    // Single-state tables have no pair to check.
    const bool condition = (n < 2) || rep.max_value <= -1.0 + 1e-12;
    rep.pass = condition && rep.nonnegative && rep.sup_norm > 0.0;
    return rep;
}

} // namespace swspde::chain
