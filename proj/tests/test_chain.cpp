#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "swspde/chain.hpp"
#include "swspde/errors.hpp"
#include "swspde/keyed_rng.hpp"

#include <cmath>

using namespace swspde;
using namespace swspde::chain;

namespace {

Eigen::MatrixXd q2() {
    Eigen::MatrixXd q(2, 2);
    q << -1, 1, 2, -2;
    return q;
}

Eigen::MatrixXd q3() {
    Eigen::MatrixXd q(3, 3);
    q << -3, 1, 2, 1, -2, 1, 2, 2, -4;
    return q;
}

// Direct Riemann evaluation of the two-chain generator on a fine mark grid.
double generator_riemann(const IntervalTable& t, const DifferenceFunction& v, int k, int l) {
    const int n = 200000;
    const double h = t.m_bound() / n;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) * h;
        total += (v(k - l + jump_h(t, k, u) - jump_h(t, l, u)) - v(k - l)) * h;
    }
    return total;
}

} // namespace

TEST_CASE("generator validation") {
    CHECK_NOTHROW(GeneratorMatrix(q2()));
    Eigen::MatrixXd bad = q2();
    bad(0, 1) = -1.0;
    bad(0, 0) = 1.0;
    CHECK_THROWS_AS(GeneratorMatrix{bad}, ValidationError);
    Eigen::MatrixXd rowsum = q2();
    rowsum(1, 1) = -1.9;
    CHECK_THROWS_AS(GeneratorMatrix{rowsum}, ValidationError);
    CHECK(GeneratorMatrix(q3()).irreducible());
    Eigen::MatrixXd red(2, 2);
    red << -1, 1, 0, 0;
    CHECK_FALSE(GeneratorMatrix(red).irreducible());
    CHECK(GeneratorMatrix(q3()).max_exit_rate() == 4.0);
}

TEST_CASE("interval table and mark-to-jump map") {
    const GeneratorMatrix q(q3());
    const auto t = build_intervals(q);
    CHECK(t.m_bound() == 4.0);
    REQUIRE(t.row(0).size() == 2);
    CHECK(t.row(0)[0].target == 1);
    CHECK(t.row(0)[0].right == 1.0);
    CHECK(t.row(0)[1].left == 1.0);
    CHECK(t.row(0)[1].right == 3.0);
    CHECK(jump_h(t, 0, 0.5) == 1);
    CHECK(jump_h(t, 0, 1.0) == 2);
    CHECK(jump_h(t, 0, 3.0) == 0);
    CHECK(jump_h(t, 2, 3.999) == -1);
    CHECK(jump_h(t, 1, 2.5) == 0);
    CHECK_THROWS_AS(jump_h(t, 0, 4.5), ValidationError);
    CHECK_THROWS_AS(jump_h(t, 0, -0.1), ValidationError);
    CHECK_THROWS_AS(build_intervals(q, 3.0), ValidationError);
    CHECK(build_intervals(q, 6.0).m_bound() == 6.0);
}

TEST_CASE("Poisson field is slot-keyed and has the right intensity") {
    const PoissonField f(11, 3.0);
    const auto a = f.slot(-5);
    const auto b = f.slot(-5);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].time == b[i].time);
        CHECK(a[i].mark == b[i].mark);
        CHECK(a[i].time >= -5.0);
        CHECK(a[i].time < -4.0);
        CHECK(a[i].mark <= 3.0);
    }
    std::size_t count = 0;
    const int slots = 20000;
    for (int m = 0; m < slots; ++m) count += f.slot(m).size();
    CHECK(static_cast<double>(count) / slots == doctest::Approx(3.0).epsilon(0.02));

    std::vector<double> seen;
    f.for_each(-1.5, 2.25, [&](const PoissonPoint& p) { seen.push_back(p.time); });
    for (std::size_t i = 1; i < seen.size(); ++i) CHECK(seen[i] >= seen[i - 1]);
    for (double t : seen) CHECK((t > -1.5 && t <= 2.25));
}

TEST_CASE("field-driven chain matches the stationary law and the Gillespie oracle") {
    const GeneratorMatrix q(q3());
    const auto table = build_intervals(q);
    const PoissonField f(5, table.m_bound());
    const double T = 4000.0;
    const auto path = simulate_chain(table, 0, 0.0, T, f);
    Eigen::VectorXd occ = Eigen::VectorXd::Zero(3);
    double prev = 0.0;
    int state = 0;
    for (const auto& j : path.jumps) {
        occ(state) += j.time - prev;
        prev = j.time;
        state = j.state;
    }
    occ(state) += T - prev;
    occ /= T;
    const auto pi = oracle::stationary(q.matrix());
    for (int k = 0; k < 3; ++k) CHECK(occ(k) == doctest::Approx(pi(k)).epsilon(0.03));

    std::mt19937_64 gen(17);
    const auto g = gillespie_chain(q, 0, 0.0, T, gen);
    Eigen::VectorXd occ2 = Eigen::VectorXd::Zero(3);
    prev = 0.0;
    state = 0;
    for (const auto& j : g.jumps) {
        occ2(state) += j.time - prev;
        prev = j.time;
        state = j.state;
    }
    occ2(state) += T - prev;
    occ2 /= T;
    for (int k = 0; k < 3; ++k) CHECK(occ2(k) == doctest::Approx(pi(k)).epsilon(0.03));
    CHECK(path.state_at(0.0) == 0);
}

TEST_CASE("coupled chains: lazy meeting time equals the full construction") {
    const GeneratorMatrix q(q2());
    const auto table = build_intervals(q);
    for (std::uint64_t key = 0; key < 200; ++key) {
        const PoissonField f(rng::derive(99, key), table.m_bound());
        const auto cc = couple_chains(table, 0, 0.0, 1.0, f, 40.0);
        const double tau = coupling_time(table, 0, 0.0, 1.0, f, 40.0);
        CHECK(cc.tau == tau);
        if (std::isfinite(tau)) {
            for (double t = tau; t <= 40.0; t += 0.37) CHECK(cc.first.state_at(t) == cc.second.state_at(t));
        }
    }
    const PoissonField f(1, table.m_bound());
    CHECK(coupling_time(table, 1, 2.0, 2.0, f, 10.0) == 2.0);
}

TEST_CASE("coupling survival against the two-state absorption oracle") {
    const GeneratorMatrix q(q2());
    const auto table = build_intervals(q);
    const int n = 20000;
    std::vector<double> taus(n);
    for (int k = 0; k < n; ++k) {
        taus[static_cast<std::size_t>(k)] =
            coupling_time(table, 0, 0.0, 1.0, PoissonField(rng::derive(123, k), table.m_bound()), 60.0);
    }
    for (double g : {0.0, 0.5, 1.0, 2.0}) {
        int alive = 0;
        for (double t : taus)
            if (t > 1.0 + g) ++alive;
        const double expect = oracle::two_state_survival(1.0, 2.0, 0, 0.0, 1.0, g);
        const double se = std::sqrt(expect * (1 - expect) / n);
        CHECK(std::abs(alive / static_cast<double>(n) - expect) < 4.0 * se + 1e-12);
    }
}

TEST_CASE("two-chain generator of |x| on the two-state table") {
    const auto table = build_intervals(GeneratorMatrix(q2()));
    const DifferenceFunction absf = [](long x) { return std::abs(static_cast<double>(x)); };
    CHECK(two_chain_generator(table, absf, 0, 1) == -1.0);
    CHECK(two_chain_generator(table, absf, 1, 0) == -1.0);
    CHECK(generator_riemann(table, absf, 0, 1) == doctest::Approx(-1.0).epsilon(1e-6));

    const auto rep = verify_coupling_function(table, absf);
    CHECK(rep.pass);
    CHECK(rep.sup_norm == 1.0);
    CHECK(rep.theta_max == 1.0);
    CHECK(rep.max_value == -1.0);

    // Three-state table: exact piecewise integration matches the Riemann sum.
    const auto t3 = build_intervals(GeneratorMatrix(q3()));
    const DifferenceFunction sq = [](long x) { return static_cast<double>(x * x); };
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l)
            if (k != l) {
                CHECK(two_chain_generator(t3, sq, k, l) ==
                      doctest::Approx(generator_riemann(t3, sq, k, l)).epsilon(1e-4));
            }
    const DifferenceFunction neg = [](long x) { return -std::abs(static_cast<double>(x)); };
    CHECK_FALSE(verify_coupling_function(table, neg).pass);
}
