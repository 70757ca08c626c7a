#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "swspde/errors.hpp"
#include "swspde/keyed_rng.hpp"
#include "swspde/sim.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace swspde;
using namespace swspde::sim;

namespace {

AffineRegime zero_regime(int n, int w) {
    return {Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n),
            Eigen::MatrixXd::Zero(n, w),  Eigen::MatrixXd::Zero(n, w), Eigen::MatrixXd::Zero(n, w)};
}

Model ou_model(double lambda, double sigma) {
    Eigen::MatrixXd eig(1, 1);
    eig << lambda;
    auto a = zero_regime(1, 1);
    a.S0(0, 0) = sigma;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(1, 1);
    return Model(OperatorFamily(eig), AffineCoefficients({a}), DelayMeasure::point_mass(), 1.0,
                 chain::GeneratorMatrix(q));
}

// Certified two-state example: G = -I/8, D = I/4, S1 = S2 = diag(1/4).
Model two_state_model(bool with_constants = true, const DelayMeasure& rho = DelayMeasure::point_mass()) {
    Eigen::MatrixXd eig(2, 2);
    eig << 1, 2, 1, 3;
    std::vector<AffineRegime> regs;
    for (int k = 0; k < 2; ++k) {
        auto a = zero_regime(2, 2);
        a.G = -0.125 * Eigen::MatrixXd::Identity(2, 2);
        a.D = 0.25 * Eigen::MatrixXd::Identity(2, 2);
        a.S1 = 0.25 * Eigen::MatrixXd::Identity(2, 2);
        a.S2 = 0.25 * Eigen::MatrixXd::Identity(2, 2);
        if (with_constants) {
            a.g = k == 0 ? Eigen::Vector2d(0.5, 0.0) : Eigen::Vector2d(-0.5, 0.2);
            a.S0 = 0.3 * Eigen::MatrixXd::Identity(2, 2);
        }
        regs.push_back(a);
    }
    Eigen::MatrixXd q(2, 2);
    q << -1, 1, 2, -2;
    return Model(OperatorFamily(eig), AffineCoefficients(regs), rho, 1.0, chain::GeneratorMatrix(q));
}

} // namespace

TEST_CASE("phi factor") {
    CHECK(phi_factor(1.0, 0.0) == 0.0);
    CHECK(phi_factor(1.0, std::log(2.0)) == doctest::Approx(0.5));
    CHECK(phi_factor(1e-12, 0.3) == doctest::Approx(0.3));
    CHECK(phi_factor(2e-6, 0.25) == doctest::Approx(-std::expm1(-5e-7) / 2e-6).epsilon(1e-12));
}

TEST_CASE("exponential Euler step examples") {
    Eigen::MatrixXd eig(1, 1);
    eig << 1.0;
    auto a = zero_regime(1, 1);
    const Model null_model(OperatorFamily(eig), AffineCoefficients({a}), DelayMeasure::point_mass(), 1.0,
                           chain::GeneratorMatrix(Eigen::MatrixXd::Zero(1, 1)));
    const double h = std::log(2.0);
    Eigen::VectorXd dW = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd x(1);
    x << 3.0;
    CHECK(exp_euler_head(null_model, 0, x, x, h, dW)(0) == doctest::Approx(1.5));

    a.g(0) = 1.0;
    const Model drift_model(OperatorFamily(eig), AffineCoefficients({a}), DelayMeasure::point_mass(), 1.0,
                            chain::GeneratorMatrix(Eigen::MatrixXd::Zero(1, 1)));
    x << 0.0;
    CHECK(exp_euler_head(drift_model, 0, x, x, h, dW)(0) == doctest::Approx(0.5));

    const auto seg = Segment::constant(1.0, 0.1, 5, Eigen::VectorXd::Constant(1, 2.0));
    const auto same = exp_euler_step(drift_model, seg, 0, 0.0, dW);
    CHECK(same.head()(0) == 2.0);
    CHECK_THROWS_AS(exp_euler_step(drift_model, seg, 0, 0.1, Eigen::VectorXd::Zero(2)), ValidationError);
    const auto next = exp_euler_step(drift_model, seg, 0, 0.1, dW);
    CHECK(next.value(1)(0) == 2.0);
}

TEST_CASE("operator family and coefficient validation") {
    Eigen::MatrixXd bad(1, 2);
    bad << 2.0, 1.0;
    CHECK_THROWS_AS(OperatorFamily{bad}, ValidationError);
    bad << 0.0, 1.0;
    CHECK_THROWS_AS(OperatorFamily{bad}, ValidationError);
    auto a = zero_regime(2, 1);
    a.G(0, 1) = 1.0;
    CHECK_THROWS_AS(AffineCoefficients({a}), ValidationError);
    auto b = zero_regime(2, 1);
    b.S1.resize(2, 2);
    CHECK_THROWS_AS(AffineCoefficients({b}), ValidationError);
}

TEST_CASE("certified constants of the affine family") {
    Eigen::MatrixXd eig(1, 2);
    eig << 1.0, 2.0;
    auto a = zero_regime(2, 1);
    a.G = -0.7 * Eigen::MatrixXd::Identity(2, 2);
    const auto c1 = certify_affine(AffineCoefficients({a}), OperatorFamily(eig), DelayMeasure::point_mass(), 1.0);
    CHECK(c1.alpha(0) == doctest::Approx(-1.4));
    CHECK(c1.beta(0) == 1e-300);
    CHECK(c1.L == 1e-300);

    auto b = zero_regime(2, 1);
    b.D << 0.0, 0.25, 0.0, 0.0;
    const auto c2 = certify_affine(AffineCoefficients({b}), OperatorFamily(eig), DelayMeasure::point_mass(), 1.0);
    CHECK(c2.alpha(0) == doctest::Approx(0.25));
    CHECK(c2.beta(0) == doctest::Approx(0.25));

    const auto model = two_state_model();
    const auto c = certify_affine(model);
    CHECK(c.alpha(0) == doctest::Approx(0.0));
    CHECK(c.beta(1) == doctest::Approx(0.25));
    CHECK(c.L == doctest::Approx(0.5));
    CHECK(c.lambda1(1) == 1.0);
}

TEST_CASE("dissipativity and noise-Lipschitz inequalities hold on random families") {
    std::mt19937_64 gen(77);
    std::normal_distribution<double> nd(0.0, 1.0);
    const int n = 3, w = 2;
    const DelayMeasure rho({{0.0, 0.5}, {-0.3, 0.3}, {-1.1, 0.2}});
    Eigen::MatrixXd eig(1, n);
    eig << 1, 2, 3;
    for (int fam = 0; fam < 10; ++fam) {
        AffineRegime a = zero_regime(n, w);
        Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return nd(gen); });
        a.G = 0.5 * (m + m.transpose());
        a.D = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return 0.5 * nd(gen); });
        a.S1 = Eigen::MatrixXd::NullaryExpr(n, w, [&] { return 0.5 * nd(gen); });
        a.S2 = Eigen::MatrixXd::NullaryExpr(n, w, [&] { return 0.5 * nd(gen); });
        a.S0 = Eigen::MatrixXd::NullaryExpr(n, w, [&] { return nd(gen); });
        a.g = Eigen::VectorXd::NullaryExpr(n, [&] { return nd(gen); });
        const AffineCoefficients fam_c({a});
        const auto c = certify_affine(fam_c, OperatorFamily(eig), rho, 1.0);
        for (int pair = 0; pair < 100; ++pair) {
            Eigen::MatrixXd xv = Eigen::MatrixXd::NullaryExpr(n, 15, [&] { return nd(gen); });
            Eigen::MatrixXd yv = Eigen::MatrixXd::NullaryExpr(n, 15, [&] { return nd(gen); });
            const Segment x(1.0, 0.1, xv, Eigen::VectorXd::Zero(n));
            const Segment y(1.0, 0.1, yv, Eigen::VectorXd::Zero(n));
            const Eigen::VectorXd dx0 = x.head() - y.head();
            const Eigen::VectorXd xd = delay_integral(x, rho), yd = delay_integral(y, rho);
            double integral = 0.0;
            for (const auto& at : rho.atoms()) integral += at.weight * (x.eval(at.theta) - y.eval(at.theta)).squaredNorm();
            const double lhs = 2.0 * dx0.dot(fam_c.drift(0, x.head(), xd) - fam_c.drift(0, y.head(), yd));
            CHECK(lhs <= c.alpha(0) * dx0.squaredNorm() + c.beta(0) * integral + 1e-10);
            const double noise = (fam_c.diffusion(0, x.head(), xd) - fam_c.diffusion(0, y.head(), yd)).squaredNorm();
            CHECK(noise <= c.L * (dx0.squaredNorm() + integral) + 1e-10);
        }
    }
}

TEST_CASE("Wiener field: consistency, additivity and variance") {
    const WienerField f(5, 2);
    WienerCursor cur(f);
    Eigen::VectorXd a(2), b(2), c(2);
    // Cached values match the uncached field regardless of query history.
    cur.increment(0.3, 0.31, a);
    cur.increment(-3.7, 2.05, b);
    const Eigen::VectorXd direct = f.increment(0.3, 0.31);
    CHECK(a == direct);
    CHECK(b == f.increment(-3.7, 2.05));
    WienerCursor cur2(f);
    cur2.increment(1.9, 1.95, c);
    cur2.increment(0.3, 0.31, c);
    CHECK(c == direct);

    const Eigen::VectorXd whole = f.increment(-1.25, 1.75);
    const Eigen::VectorXd parts = f.increment(-1.25, 0.125) + f.increment(0.125, 1.75);
    CHECK((whole - parts).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(f.increment(0.5, 0.5).cwiseAbs().maxCoeff() == 0.0);

    double s1 = 0.0, s2 = 0.0;
    const int n = 20000;
    WienerCursor walk(f);
    Eigen::VectorXd d(2);
    for (int i = 0; i < n; ++i) {
        walk.increment(i * 0.01, (i + 1) * 0.01, d);
        s1 += d(0) * d(0);
        s2 += d(0) * d(1);
    }
    CHECK(s1 / n == doctest::Approx(0.01).epsilon(0.03));
    CHECK(std::abs(s2 / n) < 0.0005);

    double unit = 0.0;
    for (int m = -500; m < 500; ++m) {
        const double z = f.increment(m + 0.25, m + 1.25)(1);
        unit += z * z;
    }
    CHECK(unit / 1000 == doctest::Approx(1.0).epsilon(0.12));
}

TEST_CASE("null dynamics and semigroup contraction") {
    Eigen::MatrixXd eig(2, 2);
    eig << 0.5, 1.5, 1.0, 2.0;
    std::vector<AffineRegime> regs{zero_regime(2, 1), zero_regime(2, 1)};
    Eigen::MatrixXd q(2, 2);
    q << -1, 1, 1, -1;
    const Model m(OperatorFamily(eig), AffineCoefficients(regs), DelayMeasure::point_mass(), 1.0,
                  chain::GeneratorMatrix(q));
    const auto cfg = SolverConfig::make(0.01, 1.0, 2.0, 3, 4);
    const auto zero = simulate_path(m, cfg, Segment::zero(1.0, 0.01, cfg.history_points, 2), 0, 0, 300);
    CHECK(zero.states.cwiseAbs().maxCoeff() == 0.0);

    const auto phi = Segment::constant(1.0, 0.01, cfg.history_points, Eigen::Vector2d(1.0, -2.0));
    const auto tr = simulate_path(m, cfg, phi, 0, 0, 500, 10);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        CHECK(tr.head_norms[i] <= std::exp(-0.5 * tr.times[i]) * std::sqrt(5.0) * (1 + 1e-12));
    }
}

TEST_CASE("exact decay in a single regime without noise") {
    Eigen::MatrixXd eig(1, 1);
    eig << 1.5;
    const Model m(OperatorFamily(eig), AffineCoefficients({zero_regime(1, 1)}), DelayMeasure::point_mass(), 1.0,
                  chain::GeneratorMatrix(Eigen::MatrixXd::Zero(1, 1)));
    const auto cfg = SolverConfig::make(0.01, 1.0, 1.0, 1, 2);
    const auto tr = simulate_path(m, cfg, Segment::constant(1.0, 0.01, cfg.history_points, Eigen::VectorXd::Ones(1)),
                                  0, 0, 200, 50);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        CHECK(tr.states(0, static_cast<Eigen::Index>(i)) == doctest::Approx(std::exp(-1.5 * tr.times[i])).epsilon(1e-12));
    }
}

TEST_CASE("determinism, resumption and checkpoints") {
    const auto m = two_state_model();
    const auto cfg = SolverConfig::make(0.01, 1.0, 0.0, 10, 20);
    const auto phi = Segment::constant(1.0, 0.01, cfg.history_points, Eigen::Vector2d(1.0, 1.0));
    const auto a = simulate_path(m, cfg, phi, 0, 0, 400, 7);
    const auto b = simulate_path(m, cfg, phi, 0, 0, 400, 7);
    CHECK(a.states == b.states);
    CHECK(a.regimes == b.regimes);
    CHECK(a.times.back() == 4.0);

    const auto mid = simulate_to(m, cfg, PathState{0, 0, phi}, 137);
    const auto end_split = simulate_to(m, cfg, mid, 400);
    const auto end_whole = simulate_to(m, cfg, PathState{0, 0, phi}, 400);
    CHECK(end_split.segment.ordered_values() == end_whole.segment.ordered_values());
    CHECK(end_split.regime == end_whole.regime);
    CHECK(end_whole.segment.head() == a.states.col(a.states.cols() - 1));

    std::stringstream ck;
    write_checkpoint(ck, mid, cfg);
    const auto back = read_checkpoint(ck, cfg);
    CHECK(back.step == 137);
    CHECK(back.segment.ordered_values() == mid.segment.ordered_values());
    const auto resumed = simulate_to(m, cfg, back, 400);
    CHECK(resumed.segment.ordered_values() == end_whole.segment.ordered_values());

    std::stringstream bad("NOTACHECKPOINT");
    CHECK_THROWS_AS(read_checkpoint(bad, cfg), ValidationError);
    std::stringstream ck2;
    write_checkpoint(ck2, mid, cfg);
    auto other = cfg;
    other.wiener_key = 11;
    CHECK_THROWS_AS(read_checkpoint(ck2, other), ValidationError);

    std::ostringstream csv;
    write_trajectory_csv(csv, a);
    const std::string s = csv.str();
    CHECK(s.rfind("# swspde trajectory v1\ntime,regime,x_0,x_1,norm_head,norm_segment\n", 0) == 0);
}

TEST_CASE("solver config grid rules") {
    CHECK(SolverConfig::make(0.01, 1.0, 0.0, 0, 0).steps_per_unit == 100);
    CHECK_THROWS_AS(SolverConfig::make(0.03, 1.0, 0.0, 0, 0), ValidationError);
    CHECK_THROWS_AS(SolverConfig::make(0.0, 1.0, 0.0, 0, 0), ValidationError);
    const auto cfg = SolverConfig::make(0.25, 1.0, 1.0, 0, 0);
    CHECK(cfg.history_points == 5);
    CHECK(cfg.step_of(-2.0) == -8);
    CHECK_THROWS_AS(cfg.step_of(0.1), ValidationError);
}

TEST_CASE("shared-noise pairs") {
    const auto m = two_state_model();
    const auto cfg = SolverConfig::make(0.01, 1.0, 0.0, 1, 2);
    const auto phi = Segment::constant(1.0, 0.01, cfg.history_points, Eigen::Vector2d(1.0, -1.0));
    const auto psi = Segment::constant(1.0, 0.01, cfg.history_points, Eigen::Vector2d(0.5, 0.0));
    const auto same = simulate_pair_shared_noise(m, cfg, phi, phi, 0, 0, 300, 10);
    for (double g : same.gamma_norms) CHECK(g == 0.0);
    for (double g : same.gamma_segment_norms) CHECK(g == 0.0);

    // The difference process does not see g or S0.
    const auto with = simulate_pair_shared_noise(m, cfg, phi, psi, 0, 0, 300, 10);
    const auto without = simulate_pair_shared_noise(two_state_model(false), cfg, phi, psi, 0, 0, 300, 10);
    REQUIRE(with.gamma_norms.size() == without.gamma_norms.size());
    for (std::size_t i = 0; i < with.gamma_norms.size(); ++i) {
        CHECK(with.gamma_norms[i] == doctest::Approx(without.gamma_norms[i]).epsilon(1e-9));
    }
}

TEST_CASE("remote start: repeated start times and noise consistency") {
    const DelayMeasure rho({{0.0, 0.6}, {-0.5, 0.4}});
    const auto m = two_state_model(true, rho);
    const auto cfg = SolverConfig::make(0.01, 1.0, 0.0, 31, 32);
    const auto phi = Segment::constant(1.0, 0.01, cfg.history_points, Eigen::Vector2d(1.0, 1.0));
    std::vector<std::vector<NoiseRecord>> logs;
    const auto out = remote_start_solve(m, cfg, phi, 0, {-200, -200, -400}, 0, &logs);
    CHECK(metric_d(out[0], out[1]) == 0.0);
    CHECK(metric_d(out[1], out[2]) > 0.0);

    // Every piece consumed from -2 on by the deeper start that matches a piece of
    // the shallower start in time carries the identical increment.
    std::size_t matched = 0;
    for (const auto& rec : logs[2]) {
        if (rec.t0 < -2.0) continue;
        for (const auto& other : logs[0]) {
            if (other.t0 == rec.t0 && other.t1 == rec.t1) {
                CHECK(other.dW == rec.dW);
                ++matched;
            }
        }
    }
    CHECK(matched >= logs[0].size() / 2);
    CHECK_THROWS_AS(remote_start_solve(m, cfg, phi, 0, {10}, 0), ValidationError);
}

TEST_CASE("OU stationary variance against the discrete oracle") {
    const auto m = ou_model(1.0, 0.8);
    const int n = 2000;
    double sum = 0.0, sq = 0.0;
    for (int p = 0; p < n; ++p) {
        const auto cfg = SolverConfig::make(0.01, 1.0, 0.5, rng::derive(8, p, 1), rng::derive(8, p, 2));
        const auto st = simulate_to(m, cfg, PathState{0, 0, Segment::zero(1.0, 0.01, cfg.history_points, 1)}, 800);
        const double x = st.segment.head()(0);
        sum += x;
        sq += x * x;
    }
    const double var = sq / n - (sum / n) * (sum / n);
    const double expect = oracle::ou_discrete_variance(1.0, 0.8, 0.01) * (1.0 - std::exp(-16.0));
    CHECK(var == doctest::Approx(expect).epsilon(0.1));
}

TEST_CASE("divergence is reported with its time") {
    Eigen::MatrixXd eig(1, 1);
    eig << 1.0;
    auto a = zero_regime(1, 1);
    a.G(0, 0) = 1e5;
    const Model m(OperatorFamily(eig), AffineCoefficients({a}), DelayMeasure::point_mass(), 1.0,
                  chain::GeneratorMatrix(Eigen::MatrixXd::Zero(1, 1)));
    const auto cfg = SolverConfig::make(0.01, 1.0, 0.1, 1, 2);
    try {
        simulate_to(m, cfg, PathState{0, 0, Segment::constant(1.0, 0.01, cfg.history_points, Eigen::VectorXd::Ones(1))},
                    10000);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.time() < 10.0);
    }
}
