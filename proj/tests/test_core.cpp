#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "swspde/core.hpp"
#include "swspde/errors.hpp"
#include "swspde/keyed_rng.hpp"

#include <cmath>

using namespace swspde;

TEST_CASE("delay measure validation and moments") {
    CHECK_THROWS_AS(DelayMeasure({}), ValidationError);
    CHECK_THROWS_AS(DelayMeasure({{0.0, 0.5}, {-1.0, 0.4}}), ValidationError);
    CHECK_THROWS_AS(DelayMeasure({{0.5, 1.0}}), ValidationError);
    CHECK_THROWS_AS(DelayMeasure({{0.0, 1.5}, {-1.0, -0.5}}), ValidationError);
    CHECK_THROWS_AS(DelayMeasure({{-1.0, 0.5}, {-1.0, 0.5}}), ValidationError);
    try {
        DelayMeasure({{0.0, 0.9}});
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.path() == "rho");
    }

    const DelayMeasure rho({{-2.0, 0.25}, {0.0, 0.5}, {-1.0, 0.25}});
    REQUIRE(rho.atoms().size() == 3);
    CHECK(rho.atoms().front().theta == 0.0);
    CHECK(rho.deepest_lag() == -2.0);
    CHECK(rho.moment(0.0) == doctest::Approx(1.0));
    CHECK(rho.moment(1.0) == doctest::Approx(0.5 + 0.25 * std::exp(1.0) + 0.25 * std::exp(2.0)));
    CHECK(rho_moment(DelayMeasure::point_mass(), 3.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(rho.moment(-0.1), ValidationError);
}

TEST_CASE("segment evaluation, tail rule and ring buffer") {
    const double dt = 0.5;
    Eigen::MatrixXd v(1, 4);
    v << 4.0, 3.0, 2.0, 1.0; // x(0), x(-0.5), x(-1), x(-1.5)
    Eigen::VectorXd tail(1);
    tail << 0.5;
    Segment s(1.0, dt, v, tail);
    CHECK(s.horizon() == doctest::Approx(1.5));
    CHECK(s.eval(0.0)(0) == 4.0);
    CHECK(s.eval(-0.25)(0) == doctest::Approx(3.5));
    CHECK(s.eval(-1.5)(0) == 1.0);
    CHECK(s.eval(-3.0)(0) == doctest::Approx(std::exp(3.0) * 0.5));
    CHECK_THROWS_AS(s.eval(0.1), ValidationError);

    Eigen::VectorXd h(1);
    h << 5.0;
    s.advance(h);
    CHECK(s.head()(0) == 5.0);
    CHECK(s.value(1)(0) == 4.0);
    CHECK(s.value(3)(0) == 2.0);
    const auto ordered = s.ordered_values();
    CHECK(ordered(0, 0) == 5.0);
    CHECK(ordered(0, 3) == 2.0);
}

TEST_CASE("weighted segment norm against a dense brute-force sup") {
    const double dt = 0.01, r = 1.0;
    const std::size_t n = default_history_points(r, dt);
    CHECK(std::exp(-2.0 * r * static_cast<double>(n - 1) * dt) < 1e-8);
    std::vector<double> vals(n);
    Eigen::MatrixXd m(1, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = -static_cast<double>(i) * dt;
        vals[i] = std::sin(3.0 * theta) * std::exp(-0.5 * theta);
        m(0, static_cast<Eigen::Index>(i)) = vals[i];
    }
    Segment s(r, dt, m, Eigen::VectorXd::Zero(1));
    const double brute = oracle::weighted_sup(vals, dt, r, 0.0);
    CHECK(segment_norm_r(s) == doctest::Approx(brute).epsilon(1e-3));
    CHECK(segment_norm_r(s) <= brute + 1e-15);

    Eigen::VectorXd big_tail(1);
    big_tail << 7.0;
    Segment t(r, dt, m, big_tail);
    CHECK(segment_norm_r(t) == 7.0);

    Eigen::MatrixXd bad = m;
    bad(0, 5) = std::nan("");
    CHECK_THROWS_AS(segment_norm_r(Segment(r, dt, bad, Eigen::VectorXd::Zero(1))), ValidationError);
}

TEST_CASE("delay integral and product metric") {
    const double dt = 0.25;
    Eigen::MatrixXd v(2, 5);
    v << 1, 2, 3, 4, 5, 0, 0, 0, 0, 8;
    Segment s(2.0, dt, v, Eigen::VectorXd::Zero(2));
    const DelayMeasure rho({{0.0, 0.5}, {-0.5, 0.25}, {-0.875, 0.25}});
    const auto y = delay_integral(s, rho);
    CHECK(y(0) == doctest::Approx(0.5 * 1 + 0.25 * 3 + 0.25 * 4.5));
    CHECK(y(1) == doctest::Approx(0.25 * 4.0));

    const StatePoint a{s, 0};
    const StatePoint b{Segment::zero(2.0, dt, 5, 2), 1};
    CHECK(metric_d(a, a) == 0.0);
    CHECK(metric_d(a, b) == doctest::Approx(segment_norm_r(s) + 1.0));
    const StatePoint c{Segment::zero(2.0, dt, 6, 2), 0};
    CHECK_THROWS_AS(metric_d(a, c), ValidationError);
}

TEST_CASE("keyed random numbers are pure functions of their coordinates") {
    CHECK(rng::derive(7, 1, 2) == rng::derive(7, 1, 2));
    CHECK(rng::derive(7, 1, 2) != rng::derive(7, 2, 1));
    CHECK(rng::gaussian_at(42) == rng::gaussian_at(42));
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng::gaussian_at(rng::derive(3, i));
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.01));
    rng::KeyedStream a(9), b(9);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
}
