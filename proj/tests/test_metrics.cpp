#include <doctest.h>

#include <random>

#include "dra/constraints.hpp"
#include "dra/errors.hpp"
#include "dra/metrics.hpp"
#include "fixtures.hpp"

using namespace dra;

TEST_CASE("SoC trajectory") {
    const auto pev = fixtures::case_study_pev();
    const auto soc = soc_trajectory(pev, Vector(10, 50.0));
    REQUIRE(soc.size() == 11);
    CHECK(soc.front() == 15500.0);
    CHECK(soc.back() == 16000.0);
    Vector bad(10, 0.0);
    bad[0] = 3500.0;
    CHECK_THROWS_AS(soc_trajectory(pev, bad), BoundViolation);
    for (std::size_t k = 0; k <= 10; ++k) CHECK(soc[k] == 15500.0 + 50.0 * static_cast<double>(k));
    CHECK(soc_trajectory(pev, Vector(10, 0.0)) == Vector(11, 15500.0));
}

TEST_CASE("smoothness") {
    const Vector step{10000, 10000, 10000, 10000, 13000, 13000, 13000, 10000, 10000, 10000};
    // second differences: -3000 at slots 4 and 8, +3000 at slots 5 and 7
    CHECK(smoothness(step) == 4.0 * 9e6);
    const Vector bump{1.0, 2.0, 1.0};
    CHECK(smoothness(bump) == 4.0);
    CHECK(smoothness(Vector(6, 3.5)) == 0.0);
    const Vector line{1.0, 3.0, 5.0, 7.0};
    CHECK(smoothness(line) == 0.0);
    const Vector two{1.0, 2.0};
    CHECK_THROWS_AS(smoothness(two), SizeError);
}

TEST_CASE("variance and spread") {
    const Vector v{1.0, 2.0, 3.0, 4.0};
    CHECK(variance(v) == 1.25);
    CHECK(variance(Vector(5, 7.0)) == 0.0);
    CHECK(consensus_spread(v) == 3.0);
    CHECK(consensus_spread(Vector{}) == 0.0);
    CHECK(consensus_spread(Vector{-1.0, 4.0}) == 5.0);
}

TEST_CASE("improvement ratio") {
    RunReport r;
    CHECK(r.smoothness_improvement() == 0.0);
    r.smoothness_without = 4.0;
    r.smoothness_with = 1.0;
    CHECK(r.smoothness_improvement() == 0.75);
}

TEST_CASE("property: smoothness and variance ignore an added constant") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1e4);
    for (int trial = 0; trial < 200; ++trial) {
        Vector a(3 + trial % 10);
        for (auto& e : a) e = u(rng);
        Vector b = a;
        const double shift = u(rng);
        for (auto& e : b) e += shift;
        CHECK(smoothness(b) == doctest::Approx(smoothness(a)).epsilon(1e-9));
        CHECK(variance(b) == doctest::Approx(variance(a)).epsilon(1e-9));
        CHECK(smoothness(a) >= 0.0);
    }
}

TEST_CASE("property: affine profiles have zero smoothness") {
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double a = u(rng);
        const double b = u(rng);
        Vector v(3 + trial % 12);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = a + b * static_cast<double>(k);
        CHECK(smoothness(v) < 1e-18);
        v[v.size() / 2] += 1.0;
        CHECK(smoothness(v) > 0.0);
    }
}

TEST_CASE("property: the SoC endpoint moves by the row sum") {
    std::mt19937 rng(47);
    for (int trial = 0; trial < 100; ++trial) {
        const auto pev = fixtures::random_pev(rng, 6);
        Scenario s = fixtures::scenario(fixtures::flat_grid(6), {pev});
        const auto x = init_fleet_state(s).x[0];
        const auto soc = soc_trajectory(pev, x);
        double sum = pev.soc_init_wh;
        for (double v : x) sum += v;
        CHECK(soc.back() == sum);
    }
}

TEST_CASE("an empty fleet leaves the profile unchanged") {
    const Scenario s = fixtures::scenario(fixtures::case_study_grid(), {});
    const auto r = run_scenario(s);
    CHECK(r.smoothness_with == r.smoothness_without);
    CHECK(r.variance_with == r.variance_without);
    CHECK(r.soc_trajectories.empty());
}

TEST_CASE("case study: more vehicles smooth the step further") {
    const auto one = run_scenario(fixtures::case_study(1));
    const auto six = run_scenario(fixtures::case_study(6));
    REQUIRE(one.converged());
    REQUIRE(six.converged());
    CHECK(six.smoothness_without == 4.0 * 9e6);
    CHECK(six.smoothness_with < six.smoothness_without);
    CHECK(one.smoothness_with < one.smoothness_without);
    CHECK(six.smoothness_improvement() > one.smoothness_improvement());
    CHECK(six.variance_with < six.variance_without);
    for (const auto& soc : six.soc_trajectories) {
        CHECK(soc.size() == 11);
        CHECK(std::abs(soc.back() - 16000.0) <= 1.0);
    }
}

TEST_CASE("final loads are the baseline plus the fleet's power") {
    const Scenario s = fixtures::case_study(2);
    const auto r = run_scenario(s);
    const auto& x = r.reactive.final_state.x;
    for (std::size_t k = 0; k < 10; ++k) {
        CHECK(r.final_loads.active_w[k] ==
              doctest::Approx(s.grid.active_base_w[k] + x[0][k] + x[1][k]).epsilon(1e-14));
        CHECK(r.baseline_loads.active_w[k] == s.grid.active_base_w[k]);
    }
}

TEST_CASE("reactive identities at the converged schedule") {
    StepBaseline b;
    b.reactive_var = 1500.0;
    const Scenario s = fixtures::scenario(step_baseline(b), std::vector<PevSpec>(2, fixtures::case_study_pev()));
    const auto r = run_scenario(s);
    REQUIRE(r.converged());
    const auto& st = r.reactive.final_state;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& pev = s.fleet[i];
        const auto env = reactive_envelope(pev, st.x[i]);
        const double p2 = pev.charger_power_w * pev.charger_power_w;
        double total = 0.0;
        for (std::size_t k = 0; k < 10; ++k) {
            const double rate = st.x[i][k] / pev.slot_widths_h[k];
            const double q = env.per_slot_limit[k];
            CHECK(std::abs(q * q + rate * rate - p2) <= 1e-9 * p2);
            CHECK(std::abs(st.y[i][k]) < q);
            total += std::abs(st.y[i][k]);
        }
        CHECK(std::abs(st.slack[i]) < env.total_capacity);
        CHECK(total <= env.total_capacity);
    }
}
