#include <doctest.h>

#include <numeric>
#include <random>

#include "dra/constraints.hpp"
#include "dra/errors.hpp"
#include "dra/model.hpp"
#include "fixtures.hpp"

using namespace dra;

TEST_CASE("case-study PEV validates with 500 Wh demand against 30 kWh capacity") {
    const Scenario s = fixtures::case_study(1);
    REQUIRE(s.fleet.size() == 1);
    CHECK(s.fleet[0].demand_wh() == 500.0);
    CHECK(s.slots() == 10);
    CHECK(s.mean_commitment == 0.5);
}

TEST_CASE("commitment of exactly 1 is rejected") {
    auto pev = fixtures::case_study_pev();
    pev.commitment = 1.0;
    CHECK_THROWS_AS(fixtures::scenario(fixtures::case_study_grid(), {pev}), RangeError);
}

TEST_CASE("commitment below the minimum is rejected") {
    Scenario s;
    s.grid = fixtures::case_study_grid();
    s.fleet = {fixtures::case_study_pev(10, 0.1)};
    s.params.min_commitment = 0.2;
    CHECK_THROWS_AS(validate_scenario(s), RangeError);
}

TEST_CASE("demand above t*p over all slots is infeasible") {
    // one 0.1 h slot at 3 kW carries at most 300 Wh
    auto pev = fixtures::case_study_pev(1);
    pev.slot_widths_h = {0.1};
    Scenario s;
    s.grid = fixtures::flat_grid(1);
    s.fleet = {pev};
    CHECK_THROWS_AS(validate_scenario(s), InfeasibleDemand);
}

TEST_CASE("shape and range errors") {
    SUBCASE("PEV slot count differs from the grid") {
        CHECK_THROWS_AS(fixtures::scenario(fixtures::flat_grid(8), {fixtures::case_study_pev(10)}), ShapeError);
    }
    SUBCASE("preferred profile length differs from slot widths") {
        auto pev = fixtures::case_study_pev();
        pev.preferred_rates_wh.pop_back();
        CHECK_THROWS_AS(fixtures::scenario(fixtures::case_study_grid(), {pev}), ShapeError);
    }
    SUBCASE("grid with a single slot") {
        CHECK_THROWS_AS(fixtures::scenario(fixtures::flat_grid(1), {}), ShapeError);
    }
    SUBCASE("eta outside [0, 1]") {
        CHECK_THROWS_AS(fixtures::scenario(fixtures::case_study_grid(), {fixtures::case_study_pev()}, 1.5), RangeError);
    }
    SUBCASE("initial SoC at the lower limit") {
        auto pev = fixtures::case_study_pev();
        pev.soc_init_wh = pev.soc_lower_wh;
        CHECK_THROWS_AS(fixtures::scenario(fixtures::case_study_grid(), {pev}), RangeError);
    }
    SUBCASE("target above the upper limit") {
        auto pev = fixtures::case_study_pev();
        pev.soc_target_wh = pev.soc_upper_wh + 1.0;
        CHECK_THROWS_AS(fixtures::scenario(fixtures::case_study_grid(), {pev}), RangeError);
    }
    SUBCASE("non-positive charger and slot widths") {
        auto pev = fixtures::case_study_pev();
        pev.charger_power_w = 0.0;
        CHECK_THROWS_AS(fixtures::scenario(fixtures::case_study_grid(), {pev}), RangeError);
        pev = fixtures::case_study_pev();
        pev.slot_widths_h[3] = 0.0;
        CHECK_THROWS_AS(fixtures::scenario(fixtures::case_study_grid(), {pev}), RangeError);
    }
    SUBCASE("non-positive epsilon") {
        Scenario s;
        s.grid = fixtures::case_study_grid();
        s.params.epsilon = 0.0;
        CHECK_THROWS_AS(validate_scenario(s), RangeError);
    }
}

TEST_CASE("validation is idempotent and the mean commitment is the arithmetic mean") {
    auto a = fixtures::case_study_pev(10, 0.2);
    auto b = fixtures::case_study_pev(10, 0.6);
    const Scenario s = fixtures::scenario(fixtures::case_study_grid(), {a, b, b});
    CHECK(s.mean_commitment == doctest::Approx((0.2 + 0.6 + 0.6) / 3.0));
    CHECK(validate_scenario(s) == s);

    const Scenario homogeneous = fixtures::case_study(6, 0.35);
    CHECK(homogeneous.mean_commitment == doctest::Approx(0.35).epsilon(1e-15));
}

TEST_CASE("uniform initial split for the case study") {
    const Scenario s = fixtures::case_study(6);
    const FleetState st = init_fleet_state(s);
    REQUIRE(st.pevs() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t k = 0; k < 10; ++k) {
            CHECK(st.x[i][k] == 50.0);
            CHECK(st.y[i][k] == 0.0);
        }
        CHECK(st.slack[i] == 0.0);
        CHECK(std::accumulate(st.x[i].begin(), st.x[i].end(), 0.0) == 500.0);
    }
}

TEST_CASE("zero demand starts from all-zero strategies") {
    auto pev = fixtures::case_study_pev();
    pev.soc_target_wh = pev.soc_init_wh;
    const FleetState st = init_fleet_state(fixtures::scenario(fixtures::case_study_grid(), {pev}));
    for (double x : st.x[0]) CHECK(x == 0.0);
}

TEST_CASE("a slot whose uniform share breaks the charger limit is moved to its midpoint") {
    // 300 Wh over slots of 1 h, 1 h and 0.01 h: the last slot carries at most 30 Wh.
    auto pev = fixtures::case_study_pev(3);
    pev.soc_target_wh = pev.soc_init_wh + 300.0;
    pev.slot_widths_h = {1.0, 1.0, 0.01};
    const Scenario s = fixtures::scenario(fixtures::flat_grid(3), {pev});
    const FleetState st = init_fleet_state(s);
    CHECK(st.x[0][0] == 150.0);
    CHECK(st.x[0][1] == 150.0);
    CHECK(st.x[0][2] == 0.0);
}

TEST_CASE("property: initial state is strictly feasible and conserves demand") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t K = 2 + trial % 12;
        std::vector<PevSpec> fleet;
        for (int i = 0; i < 3; ++i) fleet.push_back(fixtures::random_pev(rng, K));
        const Scenario s = fixtures::scenario(fixtures::flat_grid(K), fleet);
        const FleetState st = init_fleet_state(s);
        for (std::size_t i = 0; i < fleet.size(); ++i) {
            const double sum = std::accumulate(st.x[i].begin(), st.x[i].end(), 0.0);
            CHECK(std::abs(sum - fleet[i].demand_wh()) <= 1e-12 * std::max(1.0, std::abs(fleet[i].demand_wh())));
            for (std::size_t k = 0; k < K; ++k) {
                CHECK(active_bounds(fleet[i], k, st.x[i]).contains(st.x[i][k]));
            }
            CHECK(std::accumulate(st.y[i].begin(), st.y[i].end(), 0.0) + st.slack[i] == 0.0);
        }
    }
}

TEST_CASE("topology names") {
    CHECK(topology_from_string("ring") == Topology::Ring);
    CHECK(topology_from_string("complete") == Topology::Complete);
    CHECK(to_string(Topology::Complete) == "complete");
    CHECK_THROWS_AS(topology_from_string("star"), RangeError);
}
