#include <doctest.h>

#include <numeric>

#include "dra/dynamics.hpp"
#include "dra/errors.hpp"
#include "dra/oracle.hpp"
#include "fixtures.hpp"

using namespace dra;

namespace {

double row_sum(const Vector& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

PevSpec small_pev(std::size_t K) {
    auto pev = fixtures::case_study_pev(K);
    pev.preferred_rates_wh.assign(K, 500.0 / static_cast<double>(K));
    return pev;
}

}  // namespace

TEST_CASE("without commitment the oracle returns the preferred profile") {
    auto pev = fixtures::case_study_pev(4, 0.0);
    pev.preferred_rates_wh = {300.0, -100.0, 200.0, 100.0};
    SimParams params;
    params.epsilon = 1e-9;
    const auto sol = solve_single_pev(pev, fixtures::ramp_grid(4, 9000.0, 800.0), params, Vector(4, 0.0));
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(sol.x_star[k] == doctest::Approx(pev.preferred_rates_wh[k]).epsilon(1e-6));
    }
    CHECK(sol.residual < 1e-8);
}

TEST_CASE("two symmetric slots split the demand evenly") {
    auto pev = fixtures::case_study_pev(2);
    pev.soc_lower_wh = -1e9;
    pev.soc_upper_wh = 1e9;
    SimParams params;
    const auto sol = solve_single_pev(pev, fixtures::flat_grid(2), params, Vector(2, 0.0));
    CHECK(sol.x_star[0] == doctest::Approx(250.0).epsilon(1e-12));
    CHECK(sol.x_star[1] == doctest::Approx(250.0).epsilon(1e-12));
}

TEST_CASE("three-slot flat baseline: oracle against the consensus flow") {
    const auto pev = small_pev(3);
    const auto grid = fixtures::flat_grid(3);
    const Scenario s = fixtures::scenario(grid, {pev});
    const auto sol = solve_single_pev(pev, grid, s.params, Vector(3, 0.0));
    CHECK(sol.residual < 1e-8);
    CHECK(std::abs(row_sum(sol.x_star) - 500.0) < 1e-10 * 500.0);

    const auto r = run_active_phase(s, init_fleet_state(s));
    REQUIRE(r.converged);
    CHECK(fixtures::rel_diff(r.final_state.x[0], sol.x_star) < 1e-4);
}

TEST_CASE("other PEVs enter as a fixed load") {
    // two identical PEVs: with the partner frozen at the flow's answer the
    // oracle must return the same schedule
    const auto pev = small_pev(3);
    const auto grid = fixtures::ramp_grid(3, 10000.0, 600.0);
    const Scenario s = fixtures::scenario(grid, {pev, pev});
    const auto r = run_active_phase(s, init_fleet_state(s));
    REQUIRE(r.converged);
    Vector partner(3);
    for (std::size_t k = 0; k < 3; ++k) partner[k] = r.final_state.x[1][k] / pev.slot_widths_h[k];
    SimParams params = s.params;
    params.epsilon = r.settings.epsilon;
    const auto sol = solve_single_pev(pev, grid, params, partner, s.mean_commitment);
    CHECK(fixtures::rel_diff(r.final_state.x[0], sol.x_star) < 1e-4);
}

TEST_CASE("shape errors") {
    SimParams params;
    CHECK_THROWS_AS(solve_single_pev(small_pev(3), fixtures::flat_grid(4), params, Vector(3, 0.0)), ShapeError);
    CHECK_THROWS_AS(solve_single_pev(small_pev(3), fixtures::flat_grid(3), params, Vector(2, 0.0)), ShapeError);
}

TEST_CASE("reference integrator") {
    SUBCASE("a state at consensus is returned unchanged") {
        auto pev = fixtures::case_study_pev(4);
        pev.soc_lower_wh = -1e9;
        pev.soc_upper_wh = 1e9;
        const Scenario s = fixtures::scenario(fixtures::flat_grid(4), {pev});
        const FleetState st = init_fleet_state(s);
        CHECK(reference_integrate(s, st, 1e-3).x == st.x);
    }
    SUBCASE("agrees with the main integrator on the case-study PEV") {
        const Scenario s = fixtures::case_study(1);
        const FleetState st = init_fleet_state(s);
        const auto main = run_active_phase(s, st);
        REQUIRE(main.converged);
        const FleetState ref = reference_integrate(s, st, main.settings.step_size / 100.0);
        CHECK(fixtures::rel_diff(ref.x[0], main.final_state.x[0]) < 1e-4);
    }
    SUBCASE("halving the fine step barely moves the equilibrium") {
        Scenario s = fixtures::scenario(fixtures::flat_grid(3), {small_pev(3)});
        const FleetState st = init_fleet_state(s);
        const auto settings = resolve_active_settings(s, st);
        s.params.tolerance = 1e-9 * settings.tolerance / 1e-6;
        const FleetState a = reference_integrate(s, st, settings.step_size / 10.0);
        const FleetState b = reference_integrate(s, st, settings.step_size / 20.0);
        CHECK(fixtures::rel_diff(b.x[0], a.x[0]) < 1e-6);
    }
    SUBCASE("a step that leaves the box collapses") {
        const Scenario s = fixtures::case_study(1);
        CHECK_THROWS_AS(reference_integrate(s, init_fleet_state(s), 1e9), StepCollapse);
        CHECK_THROWS_AS(reference_integrate(s, init_fleet_state(s), 0.0), RangeError);
    }
}
