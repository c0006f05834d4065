#include "dra/metrics.hpp"

#include <algorithm>
#include <string>

#include "dra/errors.hpp"

namespace dra {

double RunReport::smoothness_improvement() const noexcept {
    if (smoothness_without == 0.0) return 0.0;
    return 1.0 - smoothness_with / smoothness_without;
}

Vector soc_trajectory(const PevSpec& pev, std::span<const double> x_row) {
    Vector out;
    out.reserve(x_row.size() + 1);
    out.push_back(pev.soc_init_wh);
    for (double x : x_row) out.push_back(out.back() + x);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (out[k] < pev.soc_lower_wh || out[k] > pev.soc_upper_wh) {
            throw BoundViolation("soc_trajectory: SoC " + std::to_string(out[k]) +
                                 " Wh after slot " + std::to_string(k) + " leaves [" +
                                 std::to_string(pev.soc_lower_wh) + ", " +
                                 std::to_string(pev.soc_upper_wh) + "]");
        }
    }
    return out;
}

double smoothness(std::span<const double> loads) {
    if (loads.size() < 3) throw SizeError("smoothness needs at least 3 slots");
    double sum = 0.0;
    for (std::size_t k = 1; k + 1 < loads.size(); ++k) {
        const double d = 2.0 * loads[k] - loads[k - 1] - loads[k + 1];
        sum += d * d;
    }
    return sum;
}

double variance(std::span<const double> loads) {
    if (loads.empty()) return 0.0;
    double mean = 0.0;
    for (double v : loads) mean += v;
    mean /= static_cast<double>(loads.size());
    double acc = 0.0;
    for (double v : loads) acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(loads.size());
}

double consensus_spread(std::span<const double> outputs) {
    if (outputs.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(outputs.begin(), outputs.end());
    return *hi - *lo;
}

RunReport build_report(const Scenario& s, const PhaseResult& active, const PhaseResult& reactive) {
    RunReport r;
    const FleetState& final_state = reactive.final_state;
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        r.soc_trajectories.push_back(soc_trajectory(s.fleet[i], final_state.x[i]));
    }
    r.final_loads = aggregate_loads(s.grid, s.fleet, final_state);
    r.baseline_loads = {s.grid.active_base_w, s.grid.reactive_base_var};
    r.smoothness_with = smoothness(r.final_loads.active_w);
    r.smoothness_without = smoothness(r.baseline_loads.active_w);
    r.variance_with = variance(r.final_loads.active_w);
    r.variance_without = variance(r.baseline_loads.active_w);
    r.active = active;
    r.reactive = reactive;
    return r;
}

RunReport run_scenario(const Scenario& s, const PhaseObserver& observer) {
    const FleetState start = init_fleet_state(s);
    const PhaseResult active = run_active_phase(s, start, observer);
    const PhaseResult reactive = run_reactive_phase(s, active.final_state, observer);
    return build_report(s, active, reactive);
}

}  // namespace dra
