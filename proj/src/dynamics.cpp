#include "dra/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dra/constraints.hpp"
#include "dra/errors.hpp"
#include "dra/metrics.hpp"
#include "dra/payoff.hpp"

namespace dra {

namespace {

constexpr int kMaxHalvings = 20;
constexpr double kStepMargin = 1e-9;
constexpr double kFirstStepFraction = 0.01;
constexpr double kDefaultToleranceFactor = 1e-6;

double min_slot_width(const PevSpec& pev) {
    return *std::min_element(pev.slot_widths_h.begin(), pev.slot_widths_h.end());
}

// Gershgorin-style bound on the largest eigenvalue of the Laplacian.
double laplacian_bound(const StrategyGraph& g) {
    return 2.0 * static_cast<double>(g.max_degree());
}

double barrier_slope(double v, const BoundInterval& b) {
    return 1.0 / (v - b.lower) + 1.0 / (b.upper - v);
}

Vector spreads_of(const Matrix& outputs) {
    Vector out;
    out.reserve(outputs.size());
    for (const auto& row : outputs) out.push_back(consensus_spread(row));
    return out;
}

double max_of(const Vector& v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, e);
    return m;
}

std::vector<ReactiveEnvelope> envelopes_of(const Scenario& s, const FleetState& state) {
    std::vector<ReactiveEnvelope> env;
    env.reserve(s.fleet.size());
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        env.push_back(reactive_envelope(s.fleet[i], state.x[i]));
    }
    return env;
}

bool active_row_feasible(const PevSpec& pev, std::span<const double> row, std::size_t& bad_slot) {
    for (std::size_t k = 0; k < row.size(); ++k) {
        try {
            if (!active_bounds(pev, k, row).contains_with_margin(row[k], kStepMargin)) {
                bad_slot = k;
                return false;
            }
        } catch (const CollapsedInterval&) {
            bad_slot = k;
            return false;
        }
    }
    return true;
}

bool reactive_row_feasible(const ReactiveEnvelope& env, std::span<const double> row,
                           std::size_t& bad_slot) {
    const std::size_t K = env.per_slot_limit.size();
    for (std::size_t k = 0; k < K; ++k) {
        const double q = env.per_slot_limit[k];
        const BoundInterval b{-q, q};
        if (!b.contains_with_margin(row[k], kStepMargin)) {
            bad_slot = k;
            return false;
        }
    }
    const BoundInterval sb{-env.total_capacity, env.total_capacity};
    if (!sb.contains_with_margin(row[K], kStepMargin)) {
        bad_slot = K;
        return false;
    }
    return true;
}

// Largest h / 2^m (m <= 20) for which `feasible` accepts row + h*u.
template <class Feasible>
Vector halving_step(std::span<const double> row, const Vector& u, double h, std::size_t pev,
                    const char* phase, Feasible&& feasible) {
    Vector candidate(row.size());
    std::size_t bad_slot = 0;
    double step = h;
    for (int m = 0; m <= kMaxHalvings; ++m) {
        for (std::size_t k = 0; k < row.size(); ++k) candidate[k] = row[k] + step * u[k];
        if (feasible(std::span<const double>(candidate), bad_slot)) return candidate;
        step *= 0.5;
    }
    throw StepCollapse(pev, bad_slot,
                       std::string(phase) + " step collapsed for PEV " + std::to_string(pev) +
                           " at slot " + std::to_string(bad_slot));
}

FleetState advance_active(const Scenario& s, const FleetState& state, const Matrix& outputs,
                          const StrategyGraph& g, double h) {
    FleetState next = state;
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        const Vector u = consensus_velocity(outputs[i], g);
        next.x[i] = halving_step(state.x[i], u, h, i, "active",
                                 [&](std::span<const double> row, std::size_t& bad) {
                                     return active_row_feasible(s.fleet[i], row, bad);
                                 });
    }
    return next;
}

Vector reactive_row(const FleetState& state, std::size_t i) {
    Vector row = state.y[i];
    row.push_back(state.slack[i]);
    return row;
}

FleetState advance_reactive(const Scenario& s, const FleetState& state, const Matrix& outputs,
                            const std::vector<ReactiveEnvelope>& env, const StrategyGraph& g,
                            double h) {
    FleetState next = state;
    const std::size_t K = s.slots();
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        const Vector u = consensus_velocity(outputs[i], g);
        const Vector row = reactive_row(state, i);
        Vector moved = halving_step(row, u, h, i, "reactive",
                                    [&](std::span<const double> r, std::size_t& bad) {
                                        return reactive_row_feasible(env[i], r, bad);
                                    });
        next.slack[i] = moved[K];
        moved.pop_back();
        next.y[i] = std::move(moved);
    }
    return next;
}

Matrix reactive_outputs_with(const Scenario& s, const FleetState& state, double epsilon,
                             const std::vector<ReactiveEnvelope>& env) {
    const auto loads = aggregate_loads(s.grid, s.fleet, state);
    const std::size_t K = s.slots();
    const double mu = s.mean_commitment;
    const double eta = s.params.eta;
    Matrix out(s.fleet.size(), Vector(K + 1, 0.0));
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            out[i][k] = reactive_consensus_output(k, state.y[i][k], reactive_bounds(env[i], k), loads,
                                                  mu, eta, epsilon);
        }
        out[i][K] = modified_slack_output(state.slack[i], slack_bounds(env[i]), epsilon);
    }
    return out;
}

// Auto step: the smaller of a stability bound and the step that moves no
// strategy by more than 1% of its interval width on the first iteration.
double auto_step(double jacobian_bound, const StrategyGraph& g, double first_step_cap) {
    double h = 1.0 / (laplacian_bound(g) * jacobian_bound);
    if (first_step_cap > 0.0) h = std::min(h, first_step_cap);
    return h;
}

double resolve_tolerance(const SimParams& p, const Vector& initial_spread) {
    if (p.tolerance) return *p.tolerance;
    return kDefaultToleranceFactor * max_of(initial_spread);
}

// Bound on the row sums of the payoff Jacobian with respect to one PEV's strategies,
// counting the coupling to every PEV through the aggregate load.
double grid_coupling(const Scenario& s) {
    const double mu = s.mean_commitment;
    const double eta = s.params.eta;
    double inv_width_sum = 0.0;
    for (const auto& pev : s.fleet) inv_width_sum += 1.0 / min_slot_width(pev);
    return mu * (eta + 4.0 * (1.0 - eta)) * inv_width_sum;
}

struct PhaseMachinery {
    std::function<Matrix(const FleetState&)> outputs;
    std::function<FleetState(const FleetState&, const Matrix&, double)> advance;
    std::function<Vector(const FleetState&)> drift;
};

TraceSample make_sample(const Scenario& s, const FleetState& state, std::size_t step,
                        const Vector& spread) {
    const auto report = conservation_check(state, s);
    return {step, spread, report.active_drift, report.reactive_drift, count_bound_violations(s, state)};
}

PhaseResult run_phase(const Scenario& s, const FleetState& start, PhaseSettings settings,
                      const PhaseMachinery& m, const PhaseObserver& observer) {
    PhaseResult result;
    result.settings = settings;
    FleetState state = start;
    const std::size_t stride = s.params.record_stride;

    std::size_t step = 0;
    std::size_t last_recorded = std::numeric_limits<std::size_t>::max();
    Vector spread;
    for (;;) {
        const Matrix outputs = m.outputs(state);
        spread = spreads_of(outputs);
        if (step % stride == 0) {
            result.trace.push_back(make_sample(s, state, step, spread));
            last_recorded = step;
            if (observer) observer(result.trace.back());
        }
        const bool done = std::all_of(spread.begin(), spread.end(),
                                      [&](double v) { return v <= settings.tolerance; });
        if (done) {
            result.converged = true;
            break;
        }
        if (step >= s.params.max_steps) break;
        state = m.advance(state, outputs, settings.step_size);
        ++step;
    }
    if (last_recorded != step) {
        result.trace.push_back(make_sample(s, state, step, spread));
        if (observer) observer(result.trace.back());
    }
    result.steps_taken = step;
    result.final_spread = spread;
    result.conservation_drift = m.drift(state);
    result.final_state = std::move(state);
    return result;
}

}  // namespace

Vector consensus_velocity(std::span<const double> outputs, const StrategyGraph& g) {
    if (outputs.size() != g.n_nodes) {
        throw ShapeError("consensus_velocity: " + std::to_string(outputs.size()) +
                         " outputs for a graph of " + std::to_string(g.n_nodes) + " nodes");
    }
    Vector u(g.n_nodes, 0.0);
    for (std::size_t k = 0; k < g.n_nodes; ++k) {
        for (std::size_t j = 0; j < g.n_nodes; ++j) {
            if (g.adjacency[k][j] != 0) u[k] += outputs[j] - outputs[k];
        }
    }
    return u;
}

Matrix active_outputs(const Scenario& s, const FleetState& state, double epsilon) {
    const auto loads = aggregate_loads(s.grid, s.fleet, state);
    const std::size_t K = s.slots();
    Matrix out(s.fleet.size(), Vector(K, 0.0));
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            const auto b = active_bounds(s.fleet[i], k, state.x[i]);
            out[i][k] = active_consensus_output(s.fleet[i], k, state.x[i][k], b, loads,
                                                s.mean_commitment, s.params.eta, epsilon);
        }
    }
    return out;
}

Matrix reactive_outputs(const Scenario& s, const FleetState& state, double epsilon) {
    return reactive_outputs_with(s, state, epsilon, envelopes_of(s, state));
}

double default_active_epsilon(const Scenario& s, const FleetState& state) {
    const auto loads = aggregate_loads(s.grid, s.fleet, state);
    double largest = 0.0;
    double charger = 0.0;
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        charger = std::max(charger, s.fleet[i].charger_power_w);
        for (std::size_t k = 0; k < s.slots(); ++k) {
            largest = std::max(largest, std::abs(active_payoff(s.fleet[i], k, state.x[i][k], loads,
                                                               s.mean_commitment, s.params.eta)));
        }
    }
    const double eps = std::max(1e-2 * largest, 1e-6 * charger);
    return eps > 0.0 ? eps : 1e-6;
}

double default_reactive_epsilon(const Scenario& s, const FleetState& state) {
    const auto loads = aggregate_loads(s.grid, s.fleet, state);
    double largest = 0.0;
    double charger = 0.0;
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        charger = std::max(charger, s.fleet[i].charger_power_w);
        for (std::size_t k = 0; k < s.slots(); ++k) {
            largest = std::max(largest, std::abs(reactive_payoff(k, state.y[i][k], loads,
                                                                 s.mean_commitment, s.params.eta)));
        }
    }
    const double eps = std::max(1e-2 * largest, 1e-6 * charger);
    return eps > 0.0 ? eps : 1e-6;
}

PhaseSettings resolve_active_settings(const Scenario& s, const FleetState& state) {
    PhaseSettings out;
    out.epsilon = s.params.epsilon ? *s.params.epsilon : default_active_epsilon(s, state);
    const Matrix outputs = active_outputs(s, state, out.epsilon);
    out.tolerance = resolve_tolerance(s.params, spreads_of(outputs));
    if (s.params.step_size) {
        out.step_size = *s.params.step_size;
        return out;
    }

    const auto g = make_graph(s.params.topology, s.slots());
    const double mu = s.mean_commitment;
    double own = 0.0;
    double curvature = 0.0;
    double cap = std::numeric_limits<double>::infinity();
    bool moving = false;
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        const auto& pev = s.fleet[i];
        own = std::max(own, (1.0 - mu) / min_slot_width(pev));
        const Vector u = consensus_velocity(outputs[i], g);
        for (std::size_t k = 0; k < s.slots(); ++k) {
            const auto b = active_bounds(pev, k, state.x[i]);
            curvature = std::max(curvature, out.epsilon * barrier_slope(state.x[i][k], b));
            if (u[k] != 0.0) {
                moving = true;
                cap = std::min(cap, kFirstStepFraction * b.width() / std::abs(u[k]));
            }
        }
    }
    const double jacobian = std::max(own + grid_coupling(s) + curvature,
                                     std::numeric_limits<double>::min());
    out.step_size = auto_step(jacobian, g, moving ? cap : 0.0);
    return out;
}

PhaseSettings resolve_reactive_settings(const Scenario& s, const FleetState& state) {
    PhaseSettings out;
    out.epsilon = s.params.epsilon ? *s.params.epsilon : default_reactive_epsilon(s, state);
    const auto env = envelopes_of(s, state);
    const Matrix outputs = reactive_outputs_with(s, state, out.epsilon, env);
    out.tolerance = resolve_tolerance(s.params, spreads_of(outputs));
    if (s.params.step_size) {
        out.step_size = *s.params.step_size;
        return out;
    }

    const std::size_t K = s.slots();
    const auto g = make_graph(s.params.topology, K + 1);
    double curvature = 0.0;
    double cap = std::numeric_limits<double>::infinity();
    bool moving = false;
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        const Vector u = consensus_velocity(outputs[i], g);
        const Vector row = reactive_row(state, i);
        for (std::size_t k = 0; k <= K; ++k) {
            const auto b = k < K ? reactive_bounds(env[i], k) : slack_bounds(env[i]);
            curvature = std::max(curvature, out.epsilon * barrier_slope(row[k], b));
            if (u[k] != 0.0) {
                moving = true;
                cap = std::min(cap, kFirstStepFraction * b.width() / std::abs(u[k]));
            }
        }
    }
    // Reactive payoffs carry no slot width; the coupling bound uses unit widths.
    const double mu = s.mean_commitment;
    const double coupling = mu * (s.params.eta + 4.0 * (1.0 - s.params.eta)) *
                            static_cast<double>(s.fleet.size());
    const double jacobian = std::max((1.0 - mu) + coupling + curvature,
                                     std::numeric_limits<double>::min());
    out.step_size = auto_step(jacobian, g, moving ? cap : 0.0);
    return out;
}

FleetState step_active(const Scenario& s, const FleetState& state, double h, double epsilon) {
    const auto g = make_graph(s.params.topology, s.slots());
    return advance_active(s, state, active_outputs(s, state, epsilon), g, h);
}

FleetState step_active(const Scenario& s, const FleetState& state, double h) {
    const double eps = s.params.epsilon ? *s.params.epsilon : default_active_epsilon(s, state);
    return step_active(s, state, h, eps);
}

FleetState step_reactive(const Scenario& s, const FleetState& state, double h, double epsilon) {
    const auto g = make_graph(s.params.topology, s.slots() + 1);
    const auto env = envelopes_of(s, state);
    return advance_reactive(s, state, reactive_outputs_with(s, state, epsilon, env), env, g, h);
}

PhaseResult run_active_phase(const Scenario& s, const FleetState& state, const PhaseObserver& observer) {
    const auto settings = resolve_active_settings(s, state);
    const auto g = make_graph(s.params.topology, s.slots());
    PhaseMachinery m;
    m.outputs = [&](const FleetState& st) { return active_outputs(s, st, settings.epsilon); };
    m.advance = [&](const FleetState& st, const Matrix& out, double h) {
        return advance_active(s, st, out, g, h);
    };
    m.drift = [&](const FleetState& st) { return conservation_check(st, s).active_drift; };
    return run_phase(s, state, settings, m, observer);
}

PhaseResult run_reactive_phase(const Scenario& s, const FleetState& state,
                               const PhaseObserver& observer) {
    const auto settings = resolve_reactive_settings(s, state);
    const auto g = make_graph(s.params.topology, s.slots() + 1);
    const auto env = envelopes_of(s, state);  // x is frozen for the whole phase
    PhaseMachinery m;
    m.outputs = [&](const FleetState& st) {
        return reactive_outputs_with(s, st, settings.epsilon, env);
    };
    m.advance = [&](const FleetState& st, const Matrix& out, double h) {
        return advance_reactive(s, st, out, env, g, h);
    };
    m.drift = [&](const FleetState& st) { return conservation_check(st, s).reactive_drift; };
    return run_phase(s, state, settings, m, observer);
}

ConservationReport conservation_check(const FleetState& state, const Scenario& s) {
    ConservationReport r;
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        const double sx = std::accumulate(state.x[i].begin(), state.x[i].end(), 0.0);
        const double sy = std::accumulate(state.y[i].begin(), state.y[i].end(), 0.0);
        r.active_drift.push_back(std::abs(sx - s.fleet[i].demand_wh()));
        r.reactive_drift.push_back(std::abs(sy + state.slack[i]));
    }
    return r;
}

std::size_t count_bound_violations(const Scenario& s, const FleetState& state) {
    const std::size_t K = s.slots();
    std::size_t bad = 0;
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        const auto& pev = s.fleet[i];
        for (std::size_t k = 0; k < K; ++k) {
            try {
                if (!active_bounds(pev, k, state.x[i]).contains(state.x[i][k])) ++bad;
            } catch (const CollapsedInterval&) {
                ++bad;
            }
        }
        ReactiveEnvelope env;
        try {
            env = reactive_envelope(pev, state.x[i]);
        } catch (const DomainError&) {
            bad += K + 1;
            continue;
        }
        for (std::size_t k = 0; k < K; ++k) {
            const double q = env.per_slot_limit[k];
            if (!(state.y[i][k] > -q && state.y[i][k] < q)) ++bad;
        }
        const double Q = env.total_capacity;
        if (!(state.slack[i] > -Q && state.slack[i] < Q)) ++bad;
    }
    return bad;
}

}  // namespace dra
