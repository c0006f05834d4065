#include "dra/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dra/constraints.hpp"
#include "dra/dynamics.hpp"
#include "dra/errors.hpp"
#include "dra/graph.hpp"
#include "dra/metrics.hpp"
#include "dra/payoff.hpp"

namespace dra {

namespace {

constexpr int kBisectionDepth = 80;
constexpr int kMaxSweeps = 20000;
constexpr int kMaxBracketExpansions = 200;
constexpr int kMonotoneSamples = 257;

struct SinglePevProblem {
    PevSpec pev;
    GridProfile grid;  // baseline with the other PEVs folded in
    double mu = 0.0;
    double eta = 0.0;
    double epsilon = 0.0;

    std::size_t slots() const { return pev.slots(); }

    AggregateLoads loads(std::span<const double> x) const {
        AggregateLoads out{grid.active_base_w, grid.reactive_base_var};
        for (std::size_t k = 0; k < x.size(); ++k) out.active_w[k] += x[k] / pev.slot_widths_h[k];
        return out;
    }

    double output(std::span<const double> x, std::size_t k) const {
        const auto b = active_bounds(pev, k, x);
        return active_consensus_output(pev, k, x[k], b, loads(x), mu, eta, epsilon);
    }
};

// Root of output_k(v) = lambda over the open interval of slot k, others held.
double solve_slot(const SinglePevProblem& p, Vector& x, std::size_t k, double lambda) {
    const auto b = active_bounds(p.pev, k, x);
    double lo = b.lower;
    double hi = b.upper;
    for (int it = 0; it < kBisectionDepth; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (mid <= lo || mid >= hi) break;
        x[k] = mid;
        if (p.output(x, k) < lambda) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    x[k] = lo + 0.5 * (hi - lo);
    return x[k];
}

// Gauss-Seidel sweeps until no slot moves; `x` is the warm start and the result.
void solve_for_lambda(const SinglePevProblem& p, Vector& x, double lambda) {
    const std::size_t K = p.slots();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double moved = 0.0;
        double scale = 1.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double before = x[k];
            const double after = solve_slot(p, x, k, lambda);
            moved = std::max(moved, std::abs(after - before));
            scale = std::max(scale, std::abs(after));
        }
        if (moved <= 4.0 * std::numeric_limits<double>::epsilon() * scale) return;
    }
}

double total(const Vector& x) { return std::accumulate(x.begin(), x.end(), 0.0); }

// Counts crossings of `lambda` by output_k on a uniform sample of slot k's interval.
int count_crossings(const SinglePevProblem& p, Vector x, std::size_t k, double lambda) {
    const auto b = active_bounds(p.pev, k, x);
    int crossings = 0;
    bool have_prev = false;
    bool prev_above = false;
    for (int n = 1; n < kMonotoneSamples; ++n) {
        x[k] = b.lower + b.width() * static_cast<double>(n) / kMonotoneSamples;
        const bool above = p.output(x, k) > lambda;
        if (have_prev && above != prev_above) ++crossings;
        prev_above = above;
        have_prev = true;
    }
    return crossings;
}

}  // namespace

EquilibriumSolution solve_single_pev(const PevSpec& pev, const GridProfile& grid,
                                     const SimParams& params, std::span<const double> others_fixed_w,
                                     std::optional<double> mean_mu) {
    const std::size_t K = pev.slots();
    if (grid.slots() != K || others_fixed_w.size() != K) {
        throw ShapeError("solve_single_pev: grid, PEV and fixed contribution disagree in length");
    }

    SinglePevProblem p;
    p.pev = pev;
    p.grid = grid;
    for (std::size_t k = 0; k < K; ++k) p.grid.active_base_w[k] += others_fixed_w[k];
    p.mu = mean_mu.value_or(pev.commitment);
    p.eta = params.eta;

    Scenario single;
    single.grid = p.grid;
    single.fleet = {pev};
    single.params = params;
    single.mean_commitment = p.mu;
    Vector x = init_fleet_state(single).x[0];
    p.epsilon = params.epsilon ? *params.epsilon : default_active_epsilon(single, init_fleet_state(single));

    const double demand = pev.demand_wh();

    // Bracket lambda around the mean initial output.
    double centre = 0.0;
    for (std::size_t k = 0; k < K; ++k) centre += p.output(x, k);
    centre /= static_cast<double>(K);
    double span = 1.0;
    for (std::size_t k = 0; k < K; ++k) span = std::max(span, std::abs(p.output(x, k) - centre));

    Vector x_lo = x;
    Vector x_hi = x;
    double lam_lo = centre - span;
    double lam_hi = centre + span;
    bool bracketed = false;
    for (int e = 0; e < kMaxBracketExpansions; ++e) {
        solve_for_lambda(p, x_lo, lam_lo);
        solve_for_lambda(p, x_hi, lam_hi);
        const bool lo_ok = total(x_lo) <= demand;
        const bool hi_ok = total(x_hi) >= demand;
        if (lo_ok && hi_ok) {
            bracketed = true;
            break;
        }
        if (!lo_ok) lam_lo -= span;
        if (!hi_ok) lam_hi += span;
        span *= 2.0;
    }
    if (!bracketed) throw NoRoot("solve_single_pev: could not bracket the consensus value");

    Vector x_mid = x_lo;
    double lam_mid = lam_lo;
    for (int it = 0; it < kBisectionDepth; ++it) {
        lam_mid = lam_lo + 0.5 * (lam_hi - lam_lo);
        if (lam_mid <= lam_lo || lam_mid >= lam_hi) break;
        solve_for_lambda(p, x_mid, lam_mid);
        if (total(x_mid) < demand) {
            lam_lo = lam_mid;
        } else {
            lam_hi = lam_mid;
        }
    }
    lam_mid = lam_lo + 0.5 * (lam_hi - lam_lo);
    solve_for_lambda(p, x_mid, lam_mid);

    EquilibriumSolution sol;
    sol.x_star = x_mid;
    sol.consensus_value = lam_mid;
    for (std::size_t k = 0; k < K; ++k) {
        sol.residual = std::max(sol.residual, std::abs(p.output(x_mid, k) - lam_mid));
        if (count_crossings(p, x_mid, k, lam_mid) > 1) {
            throw MultiRoot("solve_single_pev: slot " + std::to_string(k) +
                            " output crosses the consensus value more than once");
        }
    }
    return sol;
}

FleetState reference_integrate(const Scenario& s, const FleetState& state, double h_fine) {
    if (!(h_fine > 0.0)) throw RangeError("reference_integrate: step must be positive");
    const PhaseSettings settings = resolve_active_settings(s, state);
    const auto g = make_graph(s.params.topology, s.slots());
    FleetState cur = state;
    for (std::size_t step = 0;; ++step) {
        const Matrix outputs = active_outputs(s, cur, settings.epsilon);
        bool done = true;
        for (const auto& row : outputs) done = done && consensus_spread(row) <= settings.tolerance;
        if (done || step >= s.params.max_steps) return cur;
        for (std::size_t i = 0; i < s.fleet.size(); ++i) {
            const Vector u = consensus_velocity(outputs[i], g);
            for (std::size_t k = 0; k < u.size(); ++k) cur.x[i][k] += h_fine * u[k];
            for (std::size_t k = 0; k < u.size(); ++k) {
                bool inside = false;
                try {
                    inside = active_bounds(s.fleet[i], k, cur.x[i]).contains(cur.x[i][k]);
                } catch (const CollapsedInterval&) {
                }
                if (!inside) {
                    throw StepCollapse(i, k, "reference_integrate: step left the feasible box at PEV " +
                                                 std::to_string(i) + ", slot " + std::to_string(k));
                }
            }
        }
    }
}

}  // namespace dra
