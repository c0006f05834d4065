#include "dra/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "dra/errors.hpp"

namespace dra {

using nlohmann::json;

namespace {

std::string line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& field, const std::string& what) const {
        throw ParseError(source_ + ": field '" + field + "': " + what);
    }

    const json& member(const json& obj, const std::string& key, const std::string& path) const {
        auto it = obj.find(key);
        if (it == obj.end()) fail(path + key, "missing");
        return *it;
    }

    double number(const json& v, const std::string& field) const {
        if (!v.is_number()) fail(field, "expected a number");
        return v.get<double>();
    }

    std::size_t count(const json& v, const std::string& field) const {
        if (!v.is_number_integer() || v.get<long long>() < 0) fail(field, "expected a non-negative integer");
        return v.get<std::size_t>();
    }

    Vector numbers(const json& v, const std::string& field) const {
        if (!v.is_array()) fail(field, "expected an array of numbers");
        Vector out;
        for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], field + "[" + std::to_string(k) + "]"));
        return out;
    }

    // Scalar repeated K times, or an explicit array (length checked by validation).
    Vector per_slot(const json& v, std::size_t K, const std::string& field) const {
        if (v.is_number()) return Vector(K, v.get<double>());
        return numbers(v, field);
    }

    void only_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& path) const {
        if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            const bool known = std::any_of(keys.begin(), keys.end(),
                                           [&](const char* k) { return it.key() == k; });
            if (!known) fail(path + it.key(), "unknown key");
        }
    }

private:
    std::string source_;
};

GridProfile read_baseline(const Reader& rd, const json& b) {
    rd.only_keys(b, {"kind", "slots", "level_w", "step_w", "step_first_slot", "step_last_slot",
                     "slope_w", "reactive_var"},
                 "baseline.");
    const json& kind = rd.member(b, "kind", "baseline.");
    if (!kind.is_string()) rd.fail("baseline.kind", "expected a string");
    const std::size_t K = rd.count(rd.member(b, "slots", "baseline."), "baseline.slots");
    const double level = rd.number(rd.member(b, "level_w", "baseline."), "baseline.level_w");
    const double reactive = b.contains("reactive_var") ? rd.number(b["reactive_var"], "baseline.reactive_var") : 0.0;

    if (kind == "step") {
        StepBaseline sb;
        sb.slots = K;
        sb.level_w = level;
        sb.step_w = rd.number(rd.member(b, "step_w", "baseline."), "baseline.step_w");
        sb.step_first_slot = rd.count(rd.member(b, "step_first_slot", "baseline."), "baseline.step_first_slot");
        sb.step_last_slot = rd.count(rd.member(b, "step_last_slot", "baseline."), "baseline.step_last_slot");
        sb.reactive_var = reactive;
        if (sb.step_first_slot < 1 || sb.step_last_slot > K || sb.step_first_slot > sb.step_last_slot) {
            rd.fail("baseline.step_first_slot", "step slots must satisfy 1 <= first <= last <= slots");
        }
        return step_baseline(sb);
    }
    if (kind == "ramp") {
        const double slope = rd.number(rd.member(b, "slope_w", "baseline."), "baseline.slope_w");
        GridProfile g;
        for (std::size_t k = 0; k < K; ++k) g.active_base_w.push_back(level + slope * static_cast<double>(k));
        g.reactive_base_var.assign(K, reactive);
        return g;
    }
    rd.fail("baseline.kind", "unknown baseline kind (expected step or ramp)");
}

PevSpec read_pev(const Reader& rd, const json& p, std::size_t K, const std::string& path) {
    rd.only_keys(p, {"soc_init_wh", "soc_target_wh", "soc_upper_wh", "soc_lower_wh", "charger_power_w",
                     "slot_widths_h", "commitment", "preferred_rates_wh", "count"},
                 path);
    PevSpec pev;
    pev.soc_init_wh = rd.number(rd.member(p, "soc_init_wh", path), path + "soc_init_wh");
    pev.soc_target_wh = rd.number(rd.member(p, "soc_target_wh", path), path + "soc_target_wh");
    pev.soc_upper_wh = rd.number(rd.member(p, "soc_upper_wh", path), path + "soc_upper_wh");
    pev.soc_lower_wh = rd.number(rd.member(p, "soc_lower_wh", path), path + "soc_lower_wh");
    pev.charger_power_w = rd.number(rd.member(p, "charger_power_w", path), path + "charger_power_w");
    pev.slot_widths_h = rd.per_slot(rd.member(p, "slot_widths_h", path), K, path + "slot_widths_h");
    pev.commitment = rd.number(rd.member(p, "commitment", path), path + "commitment");
    pev.preferred_rates_wh =
        rd.per_slot(rd.member(p, "preferred_rates_wh", path), K, path + "preferred_rates_wh");
    return pev;
}

SimParams read_params(const Reader& rd, const json& p) {
    rd.only_keys(p, {"eta", "min_commitment", "epsilon", "step_size", "tolerance", "max_steps",
                     "record_stride", "graph"},
                 "params.");
    SimParams out;
    if (p.contains("eta")) out.eta = rd.number(p["eta"], "params.eta");
    if (p.contains("min_commitment")) out.min_commitment = rd.number(p["min_commitment"], "params.min_commitment");
    if (p.contains("epsilon")) out.epsilon = rd.number(p["epsilon"], "params.epsilon");
    if (p.contains("step_size")) out.step_size = rd.number(p["step_size"], "params.step_size");
    if (p.contains("tolerance")) out.tolerance = rd.number(p["tolerance"], "params.tolerance");
    if (p.contains("max_steps")) out.max_steps = rd.count(p["max_steps"], "params.max_steps");
    if (p.contains("record_stride")) out.record_stride = rd.count(p["record_stride"], "params.record_stride");
    if (p.contains("graph")) {
        if (!p["graph"].is_string()) rd.fail("params.graph", "expected a string");
        try {
            out.topology = topology_from_string(p["graph"].get<std::string>());
        } catch (const RangeError& e) {
            rd.fail("params.graph", e.what());
        }
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

json vector_json(const Vector& v) {
    json a = json::array();
    for (double e : v) a.push_back(e);
    return a;
}

json phase_json(const PhaseResult& p) {
    std::size_t violations = 0;
    for (const auto& t : p.trace) violations = std::max(violations, t.bound_violations);
    return {
        {"converged", p.converged},
        {"steps_taken", p.steps_taken},
        {"epsilon", p.settings.epsilon},
        {"step_size", p.settings.step_size},
        {"tolerance", p.settings.tolerance},
        {"final_spread", vector_json(p.final_spread)},
        {"conservation_drift", vector_json(p.conservation_drift)},
        {"max_bound_violations", violations},
        {"recorded_samples", p.trace.size()},
    };
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(source + ": " + line_col(text, e.byte) + ": invalid JSON");
    }
    const Reader rd(source);
    rd.only_keys(doc, {"name", "grid", "baseline", "pevs", "params"}, "");

    Scenario s;
    if (doc.contains("name")) {
        if (!doc["name"].is_string()) rd.fail("name", "expected a string");
        s.name = doc["name"].get<std::string>();
    }
    if (doc.contains("grid") == doc.contains("baseline")) {
        rd.fail("grid", "exactly one of 'grid' or 'baseline' is required");
    }
    if (doc.contains("grid")) {
        const json& g = doc["grid"];
        rd.only_keys(g, {"active_w", "reactive_var"}, "grid.");
        s.grid.active_base_w = rd.numbers(rd.member(g, "active_w", "grid."), "grid.active_w");
        s.grid.reactive_base_var =
            g.contains("reactive_var")
                ? rd.per_slot(g["reactive_var"], s.grid.active_base_w.size(), "grid.reactive_var")
                : Vector(s.grid.active_base_w.size(), 0.0);
    } else {
        s.grid = read_baseline(rd, doc["baseline"]);
    }

    const std::size_t K = s.grid.slots();
    const json& pevs = rd.member(doc, "pevs", "");
    if (!pevs.is_array()) rd.fail("pevs", "expected an array");
    for (std::size_t i = 0; i < pevs.size(); ++i) {
        const std::string path = "pevs[" + std::to_string(i) + "].";
        const PevSpec pev = read_pev(rd, pevs[i], K, path);
        const std::size_t copies = pevs[i].contains("count") ? rd.count(pevs[i]["count"], path + "count") : 1;
        for (std::size_t c = 0; c < copies; ++c) s.fleet.push_back(pev);
    }
    if (doc.contains("params")) s.params = read_params(rd, doc["params"]);
    return validate_scenario(std::move(s));
}

Scenario load_scenario(const std::filesystem::path& path) {
    return parse_scenario(read_file(path), path.string());
}

std::string serialize_scenario(const Scenario& s) {
    json doc;
    doc["name"] = s.name;
    doc["grid"] = {{"active_w", vector_json(s.grid.active_base_w)},
                   {"reactive_var", vector_json(s.grid.reactive_base_var)}};
    json pevs = json::array();
    for (const auto& p : s.fleet) {
        pevs.push_back({{"soc_init_wh", p.soc_init_wh},
                        {"soc_target_wh", p.soc_target_wh},
                        {"soc_upper_wh", p.soc_upper_wh},
                        {"soc_lower_wh", p.soc_lower_wh},
                        {"charger_power_w", p.charger_power_w},
                        {"slot_widths_h", vector_json(p.slot_widths_h)},
                        {"commitment", p.commitment},
                        {"preferred_rates_wh", vector_json(p.preferred_rates_wh)}});
    }
    doc["pevs"] = pevs;
    json params = {{"eta", s.params.eta},
                   {"min_commitment", s.params.min_commitment},
                   {"max_steps", s.params.max_steps},
                   {"record_stride", s.params.record_stride},
                   {"graph", to_string(s.params.topology)}};
    if (s.params.epsilon) params["epsilon"] = *s.params.epsilon;
    if (s.params.step_size) params["step_size"] = *s.params.step_size;
    if (s.params.tolerance) params["tolerance"] = *s.params.tolerance;
    doc["params"] = params;
    return doc.dump(2) + "\n";
}

GridProfile step_baseline(const StepBaseline& b) {
    GridProfile g;
    for (std::size_t k = 1; k <= b.slots; ++k) {
        const bool in_step = k >= b.step_first_slot && k <= b.step_last_slot;
        g.active_base_w.push_back(b.level_w + (in_step ? b.step_w : 0.0));
    }
    g.reactive_base_var.assign(b.slots, b.reactive_var);
    return g;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::string strategies_csv(const Scenario& s, const RunReport& r) {
    const FleetState& st = r.reactive.final_state;
    std::string out = "pev,slot,x_Wh,y_VAr\n";
    for (std::size_t i = 0; i < s.fleet.size(); ++i) {
        for (std::size_t k = 0; k < s.slots(); ++k) {
            out += std::to_string(i + 1) + "," + std::to_string(k + 1) + "," + format_number(st.x[i][k]) +
                   "," + format_number(st.y[i][k]) + "\n";
        }
    }
    return out;
}

std::string soc_csv(const RunReport& r) {
    std::string out = "pev";
    const std::size_t cols = r.soc_trajectories.empty() ? r.final_loads.active_w.size() + 1
                                                        : r.soc_trajectories.front().size();
    for (std::size_t k = 0; k < cols; ++k) out += ",soc_" + std::to_string(k) + "_Wh";
    out += "\n";
    for (std::size_t i = 0; i < r.soc_trajectories.size(); ++i) {
        out += std::to_string(i + 1);
        for (double v : r.soc_trajectories[i]) out += "," + format_number(v);
        out += "\n";
    }
    return out;
}

std::string loads_csv(const RunReport& r) {
    std::string out = "slot,baseline_W,with_dra_W,baseline_VAr,with_dra_VAr\n";
    for (std::size_t k = 0; k < r.final_loads.active_w.size(); ++k) {
        out += std::to_string(k + 1) + "," + format_number(r.baseline_loads.active_w[k]) + "," +
               format_number(r.final_loads.active_w[k]) + "," +
               format_number(r.baseline_loads.reactive_var[k]) + "," +
               format_number(r.final_loads.reactive_var[k]) + "\n";
    }
    return out;
}

std::string report_json(const Scenario& s, const RunReport& r) {
    json final_soc = json::array();
    for (const auto& traj : r.soc_trajectories) final_soc.push_back(traj.back());
    json doc = {
        {"scenario", s.name},
        {"pevs", s.fleet.size()},
        {"slots", s.slots()},
        {"mean_commitment", s.mean_commitment},
        {"eta", s.params.eta},
        {"graph", to_string(s.params.topology)},
        {"converged", r.converged()},
        {"smoothness_with", r.smoothness_with},
        {"smoothness_without", r.smoothness_without},
        {"smoothness_improvement", r.smoothness_improvement()},
        {"variance_with", r.variance_with},
        {"variance_without", r.variance_without},
        {"final_soc_wh", final_soc},
        {"slack_var", vector_json(r.reactive.final_state.slack)},
        {"active_phase", phase_json(r.active)},
        {"reactive_phase", phase_json(r.reactive)},
    };
    return doc.dump(2) + "\n";
}

void write_run_outputs(const Scenario& s, const RunReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "strategies.csv", strategies_csv(s, r));
    write_file(dir / "soc.csv", soc_csv(r));
    write_file(dir / "loads.csv", loads_csv(r));
    write_file(dir / "report.json", report_json(s, r));
}

SweepGrid run_sweep(const Scenario& base, const Vector& mu_values, const Vector& eta_values,
                    unsigned threads) {
    SweepGrid grid;
    grid.mu_values = mu_values;
    grid.eta_values = eta_values;
    std::sort(grid.mu_values.begin(), grid.mu_values.end());
    std::sort(grid.eta_values.begin(), grid.eta_values.end());
    const std::size_t rows = grid.mu_values.size();
    const std::size_t cols = grid.eta_values.size();
    grid.results.assign(rows, std::vector<SweepCell>(cols));

    auto run_cell = [&](std::size_t idx) {
        SweepCell& cell = grid.results[idx / cols][idx % cols];
        cell.mu = grid.mu_values[idx / cols];
        cell.eta = grid.eta_values[idx % cols];
        try {
            Scenario s = base;
            for (auto& pev : s.fleet) pev.commitment = cell.mu;
            s.params.eta = cell.eta;
            s = validate_scenario(std::move(s));
            const RunReport r = run_scenario(s);
            cell.smoothness_with = r.smoothness_with;
            cell.variance_with = r.variance_with;
            cell.converged = r.converged();
            cell.final_x = r.reactive.final_state.x;
        } catch (const std::exception& e) {
            cell.smoothness_with = std::nan("");
            cell.variance_with = std::nan("");
            cell.converged = false;
            cell.error = e.what();
        }
    };

    const std::size_t total = rows * cols;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(total, 1)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t idx = next++; idx < total; idx = next++) run_cell(idx);
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return grid;
}

std::string sweep_csv(const SweepGrid& grid) {
    std::string out = "mu,eta,smoothness_with,variance_with,converged\n";
    for (const auto& row : grid.results) {
        for (const auto& c : row) {
            out += format_number(c.mu) + "," + format_number(c.eta) + "," + format_number(c.smoothness_with) +
                   "," + format_number(c.variance_with) + "," + (c.converged ? "true" : "false") + "\n";
        }
    }
    return out;
}

unsigned sweep_threads_from_env() {
    if (const char* v = std::getenv("DRA_GRID_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(v, &end, 10);
        if (end != v && *end == '\0' && n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int run_command(const std::filesystem::path& scenario, const std::filesystem::path& out_dir,
                std::ostream& out, std::ostream& err, std::optional<Topology> topology) {
    try {
        Scenario s = load_scenario(scenario);
        if (topology) s.params.topology = *topology;
        const RunReport r = run_scenario(s);
        write_run_outputs(s, r, out_dir);
        out << "active phase: " << (r.active.converged ? "converged" : "not converged") << " after "
            << r.active.steps_taken << " steps\n"
            << "reactive phase: " << (r.reactive.converged ? "converged" : "not converged") << " after "
            << r.reactive.steps_taken << " steps\n"
            << "smoothness " << format_number(r.smoothness_without) << " -> "
            << format_number(r.smoothness_with) << ", variance " << format_number(r.variance_without)
            << " -> " << format_number(r.variance_with) << "\n"
            << "results written to " << out_dir.string() << "\n";
        return r.converged() ? 0 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int sweep_command(const std::filesystem::path& scenario, const Vector& mu_values,
                  const Vector& eta_values, const std::filesystem::path& out_dir, std::ostream& out,
                  std::ostream& err, std::optional<Topology> topology) {
    try {
        Scenario s = load_scenario(scenario);
        if (topology) s.params.topology = *topology;
        const SweepGrid grid = run_sweep(s, mu_values, eta_values, sweep_threads_from_env());
        std::filesystem::create_directories(out_dir);
        write_file(out_dir / "sweep.csv", sweep_csv(grid));
        bool all_converged = true;
        for (const auto& row : grid.results) {
            for (const auto& c : row) {
                if (!c.error.empty()) {
                    err << "cell mu=" << format_number(c.mu) << " eta=" << format_number(c.eta)
                        << " failed: " << c.error << "\n";
                }
                all_converged = all_converged && c.converged;
            }
        }
        out << "sweep of " << grid.mu_values.size() * grid.eta_values.size() << " cells written to "
            << (out_dir / "sweep.csv").string() << "\n";
        return all_converged ? 0 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int report_command(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err) {
    try {
        const std::filesystem::path path = run_dir / "report.json";
        const std::string text = read_file(path);
        json doc;
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ": " + line_col(text, e.byte) + ": invalid JSON");
        }
        out << doc.dump(2) << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace dra
