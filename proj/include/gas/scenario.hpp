#ifndef GAS_SCENARIO_HPP
#define GAS_SCENARIO_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gas/analytic.hpp"
#include "gas/controller.hpp"
#include "gas/engine.hpp"
#include "gas/phy.hpp"
#include "gas/strategies.hpp"

namespace gas {

using json = nlohmann::json;

enum class Fidelity { MeanField, Slot };

/// Mid-run strategy replacement (e.g. a station turning selfish at t = 50 s).
struct SwitchEvent {
    std::size_t station = 0;
    double time_s = 0.0;
    StrategySpec strategy;
};

struct Perturbation {
    std::size_t station = 0;
    double start_s = 0.0;
    double duration_s = 0.0;
};

/// Declarative experiment description.
struct ScenarioSpec {
    std::string name;
    int n = 0;
    PhyProfile phy = phy_80211g();
    std::vector<StrategySpec> stations;  ///< length n after expansion
    double duration_s = 0.0;
    Fidelity fidelity = Fidelity::MeanField;
    std::uint64_t seed = 1;
    double gamma_multiplier = 1.0;  ///< gain = multiplier * gamma_max / 2
    std::string tau_init = "tau_opt";  ///< "tau_opt" | "random" (per-station tau0 overrides win)
    std::vector<SwitchEvent> switches;
    std::vector<Perturbation> perturbations;

    void validate() const {
        if (n < 1) throw std::invalid_argument("scenario.n: must be >= 1");
        if (static_cast<int>(stations.size()) != n)
            throw std::invalid_argument("scenario.stations: list length must equal n");
        if (!(duration_s > 0.0)) throw std::invalid_argument("scenario.duration_s: must be > 0");
        if (!(gamma_multiplier > 0.0))
            throw std::invalid_argument("scenario.gamma_multiplier: must be > 0");
        bool any_gas = false;
        for (const auto& s : stations)
            if (s.kind == StrategySpec::Kind::Gas) any_gas = true;
        if (any_gas && n < 2)
            throw std::invalid_argument("scenario.n: n >= 2 required with GAS stations");
        if (!perturbations.empty() && fidelity != Fidelity::Slot)
            throw std::invalid_argument(
                "scenario.perturbations: error bursts require slot fidelity");
        phy.validate();
    }
};

struct StationRow {
    double tau = 0.0;
    double tau_hat = 0.0;
    double cw = 0.0;
    double throughput_bps = 0.0;
};

struct StageRow {
    long stage = 0;
    double time_s = 0.0;  ///< simulated time at the start of the stage
    std::vector<StationRow> stations;
};

struct RunOutput {
    json spec_echo;  ///< metadata block; replaying it reproduces the run
    std::uint64_t seed = 1;
    std::vector<StageRow> series;
    std::vector<double> mean_throughput;    ///< per-station long-run mean [bits/s]
    std::vector<double> stddev_throughput;  ///< across replications (0 for one run)
};

namespace detail {

inline StrategySpec parse_strategy(const json& j, const std::string& path) {
    StrategySpec s;
    const std::string kind = j.value("kind", "gas");
    if (kind == "gas")
        s.kind = StrategySpec::Kind::Gas;
    else if (kind == "static_cw")
        s.kind = StrategySpec::Kind::StaticCW;
    else if (kind == "adaptive1")
        s.kind = StrategySpec::Kind::Adaptive1;
    else if (kind == "adaptive2")
        s.kind = StrategySpec::Kind::Adaptive2;
    else if (kind == "adaptive3")
        s.kind = StrategySpec::Kind::Adaptive3;
    else if (kind == "nonsaturated")
        s.kind = StrategySpec::Kind::NonSaturated;
    else
        throw std::invalid_argument(path + ".kind: unknown strategy '" + kind + "'");

    if (s.kind == StrategySpec::Kind::StaticCW) {
        if (!j.contains("cw_min"))
            throw std::invalid_argument(path + ".cw_min: required for static_cw");
        s.static_params.cw_min = j["cw_min"].get<double>();
        s.static_params.m = j.value("m", 0);
        s.static_params.aifs_slots = j.value("aifs_slots", 0);
        s.static_params.txop_packets = j.value("txop_packets", 1);
        s.static_params.retry_limit = j.value("retry_limit", 7);
    }
    if (s.kind == StrategySpec::Kind::NonSaturated) {
        if (j.contains("offered_rate_bps"))
            s.offered_rate = j["offered_rate_bps"].get<double>();
        else if (j.contains("offered_frac_saturation"))
            s.offered_rate = -j["offered_frac_saturation"].get<double>();  // resolved later
        else
            throw std::invalid_argument(path +
                                        ": nonsaturated needs offered_rate_bps or "
                                        "offered_frac_saturation");
    }
    s.probe_period = j.value("probe_period", 50);
    if (j.contains("tau0")) s.tau0 = j["tau0"].get<double>();
    return s;
}

inline double fmt_time(long stage, double t_beacon) { return stage * t_beacon; }

}  // namespace detail

inline ScenarioSpec parse_scenario(const json& j) {
    ScenarioSpec spec;
    spec.name = j.value("name", "unnamed");
    if (!j.contains("n")) throw std::invalid_argument("scenario.n: required");
    spec.n = j["n"].get<int>();
    if (j.contains("phy")) {
        const json& p = j["phy"];
        if (p.contains("payload_bytes") || p.contains("beacon_s"))
            spec.phy = phy_80211g(p.value("payload_bytes", 1500.0), p.value("beacon_s", 0.1));
        if (p.contains("T_e")) spec.phy.T_e = p["T_e"].get<double>();
        if (p.contains("T_t")) spec.phy.T_t = p["T_t"].get<double>();
        if (p.contains("l")) spec.phy.l = p["l"].get<double>();
        if (p.contains("T_beacon")) spec.phy.T_beacon = p["T_beacon"].get<double>();
    }
    if (!j.contains("stations")) throw std::invalid_argument("scenario.stations: required");
    int idx = 0;
    for (const json& sj : j["stations"]) {
        const int count = sj.value("count", 1);
        StrategySpec s = detail::parse_strategy(sj, "scenario.stations[" + std::to_string(idx) + "]");
        for (int k = 0; k < count; ++k) spec.stations.push_back(s);
        ++idx;
    }
    if (!j.contains("duration_s")) throw std::invalid_argument("scenario.duration_s: required");
    spec.duration_s = j["duration_s"].get<double>();
    const std::string fid = j.value("fidelity", "meanfield");
    if (fid == "meanfield")
        spec.fidelity = Fidelity::MeanField;
    else if (fid == "slot")
        spec.fidelity = Fidelity::Slot;
    else
        throw std::invalid_argument("scenario.fidelity: must be 'meanfield' or 'slot'");
    spec.seed = j.value("seed", 1);
    spec.gamma_multiplier = j.value("gamma_multiplier", 1.0);
    spec.tau_init = j.value("tau_init", "tau_opt");
    if (j.contains("switches")) {
        int si = 0;
        for (const json& sw : j["switches"]) {
            SwitchEvent ev;
            ev.station = sw.at("station").get<std::size_t>();
            ev.time_s = sw.at("time_s").get<double>();
            ev.strategy = detail::parse_strategy(
                sw, "scenario.switches[" + std::to_string(si) + "]");
            spec.switches.push_back(ev);
            ++si;
        }
    }
    if (j.contains("perturbations")) {
        for (const json& pj : j["perturbations"]) {
            Perturbation p;
            p.station = pj.at("station").get<std::size_t>();
            p.start_s = pj.at("start_s").get<double>();
            p.duration_s = pj.at("duration_s").get<double>();
            spec.perturbations.push_back(p);
        }
    }
    spec.validate();
    return spec;
}

inline ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file: " + path);
    json j;
    in >> j;
    return parse_scenario(j);
}

inline json scenario_to_json(const ScenarioSpec& spec);  // defined below

/// Execute the stage loop: measure -> each station decides -> next stage.
inline RunOutput run(const ScenarioSpec& spec) {
    spec.validate();
    const int n = spec.n;
    const long stages = static_cast<long>(std::ceil(spec.duration_s / spec.phy.T_beacon));

    // Resolve the optimal point; a mixed WLAN shrinks tau_opt for the
    // saturated set until airtime fits the declared loads.
    std::vector<std::size_t> sat_idx, ns_idx;
    std::vector<double> offered;
    std::vector<StrategySpec> strategies = spec.stations;
    for (int i = 0; i < n; ++i) {
        if (strategies[i].kind == StrategySpec::Kind::NonSaturated)
            ns_idx.push_back(static_cast<std::size_t>(i));
        else
            sat_idx.push_back(static_cast<std::size_t>(i));
    }
    OptimalPoint opt;
    if (ns_idx.empty()) {
        opt = solve_optimal(n, spec.phy);
    } else {
        OptimalPoint all_sat = solve_optimal(n, spec.phy);
        for (std::size_t i : ns_idx) {
            double& r = strategies[i].offered_rate;
            if (r < 0.0) r = -r * all_sat.r_opt;  // fraction of the saturation throughput
            offered.push_back(r);
        }
        opt = solve_optimal_mixed(static_cast<int>(sat_idx.size()), offered, spec.phy);
    }
    const double gamma = spec.gamma_multiplier * opt.gamma_max / 2.0;

    // Initial control variables.
    std::uint64_t init_rng = spec.seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull;
    auto init_urand = [&init_rng]() {
        init_rng ^= init_rng << 13;
        init_rng ^= init_rng >> 7;
        init_rng ^= init_rng << 17;
        return static_cast<double>(init_rng >> 11) * 0x1.0p-53;
    };
    for (auto& s : strategies) {
        if (s.kind != StrategySpec::Kind::Gas || s.tau0 >= 0.0) continue;
        if (spec.tau_init == "random")
            s.tau0 = opt.tau_opt / 2.0 + (1.0 - opt.tau_opt / 2.0) * init_urand();
        // "tau_opt" keeps tau0 < 0, which GasState::make resolves to tau_opt.
    }

    std::vector<Station> stations;
    for (int i = 0; i < n; ++i)
        stations.emplace_back(static_cast<std::size_t>(i), strategies[i], opt, gamma);
    if (!ns_idx.empty())
        for (auto& st : stations)
            if (st.is_gas()) st.gas_state().saturated_peers = sat_idx;

    std::vector<SwitchEvent> pending = spec.switches;

    RunOutput out;
    out.seed = spec.seed;
    out.spec_echo = scenario_to_json(spec);
    out.series.reserve(static_cast<std::size_t>(stages));

    std::optional<Engine> engine;
    if (spec.fidelity == Fidelity::Slot) {
        std::vector<StationConfig> cfg(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const Station& st = stations[static_cast<std::size_t>(i)];
            if (st.is_gas()) {
                cfg[i].mode = AccessMode::PPersistent;
                cfg[i].tau_hat = st.gas_state().tau_hat;
            } else {
                cfg[i].mode = AccessMode::Backoff;
                EdcaParams p;
                p.cw_min = st.current_cw();
                if (st.spec().kind == StrategySpec::Kind::StaticCW) p = st.spec().static_params;
                cfg[i].edca = p;
                if (st.is_nonsaturated()) {
                    cfg[i].saturated = false;
                    cfg[i].offered_rate = strategies[i].offered_rate;
                }
            }
        }
        engine.emplace(spec.phy, cfg, spec.seed);
        for (const auto& p : spec.perturbations)
            engine->inject_error_burst(p.station, p.start_s, p.duration_s);
    }

    TauVector tau(static_cast<std::size_t>(n));
    const double tau_ns_cap = cw_to_tau(opt.cw_opt);
    for (long t = 0; t < stages; ++t) {
        const double stage_time = t * spec.phy.T_beacon;

        // Apply due strategy switches at the stage boundary.
        for (auto it = pending.begin(); it != pending.end();) {
            if (it->time_s <= stage_time + 1e-12) {
                stations[it->station] =
                    Station(it->station, it->strategy, opt, gamma);
                if (!ns_idx.empty() && stations[it->station].is_gas())
                    stations[it->station].gas_state().saturated_peers = sat_idx;
                if (engine) {
                    StationConfig c;
                    if (stations[it->station].is_gas()) {
                        c.mode = AccessMode::PPersistent;
                        c.tau_hat = stations[it->station].gas_state().tau_hat;
                    } else {
                        c.mode = AccessMode::Backoff;
                        c.edca = it->strategy.kind == StrategySpec::Kind::StaticCW
                                     ? it->strategy.static_params
                                     : EdcaParams{stations[it->station].current_cw()};
                    }
                    engine->set_config(it->station, c);
                }
                it = pending.erase(it);
            } else {
                ++it;
            }
        }

        StageReport rep;
        if (engine) {
            rep = engine->run_stage();
        } else {
            for (int i = 0; i < n; ++i) tau[i] = stations[i].tau_for_meanfield();
            if (!ns_idx.empty()) {
                for (std::size_t i : ns_idx) tau[i] = tau_ns_cap;
                detail::solve_offered_taus(tau, ns_idx, offered, tau_ns_cap, spec.phy);
            }
            rep = run_stage_meanfield(tau, spec.phy, t);
        }

        StageRow row;
        row.stage = t;
        row.time_s = stage_time;
        row.stations.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            StationRow& sr = row.stations[static_cast<std::size_t>(i)];
            const Station& st = stations[static_cast<std::size_t>(i)];
            if (st.is_gas()) {
                sr.tau = st.gas_state().tau;
                sr.tau_hat = st.gas_state().tau_hat;
                sr.cw = tau_to_cw(sr.tau_hat);
            } else {
                sr.cw = st.current_cw();
                sr.tau = sr.tau_hat = cw_to_tau(sr.cw);
            }
            sr.throughput_bps = rep.throughputs[static_cast<std::size_t>(i)];
        }
        out.series.push_back(std::move(row));

        for (int i = 0; i < n; ++i) {
            Station& st = stations[static_cast<std::size_t>(i)];
            const double cw_before = st.is_gas() ? tau_to_cw(st.gas_state().tau_hat)
                                                 : st.current_cw();
            EdcaParams next = st.decide(rep, opt);
            if (engine && st.is_gas()) {
                StationConfig c = engine->config(static_cast<std::size_t>(i));
                c.tau_hat = st.gas_state().tau_hat;
                engine->set_config(static_cast<std::size_t>(i), c);
            } else if (engine && std::abs(next.cw_min - cw_before) > 1e-12) {
                StationConfig c = engine->config(static_cast<std::size_t>(i));
                c.edca = next;
                engine->set_config(static_cast<std::size_t>(i), c);
            }
        }
    }

    out.mean_throughput.assign(static_cast<std::size_t>(n), 0.0);
    out.stddev_throughput.assign(static_cast<std::size_t>(n), 0.0);
    for (const auto& row : out.series)
        for (int i = 0; i < n; ++i) out.mean_throughput[i] += row.stations[i].throughput_bps;
    for (auto& m : out.mean_throughput) m /= static_cast<double>(out.series.size());
    return out;
}

/// Run with seeds seed, seed+1, ...; summary carries mean and stddev of the
/// per-replication long-run means. The returned series is replication 0's.
inline RunOutput replicate(const ScenarioSpec& spec, int replications) {
    if (replications < 1) throw std::invalid_argument("replicate: replications >= 1");
    std::vector<std::vector<double>> means;
    RunOutput first;
    for (int r = 0; r < replications; ++r) {
        ScenarioSpec s = spec;
        s.seed = spec.seed + static_cast<std::uint64_t>(r);
        RunOutput o = run(s);
        means.push_back(o.mean_throughput);
        if (r == 0) first = std::move(o);
    }
    const std::size_t n = means[0].size();
    first.stddev_throughput.assign(n, 0.0);
    // Mean shifted by replication 0 so identical replications (expectation
    // mode) yield an exact mean and exactly zero variance.
    first.mean_throughput = means[0];
    for (std::size_t i = 0; i < n; ++i) {
        double shift_sum = 0.0;
        for (const auto& m : means) shift_sum += m[i] - means[0][i];
        first.mean_throughput[i] += shift_sum / replications;
    }
    if (replications > 1) {
        for (const auto& m : means)
            for (std::size_t i = 0; i < n; ++i) {
                const double d = m[i] - first.mean_throughput[i];
                first.stddev_throughput[i] += d * d;
            }
        for (auto& v : first.stddev_throughput) v = std::sqrt(v / (replications - 1));
    }
    return first;
}

inline json scenario_to_json(const ScenarioSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["n"] = spec.n;
    j["phy"] = {{"T_e", spec.phy.T_e},
                {"T_t", spec.phy.T_t},
                {"l", spec.phy.l},
                {"T_beacon", spec.phy.T_beacon}};
    j["stations"] = json::array();
    for (const auto& s : spec.stations) {
        json sj;
        switch (s.kind) {
            case StrategySpec::Kind::Gas: sj["kind"] = "gas"; break;
            case StrategySpec::Kind::StaticCW:
                sj["kind"] = "static_cw";
                sj["cw_min"] = s.static_params.cw_min;
                sj["m"] = s.static_params.m;
                sj["aifs_slots"] = s.static_params.aifs_slots;
                sj["txop_packets"] = s.static_params.txop_packets;
                sj["retry_limit"] = s.static_params.retry_limit;
                break;
            case StrategySpec::Kind::Adaptive1: sj["kind"] = "adaptive1"; break;
            case StrategySpec::Kind::Adaptive2: sj["kind"] = "adaptive2"; break;
            case StrategySpec::Kind::Adaptive3: sj["kind"] = "adaptive3"; break;
            case StrategySpec::Kind::NonSaturated:
                sj["kind"] = "nonsaturated";
                if (s.offered_rate >= 0.0)
                    sj["offered_rate_bps"] = s.offered_rate;
                else
                    sj["offered_frac_saturation"] = -s.offered_rate;
                break;
        }
        if (s.kind == StrategySpec::Kind::Adaptive1 || s.kind == StrategySpec::Kind::Adaptive2)
            sj["probe_period"] = s.probe_period;
        if (s.tau0 >= 0.0) sj["tau0"] = s.tau0;
        j["stations"].push_back(sj);
    }
    j["duration_s"] = spec.duration_s;
    j["fidelity"] = spec.fidelity == Fidelity::Slot ? "slot" : "meanfield";
    j["seed"] = spec.seed;
    j["gamma_multiplier"] = spec.gamma_multiplier;
    j["tau_init"] = spec.tau_init;
    if (!spec.switches.empty()) {
        j["switches"] = json::array();
        for (const auto& ev : spec.switches) {
            json sw;
            sw["station"] = ev.station;
            sw["time_s"] = ev.time_s;
            sw["kind"] = ev.strategy.kind == StrategySpec::Kind::StaticCW ? "static_cw" : "gas";
            if (ev.strategy.kind == StrategySpec::Kind::StaticCW) {
                sw["cw_min"] = ev.strategy.static_params.cw_min;
                sw["m"] = ev.strategy.static_params.m;
                sw["aifs_slots"] = ev.strategy.static_params.aifs_slots;
                sw["txop_packets"] = ev.strategy.static_params.txop_packets;
            }
            j["switches"].push_back(sw);
        }
    }
    if (!spec.perturbations.empty()) {
        j["perturbations"] = json::array();
        for (const auto& p : spec.perturbations)
            j["perturbations"].push_back(
                {{"station", p.station}, {"start_s", p.start_s}, {"duration_s", p.duration_s}});
    }
    return j;
}

/// CSV emitter; %.17g keeps output byte-stable and round-trip exact.
inline void emit_csv(const RunOutput& out, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
    std::fputs("stage,time_s,station,tau,tau_hat,cw,throughput_bps\n", f);
    for (const auto& row : out.series)
        for (std::size_t i = 0; i < row.stations.size(); ++i) {
            const StationRow& s = row.stations[i];
            std::fprintf(f, "%ld,%.17g,%zu,%.17g,%.17g,%.17g,%.17g\n", row.stage, row.time_s, i,
                         s.tau, s.tau_hat, s.cw, s.throughput_bps);
        }
    std::fclose(f);
}

inline void emit_json(const RunOutput& out, const std::string& path) {
    json j;
    j["metadata"] = {{"spec", out.spec_echo}, {"seed", out.seed}, {"version", "1.0"}};
    j["summary"] = {{"mean_throughput_bps", out.mean_throughput},
                    {"stddev_throughput_bps", out.stddev_throughput}};
    j["series"] = json::array();
    for (const auto& row : out.series) {
        json rj;
        rj["stage"] = row.stage;
        rj["time_s"] = row.time_s;
        rj["stations"] = json::array();
        for (const auto& s : row.stations)
            rj["stations"].push_back({{"tau", s.tau},
                                      {"tau_hat", s.tau_hat},
                                      {"cw", s.cw},
                                      {"throughput_bps", s.throughput_bps}});
        j["series"].push_back(rj);
    }
    std::ofstream outp(path, std::ios::binary);
    if (!outp) throw std::runtime_error("emit_json: cannot open " + path);
    outp << j.dump(2) << "\n";
}

}  // namespace gas

#endif
