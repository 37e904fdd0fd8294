#ifndef GAS_STRATEGIES_HPP
#define GAS_STRATEGIES_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gas/analytic.hpp"
#include "gas/controller.hpp"
#include "gas/engine.hpp"

namespace gas {

/// Declarative per-station behavior.
struct StrategySpec {
    enum class Kind { Gas, StaticCW, Adaptive1, Adaptive2, Adaptive3, NonSaturated };
    Kind kind = Kind::Gas;
    EdcaParams static_params;     ///< StaticCW: the fixed configuration
    double offered_rate = 0.0;    ///< NonSaturated [bits/s]
    int probe_period = 50;        ///< Adaptive1/2: stages between probes
    double tau0 = -1.0;           ///< Gas: initial control variable (<0 means tau_opt)
};

inline double cw_to_tau(double cw) { return 2.0 / (cw + 1.0); }
inline double tau_to_cw(double tau) { return 2.0 / tau - 1.0; }

/// Runtime behavior of one station: consumes a StageReport, produces the
/// next-stage configuration.
class Station {
  public:
    Station(std::size_t id, const StrategySpec& spec, const OptimalPoint& opt, double gamma)
        : id_(id), spec_(spec) {
        switch (spec.kind) {
            case StrategySpec::Kind::Gas:
                gas_ = GasState::make(id, gamma, opt, spec.tau0);
                break;
            case StrategySpec::Kind::StaticCW:
                spec_.static_params.validate();
                cw_ = spec_.static_params.cw_min;
                break;
            case StrategySpec::Kind::Adaptive1:
            case StrategySpec::Kind::Adaptive2:
                base_cw_ = std::round(opt.cw_opt);
                cw_ = base_cw_;
                break;
            case StrategySpec::Kind::Adaptive3:
                cw_ = std::round(opt.cw_opt);
                break;
            case StrategySpec::Kind::NonSaturated:
                cw_ = std::round(opt.cw_opt);
                break;
        }
    }

    const StrategySpec& spec() const { return spec_; }
    const GasState& gas_state() const { return gas_; }
    GasState& gas_state() { return gas_; }
    double current_cw() const { return cw_; }

    /// Next-stage EDCA configuration given the closing stage's report.
    EdcaParams decide(const StageReport& report, const OptimalPoint& opt) {
        const double r_s = report.throughputs.at(id_);
        switch (spec_.kind) {
            case StrategySpec::Kind::Gas: {
                gas_ = step(gas_, report, opt);
                return to_edca_params(gas_, opt);
            }
            case StrategySpec::Kind::StaticCW:
                return spec_.static_params;
            case StrategySpec::Kind::Adaptive1:
            case StrategySpec::Kind::Adaptive2: {
                if (probing_) {
                    if (r_s < opt.r_opt) {
                        probing_ = false;
                        stages_since_probe_ = 0;
                        if (spec_.kind == StrategySpec::Kind::Adaptive2) base_cw_ += 5.0;
                        cw_ = base_cw_;
                    }
                } else if (++stages_since_probe_ >= spec_.probe_period) {
                    probing_ = true;
                    cw_ = 2.0;
                }
                break;
            }
            case StrategySpec::Kind::Adaptive3: {
                cw_ = std::max(1.0, cw_ + (r_s > last_throughput_ ? -5.0 : 5.0));
                last_throughput_ = r_s;
                break;
            }
            case StrategySpec::Kind::NonSaturated:
                break;  // target configuration, never adapts
        }
        EdcaParams p;
        p.cw_min = cw_;
        return p;
    }

    /// Transmission probability for expectation-mode dynamics. Non-saturated
    /// stations are handled by the harness (their tau serves the offered load).
    double tau_for_meanfield() const {
        if (spec_.kind == StrategySpec::Kind::Gas) return gas_.tau_hat;
        return cw_to_tau(cw_);
    }

    bool is_gas() const { return spec_.kind == StrategySpec::Kind::Gas; }
    bool is_nonsaturated() const { return spec_.kind == StrategySpec::Kind::NonSaturated; }

  private:
    std::size_t id_;
    StrategySpec spec_;
    GasState gas_;
    double cw_ = 0.0;
    double base_cw_ = 0.0;
    bool probing_ = false;
    int stages_since_probe_ = 0;
    double last_throughput_ = 0.0;
};

/// Long-run throughputs from a run with one configured station among GAS peers.
struct SelfishRunResult {
    double cw = 0.0;
    double selfish_avg = 0.0;  ///< [bits/s], averaged past the warm-up window
    double honest_avg = 0.0;   ///< mean over the honest stations
};

/// Station 0 plays the given fixed configuration; stations 1..n-1 play GAS
/// starting at tau_opt with gain gamma. Expectation-mode dynamics.
inline SelfishRunResult run_static_selfish_meanfield(int n, const EdcaParams& selfish,
                                                     const OptimalPoint& opt,
                                                     const PhyProfile& phy, double gamma,
                                                     int warmup_stages, int avg_stages) {
    if (n < 2) throw std::invalid_argument("run_static_selfish_meanfield: n >= 2");
    std::vector<GasState> honest;
    for (int i = 1; i < n; ++i) honest.push_back(GasState::make(i, gamma, opt));
    const double tau_s = cw_to_tau(selfish.cw_min);

    SelfishRunResult res;
    res.cw = selfish.cw_min;
    TauVector tau(static_cast<std::size_t>(n));
    for (long t = 0; t < warmup_stages + avg_stages; ++t) {
        tau[0] = tau_s;
        for (int i = 1; i < n; ++i) tau[i] = honest[i - 1].tau_hat;
        StageReport rep = run_stage_meanfield(tau, phy, t);
        if (t >= warmup_stages) {
            res.selfish_avg += rep.throughputs[0];
            for (int i = 1; i < n; ++i) res.honest_avg += rep.throughputs[i];
        }
        for (auto& h : honest) h = step(h, rep, opt);
    }
    res.selfish_avg /= avg_stages;
    res.honest_avg /= avg_stages * (n - 1);
    return res;
}

/// Same run in slot fidelity: selfish uses integer-window backoff, honest
/// stations use the probability discipline.
inline SelfishRunResult run_static_selfish_slot(int n, const EdcaParams& selfish,
                                                const OptimalPoint& opt, const PhyProfile& phy,
                                                double gamma, std::uint64_t seed,
                                                int warmup_stages, int avg_stages) {
    if (n < 2) throw std::invalid_argument("run_static_selfish_slot: n >= 2");
    std::vector<GasState> honest;
    for (int i = 1; i < n; ++i) honest.push_back(GasState::make(i, gamma, opt));

    std::vector<StationConfig> cfg(static_cast<std::size_t>(n));
    cfg[0].mode = AccessMode::Backoff;
    cfg[0].edca = selfish;
    for (int i = 1; i < n; ++i) {
        cfg[i].mode = AccessMode::PPersistent;
        cfg[i].tau_hat = opt.tau_opt;
    }
    Engine eng(phy, cfg, seed);

    SelfishRunResult res;
    res.cw = selfish.cw_min;
    for (long t = 0; t < warmup_stages + avg_stages; ++t) {
        StageReport rep = eng.run_stage();
        if (t >= warmup_stages) {
            res.selfish_avg += rep.throughputs[0];
            for (int i = 1; i < n; ++i) res.honest_avg += rep.throughputs[i];
        }
        for (int i = 1; i < n; ++i) {
            honest[i - 1] = step(honest[i - 1], rep, opt);
            StationConfig c = cfg[static_cast<std::size_t>(i)];
            c.tau_hat = honest[i - 1].tau_hat;
            eng.set_config(static_cast<std::size_t>(i), c);
        }
    }
    res.selfish_avg /= avg_stages;
    res.honest_avg /= avg_stages * (n - 1);
    return res;
}

/// Exhaustive search over candidate windows for the fixed selfish
/// configuration earning the largest long-run throughput against n-1 GAS
/// stations. Ties break toward the larger (less aggressive) window. The
/// optional deviant template fixes m/AIFS/TXOP while the window is searched.
inline SelfishRunResult best_static_cw(int n, const std::vector<double>& search_space,
                                       const OptimalPoint& opt, const PhyProfile& phy,
                                       double gamma, bool slot_fidelity, std::uint64_t seed,
                                       int warmup_stages, int avg_stages,
                                       const EdcaParams& deviant_template = EdcaParams{}) {
    if (search_space.empty()) throw std::invalid_argument("best_static_cw: empty search space");
    SelfishRunResult best;
    bool first = true;
    for (double cw : search_space) {
        EdcaParams p = deviant_template;
        p.cw_min = cw;
        SelfishRunResult r =
            slot_fidelity
                ? run_static_selfish_slot(n, p, opt, phy, gamma, seed, warmup_stages, avg_stages)
                : run_static_selfish_meanfield(n, p, opt, phy, gamma, warmup_stages, avg_stages);
        if (first || r.selfish_avg >= best.selfish_avg) {
            best = r;
            first = false;
        }
    }
    return best;
}

}  // namespace gas

#endif
