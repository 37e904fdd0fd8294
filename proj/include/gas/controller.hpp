#ifndef GAS_CONTROLLER_HPP
#define GAS_CONTROLLER_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gas/analytic.hpp"
#include "gas/phy.hpp"

namespace gas {

/// Ground-truth per-station throughputs measured over one stage.
struct StageReport {
    std::vector<double> throughputs;  ///< [bits/s], one entry per station
    long stage_index = 0;
    double duration = 0.0;  ///< stage length [s]
};

/// One station's MAC configuration.
struct EdcaParams {
    double cw_min = 1.0;    ///< real-valued contention window, >= 1
    int m = 0;              ///< backoff-stage count, CW_max = 2^m * cw_min
    int aifs_slots = 0;     ///< extra idle slots beyond DIFS
    int txop_packets = 1;   ///< frames per channel access
    int retry_limit = 7;

    void validate() const {
        if (!(cw_min >= 1.0)) throw std::invalid_argument("EdcaParams: cw_min >= 1 required");
        if (m < 0) throw std::invalid_argument("EdcaParams: m >= 0 required");
        if (aifs_slots < 0) throw std::invalid_argument("EdcaParams: aifs_slots >= 0 required");
        if (txop_packets < 1) throw std::invalid_argument("EdcaParams: txop_packets >= 1 required");
        if (retry_limit < 1) throw std::invalid_argument("EdcaParams: retry_limit >= 1 required");
    }
};

/// Clamp the control variable to [tau_opt/2, 1].
inline double clamp_tau(double tau, double tau_opt) {
    return std::min(1.0, std::max(tau, tau_opt / 2.0));
}

/// Per-station state of the adaptive update.
struct GasState {
    std::size_t station_id = 0;
    double tau = 0.0;      ///< unclamped control variable
    double tau_hat = 0.0;  ///< clamped transmission probability
    double gamma = 0.0;    ///< update gain [(bits/s)^-1]
    /// Non-saturated mode: only these stations enter the punishment sum and
    /// the gap D. Empty means all stations are saturated.
    std::vector<std::size_t> saturated_peers;

    static GasState make(std::size_t id, double gamma, const OptimalPoint& opt,
                         double tau0 = -1.0) {
        GasState s;
        s.station_id = id;
        s.gamma = gamma;
        s.tau = tau0 < 0.0 ? opt.tau_opt : tau0;
        s.tau_hat = clamp_tau(s.tau, opt.tau_opt);
        return s;
    }

    bool in_saturated_set(std::size_t j) const {
        if (saturated_peers.empty()) return true;
        for (std::size_t k : saturated_peers)
            if (k == j) return true;
        return false;
    }
};

/// Punishment component sum_{j != i} (r_j - r_i). Positive when station i is
/// below its peers. In non-saturated mode the sum only includes stations
/// receiving more throughput than station i.
inline double penalty_term(const GasState& state, const StageReport& report) {
    const double r_i = report.throughputs.at(state.station_id);
    const bool nonsat = !state.saturated_peers.empty();
    double sum = 0.0;
    for (std::size_t j = 0; j < report.throughputs.size(); ++j) {
        if (j == state.station_id) continue;
        const double d = report.throughputs[j] - r_i;
        if (nonsat && d <= 0.0) continue;
        sum += d;
    }
    return sum;
}

/// Gap D computed from measured throughputs; in non-saturated mode only the
/// saturated set counts toward n and the sum.
inline double measured_gap(const GasState& state, const StageReport& report,
                           const OptimalPoint& opt) {
    int n = 0;
    double sum = 0.0;
    for (std::size_t j = 0; j < report.throughputs.size(); ++j) {
        if (!state.in_saturated_set(j)) continue;
        ++n;
        sum += report.throughputs[j];
    }
    return n * opt.r_opt - sum;
}

/// Steering component, piecewise in the sign of D and the station's own
/// unclamped tau:
///   D/n      if tau_i >  tau_opt and D >= 0
///  -D/n      if tau_i <= tau_opt and D >= 0
///   D/(n-1)  if D < 0
inline double fairness_term(const GasState& state, const StageReport& report,
                            const OptimalPoint& opt) {
    int n = 0;
    for (std::size_t j = 0; j < report.throughputs.size(); ++j)
        if (state.in_saturated_set(j)) ++n;
    if (n < 2) throw std::invalid_argument("fairness_term: require n >= 2");
    const double d = measured_gap(state, report, opt);
    if (d < 0.0) return d / (n - 1);
    return state.tau > opt.tau_opt ? d / n : -d / n;
}

/// One stage of the update: tau += gamma * (penalty - fairness), re-clamped.
inline GasState step(const GasState& state, const StageReport& report, const OptimalPoint& opt) {
    GasState next = state;
    next.tau = state.tau + state.gamma * (penalty_term(state, report) -
                                          fairness_term(state, report, opt));
    next.tau_hat = clamp_tau(next.tau, opt.tau_opt);
    return next;
}

/// EDCA configuration for the next stage: CW = 2/tau_hat - 1 with the target
/// setting of the remaining parameters (AIFS = DIFS, TXOP = 1, m = 0).
inline EdcaParams to_edca_params(const GasState& state, const OptimalPoint& opt) {
    (void)opt;
    if (!(state.tau_hat > 0.0))
        throw std::invalid_argument("to_edca_params: tau_hat must be positive");
    EdcaParams p;
    p.cw_min = 2.0 / state.tau_hat - 1.0;
    p.m = 0;
    p.aifs_slots = 0;
    p.txop_packets = 1;
    return p;
}

}  // namespace gas

#endif
