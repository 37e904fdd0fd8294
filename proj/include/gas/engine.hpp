#ifndef GAS_ENGINE_HPP
#define GAS_ENGINE_HPP

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gas/analytic.hpp"
#include "gas/controller.hpp"
#include "gas/phy.hpp"

namespace gas {

/// What happened in one channel slot.
struct SlotOutcome {
    enum class Kind { Idle, Success, Collision };
    Kind kind = Kind::Idle;
    std::size_t station = 0;  ///< transmitter on success
    int packets = 0;          ///< frames delivered on success
    double duration = 0.0;    ///< [s]
};

struct ErrorBurst {
    std::size_t station = 0;
    double start = 0.0;
    double duration = 0.0;
    bool active(double t) const { return t >= start && t < start + duration; }
};

/// Channel-access discipline of one station.
///
/// GAS stations use the per-slot transmission-probability discipline (the
/// memoryless equivalent of their real-valued window); explicitly configured
/// stations use integer-window backoff.
enum class AccessMode { PPersistent, Backoff };

struct StationConfig {
    AccessMode mode = AccessMode::Backoff;
    double tau_hat = 0.0;  ///< per-slot transmission probability (PPersistent)
    EdcaParams edca;       ///< window configuration (Backoff)
    bool saturated = true;
    double offered_rate = 0.0;  ///< fluid arrival rate [bits/s] when not saturated
};

struct StationRuntime {
    int backoff_counter = 0;
    int backoff_stage = 0;
    int aifs_wait = 0;
    int retries = 0;
    double delivered_bits = 0.0;
    double queue_bits = 0.0;
};

/// Slot-synchronous EDCA contention among n stations. One instance is
/// single-threaded and owns all station runtimes; all randomness comes from
/// the seed given at construction.
class Engine {
  public:
    Engine(const PhyProfile& phy, std::vector<StationConfig> configs, std::uint64_t seed)
        : phy_(phy), cfg_(std::move(configs)), rt_(cfg_.size()), rng_(seed ^ 0x9e3779b97f4a7c15ull) {
        phy_.validate();
        if (cfg_.empty()) throw std::invalid_argument("Engine: need at least one station");
        for (std::size_t i = 0; i < cfg_.size(); ++i) {
            if (cfg_[i].mode == AccessMode::Backoff) {
                cfg_[i].edca.validate();
                rt_[i].backoff_counter = draw_backoff(i);
            }
        }
    }

    std::size_t station_count() const { return cfg_.size(); }
    double now() const { return now_; }
    long total_slots() const { return slots_; }

    /// Swap in a new configuration for the next stages. Queue contents and
    /// delivered-bit accumulators survive; the backoff draw is refreshed.
    void set_config(std::size_t i, const StationConfig& c) {
        if (i >= cfg_.size()) throw std::out_of_range("Engine::set_config: station index");
        if (c.mode == AccessMode::Backoff) c.edca.validate();
        cfg_[i] = c;
        rt_[i].backoff_stage = 0;
        rt_[i].retries = 0;
        if (c.mode == AccessMode::Backoff) rt_[i].backoff_counter = draw_backoff(i);
    }

    /// During [start, start+duration) of simulated time the station's
    /// transmissions fail.
    void inject_error_burst(std::size_t station, double start, double duration) {
        if (station >= cfg_.size()) throw std::out_of_range("Engine: unknown station index");
        if (start < 0.0 || duration < 0.0)
            throw std::invalid_argument("Engine: burst start/duration must be >= 0");
        bursts_.push_back({station, start, duration});
    }

    /// Simulate slot-by-slot for one beacon interval. The slot in progress
    /// when T_beacon elapses completes before the stage closes.
    StageReport run_stage() {
        const double stage_start = now_;
        for (auto& r : rt_) r.delivered_bits = 0.0;
        while (now_ - stage_start < phy_.T_beacon) step_slot();
        StageReport rep;
        rep.stage_index = stage_index_++;
        rep.duration = now_ - stage_start;
        rep.throughputs.resize(cfg_.size());
        for (std::size_t i = 0; i < cfg_.size(); ++i)
            rep.throughputs[i] = rt_[i].delivered_bits / rep.duration;
        return rep;
    }

    /// Exposed for slot-level statistics tests.
    SlotOutcome step_slot() {
        tx_.clear();
        for (std::size_t i = 0; i < cfg_.size(); ++i) {
            const StationConfig& c = cfg_[i];
            const bool has_data = c.saturated || rt_[i].queue_bits >= phy_.l;
            if (!has_data) continue;
            if (c.mode == AccessMode::PPersistent) {
                if (urand() < c.tau_hat) tx_.push_back(i);
            } else {
                if (rt_[i].aifs_wait == 0 && rt_[i].backoff_counter == 0) tx_.push_back(i);
            }
        }

        SlotOutcome out;
        if (tx_.empty()) {
            out.kind = SlotOutcome::Kind::Idle;
            out.duration = phy_.T_e;
            for (std::size_t i = 0; i < cfg_.size(); ++i) {
                if (cfg_[i].mode != AccessMode::Backoff) continue;
                if (rt_[i].aifs_wait > 0)
                    --rt_[i].aifs_wait;
                else if (rt_[i].backoff_counter > 0)
                    --rt_[i].backoff_counter;
            }
        } else if (tx_.size() == 1) {
            const std::size_t s = tx_[0];
            if (burst_active(s)) {
                // Failed exchange looks busy for one frame time; retry consumed.
                out.kind = SlotOutcome::Kind::Collision;
                out.duration = phy_.T_t;
                on_failed_attempt(s);
            } else {
                out.kind = SlotOutcome::Kind::Success;
                out.station = s;
                out.packets = 1;
                if (cfg_[s].mode == AccessMode::Backoff) {
                    out.packets = cfg_[s].edca.txop_packets;
                    if (!cfg_[s].saturated) {
                        const int avail = static_cast<int>(rt_[s].queue_bits / phy_.l);
                        out.packets = std::max(1, std::min(out.packets, avail));
                    }
                }
                out.duration = phy_.T_t * out.packets;
                rt_[s].delivered_bits += out.packets * phy_.l;
                if (!cfg_[s].saturated) rt_[s].queue_bits -= out.packets * phy_.l;
                if (cfg_[s].mode == AccessMode::Backoff) {
                    rt_[s].backoff_stage = 0;
                    rt_[s].retries = 0;
                    rt_[s].backoff_counter = draw_backoff(s);
                }
            }
        } else {
            out.kind = SlotOutcome::Kind::Collision;
            out.duration = phy_.T_t;
            for (std::size_t s : tx_) on_failed_attempt(s);
        }

        if (out.kind != SlotOutcome::Kind::Idle) {
            // A busy period counts as one channel slot: stations past their
            // AIFS gate consume exactly one decrement at its end (the counter
            // never moves during the transmission itself), then re-arm AIFS.
            for (std::size_t i = 0; i < cfg_.size(); ++i) {
                if (cfg_[i].mode != AccessMode::Backoff) continue;
                bool transmitted = false;
                for (std::size_t s : tx_) transmitted = transmitted || s == i;
                if (!transmitted && rt_[i].aifs_wait == 0 && rt_[i].backoff_counter > 0)
                    --rt_[i].backoff_counter;
                rt_[i].aifs_wait = cfg_[i].edca.aifs_slots;
            }
        }

        for (std::size_t i = 0; i < cfg_.size(); ++i)
            if (!cfg_[i].saturated) rt_[i].queue_bits += cfg_[i].offered_rate * out.duration;

        now_ += out.duration;
        ++slots_;
        return out;
    }

    const StationRuntime& runtime(std::size_t i) const { return rt_.at(i); }
    const StationConfig& config(std::size_t i) const { return cfg_.at(i); }

    /// Initial backoff draw from {0, ..., ceil(CW)-1}; exposed for the
    /// uniformity test.
    int draw_backoff(std::size_t i) {
        const EdcaParams& e = cfg_[i].edca;
        double cw = e.cw_min;
        for (int s = 0; s < rt_[i].backoff_stage; ++s) cw *= 2.0;
        const int w = static_cast<int>(std::ceil(cw - 1e-12));
        return w <= 1 ? 0 : static_cast<int>(urand() * w);
    }

  private:
    double urand() { return static_cast<double>(rng_next() >> 11) * 0x1.0p-53; }

    std::uint64_t rng_next() {
        // splitmix64: portable, fast, one draw per call
        std::uint64_t z = (rng_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    bool burst_active(std::size_t s) const {
        for (const auto& b : bursts_)
            if (b.station == s && b.active(now_)) return true;
        return false;
    }

    void on_failed_attempt(std::size_t s) {
        if (cfg_[s].mode != AccessMode::Backoff) return;
        ++rt_[s].retries;
        if (rt_[s].retries >= cfg_[s].edca.retry_limit) {
            // head frame dropped
            if (!cfg_[s].saturated) rt_[s].queue_bits = std::max(0.0, rt_[s].queue_bits - phy_.l);
            rt_[s].retries = 0;
            rt_[s].backoff_stage = 0;
        } else {
            rt_[s].backoff_stage = std::min(rt_[s].backoff_stage + 1, cfg_[s].edca.m);
        }
        rt_[s].backoff_counter = draw_backoff(s);
    }

    PhyProfile phy_;
    std::vector<StationConfig> cfg_;
    std::vector<StationRuntime> rt_;
    std::vector<ErrorBurst> bursts_;
    std::vector<std::size_t> tx_;
    std::uint64_t rng_;
    double now_ = 0.0;
    long slots_ = 0;
    long stage_index_ = 0;
};

/// Expectation mode: stage measurements are exactly the model throughputs.
inline StageReport run_stage_meanfield(const TauVector& tau_hat, const PhyProfile& phy,
                                       long stage_index = 0) {
    StageReport rep;
    rep.stage_index = stage_index;
    rep.duration = phy.T_beacon;
    rep.throughputs.resize(tau_hat.size());
    for (std::size_t i = 0; i < tau_hat.size(); ++i)
        rep.throughputs[i] = station_throughput(i, tau_hat, phy);
    return rep;
}

}  // namespace gas

#endif
