#ifndef GAS_PHY_HPP
#define GAS_PHY_HPP

#include <cmath>
#include <stdexcept>

namespace gas {

/// Channel timing constants defining one WLAN generation.
///
/// The analytic model and the slot engine share exactly two durations: an
/// empty slot T_e and an occupied slot T_t. All per-frame overheads (PLCP,
/// SIFS, ACK exchange, DIFS, ACK timeout) are folded into T_t.
struct PhyProfile {
    double T_e;       ///< empty-slot duration [s]
    double T_t;       ///< transmission-slot duration, frame + overheads + ACK [s]
    double l;         ///< payload length [bits]
    double T_beacon;  ///< beacon interval, one stage of the repeated game [s]

    void validate() const {
        if (!(T_e > 0.0) || !(T_e <= T_t))
            throw std::invalid_argument("PhyProfile: require 0 < T_e <= T_t");
        if (!(l > 0.0)) throw std::invalid_argument("PhyProfile: require l > 0");
        if (!(T_beacon > 0.0)) throw std::invalid_argument("PhyProfile: require T_beacon > 0");
    }
};

/// 802.11g OFDM timing for a 1500-byte payload at 54 Mbit/s, ACK at 24 Mbit/s.
///
/// Frame time is PLCP preamble+header (20 us) plus payload symbols (4 us
/// each, 216 data bits per symbol at 54 Mbit/s, 16 service + 6 tail bits).
/// T_t = DATA + SIFS + ACK + DIFS.
inline PhyProfile phy_80211g(double payload_bytes = 1500.0, double beacon_s = 0.1) {
    constexpr double sym = 4e-6;
    constexpr double plcp = 20e-6;
    constexpr double sifs = 10e-6;
    constexpr double difs = 28e-6;
    constexpr double mac_header_bytes = 34.0;
    constexpr double ack_bytes = 14.0;
    constexpr double service_tail_bits = 22.0;

    const double data_bits = 8.0 * (payload_bytes + mac_header_bytes) + service_tail_bits;
    const double t_data = plcp + std::ceil(data_bits / 216.0) * sym;
    const double ack_bits = 8.0 * ack_bytes + service_tail_bits;
    const double t_ack = plcp + std::ceil(ack_bits / 96.0) * sym;

    PhyProfile p;
    p.T_e = 9e-6;
    p.T_t = t_data + sifs + t_ack + difs;
    p.l = 8.0 * payload_bytes;
    p.T_beacon = beacon_s;
    p.validate();
    return p;
}

}  // namespace gas

#endif
