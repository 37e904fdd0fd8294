#ifndef GAS_ANALYTIC_HPP
#define GAS_ANALYTIC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gas/phy.hpp"

namespace gas {

/// Per-station transmission probabilities, one entry per active station.
using TauVector = std::vector<double>;

/// Average slot duration T_s = T_t + (T_e - T_t) * prod_j (1 - tau_j).
inline double slot_duration(const TauVector& tau_hat, const PhyProfile& phy) {
    double p_empty = 1.0;
    for (double t : tau_hat) p_empty *= (1.0 - t);
    return phy.T_t + (phy.T_e - phy.T_t) * p_empty;
}

/// Throughput of station i [bits/s]: r_i = (l / T_s) * tau_i * prod_{j!=i} (1 - tau_j).
inline double station_throughput(std::size_t i, const TauVector& tau_hat, const PhyProfile& phy) {
    if (i >= tau_hat.size()) throw std::out_of_range("station_throughput: station index");
    double prod = 1.0;
    for (std::size_t j = 0; j < tau_hat.size(); ++j)
        if (j != i) prod *= (1.0 - tau_hat[j]);
    return phy.l / slot_duration(tau_hat, phy) * tau_hat[i] * prod;
}

/// Second algebraic form of the throughput, valid for tau_i < 1:
/// r_i = tau_i / (1 - tau_i) * (l / T_s) * prod_j (1 - tau_j).
inline double station_throughput_alt(std::size_t i, const TauVector& tau_hat,
                                     const PhyProfile& phy) {
    if (i >= tau_hat.size()) throw std::out_of_range("station_throughput_alt: station index");
    double prod = 1.0;
    for (double t : tau_hat) prod *= (1.0 - t);
    return tau_hat[i] / (1.0 - tau_hat[i]) * phy.l / slot_duration(tau_hat, phy) * prod;
}

inline double sum_throughput(const TauVector& tau_hat, const PhyProfile& phy) {
    double s = 0.0;
    for (std::size_t i = 0; i < tau_hat.size(); ++i) s += station_throughput(i, tau_hat, phy);
    return s;
}

/// Unique root in (0, 1/n) of (1 - n*tau) / (1 - tau)^n = 1 - T_e/T_t.
///
/// The LHS decreases monotonically from 1 to 0 on (0, 1/n), so bracketing
/// bisection converges unconditionally. The boundary case T_e = T_t gives
/// tau = 1/n exactly.
inline double solve_tau_opt(int n, const PhyProfile& phy) {
    if (n < 2) throw std::invalid_argument("solve_tau_opt: require n >= 2");
    if (phy.T_e > phy.T_t) throw std::invalid_argument("solve_tau_opt: require T_e <= T_t");
    if (phy.T_e == phy.T_t) return 1.0 / n;

    const double rhs = 1.0 - phy.T_e / phy.T_t;
    auto residual = [&](double tau) {
        return (1.0 - n * tau) / std::pow(1.0 - tau, n) - rhs;
    };
    double lo = 1e-15, hi = 1.0 / n - 1e-15;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (residual(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Closed-form approximation CW_opt ~= n * sqrt(2 T_t / T_e) - 1,
/// accurate when T_e/T_t is small.
inline double cw_opt_approx(int n, const PhyProfile& phy) {
    if (n < 2) throw std::invalid_argument("cw_opt_approx: require n >= 2");
    return n * std::sqrt(2.0 * phy.T_t / phy.T_e) - 1.0;
}

/// The symmetric optimum and every constant derived from it.
struct OptimalPoint {
    int n = 0;
    double tau_opt = 0.0;            ///< symmetric transmission probability
    double cw_opt = 0.0;             ///< 2/tau_opt - 1
    double r_opt = 0.0;              ///< per-station throughput at the optimum [bits/s]
    double rho = 0.0;                ///< r_opt / (tau_opt (1 - tau_opt)) [bits/s]
    double T_opt = 0.0;              ///< slot duration at the symmetric optimum [s]
    double T_m = 0.0;                ///< conservative slot duration, all stations at tau_opt/2 [s]
    double gamma_max = 0.0;          ///< operative stability ceiling (min of the two proof bounds)
    double gamma_max_theorem = 0.0;  ///< theorem-statement value, T_opt form (reporting only)
};

/// Solve the fixed point and assemble all derived constants.
///
/// gamma_max takes the conservative T_m form and is additionally capped by
/// the (n-1)l/T_m * (1 - tau_opt/2)^(n-2) + rho bound; the T_opt form is
/// exposed separately.
inline OptimalPoint solve_optimal(int n, const PhyProfile& phy) {
    OptimalPoint opt;
    opt.n = n;
    opt.tau_opt = solve_tau_opt(n, phy);
    opt.cw_opt = 2.0 / opt.tau_opt - 1.0;
    TauVector sym(static_cast<std::size_t>(n), opt.tau_opt);
    opt.T_opt = slot_duration(sym, phy);
    opt.r_opt = station_throughput(0, sym, phy);
    opt.rho = opt.r_opt / (opt.tau_opt * (1.0 - opt.tau_opt));
    opt.T_m = phy.T_t + (phy.T_e - phy.T_t) * std::pow(1.0 - opt.tau_opt / 2.0, n);
    const double pw = std::pow(1.0 - opt.tau_opt / 2.0, n - 2);
    const double g_full = 1.0 / (n * phy.l / opt.T_m * pw);
    const double g_rho = 1.0 / ((n - 1) * phy.l / opt.T_m * pw + opt.rho);
    opt.gamma_max = std::min(g_full, g_rho);
    opt.gamma_max_theorem = 1.0 / (n * phy.l / opt.T_opt * pw);
    return opt;
}

/// Throughput gap D(tau) = n * r_opt - sum_j r_j(tau). May be negative.
inline double throughput_gap(const TauVector& tau_hat, const OptimalPoint& opt,
                             const PhyProfile& phy) {
    return opt.n * opt.r_opt - sum_throughput(tau_hat, phy);
}

/// Upper bound on the unclamped control variable along any trajectory
/// (one-stage travel added to the clamp ceiling), with C = l/T_t taken as
/// the channel capacity.
inline double tau_max_bound(int n, double gamma, const OptimalPoint& opt, const PhyProfile& phy) {
    const double cap = phy.l / phy.T_t;
    return 1.0 + gamma * std::max(cap + opt.r_opt, n * (cap - opt.r_opt) / (n - 1.0));
}

namespace detail {

/// Solve tau for stations in `free_idx` so that each delivers its offered
/// rate, holding the other entries of `tau` fixed. Each station's throughput
/// is monotone increasing in its own tau, so per-station bisection inside a
/// best-response sweep converges; starting the free entries from zero walks
/// up to the least (stable) fixed point. tau entries for free stations are
/// capped at `tau_cap` (the access rate of the station's configured window);
/// a station whose load is unreachable stays saturated at the cap.
///
/// Returns true when every offered load is actually served.
inline bool solve_offered_taus(TauVector& tau, const std::vector<std::size_t>& free_idx,
                               const std::vector<double>& offered, double tau_cap,
                               const PhyProfile& phy) {
    for (std::size_t i : free_idx) tau[i] = 0.0;
    for (int sweep = 0; sweep < 500; ++sweep) {
        double worst = 0.0;
        for (std::size_t k = 0; k < free_idx.size(); ++k) {
            const std::size_t i = free_idx[k];
            const double prev = tau[i];
            double lo = 0.0, hi = tau_cap;
            tau[i] = hi;
            if (station_throughput(i, tau, phy) > offered[k]) {
                for (int it = 0; it < 60; ++it) {
                    double mid = 0.5 * (lo + hi);
                    tau[i] = mid;
                    (station_throughput(i, tau, phy) < offered[k] ? lo : hi) = mid;
                }
                tau[i] = 0.5 * (lo + hi);
            }
            worst = std::max(worst, std::abs(tau[i] - prev));
        }
        if (worst < 1e-14) break;
    }
    for (std::size_t k = 0; k < free_idx.size(); ++k) {
        const double got = station_throughput(free_idx[k], tau, phy);
        if (got < offered[k] - 1e-6 * std::max(offered[k], 1.0)) return false;
    }
    return true;
}

}  // namespace detail

/// Optimal configuration for a WLAN with n_sat saturated stations plus
/// stations with declared offered loads [bits/s].
///
/// The saturated stations share one transmission probability; it is chosen
/// to maximize their per-station throughput subject to the load-serving
/// stations actually delivering their declared rates (coarse scan over
/// (0, tau_opt(n_sat)] followed by golden-section refinement).
inline OptimalPoint solve_optimal_mixed(int n_sat, const std::vector<double>& offered,
                                        const PhyProfile& phy) {
    if (n_sat < 2) throw std::invalid_argument("solve_optimal_mixed: require n_sat >= 2");
    OptimalPoint base = solve_optimal(n_sat, phy);
    if (offered.empty()) return base;

    std::vector<std::size_t> free_idx;
    for (std::size_t k = 0; k < offered.size(); ++k)
        free_idx.push_back(static_cast<std::size_t>(n_sat) + k);

    // Saturated per-station throughput with the loads served; -1 if the
    // loads cannot be served at this saturated setting.
    auto r_sat = [&](double tau_sat) {
        TauVector tau(static_cast<std::size_t>(n_sat) + offered.size(), tau_sat);
        if (!detail::solve_offered_taus(tau, free_idx, offered, 1.0, phy)) return -1.0;
        return station_throughput(0, tau, phy);
    };

    const int grid = 128;
    double best_tau = -1.0, best_val = -1.0;
    for (int k = 1; k <= grid; ++k) {
        const double t = base.tau_opt * k / grid;
        const double v = r_sat(t);
        if (v > best_val) {
            best_val = v;
            best_tau = t;
        }
    }
    if (best_tau < 0.0)
        throw std::invalid_argument("solve_optimal_mixed: offered loads are not servable");
    double lo = std::max(0.0, best_tau - base.tau_opt / grid);
    double hi = std::min(base.tau_opt, best_tau + base.tau_opt / grid);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
    double fa = r_sat(a), fb = r_sat(b);
    for (int it = 0; it < 60; ++it) {
        if (fa < fb) {
            lo = a;
            a = b;
            fa = fb;
            b = lo + gr * (hi - lo);
            fb = r_sat(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - gr * (hi - lo);
            fa = r_sat(a);
        }
    }
    const double tau_sat = 0.5 * (lo + hi);

    OptimalPoint opt = base;
    opt.tau_opt = tau_sat;
    opt.cw_opt = 2.0 / tau_sat - 1.0;
    // r_opt at the mixed point: saturated stations at tau_sat, others serving load.
    TauVector tau(static_cast<std::size_t>(n_sat) + offered.size(), tau_sat);
    detail::solve_offered_taus(tau, free_idx, offered, 1.0, phy);
    opt.T_opt = slot_duration(tau, phy);
    opt.r_opt = station_throughput(0, tau, phy);
    opt.rho = opt.r_opt / (tau_sat * (1.0 - tau_sat));
    opt.T_m = phy.T_t + (phy.T_e - phy.T_t) * std::pow(1.0 - tau_sat / 2.0, n_sat);
    const double pw = std::pow(1.0 - tau_sat / 2.0, n_sat - 2);
    const double g_full = 1.0 / (n_sat * phy.l / opt.T_m * pw);
    const double g_rho = 1.0 / ((n_sat - 1) * phy.l / opt.T_m * pw + opt.rho);
    opt.gamma_max = std::min(g_full, g_rho);
    opt.gamma_max_theorem = 1.0 / (n_sat * phy.l / opt.T_opt * pw);
    return opt;
}

}  // namespace gas

#endif
