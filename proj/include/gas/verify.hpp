#ifndef GAS_VERIFY_HPP
#define GAS_VERIFY_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "gas/analytic.hpp"
#include "gas/controller.hpp"
#include "gas/engine.hpp"
#include "gas/strategies.hpp"

namespace gas {

/// Outcome of one brute-force check. `worst_margin` is the smallest slack
/// seen (bound minus value); a negative slack is a violation, so the margin
/// is monotone non-increasing as the sample count grows.
struct CheckResult {
    std::string name;
    long samples = 0;
    long violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    bool pass = true;
    nlohmann::json params;

    void observe(double slack) {
        ++samples;
        if (slack < worst_margin) worst_margin = slack;
        if (slack < 0.0) ++violations;
        pass = violations == 0;
    }

    nlohmann::json to_json() const {
        return {{"name", name},          {"samples", samples}, {"violations", violations},
                {"worst_margin", worst_margin}, {"pass", pass},       {"params", params}};
    }
};

namespace detail {

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : s_(seed ^ 0x9e3779b97f4a7c15ull) {}
    double uniform() {
        std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return static_cast<double>((z ^ (z >> 31)) >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  private:
    std::uint64_t s_;
};

}  // namespace detail

/// D(tau) <= n * rho * Delta over the ball [tau_opt - Delta, tau_opt + Delta]^n
/// (intersected with [0,1]), sampled uniformly plus the two symmetric corners.
inline CheckResult check_theorem1_bound(int n, double delta, long samples, const PhyProfile& phy,
                                        std::uint64_t seed = 7) {
    OptimalPoint opt = solve_optimal(n, phy);
    CheckResult res;
    res.name = "theorem1_bound";
    res.params = {{"n", n}, {"delta", delta}, {"samples", samples}, {"seed", seed}};
    const double lo = std::max(0.0, opt.tau_opt - delta);
    const double hi = std::min(1.0, opt.tau_opt + delta);
    const double bound = n * opt.rho * delta + 1e-9;
    detail::Rng rng(seed);
    TauVector tau(static_cast<std::size_t>(n));

    auto eval = [&](const TauVector& t) {
        res.observe(bound - throughput_gap(t, opt, phy));
    };
    eval(TauVector(static_cast<std::size_t>(n), lo));
    eval(TauVector(static_cast<std::size_t>(n), hi));
    for (long s = 0; s < samples; ++s) {
        for (auto& t : tau) t = rng.uniform(lo, hi);
        eval(tau);
    }
    return res;
}

/// Appendix lemma: on the surface prod_j (1 - tau_j) = p_e inside the box,
/// the sum-rate minimizer has all elements equal. Exhaustive grid scan for
/// n in {2, 3}; tolerance scales with the grid step times the sensitivity rho.
inline CheckResult check_lemma_equal_elements(int n, double p_e, double grid_res,
                                              const PhyProfile& phy, double box_lo = 0.0,
                                              double box_hi = 1.0) {
    if (n != 2 && n != 3)
        throw std::invalid_argument("check_lemma_equal_elements: grid scan supports n in {2,3}");
    OptimalPoint opt = solve_optimal(n, phy);
    CheckResult res;
    res.name = "lemma_equal_elements";
    res.params = {{"n", n}, {"p_e", p_e}, {"grid_res", grid_res},
                  {"box", {box_lo, box_hi}}};

    const double tau_sym = 1.0 - std::pow(p_e, 1.0 / n);
    if (tau_sym < box_lo - 1e-12 || tau_sym > box_hi + 1e-12) {
        res.params["note"] = "infeasible p_e for symmetric interior point";
        res.pass = false;
        res.violations = 1;
        return res;
    }
    TauVector sym(static_cast<std::size_t>(n), tau_sym);
    const double sym_value = sum_throughput(sym, phy);
    const double tol = 2.0 * n * opt.rho * grid_res;

    TauVector tau(static_cast<std::size_t>(n));
    auto feasible_last = [&](double partial_prod) -> bool {
        const double last = 1.0 - p_e / partial_prod;
        if (last < box_lo - 1e-12 || last > box_hi + 1e-12) return false;
        tau[static_cast<std::size_t>(n) - 1] = std::min(box_hi, std::max(box_lo, last));
        return true;
    };

    if (n == 2) {
        for (double t1 = box_lo; t1 <= box_hi + 1e-15; t1 += grid_res) {
            tau[0] = std::min(t1, box_hi);
            if (tau[0] >= 1.0) continue;
            if (!feasible_last(1.0 - tau[0])) continue;
            res.observe(sum_throughput(tau, phy) - sym_value + tol);
        }
    } else {
        for (double t1 = box_lo; t1 <= box_hi + 1e-15; t1 += grid_res) {
            tau[0] = std::min(t1, box_hi);
            if (tau[0] >= 1.0) continue;
            for (double t2 = box_lo; t2 <= box_hi + 1e-15; t2 += grid_res) {
                tau[1] = std::min(t2, box_hi);
                if (tau[1] >= 1.0) continue;
                if (!feasible_last((1.0 - tau[0]) * (1.0 - tau[1]))) continue;
                res.observe(sum_throughput(tau, phy) - sym_value + tol);
            }
        }
    }
    return res;
}

/// Appendix lemma: over the symmetric diagonal of the box [tau_m, tau_M]^n
/// the sum-rate minimum sits at an endpoint.
inline CheckResult check_boundary_minimizer(int n, double tau_m, double tau_M, double grid_res,
                                            const PhyProfile& phy) {
    CheckResult res;
    res.name = "boundary_minimizer";
    res.params = {{"n", n}, {"box", {tau_m, tau_M}}, {"grid_res", grid_res}};
    auto diag = [&](double t) {
        TauVector tau(static_cast<std::size_t>(n), t);
        return sum_throughput(tau, phy);
    };
    const double end_min = std::min(diag(tau_m), diag(tau_M));
    const double tol = 1e-9 * std::max(1.0, std::abs(end_min));
    if (tau_m >= tau_M) {
        res.observe(tol);  // single point, trivially passes
        return res;
    }
    for (double t = tau_m; t <= tau_M + 1e-15; t += grid_res)
        res.observe(diag(std::min(t, tau_M)) - end_min + tol);
    return res;
}

/// Strict sup-norm descent of the expectation-mode dynamics for gamma below
/// the ceiling; also checks order preservation and max-decrease on D < 0
/// stages. A trajectory that fails to get below conv_tol within max_stages
/// counts as a violation.
///
/// The restoring force vanishes quadratically at the symmetric optimum (the
/// gap D is second order there), so the symmetric component contracts only
/// harmonically, like 1/stages; the envelope after 1e4 stages at gamma_max/2
/// is about 2.5e-3 in sup-norm across n <= 20 regardless of the start. The
/// default tolerance is that envelope with 2x headroom. Machine-precision
/// convergence is unreachable at any practical horizon.
inline CheckResult check_lyapunov_descent(int n, int starts, double gamma, long max_stages,
                                          const PhyProfile& phy, std::uint64_t seed = 11,
                                          double conv_tol = 5e-3) {
    OptimalPoint opt = solve_optimal(n, phy);
    CheckResult res;
    res.name = "lyapunov_descent";
    res.params = {{"n", n},          {"starts", starts}, {"gamma", gamma},
                  {"max_stages", max_stages}, {"seed", seed}, {"conv_tol", conv_tol}};
    detail::Rng rng(seed);

    for (int s = 0; s < starts; ++s) {
        std::vector<GasState> st;
        for (int i = 0; i < n; ++i) {
            // Half the starts sample the full [0,1] box to exercise the clamp.
            const double lo = (s % 2 == 0) ? opt.tau_opt / 2.0 : 0.0;
            st.push_back(GasState::make(static_cast<std::size_t>(i), gamma, opt,
                                        rng.uniform(lo, 1.0)));
        }
        auto supnorm = [&]() {
            double v = 0.0;
            for (const auto& g : st) v = std::max(v, std::abs(g.tau - opt.tau_opt));
            return v;
        };
        double v = supnorm();
        bool converged = v < conv_tol;
        TauVector tau_hat(static_cast<std::size_t>(n));
        for (long t = 0; t < max_stages && !converged; ++t) {
            for (int i = 0; i < n; ++i) tau_hat[i] = st[i].tau_hat;
            StageReport rep = run_stage_meanfield(tau_hat, phy, t);
            const double d = throughput_gap(tau_hat, opt, phy);
            double tau_M_before = -1.0;
            for (const auto& g : st) tau_M_before = std::max(tau_M_before, g.tau);
            std::vector<GasState> next;
            for (const auto& g : st) next.push_back(step(g, rep, opt));
            st = std::move(next);
            const double v_next = supnorm();
            res.observe(v - v_next);  // strict descent
            if (d < 0.0) {
                double tau_M_after = -1.0;
                for (const auto& g : st) tau_M_after = std::max(tau_M_after, g.tau);
                res.observe(tau_M_before - tau_M_after + 1e-15);  // max decrease
                for (const auto& g : st)  // order preservation
                    if (g.tau > tau_M_after + 1e-15) res.observe(-1.0);
            }
            v = v_next;
            converged = v < conv_tol;
        }
        if (!converged) res.observe(-1.0);
    }
    return res;
}

/// Selfish adversary families for the no-gain check.
enum class AdversaryFamily { Gas, StaticSweep, Adaptive, RandomTau, Greedy };

/// Selfish control policy: chooses the next tau given the stage index, the
/// last report, and the honest stations' current clamped probabilities.
using AdversaryPolicy =
    std::function<double(long, const StageReport&, const std::vector<GasState>&)>;

/// Long-run selfish throughput against n-1 GAS stations in expectation mode,
/// for the given time-varying control policy.
inline double run_adversary_meanfield(int n, const OptimalPoint& opt, const PhyProfile& phy,
                                      double gamma, long horizon, const AdversaryPolicy& policy,
                                      const TauVector* honest_init = nullptr) {
    std::vector<GasState> honest;
    for (int i = 1; i < n; ++i)
        honest.push_back(GasState::make(static_cast<std::size_t>(i), gamma, opt,
                                        honest_init ? (*honest_init)[i - 1] : -1.0));
    TauVector tau(static_cast<std::size_t>(n));
    StageReport rep;
    rep.throughputs.assign(static_cast<std::size_t>(n), opt.r_opt);
    double total = 0.0;
    double tau_s = policy(0, rep, honest);
    for (long t = 0; t < horizon; ++t) {
        tau[0] = std::min(1.0, std::max(0.0, tau_s));
        for (int i = 1; i < n; ++i) tau[i] = honest[i - 1].tau_hat;
        rep = run_stage_meanfield(tau, phy, t);
        total += rep.throughputs[0];
        for (auto& h : honest) h = step(h, rep, opt);
        tau_s = policy(t + 1, rep, honest);
    }
    return total / horizon;
}

/// Theorem coverage: any strategy family earns at most r_opt * (1 + eps) in
/// the long run; the subgame variant restarts from random mid-game histories.
/// The O(1/T) finite-horizon slack from the proof is reported in params.
inline CheckResult check_no_selfish_gain(int n, AdversaryFamily family, long horizon,
                                         const PhyProfile& phy, std::uint64_t seed = 13,
                                         bool subgame = false, int subgame_histories = 100) {
    OptimalPoint opt = solve_optimal(n, phy);
    const double gamma = opt.gamma_max / 2.0;
    const double eps = 0.01;
    const double bound = opt.r_opt * (1.0 + eps);
    CheckResult res;
    res.name = "no_selfish_gain";
    res.params = {{"n", n}, {"horizon", horizon}, {"seed", seed},
                  {"eps", eps}, {"subgame", subgame}};
    res.params["family"] = family == AdversaryFamily::Gas          ? "gas"
                           : family == AdversaryFamily::StaticSweep ? "static_sweep"
                           : family == AdversaryFamily::Adaptive    ? "adaptive"
                           : family == AdversaryFamily::RandomTau   ? "random_tau"
                                                                    : "greedy";
    res.params["finite_horizon_slack_bps"] =
        (tau_max_bound(n, gamma, opt, phy) - opt.tau_opt) / (gamma * horizon);
    detail::Rng rng(seed);

    std::vector<AdversaryPolicy> policies;
    switch (family) {
        case AdversaryFamily::Gas: {
            auto st = std::make_shared<GasState>(GasState::make(0, gamma, opt));
            policies.push_back([st, opt](long t, const StageReport& rep,
                                         const std::vector<GasState>&) {
                if (t > 0) *st = step(*st, rep, opt);
                return st->tau_hat;
            });
            break;
        }
        case AdversaryFamily::StaticSweep: {
            for (double cw : {1.0, 2.0, 3.0, 5.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0,
                              1023.0, std::round(opt.cw_opt)})
                policies.push_back([cw](long, const StageReport&, const std::vector<GasState>&) {
                    return cw_to_tau(cw);
                });
            break;
        }
        case AdversaryFamily::Adaptive: {
            for (auto kind : {StrategySpec::Kind::Adaptive1, StrategySpec::Kind::Adaptive2,
                              StrategySpec::Kind::Adaptive3}) {
                StrategySpec sp;
                sp.kind = kind;
                auto st = std::make_shared<Station>(0, sp, opt, gamma);
                policies.push_back([st, opt](long t, const StageReport& rep,
                                             const std::vector<GasState>&) {
                    if (t > 0) st->decide(rep, opt);
                    return st->tau_for_meanfield();
                });
            }
            break;
        }
        case AdversaryFamily::RandomTau: {
            for (int k = 0; k < 5; ++k) {
                auto r = std::make_shared<detail::Rng>(seed + 1000 + k);
                policies.push_back(
                    [r](long, const StageReport&, const std::vector<GasState>&) {
                        return r->uniform();
                    });
            }
            break;
        }
        case AdversaryFamily::Greedy: {
            // One-step lookahead over a 1e-3 tau grid: pick the tau that
            // maximizes next-stage selfish throughput after the honest
            // stations respond to it.
            policies.push_back([n, opt, &phy](long, const StageReport&,
                                              const std::vector<GasState>& honest) {
                TauVector tau(static_cast<std::size_t>(n));
                double best_tau = 1e-3, best_val = -1.0;
                for (int k = 1; k <= 1000; ++k) {
                    const double cand = k * 1e-3;
                    tau[0] = cand;
                    for (int i = 1; i < n; ++i) tau[i] = honest[i - 1].tau_hat;
                    StageReport rep_cand = run_stage_meanfield(tau, phy, 0);
                    for (int i = 1; i < n; ++i)
                        tau[i] = step(honest[i - 1], rep_cand, opt).tau_hat;
                    const double v = station_throughput(0, tau, phy);
                    if (v > best_val) {
                        best_val = v;
                        best_tau = cand;
                    }
                }
                return best_tau;
            });
            break;
        }
    }

    const int reps = subgame ? subgame_histories : 1;
    for (const auto& pol : policies) {
        for (int h = 0; h < reps; ++h) {
            TauVector honest_init;
            const TauVector* init_ptr = nullptr;
            if (subgame) {
                honest_init.resize(static_cast<std::size_t>(n - 1));
                for (auto& v : honest_init) v = rng.uniform();
                init_ptr = &honest_init;
            }
            const double avg = run_adversary_meanfield(n, opt, phy, gamma, horizon, pol, init_ptr);
            res.observe(bound - avg);
        }
    }
    return res;
}

}  // namespace gas

#endif
