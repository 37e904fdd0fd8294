// Command-line front end: run scenario files, sweep selfish windows,
// execute the verification suites, or print the derived constants.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gas/analytic.hpp"
#include "gas/phy.hpp"
#include "gas/scenario.hpp"
#include "gas/strategies.hpp"
#include "gas/verify.hpp"

using nlohmann::json;

namespace {

struct CommonOpts {
    std::uint64_t seed = 0;  // 0 = keep the scenario's own seed
    bool seed_set = false;
    std::string fidelity;  // empty = keep the scenario's own
    std::string out;
    std::string format = "csv";
    int replications = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "Override the random seed")
        ->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_option("--fidelity", o.fidelity, "Override fidelity: meanfield | slot")
        ->check(CLI::IsMember({"meanfield", "slot"}));
    cmd->add_option("--out", o.out, "Output path (default: stdout)");
    cmd->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--replications", o.replications, "Independent replications")
        ->check(CLI::PositiveNumber);
}

void apply_overrides(gas::ScenarioSpec& spec, const CommonOpts& o) {
    if (o.seed_set) spec.seed = o.seed;
    if (o.fidelity == "meanfield") spec.fidelity = gas::Fidelity::MeanField;
    if (o.fidelity == "slot") spec.fidelity = gas::Fidelity::Slot;
}

void emit_run(const gas::RunOutput& out, const CommonOpts& o) {
    const std::string path = o.out.empty() ? "/dev/stdout" : o.out;
    if (o.format == "json")
        gas::emit_json(out, path);
    else
        gas::emit_csv(out, path);
}

int cmd_run(const std::string& scenario_path, const CommonOpts& o) {
    gas::ScenarioSpec spec = gas::load_scenario(scenario_path);
    apply_overrides(spec, o);
    gas::RunOutput out =
        o.replications > 1 ? gas::replicate(spec, o.replications) : gas::run(spec);
    emit_run(out, o);
    std::size_t n = out.mean_throughput.size();
    for (std::size_t i = 0; i < n; ++i)
        std::fprintf(stderr, "station %zu: mean %.1f bit/s (stddev %.1f)\n", i,
                     out.mean_throughput[i], out.stddev_throughput[i]);
    return 0;
}

int cmd_sweep(int n, double cw_from, double cw_to, int warmup, int avg, const CommonOpts& o) {
    gas::PhyProfile phy = gas::phy_80211g();
    gas::OptimalPoint opt = gas::solve_optimal(n, phy);
    const double gamma = opt.gamma_max / 2.0;
    const bool slot = o.fidelity == "slot";
    const std::uint64_t seed = o.seed_set ? o.seed : 1;

    std::FILE* f = o.out.empty() ? stdout : std::fopen(o.out.c_str(), "wb");
    if (!f) {
        std::fprintf(stderr, "cannot open %s\n", o.out.c_str());
        return 1;
    }
    std::fputs("cw,selfish_bps,honest_bps\n", f);
    for (double cw = cw_from; cw <= cw_to; cw += 1.0) {
        gas::EdcaParams p;
        p.cw_min = cw;
        gas::SelfishRunResult r =
            slot ? gas::run_static_selfish_slot(n, p, opt, phy, gamma, seed, warmup, avg)
                 : gas::run_static_selfish_meanfield(n, p, opt, phy, gamma, warmup, avg);
        std::fprintf(f, "%.17g,%.17g,%.17g\n", cw, r.selfish_avg, r.honest_avg);
    }
    if (!o.out.empty()) std::fclose(f);
    return 0;
}

int cmd_verify(const CommonOpts& o) {
    gas::PhyProfile phy = gas::phy_80211g();
    const std::uint64_t seed = o.seed_set ? o.seed : 7;
    std::vector<gas::CheckResult> results;

    for (int n : {2, 3, 5, 10}) {
        const double topt = gas::solve_optimal(n, phy).tau_opt;
        for (double frac : {0.1, 0.5})
            results.push_back(gas::check_theorem1_bound(n, frac * topt, 20000, phy, seed));
    }
    results.push_back(gas::check_lemma_equal_elements(2, 0.9025, 1e-5, phy, 0.0, 0.3));
    results.push_back(gas::check_lemma_equal_elements(3, 0.857375, 1e-3, phy, 0.0, 0.3));
    {
        const double topt = gas::solve_optimal(10, phy).tau_opt;
        results.push_back(gas::check_boundary_minimizer(10, topt / 2.0, 2.0 * topt, 1e-5, phy));
        results.push_back(gas::check_boundary_minimizer(2, 0.01, 0.99, 1e-4, phy));
    }
    for (int n : {2, 5, 10, 20}) {
        gas::OptimalPoint opt = gas::solve_optimal(n, phy);
        results.push_back(
            gas::check_lyapunov_descent(n, 25, opt.gamma_max / 2.0, 10000, phy, seed));
    }
    for (auto fam : {gas::AdversaryFamily::Gas, gas::AdversaryFamily::StaticSweep,
                     gas::AdversaryFamily::Adaptive, gas::AdversaryFamily::RandomTau})
        results.push_back(gas::check_no_selfish_gain(10, fam, 10000, phy, seed));

    json all = json::array();
    bool ok = true;
    for (const auto& r : results) {
        all.push_back(r.to_json());
        ok = ok && r.pass;
        std::fprintf(stderr, "%-22s %-12s samples=%-8ld violations=%-6ld margin=%g\n",
                     r.name.c_str(), r.pass ? "pass" : "FAIL", r.samples, r.violations,
                     r.worst_margin);
    }
    if (!o.out.empty()) {
        std::ofstream f(o.out, std::ios::binary);
        f << all.dump(2) << "\n";
    } else {
        std::cout << all.dump(2) << "\n";
    }
    return ok ? 0 : 1;
}

int cmd_calc(int n, double payload_bytes) {
    gas::PhyProfile phy = gas::phy_80211g(payload_bytes);
    gas::OptimalPoint opt = gas::solve_optimal(n, phy);
    json j = {{"n", n},
              {"T_e_s", phy.T_e},
              {"T_t_s", phy.T_t},
              {"l_bits", phy.l},
              {"tau_opt", opt.tau_opt},
              {"cw_opt", opt.cw_opt},
              {"cw_opt_approx", gas::cw_opt_approx(n, phy)},
              {"r_opt_bps", opt.r_opt},
              {"rho_bps", opt.rho},
              {"gamma_max", opt.gamma_max},
              {"gamma_max_theorem_form", opt.gamma_max_theorem},
              {"gamma_default", opt.gamma_max / 2.0}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive contention-window simulator and analysis tool"};
    app.require_subcommand(1);

    CommonOpts run_o, sweep_o, verify_o;
    std::string scenario_path;
    auto* run_cmd = app.add_subcommand("run", "Execute a scenario file");
    run_cmd->add_option("scenario", scenario_path, "Scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    add_common(run_cmd, run_o);

    int sweep_n = 10, sweep_warmup = 200, sweep_avg = 1000;
    double cw_from = 1.0, cw_to = 1023.0;
    auto* sweep_cmd = app.add_subcommand(
        "sweep", "Sweep a fixed selfish window against adaptive peers");
    sweep_cmd->add_option("--n", sweep_n, "Station count")->check(CLI::Range(2, 1000));
    sweep_cmd->add_option("--cw-from", cw_from, "First window");
    sweep_cmd->add_option("--cw-to", cw_to, "Last window");
    sweep_cmd->add_option("--warmup", sweep_warmup, "Warm-up stages discarded");
    sweep_cmd->add_option("--avg", sweep_avg, "Stages averaged");
    add_common(sweep_cmd, sweep_o);

    auto* verify_cmd = app.add_subcommand("verify", "Run the property-check suites");
    add_common(verify_cmd, verify_o);

    int calc_n = 10;
    double calc_payload = 1500.0;
    auto* calc_cmd = app.add_subcommand("calc", "Print the derived constants");
    calc_cmd->add_option("--n", calc_n, "Station count")->check(CLI::Range(2, 1000));
    calc_cmd->add_option("--payload-bytes", calc_payload, "Payload size in bytes");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(scenario_path, run_o);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_n, cw_from, cw_to, sweep_warmup, sweep_avg, sweep_o);
        if (verify_cmd->parsed()) return cmd_verify(verify_o);
        if (calc_cmd->parsed()) return cmd_calc(calc_n, calc_payload);
    } catch (const std::exception& e) {
        json err = {{"error", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    }
    return 0;
}
