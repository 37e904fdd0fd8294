#include <catch2/catch_amalgamated.hpp>

#include "gas/phy.hpp"
#include "gas/verify.hpp"

using namespace gas;

TEST_CASE("check result slack accounting") {
    CheckResult r;
    r.name = "x";
    r.observe(2.0);
    CHECK(r.pass);
    CHECK(r.worst_margin == 2.0);
    r.observe(0.5);
    CHECK(r.worst_margin == 0.5);
    r.observe(-1.0);
    CHECK_FALSE(r.pass);
    CHECK(r.violations == 1);
    CHECK(r.worst_margin == -1.0);
    CHECK(r.samples == 3);
    nlohmann::json j = r.to_json();
    CHECK(j["pass"] == false);
    CHECK(j["violations"] == 1);
}

TEST_CASE("gap bound holds on a degenerate ball") {
    PhyProfile phy = phy_80211g();
    CheckResult r = check_theorem1_bound(5, 0.0, 100, phy);
    CHECK(r.pass);
    CHECK(r.violations == 0);
}

TEST_CASE("gap bound holds on sampled balls") {
    PhyProfile phy = phy_80211g();
    for (int n : {2, 3, 10}) {
        const double topt = solve_optimal(n, phy).tau_opt;
        for (double delta : {0.1 * topt, 0.5 * topt}) {
            CheckResult r = check_theorem1_bound(n, delta, 10000, phy);
            INFO("n=" << n << " delta=" << delta);
            CHECK(r.pass);
            CHECK(r.samples == 10002);  // samples plus the two corners
        }
    }
}

TEST_CASE("worst margin is monotone in the sample count") {
    PhyProfile phy = phy_80211g();
    CheckResult small = check_theorem1_bound(3, 0.01, 1000, phy, 5);
    CheckResult large = check_theorem1_bound(3, 0.01, 5000, phy, 5);
    CHECK(large.worst_margin <= small.worst_margin);
}

TEST_CASE("constrained sum-rate minimizer is symmetric") {
    PhyProfile phy = phy_80211g();
    // Constraint pins the corner: box [0.1, 0.4]^2 with p_e = 0.81 forces (0.1, 0.1).
    CheckResult pinned = check_lemma_equal_elements(2, 0.81, 1e-3, phy, 0.1, 0.4);
    CHECK(pinned.pass);

    CheckResult fine2 = check_lemma_equal_elements(2, 0.9025, 1e-5, phy, 0.0, 0.3);
    CHECK(fine2.pass);

    CheckResult interior3 = check_lemma_equal_elements(3, 0.857375, 1e-3, phy, 0.0, 0.3);
    CHECK(interior3.pass);

    CheckResult infeasible = check_lemma_equal_elements(2, 1e-6, 1e-3, phy, 0.0, 0.2);
    CHECK_FALSE(infeasible.pass);
    CHECK_THROWS_AS(check_lemma_equal_elements(5, 0.5, 1e-3, phy), std::invalid_argument);
}

TEST_CASE("diagonal sum-rate minimum sits at a box endpoint") {
    PhyProfile phy = phy_80211g();
    CHECK(check_boundary_minimizer(4, 0.2, 0.2, 1e-3, phy).pass);  // single point
    const double topt10 = solve_optimal(10, phy).tau_opt;
    CHECK(check_boundary_minimizer(10, topt10 / 2.0, 2.0 * topt10, 1e-5, phy).pass);
    CHECK(check_boundary_minimizer(2, 0.01, 0.99, 1e-4, phy).pass);
}

TEST_CASE("descent check accepts the default gain") {
    PhyProfile phy = phy_80211g();
    for (int n : {2, 10}) {
        OptimalPoint opt = solve_optimal(n, phy);
        CheckResult r = check_lyapunov_descent(n, 20, opt.gamma_max / 2.0, 10000, phy);
        INFO("n=" << n);
        CHECK(r.pass);
        CHECK(r.violations == 0);
    }
}

TEST_CASE("descent check rejects a tenfold gain") {
    PhyProfile phy = phy_80211g();
    OptimalPoint opt = solve_optimal(10, phy);
    CheckResult r = check_lyapunov_descent(10, 10, 10.0 * opt.gamma_max, 100, phy);
    CHECK_FALSE(r.pass);
    CHECK(r.violations > 0);
}

TEST_CASE("honest play earns exactly the optimum") {
    PhyProfile phy = phy_80211g();
    const int n = 5;
    OptimalPoint opt = solve_optimal(n, phy);
    const double g = opt.gamma_max / 2.0;
    AdversaryPolicy honest = [&](long, const StageReport&, const std::vector<GasState>&) {
        return opt.tau_opt;
    };
    const double avg = run_adversary_meanfield(n, opt, phy, g, 200, honest);
    CHECK(avg == Catch::Approx(opt.r_opt).epsilon(1e-9));
}

TEST_CASE("always-transmitting adversary is punished to the bound") {
    PhyProfile phy = phy_80211g();
    const int n = 5;
    OptimalPoint opt = solve_optimal(n, phy);
    const double g = opt.gamma_max / 2.0;
    AdversaryPolicy greedy_tau = [](long, const StageReport&, const std::vector<GasState>&) {
        return 1.0;
    };
    const double avg = run_adversary_meanfield(n, opt, phy, g, 20000, greedy_tau);
    CHECK(avg <= opt.r_opt * 1.01);
}

TEST_CASE("no adversary family beats the bound at a short horizon") {
    PhyProfile phy = phy_80211g();
    const int n = 5;
    for (AdversaryFamily fam : {AdversaryFamily::Gas, AdversaryFamily::StaticSweep,
                                AdversaryFamily::Adaptive, AdversaryFamily::RandomTau}) {
        CheckResult r = check_no_selfish_gain(n, fam, 5000, phy);
        INFO(r.params.dump());
        CHECK(r.pass);
        CHECK(r.params.contains("finite_horizon_slack_bps"));
    }
}

TEST_CASE("the bound survives restarts from arbitrary histories") {
    PhyProfile phy = phy_80211g();
    CheckResult r = check_no_selfish_gain(4, AdversaryFamily::StaticSweep, 4000, phy, 13,
                                          true, 10);
    CHECK(r.pass);
    CHECK(r.samples == 130);  // 13 windows x 10 histories
}
