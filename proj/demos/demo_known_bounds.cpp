// Copyright (c) 2026 arxnet contributors
// SPDX-License-Identifier: MIT
//
// End-to-end walkthrough of the known-bound pipeline: four sensors on a ring
// share one ARX plant (orders (2,1), b = [1.2, -0.5], c = [1.0]) and jointly
// estimate its order and parameters from noisy local data.  Each sensor runs
// a bank of fused least-squares estimators, one per candidate order inside
// the bound box [0..4] x [0..4], and picks the order minimising a penalised
// fit criterion.  The demo prints how the per-sensor selections settle over
// time, the final parameter estimates, and the excitation diagnostics.
//
// Usage: demo_known_bounds [output-dir]   (default: demo_known_bounds_out)

#include <iomanip>
#include <iostream>
#include <map>
#include <string>

#include "arxnet/harness.hpp"

int main(int argc, char** argv) try {
    using namespace arxnet;

    const std::string out_dir = argc > 1 ? argv[1] : "demo_known_bounds_out";
    const ExperimentConfig cfg = parse_config(nlohmann::json::parse(R"({
        "system": {"p0": 2, "q0": 1, "b": [1.2, -0.5], "c": [1.0]},
        "topology": {"kind": "ring", "n": 4},
        "signals": {"input": {"kind": "iid_gaussian", "sigma_u": 1.0},
                    "noise": {"kind": "iid_gaussian", "sigma_w": 0.5}},
        "horizon": 1000,
        "seed": 7,
        "case": 1,
        "bounds": {"p_star": 4, "q_star": 4},
        "schedule": {"a_t": {"kind": "power", "rho": 0.6}},
        "gamma": 100.0
    })"));

    std::cout << "Known-bound identification demo\n"
              << "  plant: y(t+1) = 1.2 y(t) - 0.5 y(t-1) + u(t) + noise\n"
              << "  network: 4 sensors on a ring, Metropolis fusion weights\n"
              << "  search box: p in 0..4, q in 0..4; penalty gain t^0.6\n"
              << "  horizon: " << cfg.horizon << " steps, seed " << cfg.seed << "\n\n";

    const RunResult res = run_experiment(cfg, out_dir);

    // Joint selections at a few checkpoints.
    std::map<std::pair<long, int>, std::pair<int, int>> joint;
    for (const auto& row : res.selection)
        if (row.kind == SelectionKind::joint)
            joint[{row.t, row.sensor}] = {row.p_hat, row.q_hat};

    std::cout << "Selected order (p,q) per sensor over time (joint search):\n";
    std::cout << "      t |";
    for (int i = 0; i < res.topology.n; ++i) std::cout << "  sensor " << (i + 1) << " |";
    std::cout << "\n";
    for (long t : {5L, 20L, 50L, 100L, 250L, 500L, 1000L}) {
        std::cout << "  " << std::setw(5) << t << " |";
        for (int i = 0; i < res.topology.n; ++i) {
            const auto [p, q] = joint.at({t, i});
            std::cout << "     (" << p << "," << q << ") |";
        }
        std::cout << "\n";
    }

    std::cout << "\nFinal estimates at t = " << cfg.horizon << ":\n";
    for (const auto& fin : res.final_states) {
        std::cout << "  sensor " << (fin.sensor + 1) << ": order (" << fin.primary.p_hat << ","
                  << fin.primary.q_hat << ")";
        if (fin.decoupled)
            std::cout << ", decoupled (" << fin.decoupled->p_hat << "," << fin.decoupled->q_hat
                      << ")";
        std::cout << ", theta = [";
        for (int k = 0; k < fin.theta_selected.size(); ++k)
            std::cout << (k ? ", " : "") << std::fixed << std::setprecision(4)
                      << fin.theta_selected(k);
        std::cout << "], error " << std::scientific << std::setprecision(2) << fin.theta_error
                  << "\n";
    }
    std::cout << "  (truth: [1.2, -0.5, 1.0] at order (2,1))\n";

    std::cout << "\nExcitation diagnostics (a downward ratio trend supports the\n"
              << "conditions the convergence guarantees rest on):\n";
    for (const auto& v : res.excitation.verdicts) {
        std::cout << "  probe (" << v.p << "," << v.q << "): log-log slopes " << std::fixed
                  << std::setprecision(3) << v.slope1 << " / " << v.slope2 << " -> "
                  << ((v.enough_data && v.trending1 && v.trending2) ? "satisfied in trend"
                                                                    : "not established")
                  << "\n";
    }

    std::cout << "\nArtifacts written to " << out_dir << "/:\n";
    for (const auto& f : res.files_written) std::cout << "  " << f << "\n";
    std::cout << "\nDone in " << std::fixed << std::setprecision(2) << res.wall_seconds << " s.\n";
    return 0;
} catch (const std::exception& e) {
    std::cerr << "demo_known_bounds: " << e.what() << "\n";
    return 1;
}
