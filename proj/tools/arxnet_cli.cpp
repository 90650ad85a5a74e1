// Copyright (c) 2026 arxnet contributors
// SPDX-License-Identifier: MIT
//
// Command-line front end for the arxnet library.
//
// Verbs:
//   simulate  generate sensor traces only
//   run       full identification pipeline (orders, parameters, diagnostics)
//   diagnose  excitation-condition report only
//   verify    redundant-identity verification on a small configuration
//
// Exit codes: 0 success, 1 validation error, 2 numeric failure,
// 3 redundant-check mismatch.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "arxnet/harness.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed_override;
    std::optional<int> case_override;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool needs_out) {
    cmd->add_option("--config", opt.config_path, "experiment configuration JSON")
        ->required()
        ->check(CLI::ExistingFile);
    auto* out = cmd->add_option("--out", opt.out_dir, "output directory for CSV files");
    if (needs_out) out->required();
    cmd->add_option("--seed", opt.seed_override, "override the config seed");
    cmd->add_option("--case", opt.case_override, "override the identification case (1 or 2)")
        ->check(CLI::IsMember({1, 2}));
}

arxnet::ExperimentConfig load(const CommonOptions& opt) {
    arxnet::ExperimentConfig cfg = arxnet::load_config(opt.config_path);
    if (opt.seed_override) cfg.seed = *opt.seed_override;
    if (opt.case_override) cfg.identification_case = *opt.case_override;
    cfg.validate();
    return cfg;
}

std::ofstream open_output(const std::string& dir, const char* name) {
    std::filesystem::create_directories(dir);
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw arxnet::ValidationError("cannot open output file: " + path);
    return os;
}

int run_simulate(const CommonOptions& opt) {
    const arxnet::ExperimentConfig cfg = load(opt);
    const arxnet::Topology topo = cfg.topology.build();
    const arxnet::SensorTraces traces =
        arxnet::SensorTraces::simulate(cfg.system, cfg.signals, topo.n, cfg.horizon, cfg.seed);
    auto os = open_output(opt.out_dir, "traces.csv");
    traces.to_csv(os);
    std::cout << "wrote " << opt.out_dir << "/traces.csv (" << topo.n << " sensors, horizon "
              << cfg.horizon << ")\n";
    return 0;
}

int run_pipeline(const CommonOptions& opt) {
    const arxnet::ExperimentConfig cfg = load(opt);
    const arxnet::RunResult result = arxnet::run_experiment(cfg, opt.out_dir);
    for (const auto& f : result.files_written) std::cout << "wrote " << f << "\n";
    for (const auto& fin : result.final_states) {
        std::cout << "sensor " << (fin.sensor + 1) << ": order (" << fin.primary.p_hat << ","
                  << fin.primary.q_hat << ")";
        if (fin.primary.m_hat >= 0) std::cout << " m_hat " << fin.primary.m_hat;
        std::cout << " parameter error " << arxnet::format_double(fin.theta_error) << "\n";
    }
    std::cout << "completed in " << arxnet::format_double(result.wall_seconds) << " s\n";

    if (cfg.oracle_checks) {
        const arxnet::VerificationReport report = arxnet::oracle_verify(cfg);
        auto os = open_output(opt.out_dir, "verification.csv");
        report.to_csv(os);
        std::cout << "wrote " << opt.out_dir << "/verification.csv\n";
        if (!report.all_pass())
            throw arxnet::OracleMismatchError("redundant checks failed; see verification.csv");
    }
    return 0;
}

int run_diagnose(const CommonOptions& opt) {
    const arxnet::ExperimentConfig cfg = load(opt);
    const arxnet::Topology topo = cfg.topology.build();
    const arxnet::SensorTraces traces =
        arxnet::SensorTraces::simulate(cfg.system, cfg.signals, topo.n, cfg.horizon, cfg.seed);

    arxnet::ExcitationReport report;
    if (cfg.identification_case == 1) {
        report = arxnet::condition_report_case1(
            traces, topo, cfg.effective_probes(), cfg.p_star, cfg.q_star, cfg.a_t, cfg.gamma,
            cfg.effective_offset(topo.diameter), cfg.effective_excitation_stride());
    } else {
        const int m0 = std::max(cfg.system.p0, cfg.system.q0);
        arxnet::EtaSchedule eta;
        eta.kind = arxnet::EtaSchedule::Kind::sqrt_log;
        for (const auto& nm : cfg.signals.noises)
            if (nm.kind == arxnet::NoiseModel::Kind::heavy_tailed_truncated) eta = nm.eta;
        report = arxnet::condition_report_case2(traces, topo, m0, cfg.a_bar, cfg.h, eta,
                                                cfg.gamma, cfg.effective_offset(topo.diameter),
                                                cfg.effective_excitation_stride());
    }

    {
        auto os = open_output(opt.out_dir, "traces.csv");
        traces.to_csv(os);
    }
    {
        auto os = open_output(opt.out_dir, "excitation.csv");
        report.to_csv(os, topo.n);
    }
    std::cout << "wrote " << opt.out_dir << "/traces.csv and " << opt.out_dir
              << "/excitation.csv\n";
    for (const auto& v : report.verdicts)
        std::cout << "probe (" << v.p << "," << v.q << "): log-slope ratio1 "
                  << arxnet::format_double(v.slope1) << " (trending "
                  << (v.trending1 ? "yes" : "no") << "), ratio2 "
                  << arxnet::format_double(v.slope2) << " (trending "
                  << (v.trending2 ? "yes" : "no") << ")\n";
    return 0;
}

int run_verify(const CommonOptions& opt) {
    const arxnet::ExperimentConfig cfg = load(opt);
    const arxnet::VerificationReport report = arxnet::oracle_verify(cfg);
    if (!opt.out_dir.empty()) {
        auto os = open_output(opt.out_dir, "verification.csv");
        report.to_csv(os);
    }
    for (const auto& c : report.checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " residual "
                  << arxnet::format_double(c.max_residual) << " tolerance "
                  << arxnet::format_double(c.tolerance) << "\n";
    if (!report.all_pass())
        throw arxnet::OracleMismatchError("redundant checks failed");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed ARX identification over sensor networks"};
    app.require_subcommand(1);

    CommonOptions sim_opt, run_opt, diag_opt, verify_opt;
    auto* sim = app.add_subcommand("simulate", "generate sensor traces");
    add_common(sim, sim_opt, true);
    auto* run = app.add_subcommand("run", "full identification pipeline");
    add_common(run, run_opt, true);
    auto* diag = app.add_subcommand("diagnose", "excitation-condition diagnostics");
    add_common(diag, diag_opt, true);
    auto* verify = app.add_subcommand("verify", "redundant-identity verification");
    add_common(verify, verify_opt, false);

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return run_simulate(sim_opt);
        if (run->parsed()) return run_pipeline(run_opt);
        if (diag->parsed()) return run_diagnose(diag_opt);
        if (verify->parsed()) return run_verify(verify_opt);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const arxnet::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const arxnet::OracleMismatchError& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return 3;
    } catch (const arxnet::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
