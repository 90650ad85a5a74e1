// Copyright (c) 2026 arxnet contributors
// SPDX-License-Identifier: MIT

#include "arxnet/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"

namespace {

namespace fs = std::filesystem;
using arxnet::ExperimentConfig;
using arxnet::GainSchedule;
using arxnet::load_config;
using arxnet::LsState;
using arxnet::oracle_verify;
using arxnet::parse_config;
using arxnet::run_case1;
using arxnet::run_case2;
using arxnet::run_experiment;
using arxnet::RunResult;
using arxnet::SelectionKind;
using arxnet::SensorTraces;
using arxnet::SigmaStats;
using arxnet::step_network;
using arxnet::ValidationError;
using nlohmann::json;

json minimal_case1_json() {
    return json::parse(R"({
        "system": {"p0": 1, "q0": 1, "b": [0.5], "c": [1.0]},
        "topology": {"kind": "ring", "n": 3},
        "signals": {"input": {"kind": "iid_gaussian", "sigma_u": 1.0},
                    "noise": {"kind": "iid_gaussian", "sigma_w": 0.5}},
        "horizon": 30,
        "seed": 7,
        "case": 1,
        "bounds": {"p_star": 2, "q_star": 2}
    })");
}

json minimal_case2_json() {
    json j = minimal_case1_json();
    j["case"] = 2;
    j["topology"] = {{"kind", "complete"}, {"n", 2}};
    j["horizon"] = 40;
    j.erase("bounds");
    return j;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in) << "missing " << path;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("arxnet_harness_" + name);
    fs::remove_all(dir);
    return dir;
}

// ---- configuration ------------------------------------------------------------------

TEST(ParseConfig, AppliesDocumentedDefaults) {
    json j = minimal_case1_json();
    j.erase("bounds");
    j.erase("seed");
    const ExperimentConfig cfg = parse_config(j);
    EXPECT_EQ(cfg.identification_case, 1);
    EXPECT_EQ(cfg.p_star, 4);
    EXPECT_EQ(cfg.q_star, 4);
    EXPECT_EQ(cfg.seed, 0u);
    EXPECT_DOUBLE_EQ(cfg.gamma, 100.0);
    EXPECT_EQ(cfg.a_t.kind, GainSchedule::Kind::power);
    EXPECT_DOUBLE_EQ(cfg.a_t.rho, 0.6);
    EXPECT_EQ(cfg.a_bar.kind, GainSchedule::Kind::polylog);
    EXPECT_DOUBLE_EQ(cfg.a_bar.log_base, 10.0);
    EXPECT_DOUBLE_EQ(cfg.a_bar.exponent, 3.5);
    EXPECT_DOUBLE_EQ(cfg.h.alpha, 1.5);
    EXPECT_FALSE(cfg.oracle_checks);
    EXPECT_FALSE(cfg.full_replay_on_growth);
    EXPECT_TRUE(cfg.probes.empty());
    EXPECT_FALSE(cfg.excitation_offset.has_value());
}

TEST(ParseConfig, ReadsEveryDocumentedField) {
    json j = minimal_case2_json();
    j["seed"] = 99;
    j["gamma"] = 50.0;
    j["oracle_checks"] = true;
    j["full_replay_on_growth"] = true;
    j["probes"] = {{1, 4}, {4, 1}};
    j["excitation_offset"] = 3;
    j["excitation_stride"] = 12;
    j["trajectory_stride"] = 9;
    j["schedule"] = {{"a_bar", {{"kind", "polylog"}, {"exponent", 2.5}, {"log_base", 2.0}}},
                     {"h", {{"alpha", 1.2}, {"log_base", 4.0}}},
                     {"a_t", {{"kind", "loglog"}}}};

    const ExperimentConfig cfg = parse_config(j);
    EXPECT_EQ(cfg.identification_case, 2);
    EXPECT_EQ(cfg.seed, 99u);
    EXPECT_DOUBLE_EQ(cfg.gamma, 50.0);
    EXPECT_TRUE(cfg.oracle_checks);
    EXPECT_TRUE(cfg.full_replay_on_growth);
    ASSERT_EQ(cfg.probes.size(), 2u);
    EXPECT_EQ(cfg.probes[0], (std::pair<int, int>{1, 4}));
    EXPECT_EQ(cfg.excitation_offset.value_or(-1), 3);
    EXPECT_EQ(cfg.excitation_stride, 12);
    EXPECT_EQ(cfg.trajectory_stride, 9);
    EXPECT_EQ(cfg.a_bar.kind, GainSchedule::Kind::polylog);
    EXPECT_DOUBLE_EQ(cfg.a_bar.exponent, 2.5);
    EXPECT_DOUBLE_EQ(cfg.a_bar.log_base, 2.0);
    EXPECT_DOUBLE_EQ(cfg.h.alpha, 1.2);
    EXPECT_EQ(cfg.a_t.kind, GainSchedule::Kind::loglog);
}

TEST(ParseConfig, AcceptsPerSensorSignalArrays) {
    json j = minimal_case1_json();
    j["signals"]["input"] = json::array({{{"kind", "iid_gaussian"}, {"sigma_u", 1.0}},
                                         {{"kind", "zero"}},
                                         {{"kind", "constant"}, {"value", 2.0}}});
    const ExperimentConfig cfg = parse_config(j);
    ASSERT_EQ(cfg.signals.inputs.size(), 3u);
    EXPECT_EQ(cfg.signals.inputs[1].kind, arxnet::InputModel::Kind::zero);

    j["signals"]["input"] = json::array({{{"kind", "zero"}}, {{"kind", "zero"}}});
    EXPECT_THROW(parse_config(j), ValidationError);  // 2 entries for 3 sensors
}

TEST(ParseConfig, RejectsMalformedDocuments) {
    json j = minimal_case1_json();
    j.erase("system");
    EXPECT_THROW(parse_config(j), ValidationError);

    j = minimal_case1_json();
    j["topology"]["kind"] = "moebius";
    EXPECT_THROW(parse_config(j), ValidationError);

    j = minimal_case1_json();
    j["system"]["b"] = {0.5, 0.1};  // p0 = 1 but two coefficients
    EXPECT_THROW(parse_config(j), ValidationError);

    j = minimal_case1_json();
    j["case"] = 3;
    EXPECT_THROW(parse_config(j), ValidationError);

    j = minimal_case1_json();
    j["horizon"] = 0;
    EXPECT_THROW(parse_config(j), ValidationError);

    j = minimal_case1_json();
    j["signals"]["input"]["kind"] = "chirp";
    EXPECT_THROW(parse_config(j), ValidationError);

    j = minimal_case1_json();
    j["probes"] = {{0, 0}};
    EXPECT_THROW(parse_config(j), ValidationError);
}

TEST(LoadConfig, ReportsUnreadableOrUnparsableFiles) {
    EXPECT_THROW(load_config("/nonexistent/config.json"), ValidationError);
    const fs::path bad = fs::temp_directory_path() / "arxnet_harness_bad.json";
    {
        std::ofstream out(bad);
        out << "this is not json";
    }
    EXPECT_THROW(load_config(bad.string()), ValidationError);
    fs::remove(bad);
}

TEST(ExperimentConfigDefaults, ProbesOffsetsAndStrides) {
    ExperimentConfig cfg = parse_config(minimal_case1_json());
    EXPECT_EQ(cfg.effective_probes(),
              (std::vector<std::pair<int, int>>{{1, 2}, {2, 1}}));  // (p0,q*), (p*,q0)
    EXPECT_EQ(cfg.effective_offset(3), 4);  // case 1: diameter + 1

    ExperimentConfig cfg2 = parse_config(minimal_case2_json());
    EXPECT_EQ(cfg2.effective_probes(), (std::vector<std::pair<int, int>>{{1, 1}}));  // (m0,m0)
    EXPECT_EQ(cfg2.effective_offset(3), 3);  // case 2: diameter
    cfg2.excitation_offset = 7;
    EXPECT_EQ(cfg2.effective_offset(3), 7);

    cfg.horizon = 5000;
    EXPECT_EQ(cfg.effective_excitation_stride(), 5);
    EXPECT_EQ(cfg.effective_trajectory_stride(), 25);
    cfg.horizon = 100;
    EXPECT_EQ(cfg.effective_excitation_stride(), 1);
    EXPECT_EQ(cfg.effective_trajectory_stride(), 1);
    cfg.excitation_stride = 42;
    EXPECT_EQ(cfg.effective_excitation_stride(), 42);
}

// ---- known-bound pipeline --------------------------------------------------------------

TEST(RunCase1, ProducesTheDocumentedRowStructure) {
    const ExperimentConfig cfg = parse_config(minimal_case1_json());
    const RunResult res = run_case1(cfg);

    const long T = cfg.horizon;
    const int n = cfg.topology.n;
    ASSERT_EQ(res.selection.size(), static_cast<std::size_t>(2 * T * n));
    long joint = 0, dec = 0;
    for (const auto& row : res.selection) {
        EXPECT_GE(row.p_hat, 0);
        EXPECT_LE(row.p_hat, cfg.p_star);
        EXPECT_GE(row.q_hat, 0);
        EXPECT_LE(row.q_hat, cfg.q_star);
        EXPECT_EQ(row.m_hat, -1);
        EXPECT_FALSE(row.warm_up);
        EXPECT_TRUE(std::isfinite(row.l_true));  // the true order is inside the grid
        row.kind == SelectionKind::joint ? ++joint : ++dec;
        if (row.kind == SelectionKind::decoupled) {
            EXPECT_GE(row.p_hat, 1);
            EXPECT_GE(row.q_hat, 1);
        }
    }
    EXPECT_EQ(joint, T * n);
    EXPECT_EQ(dec, T * n);

    ASSERT_EQ(res.final_states.size(), static_cast<std::size_t>(n));
    for (const auto& fin : res.final_states) {
        EXPECT_TRUE(fin.decoupled.has_value());
        EXPECT_EQ(fin.theta_selected.size(), fin.primary.p_hat + fin.primary.q_hat);
        EXPECT_GE(fin.theta_error, 0.0);
    }

    ASSERT_EQ(res.excitation.verdicts.size(), 2u);
    ASSERT_FALSE(res.excitation.rows.empty());
    for (const auto& row : res.excitation.rows)
        EXPECT_EQ(row.per_sensor_lambda_min.size(), static_cast<std::size_t>(n));
    EXPECT_TRUE(res.files_written.empty());  // no out_dir requested
}

TEST(RunCase1, NoiselessPersistentlyExcitedRunSelectsTheTrueOrder) {
    json j = minimal_case1_json();
    j["signals"]["noise"]["sigma_w"] = 0.0;
    j["horizon"] = 150;
    const ExperimentConfig cfg = parse_config(j);
    const RunResult res = run_case1(cfg);

    for (const auto& row : res.selection) {
        if (row.t != cfg.horizon) continue;
        EXPECT_EQ(row.p_hat, 1) << to_string(row.kind) << " sensor " << row.sensor;
        EXPECT_EQ(row.q_hat, 1) << to_string(row.kind) << " sensor " << row.sensor;
    }
    for (const auto& fin : res.final_states) EXPECT_LT(fin.theta_error, 1e-2);
}

TEST(RunCase1, WritesADeterministicCsvBundle) {
    const ExperimentConfig cfg = parse_config(minimal_case1_json());
    const fs::path dir_a = fresh_dir("case1_a");
    const fs::path dir_b = fresh_dir("case1_b");
    const RunResult res_a = run_case1(cfg, dir_a.string());
    const RunResult res_b = run_case1(cfg, dir_b.string());

    const std::vector<std::string> names{"trajectory.csv", "traces.csv", "selection.csv",
                                         "final_estimates.csv", "excitation.csv"};
    ASSERT_EQ(res_a.files_written.size(), names.size());
    for (const auto& name : names) {
        const std::string a = read_file(dir_a / name);
        const std::string b = read_file(dir_b / name);
        EXPECT_FALSE(a.empty()) << name;
        EXPECT_EQ(a, b) << name << " differs between identical runs";
    }

    const std::string selection = read_file(dir_a / "selection.csv");
    EXPECT_EQ(selection.rfind("sensor,t,kind,p_hat,q_hat,m_hat,warm_up,l_selected,l_true\n", 0),
              0u);
    const std::string final_csv = read_file(dir_a / "final_estimates.csv");
    EXPECT_EQ(final_csv.rfind("sensor,kind,p_hat,q_hat,m_hat,l_selected,theta_error,theta_0", 0),
              0u);
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

// ---- unknown-bound pipeline -------------------------------------------------------------

TEST(RunCase2, GrowingRangeWarmsUpAndGrowsLazily) {
    json j = minimal_case2_json();
    j["trajectory_stride"] = 1;
    const ExperimentConfig cfg = parse_config(j);
    const fs::path dir = fresh_dir("case2_lazy");
    const RunResult res = run_case2(cfg, dir.string());

    const long T = cfg.horizon;
    const int n = cfg.topology.n;
    ASSERT_EQ(res.selection.size(), static_cast<std::size_t>(T * n));
    for (const auto& row : res.selection) {
        EXPECT_EQ(row.kind, SelectionKind::growing);
        EXPECT_GE(row.m_hat, 0);
        EXPECT_EQ(row.warm_up, row.t < 3) << "t=" << row.t;
        EXPECT_LE(std::max(row.p_hat, row.q_hat), row.m_hat);
        EXPECT_LE(row.m_hat, arxnet::range_cap(row.t));
    }

    // The trajectory file witnesses lazy creation: at time t exactly
    // (range_cap(t)+1)^2 candidates exist, each contributing one row per sensor.
    std::map<long, long> rows_at_t;
    std::istringstream traj(read_file(dir / "trajectory.csv"));
    std::string line;
    std::getline(traj, line);  // header
    while (std::getline(traj, line)) {
        std::istringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');  // candidate_p
        std::getline(cells, cell, ',');  // candidate_q
        std::getline(cells, cell, ',');  // sensor
        std::getline(cells, cell, ',');  // t
        ++rows_at_t[std::stol(cell)];
    }
    for (const long t : {1L, 2L, 7L, 8L, 20L, 21L, 40L}) {
        const long cells = (arxnet::range_cap(t) + 1) * (arxnet::range_cap(t) + 1);
        EXPECT_EQ(rows_at_t[t], cells * n) << "t=" << t;
    }
    fs::remove_all(dir);
}

TEST(RunCase2, FullReplayMakesLateCandidatesMatchAFromScratchRun) {
    // True order (2,2) only enters the candidate range at t = 8 (cap reaches 2).
    json j = minimal_case2_json();
    j["system"] = {{"p0", 2}, {"q0", 2}, {"b", {0.4, 0.3}}, {"c", {1.0, -0.5}}};
    j["horizon"] = 25;
    j["full_replay_on_growth"] = true;
    const ExperimentConfig cfg = parse_config(j);
    const RunResult res = run_case2(cfg);

    // Independent from-scratch route for the true candidate: its own LS bank
    // and statistics running from t = 1.
    const arxnet::Topology topo = cfg.topology.build();
    const SensorTraces traces =
        SensorTraces::simulate(cfg.system, cfg.signals, topo.n, cfg.horizon, cfg.seed);
    const int window = std::max(cfg.h.at(cfg.horizon), arxnet::range_cap(cfg.horizon));
    SigmaStats stats(topo.n, window, window);
    std::vector<LsState> ls(static_cast<std::size_t>(topo.n), LsState::initial(4, cfg.gamma));

    std::map<std::pair<int, long>, double> l_true_manual;  // (sensor, t) -> L
    for (long t = 1; t <= cfg.horizon; ++t) {
        std::vector<Eigen::VectorXd> phis, phis_max;
        Eigen::VectorXd ys(topo.n);
        for (int i = 0; i < topo.n; ++i) {
            phis.push_back(traces.regressor(i, t - 1, 2, 2));
            phis_max.push_back(traces.regressor(i, t - 1, window, window));
            ys(i) = traces.y[static_cast<std::size_t>(i)](t);
        }
        step_network(ls, topo, phis, ys);
        stats.update(topo, phis_max, ys);
        for (int i = 0; i < topo.n; ++i)
            l_true_manual[{i, t}] = arxnet::lic_value(
                stats.eval(i, 2, 2, ls[static_cast<std::size_t>(i)].theta), 2, 2,
                cfg.a_bar.at(t));
    }

    bool compared_after_entry = false;
    for (const auto& row : res.selection) {
        if (!std::isfinite(row.l_true)) {
            EXPECT_LT(arxnet::range_cap(row.t), 2);  // (2,2) not yet in range
            continue;
        }
        const double manual = l_true_manual.at({row.sensor, row.t});
        EXPECT_LE(std::abs(row.l_true - manual), 1e-12 * (1.0 + std::abs(manual)))
            << "sensor " << row.sensor << " t " << row.t;
        compared_after_entry = true;
    }
    EXPECT_TRUE(compared_after_entry);

    // Without replay the late-created candidate starts from the diffuse prior
    // and must disagree with the from-scratch route right after entry.
    json j2 = j;
    j2["full_replay_on_growth"] = false;
    const RunResult res2 = run_case2(parse_config(j2));
    bool saw_difference = false;
    for (const auto& row : res2.selection)
        if (row.t == 8 &&
            std::abs(row.l_true - l_true_manual.at({row.sensor, row.t})) > 1e-9)
            saw_difference = true;
    EXPECT_TRUE(saw_difference);
}

TEST(RunCase2, WritesADeterministicCsvBundle) {
    json j = minimal_case2_json();
    j["horizon"] = 30;
    const ExperimentConfig cfg = parse_config(j);
    const fs::path dir_a = fresh_dir("case2_a");
    const fs::path dir_b = fresh_dir("case2_b");
    run_case2(cfg, dir_a.string());
    run_case2(cfg, dir_b.string());
    for (const char* name :
         {"trajectory.csv", "traces.csv", "selection.csv", "final_estimates.csv",
          "excitation.csv"})
        EXPECT_EQ(read_file(dir_a / name), read_file(dir_b / name)) << name;
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST(RunExperiment, DispatchesOnTheConfiguredCase) {
    const RunResult r1 = run_experiment(parse_config(minimal_case1_json()));
    EXPECT_EQ(r1.selection.front().kind, SelectionKind::joint);
    const RunResult r2 = run_experiment(parse_config(minimal_case2_json()));
    EXPECT_EQ(r2.selection.front().kind, SelectionKind::growing);
    EXPECT_THROW(run_case2(parse_config(minimal_case1_json())), ValidationError);
    EXPECT_THROW(run_case1(parse_config(minimal_case2_json())), ValidationError);
}

// ---- redundant-identity verification ------------------------------------------------------

TEST(OracleVerify, NetworkRunPassesEveryIdentity) {
    json j = minimal_case1_json();
    j["horizon"] = 60;
    const auto report = oracle_verify(parse_config(j));
    ASSERT_EQ(report.checks.size(), 5u);
    EXPECT_TRUE(report.all_pass());
    const std::vector<std::string> expected{
        "error_propagation_identity", "rank_one_information_update",
        "information_matrix_expansion", "fit_statistics_double_sum",
        "gram_information_cross_link"};
    for (std::size_t k = 0; k < expected.size(); ++k) {
        EXPECT_EQ(report.checks[k].name, expected[k]);
        EXPECT_LE(report.checks[k].max_residual, report.checks[k].tolerance);
    }
}

TEST(OracleVerify, SingleSensorRunAddsTheClassicalReductions) {
    json j = minimal_case1_json();
    j["topology"] = {{"kind", "complete"}, {"n", 1}};
    j["horizon"] = 80;
    const auto report = oracle_verify(parse_config(j));
    ASSERT_EQ(report.checks.size(), 7u);
    EXPECT_TRUE(report.all_pass());
    EXPECT_EQ(report.checks[5].name, "classical_rls_reduction");
    EXPECT_EQ(report.checks[6].name, "batch_ls_reduction");

    std::ostringstream os;
    report.to_csv(os);
    const std::string csv = os.str();
    EXPECT_EQ(csv.rfind("check,max_residual,tolerance,pass\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 8);
}

TEST(OracleVerify, GuardsAgainstQuadraticCostRuns) {
    json j = minimal_case1_json();
    j["horizon"] = 501;
    EXPECT_THROW(oracle_verify(parse_config(j)), ValidationError);

    j = minimal_case1_json();
    j["topology"] = {{"kind", "complete"}, {"n", 7}};
    EXPECT_THROW(oracle_verify(parse_config(j)), ValidationError);
}

}  // namespace
