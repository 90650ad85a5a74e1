// Copyright (c) 2026 arxnet contributors
// SPDX-License-Identifier: MIT

#ifndef ARXNET_HARNESS_HPP
#define ARXNET_HARNESS_HPP

/** @file
 * Experiment orchestration: JSON configuration, the two end-to-end
 * identification pipelines (known order bounds with joint/decoupled search,
 * unknown bounds with a growing candidate range), the redundant-identity
 * verifier, and CSV emission.
 *
 * All outputs are deterministic: identical configuration and seed produce
 * byte-identical files.
 */

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "arxnet/arx.hpp"
#include "arxnet/common.hpp"
#include "arxnet/dls.hpp"
#include "arxnet/excitation.hpp"
#include "arxnet/graph.hpp"
#include "arxnet/lic.hpp"

namespace arxnet {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Topology request as it appears in configuration files.
struct TopologySpec {
    GraphKind kind = GraphKind::ring;
    int n = 3;
    std::uint64_t seed = 0;
    int rows = 0, cols = 0;   ///< grid
    double radius = 0.45;     ///< random_geometric

    Topology build() const { return build_topology(kind, n, seed, rows, cols, radius); }
};

/// Full experiment description (the JSON schema mirrors these fields).
struct ExperimentConfig {
    ArxSystem system;
    SignalModels signals;
    TopologySpec topology;
    long horizon = 100;
    std::uint64_t seed = 0;
    int identification_case = 1;  ///< 1 = known bounds, 2 = unknown bounds

    // Known-bound search set {0..p_star} x {0..q_star}.
    int p_star = 4;
    int q_star = 4;

    GainSchedule a_t;       ///< case 1 penalty
    GainSchedule a_bar;     ///< case 2 penalty
    HSchedule h;            ///< case 2 lag cap

    double gamma = 100.0;
    bool oracle_checks = false;
    bool full_replay_on_growth = false;

    std::vector<std::pair<int, int>> probes;  ///< excitation probes; empty = default
    std::optional<int> excitation_offset;     ///< default D_G+1 (case 1) / D_G (case 2)
    long excitation_stride = 0;               ///< 0 = auto (about 1000 rows)
    long trajectory_stride = 0;               ///< 0 = auto (about 200 sampled times)

    void validate() const {
        system.validate();
        signals.validate(topology.n);
        if (horizon < 1) throw ValidationError("horizon must be >= 1");
        if (identification_case != 1 && identification_case != 2)
            throw ValidationError("case must be 1 or 2");
        if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
        if (identification_case == 1) {
            if (p_star < 1 || q_star < 1)
                throw ValidationError("case 1 needs bounds p_star, q_star >= 1");
            a_t.validate();
        } else {
            a_bar.validate();
            h.validate();
        }
        for (const auto& [p, q] : probes)
            if (p < 0 || q < 0 || p + q == 0)
                throw ValidationError("excitation probes must have p, q >= 0 and p + q >= 1");
        if (excitation_offset && *excitation_offset < 0)
            throw ValidationError("excitation offset must be >= 0");
        if (excitation_stride < 0 || trajectory_stride < 0)
            throw ValidationError("strides must be >= 0 (0 selects automatic)");
    }

    /// Effective probe set: configured probes, or {(p0,q*),(p*,q0)} (case 1) /
    /// {(m0,m0)} (case 2).
    std::vector<std::pair<int, int>> effective_probes() const {
        if (!probes.empty()) return probes;
        if (identification_case == 1)
            return {{system.p0, q_star}, {p_star, system.q0}};
        const int m0 = std::max(system.p0, system.q0);
        return {{m0, m0}};
    }

    int effective_offset(int graph_diameter) const {
        if (excitation_offset) return *excitation_offset;
        return identification_case == 1 ? graph_diameter + 1 : graph_diameter;
    }

    long effective_excitation_stride() const {
        if (excitation_stride > 0) return excitation_stride;
        return std::max<long>(1, horizon / 1000);
    }
    long effective_trajectory_stride() const {
        if (trajectory_stride > 0) return trajectory_stride;
        return std::max<long>(1, horizon / 200);
    }
};

namespace detail {

inline EtaSchedule parse_eta(const nlohmann::json& j) {
    EtaSchedule eta;
    const std::string kind = j.value("kind", "constant");
    if (kind == "constant")
        eta.kind = EtaSchedule::Kind::constant;
    else if (kind == "power")
        eta.kind = EtaSchedule::Kind::power;
    else if (kind == "sqrt_log")
        eta.kind = EtaSchedule::Kind::sqrt_log;
    else
        throw ValidationError("unknown eta schedule kind: " + kind);
    eta.value = j.value("value", 1.0);
    eta.exponent = j.value("exponent", 0.5);
    eta.validate();
    return eta;
}

inline InputModel parse_input_model(const nlohmann::json& j) {
    InputModel m;
    const std::string kind = j.value("kind", "iid_gaussian");
    if (kind == "iid_gaussian") {
        m.kind = InputModel::Kind::iid_gaussian;
        m.sigma_u = j.value("sigma_u", 1.0);
    } else if (kind == "subspace_excited") {
        m.kind = InputModel::Kind::subspace_excited;
        m.sigma_u = j.value("sigma_u", 1.0);
        m.modulus = j.value("modulus", 1);
        m.residues = j.value("residues", std::vector<int>{});
    } else if (kind == "constant") {
        m.kind = InputModel::Kind::constant;
        m.value = j.value("value", 0.0);
    } else if (kind == "zero") {
        m.kind = InputModel::Kind::zero;
    } else {
        throw ValidationError("unknown input model kind: " + kind);
    }
    m.validate();
    return m;
}

inline NoiseModel parse_noise_model(const nlohmann::json& j) {
    NoiseModel m;
    const std::string kind = j.value("kind", "iid_gaussian");
    if (kind == "iid_gaussian") {
        m.kind = NoiseModel::Kind::iid_gaussian;
        m.sigma_w = j.value("sigma_w", 1.0);
    } else if (kind == "bounded_uniform") {
        m.kind = NoiseModel::Kind::bounded_uniform;
        m.beta = j.value("beta", 1.0);
    } else if (kind == "heavy_tailed_truncated") {
        m.kind = NoiseModel::Kind::heavy_tailed_truncated;
        m.dof = j.value("dof", 3);
        if (j.contains("eta")) m.eta = parse_eta(j.at("eta"));
    } else {
        throw ValidationError("unknown noise model kind: " + kind);
    }
    m.validate();
    return m;
}

inline GainSchedule parse_gain_schedule(const nlohmann::json& j) {
    GainSchedule s;
    const std::string kind = j.value("kind", "power");
    if (kind == "power") {
        s.kind = GainSchedule::Kind::power;
        s.rho = j.value("rho", 0.6);
    } else if (kind == "loglog") {
        s.kind = GainSchedule::Kind::loglog;
    } else if (kind == "polylog") {
        s.kind = GainSchedule::Kind::polylog;
        s.exponent = j.value("exponent", 3.5);
        s.log_base = j.value("log_base", 10.0);
    } else if (kind == "table") {
        s.kind = GainSchedule::Kind::table;
        s.table = j.value("values", std::vector<double>{});
    } else {
        throw ValidationError("unknown gain schedule kind: " + kind);
    }
    s.validate();
    return s;
}

}  // namespace detail

/// Parses a configuration JSON document (see README for the schema).
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    try {
        ExperimentConfig cfg;

        const auto& sys = j.at("system");
        cfg.system.p0 = sys.at("p0").get<int>();
        cfg.system.q0 = sys.at("q0").get<int>();
        const auto bvec = sys.at("b").get<std::vector<double>>();
        const auto cvec = sys.at("c").get<std::vector<double>>();
        cfg.system.b = Eigen::Map<const Eigen::VectorXd>(bvec.data(),
                                                         static_cast<Eigen::Index>(bvec.size()));
        cfg.system.c = Eigen::Map<const Eigen::VectorXd>(cvec.data(),
                                                         static_cast<Eigen::Index>(cvec.size()));

        const auto& topo = j.at("topology");
        cfg.topology.kind = graph_kind_from_string(topo.at("kind").get<std::string>());
        cfg.topology.n = topo.value("n", 0);
        cfg.topology.seed = topo.value("seed", std::uint64_t{0});
        cfg.topology.rows = topo.value("rows", 0);
        cfg.topology.cols = topo.value("cols", 0);
        cfg.topology.radius = topo.value("radius", 0.45);
        if (cfg.topology.kind == GraphKind::grid)
            cfg.topology.n = cfg.topology.rows * cfg.topology.cols;

        const auto& sig = j.at("signals");
        const auto& in = sig.at("input");
        if (in.is_array())
            for (const auto& item : in) cfg.signals.inputs.push_back(detail::parse_input_model(item));
        else
            cfg.signals.inputs.push_back(detail::parse_input_model(in));
        const auto& noi = sig.at("noise");
        if (noi.is_array())
            for (const auto& item : noi)
                cfg.signals.noises.push_back(detail::parse_noise_model(item));
        else
            cfg.signals.noises.push_back(detail::parse_noise_model(noi));

        cfg.horizon = j.at("horizon").get<long>();
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.identification_case = j.value("case", 1);

        if (j.contains("bounds")) {
            cfg.p_star = j.at("bounds").value("p_star", 4);
            cfg.q_star = j.at("bounds").value("q_star", 4);
        }

        if (j.contains("schedule")) {
            const auto& sched = j.at("schedule");
            if (sched.contains("a_t")) cfg.a_t = detail::parse_gain_schedule(sched.at("a_t"));
            if (sched.contains("a_bar")) cfg.a_bar = detail::parse_gain_schedule(sched.at("a_bar"));
            if (sched.contains("h")) {
                cfg.h.alpha = sched.at("h").value("alpha", 1.5);
                cfg.h.log_base = sched.at("h").value("log_base", 10.0);
            }
        }
        // Defaults: a_t = t^0.6; a_bar = (log10 t)^3.5; h = ceil((log10 t)^1.5).
        // A raw power penalty overwhelms the unknown-bound criterion, so a_bar
        // only uses one when the config asks for it explicitly.
        if (!(j.contains("schedule") && j.at("schedule").contains("a_bar")))
            cfg.a_bar.kind = GainSchedule::Kind::polylog;

        cfg.gamma = j.value("gamma", 100.0);
        cfg.oracle_checks = j.value("oracle_checks", false);
        cfg.full_replay_on_growth = j.value("full_replay_on_growth", false);

        if (j.contains("probes"))
            for (const auto& pq : j.at("probes"))
                cfg.probes.emplace_back(pq.at(0).get<int>(), pq.at(1).get<int>());
        if (j.contains("excitation_offset"))
            cfg.excitation_offset = j.at("excitation_offset").get<int>();
        cfg.excitation_stride = j.value("excitation_stride", 0L);
        cfg.trajectory_stride = j.value("trajectory_stride", 0L);

        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
}

/// Loads and parses a configuration file.
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

// ---------------------------------------------------------------------------
// Run results
// ---------------------------------------------------------------------------

/// How a selection row was produced.
enum class SelectionKind { joint, decoupled, growing };

inline std::string to_string(SelectionKind k) {
    switch (k) {
        case SelectionKind::joint: return "joint";
        case SelectionKind::decoupled: return "decoupled";
        case SelectionKind::growing: return "growing";
    }
    throw ValidationError("unknown selection kind");
}

/// One per-sensor, per-time selection outcome.
struct SelectionRow {
    SelectionKind kind = SelectionKind::joint;
    int sensor = 0;  ///< 0-based internally; written 1-based
    long t = 0;
    int p_hat = 0, q_hat = 0;
    int m_hat = -1;       ///< growing search only
    bool warm_up = false;  ///< growing search only
    double l_selected = 0.0;
    double l_true = std::numeric_limits<double>::quiet_NaN();  ///< NaN = outside search set
};

/// Final per-sensor summary at the end of the horizon.
struct FinalSensorState {
    int sensor = 0;
    OrderEstimate primary;                   ///< joint (case 1) or growing (case 2)
    std::optional<OrderEstimate> decoupled;  ///< case 1 only
    Eigen::VectorXd theta_selected;          ///< estimate at the primary order
    double theta_error = 0.0;                ///< padded-frame distance to the truth
};

/// Everything a pipeline run produces.
struct RunResult {
    Topology topology;
    SensorTraces traces;
    std::vector<SelectionRow> selection;
    std::vector<FinalSensorState> final_states;
    ExcitationReport excitation;
    double wall_seconds = 0.0;
    std::vector<std::string> files_written;
};

namespace detail {

/// Distance between an estimate at order (p,q) and the true parameters,
/// computed in the common zero-padded frame (max(p,p0), max(q,q0)).
inline double padded_theta_error(const Eigen::VectorXd& est, int p, int q,
                                 const ArxSystem& system) {
    const int pp = std::max(p, system.p0);
    const int qq = std::max(q, system.q0);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(pp + qq);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(pp + qq);
    for (int k = 0; k < p; ++k) a(k) = est(k);
    for (int k = 0; k < q; ++k) a(pp + k) = est(p + k);
    for (int k = 0; k < system.p0; ++k) b(k) = system.b(k);
    for (int k = 0; k < system.q0; ++k) b(pp + k) = system.c(k);
    return (a - b).norm();
}

/// log det of an SPD matrix via Cholesky (0 for dimension 0).
inline double logdet_spd(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericError("logdet: matrix lost positive definiteness");
    return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

/// Streams one trajectory CSV row per (candidate, sensor) at time t.
class TrajectoryWriter {
public:
    TrajectoryWriter(std::ostream& os, int max_dim) : csv_(os), max_dim_(max_dim) {
        std::vector<std::string> head{"candidate_p", "candidate_q", "sensor", "t"};
        for (int k = 0; k < max_dim_; ++k) head.push_back("theta_" + std::to_string(k));
        head.push_back("logdet_pinv");
        csv_.header(head);
    }

    void row(int p, int q, int sensor, long t, const LsState& state) {
        csv_.cell(p).cell(q).cell(sensor + 1).cell(t);
        for (int k = 0; k < max_dim_; ++k)
            k < state.dim() ? csv_.cell(state.theta(k)) : csv_.cell(std::string{});
        csv_.cell(logdet_spd(state.Pinv));
        csv_.end_row();
    }

private:
    CsvWriter csv_;
    int max_dim_;
};

inline void write_selection_csv(std::ostream& os, const std::vector<SelectionRow>& rows) {
    CsvWriter csv(os);
    csv.header({"sensor", "t", "kind", "p_hat", "q_hat", "m_hat", "warm_up", "l_selected",
                "l_true"});
    for (const auto& r : rows) {
        csv.cell(r.sensor + 1).cell(r.t).cell(to_string(r.kind)).cell(r.p_hat).cell(r.q_hat);
        r.m_hat >= 0 ? csv.cell(r.m_hat) : csv.cell(std::string{});
        csv.cell(r.warm_up ? 1 : 0).cell(r.l_selected);
        std::isfinite(r.l_true) ? csv.cell(r.l_true) : csv.cell(std::string{});
        csv.end_row();
    }
}

inline void write_final_csv(std::ostream& os, const std::vector<FinalSensorState>& rows,
                            int max_dim) {
    CsvWriter csv(os);
    std::vector<std::string> head{"sensor", "kind",       "p_hat",      "q_hat",
                                  "m_hat",  "l_selected", "theta_error"};
    for (int k = 0; k < max_dim; ++k) head.push_back("theta_" + std::to_string(k));
    csv.header(head);
    for (const auto& r : rows) {
        auto emit = [&](const std::string& kind, const OrderEstimate& est, bool with_theta) {
            csv.cell(r.sensor + 1).cell(kind).cell(est.p_hat).cell(est.q_hat);
            est.m_hat >= 0 ? csv.cell(est.m_hat) : csv.cell(std::string{});
            csv.cell(est.l_selected);
            with_theta ? csv.cell(r.theta_error) : csv.cell(std::string{});
            for (int k = 0; k < max_dim; ++k)
                (with_theta && k < r.theta_selected.size()) ? csv.cell(r.theta_selected(k))
                                                            : csv.cell(std::string{});
            csv.end_row();
        };
        emit(r.decoupled ? "joint" : "growing", r.primary, true);
        if (r.decoupled) emit("decoupled", *r.decoupled, false);
    }
}

inline std::string join_path(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open output file: " + path);
    return os;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

/**
 * Known-bound pipeline: runs the estimator bank over the full candidate grid
 * {0..p_star} x {0..q_star}, diffuses the fit statistics, records joint and
 * decoupled selections side by side at every step, and attaches the
 * excitation report.  Writes CSVs into `out_dir` unless it is empty.
 */
inline RunResult run_case1(const ExperimentConfig& cfg, const std::string& out_dir = {}) {
    const auto t_start = std::chrono::steady_clock::now();
    cfg.validate();
    if (cfg.identification_case != 1)
        throw ValidationError("run_case1 requires a case-1 configuration");

    RunResult result;
    result.topology = cfg.topology.build();
    const Topology& topo = result.topology;
    const int n = topo.n;
    result.traces =
        SensorTraces::simulate(cfg.system, cfg.signals, n, cfg.horizon, cfg.seed);
    const SensorTraces& traces = result.traces;

    const int p_top = cfg.p_star, q_top = cfg.q_star;
    const int window_dim = p_top + q_top;
    SigmaStats stats(n, p_top, q_top);

    // Candidate bank indexed by p * (q_star + 1) + q.
    auto bank_index = [q_top](int p, int q) {
        return static_cast<std::size_t>(p) * static_cast<std::size_t>(q_top + 1) +
               static_cast<std::size_t>(q);
    };
    std::vector<std::vector<LsState>> bank(static_cast<std::size_t>((p_top + 1) * (q_top + 1)));
    for (int p = 0; p <= p_top; ++p)
        for (int q = 0; q <= q_top; ++q)
            bank[bank_index(p, q)].assign(static_cast<std::size_t>(n),
                                          LsState::initial(p + q, cfg.gamma));

    std::optional<std::ofstream> traj_os;
    std::optional<detail::TrajectoryWriter> traj;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        traj_os.emplace(detail::open_output(detail::join_path(out_dir, "trajectory.csv")));
        traj.emplace(*traj_os, window_dim);
        result.files_written.push_back(detail::join_path(out_dir, "trajectory.csv"));
    }
    const long traj_stride = cfg.effective_trajectory_stride();

    std::vector<Eigen::VectorXd> phis(static_cast<std::size_t>(n));
    Eigen::VectorXd ys(n);
    const bool true_inside = cfg.system.p0 <= p_top && cfg.system.q0 <= q_top;

    for (long t = 1; t <= cfg.horizon; ++t) {
        for (int i = 0; i < n; ++i) ys(i) = traces.y[static_cast<std::size_t>(i)](t);

        for (int p = 0; p <= p_top; ++p)
            for (int q = 0; q <= q_top; ++q) {
                for (int i = 0; i < n; ++i)
                    phis[static_cast<std::size_t>(i)] = traces.regressor(i, t - 1, p, q);
                step_network(bank[bank_index(p, q)], topo, phis, ys);
            }

        for (int i = 0; i < n; ++i)
            phis[static_cast<std::size_t>(i)] = traces.regressor(i, t - 1, p_top, q_top);
        stats.update(topo, phis, ys);

        const double a_t = cfg.a_t.at(t);
        for (int i = 0; i < n; ++i) {
            auto criterion = [&](int p, int q) {
                const LsState& s = bank[bank_index(p, q)][static_cast<std::size_t>(i)];
                return lic_value(stats.eval(i, p, q, s.theta), p, q, a_t);
            };
            const OrderEstimate joint =
                select_order_case1(p_top, q_top, criterion, SearchMode::joint);
            const OrderEstimate dec =
                select_order_case1(p_top, q_top, criterion, SearchMode::decoupled);
            const double l_true = true_inside ? criterion(cfg.system.p0, cfg.system.q0)
                                              : std::numeric_limits<double>::quiet_NaN();

            result.selection.push_back({SelectionKind::joint, i, t, joint.p_hat, joint.q_hat,
                                        -1, false, joint.l_selected, l_true});
            result.selection.push_back({SelectionKind::decoupled, i, t, dec.p_hat, dec.q_hat,
                                        -1, false, dec.l_selected, l_true});

            if (t == cfg.horizon) {
                FinalSensorState fin;
                fin.sensor = i;
                fin.primary = joint;
                fin.decoupled = dec;
                fin.theta_selected =
                    bank[bank_index(joint.p_hat, joint.q_hat)][static_cast<std::size_t>(i)]
                        .theta;
                fin.theta_error = detail::padded_theta_error(fin.theta_selected, joint.p_hat,
                                                             joint.q_hat, cfg.system);
                result.final_states.push_back(std::move(fin));
            }
        }

        if (traj && (t % traj_stride == 0 || t == cfg.horizon))
            for (int p = 0; p <= p_top; ++p)
                for (int q = 0; q <= q_top; ++q)
                    for (int i = 0; i < n; ++i)
                        traj->row(p, q, i, t,
                                  bank[bank_index(p, q)][static_cast<std::size_t>(i)]);
    }

    result.excitation = condition_report_case1(
        traces, topo, cfg.effective_probes(), p_top, q_top, cfg.a_t, cfg.gamma,
        cfg.effective_offset(topo.diameter), cfg.effective_excitation_stride());

    if (!out_dir.empty()) {
        {
            auto os = detail::open_output(detail::join_path(out_dir, "traces.csv"));
            traces.to_csv(os);
            result.files_written.push_back(detail::join_path(out_dir, "traces.csv"));
        }
        {
            auto os = detail::open_output(detail::join_path(out_dir, "selection.csv"));
            detail::write_selection_csv(os, result.selection);
            result.files_written.push_back(detail::join_path(out_dir, "selection.csv"));
        }
        {
            auto os = detail::open_output(detail::join_path(out_dir, "final_estimates.csv"));
            detail::write_final_csv(os, result.final_states, window_dim);
            result.files_written.push_back(detail::join_path(out_dir, "final_estimates.csv"));
        }
        {
            auto os = detail::open_output(detail::join_path(out_dir, "excitation.csv"));
            result.excitation.to_csv(os, n);
            result.files_written.push_back(detail::join_path(out_dir, "excitation.csv"));
        }
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

/**
 * Unknown-bound pipeline: the candidate range {0..floor(log t)}^2 grows with
 * time; estimator states are created lazily when their pair first enters the
 * range (from the diffuse prior by default, or by replaying history when
 * `full_replay_on_growth` is set).  Selection is the three-stage scan
 * (diagonal for m_hat, then the row and column through it).
 */
inline RunResult run_case2(const ExperimentConfig& cfg, const std::string& out_dir = {}) {
    const auto t_start = std::chrono::steady_clock::now();
    cfg.validate();
    if (cfg.identification_case != 2)
        throw ValidationError("run_case2 requires a case-2 configuration");

    RunResult result;
    result.topology = cfg.topology.build();
    const Topology& topo = result.topology;
    const int n = topo.n;
    result.traces =
        SensorTraces::simulate(cfg.system, cfg.signals, n, cfg.horizon, cfg.seed);
    const SensorTraces& traces = result.traces;

    const int window = std::max(cfg.h.at(cfg.horizon), range_cap(cfg.horizon));
    const int window_dim = 2 * window;
    SigmaStats stats(n, window, window);

    struct Candidate {
        std::vector<LsState> states;
        long created_at = 0;
    };
    std::map<std::pair<int, int>, Candidate> bank;

    auto create_candidate = [&](int p, int q, long t_now) {
        Candidate cand;
        cand.created_at = t_now;
        cand.states.assign(static_cast<std::size_t>(n), LsState::initial(p + q, cfg.gamma));
        if (cfg.full_replay_on_growth) {
            std::vector<Eigen::VectorXd> phis(static_cast<std::size_t>(n));
            Eigen::VectorXd ys(n);
            for (long r = 1; r < t_now; ++r) {
                for (int i = 0; i < n; ++i) {
                    phis[static_cast<std::size_t>(i)] = traces.regressor(i, r - 1, p, q);
                    ys(i) = traces.y[static_cast<std::size_t>(i)](r);
                }
                step_network(cand.states, topo, phis, ys);
            }
        }
        bank.emplace(std::make_pair(p, q), std::move(cand));
    };

    std::optional<std::ofstream> traj_os;
    std::optional<detail::TrajectoryWriter> traj;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        traj_os.emplace(detail::open_output(detail::join_path(out_dir, "trajectory.csv")));
        traj.emplace(*traj_os, window_dim);
        result.files_written.push_back(detail::join_path(out_dir, "trajectory.csv"));
    }
    const long traj_stride = cfg.effective_trajectory_stride();

    std::vector<Eigen::VectorXd> phis(static_cast<std::size_t>(n));
    Eigen::VectorXd ys(n);

    for (long t = 1; t <= cfg.horizon; ++t) {
        const int cap = range_cap(t);
        if (cap > window)
            throw ValidationError("candidate range exceeded the statistics window");
        for (int p = 0; p <= cap; ++p)
            for (int q = 0; q <= cap; ++q)
                if (!bank.count({p, q})) create_candidate(p, q, t);

        for (int i = 0; i < n; ++i) ys(i) = traces.y[static_cast<std::size_t>(i)](t);

        for (auto& [pq, cand] : bank) {
            for (int i = 0; i < n; ++i)
                phis[static_cast<std::size_t>(i)] =
                    traces.regressor(i, t - 1, pq.first, pq.second);
            step_network(cand.states, topo, phis, ys);
        }

        for (int i = 0; i < n; ++i)
            phis[static_cast<std::size_t>(i)] = traces.regressor(i, t - 1, window, window);
        stats.update(topo, phis, ys);

        const double abar_t = cfg.a_bar.at(t);
        const bool true_inside = cfg.system.p0 <= cap && cfg.system.q0 <= cap;
        for (int i = 0; i < n; ++i) {
            auto criterion = [&](int p, int q) {
                const LsState& s = bank.at({p, q}).states[static_cast<std::size_t>(i)];
                return lic_value(stats.eval(i, p, q, s.theta), p, q, abar_t);
            };
            const OrderEstimate est = select_order_case2(t, criterion);
            const double l_true = true_inside ? criterion(cfg.system.p0, cfg.system.q0)
                                              : std::numeric_limits<double>::quiet_NaN();
            result.selection.push_back({SelectionKind::growing, i, t, est.p_hat, est.q_hat,
                                        est.m_hat, est.warm_up, est.l_selected, l_true});

            if (t == cfg.horizon) {
                FinalSensorState fin;
                fin.sensor = i;
                fin.primary = est;
                fin.theta_selected =
                    bank.at({est.p_hat, est.q_hat}).states[static_cast<std::size_t>(i)].theta;
                fin.theta_error = detail::padded_theta_error(fin.theta_selected, est.p_hat,
                                                             est.q_hat, cfg.system);
                result.final_states.push_back(std::move(fin));
            }
        }

        if (traj && (t % traj_stride == 0 || t == cfg.horizon))
            for (const auto& [pq, cand] : bank)
                for (int i = 0; i < n; ++i)
                    traj->row(pq.first, pq.second, i, t,
                              cand.states[static_cast<std::size_t>(i)]);
    }

    const int m0 = std::max(cfg.system.p0, cfg.system.q0);
    EtaSchedule eta;  // diagnostic default: sqrt-log growth envelope
    eta.kind = EtaSchedule::Kind::sqrt_log;
    for (const auto& nm : cfg.signals.noises)
        if (nm.kind == NoiseModel::Kind::heavy_tailed_truncated) eta = nm.eta;
    result.excitation = condition_report_case2(
        traces, topo, m0, cfg.a_bar, cfg.h, eta, cfg.gamma,
        cfg.effective_offset(topo.diameter), cfg.effective_excitation_stride());

    if (!out_dir.empty()) {
        {
            auto os = detail::open_output(detail::join_path(out_dir, "traces.csv"));
            traces.to_csv(os);
            result.files_written.push_back(detail::join_path(out_dir, "traces.csv"));
        }
        {
            auto os = detail::open_output(detail::join_path(out_dir, "selection.csv"));
            detail::write_selection_csv(os, result.selection);
            result.files_written.push_back(detail::join_path(out_dir, "selection.csv"));
        }
        {
            auto os = detail::open_output(detail::join_path(out_dir, "final_estimates.csv"));
            detail::write_final_csv(os, result.final_states, window_dim);
            result.files_written.push_back(detail::join_path(out_dir, "final_estimates.csv"));
        }
        {
            auto os = detail::open_output(detail::join_path(out_dir, "excitation.csv"));
            result.excitation.to_csv(os, n);
            result.files_written.push_back(detail::join_path(out_dir, "excitation.csv"));
        }
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

/// Dispatch on the configured case.
inline RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir = {}) {
    return cfg.identification_case == 1 ? run_case1(cfg, out_dir) : run_case2(cfg, out_dir);
}

// ---------------------------------------------------------------------------
// Redundant-identity verification
// ---------------------------------------------------------------------------

/// One verified identity: its observed worst residual against the tolerance.
struct VerificationCheck {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<VerificationCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    void to_csv(std::ostream& os) const {
        CsvWriter csv(os);
        csv.header({"check", "max_residual", "tolerance", "pass"});
        for (const auto& c : checks)
            csv.cell(c.name).cell(c.max_residual).cell(c.tolerance).cell(c.pass ? 1 : 0).end_row();
    }
};

/**
 * Re-derives the run's core quantities through independent routes and
 * reports the worst observed residuals:
 *
 *   - the error-propagation identity of the fused estimator (every step),
 *   - the rank-one information update against direct inversion (every step),
 *   - the weighted-expansion closed form of the information matrix (final t),
 *   - the recursive fit statistics against the explicit double sum,
 *   - the Gram/information cross-link between the two recursions,
 *   - for n = 1, equality with classical recursive and batch least squares.
 *
 * Guarded to small runs (T <= 500, n <= 6): the closed forms cost O(T^2).
 */
inline VerificationReport oracle_verify(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.horizon > 500 || cfg.topology.n > 6)
        throw ValidationError(
            "oracle_verify is limited to horizon <= 500 and n <= 6 (closed forms are O(T^2))");

    const Topology topo = cfg.topology.build();
    const int n = topo.n;
    const SensorTraces traces =
        SensorTraces::simulate(cfg.system, cfg.signals, n, cfg.horizon, cfg.seed);

    // Verification candidate: covers the true order so the error identity applies.
    const int p = std::max(cfg.p_star, cfg.system.p0);
    const int q = std::max(cfg.q_star, cfg.system.q0);
    const int d = p + q;
    const long horizon = cfg.horizon;

    Eigen::VectorXd theta_true = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < cfg.system.p0; ++k) theta_true(k) = cfg.system.b(k);
    for (int k = 0; k < cfg.system.q0; ++k) theta_true(p + k) = cfg.system.c(k);

    VerificationReport report;
    double propagation_res = 0.0, rank_one_res = 0.0;

    std::vector<LsState> states(static_cast<std::size_t>(n), LsState::initial(d, cfg.gamma));
    std::vector<Eigen::VectorXd> phis(static_cast<std::size_t>(n));
    Eigen::VectorXd ys(n);

    for (long t = 1; t <= horizon; ++t) {
        for (int i = 0; i < n; ++i) {
            phis[static_cast<std::size_t>(i)] = traces.regressor(i, t - 1, p, q);
            ys(i) = traces.y[static_cast<std::size_t>(i)](t);
        }

        // Error-propagation identity: Pinv_new (theta_true - theta_new) must
        // equal sum_j a_ij [Pinv_old (theta_true - theta_old) - phi w].
        std::vector<Eigen::VectorXd> carried(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            carried[static_cast<std::size_t>(j)] =
                states[static_cast<std::size_t>(j)].Pinv *
                    (theta_true - states[static_cast<std::size_t>(j)].theta) -
                phis[static_cast<std::size_t>(j)] *
                    traces.w[static_cast<std::size_t>(j)](t);

        // Rank-one information update residual before fusing.
        for (int i = 0; i < n; ++i) {
            const IntermediateState inter =
                adapt(states[static_cast<std::size_t>(i)], phis[static_cast<std::size_t>(i)],
                      ys(i));
            const double res =
                (inter.Pbar_inv * inter.Pbar - Eigen::MatrixXd::Identity(d, d))
                    .cwiseAbs()
                    .maxCoeff();
            rank_one_res = std::max(rank_one_res, res);
        }

        step_network(states, topo, phis, ys);

        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
            for (int j : topo.closed_neighbourhoods[static_cast<std::size_t>(i)])
                rhs += topo.weights(i, j) * carried[static_cast<std::size_t>(j)];
            const Eigen::VectorXd lhs =
                states[static_cast<std::size_t>(i)].Pinv *
                (theta_true - states[static_cast<std::size_t>(i)].theta);
            for (int k = 0; k < d; ++k)
                propagation_res = std::max(propagation_res, relative_gap(lhs(k), rhs(k)));
        }
    }
    report.checks.push_back({"error_propagation_identity", propagation_res, 1e-8, propagation_res <= 1e-8});
    report.checks.push_back({"rank_one_information_update", rank_one_res, 1e-10, rank_one_res <= 1e-10});

    // Weighted-expansion closed form of the information matrix at the final t.
    double expansion_res = 0.0;
    {
        std::vector<Eigen::MatrixXd> powers(static_cast<std::size_t>(horizon) + 1);
        powers[0] = Eigen::MatrixXd::Identity(n, n);
        for (long l = 1; l <= horizon; ++l) powers[static_cast<std::size_t>(l)] =
            powers[static_cast<std::size_t>(l - 1)] * topo.weights;
        for (int i = 0; i < n; ++i) {
            Eigen::MatrixXd expansion = Eigen::MatrixXd::Zero(d, d);
            for (int j = 0; j < n; ++j) {
                for (long l = 0; l < horizon; ++l) {
                    const Eigen::VectorXd phi = traces.regressor(j, l, p, q);
                    expansion += powers[static_cast<std::size_t>(horizon - l)](i, j) *
                                 (phi * phi.transpose());
                }
                expansion += powers[static_cast<std::size_t>(horizon)](i, j) *
                             (1.0 / cfg.gamma) * Eigen::MatrixXd::Identity(d, d);
            }
            const double scale = 1.0 + states[static_cast<std::size_t>(i)].Pinv.cwiseAbs().maxCoeff();
            expansion_res = std::max(
                expansion_res,
                (states[static_cast<std::size_t>(i)].Pinv - expansion).cwiseAbs().maxCoeff() /
                    scale);
        }
    }
    report.checks.push_back({"information_matrix_expansion", expansion_res, 1e-8, expansion_res <= 1e-8});

    // Recursive fit statistics vs the explicit double sum, and the
    // Gram/information cross-link.
    double sigma_res = 0.0, cross_res = 0.0;
    {
        SigmaStats stats(n, p, q);
        for (long t = 1; t <= horizon; ++t) {
            for (int i = 0; i < n; ++i) {
                phis[static_cast<std::size_t>(i)] = traces.regressor(i, t - 1, p, q);
                ys(i) = traces.y[static_cast<std::size_t>(i)](t);
            }
            stats.update(topo, phis, ys);
        }

        std::vector<Eigen::MatrixXd> powers(static_cast<std::size_t>(horizon) + 1);
        powers[0] = Eigen::MatrixXd::Identity(n, n);
        for (long l = 1; l <= horizon; ++l) powers[static_cast<std::size_t>(l)] =
            powers[static_cast<std::size_t>(l - 1)] * topo.weights;

        RandomStream beta_rng(cfg.seed, 0xbe7aULL);
        for (int trial = 0; trial < 5; ++trial) {
            Eigen::VectorXd beta(d);
            for (int k = 0; k < d; ++k) beta(k) = beta_rng.gaussian();
            for (int i = 0; i < n; ++i) {
                double direct = 0.0;
                for (int j = 0; j < n; ++j)
                    for (long k = 0; k < horizon; ++k) {
                        const double resid =
                            traces.y[static_cast<std::size_t>(j)](k + 1) -
                            beta.dot(traces.regressor(j, k, p, q));
                        direct += powers[static_cast<std::size_t>(horizon - k)](i, j) * resid *
                                  resid;
                    }
                const double recursive = stats.eval(i, p, q, beta);
                sigma_res = std::max(sigma_res,
                                     std::abs(recursive - direct) / (1.0 + std::abs(direct)));
            }
        }

        for (int i = 0; i < n; ++i) {
            Eigen::MatrixXd prior = Eigen::MatrixXd::Zero(d, d);
            for (int j = 0; j < n; ++j)
                prior += powers[static_cast<std::size_t>(horizon)](i, j) * (1.0 / cfg.gamma) *
                         Eigen::MatrixXd::Identity(d, d);
            const Eigen::MatrixXd lhs = stats.G(i);
            const Eigen::MatrixXd rhs = states[static_cast<std::size_t>(i)].Pinv - prior;
            const double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
            cross_res =
                std::max(cross_res, (lhs - rhs).cwiseAbs().maxCoeff() / scale);
        }
    }
    report.checks.push_back({"fit_statistics_double_sum", sigma_res, 1e-8, sigma_res <= 1e-8});
    report.checks.push_back({"gram_information_cross_link", cross_res, 1e-8, cross_res <= 1e-8});

    // Classical reduction for single-sensor runs.
    if (n == 1) {
        std::vector<Eigen::VectorXd> stream;
        Eigen::VectorXd ys1(horizon);
        for (long t = 1; t <= horizon; ++t) {
            stream.push_back(traces.regressor(0, t - 1, p, q));
            ys1(t - 1) = traces.y[0](t);
        }
        const auto rls = rls_oracle(stream, ys1, Eigen::VectorXd::Zero(d), cfg.gamma);
        const Eigen::VectorXd batch = batch_ls(stream, ys1, Eigen::VectorXd::Zero(d), cfg.gamma);

        std::vector<LsState> solo(1, LsState::initial(d, cfg.gamma));
        double rls_res = 0.0;
        for (long t = 1; t <= horizon; ++t) {
            std::vector<Eigen::VectorXd> phi1{stream[static_cast<std::size_t>(t - 1)]};
            Eigen::VectorXd y1(1);
            y1(0) = ys1(t - 1);
            step_network(solo, topo, phi1, y1);
            for (int k = 0; k < d; ++k)
                rls_res = std::max(
                    rls_res, relative_gap(solo[0].theta(k),
                                          rls[static_cast<std::size_t>(t)].theta(k)));
        }
        double batch_res = 0.0;
        for (int k = 0; k < d; ++k)
            batch_res = std::max(batch_res, relative_gap(solo[0].theta(k), batch(k)));
        report.checks.push_back({"classical_rls_reduction", rls_res, 1e-12, rls_res <= 1e-12});
        report.checks.push_back({"batch_ls_reduction", batch_res, 1e-12, batch_res <= 1e-12});
    }

    return report;
}

}  // namespace arxnet

#endif  // ARXNET_HARNESS_HPP
