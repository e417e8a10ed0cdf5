#include "deds/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "deds/agents.hpp"
#include "deds/penalty.hpp"
#include "json.hpp"

namespace deds {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

EpsilonBoundCheck check_epsilon_bound(const DedsInstance& inst, double eps, double rho,
                                      const OracleOptions& options) {
  EpsilonBoundCheck out;
  out.rho = rho;
  out.eps = eps;
  const SlaterPoint point = strong_slater_point(inst, rho, eps, options);
  const OracleResult opt = solve_centralized(inst, eps, options);
  out.slater_margin = point.margin;
  out.f_slater = point.cost;
  out.f_opt = evaluate_cost(inst, opt.schedule);
  if (point.margin > 0.0 && point.cost > out.f_opt) {
    out.bound = epsilon_upper_bound(point.margin, point.cost, out.f_opt);
    out.eps_below_bound = eps < out.bound;
  }
  return out;
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file(const fs::path& p, const std::string& content, std::vector<std::string>& files) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << content;
  files.push_back(p.string());
}

const char* kSchema =
    "file,column,unit,description\n"
    "trajectory.csv,time,s,simulated time of the sample\n"
    "trajectory.csv,total_injection_k,MW,sum over units of I_i^(k) for slot k\n"
    "trajectory.csv,mismatch_k,MW,sum over units of I_i^(k) minus l^(k)\n"
    "trajectory.csv,cost,$,f(I+S)\n"
    "trajectory.csv,penalized_cost,$,f plus hinge penalties over eps\n"
    "trajectory.csv,lyapunov,$,penalized cost plus the consensus energy in transformed coordinates\n"
    "trajectory.csv,max_abs_mismatch,MW,largest |mismatch_k|\n"
    "trajectory.csv,conservation,MW,largest |sum over units of v_i^(k)|\n"
    "trajectory.csv,v_norm,MW,Euclidean norm of v\n"
    "state.csv,time,s,simulated time of the sample\n"
    "state.csv,unit,id,1-based unit id\n"
    "state.csv,slot,id,1-based slot index\n"
    "state.csv,injection,MW,I_i^(k)\n"
    "state.csv,storage,MW,S_i^(k)\n"
    "state.csv,z,MW,consensus estimator state z_i^(k)\n"
    "state.csv,v,MW,consensus integrator state v_i^(k)\n"
    "schedule.csv,unit,id,1-based unit id\n"
    "schedule.csv,slot,id,1-based slot index\n"
    "schedule.csv,injection,MW,I_i^(k)\n"
    "schedule.csv,storage,MW,S_i^(k)\n"
    "schedule.csv,generation,MW,I_i^(k) + S_i^(k)\n"
    "schedule.csv,storage_level,MWh,S^(0) plus prefix sum of S up to slot k\n";

std::string trajectory_csv(const TrajectoryRecord& rec, std::size_t h) {
  std::ostringstream os;
  os << "time";
  for (std::size_t k = 1; k <= h; ++k) os << ",total_injection_" << k;
  for (std::size_t k = 1; k <= h; ++k) os << ",mismatch_" << k;
  os << ",cost,penalized_cost,lyapunov,max_abs_mismatch,conservation,v_norm\n";
  for (const auto& s : rec.samples) {
    os << num(s.time);
    for (double x : s.slot_totals) os << ',' << num(x);
    for (double x : s.mismatch) os << ',' << num(x);
    os << ',' << num(s.cost) << ',' << num(s.penalized_cost) << ',' << num(s.lyapunov) << ','
       << num(s.max_abs_mismatch) << ',' << num(s.conservation) << ',' << num(s.v_norm) << '\n';
  }
  return os.str();
}

std::string state_csv(const TrajectoryRecord& rec) {
  std::ostringstream os;
  os << "time,unit,slot,injection,storage,z,v\n";
  for (std::size_t n = 0; n < rec.states.size() && n < rec.samples.size(); ++n) {
    const auto& st = rec.states[n];
    for (std::size_t i = 0; i < st.units(); ++i)
      for (std::size_t k = 0; k < st.slots(); ++k)
        os << num(rec.samples[n].time) << ',' << i + 1 << ',' << k + 1 << ','
           << num(st.injection(i, k)) << ',' << num(st.storage(i, k)) << ',' << num(st.z(i, k))
           << ',' << num(st.v(i, k)) << '\n';
  }
  return os.str();
}

std::string schedule_csv(const DedsInstance& inst, const Schedule& s) {
  std::ostringstream os;
  os << "unit,slot,injection,storage,generation,storage_level\n";
  for (std::size_t i = 0; i < inst.units(); ++i) {
    double level = inst.unit(i).s_initial;
    for (std::size_t k = 0; k < inst.horizon(); ++k) {
      level += s.storage(i, k);
      os << i + 1 << ',' << k + 1 << ',' << num(s.injection(i, k)) << ',' << num(s.storage(i, k))
         << ',' << num(s.generation(i, k)) << ',' << num(inst.has_storage(i) ? level : 0.0) << '\n';
    }
  }
  return os.str();
}

ojson feasibility_json(const FeasibilityReport& f) {
  return ojson{{"feasible", f.feasible}, {"tol", f.tol},          {"load", f.load},
               {"box", f.box},           {"storage", f.storage}, {"injection", f.injection},
               {"ramp", f.ramp}};
}

ojson residuals_json(const KktResiduals& r) {
  return ojson{{"load", r.load}, {"storage", r.storage}, {"injection_consensus", r.injection_consensus}};
}

ojson schedule_summary(const DedsInstance& inst, const Schedule& s, double eps) {
  const auto l = total_load(inst);
  ojson totals = ojson::array(), generation = ojson::array(), storage = ojson::array();
  double gap = 0.0;
  for (std::size_t k = 0; k < inst.horizon(); ++k) {
    const double t = s.injection.column_sum(k);
    double g = 0.0;
    for (std::size_t i = 0; i < inst.units(); ++i) g += s.generation(i, k);
    totals.push_back(t);
    generation.push_back(g);
    storage.push_back(s.storage.column_sum(k));
    gap = std::max(gap, std::abs(t - l[k]));
  }
  return ojson{{"cost", evaluate_cost(inst, s)},
               {"penalized_cost", penalized_cost(inst, eps, s)},
               {"load", l},
               {"slot_totals", totals},
               {"max_load_gap", gap},
               {"total_generation", generation},
               {"total_storage_flow", storage}};
}

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::monolithic: return "monolithic";
    case RunMode::agents: return "agents";
    case RunMode::oracle: return "oracle";
    case RunMode::validate: return "validate";
  }
  return "?";
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg) {
  RunReport report;
  ojson summary;
  summary["scenario"] = cfg.name;
  summary["mode"] = mode_name(cfg.run.mode);
  std::ostringstream text;
  const fs::path out_dir(cfg.run.output_dir);

  auto finish = [&](int code, const std::string& status) {
    report.exit_code = code;
    summary["status"] = status;
    summary["exit_code"] = code;
    report.summary_json = summary.dump(2) + "\n";
    try {
      fs::create_directories(out_dir);
      write_file(out_dir / "summary.json", report.summary_json, report.files);
    } catch (const std::exception& e) {
      text << "error: " << e.what() << '\n';
      if (report.exit_code == kExitOk) report.exit_code = kExitConfigError;
    }
    text << "status: " << status << " (exit " << report.exit_code << ")\n";
    report.text = text.str();
    return report;
  };

  std::optional<DedsInstance> inst;
  Digraph graph;
  try {
    inst.emplace(cfg.instance);
    graph = build_digraph(cfg.graph.vertices, cfg.graph.edges);
    cfg.gains.validate();
    if (graph.size() != inst->units())
      throw std::invalid_argument("graph vertex count does not match the unit count");
  } catch (const std::invalid_argument& e) {
    text << "config error: " << e.what() << '\n';
    summary["error"] = e.what();
    return finish(kExitConfigError, "config error");
  }
  const LaplacianData lap = laplacian(graph);

  GainCheck gains;
  try {
    gains = validate_gains(lap, cfg.gains);
  } catch (const std::invalid_argument& e) {
    text << "hypothesis rejected: " << e.what() << '\n';
    summary["error"] = e.what();
    return finish(kExitHypothesisRejected, "hypothesis rejected");
  }
  summary["gain_check"] = ojson{{"ok", gains.ok},
                                {"margin", std::isfinite(gains.margin) ? ojson(gains.margin) : ojson(nullptr)},
                                {"lambda2", lap.lambda2_sym},
                                {"lambda_max_LtL", lap.lambda_max_LtL}};
  text << "gain margin: " << num(gains.margin) << (gains.ok ? " (ok)" : " (fails)") << '\n';

  OracleOptions oracle_opt;
  oracle_opt.max_iters = cfg.run.oracle_max_iters;
  std::optional<double> eps_bound;
  if (cfg.run.slater_rho) {
    try {
      const auto eb = check_epsilon_bound(*inst, cfg.gains.eps, *cfg.run.slater_rho, oracle_opt);
      summary["eps_bound"] = ojson{{"rho", eb.rho},
                                   {"slater_margin", eb.slater_margin},
                                   {"f_slater", eb.f_slater},
                                   {"f_opt", eb.f_opt},
                                   {"bound", eb.bound},
                                   {"eps", eb.eps},
                                   {"eps_below_bound", eb.eps_below_bound}};
      if (eb.bound > 0.0) eps_bound = eb.bound;
      text << "eps bound: " << num(eb.bound) << " (eps = " << num(eb.eps) << ", "
           << (eb.eps_below_bound ? "below" : "NOT below") << ")\n";
    } catch (const std::invalid_argument& e) {
      summary["eps_bound"] = ojson{{"error", e.what()}};
      text << "eps bound: unavailable (" << e.what() << ")\n";
    }
  } else {
    summary["eps_bound"] = nullptr;
    text << "eps bound: not requested\n";
  }

  if (cfg.run.mode == RunMode::validate) {
    if (!gains.ok && !cfg.run.override_gain_check) return finish(kExitHypothesisRejected, "gain condition fails");
    return finish(kExitOk, "validated");
  }

  try {
    fs::create_directories(out_dir);
    write_file(out_dir / "schema.csv", kSchema, report.files);

    if (cfg.run.mode == RunMode::oracle) {
      const OracleResult res = solve_centralized(*inst, cfg.gains.eps, oracle_opt);
      summary["oracle"] = ojson{{"iterations", res.iterations},
                                {"converged", res.converged},
                                {"optimal_penalized_cost", res.optimal_cost}};
      summary["final"] = schedule_summary(*inst, res.schedule, cfg.gains.eps);
      summary["residuals"] = residuals_json(res.final_residuals);
      summary["feasibility"] = feasibility_json(check_feasibility(*inst, res.schedule));
      write_file(out_dir / "schedule.csv", schedule_csv(*inst, res.schedule), report.files);
      text << "oracle cost: " << num(evaluate_cost(*inst, res.schedule)) << '\n';
      return finish(kExitOk, res.converged ? "converged" : "iteration limit");
    }

    IntegrationOptions opt;
    opt.dt = cfg.run.dt;
    opt.t_final = cfg.run.t_final;
    opt.sample_every = cfg.run.sample_every;
    opt.method = cfg.run.method;
    opt.policy = cfg.run.policy;
    opt.anti_chatter = cfg.run.anti_chatter;
    opt.override_gain_check = cfg.run.override_gain_check;
    opt.keep_states = cfg.run.emit_full_state;
    opt.use_stop_rule = cfg.run.use_stop_rule;
    opt.stop_tolerance = cfg.run.stop_tolerance;
    opt.stop_window = cfg.run.stop_window;
    opt.eps_bound = eps_bound;

    const NetworkState state0 = initial_state(cfg, *inst);
    TrajectoryRecord rec;
    if (cfg.run.mode == RunMode::agents) {
      AgentNetwork net(*inst, graph, cfg.gains, state0, {cfg.run.policy, cfg.run.anti_chatter});
      rec = net.run(opt);
      const auto& st = net.stats();
      summary["communication"] = ojson{{"rounds", st.rounds},
                                       {"messages", st.messages},
                                       {"bytes", st.bytes},
                                       {"audit_local_only", net.audit().only_out_neighbors(graph)}};
    } else {
      rec = integrate(*inst, lap, cfg.gains, state0, opt);
    }

    const Schedule final_schedule = rec.final_state.schedule();
    summary["method"] = cfg.run.method == StepMethod::euler ? "euler" : "rk4";
    summary["dt"] = cfg.run.dt;
    summary["t_final"] = cfg.run.t_final;
    summary["stop_reason"] = rec.stop_reason == StopReason::converged ? "converged" : "t_final";
    summary["steps"] = rec.steps;
    summary["final_time"] = rec.samples.empty() ? 0.0 : rec.samples.back().time;
    summary["chatter_events"] = rec.chatter_events;
    ojson fin = schedule_summary(*inst, final_schedule, cfg.gains.eps);
    const std::size_t tail = std::max<std::size_t>(1, rec.samples.size() / 10);
    double tail_sum = 0.0;
    for (std::size_t s = rec.samples.size() - tail; s < rec.samples.size(); ++s) tail_sum += rec.samples[s].cost;
    fin["tail_mean_cost"] = tail_sum / static_cast<double>(tail);
    fin["conservation"] = conservation_residual(rec.final_state);
    fin["max_abs_z"] = rec.final_state.z.max_abs();
    summary["final"] = fin;
    ojson res = residuals_json(rec.final_residuals);
    res["field"] = rec.final_field_residual;
    summary["residuals"] = res;
    summary["feasibility"] = feasibility_json(check_feasibility(*inst, final_schedule));
    summary["warnings"] = rec.warnings;

    write_file(out_dir / "trajectory.csv", trajectory_csv(rec, inst->horizon()), report.files);
    write_file(out_dir / "schedule.csv", schedule_csv(*inst, final_schedule), report.files);
    if (cfg.run.emit_full_state) write_file(out_dir / "state.csv", state_csv(rec), report.files);

    for (const auto& w : rec.warnings) text << "warning: " << w << '\n';
    text << "final cost: " << num(evaluate_cost(*inst, final_schedule)) << '\n';
    text << "max load gap: " << num(fin["max_load_gap"].get<double>()) << '\n';
    return finish(kExitOk, rec.stop_reason == StopReason::converged ? "converged" : "completed");
  } catch (const HypothesisRejected& e) {
    text << "hypothesis rejected: " << e.what() << '\n';
    summary["error"] = e.what();
    return finish(kExitHypothesisRejected, "hypothesis rejected");
  } catch (const DivergenceError& e) {
    text << "diverged: " << e.what() << '\n';
    summary["error"] = e.what();
    return finish(kExitDiverged, "diverged");
  } catch (const std::invalid_argument& e) {
    text << "config error: " << e.what() << '\n';
    summary["error"] = e.what();
    return finish(kExitConfigError, "config error");
  } catch (const std::runtime_error& e) {
    text << "error: " << e.what() << '\n';
    summary["error"] = e.what();
    return finish(kExitConfigError, "io error");
  }
}

}  // namespace deds
