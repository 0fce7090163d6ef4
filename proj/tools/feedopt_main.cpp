#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "feedopt/milpio.hpp"
#include "feedopt/pipeline.hpp"
#include "feedopt/validate.hpp"

using namespace feedopt;

namespace {

bool verbose() { return std::getenv("FEEDOPT_LOG") != nullptr; }

struct CommonOpts {
  std::uint64_t seed = 1;
  long iters = -1;
  double tmax = -1;
  int tred = -1, nimp = -1, nstagnant = -1;
  double rho = -1;
  std::string rho_file;
  double postopt_limit = -1;
  bool flat = false;
  bool no_postopt = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--iters", iters, "maximum search iterations");
    cmd->add_option("--tmax", tmax, "threshold coefficient");
    cmd->add_option("--tred", tred, "threshold reduction divisor");
    cmd->add_option("--nimp", nimp, "restart multiplier");
    cmd->add_option("--nstagnant", nstagnant, "stagnation checks before stop");
    cmd->add_option("--rho", rho, "assignment trade-off weight (scalar)");
    cmd->add_option("--rho-file", rho_file, "per-layer rho vector (JSON array)");
    cmd->add_option("--time-limit-postopt", postopt_limit,
                    "per-layer MILP time limit in seconds");
    cmd->add_flag("--flat", flat, "use the flat assignment model");
    cmd->add_flag("--no-postopt", no_postopt, "skip the post-optimization step");
  }

  SolveConfig config(const LayeredGraph& graph) const {
    SolveConfig cfg;
    cfg.seed = seed;
    if (iters >= 0) cfg.da.iter_max = iters;
    if (tmax >= 0) cfg.da.t_max = tmax;
    if (tred > 0) cfg.da.t_red = tred;
    if (nimp > 0) cfg.da.n_imp = nimp;
    if (nstagnant > 0) cfg.da.n_stagnant = nstagnant;
    if (postopt_limit >= 0) cfg.postopt.layer_time_limit_s = postopt_limit;
    cfg.layered = !flat;
    cfg.run_postopt = !no_postopt;
    if (!rho_file.empty()) {
      const auto j = nlohmann::json::parse(read_file(rho_file));
      cfg.assign.rho = j.get<std::vector<double>>();
      if (cfg.assign.rho.size() != 1 && cfg.assign.rho.size() != graph.layers.size())
        throw std::runtime_error("rho vector length does not match the layer count");
    } else if (rho >= 0) {
      cfg.assign.rho = {rho};
    }
    return cfg;
  }
};

int cmd_generate(const std::string& spec_path, const std::string& out,
                 const std::string& report_path) {
  const ScenarioSpec spec = load_scenario(spec_path);
  GenerationReport report;
  const Instance inst = generate(spec, &report);
  save_instance(inst, out);
  if (!report_path.empty()) write_file_atomic(report_path, report.to_json());
  if (verbose())
    std::cerr << "generated " << inst.requests.size() << " requests, " << report.mp_count
              << " meeting points\n";
  return 0;
}

int cmd_assign(const std::string& inst_path, const CommonOpts& opts, const std::string& out) {
  const Instance inst = load_instance(inst_path);
  const LayeredGraph graph = build_layered_graph(inst);
  const SolveConfig cfg = opts.config(graph);
  const Assignment a = cfg.layered ? assign_layered(graph, inst, cfg.assign)
                                   : assign_flat(graph, inst, cfg.assign);
  write_file_atomic(out, assignment_to_json(a));
  return 0;
}

int cmd_solve(const std::string& inst_path, const CommonOpts& opts, int repeats,
              const std::string& out, const std::string& kpi_out, const std::string& log_out) {
  const Instance inst = load_instance(inst_path);
  const LayeredGraph graph = build_layered_graph(inst);
  std::ofstream log;
  if (!log_out.empty()) log.open(log_out);

  SolveResult best;
  bool have = false;
  for (int rep = 0; rep < std::max(1, repeats); ++rep) {
    SolveConfig cfg = opts.config(graph);
    cfg.seed = opts.seed + static_cast<std::uint64_t>(rep);
    if (log.is_open()) cfg.progress = &log;
    SolveResult r = solve_instance(inst, graph, cfg);
    if (verbose())
      std::cerr << "seed " << cfg.seed << ": objective " << r.solution.objective << " ("
                << r.wall_s << " s)\n";
    if (!have || r.solution.objective < best.solution.objective - 1e-9) {
      best = std::move(r);
      have = true;
    }
  }
  canonicalize_charger_dummies(best.solution, best.ctx);
  save_solution(best.solution, best.ctx, out);
  if (!kpi_out.empty()) write_file_atomic(kpi_out, kpis(best.solution, best.ctx).to_json());
  const ValidationReport rep = validate_solution(best.solution, best.ctx);
  if (!rep.ok()) {
    std::cerr << "solver produced an invalid solution\n" << rep.to_json();
    return 1;
  }
  return 0;
}

int cmd_tune_rho(const std::string& inst_path, const CommonOpts& opts, int budget,
                 const std::string& out) {
  const Instance inst = load_instance(inst_path);
  const LayeredGraph graph = build_layered_graph(inst);
  SolveConfig cfg = opts.config(graph);
  const std::vector<double> rho = tune_rho(inst, graph, budget, cfg);
  nlohmann::ordered_json j = rho;
  write_file_atomic(out, j.dump(2) + "\n");
  return 0;
}

int cmd_postopt(const std::string& inst_path, const std::string& sol_path,
                const CommonOpts& opts, const std::string& out) {
  const Instance inst = load_instance(inst_path);
  const LayeredGraph graph = build_layered_graph(inst);
  // rebuild the context the stored solution was written against
  Assignment a;
  {
    SolveContext probe;
    probe.inst = &inst;
    probe.graph = &graph;
    const auto j = nlohmann::json::parse(read_file(sol_path));
    a.request_mp_node.assign(inst.requests.size(), -1);
    for (const auto& ja : j.at("assignment"))
      if (ja.contains("mp_node"))
        a.request_mp_node[ja.at("request").get<std::size_t>()] = ja.at("mp_node").get<int>();
  }
  SolveContext ctx = make_context(inst, graph, a);
  Solution sol = load_solution(sol_path, ctx);
  PostoptParams params;
  if (opts.postopt_limit >= 0) params.layer_time_limit_s = opts.postopt_limit;
  PostoptOutcome po = post_optimize(sol, a, ctx, params);
  if (po.improved) {
    canonicalize_charger_dummies(po.solution, po.ctx);
    save_solution(po.solution, po.ctx, out);
  } else {
    save_solution(sol, ctx, out);
  }
  return 0;
}

int cmd_export(const std::string& inst_path, bool second_stage,
               const std::string& assign_path, const std::string& out) {
  const Instance inst = load_instance(inst_path);
  const LayeredGraph graph = build_layered_graph(inst);
  if (second_stage) {
    if (assign_path.empty()) {
      std::cerr << "--second-stage needs --assignment\n";
      return 2;
    }
    const Assignment a =
        assignment_from_json(read_file(assign_path), inst.requests.size());
    write_lp_file(build_second_stage_model(inst, graph, a), out);
  } else {
    write_lp_file(build_full_model(inst, graph), out);
  }
  return 0;
}

int cmd_validate(const std::string& inst_path, const std::string& sol_path,
                 const std::string& out) {
  const Instance inst = load_instance(inst_path);
  const LayeredGraph graph = build_layered_graph(inst);
  Assignment a;
  a.request_mp_node.assign(inst.requests.size(), -1);
  const auto j = nlohmann::json::parse(read_file(sol_path));
  for (const auto& ja : j.at("assignment"))
    if (ja.contains("mp_node"))
      a.request_mp_node[ja.at("request").get<std::size_t>()] = ja.at("mp_node").get<int>();
  SolveContext ctx = make_context(inst, graph, a);
  const Solution sol = load_solution(sol_path, ctx);
  const ValidationReport rep = validate_solution(sol, ctx);
  if (!out.empty())
    write_file_atomic(out, rep.to_json());
  else
    std::cout << rep.to_json();
  return rep.ok() ? 0 : 1;
}

int cmd_check_milp(const std::string& model_path, const std::string& vars_path,
                   const std::string& out) {
  const LpModel model = parse_lp_file(model_path);
  const auto values = read_variables_file(vars_path);
  const CheckResult res = check_solution(model, values);
  if (!out.empty())
    write_file_atomic(out, res.to_json());
  else
    std::cout << res.to_json();
  return res.ok() ? 0 : 1;
}

int cmd_report(const std::string& inst_path, const std::vector<std::string>& sols,
               const std::string& format, const std::string& out) {
  const Instance inst = load_instance(inst_path);
  const LayeredGraph graph = build_layered_graph(inst);
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  double best = kInf, sum = 0;
  for (const auto& path : sols) {
    Assignment a;
    a.request_mp_node.assign(inst.requests.size(), -1);
    const auto j = nlohmann::json::parse(read_file(path));
    for (const auto& ja : j.at("assignment"))
      if (ja.contains("mp_node"))
        a.request_mp_node[ja.at("request").get<std::size_t>()] = ja.at("mp_node").get<int>();
    SolveContext ctx = make_context(inst, graph, a);
    const Solution sol = load_solution(path, ctx);
    const Kpis k = kpis(sol, ctx);
    best = std::min(best, sol.objective);
    sum += sol.objective;
    rows.push_back({{"file", path},
                    {"objective", sol.objective},
                    {"unserved", sol.unserved_requests(ctx)},
                    {"vehicles_used", k.vehicles_used},
                    {"service_rate_pct", k.service_rate_pct},
                    {"mean_walk_km", k.mean_walk_km},
                    {"mean_ivt_min", k.mean_ivt_min},
                    {"mean_station_wait_min", k.mean_station_wait_min},
                    {"total_kmt", k.total_kmt},
                    {"cus_per_kmt", k.cus_per_kmt},
                    {"cus_per_mp", k.cus_per_mp},
                    {"total_charging_min", k.total_charging_min}});
  }
  std::string text;
  if (format == "csv") {
    std::ostringstream csv;
    csv << "file,objective,unserved,vehicles_used,service_rate_pct,mean_walk_km,"
           "mean_ivt_min,mean_station_wait_min,total_kmt,cus_per_kmt,cus_per_mp,"
           "total_charging_min\n";
    for (const auto& r : rows) {
      csv << r.at("file").get<std::string>();
      for (const char* key : {"objective", "unserved", "vehicles_used", "service_rate_pct",
                              "mean_walk_km", "mean_ivt_min", "mean_station_wait_min",
                              "total_kmt", "cus_per_kmt", "cus_per_mp", "total_charging_min"})
        csv << "," << r.at(key).dump();
      csv << "\n";
    }
    csv << "# best_objective=" << best << " avg_objective=" << sum / std::max<std::size_t>(1, sols.size())
        << "\n";
    text = csv.str();
  } else {
    nlohmann::ordered_json j;
    j["runs"] = rows;
    j["best_objective"] = best;
    j["avg_objective"] = sum / std::max<std::size_t>(1, sols.size());
    text = j.dump(2) + "\n";
  }
  if (!out.empty())
    write_file_atomic(out, text);
  else
    std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meeting-point electric feeder service solver"};
  app.require_subcommand(1);

  std::string in, in2, out = "out.json", report_path, format = "json", assign_path;
  std::vector<std::string> sol_paths;
  int repeats = 1, budget = 15;
  bool second_stage = false;
  CommonOpts opts;

  auto* gen = app.add_subcommand("generate", "build an instance from a scenario spec");
  gen->add_option("spec", in)->required();
  gen->add_option("-o,--out", out);
  gen->add_option("--report", report_path);

  auto* asg = app.add_subcommand("assign", "first-stage customer-to-MP assignment");
  asg->add_option("instance", in)->required();
  asg->add_option("-o,--out", out);
  opts.attach(asg);

  auto* slv = app.add_subcommand("solve", "full pipeline");
  slv->add_option("instance", in)->required();
  slv->add_option("-o,--out", out);
  slv->add_option("--repeats", repeats, "independent runs, keep the best");
  slv->add_option("--kpi", report_path);
  std::string log_out;
  slv->add_option("--log", log_out, "line-delimited progress log");
  opts.attach(slv);

  auto* tune = app.add_subcommand("tune-rho", "two-step rho search");
  tune->add_option("instance", in)->required();
  tune->add_option("-o,--out", out);
  tune->add_option("--budget", budget);
  opts.attach(tune);

  auto* post = app.add_subcommand("postopt", "re-optimize layers with unserved customers");
  post->add_option("instance", in)->required();
  post->add_option("solution", in2)->required();
  post->add_option("-o,--out", out);
  opts.attach(post);

  auto* exp = app.add_subcommand("export-milp", "write the model in LP format");
  exp->add_option("instance", in)->required();
  exp->add_option("-o,--out", out);
  exp->add_flag("--second-stage", second_stage);
  exp->add_option("--assignment", assign_path);

  auto* val = app.add_subcommand("validate", "independent constraint check");
  val->add_option("instance", in)->required();
  val->add_option("solution", in2)->required();
  val->add_option("-o,--out", out)->default_val("");

  auto* chk = app.add_subcommand("check-milp", "evaluate a variable file against a model");
  chk->add_option("model", in)->required();
  chk->add_option("variables", in2)->required();
  chk->add_option("-o,--out", out)->default_val("");

  auto* rpt = app.add_subcommand("report", "aggregate solved runs");
  rpt->add_option("solutions", sol_paths)->required();
  rpt->add_option("--instance", in)->required();
  rpt->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
  rpt->add_option("-o,--out", out)->default_val("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (gen->parsed()) return cmd_generate(in, out, report_path);
    if (asg->parsed()) return cmd_assign(in, opts, out);
    if (slv->parsed()) return cmd_solve(in, opts, repeats, out, report_path, log_out);
    if (tune->parsed()) return cmd_tune_rho(in, opts, budget, out);
    if (post->parsed()) return cmd_postopt(in, in2, opts, out);
    if (exp->parsed()) return cmd_export(in, second_stage, assign_path, out);
    if (val->parsed()) return cmd_validate(in, in2, out);
    if (chk->parsed()) return cmd_check_milp(in, in2, out);
    if (rpt->parsed()) return cmd_report(in, sol_paths, format, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
