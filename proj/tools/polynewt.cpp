#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "polynewt/bench.hpp"
#include "polynewt/diagnostics.hpp"
#include "polynewt/io.hpp"
#include "polynewt/losses.hpp"
#include "polynewt/regularizers.hpp"

namespace fs = std::filesystem;
using namespace polynewt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitMaxIters = 3;
constexpr int kExitDomainFailure = 4;
constexpr int kExitBenchFailure = 5;
constexpr int kExitTiltUnstable = 6;

struct SolveFlags {
  std::string problem;
  std::string x0_file;
  std::string method = "fista";
  std::string out = "run";
  std::string step;           // "fixed:a" | "bt:a0,rho[,growth]"
  std::string extrapolation;  // "fista" | "cd:d" | "llt:p,q"
  double kkt_tol = 1e-8;
  double switch_tol = 1e-3;
  int max_iters = 10000;
  bool no_safeguard = false;
  std::vector<std::string> overrides;  // key=value dotted paths into the problem json
};

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

void apply_step_flag(SolverConfig& cfg, const std::string& flag) {
  if (flag.empty()) return;
  const auto colon = flag.find(':');
  const std::string head = flag.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : flag.substr(colon + 1);
  if (head == "fixed") {
    cfg.step_mode = StepMode::fixed;
    if (!tail.empty()) cfg.alpha = std::stod(tail);
  } else if (head == "bt") {
    cfg.step_mode = StepMode::backtracking;
    if (!tail.empty()) {
      const auto v = parse_numbers(tail);
      if (v.size() >= 1) cfg.bt_alpha0 = v[0];
      if (v.size() >= 2) cfg.bt_shrink = v[1];
      if (v.size() >= 3) cfg.bt_growth = v[2];
    }
  } else {
    throw CLI::ValidationError("--step", "expected fixed:a or bt:a0,rho[,growth]");
  }
}

void apply_extrapolation_flag(SolverConfig& cfg, const std::string& flag) {
  if (flag.empty()) return;
  const auto colon = flag.find(':');
  const std::string head = flag.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : flag.substr(colon + 1);
  if (head == "fista") {
    cfg.extrapolation = ExtrapolationRule::original_fista;
  } else if (head == "cd") {
    cfg.extrapolation = ExtrapolationRule::chambolle_dossal;
    if (!tail.empty()) cfg.cd_d = std::stod(tail);
  } else if (head == "llt") {
    cfg.extrapolation = ExtrapolationRule::liang_luo_tao;
    const auto v = parse_numbers(tail);
    if (v.size() != 2) throw CLI::ValidationError("--extrapolation", "llt needs llt:p,q");
    cfg.llt_p = v[0];
    cfg.llt_q = v[1];
  } else {
    throw CLI::ValidationError("--extrapolation", "expected fista, cd:d or llt:p,q");
  }
}

/// Dotted-path overrides into the problem json; unknown paths are rejected.
void apply_overrides(io::json& j, const std::vector<std::string>& kvs) {
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::runtime_error("override '" + kv + "' is not key=value");
    const std::string path = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    io::json* node = &j;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i]))
        throw std::runtime_error("unknown config key '" + path + "'");
      node = &(*node)[parts[i]];
    }
    if (parts.empty() || !node->contains(parts.back()))
      throw std::runtime_error("unknown config key '" + path + "'");
    io::json parsed = io::json::parse(value, nullptr, false);
    (*node)[parts.back()] = parsed.is_discarded() ? io::json(value) : parsed;
  }
}

Vector default_x0(const ProblemInstance& prob) {
  if (const auto* kl = dynamic_cast<const PoissonKLLoss*>(prob.loss.get()))
    return kl->model().apply_adjoint(kl->counts());
  return Vector::Zero(prob.n);
}

int cmd_solve(const SolveFlags& f) {
  ProblemInstance prob;
  try {
    std::ifstream in(f.problem);
    if (!in) throw std::runtime_error("cannot open problem file " + f.problem);
    io::json j;
    in >> j;
    apply_overrides(j, f.overrides);
    prob = io::problem_from_json(j, fs::path(f.problem).parent_path());
  } catch (const std::exception& e) {
    std::cerr << "polynewt solve: " << e.what() << "\n";
    return kExitBadInput;
  }

  SolverConfig cfg;
  const auto m = method_from_string(f.method);
  if (!m) {
    std::cerr << "polynewt solve: unknown method '" << f.method << "'\n";
    return kExitBadInput;
  }
  cfg.method = *m;
  cfg.kkt_tol = f.kkt_tol;
  cfg.switch_tol = f.switch_tol;
  cfg.max_iters = f.max_iters;
  cfg.safeguard = !f.no_safeguard;
  try {
    apply_step_flag(cfg, f.step);
    apply_extrapolation_flag(cfg, f.extrapolation);
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "polynewt solve: " << e.what() << "\n";
    return kExitBadInput;
  }

  Vector x0;
  try {
    x0 = f.x0_file.empty() ? default_x0(prob) : io::point_from_json_file(f.x0_file);
    if (x0.size() != prob.n) throw std::runtime_error("x0 has wrong dimension");
  } catch (const std::exception& e) {
    std::cerr << "polynewt solve: " << e.what() << "\n";
    return kExitBadInput;
  }

  SolverTrace trace;
  try {
    trace = solve(prob, cfg, x0);
  } catch (const std::exception& e) {
    std::cerr << "polynewt solve: " << e.what() << "\n";
    return kExitBadInput;
  }

  fs::create_directories(f.out);
  io::write_trace_csv(fs::path(f.out) / "trace.csv", trace);
  io::json summary;
  summary["problem"] = prob.name;
  summary["status"] = to_string(trace.status);
  summary["iterations"] = trace.iterations();
  summary["terminal_kkt"] = trace.terminal_kkt();
  summary["terminal_objective"] = trace.terminal_objective();
  summary["newton_steps_accepted"] = trace.newton_steps_accepted();
  summary["message"] = trace.message;
  summary["config"] = io::solver_config_to_json(cfg);
  io::json xs = io::json::array();
  for (Index i = 0; i < trace.final_x.size(); ++i) xs.push_back(trace.final_x[i]);
  summary["x"] = xs;
  io::write_text_file(fs::path(f.out) / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";

  switch (trace.status) {
    case TerminalStatus::converged: return kExitOk;
    case TerminalStatus::max_iters: return kExitMaxIters;
    case TerminalStatus::domain_failure: return kExitDomainFailure;
  }
  return kExitBadInput;
}

int cmd_bench(const std::string& suite, std::uint64_t seed, const std::string& out) {
  std::vector<bench::ExperimentSpec> specs;
  try {
    specs = bench::suite_specs(suite, seed);
  } catch (const std::exception& e) {
    std::cerr << "polynewt bench: " << e.what() << "\n";
    return kExitBadInput;
  }
  try {
    const auto result = bench::run_suite(specs, out);
    std::cout << result.summary_csv;
    std::cout << "summary_hash " << io::hash_hex(result.content_hash) << "\n";
    return result.all_converged ? kExitOk : kExitBenchFailure;
  } catch (const std::exception& e) {
    std::cerr << "polynewt bench: " << e.what() << "\n";
    return kExitBenchFailure;
  }
}

int cmd_check_tilt(const std::string& problem, const std::string& point) {
  try {
    const ProblemInstance prob = io::load_problem(problem);
    const Vector x = io::point_from_json_file(point);
    if (x.size() != prob.n) throw std::runtime_error("candidate point has wrong dimension");
    const TiltReport rep = check_tilt_stability(prob, x);
    if (rep.candidate_warning)
      std::cerr << "warning: candidate is far from stationary (kkt "
                << io::fmt_g17(rep.kkt_at_candidate) << "); report computed anyway\n";
    io::json j;
    j["tilt_stable"] = rep.tilt_stable;
    j["ker_dim"] = rep.ker_dim;
    j["subspace_dim"] = rep.subspace_dim;
    j["max_principal_cosine"] = rep.max_principal_cosine;
    j["kernel_tol"] = rep.kernel_tol;
    j["transversality_tol"] = rep.transversality_tol;
    j["kkt_at_candidate"] = rep.kkt_at_candidate;
    j["candidate_warning"] = rep.candidate_warning;
    std::cout << j.dump(2) << "\n";
    return rep.tilt_stable ? kExitOk : kExitTiltUnstable;
  } catch (const std::exception& e) {
    std::cerr << "polynewt check-tilt: " << e.what() << "\n";
    return kExitBadInput;
  }
}

int cmd_inspect(const std::string& trace_file) {
  std::ifstream in(trace_file);
  if (!in) {
    std::cerr << "polynewt inspect: cannot open " << trace_file << "\n";
    return kExitBadInput;
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,objective,kkt_residual", 0) != 0) {
    std::cerr << "polynewt inspect: not a polynewt trace csv\n";
    return kExitBadInput;
  }
  long rows = 0, newton = 0, rejected = 0;
  double last_obj = kInf, last_kkt = kInf, min_kkt = kInf;
  std::string last_k;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string k, obj, kkt, kind;
    std::getline(ss, k, ',');
    std::getline(ss, obj, ',');
    std::getline(ss, kkt, ',');
    std::getline(ss, kind, ',');
    ++rows;
    last_k = k;
    last_obj = std::stod(obj);
    last_kkt = std::stod(kkt);
    min_kkt = std::min(min_kkt, last_kkt);
    newton += kind == "newton";
    rejected += kind == "newton_rejected";
  }
  std::cout << "iterations          " << last_k << "\n"
            << "records             " << rows << "\n"
            << "terminal_objective  " << io::fmt_g17(last_obj) << "\n"
            << "terminal_kkt        " << io::fmt_g17(last_kkt) << "\n"
            << "min_kkt             " << io::fmt_g17(min_kkt) << "\n"
            << "newton_accepted     " << newton << "\n"
            << "newton_rejected     " << rejected << "\n";
  return kExitOk;
}

int cmd_gen(const std::string& kind, std::uint64_t seed, const std::string& out) {
  try {
    bench::ExperimentSpec spec;
    if (kind == "lasso") spec = bench::ExperimentSpec::lasso(seed);
    else if (kind == "linf") spec = bench::ExperimentSpec::linf(seed);
    else if (kind == "tv1d") spec = bench::ExperimentSpec::tv(seed);
    else if (kind == "oscar") spec = bench::ExperimentSpec::oscar(seed);
    else if (kind == "poisson_sr") spec = bench::ExperimentSpec::poisson_sr(seed);
    else if (kind == "remark34") spec = bench::ExperimentSpec::remark34();
    else {
      std::cerr << "polynewt gen: unknown kind '" << kind << "'\n";
      return kExitBadInput;
    }
    const auto gen = bench::generate(spec);
    fs::create_directories(out);
    io::save_problem(gen.prob, fs::path(out) / (spec.id() + ".json"));
    io::json truth;
    io::json xs = io::json::array();
    for (Index i = 0; i < gen.x_star.size(); ++i) xs.push_back(gen.x_star[i]);
    truth["x"] = xs;
    io::write_text_file(fs::path(out) / (spec.id() + "_truth.json"), truth.dump() + "\n");
    io::write_text_file(fs::path(out) / (spec.id() + "_manifest.json"),
                        gen.manifest.dump(2) + "\n");
    std::cout << "wrote " << (fs::path(out) / (spec.id() + ".json")).string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "polynewt gen: " << e.what() << "\n";
    return kExitBadInput;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polynewt: nonsmooth Newton methods with effective subspaces"};
  app.require_subcommand(1);

  SolveFlags sf;
  auto* solve_cmd = app.add_subcommand("solve", "solve one problem instance");
  solve_cmd->add_option("--problem", sf.problem, "problem JSON file")->required();
  solve_cmd->add_option("--x0", sf.x0_file, "starting point JSON (default: zeros; poisson: H^T M^T y)");
  solve_cmd->add_option("--method", sf.method, "ista | fista | newton-ista | newton-fista")
      ->capture_default_str();
  solve_cmd->add_option("--out", sf.out, "output directory")->capture_default_str();
  solve_cmd->add_option("--kkt-tol", sf.kkt_tol, "relative KKT stopping tolerance")
      ->capture_default_str();
  solve_cmd->add_option("--switch-tol", sf.switch_tol, "Newton switch tolerance on |x_k - y_k|")
      ->capture_default_str();
  solve_cmd->add_option("--max-iters", sf.max_iters, "iteration cap")->capture_default_str();
  solve_cmd->add_option("--step", sf.step, "fixed:alpha (default fixed:1/L) or bt:alpha0,rho[,growth]");
  solve_cmd->add_option("--extrapolation", sf.extrapolation, "fista (default) | cd:d | llt:p,q");
  solve_cmd->add_flag("--no-safeguard", sf.no_safeguard,
                      "accept every Newton step without the KKT-decrease safeguard");
  solve_cmd->add_option("--set", sf.overrides, "dotted-path problem overrides, e.g. reg.lambda=0.5");

  std::string bench_suite, bench_out = "bench_out";
  std::uint64_t bench_seed = 7;
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark suite");
  bench_cmd->add_option("--suite", bench_suite, "paper51 | toy | poisson")->required();
  bench_cmd->add_option("--seed", bench_seed, "data seed")->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "output directory")->capture_default_str();

  std::string tilt_problem, tilt_point;
  auto* tilt_cmd = app.add_subcommand("check-tilt", "tilt-stability test at a candidate point");
  tilt_cmd->add_option("--problem", tilt_problem, "problem JSON file")->required();
  tilt_cmd->add_option("--point", tilt_point, "candidate point JSON file")->required();

  std::string inspect_trace;
  auto* inspect_cmd = app.add_subcommand("inspect", "summarize a trace CSV");
  inspect_cmd->add_option("--trace", inspect_trace, "trace.csv produced by solve/bench")->required();

  std::string gen_kind, gen_out = "gen_out";
  std::uint64_t gen_seed = 7;
  auto* gen_cmd = app.add_subcommand("gen", "generate a seeded problem instance");
  gen_cmd->add_option("--kind", gen_kind, "lasso | linf | tv1d | oscar | poisson_sr | remark34")
      ->required();
  gen_cmd->add_option("--seed", gen_seed, "data seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitBadInput;
  }

  if (solve_cmd->parsed()) return cmd_solve(sf);
  if (bench_cmd->parsed()) return cmd_bench(bench_suite, bench_seed, bench_out);
  if (tilt_cmd->parsed()) return cmd_check_tilt(tilt_problem, tilt_point);
  if (inspect_cmd->parsed()) return cmd_inspect(inspect_trace);
  if (gen_cmd->parsed()) return cmd_gen(gen_kind, gen_seed, gen_out);
  return kExitBadInput;
}
