#include "polynewt/bench.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <thread>

#include "polynewt/diagnostics.hpp"
#include "polynewt/io.hpp"
#include "polynewt/regularizers.hpp"
#include "polynewt/rng.hpp"

namespace polynewt::bench {

namespace fs = std::filesystem;

std::string ExperimentSpec::id() const {
  std::ostringstream os;
  os << kind << "_seed" << seed;
  return os.str();
}

namespace {

std::vector<SolverConfig> ls_method_set(double kkt_tol, double switch_tol, double alpha) {
  std::vector<SolverConfig> out;
  for (Method m : {Method::ista, Method::fista, Method::newton_ista, Method::newton_fista}) {
    SolverConfig c;
    c.method = m;
    c.step_mode = StepMode::fixed;
    c.alpha = alpha;  // 0 derives 1/L
    c.kkt_tol = kkt_tol;
    c.switch_tol = switch_tol;
    out.push_back(c);
  }
  return out;
}

std::string stream_doc(const std::string& kind) {
  if (kind == "lasso") return "A,support,xvals,noise";
  if (kind == "linf") return "A,support,signs,fill,noise";
  if (kind == "tv1d" || kind == "oscar") return "A,noise";
  if (kind == "poisson_sr") return "positions,intensities,counts";
  return "";
}

}  // namespace

ExperimentSpec ExperimentSpec::lasso(std::uint64_t seed) {
  ExperimentSpec s;
  s.kind = "lasso";
  s.m = 48;
  s.n = 128;
  s.sparsity = 8;
  s.lambda_c = 0.1;
  s.noise_var = 1e-3;
  s.seed = seed;
  s.solvers = ls_method_set(1e-8, 1e-3, 0.0);
  return s;
}

ExperimentSpec ExperimentSpec::linf(std::uint64_t seed) {
  ExperimentSpec s;
  s.kind = "linf";
  s.m = 63;
  s.n = 64;
  s.sparsity = 8;
  s.lambda_c = 0.1;
  s.noise_var = 1e-3;
  s.seed = seed;
  s.solvers = ls_method_set(1e-8, 1e-3, 0.0);
  return s;
}

ExperimentSpec ExperimentSpec::tv(std::uint64_t seed) {
  ExperimentSpec s;
  s.kind = "tv1d";
  s.m = 20;
  s.n = 90;
  s.lambda_c = 0.3;
  s.noise_var = 1e-3;
  s.seed = seed;
  s.solvers = ls_method_set(1e-8, 1e-3, 0.0);
  return s;
}

ExperimentSpec ExperimentSpec::oscar(std::uint64_t seed) {
  ExperimentSpec s;
  s.kind = "oscar";
  s.m = 300;
  s.n = 300;
  s.lambda_c = 1e-6;
  s.noise_var = 1e-2;
  s.seed = seed;
  s.solvers = ls_method_set(1e-8, 1e-3, 0.0);
  return s;
}

ExperimentSpec ExperimentSpec::poisson_sr(std::uint64_t seed) {
  ExperimentSpec s;
  s.kind = "poisson_sr";
  s.truth_side = 16;
  s.q = 2;
  // at 8x8 low resolution the paper's blur-to-field ratio corresponds to a
  // much narrower PSF than its 64x64 setting; 1.2 low-res pixels keeps the
  // desk problem a genuine super-resolution task that is still recoverable
  s.fwhm_lowres = 1.2;
  s.background = 1.0;
  s.n_sources = 8;
  s.seed = seed;
  s.ref_tol = 1e-9;
  for (Method m : {Method::fista, Method::newton_fista}) {
    SolverConfig c;
    c.method = m;
    c.step_mode = StepMode::backtracking;
    c.bt_alpha0 = 1.0;
    c.bt_shrink = 0.5;
    c.bt_growth = 2.0;
    c.kkt_tol = 1e-6;
    c.switch_tol = 1e-1;  // image-scale iterates; 1e-3 never fires at this size
    s.solvers.push_back(c);
  }
  return s;
}

ExperimentSpec ExperimentSpec::remark34() {
  ExperimentSpec s;
  s.kind = "remark34";
  s.m = 2;
  s.n = 2;
  s.seed = 0;
  s.ref_tol = 1e-13;
  for (Method m : {Method::ista, Method::fista, Method::newton_ista, Method::newton_fista}) {
    SolverConfig c;
    c.method = m;
    c.step_mode = StepMode::fixed;
    c.alpha = 0.5;
    c.kkt_tol = 1e-12;
    c.switch_tol = 0.1;
    s.solvers.push_back(c);
  }
  return s;
}

namespace {

struct LsParts {
  Matrix A;
  Vector b;
  Vector w;
};

Matrix gauss_matrix(CounterRng& rng, Index m, Index n) {
  Matrix a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.gauss();
  return a;
}

std::vector<Index> pick_distinct(CounterRng& rng, Index n, Index k) {
  std::vector<Index> idx(n);
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < k; ++i)
    std::swap(idx[i], idx[i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - i)))]);
  idx.resize(k);
  return idx;
}

GeneratedInstance finish_ls(const ExperimentSpec& spec, Matrix A, Vector x_star,
                            const char* name) {
  // shared tail: b = A x* + w, lambda = lambda_c * |A^T b|_inf
  CounterRng noise(spec.seed, spec.kind + "/noise");
  const Index m = A.rows();
  Vector w(m);
  const double sd = std::sqrt(spec.noise_var);
  for (Index i = 0; i < m; ++i) w[i] = sd * noise.gauss();
  Vector b = A * x_star + w;
  const double lambda = spec.lambda_c * (A.transpose() * b).lpNorm<Eigen::Infinity>();

  GeneratedInstance out;
  out.lambda = lambda;
  std::shared_ptr<const RegularizerOracle> reg;
  if (spec.kind == "lasso")
    reg = std::make_shared<L1Reg>(lambda);
  else if (spec.kind == "linf")
    reg = std::make_shared<LInfReg>(lambda);
  else if (spec.kind == "tv1d")
    reg = std::make_shared<TV1DReg>(A.cols(), lambda);
  else if (spec.kind == "oscar")
    reg = std::make_shared<SortedL1Reg>(SortedL1Reg::oscar(A.cols(), lambda, lambda));
  else
    throw std::invalid_argument("finish_ls: unknown least-squares experiment kind");

  std::uint64_t h = io::hash_matrix(A);
  h = io::hash_vector(b, h);
  h = io::hash_vector(x_star, h);
  h = io::fnv1a(io::fmt_g17(lambda), h);

  out.prob = ProblemInstance(std::make_shared<LeastSquaresLoss>(std::move(A), std::move(b)),
                             std::move(reg), name);
  out.x_star = std::move(x_star);
  out.x0 = Vector::Zero(out.prob.n);
  out.data_hash = h;
  return out;
}

}  // namespace

GeneratedInstance gen_lasso(const ExperimentSpec& spec) {
  CounterRng rng_a(spec.seed, "lasso/A");
  CounterRng rng_support(spec.seed, "lasso/support");
  CounterRng rng_vals(spec.seed, "lasso/xvals");
  Matrix A = gauss_matrix(rng_a, spec.m, spec.n);
  Vector x_star = Vector::Zero(spec.n);
  for (Index i : pick_distinct(rng_support, spec.n, spec.sparsity)) x_star[i] = rng_vals.gauss();
  return finish_ls(spec, std::move(A), std::move(x_star), "lasso_48x128");
}

GeneratedInstance gen_linf(const ExperimentSpec& spec) {
  CounterRng rng_a(spec.seed, "linf/A");
  CounterRng rng_support(spec.seed, "linf/support");
  CounterRng rng_signs(spec.seed, "linf/signs");
  CounterRng rng_fill(spec.seed, "linf/fill");
  Matrix A = gauss_matrix(rng_a, spec.m, spec.n);
  // exactly `sparsity` coordinates sit at the shared maximal magnitude 1
  Vector x_star(spec.n);
  for (Index i = 0; i < spec.n; ++i) x_star[i] = rng_fill.uniform(-0.5, 0.5);
  for (Index i : pick_distinct(rng_support, spec.n, spec.sparsity))
    x_star[i] = rng_signs.uniform() < 0.5 ? -1.0 : 1.0;
  return finish_ls(spec, std::move(A), std::move(x_star), "linf_63x64");
}

GeneratedInstance gen_tv(const ExperimentSpec& spec) {
  CounterRng rng_a(spec.seed, "tv1d/A");
  Matrix A = gauss_matrix(rng_a, spec.m, spec.n);
  Vector x_star(spec.n);
  const Index third = spec.n / 3;
  for (Index i = 0; i < spec.n; ++i)
    x_star[i] = i < third ? 0.5 : (i < 2 * third ? -0.3 : 0.8);
  return finish_ls(spec, std::move(A), std::move(x_star), "tv1d_20x90");
}

GeneratedInstance gen_oscar(const ExperimentSpec& spec) {
  const Index n = spec.n, m = spec.m;
  // rows of A drawn from N(0, Sigma), Sigma_ij = 0.7^|i-j|, via the
  // symmetric square root (exact symmetry even for rho near 1)
  Matrix sigma(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) sigma(i, j) = std::pow(0.7, std::abs(double(i - j)));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  const Vector sqrt_ev = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix root = eig.eigenvectors() * sqrt_ev.asDiagonal() * eig.eigenvectors().transpose();

  CounterRng rng_a(spec.seed, "oscar/A");
  Matrix A = gauss_matrix(rng_a, m, n) * root;
  // standardize columns: zero mean, unit sample variance
  for (Index j = 0; j < n; ++j) {
    const double mean = A.col(j).mean();
    A.col(j).array() -= mean;
    const double sd = std::sqrt(A.col(j).squaredNorm() / static_cast<double>(m - 1));
    A.col(j) /= sd;
  }

  Vector x_star = Vector::Zero(n);
  const double fractions[] = {0.15, 0.05, 0.25, 0.05, 0.20, 0.05, 0.25};
  const double values[] = {0.0, 3.0, 0.0, -4.0, 0.0, 6.0, 0.0};
  Index pos = 0;
  for (int blk = 0; blk < 7; ++blk) {
    const Index len = static_cast<Index>(std::lround(fractions[blk] * n));
    for (Index i = 0; i < len && pos < n; ++i, ++pos) x_star[pos] = values[blk];
  }
  return finish_ls(spec, std::move(A), std::move(x_star), "oscar_300x300");
}

GeneratedInstance gen_poisson_sr(const ExperimentSpec& spec) {
  const Index side = spec.truth_side;
  const Index n = side * side;
  const Index mside = side / spec.q;
  const Index m = mside * mside;
  ForwardModel model = build_forward_model(side, spec.q, spec.fwhm_lowres * spec.q);

  CounterRng rng_pos(spec.seed, "poisson_sr/positions");
  CounterRng rng_int(spec.seed, "poisson_sr/intensities");
  CounterRng rng_counts(spec.seed, "poisson_sr/counts");

  // sources sit away from the border (PSF tails leave the frame edge near
  // background level, keeping the lambda rule strictly positive) and at
  // least 3 pixels apart (separable emitters at desk scale)
  const Index margin = 3;
  const Index min_sep = 3;
  const Index inner = side - 2 * margin;
  if (inner < 2) throw std::invalid_argument("gen_poisson_sr: truth side too small");
  Vector x_star = Vector::Zero(n);
  std::vector<std::pair<Index, Index>> placed;
  int guard = 0;
  while (static_cast<Index>(placed.size()) < spec.n_sources) {
    if (++guard > 100000) throw std::runtime_error("gen_poisson_sr: cannot place sources");
    const Index r = margin + static_cast<Index>(rng_pos.below(inner));
    const Index c = margin + static_cast<Index>(rng_pos.below(inner));
    bool ok = true;
    for (auto [pr, pc] : placed)
      if (std::abs(static_cast<long>(pr - r)) < min_sep &&
          std::abs(static_cast<long>(pc - c)) < min_sep)
        ok = false;
    if (!ok) continue;
    placed.emplace_back(r, c);
    x_star[r * side + c] = rng_int.uniform(20.0, 60.0);
  }

  const Vector mean = model.apply(x_star).array() + spec.background;
  Vector y(m);
  for (Index i = 0; i < m; ++i) y[i] = static_cast<double>(rng_counts.poisson(mean[i]));

  auto loss = std::make_shared<PoissonKLLoss>(std::move(model), Vector::Constant(m, spec.background),
                                              y);
  // lambda = 0.5 * |max(grad f(0), 0)|_inf
  const Vector g0 = loss->gradient(Vector::Zero(n));
  const double lambda = 0.5 * g0.cwiseMax(0.0).lpNorm<Eigen::Infinity>();
  if (!(lambda > 0))
    throw std::runtime_error("gen_poisson_sr: penalty rule produced lambda <= 0");

  GeneratedInstance out;
  out.lambda = lambda;
  out.x0 = loss->model().apply_adjoint(y);
  std::uint64_t h = io::hash_vector(x_star);
  h = io::hash_vector(y, h);
  h = io::fnv1a(io::fmt_g17(lambda), h);
  out.data_hash = h;
  out.prob = ProblemInstance(std::move(loss), std::make_shared<NonnegL1Reg>(lambda),
                             "poisson_sr_16x16_q2");
  out.x_star = std::move(x_star);
  return out;
}

GeneratedInstance gen_remark34(const ExperimentSpec&) {
  Vector b(2);
  b << 2.0, -1.0;
  GeneratedInstance out;
  out.lambda = 1.0;
  out.prob = ProblemInstance(std::make_shared<LeastSquaresLoss>(Matrix::Identity(2, 2), b),
                             std::make_shared<L1Reg>(1.0), "remark34");
  out.x_star = Vector::Zero(2);
  out.x_star << 1.0, 0.0;
  out.x0 = Vector::Zero(2);
  out.data_hash = io::hash_vector(b);
  return out;
}

GeneratedInstance generate(const ExperimentSpec& spec) {
  GeneratedInstance g;
  if (spec.kind == "lasso")
    g = gen_lasso(spec);
  else if (spec.kind == "linf")
    g = gen_linf(spec);
  else if (spec.kind == "tv1d")
    g = gen_tv(spec);
  else if (spec.kind == "oscar")
    g = gen_oscar(spec);
  else if (spec.kind == "poisson_sr")
    g = gen_poisson_sr(spec);
  else if (spec.kind == "remark34")
    g = gen_remark34(spec);
  else
    throw std::invalid_argument("generate: unknown experiment kind '" + spec.kind + "'");

  g.manifest["kind"] = spec.kind;
  g.manifest["seed"] = spec.seed;
  g.manifest["m"] = spec.m;
  g.manifest["n"] = spec.n;
  g.manifest["lambda"] = g.lambda;
  g.manifest["data_hash"] = io::hash_hex(g.data_hash);
  g.manifest["rng_streams"] = stream_doc(spec.kind);
  g.manifest["lambda_rule"] = spec.kind == "poisson_sr"
                                  ? "lambda = 0.5*|max(grad f(0),0)|_inf"
                                  : "lambda = lambda_c*|A^T b|_inf";
  g.manifest["lambda_c"] = spec.lambda_c;
  g.manifest["noise_var"] = spec.noise_var;
  json cfgs = json::array();
  for (const auto& c : spec.solvers) cfgs.push_back(io::solver_config_to_json(c));
  g.manifest["solvers"] = cfgs;
  return g;
}

std::vector<ExperimentSpec> suite_specs(const std::string& name, std::uint64_t seed) {
  if (name == "paper51")
    return {ExperimentSpec::lasso(seed), ExperimentSpec::linf(seed), ExperimentSpec::tv(seed),
            ExperimentSpec::oscar(seed)};
  if (name == "toy") return {ExperimentSpec::remark34()};
  if (name == "poisson") return {ExperimentSpec::poisson_sr(seed)};
  throw std::invalid_argument("unknown suite '" + name + "'");
}

namespace {

int thread_budget(std::size_t n_runs) {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("POLYNEWT_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) cap = v;
  }
  return std::min<int>(cap, static_cast<int>(n_runs));
}

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }
std::string opt_dbl(const std::optional<double>& v) { return v ? io::fmt_g17(*v) : ""; }

}  // namespace

SuiteResult run_suite(const std::vector<ExperimentSpec>& specs, const fs::path& out_dir) {
  SuiteResult suite;
  if (!out_dir.empty()) fs::create_directories(out_dir);

  struct PreparedSpec {
    const ExperimentSpec* spec;
    GeneratedInstance gen;
    std::optional<Vector> x_ref;
    std::string ref_error;
  };
  std::vector<PreparedSpec> prepared;
  prepared.reserve(specs.size());
  for (const auto& spec : specs) {
    PreparedSpec p{&spec, generate(spec), std::nullopt, ""};
    try {
      p.x_ref = reference_solution(p.gen.prob, spec.ref_tol);
    } catch (const std::exception& e) {
      p.ref_error = e.what();
    }
    p.gen.manifest["reference_converged"] = p.x_ref.has_value();
    if (!out_dir.empty()) {
      io::write_text_file(out_dir / (spec.id() + "_manifest.json"), p.gen.manifest.dump(2) + "\n");
      if (spec.kind == "poisson_sr") {
        const Index side = spec.truth_side;
        const Index mside = side / spec.q;
        const auto* kl = dynamic_cast<const PoissonKLLoss*>(p.gen.prob.loss.get());
        io::write_png_gray(out_dir / (spec.id() + "_truth.png"), p.gen.x_star, side);
        io::write_image_csv(out_dir / (spec.id() + "_truth.csv"), p.gen.x_star, side);
        io::write_png_gray(out_dir / (spec.id() + "_observation.png"), kl->counts(), mside);
        io::write_image_csv(out_dir / (spec.id() + "_observation.csv"), kl->counts(), mside);
      }
    }
    prepared.push_back(std::move(p));
  }

  struct RunSlot {
    const PreparedSpec* ps = nullptr;
    const SolverConfig* cfg = nullptr;
  };
  std::vector<RunSlot> runs;
  for (const auto& p : prepared)
    for (const auto& c : p.spec->solvers) runs.push_back({&p, &c});

  std::vector<ResultRecord> results(runs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= runs.size()) return;
      const auto& [ps, cfg] = runs[i];
      ResultRecord rec;
      rec.experiment = ps->spec->id();
      rec.method = to_string(cfg->method);
      if (!ps->ref_error.empty()) rec.error = "reference: " + ps->ref_error;
      try {
        SolverTrace trace = solve(ps->gen.prob, *cfg, ps->gen.x0);
        rec.status = to_string(trace.status);
        rec.converged = trace.status == TerminalStatus::converged;
        rec.iterations = trace.iterations();
        rec.wall_time_ns = trace.records.empty() ? 0 : trace.records.back().wall_ns;
        rec.terminal_kkt = trace.terminal_kkt();
        rec.terminal_objective = trace.terminal_objective();
        rec.newton_steps_accepted = trace.newton_steps_accepted();
        if (ps->x_ref) {
          rec.dist_to_ref = (trace.final_x - *ps->x_ref).norm();
          const auto ord = convergence_order(trace, *ps->x_ref);
          if (ord.order) rec.order_estimate = ord.order;
        }
        const auto ident = identification_report(trace);
        rec.identification_iter = ident.identified_at;
        if (!out_dir.empty()) {
          io::write_trace_csv(out_dir / (rec.experiment + "_" + rec.method + "_trace.csv"), trace,
                              ps->x_ref ? &*ps->x_ref : nullptr);
          if (ps->spec->kind == "poisson_sr") {
            io::write_png_gray(out_dir / (rec.experiment + "_" + rec.method + "_recon.png"),
                               trace.final_x.cwiseMax(0.0), ps->spec->truth_side);
            io::write_image_csv(out_dir / (rec.experiment + "_" + rec.method + "_recon.csv"),
                                trace.final_x, ps->spec->truth_side);
          }
        }
      } catch (const std::exception& e) {
        rec.status = "error";
        rec.error = e.what();
      }
      results[i] = std::move(rec);
    }
  };
  const int nthreads = thread_budget(runs.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::ostringstream csv, hashed;
  csv << "experiment,method,status,iterations,converged,terminal_kkt,terminal_objective,"
         "dist_to_ref,newton_steps_accepted,identification_iter,order_estimate,error,"
         "wall_time_ns\n";
  suite.all_converged = true;
  for (const auto& r : results) {
    std::ostringstream row;
    row << r.experiment << ',' << r.method << ',' << r.status << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << ',' << io::fmt_g17(r.terminal_kkt) << ','
        << io::fmt_g17(r.terminal_objective) << ',' << io::fmt_g17(r.dist_to_ref) << ','
        << r.newton_steps_accepted << ',' << opt_int(r.identification_iter) << ','
        << opt_dbl(r.order_estimate) << ',' << r.error;
    hashed << row.str() << '\n';
    csv << row.str() << ',' << r.wall_time_ns << '\n';
    if (!r.converged) suite.all_converged = false;
  }
  suite.records = std::move(results);
  suite.summary_csv = csv.str();
  suite.content_hash = io::fnv1a(hashed.str());
  if (!out_dir.empty()) {
    io::write_text_file(out_dir / "summary.csv", suite.summary_csv);
    io::write_text_file(out_dir / "summary.hash", io::hash_hex(suite.content_hash) + "\n");
  }
  return suite;
}

}  // namespace polynewt::bench
