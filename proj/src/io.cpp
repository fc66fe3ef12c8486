#include "polynewt/io.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "polynewt/losses.hpp"
#include "polynewt/regularizers.hpp"

namespace polynewt::io {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) { return fnv1a(s.data(), s.size(), h); }

std::uint64_t hash_vector(const Vector& v, std::uint64_t h) {
  return fnv1a(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()), h);
}

std::uint64_t hash_matrix(const Matrix& m, std::uint64_t h) {
  return fnv1a(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_to_json_rowmajor(const Matrix& m) {
  json a = json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

Vector vector_from_json(const json& a) {
  Vector v(a.size());
  Index i = 0;
  for (const auto& x : a) v[i++] = x.get<double>();
  return v;
}

Vector read_bin_doubles(const std::filesystem::path& file, Index expected) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open binary blob " + file.string());
  Vector v(expected);
  in.read(reinterpret_cast<char*>(v.data()), sizeof(double) * expected);
  if (!in) throw std::runtime_error("short read from " + file.string());
  return v;
}

void write_bin_doubles(const std::filesystem::path& file, const double* data, Index count) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write binary blob " + file.string());
  out.write(reinterpret_cast<const char*>(data), sizeof(double) * count);
}

/// Array field that may be inline ("A") or external ("A_bin").
Vector load_array_field(const json& j, const std::string& name, Index expected,
                        const std::filesystem::path& base_dir) {
  if (j.contains(name)) {
    Vector v = vector_from_json(j.at(name));
    if (v.size() != expected)
      throw std::runtime_error("field '" + name + "' has wrong length");
    return v;
  }
  const std::string bin = name + "_bin";
  if (j.contains(bin)) return read_bin_doubles(base_dir / j.at(bin).get<std::string>(), expected);
  throw std::runtime_error("missing field '" + name + "'");
}

}  // namespace

json regularizer_to_json(const RegularizerOracle& reg) {
  json j;
  j["kind"] = reg.kind();
  j["lambda"] = reg.scale();
  if (const auto* s = dynamic_cast<const SortedL1Reg*>(&reg))
    j["weights"] = vector_to_json(s->base_weights());
  if (const auto* t = dynamic_cast<const TV1DReg*>(&reg)) j["n"] = t->dim();
  return j;
}

std::shared_ptr<const RegularizerOracle> regularizer_from_json(const json& j, Index n) {
  const std::string kind = j.at("kind").get<std::string>();
  const double lambda = j.value("lambda", 1.0);
  if (kind == "l1") return std::make_shared<L1Reg>(lambda);
  if (kind == "linf") return std::make_shared<LInfReg>(lambda);
  if (kind == "tv1d") return std::make_shared<TV1DReg>(j.value("n", n), lambda);
  if (kind == "nonneg_l1") return std::make_shared<NonnegL1Reg>(lambda);
  if (kind == "zero") return std::make_shared<ZeroReg>();
  if (kind == "slope") {
    Vector w = vector_from_json(j.at("weights"));
    return std::make_shared<SortedL1Reg>(std::move(w), lambda);
  }
  if (kind == "oscar") {
    const double w1 = j.at("w1").get<double>();
    const double w2 = j.at("w2").get<double>();
    auto r = SortedL1Reg::oscar(j.value("n", n), w1, w2);
    return std::make_shared<SortedL1Reg>(std::move(r));
  }
  throw std::runtime_error("unknown regularizer kind '" + kind + "'");
}

json problem_to_json(const ProblemInstance& prob) {
  json j;
  j["schema"] = kSchemaVersion;
  j["name"] = prob.name;
  j["n"] = prob.n;
  if (const auto* ls = dynamic_cast<const LeastSquaresLoss*>(prob.loss.get())) {
    json l;
    l["kind"] = "least_squares";
    l["m"] = ls->A().rows();
    l["n"] = ls->A().cols();
    l["A"] = matrix_to_json_rowmajor(ls->A());
    l["b"] = vector_to_json(ls->b());
    j["loss"] = l;
  } else if (const auto* kl = dynamic_cast<const PoissonKLLoss*>(prob.loss.get())) {
    json l;
    l["kind"] = "poisson_kl";
    l["side"] = kl->model().H.side();
    l["q"] = kl->model().M.q();
    l["fwhm"] = kl->model().H.fwhm();
    l["background"] = vector_to_json(kl->background());
    l["y"] = vector_to_json(kl->counts());
    j["loss"] = l;
  } else {
    throw std::runtime_error("problem_to_json: unsupported loss kind");
  }
  j["reg"] = regularizer_to_json(*prob.reg);
  return j;
}

ProblemInstance problem_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (j.value("schema", -1) != kSchemaVersion)
    throw std::runtime_error("problem file has unsupported schema version");
  const Index n = j.at("n").get<Index>();
  const json& l = j.at("loss");
  const std::string kind = l.at("kind").get<std::string>();
  std::shared_ptr<const SmoothLossOracle> loss;
  if (kind == "least_squares") {
    const Index m = l.at("m").get<Index>();
    const Index nn = l.at("n").get<Index>();
    if (nn != n) throw std::runtime_error("loss dimension disagrees with problem n");
    Vector flat = load_array_field(l, "A", m * nn, base_dir);
    Matrix A(m, nn);
    for (Index r = 0; r < m; ++r)
      for (Index c = 0; c < nn; ++c) A(r, c) = flat[r * nn + c];
    Vector b = load_array_field(l, "b", m, base_dir);
    loss = std::make_shared<LeastSquaresLoss>(std::move(A), std::move(b));
  } else if (kind == "poisson_kl") {
    const Index side = l.at("side").get<Index>();
    const Index q = l.at("q").get<Index>();
    const double fwhm = l.at("fwhm").get<double>();
    if (side * side != n) throw std::runtime_error("poisson_kl side^2 != n");
    const Index mside = side / q;
    Vector bg = load_array_field(l, "background", mside * mside, base_dir);
    Vector y = load_array_field(l, "y", mside * mside, base_dir);
    loss = std::make_shared<PoissonKLLoss>(build_forward_model(side, q, fwhm), std::move(bg),
                                           std::move(y));
  } else {
    throw std::runtime_error("unknown loss kind '" + kind + "'");
  }
  auto reg = regularizer_from_json(j.at("reg"), n);
  return ProblemInstance(std::move(loss), std::move(reg), j.value("name", std::string("problem")));
}

ProblemInstance load_problem(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open problem file " + file.string());
  json j;
  in >> j;
  return problem_from_json(j, file.parent_path());
}

void save_problem(const ProblemInstance& prob, const std::filesystem::path& file) {
  json j = problem_to_json(prob);
  // large dense blocks go to raw little-endian float64 blobs next to the json
  constexpr Index kInlineLimit = 4096;
  if (j["loss"]["kind"] == "least_squares") {
    const auto* ls = dynamic_cast<const LeastSquaresLoss*>(prob.loss.get());
    if (ls->A().size() >= kInlineLimit) {
      const std::string blob = file.stem().string() + "_A.bin";
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = ls->A();
      write_bin_doubles(file.parent_path() / blob, rm.data(), rm.size());
      j["loss"].erase("A");
      j["loss"]["A_bin"] = blob;
    }
  }
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write problem file " + file.string());
  out << j.dump(2) << "\n";
}

Vector point_from_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open point file " + file.string());
  json j;
  in >> j;
  if (j.is_array()) return vector_from_json(j);
  return vector_from_json(j.at("x"));
}

void write_trace_csv(const std::filesystem::path& file, const SolverTrace& trace,
                     const Vector* x_ref) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write trace file " + file.string());
  out << "k,objective,kkt_residual,step_kind,dist_to_ref,alpha,reduced_dim,wall_ns\n";
  for (const auto& r : trace.records) {
    const double dist =
        (x_ref && r.x.size() == x_ref->size()) ? (r.x - *x_ref).norm() : std::nan("");
    out << r.k << ',' << fmt_g17(r.objective) << ',' << fmt_g17(r.kkt) << ','
        << to_string(r.step_kind) << ',' << fmt_g17(dist) << ',' << fmt_g17(r.alpha) << ','
        << (r.newton ? std::to_string(r.newton->reduced_dim) : std::string()) << ','
        << r.wall_ns << '\n';
  }
}

json solver_config_to_json(const SolverConfig& cfg) {
  json j;
  j["method"] = to_string(cfg.method);
  j["step_mode"] = cfg.step_mode == StepMode::fixed ? "fixed" : "backtracking";
  j["alpha"] = cfg.alpha;
  j["bt_alpha0"] = cfg.bt_alpha0;
  j["bt_shrink"] = cfg.bt_shrink;
  j["bt_growth"] = cfg.bt_growth;
  switch (cfg.extrapolation) {
    case ExtrapolationRule::original_fista: j["extrapolation"] = "fista"; break;
    case ExtrapolationRule::chambolle_dossal: j["extrapolation"] = "cd"; break;
    case ExtrapolationRule::liang_luo_tao: j["extrapolation"] = "llt"; break;
  }
  j["cd_d"] = cfg.cd_d;
  j["llt_p"] = cfg.llt_p;
  j["llt_q"] = cfg.llt_q;
  j["switch_tol"] = cfg.switch_tol;
  j["kkt_tol"] = cfg.kkt_tol;
  j["max_iters"] = cfg.max_iters;
  j["safeguard"] = cfg.safeguard;
  return j;
}

void write_png_gray(const std::filesystem::path& file, const Vector& img, Index side) {
  if (img.size() != side * side) throw std::invalid_argument("write_png_gray: size mismatch");
  FILE* fp = std::fopen(file.string().c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot write " + file.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw std::runtime_error("libpng failure writing " + file.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(side), static_cast<png_uint_32>(side), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const double mx = std::max(img.maxCoeff(), 1e-300);
  std::vector<png_byte> row(side);
  for (Index r = 0; r < side; ++r) {
    for (Index c = 0; c < side; ++c) {
      const double v = std::clamp(img[r * side + c] / mx, 0.0, 1.0);
      row[c] = static_cast<png_byte>(std::lround(v * 255.0));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

void write_image_csv(const std::filesystem::path& file, const Vector& img, Index side) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  for (Index r = 0; r < side; ++r) {
    for (Index c = 0; c < side; ++c) out << (c ? "," : "") << fmt_g17(img[r * side + c]);
    out << '\n';
  }
}

void write_text_file(const std::filesystem::path& file, const std::string& content) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << content;
}

}  // namespace polynewt::io
