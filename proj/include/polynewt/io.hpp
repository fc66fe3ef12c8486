#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "polynewt/oracles.hpp"
#include "polynewt/solvers.hpp"

namespace polynewt::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// "%.17g" formatting, enough digits to round-trip a double.
std::string fmt_g17(double v);

std::uint64_t fnv1a(const void* data, std::size_t len,
                    std::uint64_t h = 0xCBF29CE484222325ULL);
std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xCBF29CE484222325ULL);
std::uint64_t hash_vector(const Vector& v, std::uint64_t h = 0xCBF29CE484222325ULL);
std::uint64_t hash_matrix(const Matrix& m, std::uint64_t h = 0xCBF29CE484222325ULL);
std::string hash_hex(std::uint64_t h);

// Problem (de)serialization. Dense matrices are row-major arrays inline,
// or external raw little-endian float64 files referenced as "A_bin" etc.
json problem_to_json(const ProblemInstance& prob);
ProblemInstance problem_from_json(const json& j, const std::filesystem::path& base_dir);
ProblemInstance load_problem(const std::filesystem::path& file);
void save_problem(const ProblemInstance& prob, const std::filesystem::path& file);

std::shared_ptr<const RegularizerOracle> regularizer_from_json(const json& j, Index n);
json regularizer_to_json(const RegularizerOracle& reg);

/// Point files: {"x": [...]} or a bare array.
Vector point_from_json_file(const std::filesystem::path& file);

/// Trace CSV: k,objective,kkt_residual,step_kind,dist_to_ref,alpha,reduced_dim,wall_ns
void write_trace_csv(const std::filesystem::path& file, const SolverTrace& trace,
                     const Vector* x_ref = nullptr);

json solver_config_to_json(const SolverConfig& cfg);

/// 8-bit grayscale PNG, values scaled by the image maximum (visualization
/// only; the lossless companion is the CSV written next to it).
void write_png_gray(const std::filesystem::path& file, const Vector& img, Index side);
void write_image_csv(const std::filesystem::path& file, const Vector& img, Index side);

void write_text_file(const std::filesystem::path& file, const std::string& content);

}  // namespace polynewt::io
