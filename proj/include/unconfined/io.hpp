#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "unconfined/globalmin.hpp"
#include "unconfined/netcore.hpp"
#include "unconfined/objective.hpp"
#include "unconfined/paths.hpp"
#include "unconfined/verify.hpp"

namespace unconfined {

using Json = nlohmann::json;

/// {"rows": r, "cols": c, "data": [[row 0], [row 1], ...]}
Json matrix_to_json(const Matrix& M);
Matrix matrix_from_json(const Json& j);

Json params_to_json(const Params& p);
Params params_from_json(const Json& j);

Json activation_to_json(const Activation& a);
Activation activation_from_json(const Json& j);

Json architecture_to_json(const Architecture& arch);
Architecture architecture_from_json(const Json& j);

Json constraint_to_json(const ConstraintSpec& spec);
ConstraintSpec constraint_from_json(const Json& j);

Json tolerances_to_json(const Tolerances& t);
Tolerances tolerances_from_json(const Json& j);

Json path_to_json(const CompositePath& path);
CompositePath path_from_json(const Json& j);

Json report_to_json(const VerificationReport& report);
Json oracle_to_json(const OracleResult& result);

Json read_json_file(const std::filesystem::path& file);
void write_json_file(const std::filesystem::path& file, const Json& j);

/// Headerless CSV, one matrix row per line.
Matrix read_csv(const std::filesystem::path& file);
void write_csv(const std::filesystem::path& file, const Matrix& M);

Params read_params(const std::filesystem::path& file);
void write_params(const std::filesystem::path& file, const Params& p);

/// Two tab-separated columns, t and loss.
void write_profile(const std::filesystem::path& file, const VerificationReport& report);

struct RunConfig {
  std::filesystem::path base_dir;
  Architecture arch;
  LossKind loss = LossKind::Squared;
  ConstraintSpec constraint;
  std::filesystem::path x_path;
  std::filesystem::path y_path;
  std::optional<std::filesystem::path> start_path;
  std::optional<std::filesystem::path> target_path;
  std::uint64_t seed = 0;
  Index grid = 2001;
  Tolerances tolerances;
  std::filesystem::path output_dir;
  BruteForceOptions brute_force;

  Dataset load_data() const;
};

/// Relative paths resolve against the config file's directory. Unknown keys and
/// missing referenced files raise IoError.
RunConfig load_config(const std::filesystem::path& file);
Json config_to_json(const RunConfig& config);

}  // namespace unconfined
