#include "unconfined/cli.hpp"

#include <filesystem>
#include <optional>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "unconfined/blocks.hpp"
#include "unconfined/globalmin.hpp"
#include "unconfined/io.hpp"
#include "unconfined/paths.hpp"
#include "unconfined/verify.hpp"

namespace unconfined {

namespace fs = std::filesystem;

namespace {

struct Flags {
  std::string config;
  std::string in;
  std::string path;
  std::string out;
  std::string target;
  std::string side = "upper";
  std::optional<std::uint64_t> seed;
  std::optional<Index> grid;
  std::optional<double> tol_mono;
  bool linear = false;
  Index width = 8;
  Index depth = 1;
  Index samples = 3;
  Index input_dim = 2;
  std::string activation = "relu";
};

// Rescales layers so the constraint holds; leaves feasible parameters alone.
Params make_feasible(Params p, const ConstraintSpec& spec) {
  for (Index j = 1; j <= p.depth() && spec.a_r > 0.0; ++j) {
    const double v = spec.a_r * rowwise_lq_norm(p[j], 1.0);
    if (v > 1.0) p[j] /= v;
  }
  if (spec.b_r > 0.0) {
    const double v = spec.b_r * rowwise_lq_norm(p[0], spec.q);
    if (v > 1.0) p[0] /= v;
  }
  return p;
}

Params load_start(const RunConfig& cfg, const std::string& override_path, std::uint64_t seed) {
  Params p;
  if (!override_path.empty()) {
    p = read_params(override_path);
  } else if (cfg.start_path) {
    p = read_params(*cfg.start_path);
  } else {
    std::mt19937_64 rng(seed);
    return make_feasible(random_params(cfg.arch, rng, 0.5), cfg.constraint);
  }
  try {
    check_shapes(cfg.arch, p);
  } catch (const StructuralError& e) {
    throw IoError(std::string("start parameter does not fit the architecture: ") + e.what());
  }
  return p;
}

OracleResult solve_target(const std::string& mode, const RunConfig& cfg, const Dataset& data,
                          std::uint64_t seed) {
  if (mode == "outer-solve") {
    if (!cfg.constraint.is_unconstrained()) {
      throw PreconditionError("outer-solve targets need an unconstrained problem");
    }
    std::mt19937_64 rng(seed + 1);
    return outer_layer_solve(cfg.arch, random_params(cfg.arch, rng, 1.0), data, cfg.loss);
  }
  if (mode == "brute-force") return brute_force_min(cfg.arch, data, cfg.loss, cfg.constraint, cfg.brute_force);
  throw ParameterError("unknown oracle '" + mode + "'");
}

Params load_target(const std::string& mode_flag, const RunConfig& cfg, const Dataset& data,
                   std::uint64_t seed, std::ostream& out) {
  const std::string mode = mode_flag.empty() ? (cfg.target_path ? "file" : "outer-solve") : mode_flag;
  if (mode == "file") {
    if (!cfg.target_path) throw IoError("--target file needs a target entry in the config");
    Params p = read_params(*cfg.target_path);
    try {
      check_shapes(cfg.arch, p);
    } catch (const StructuralError& e) {
      throw IoError(std::string("target parameter does not fit the architecture: ") + e.what());
    }
    return p;
  }
  const OracleResult r = solve_target(mode, cfg, data, seed);
  out << "target: " << method_name(r.method) << ", risk " << r.achieved_risk << "\n";
  return r.params;
}

fs::path output_dir(const Flags& f, const RunConfig& cfg) {
  return f.out.empty() ? cfg.output_dir : fs::path(f.out);
}

Tolerances tolerances(const Flags& f, const RunConfig& cfg) {
  Tolerances t = cfg.tolerances;
  if (f.tol_mono) t.monotone = *f.tol_mono;
  return t;
}

int report_outcome(const VerificationReport& report, const fs::path& dir, std::ostream& out) {
  write_json_file(dir / "report.json", report_to_json(report));
  write_profile(dir / "profile.tsv", report);
  out << "segments: " << report.segments.size() << "\n"
      << "loss: " << report.initial_loss << " -> " << report.final_loss << "\n"
      << "max monotonicity violation: " << report.max_monotonicity_violation << "\n"
      << "max constraint excess: " << report.max_constraint_excess << "\n"
      << "verification took " << report.elapsed_seconds << " s\n"
      << "report: " << (report.pass ? "pass" : "FAIL") << "\n";
  return report.pass ? kOk : kNotCertified;
}

int escape_run(const RunConfig& cfg, const Dataset& data, const Params& start, const Params& target,
               const Flags& f, std::uint64_t seed, const fs::path& dir, std::ostream& out) {
  EscapeOptions options;
  options.linear = f.linear;
  const CompositePath path = build_escape_path(cfg.arch, start, target, data, cfg.loss, cfg.constraint, options);
  write_json_file(dir / "path.json", path_to_json(path));
  write_params(dir / "target.json", target);
  const VerificationReport report = verify_path(path, cfg.arch, data, cfg.loss, cfg.constraint,
                                                f.grid.value_or(cfg.grid), tolerances(f, cfg), seed);
  return report_outcome(report, dir, out);
}

int cmd_escape(const Flags& f, std::ostream& out) {
  const RunConfig cfg = load_config(f.config);
  const Dataset data = cfg.load_data();
  const std::uint64_t seed = f.seed.value_or(cfg.seed);
  const Params start = load_start(cfg, f.in, seed);
  const Params target = load_target(f.target, cfg, data, seed, out);
  return escape_run(cfg, data, start, target, f, seed, output_dir(f, cfg), out);
}

int cmd_verify(const Flags& f, std::ostream& out) {
  const RunConfig cfg = load_config(f.config);
  const Dataset data = cfg.load_data();
  if (f.path.empty()) throw IoError("verify needs --path");
  const CompositePath path = path_from_json(read_json_file(f.path));
  for (const PathSegment& s : path.segments) {
    try {
      check_shapes(cfg.arch, s.start);
      check_shapes(cfg.arch, s.end);
    } catch (const StructuralError& e) {
      throw IoError(std::string("path does not fit the architecture: ") + e.what());
    }
  }
  const std::uint64_t seed = f.seed.value_or(cfg.seed);
  const VerificationReport report = verify_path(path, cfg.arch, data, cfg.loss, cfg.constraint,
                                                f.grid.value_or(cfg.grid), tolerances(f, cfg), seed);
  return report_outcome(report, output_dir(f, cfg), out);
}

int cmd_sparsify(const Flags& f, std::ostream& out) {
  const RunConfig cfg = load_config(f.config);
  const Dataset data = cfg.load_data();
  const std::uint64_t seed = f.seed.value_or(cfg.seed);
  const Params start = load_start(cfg, f.in, seed);
  const BlockSide side = parse_side(f.side);
  ToBlockOptions options;
  options.merge_linear = f.linear;
  const BlockResult result = to_block(cfg.arch, start, data, cfg.constraint, side, options);

  const Matrix before = forward_batch(cfg.arch, start, data.X);
  const Matrix after = forward_batch(cfg.arch, result.params, data.X);
  const double deviation = (after - before).cwiseAbs().maxCoeff() / (1.0 + before.cwiseAbs().maxCoeff());
  const Json summary = {{"s", result.s},
                        {"side", side_name(side)},
                        {"steps", result.steps.size()},
                        {"constraint_before", constraint_value(start, cfg.constraint)},
                        {"constraint_after", constraint_value(result.params, cfg.constraint)},
                        {"forward_deviation", deviation},
                        {"is_block", is_block(result.params, result.s, side)}};
  const fs::path dir = output_dir(f, cfg);
  write_params(dir / "block.json", result.params);
  write_json_file(dir / "sparsify.json", summary);
  out << summary.dump(2) << "\n";
  return kOk;
}

int cmd_oracle(const Flags& f, std::ostream& out) {
  const RunConfig cfg = load_config(f.config);
  const Dataset data = cfg.load_data();
  const std::uint64_t seed = f.seed.value_or(cfg.seed);
  const std::string mode = f.target.empty() ? "outer-solve" : f.target;
  const OracleResult r = solve_target(mode, cfg, data, seed);
  const fs::path dir = output_dir(f, cfg);
  write_params(dir / "target.json", r.params);
  write_json_file(dir / "oracle.json", oracle_to_json(r));
  out << oracle_to_json(r).dump(2) << "\n";
  return kOk;
}

Activation demo_activation(const std::string& name) {
  if (name == "identity") return Activation::identity();
  if (name == "relu") return Activation::relu();
  if (name == "sigmoid") return Activation::sigmoid();
  if (name == "leaky_relu") return Activation::leaky_relu(0.1);
  throw ParameterError("demo activation must be identity, relu, leaky_relu or sigmoid");
}

int cmd_demo(const Flags& f, std::ostream& out) {
  if (f.depth < 1 || f.width < 1 || f.samples < 1 || f.input_dim < 1) {
    throw ParameterError("demo sizes must be positive");
  }
  const std::uint64_t seed = f.seed.value_or(0);
  std::vector<Index> dims{f.input_dim};
  for (Index j = 0; j < f.depth; ++j) dims.push_back(f.width);
  dims.push_back(1);
  RunConfig cfg;
  cfg.arch = Architecture(dims, std::vector<Activation>(static_cast<std::size_t>(f.depth),
                                                        demo_activation(f.activation)));
  cfg.seed = seed;
  if (f.grid) cfg.grid = *f.grid;
  const fs::path dir = f.out.empty() ? fs::path("demo_out") : fs::path(f.out);
  cfg.output_dir = ".";

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset data{Matrix(f.input_dim, f.samples), Matrix(1, f.samples)};
  for (Index i = 0; i < data.X.size(); ++i) data.X.data()[i] = normal(rng);
  for (Index i = 0; i < data.Y.size(); ++i) data.Y.data()[i] = normal(rng);
  const Params start = random_params(cfg.arch, rng, 0.5);

  write_csv(dir / "X.csv", data.X);
  write_csv(dir / "Y.csv", data.Y);
  write_params(dir / "start.json", start);
  cfg.x_path = "X.csv";
  cfg.y_path = "Y.csv";
  cfg.start_path = "start.json";
  cfg.target_path = "target.json";

  const OracleResult oracle = solve_target("outer-solve", cfg, data, seed);
  out << "oracle risk: " << oracle.achieved_risk << " (feature rank " << oracle.rank << ")\n";
  write_params(dir / "target.json", oracle.params);
  write_json_file(dir / "config.json", config_to_json(cfg));
  return escape_run(cfg, data, start, oracle.params, f, seed, dir, out);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonincreasing loss paths to global minima of wide feedforward networks", "unconfined"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", f.config, "run configuration (JSON)");
    if (needs_config) c->required();
    sub->add_option("--seed", f.seed, "64-bit seed for all randomness");
    sub->add_option("--out", f.out, "output directory");
  };

  auto* sparsify = app.add_subcommand("sparsify", "bring a parameter to block form");
  common(sparsify, true);
  sparsify->add_option("--in", f.in, "parameter file (defaults to the config's start)");
  sparsify->add_option("--side", f.side, "upper or lower")->check(CLI::IsMember({"upper", "lower"}));
  sparsify->add_flag("--linear", f.linear, "merge identity layers");

  auto* escape = app.add_subcommand("escape", "build and verify a nonincreasing path to a target");
  common(escape, true);
  escape->add_option("--in", f.in, "start parameter file (defaults to the config's start)");
  escape->add_option("--target", f.target, "file, outer-solve or brute-force")
      ->check(CLI::IsMember({"file", "outer-solve", "brute-force"}));
  escape->add_option("--grid", f.grid, "grid points per segment");
  escape->add_option("--tol-mono", f.tol_mono, "relative monotonicity tolerance");
  escape->add_flag("--linear", f.linear, "use the identity-activation width bound");

  auto* verify = app.add_subcommand("verify", "re-verify a stored path");
  common(verify, true);
  verify->add_option("--path", f.path, "path file")->required();
  verify->add_option("--grid", f.grid, "grid points per segment");
  verify->add_option("--tol-mono", f.tol_mono, "relative monotonicity tolerance");

  auto* oracle = app.add_subcommand("oracle", "compute a global-minimum target");
  common(oracle, true);
  oracle->add_option("--target", f.target, "outer-solve or brute-force")
      ->check(CLI::IsMember({"outer-solve", "brute-force"}));

  auto* demo = app.add_subcommand("demo", "seeded end-to-end run on random data");
  common(demo, false);
  demo->add_option("--width", f.width, "hidden width");
  demo->add_option("--depth", f.depth, "number of hidden layers");
  demo->add_option("--activation", f.activation, "identity, relu, leaky_relu (slope 0.1) or sigmoid");
  demo->add_option("--samples", f.samples, "number of samples n");
  demo->add_option("--input-dim", f.input_dim, "input dimension d");
  demo->add_option("--grid", f.grid, "grid points per segment");
  demo->add_option("--tol-mono", f.tol_mono, "relative monotonicity tolerance");
  demo->add_flag("--linear", f.linear, "use the identity-activation width bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kIoError;
  }

  try {
    if (sparsify->parsed()) return cmd_sparsify(f, out);
    if (escape->parsed()) return cmd_escape(f, out);
    if (verify->parsed()) return cmd_verify(f, out);
    if (oracle->parsed()) return cmd_oracle(f, out);
    if (demo->parsed()) return cmd_demo(f, out);
  } catch (const CapabilityError& e) {
    err << "refused: " << e.what() << "\n";
    return kRefused;
  } catch (const PreconditionError& e) {
    err << "refused: " << e.what() << "\n";
    return kRefused;
  } catch (const DomainError& e) {
    err << "refused: " << e.what() << "\n";
    return kRefused;
  } catch (const ReductionError& e) {
    err << "refused: " << e.what() << "\n";
    return kRefused;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kIoError;
}

}  // namespace unconfined
