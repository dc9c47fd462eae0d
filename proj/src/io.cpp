#include "unconfined/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace unconfined {

namespace fs = std::filesystem;

namespace {

// JSON has no encoding for inf/nan; report fields use strings for those.
Json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw IoError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw IoError("unknown key '" + item.key() + "' in " + where);
  }
}

const Json& require(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw IoError("missing key '" + key + "' in " + where);
  return j.at(key);
}

double to_double(const Json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
  }
  throw IoError(what + " must be a number");
}

}  // namespace

Json matrix_to_json(const Matrix& M) {
  Json data = Json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    data.push_back(std::move(row));
  }
  return {{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j) {
  reject_unknown(j, {"rows", "cols", "data"}, "matrix");
  const Index rows = require(j, "rows", "matrix").get<Index>();
  const Index cols = require(j, "cols", "matrix").get<Index>();
  const Json& data = require(j, "data", "matrix");
  if (rows < 0 || cols < 0 || !data.is_array() || static_cast<Index>(data.size()) != rows) {
    throw IoError("matrix data does not match its declared shape");
  }
  Matrix M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = data[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw IoError("matrix data does not match its declared shape");
    }
    for (Index c = 0; c < cols; ++c) {
      const Json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw IoError("matrix entries must be numbers");
      M(i, c) = v.get<double>();
    }
  }
  return M;
}

Json params_to_json(const Params& p) {
  Json layers = Json::array();
  for (const Matrix& m : p.layers) layers.push_back(matrix_to_json(m));
  return {{"layers", std::move(layers)}};
}

Params params_from_json(const Json& j) {
  reject_unknown(j, {"layers"}, "parameter file");
  const Json& layers = require(j, "layers", "parameter file");
  if (!layers.is_array() || layers.size() < 2) throw IoError("parameter file needs at least two layers");
  Params p;
  for (const Json& m : layers) p.layers.push_back(matrix_from_json(m));
  if (!p.all_finite()) throw IoError("parameter file has non-finite entries");
  return p;
}

Json activation_to_json(const Activation& a) {
  switch (a.kind) {
    case Activation::Kind::Identity:
      return "identity";
    case Activation::Kind::Relu:
      return "relu";
    case Activation::Kind::Sigmoid:
      return "sigmoid";
    case Activation::Kind::LeakyRelu:
      return {{"kind", "leaky_relu"}, {"c", a.c}};
    case Activation::Kind::Polynomial:
      return {{"kind", "polynomial"}, {"c", a.c}, {"k", a.k}};
  }
  return "identity";
}

Activation activation_from_json(const Json& j) {
  std::string kind;
  double c = 0.0;
  double k = 1.0;
  if (j.is_string()) {
    kind = j.get<std::string>();
  } else {
    reject_unknown(j, {"kind", "c", "k"}, "activation");
    kind = require(j, "kind", "activation").get<std::string>();
    if (j.contains("c")) c = to_double(j.at("c"), "activation c");
    if (j.contains("k")) k = to_double(j.at("k"), "activation k");
  }
  if (kind == "identity") return Activation::identity();
  if (kind == "relu") return Activation::relu();
  if (kind == "sigmoid") return Activation::sigmoid();
  if ((kind == "leaky_relu" || kind == "polynomial") && j.is_string()) {
    throw IoError(kind + " needs the object form with its parameters");
  }
  if (kind == "leaky_relu") return Activation::leaky_relu(c);
  if (kind == "polynomial") return Activation::polynomial(c, k);
  throw IoError("unknown activation '" + kind + "'");
}

Json architecture_to_json(const Architecture& arch) {
  Json acts = Json::array();
  for (const Activation& a : arch.activations) acts.push_back(activation_to_json(a));
  return {{"dims", arch.dims}, {"activations", std::move(acts)}};
}

Architecture architecture_from_json(const Json& j) {
  reject_unknown(j, {"dims", "activations"}, "architecture");
  const std::vector<Index> dims = require(j, "dims", "architecture").get<std::vector<Index>>();
  const Json& acts = require(j, "activations", "architecture");
  std::vector<Activation> activations;
  if (acts.is_array()) {
    for (const Json& a : acts) activations.push_back(activation_from_json(a));
  } else {
    // A single activation applies to every hidden layer.
    const Activation a = activation_from_json(acts);
    activations.assign(dims.size() >= 2 ? dims.size() - 2 : 0, a);
  }
  return Architecture(dims, activations);
}

Json constraint_to_json(const ConstraintSpec& spec) {
  return {{"a_r", spec.a_r}, {"b_r", spec.b_r}, {"q", std::isinf(spec.q) ? Json("inf") : Json(spec.q)}};
}

ConstraintSpec constraint_from_json(const Json& j) {
  reject_unknown(j, {"a_r", "b_r", "q"}, "constraint");
  ConstraintSpec spec;
  if (j.contains("a_r")) spec.a_r = to_double(j.at("a_r"), "a_r");
  if (j.contains("b_r")) spec.b_r = to_double(j.at("b_r"), "b_r");
  if (j.contains("q")) spec.q = to_double(j.at("q"), "q");
  spec.validate();
  return spec;
}

Json tolerances_to_json(const Tolerances& t) {
  return {{"constant", t.constant}, {"convex", t.convex}, {"monotone", t.monotone},
          {"constraint", t.constraint}, {"continuity", t.continuity}};
}

Tolerances tolerances_from_json(const Json& j) {
  reject_unknown(j, {"constant", "convex", "monotone", "constraint", "continuity"}, "tolerances");
  Tolerances t;
  if (j.contains("constant")) t.constant = to_double(j.at("constant"), "tolerance");
  if (j.contains("convex")) t.convex = to_double(j.at("convex"), "tolerance");
  if (j.contains("monotone")) t.monotone = to_double(j.at("monotone"), "tolerance");
  if (j.contains("constraint")) t.constraint = to_double(j.at("constraint"), "tolerance");
  if (j.contains("continuity")) t.continuity = to_double(j.at("continuity"), "tolerance");
  return t;
}

Json path_to_json(const CompositePath& path) {
  Json segs = Json::array();
  for (const PathSegment& s : path.segments) {
    segs.push_back({{"kind", kind_name(s.kind)},
                    {"scale", s.scale},
                    {"label", s.label},
                    {"start", params_to_json(s.start)},
                    {"end", params_to_json(s.end)}});
  }
  return {{"segments", std::move(segs)}};
}

CompositePath path_from_json(const Json& j) {
  reject_unknown(j, {"segments"}, "path file");
  const Json& segs = require(j, "segments", "path file");
  if (!segs.is_array()) throw IoError("path segments must be an array");
  CompositePath path;
  for (const Json& s : segs) {
    reject_unknown(s, {"kind", "scale", "label", "start", "end"}, "path segment");
    PathSegment seg;
    seg.kind = parse_kind(require(s, "kind", "path segment").get<std::string>());
    seg.scale = to_double(require(s, "scale", "path segment"), "segment scale");
    if (!(seg.scale > 0.0 && seg.scale <= 1.0)) throw IoError("segment scale must lie in (0, 1]");
    if (s.contains("label")) seg.label = s.at("label").get<std::string>();
    seg.start = params_from_json(require(s, "start", "path segment"));
    seg.end = params_from_json(require(s, "end", "path segment"));
    if (!seg.start.same_shape(seg.end)) throw IoError("segment endpoints differ in shape");
    path.segments.push_back(std::move(seg));
  }
  return path;
}

Json report_to_json(const VerificationReport& r) {
  Json segs = Json::array();
  for (const SegmentStats& s : r.segments) {
    segs.push_back({{"kind", kind_name(s.kind)},
                    {"label", s.label},
                    {"scale", s.scale},
                    {"grid_size", s.grid_size},
                    {"loss_start", number(s.loss_start)},
                    {"loss_end", number(s.loss_end)},
                    {"max_loss_deviation", number(s.max_loss_deviation)},
                    {"max_convexity_violation", number(s.max_convexity_violation)},
                    {"max_monotonicity_violation", number(s.max_monotonicity_violation)},
                    {"max_constraint_excess", number(s.max_constraint_excess)}});
  }
  return {{"pass", r.pass},
          {"flags",
           {{"constant", r.flags.constant},
            {"convex", r.flags.convex},
            {"monotone", r.flags.monotone},
            {"feasible", r.flags.feasible},
            {"continuous", r.flags.continuous}}},
          {"seed", r.seed},
          {"grid_size", r.grid_size},
          {"tolerances", tolerances_to_json(r.tolerances)},
          {"initial_loss", number(r.initial_loss)},
          {"final_loss", number(r.final_loss)},
          {"max_discontinuity", number(r.max_discontinuity)},
          {"max_monotonicity_violation", number(r.max_monotonicity_violation)},
          {"max_constraint_excess", number(r.max_constraint_excess)},
          {"segments", std::move(segs)}};
}

Json oracle_to_json(const OracleResult& r) {
  return {{"method", method_name(r.method)},
          {"achieved_risk", number(r.achieved_risk)},
          {"certificate", number(r.certificate)},
          {"rank", r.rank},
          {"iterations", r.iterations}};
}

Json read_json_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError("cannot parse " + file.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& file, const Json& j) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

Matrix read_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw IoError("bad number '" + cell + "' in " + file.string());
      }
      if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
        throw IoError("bad number '" + cell + "' in " + file.string());
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("ragged rows in " + file.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(file.string() + " is empty");
  Matrix M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) M(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return M;
}

void write_csv(const fs::path& file, const Matrix& M) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << std::setprecision(17);
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << M(i, j);
    out << '\n';
  }
}

Params read_params(const fs::path& file) { return params_from_json(read_json_file(file)); }

void write_params(const fs::path& file, const Params& p) { write_json_file(file, params_to_json(p)); }

void write_profile(const fs::path& file, const VerificationReport& report) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw IoError("cannot write " + file.string());
  out << std::setprecision(17);
  for (const auto& [t, loss] : report.profile) out << t << '\t' << loss << '\n';
}

Dataset RunConfig::load_data() const {
  Dataset d{read_csv(x_path), read_csv(y_path)};
  try {
    d.validate(arch);
  } catch (const StructuralError& e) {
    throw IoError(std::string("dataset does not fit the architecture: ") + e.what());
  }
  return d;
}

RunConfig load_config(const fs::path& file) {
  const Json j = read_json_file(file);
  reject_unknown(j, {"architecture", "loss", "constraint", "data", "start", "target", "seed", "grid",
                     "tolerances", "output", "brute_force"},
                 "config");
  RunConfig c;
  c.base_dir = file.has_parent_path() ? file.parent_path() : fs::path(".");
  auto resolve = [&](const Json& v, const std::string& what) {
    if (!v.is_string()) throw IoError(what + " must be a path string");
    fs::path p = v.get<std::string>();
    if (p.is_relative()) p = c.base_dir / p;
    if (!fs::exists(p)) throw IoError(what + " file " + p.string() + " does not exist");
    return p;
  };
  try {
    c.arch = architecture_from_json(require(j, "architecture", "config"));
    if (j.contains("loss")) c.loss = parse_loss(j.at("loss").get<std::string>());
    if (j.contains("constraint")) c.constraint = constraint_from_json(j.at("constraint"));
    const Json& data = require(j, "data", "config");
    reject_unknown(data, {"x", "y"}, "data");
    c.x_path = resolve(require(data, "x", "data"), "data.x");
    c.y_path = resolve(require(data, "y", "data"), "data.y");
    if (j.contains("start")) c.start_path = resolve(j.at("start"), "start");
    if (j.contains("target")) c.target_path = resolve(j.at("target"), "target");
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("grid")) c.grid = j.at("grid").get<Index>();
    if (j.contains("tolerances")) c.tolerances = tolerances_from_json(j.at("tolerances"));
    c.output_dir = c.base_dir / "out";
    if (j.contains("output")) {
      fs::path p = j.at("output").get<std::string>();
      c.output_dir = p.is_relative() ? c.base_dir / p : p;
    }
    if (j.contains("brute_force")) {
      const Json& b = j.at("brute_force");
      reject_unknown(b, {"resolution", "bound"}, "brute_force");
      if (b.contains("resolution")) c.brute_force.resolution = b.at("resolution").get<Index>();
      if (b.contains("bound")) c.brute_force.bound = to_double(b.at("bound"), "brute_force.bound");
    }
  } catch (const Json::exception& e) {
    throw IoError(std::string("bad config value: ") + e.what());
  } catch (const ParameterError& e) {
    throw IoError(std::string("bad config value: ") + e.what());
  } catch (const StructuralError& e) {
    throw IoError(std::string("bad architecture: ") + e.what());
  }
  if (c.grid < 3) throw IoError("grid must be at least 3");
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json j = {{"architecture", architecture_to_json(c.arch)},
            {"loss", loss_name(c.loss)},
            {"constraint", constraint_to_json(c.constraint)},
            {"data", {{"x", c.x_path.string()}, {"y", c.y_path.string()}}},
            {"seed", c.seed},
            {"grid", c.grid},
            {"tolerances", tolerances_to_json(c.tolerances)},
            {"output", c.output_dir.string()},
            {"brute_force", {{"resolution", c.brute_force.resolution}, {"bound", c.brute_force.bound}}}};
  if (c.start_path) j["start"] = c.start_path->string();
  if (c.target_path) j["target"] = c.target_path->string();
  return j;
}

}  // namespace unconfined
