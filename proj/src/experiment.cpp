#include "cfad/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <Eigen/Core>
#include <yaml-cpp/yaml.h>

#include "cfad/validation.hpp"
#include "json.hpp"

namespace cfad {

namespace {

constexpr const char* kVersion = "1.0.0";

int line_of(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.is_null() ? 0 : m.line + 1;
}

template <typename T>
T scalar(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) {
    throw ParseError(field, line_of(n), "expected a scalar value");
  }
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(field, line_of(n), "cannot convert '" + n.Scalar() + "'");
  }
}

std::vector<double> number_list(const YAML::Node& n, const std::string& field) {
  if (n.IsScalar()) return {scalar<double>(n, field)};
  if (!n.IsSequence()) throw ParseError(field, line_of(n), "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.push_back(scalar<double>(n[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void require_map(const YAML::Node& n, const std::string& field) {
  if (!n.IsMap()) throw ParseError(field, line_of(n), "expected a mapping");
}

void reject_unknown(const YAML::Node& map, const std::string& prefix,
                    const std::set<std::string>& known) {
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!known.count(key)) {
      throw ValidationError(prefix + key, "unknown key");
    }
  }
}

void apply_geometry(const YAML::Node& g, GeometryConfig& out) {
  require_map(g, "geometry");
  reject_unknown(g, "geometry.",
                 {"side_length_m", "M", "N", "K", "epsilon", "L", "rho_max_mw",
                  "sigma2_dbm", "shadow_sigma_db", "snr_target", "seed", "colocated",
                  "colocated_antennas", "unit_norm_signatures"});
  if (g["side_length_m"]) out.side_length_m = scalar<double>(g["side_length_m"], "geometry.side_length_m");
  if (g["M"]) out.M = scalar<int>(g["M"], "geometry.M");
  if (g["N"]) out.N = scalar<int>(g["N"], "geometry.N");
  if (g["K"]) out.K = scalar<int>(g["K"], "geometry.K");
  if (g["epsilon"]) out.epsilon = scalar<double>(g["epsilon"], "geometry.epsilon");
  if (g["L"]) out.L = scalar<int>(g["L"], "geometry.L");
  if (g["rho_max_mw"]) out.rho_max_mw = scalar<double>(g["rho_max_mw"], "geometry.rho_max_mw");
  if (g["sigma2_dbm"]) out.sigma2_dbm = scalar<double>(g["sigma2_dbm"], "geometry.sigma2_dbm");
  if (g["shadow_sigma_db"]) {
    out.shadow_sigma_db = scalar<double>(g["shadow_sigma_db"], "geometry.shadow_sigma_db");
  }
  if (g["snr_target"]) {
    const std::string text = scalar<std::string>(g["snr_target"], "geometry.snr_target");
    try {
      out.snr_target = SnrPolicy::parse(text);
    } catch (const std::invalid_argument& e) {
      throw ValidationError("geometry.snr_target", e.what());
    }
  }
  if (g["seed"]) out.seed = scalar<std::uint64_t>(g["seed"], "geometry.seed");
  if (g["colocated"]) out.colocated = scalar<bool>(g["colocated"], "geometry.colocated");
  if (g["colocated_antennas"]) {
    out.colocated_antennas = scalar<int>(g["colocated_antennas"], "geometry.colocated_antennas");
  }
  if (g["unit_norm_signatures"]) {
    out.unit_norm_signatures =
        scalar<bool>(g["unit_norm_signatures"], "geometry.unit_norm_signatures");
  }
}

void apply_detector(const YAML::Node& d, DetectorConfig& out) {
  require_map(d, "detector");
  reject_unknown(d, "detector.", {"T", "refactor_every", "permutation_seed"});
  if (d["T"]) out.T = scalar<int>(d["T"], "detector.T");
  if (d["refactor_every"]) out.refactor_every = scalar<int>(d["refactor_every"], "detector.refactor_every");
  if (d["permutation_seed"]) {
    out.permutation_seed = scalar<std::uint64_t>(d["permutation_seed"], "detector.permutation_seed");
  }
}

ExperimentSpec spec_from_node(const YAML::Node& root) {
  ExperimentSpec spec;
  spec.nu_list = default_nu_list();
  if (!root || root.IsNull()) return spec;
  require_map(root, "(document)");
  reject_unknown(root, "",
                 {"mode", "n_trials", "workers", "output_dir", "record_timing", "nu_list",
                  "geometry", "detector", "survey", "validate"});
  if (root["mode"]) {
    const std::string text = scalar<std::string>(root["mode"], "mode");
    try {
      spec.mode = parse_mode(text);
    } catch (const std::invalid_argument& e) {
      throw ValidationError("mode", e.what());
    }
  }
  if (root["n_trials"]) spec.n_trials = scalar<int>(root["n_trials"], "n_trials");
  if (root["workers"]) spec.workers = scalar<int>(root["workers"], "workers");
  if (root["output_dir"]) spec.output_dir = scalar<std::string>(root["output_dir"], "output_dir");
  if (root["record_timing"]) spec.record_timing = scalar<bool>(root["record_timing"], "record_timing");
  if (root["nu_list"]) spec.nu_list = number_list(root["nu_list"], "nu_list");
  if (root["geometry"]) apply_geometry(root["geometry"], spec.geometry);
  if (root["detector"]) apply_detector(root["detector"], spec.detector);
  if (const YAML::Node s = root["survey"]) {
    require_map(s, "survey");
    reject_unknown(s, "survey.", {"cell_sides", "statistic"});
    if (s["cell_sides"]) spec.cell_sides = number_list(s["cell_sides"], "survey.cell_sides");
    if (s["statistic"]) {
      const std::string text = scalar<std::string>(s["statistic"], "survey.statistic");
      try {
        spec.snr_statistic = parse_snr_statistic(text);
      } catch (const std::invalid_argument& e) {
        throw ValidationError("survey.statistic", e.what());
      }
    }
  }
  if (const YAML::Node v = root["validate"]) {
    require_map(v, "validate");
    reject_unknown(v, "validate.", {"instances"});
    if (v["instances"]) spec.validate_instances = scalar<int>(v["instances"], "validate.instances");
  }
  return spec;
}

void apply_override(YAML::Node& root, const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ParseError(text, 0, "override must look like key.path=value");
  }
  const std::string path = text.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(text.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ParseError(path, 0, std::string("override value: ") + e.msg);
  }
  if (!root || !root.IsMap()) root = YAML::Node(YAML::NodeType::Map);
  YAML::Node cur = root;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw ParseError(path, 0, "empty path component");
    if (dot == std::string::npos) {
      cur[key] = value;
      break;
    }
    YAML::Node next = cur[key];
    if (!next || !next.IsMap()) {
      cur[key] = YAML::Node(YAML::NodeType::Map);
      next = cur[key];
    }
    cur.reset(next);
    start = dot + 1;
  }
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

void print_curve(std::ostream& log, const std::string& label, const RocCurve& curve) {
  log << label << ": p_md at p_fa = 0.1 -> " << curve.md_at_fa(0.1)
      << (curve.is_monotone() ? "" : "  (non-monotone curve!)") << '\n';
}

}  // namespace

ParseError::ParseError(const std::string& field, int line, const std::string& what)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         field + ": " + what),
      field_(field),
      line_(line) {}

ValidationError::ValidationError(const std::string& field, const std::string& what)
    : std::invalid_argument(field + ": " + what), field_(field) {}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::kRoc:
      return "roc";
    case Mode::kSnrSurvey:
      return "snr-survey";
    case Mode::kCompare:
      return "compare";
    case Mode::kValidate:
      return "validate";
  }
  return "?";
}

Mode parse_mode(const std::string& text) {
  if (text == "roc") return Mode::kRoc;
  if (text == "snr-survey") return Mode::kSnrSurvey;
  if (text == "compare") return Mode::kCompare;
  if (text == "validate") return Mode::kValidate;
  throw std::invalid_argument("expected roc, snr-survey, compare or validate, got '" + text +
                              "'");
}

std::vector<double> default_nu_list() { return log_space(1e-4, 1e4, 97); }

void ExperimentSpec::validate() const {
  try {
    geometry.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    throw ValidationError("geometry." + msg.substr(0, colon),
                          colon == std::string::npos ? msg : msg.substr(colon + 2));
  }
  if (detector.T < 1) throw ValidationError("detector.T", "must be >= 1");
  if (n_trials < 1) throw ValidationError("n_trials", "must be >= 1");
  if (workers < 0) throw ValidationError("workers", "must be >= 0");
  if (output_dir.empty()) throw ValidationError("output_dir", "must not be empty");
  if (nu_list.empty()) throw ValidationError("nu_list", "must not be empty");
  for (std::size_t i = 0; i < nu_list.size(); ++i) {
    if (!(nu_list[i] > 0.0) || !std::isfinite(nu_list[i])) {
      throw ValidationError("nu_list", "values must be positive and finite");
    }
    if (i > 0 && !(nu_list[i] > nu_list[i - 1])) {
      throw ValidationError("nu_list", "values must be strictly ascending");
    }
  }
  if (cell_sides.empty()) throw ValidationError("survey.cell_sides", "must not be empty");
  for (double s : cell_sides) {
    if (!(s > 0.0)) throw ValidationError("survey.cell_sides", "values must be positive");
  }
  if (validate_instances < 1) throw ValidationError("validate.instances", "must be >= 1");
}

ExperimentSpec parse_spec(const std::string& yaml_text,
                          const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("(document)", e.mark.line + 1, e.msg);
  }
  for (const auto& o : overrides) apply_override(root, o);
  ExperimentSpec spec = spec_from_node(root);
  spec.validate();
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path,
                               const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ParseError("--config", 0, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str(), overrides);
}

std::string emit_spec(const ExperimentSpec& spec) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "mode" << YAML::Value << to_string(spec.mode);
  e << YAML::Key << "n_trials" << YAML::Value << spec.n_trials;
  e << YAML::Key << "workers" << YAML::Value << spec.workers;
  e << YAML::Key << "output_dir" << YAML::Value << spec.output_dir;
  e << YAML::Key << "record_timing" << YAML::Value << spec.record_timing;
  e << YAML::Key << "nu_list" << YAML::Value << YAML::Flow << spec.nu_list;

  const GeometryConfig& g = spec.geometry;
  e << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "side_length_m" << YAML::Value << g.side_length_m;
  e << YAML::Key << "M" << YAML::Value << g.M;
  e << YAML::Key << "N" << YAML::Value << g.N;
  e << YAML::Key << "K" << YAML::Value << g.K;
  e << YAML::Key << "epsilon" << YAML::Value << g.epsilon;
  e << YAML::Key << "L" << YAML::Value << g.L;
  e << YAML::Key << "rho_max_mw" << YAML::Value << g.rho_max_mw;
  e << YAML::Key << "sigma2_dbm" << YAML::Value << g.sigma2_dbm;
  e << YAML::Key << "shadow_sigma_db" << YAML::Value << g.shadow_sigma_db;
  e << YAML::Key << "snr_target" << YAML::Value << g.snr_target.to_string();
  e << YAML::Key << "seed" << YAML::Value << g.seed;
  e << YAML::Key << "colocated" << YAML::Value << g.colocated;
  e << YAML::Key << "colocated_antennas" << YAML::Value << g.colocated_antennas;
  e << YAML::Key << "unit_norm_signatures" << YAML::Value << g.unit_norm_signatures;
  e << YAML::EndMap;

  e << YAML::Key << "detector" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "T" << YAML::Value << spec.detector.T;
  e << YAML::Key << "refactor_every" << YAML::Value << spec.detector.refactor_every;
  e << YAML::Key << "permutation_seed" << YAML::Value << spec.detector.permutation_seed;
  e << YAML::EndMap;

  e << YAML::Key << "survey" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "cell_sides" << YAML::Value << YAML::Flow << spec.cell_sides;
  e << YAML::Key << "statistic" << YAML::Value << to_string(spec.snr_statistic);
  e << YAML::EndMap;

  e << YAML::Key << "validate" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "instances" << YAML::Value << spec.validate_instances;
  e << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

int run(const ExperimentSpec& spec, std::ostream& log) {
  namespace fs = std::filesystem;
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(spec.output_dir);
  fs::create_directories(dir);

  const std::string resolved = emit_spec(spec);
  write_file(dir / "resolved_spec.yaml", resolved);

  const RunOptions opts{spec.workers, spec.record_timing};
  std::vector<std::string> outputs{"resolved_spec.yaml"};
  int status = 0;

  switch (spec.mode) {
    case Mode::kRoc: {
      const TrialSetResult r =
          run_trials(spec.geometry, spec.detector, spec.n_trials, spec.nu_list, opts);
      write_file(dir / "trials.csv", render([&](std::ostream& o) { write_trial_rows(o, r.rows); }));
      write_file(dir / "summary.csv", render([&](std::ostream& o) { write_roc_summary(o, r.curve); }));
      outputs.insert(outputs.end(), {"trials.csv", "summary.csv"});
      log << "roc: " << r.n_trials << " trials, " << r.trials_without_active
          << " without active devices (excluded from p_md)\n";
      print_curve(log, spec.geometry.colocated ? "co-located" : "cell-free", r.curve);
      break;
    }
    case Mode::kCompare: {
      const ArchitectureComparison c = compare_architectures(
          spec.geometry, spec.detector, spec.n_trials, spec.nu_list, opts);
      write_file(dir / "trials_cell_free.csv",
                 render([&](std::ostream& o) { write_trial_rows(o, c.cell_free.rows); }));
      write_file(dir / "summary_cell_free.csv",
                 render([&](std::ostream& o) { write_roc_summary(o, c.cell_free.curve); }));
      write_file(dir / "trials_colocated.csv",
                 render([&](std::ostream& o) { write_trial_rows(o, c.colocated.rows); }));
      write_file(dir / "summary_colocated.csv",
                 render([&](std::ostream& o) { write_roc_summary(o, c.colocated.curve); }));
      outputs.insert(outputs.end(), {"trials_cell_free.csv", "summary_cell_free.csv",
                                     "trials_colocated.csv", "summary_colocated.csv"});
      log << "compare: " << spec.n_trials << " paired trials\n";
      print_curve(log, "cell-free", c.cell_free.curve);
      print_curve(log, "co-located", c.colocated.curve);
      break;
    }
    case Mode::kSnrSurvey: {
      const auto sides = snr_survey(spec.geometry, spec.n_trials, spec.cell_sides,
                                    spec.snr_statistic, opts);
      write_file(dir / "snr_survey.csv", render([&](std::ostream& o) { write_snr_samples(o, sides); }));
      write_file(dir / "snr_summary.csv", render([&](std::ostream& o) { write_snr_summary(o, sides); }));
      outputs.insert(outputs.end(), {"snr_survey.csv", "snr_summary.csv"});
      for (const auto& s : sides) {
        log << "side " << s.side_length_m << " m: median SNR cell-free "
            << s.median_cell_free_db << " dB, co-located " << s.median_colocated_db << " dB\n";
      }
      break;
    }
    case Mode::kValidate: {
      ValidationConfig v = ValidationConfig::toy(spec.geometry);
      v.instances = spec.validate_instances;
      v.detector.permutation_seed = spec.detector.permutation_seed;
      const auto checks = run_validation(v);
      const std::string table = render([&](std::ostream& o) { print_validation_table(o, checks); });
      write_file(dir / "validate.txt", table);
      outputs.push_back("validate.txt");
      log << table;
      for (const auto& c : checks) {
        if (!c.passed) status = 1;
      }
      break;
    }
  }

  nlohmann::json manifest;
  manifest["tool"] = "cfad";
  manifest["version"] = kVersion;
  manifest["mode"] = to_string(spec.mode);
  manifest["spec_digest_fnv1a64"] = hex64(fnv1a(resolved));
  manifest["master_seed"] = spec.geometry.seed;
  manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION);
  manifest["compiler"] = __VERSION__;
  manifest["outputs"] = outputs;
  manifest["wall_time_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["exit_status"] = status;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  return status;
}

}  // namespace cfad
