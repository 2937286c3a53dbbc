#include "cfad/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace cfad {

std::string SnrPolicy::to_string() const {
  switch (kind) {
    case Kind::kAuto95:
      return "auto95";
    case Kind::kFull:
      return "full";
    case Kind::kFixed:
      break;
  }
  nlohmann::json j = target_db;
  return j.dump();
}

SnrPolicy SnrPolicy::parse(const std::string& text) {
  if (text == "auto95") return auto95();
  if (text == "full") return full();
  std::size_t used = 0;
  double db = 0.0;
  try {
    db = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(db)) {
    throw std::invalid_argument("snr_target: expected auto95, full or a dB value, got '" +
                                text + "'");
  }
  return fixed(db);
}

double GeometryConfig::sigma2_mw() const { return db_to_linear(sigma2_dbm); }

int GeometryConfig::antennas_per_ap() const {
  if (!colocated) return N;
  return colocated_antennas > 0 ? colocated_antennas : M * N;
}

GeometryConfig GeometryConfig::colocated_twin() const {
  GeometryConfig twin = *this;
  twin.colocated = true;
  twin.colocated_antennas = colocated ? antennas_per_ap() : M * N;
  return twin;
}

void GeometryConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument(field + ": " + why);
  };
  if (!(side_length_m > 0.0) || !std::isfinite(side_length_m)) {
    fail("side_length_m", "must be positive");
  }
  if (M < 1) fail("M", "must be >= 1");
  if (N < 1) fail("N", "must be >= 1");
  if (K < 1) fail("K", "must be >= 1");
  if (L < 1) fail("L", "must be >= 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail("epsilon", "must lie in [0, 1]");
  if (!(rho_max_mw > 0.0) || !std::isfinite(rho_max_mw)) {
    fail("rho_max_mw", "must be positive");
  }
  if (!std::isfinite(sigma2_dbm)) fail("sigma2_dbm", "must be finite");
  if (!(shadow_sigma_db >= 0.0) || !std::isfinite(shadow_sigma_db)) {
    fail("shadow_sigma_db", "must be non-negative");
  }
  if (colocated_antennas < 0) fail("colocated_antennas", "must be >= 0");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double x) { return 10.0 * std::log10(x); }

double torus_distance(Point p, Point q, double side) {
  // Minimizing over the 9 shifted copies of q separates per axis, since the
  // Euclidean norm is monotone in each |component|. Working on |p - q|
  // keeps the result exactly symmetric in p and q.
  auto wrap = [side](double a, double b) {
    const double d = std::abs(a - b);
    return std::min(d, std::abs(side - d));
  };
  return std::hypot(wrap(p.x, q.x), wrap(p.y, q.y));
}

double path_loss_db(double distance_m, double shadow_db) {
  if (distance_m < 10.0) return -81.2;
  if (distance_m < 50.0) return -61.2 - 20.0 * std::log10(distance_m);
  return -35.7 - 35.0 * std::log10(distance_m) + shadow_db;
}

Eigen::VectorXd dominant_gain(const Eigen::MatrixXd& beta) {
  return beta.colwise().maxCoeff().transpose();
}

double snr_target_linear(const Eigen::MatrixXd& beta, double sigma2_mw,
                         double rho_max_mw, const SnrPolicy& policy) {
  if (policy.kind == SnrPolicy::Kind::kFixed) {
    return db_to_linear(policy.target_db);
  }
  const Eigen::VectorXd b = dominant_gain(beta);
  std::vector<double> snr(b.size());
  for (Eigen::Index k = 0; k < b.size(); ++k) {
    snr[k] = rho_max_mw * b(k) / sigma2_mw;
  }
  std::sort(snr.begin(), snr.end());
  // Nearest-rank 5th percentile: ceil(0.05 K) devices lie at or below it.
  const std::size_t rank = (5 * snr.size() + 99) / 100;
  return snr[std::max<std::size_t>(rank, 1) - 1];
}

Eigen::VectorXd assign_powers(const Eigen::MatrixXd& beta, double sigma2_mw,
                              double rho_max_mw, const SnrPolicy& policy) {
  const Eigen::Index K = beta.cols();
  if (policy.kind == SnrPolicy::Kind::kFull) {
    return Eigen::VectorXd::Constant(K, rho_max_mw);
  }
  const double target = snr_target_linear(beta, sigma2_mw, rho_max_mw, policy);
  const Eigen::VectorXd b = dominant_gain(beta);
  Eigen::VectorXd rho(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double full_snr = rho_max_mw * b(k) / sigma2_mw;
    rho(k) = full_snr <= target ? rho_max_mw : target * sigma2_mw / b(k);
  }
  return rho;
}

Scenario assemble_scenario(const GeometryConfig& cfg,
                           std::vector<Point> ap_positions,
                           std::vector<Point> device_positions,
                           Eigen::MatrixXd shadow_db) {
  const auto M = static_cast<Eigen::Index>(ap_positions.size());
  const auto K = static_cast<Eigen::Index>(device_positions.size());
  if (shadow_db.rows() != M || shadow_db.cols() != K) {
    throw std::invalid_argument("shadow_db must be M x K");
  }
  Scenario sc;
  sc.side_length_m = cfg.side_length_m;
  sc.sigma2_mw = cfg.sigma2_mw();
  sc.rho_max_mw = cfg.rho_max_mw;
  sc.colocated = cfg.colocated;
  sc.seed = cfg.seed;
  sc.beta.resize(M, K);
  for (Eigen::Index m = 0; m < M; ++m) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const double d = torus_distance(ap_positions[m], device_positions[k],
                                      cfg.side_length_m);
      sc.beta(m, k) = db_to_linear(path_loss_db(d, shadow_db(m, k)));
    }
  }
  sc.shadow_db = std::move(shadow_db);
  sc.ap_positions = std::move(ap_positions);
  sc.device_positions = std::move(device_positions);
  sc.rho = assign_powers(sc.beta, sc.sigma2_mw, sc.rho_max_mw, cfg.snr_target);
  return sc;
}

Scenario build_scenario(const GeometryConfig& cfg, const TrialStreams& rng) {
  const double side = cfg.side_length_m;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Point> devices(cfg.K);
  {
    Engine e = rng.engine(Stream::kDevicePositions);
    for (auto& p : devices) {
      p.x = unit(e) * side;
      p.y = unit(e) * side;
    }
  }

  const int M = cfg.ap_count();
  std::vector<Point> aps(M);
  if (M == 1) {
    // On the wrapped square a single AP anywhere is equivalent to one at the
    // center, so one-AP networks share the co-located geometry.
    aps[0] = {side / 2.0, side / 2.0};
  } else {
    Engine e = rng.engine(Stream::kApPositions);
    for (auto& p : aps) {
      p.x = unit(e) * side;
      p.y = unit(e) * side;
    }
  }

  Eigen::MatrixXd shadow = Eigen::MatrixXd::Zero(M, cfg.K);
  if (cfg.shadow_sigma_db > 0.0) {
    Engine e = rng.engine(Stream::kShadowing);
    std::normal_distribution<double> n(0.0, cfg.shadow_sigma_db);
    for (int m = 0; m < M; ++m) {
      for (int k = 0; k < cfg.K; ++k) {
        shadow(m, k) = n(e);
      }
    }
  }

  Scenario sc = assemble_scenario(cfg, std::move(aps), std::move(devices),
                                  std::move(shadow));
  sc.seed = rng.master_seed();
  return sc;
}

namespace {

nlohmann::json points_to_json(const std::vector<Point>& pts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

std::vector<Point> points_from_json(const nlohmann::json& arr) {
  std::vector<Point> pts;
  for (const auto& e : arr) pts.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  return pts;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, Eigen::Index r,
                                 Eigen::Index c) {
  if (static_cast<Eigen::Index>(rows.size()) != r) {
    throw std::runtime_error("scenario file: matrix row count mismatch");
  }
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != c) {
      throw std::runtime_error("scenario file: matrix column count mismatch");
    }
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

void write_scenario(std::ostream& os, const Scenario& sc) {
  nlohmann::json j;
  j["format"] = "cfad-scenario-v1";
  j["side_length_m"] = sc.side_length_m;
  j["colocated"] = sc.colocated;
  j["seed"] = sc.seed;
  j["sigma2_mw"] = sc.sigma2_mw;
  j["rho_max_mw"] = sc.rho_max_mw;
  j["ap_positions"] = points_to_json(sc.ap_positions);
  j["device_positions"] = points_to_json(sc.device_positions);
  j["beta"] = matrix_to_json(sc.beta);
  j["shadow_db"] = matrix_to_json(sc.shadow_db);
  j["rho_mw"] = std::vector<double>(sc.rho.data(), sc.rho.data() + sc.rho.size());
  os << j.dump(1) << '\n';
}

Scenario read_scenario(std::istream& is) {
  const nlohmann::json j = nlohmann::json::parse(is);
  if (j.value("format", "") != "cfad-scenario-v1") {
    throw std::runtime_error("scenario file: unknown format tag");
  }
  Scenario sc;
  sc.side_length_m = j.at("side_length_m").get<double>();
  sc.colocated = j.at("colocated").get<bool>();
  sc.seed = j.at("seed").get<std::uint64_t>();
  sc.sigma2_mw = j.at("sigma2_mw").get<double>();
  sc.rho_max_mw = j.at("rho_max_mw").get<double>();
  sc.ap_positions = points_from_json(j.at("ap_positions"));
  sc.device_positions = points_from_json(j.at("device_positions"));
  const auto M = static_cast<Eigen::Index>(sc.ap_positions.size());
  const auto K = static_cast<Eigen::Index>(sc.device_positions.size());
  sc.beta = matrix_from_json(j.at("beta"), M, K);
  sc.shadow_db = matrix_from_json(j.at("shadow_db"), M, K);
  const auto rho = j.at("rho_mw").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(rho.size()) != K) {
    throw std::runtime_error("scenario file: rho length mismatch");
  }
  sc.rho = Eigen::Map<const Eigen::VectorXd>(rho.data(), K);
  return sc;
}

}  // namespace cfad
