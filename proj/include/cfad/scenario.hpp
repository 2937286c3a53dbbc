#pragma once

// Network geometry, large-scale fading and transmit powers.
//
// Units: distances in meters, powers in linear mW. dB and dBm values appear
// only in GeometryConfig and in reports.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfad/rng.hpp"

namespace cfad {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Rule for choosing per-device transmit powers.
struct SnrPolicy {
  enum class Kind {
    kAuto95,  // target = 5th percentile of full-power dominant-AP SNR
    kFixed,   // target given in dB
    kFull,    // everybody transmits at rho_max
  };
  Kind kind = Kind::kAuto95;
  double target_db = 0.0;

  static SnrPolicy auto95() { return {Kind::kAuto95, 0.0}; }
  static SnrPolicy fixed(double db) { return {Kind::kFixed, db}; }
  static SnrPolicy full() { return {Kind::kFull, 0.0}; }

  std::string to_string() const;
  /// Accepts "auto95", "full" or a number (dB).
  static SnrPolicy parse(const std::string& text);
};

struct GeometryConfig {
  double side_length_m = 1000.0;
  int M = 20;  // access points
  int N = 2;   // antennas per access point
  int K = 400;
  double epsilon = 0.1;
  int L = 40;
  double rho_max_mw = 200.0;
  double sigma2_dbm = -109.0;
  double shadow_sigma_db = 8.0;
  SnrPolicy snr_target = SnrPolicy::auto95();
  std::uint64_t seed = 1;

  // A co-located network has a single AP at the center of the square. Its
  // antenna count defaults to the cell-free budget M*N.
  bool colocated = false;
  int colocated_antennas = 0;

  bool unit_norm_signatures = false;

  double sigma2_mw() const;
  int ap_count() const { return colocated ? 1 : M; }
  int antennas_per_ap() const;

  /// The co-located counterpart with the same total antenna count.
  GeometryConfig colocated_twin() const;

  /// Throws std::invalid_argument whose message starts with the field name.
  void validate() const;
};

struct Scenario {
  double side_length_m = 0.0;
  std::vector<Point> ap_positions;
  std::vector<Point> device_positions;
  Eigen::MatrixXd beta;       // M x K, linear power gain
  Eigen::MatrixXd shadow_db;  // M x K
  Eigen::VectorXd rho;        // K, mW
  double sigma2_mw = 0.0;
  double rho_max_mw = 0.0;
  bool colocated = false;
  std::uint64_t seed = 0;

  int ap_count() const { return static_cast<int>(beta.rows()); }
  int device_count() const { return static_cast<int>(beta.cols()); }
};

double db_to_linear(double db);
double linear_to_db(double x);

/// Shortest distance on the torus obtained by wrapping the square's edges.
double torus_distance(Point p, Point q, double side);

/// Three-slope path loss in dB. Shadowing enters only the far slope.
double path_loss_db(double distance_m, double shadow_db);

/// max_m beta(m, k) for every k.
Eigen::VectorXd dominant_gain(const Eigen::MatrixXd& beta);

Eigen::VectorXd assign_powers(const Eigen::MatrixXd& beta, double sigma2_mw,
                              double rho_max_mw, const SnrPolicy& policy);

/// SNR target in linear scale that `policy` resolves to for this population.
/// Not meaningful for kFull.
double snr_target_linear(const Eigen::MatrixXd& beta, double sigma2_mw,
                         double rho_max_mw, const SnrPolicy& policy);

/// Builds beta and rho from explicit positions and shadowing.
Scenario assemble_scenario(const GeometryConfig& cfg,
                           std::vector<Point> ap_positions,
                           std::vector<Point> device_positions,
                           Eigen::MatrixXd shadow_db);

/// Draw order: device positions, AP positions, shadowing (row-major in m).
Scenario build_scenario(const GeometryConfig& cfg, const TrialStreams& rng);

void write_scenario(std::ostream& os, const Scenario& sc);
Scenario read_scenario(std::istream& is);

}  // namespace cfad
