#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cfad/scenario.hpp"

namespace cfad {
namespace {

GeometryConfig small_config() {
  GeometryConfig g;
  g.M = 5;
  g.K = 30;
  g.seed = 42;
  return g;
}

TEST(TorusDistance, Examples) {
  EXPECT_EQ(torus_distance({123, 456}, {123, 456}, 1000), 0.0);
  EXPECT_NEAR(torus_distance({0, 0}, {900, 0}, 1000), 100.0, 1e-12);
  EXPECT_NEAR(torus_distance({0, 0}, {600, 800}, 1000), 447.2136, 1e-4);
  EXPECT_NEAR(torus_distance({0, 0}, {600, 800}, 1000), std::sqrt(400.0 * 400 + 200.0 * 200),
              1e-12);
}

// Enumerates the 9 translated copies of q.
double nine_shift_distance(Point p, Point q, double side) {
  double best = 1e300;
  for (int sx = -1; sx <= 1; ++sx) {
    for (int sy = -1; sy <= 1; ++sy) {
      best = std::min(best, std::hypot(p.x - q.x - sx * side, p.y - q.y - sy * side));
    }
  }
  return best;
}

TEST(TorusDistance, SymmetricBoundedAndEuclideanNearby) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  const double bound = 1000.0 * std::sqrt(2.0) / 2.0;
  for (int i = 0; i < 20000; ++i) {
    const Point p{u(rng), u(rng)};
    const Point q{u(rng), u(rng)};
    const double d = torus_distance(p, q, 1000.0);
    EXPECT_EQ(d, torus_distance(q, p, 1000.0));
    EXPECT_NEAR(d, nine_shift_distance(p, q, 1000.0), 1e-9);
    EXPECT_LE(d, bound + 1e-9);
    if (std::abs(p.x - q.x) < 500.0 && std::abs(p.y - q.y) < 500.0) {
      EXPECT_NEAR(d, std::hypot(p.x - q.x, p.y - q.y), 1e-9);
    }
  }
}

TEST(PathLoss, PrintedValues) {
  EXPECT_EQ(path_loss_db(5.0, 12.0), -81.2);
  EXPECT_EQ(path_loss_db(9.99, 0.0), -81.2);
  EXPECT_NEAR(path_loss_db(10.0, 5.0), -81.2, 1e-12);  // -61.2 - 20, no shadow
  EXPECT_NEAR(path_loss_db(20.0, 0.0), -87.2206, 1e-4);
  EXPECT_NEAR(path_loss_db(49.99, 3.0), -61.2 - 20.0 * std::log10(49.99), 1e-12);
  EXPECT_NEAR(path_loss_db(50.0, 0.0), -35.7 - 35.0 * std::log10(50.0), 1e-12);
  EXPECT_NEAR(path_loss_db(50.0, -4.0), -35.7 - 35.0 * std::log10(50.0) - 4.0, 1e-12);
  EXPECT_NEAR(path_loss_db(100.0, 0.0), -105.7, 1e-12);
}

TEST(PathLoss, ShadowOnlyOnFarSlope) {
  for (double d : {1.0, 9.0, 10.0, 30.0, 49.9}) {
    EXPECT_EQ(path_loss_db(d, 7.5), path_loss_db(d, -7.5)) << d;
  }
  EXPECT_NE(path_loss_db(51.0, 7.5), path_loss_db(51.0, -7.5));
}

TEST(AssignPowers, FullPolicyUsesMaximum) {
  Eigen::MatrixXd beta(2, 3);
  beta << 1e-10, 1e-12, 3e-11, 2e-11, 5e-13, 1e-9;
  const Eigen::VectorXd rho = assign_powers(beta, 1e-11, 200.0, SnrPolicy::full());
  for (int k = 0; k < 3; ++k) EXPECT_EQ(rho(k), 200.0);
}

TEST(AssignPowers, FixedTargetEqualizesReceivedSnr) {
  Eigen::MatrixXd beta(1, 2);
  beta << 1e-10, 1e-11;
  const double sigma2 = 1e-11;
  // Full-power SNRs are 2000 and 200; 10 dB sits below both.
  const Eigen::VectorXd rho = assign_powers(beta, sigma2, 200.0, SnrPolicy::fixed(10.0));
  EXPECT_NEAR(rho(0) / rho(1), 0.1, 1e-12);
  EXPECT_NEAR(rho(0) * beta(0, 0) / sigma2, 10.0, 1e-9);
  EXPECT_NEAR(rho(1) * beta(0, 1) / sigma2, 10.0, 1e-9);
}

TEST(AssignPowers, Auto95CapsExactlyTwentyOfFourHundred) {
  std::mt19937_64 rng(400);
  std::uniform_real_distribution<double> db(-140.0, -80.0);
  Eigen::MatrixXd beta(3, 400);
  for (int m = 0; m < 3; ++m) {
    for (int k = 0; k < 400; ++k) beta(m, k) = db_to_linear(db(rng));
  }
  const double sigma2 = db_to_linear(-109.0);
  const Eigen::VectorXd rho = assign_powers(beta, sigma2, 200.0, SnrPolicy::auto95());
  const Eigen::VectorXd b = dominant_gain(beta);
  const double target = snr_target_linear(beta, sigma2, 200.0, SnrPolicy::auto95());

  int capped = 0;
  int meeting = 0;
  for (int k = 0; k < 400; ++k) {
    EXPECT_GT(rho(k), 0.0);
    EXPECT_LE(rho(k), 200.0);
    if (rho(k) == 200.0) ++capped;
    if (rho(k) * b(k) / sigma2 >= target * (1 - 1e-12)) ++meeting;
  }
  EXPECT_EQ(capped, 20);
  EXPECT_GE(meeting / 400.0, 0.95);

  // Independent percentile: the 20th smallest full-power SNR.
  std::vector<double> snr(400);
  for (int k = 0; k < 400; ++k) snr[k] = 200.0 * b(k) / sigma2;
  std::nth_element(snr.begin(), snr.begin() + 19, snr.end());
  EXPECT_EQ(target, snr[19]);
}

TEST(GeometryConfig, ValidationNamesTheField) {
  GeometryConfig g;
  g.epsilon = 1.5;
  try {
    g.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_EQ(std::string(e.what()).rfind("epsilon", 0), 0u);
  }
  g = GeometryConfig{};
  g.L = 0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = GeometryConfig{};
  EXPECT_NO_THROW(g.validate());
}

TEST(GeometryConfig, ColocatedTwinKeepsAntennaBudget) {
  GeometryConfig g;
  const GeometryConfig twin = g.colocated_twin();
  EXPECT_TRUE(twin.colocated);
  EXPECT_EQ(twin.ap_count(), 1);
  EXPECT_EQ(twin.antennas_per_ap(), g.M * g.N);
  EXPECT_NEAR(g.sigma2_mw(), 1.2589254117941673e-11, 1e-24);
}

TEST(BuildScenario, ColocatedHasOneCenteredAp) {
  GeometryConfig g = small_config();
  g.colocated = true;
  const Scenario sc = build_scenario(g, TrialStreams(g.seed, 0));
  ASSERT_EQ(sc.ap_count(), 1);
  EXPECT_EQ(sc.ap_positions[0], (Point{500.0, 500.0}));
  EXPECT_TRUE(sc.colocated);
}

TEST(BuildScenario, InvariantsHold) {
  const GeometryConfig g = small_config();
  const Scenario sc = build_scenario(g, TrialStreams(g.seed, 3));
  ASSERT_EQ(sc.ap_count(), 5);
  ASSERT_EQ(sc.device_count(), 30);
  for (const auto& p : sc.device_positions) {
    EXPECT_GE(p.x, 0.0);
    EXPECT_LT(p.x, 1000.0);
    EXPECT_GE(p.y, 0.0);
    EXPECT_LT(p.y, 1000.0);
  }
  for (int m = 0; m < 5; ++m) {
    for (int k = 0; k < 30; ++k) {
      EXPECT_GT(sc.beta(m, k), 0.0);
      const double d = torus_distance(sc.ap_positions[m], sc.device_positions[k], 1000.0);
      EXPECT_NEAR(linear_to_db(sc.beta(m, k)), path_loss_db(d, sc.shadow_db(m, k)), 1e-9);
    }
  }
  for (int k = 0; k < 30; ++k) {
    EXPECT_GT(sc.rho(k), 0.0);
    EXPECT_LE(sc.rho(k), 200.0);
  }
}

TEST(BuildScenario, BitReproducible) {
  const GeometryConfig g = small_config();
  const Scenario a = build_scenario(g, TrialStreams(g.seed, 9));
  const Scenario b = build_scenario(g, TrialStreams(g.seed, 9));
  EXPECT_EQ(a.beta, b.beta);
  EXPECT_EQ(a.rho, b.rho);
  EXPECT_EQ(a.ap_positions, b.ap_positions);
  EXPECT_EQ(a.device_positions, b.device_positions);
  const Scenario c = build_scenario(g, TrialStreams(g.seed, 10));
  EXPECT_NE(a.beta, c.beta);
}

TEST(BuildScenario, ZeroShadowGivesDeterministicGains) {
  GeometryConfig g = small_config();
  g.shadow_sigma_db = 0.0;
  const Scenario sc = build_scenario(g, TrialStreams(g.seed, 0));
  EXPECT_EQ(sc.shadow_db.cwiseAbs().maxCoeff(), 0.0);
}

TEST(BuildScenario, ShadowStandardDeviation) {
  GeometryConfig g;
  g.M = 10;
  g.K = 10000;
  const Scenario sc = build_scenario(g, TrialStreams(77, 0));
  const Eigen::ArrayXXd s = sc.shadow_db.array();
  const double mean = s.mean();
  const double sd = std::sqrt((s - mean).square().sum() / (s.size() - 1));
  EXPECT_NEAR(sd, 8.0, 0.1);
  EXPECT_NEAR(mean, 0.0, 0.1);
}

TEST(BuildScenario, CellFreeAndColocatedShareDevicePositions) {
  const GeometryConfig g = small_config();
  const TrialStreams rng(g.seed, 2);
  const Scenario a = build_scenario(g, rng);
  const Scenario b = build_scenario(g.colocated_twin(), rng);
  EXPECT_EQ(a.device_positions, b.device_positions);
}

TEST(ScenarioFile, RoundTripIsExact) {
  const GeometryConfig g = small_config();
  const Scenario a = build_scenario(g, TrialStreams(g.seed, 1));
  std::stringstream buf;
  write_scenario(buf, a);
  const Scenario b = read_scenario(buf);
  EXPECT_EQ(a.beta, b.beta);
  EXPECT_EQ(a.shadow_db, b.shadow_db);
  EXPECT_EQ(a.rho, b.rho);
  EXPECT_EQ(a.sigma2_mw, b.sigma2_mw);
  EXPECT_EQ(a.ap_positions, b.ap_positions);
  EXPECT_EQ(a.device_positions, b.device_positions);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.colocated, b.colocated);
}

TEST(ScenarioFile, RejectsForeignDocument) {
  std::stringstream buf("{\"format\": \"something-else\"}");
  EXPECT_THROW(read_scenario(buf), std::runtime_error);
}

TEST(SnrPolicy, ParseAndPrint) {
  EXPECT_EQ(SnrPolicy::parse("auto95").kind, SnrPolicy::Kind::kAuto95);
  EXPECT_EQ(SnrPolicy::parse("full").kind, SnrPolicy::Kind::kFull);
  const SnrPolicy f = SnrPolicy::parse("-3.5");
  EXPECT_EQ(f.kind, SnrPolicy::Kind::kFixed);
  EXPECT_EQ(f.target_db, -3.5);
  EXPECT_EQ(SnrPolicy::parse(f.to_string()).target_db, -3.5);
  EXPECT_THROW(SnrPolicy::parse("loud"), std::invalid_argument);
}

}  // namespace
}  // namespace cfad
