#include "cfad/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

#include "cfad/airlink.hpp"
#include "cfad/rng.hpp"

namespace cfad {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TrialOutcome {
  std::vector<TrialMetrics> rows;
  std::uint64_t digest = 0;
  bool no_active = false;
  bool all_active = false;
};

TrialOutcome run_one_trial(const GeometryConfig& cfg, const DetectorConfig& dcfg,
                           int trial_id, const std::vector<double>& nu_list,
                           bool record_timing) {
  const auto t0 = std::chrono::steady_clock::now();
  const TrialData data = synthesize_trial(cfg, trial_id);
  const Scenario& sc = data.scenario;
  const SignatureBook& book = data.book;
  const ActivityPattern& act = data.activity;

  DetectorConfig trial_dcfg = dcfg;
  trial_dcfg.permutation_seed = trial_permutation_seed(dcfg, trial_id);
  const DetectorState st = run_coordinate_descent(data.frames, sc, book, trial_dcfg);

  TrialOutcome out;
  out.digest = draw_digest(book, act);
  const int n_active = static_cast<int>(act.active_set.size());
  out.no_active = n_active == 0;
  out.all_active = n_active == cfg.K;
  for (double nu : nu_list) {
    const DetectionResult det = threshold_decide(st, sc, nu);
    const std::vector<int> detected = det.detected_set();
    TrialMetrics row;
    row.trial_id = trial_id;
    row.nu = nu;
    row.n_active = n_active;
    row.p_md = kNaN;
    row.p_fa = kNaN;
    if (!out.no_active && !out.all_active) {
      const MetricsPair mp = compute_metrics(act.active_set, detected, cfg.K);
      row.p_md = mp.p_md;
      row.p_fa = mp.p_fa;
    } else if (out.no_active) {
      row.p_fa = static_cast<double>(detected.size()) / cfg.K;
    } else {
      const double hit = static_cast<double>(detected.size()) / cfg.K;
      row.p_md = 1.0 - hit;
    }
    out.rows.push_back(row);
  }
  const double elapsed =
      record_timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                          .count()
                    : 0.0;
  for (auto& r : out.rows) r.elapsed_s = elapsed;
  return out;
}

TrialSetResult collect(std::vector<TrialOutcome>& outcomes,
                       const std::vector<double>& nu_list) {
  TrialSetResult res;
  res.n_trials = static_cast<int>(outcomes.size());
  res.detector_runs = res.n_trials;
  for (auto& o : outcomes) {
    if (o.no_active) ++res.trials_without_active;
    if (o.all_active) ++res.trials_all_active;
    res.draw_digests.push_back(o.digest);
    res.rows.insert(res.rows.end(), o.rows.begin(), o.rows.end());
  }
  res.curve = aggregate(res.rows, nu_list);
  return res;
}

void check_nu_list(const std::vector<double>& nu_list) {
  if (nu_list.empty()) throw std::invalid_argument("nu_list: must not be empty");
  for (std::size_t i = 0; i < nu_list.size(); ++i) {
    if (!(nu_list[i] > 0.0)) throw std::invalid_argument("nu_list: values must be positive");
    if (i > 0 && !(nu_list[i] > nu_list[i - 1])) {
      throw std::invalid_argument("nu_list: values must be strictly ascending");
    }
  }
}

}  // namespace

TrialData synthesize_trial(const GeometryConfig& cfg, int trial_id) {
  const TrialStreams streams(cfg.seed, static_cast<std::uint64_t>(trial_id));
  TrialData d;
  d.scenario = build_scenario(cfg, streams);
  Engine sig_rng = streams.engine(Stream::kSignatures);
  d.book = draw_signatures(cfg.L, cfg.K, sig_rng, cfg.unit_norm_signatures);
  Engine act_rng = streams.engine(Stream::kActivity);
  d.activity = sample_activity(cfg.K, cfg.epsilon, act_rng);
  d.frames = synthesize_frames(d.scenario, d.book, d.activity, cfg.antennas_per_ap(),
                               streams);
  return d;
}

std::uint64_t trial_permutation_seed(const DetectorConfig& dcfg, int trial_id) {
  return derive_seed(dcfg.permutation_seed, static_cast<std::uint64_t>(trial_id),
                     static_cast<std::uint64_t>(Stream::kPermutation));
}

MetricsPair compute_metrics(const std::vector<int>& active,
                            const std::vector<int>& detected, int K) {
  std::vector<std::uint8_t> is_active(K, 0);
  for (int k : active) {
    if (k < 0 || k >= K) throw std::out_of_range("compute_metrics: index outside 0..K-1");
    is_active[k] = 1;
  }
  const auto n_active = static_cast<int>(std::count(is_active.begin(), is_active.end(), 1));
  if (n_active == 0) throw UndefinedMiss();
  if (n_active == K) throw UndefinedFalseAlarm();

  std::vector<std::uint8_t> is_detected(K, 0);
  for (int k : detected) {
    if (k < 0 || k >= K) throw std::out_of_range("compute_metrics: index outside 0..K-1");
    is_detected[k] = 1;
  }
  int hits = 0;
  int false_alarms = 0;
  for (int k = 0; k < K; ++k) {
    if (!is_detected[k]) continue;
    if (is_active[k]) {
      ++hits;
    } else {
      ++false_alarms;
    }
  }
  return {1.0 - static_cast<double>(hits) / n_active,
          static_cast<double>(false_alarms) / (K - n_active)};
}

bool RocCurve::is_monotone() const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].nu > points[i - 1].nu)) return false;
    if (points[i].mean_p_fa > points[i - 1].mean_p_fa) return false;
    if (points[i].mean_p_md < points[i - 1].mean_p_md) return false;
  }
  return true;
}

double RocCurve::md_at_fa(double target) const {
  for (std::size_t i = 1; i < points.size(); ++i) {
    const RocPoint& a = points[i - 1];
    const RocPoint& b = points[i];
    if (a.mean_p_fa >= target && b.mean_p_fa <= target) {
      if (a.mean_p_fa == b.mean_p_fa) return a.mean_p_md;
      const double t = (a.mean_p_fa - target) / (a.mean_p_fa - b.mean_p_fa);
      return a.mean_p_md + t * (b.mean_p_md - a.mean_p_md);
    }
  }
  return kNaN;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, std::max(n, 1));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> log_space(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("log_space: need count >= 1 and 0 < lo <= hi");
  }
  std::vector<double> v(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    v[i] = std::pow(10.0, a + t * (b - a));
  }
  return v;
}

RocCurve aggregate(const std::vector<TrialMetrics>& rows,
                   const std::vector<double>& nu_list) {
  RocCurve curve;
  curve.points.resize(nu_list.size());
  for (std::size_t j = 0; j < nu_list.size(); ++j) curve.points[j].nu = nu_list[j];
  std::vector<double> sum_md(nu_list.size(), 0.0);
  std::vector<double> sum_fa(nu_list.size(), 0.0);
  for (const auto& r : rows) {
    const auto it = std::lower_bound(nu_list.begin(), nu_list.end(), r.nu);
    if (it == nu_list.end() || *it != r.nu) continue;
    const auto j = static_cast<std::size_t>(it - nu_list.begin());
    if (!std::isnan(r.p_md)) {
      sum_md[j] += r.p_md;
      ++curve.points[j].n_trials_md;
    }
    if (!std::isnan(r.p_fa)) {
      sum_fa[j] += r.p_fa;
      ++curve.points[j].n_trials_fa;
    }
  }
  for (std::size_t j = 0; j < nu_list.size(); ++j) {
    auto& p = curve.points[j];
    p.mean_p_md = p.n_trials_md ? sum_md[j] / p.n_trials_md : kNaN;
    p.mean_p_fa = p.n_trials_fa ? sum_fa[j] / p.n_trials_fa : kNaN;
  }
  return curve;
}

TrialSetResult run_trials(const GeometryConfig& cfg, const DetectorConfig& dcfg,
                          int n_trials, const std::vector<double>& nu_list,
                          const RunOptions& opts) {
  cfg.validate();
  dcfg.validate();
  check_nu_list(nu_list);
  if (n_trials < 1) throw std::invalid_argument("n_trials: must be >= 1");
  std::vector<TrialOutcome> outcomes(n_trials);
  parallel_for(n_trials, opts.workers, [&](int t) {
    outcomes[t] = run_one_trial(cfg, dcfg, t, nu_list, opts.record_timing);
  });
  return collect(outcomes, nu_list);
}

ArchitectureComparison compare_architectures(const GeometryConfig& cfg,
                                             const DetectorConfig& dcfg, int n_trials,
                                             const std::vector<double>& nu_list,
                                             const RunOptions& opts) {
  const GeometryConfig twin = cfg.colocated_twin();
  GeometryConfig cell_free = cfg;
  cell_free.colocated = false;
  cell_free.validate();
  twin.validate();
  dcfg.validate();
  check_nu_list(nu_list);
  if (n_trials < 1) throw std::invalid_argument("n_trials: must be >= 1");

  std::vector<TrialOutcome> cf(n_trials);
  std::vector<TrialOutcome> co(n_trials);
  parallel_for(n_trials, opts.workers, [&](int t) {
    cf[t] = run_one_trial(cell_free, dcfg, t, nu_list, opts.record_timing);
    co[t] = run_one_trial(twin, dcfg, t, nu_list, opts.record_timing);
  });
  return {collect(cf, nu_list), collect(co, nu_list)};
}

SnrStatistic parse_snr_statistic(const std::string& text) {
  if (text == "dominant") return SnrStatistic::kDominantAp;
  if (text == "sum") return SnrStatistic::kSumOverAps;
  throw std::invalid_argument("snr_statistic: expected 'dominant' or 'sum', got '" + text +
                              "'");
}

std::string to_string(SnrStatistic s) {
  return s == SnrStatistic::kDominantAp ? "dominant" : "sum";
}

double median(std::vector<double> v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * v.size()));
  return v[std::clamp<std::size_t>(rank, 1, v.size()) - 1];
}

std::vector<SnrSurveySide> snr_survey(const GeometryConfig& cfg, int n_trials,
                                      const std::vector<double>& cell_sides,
                                      SnrStatistic statistic, const RunOptions& opts) {
  if (n_trials < 1) throw std::invalid_argument("n_trials: must be >= 1");
  std::vector<SnrSurveySide> out;
  for (double side : cell_sides) {
    if (!(side > 0.0)) throw std::invalid_argument("cell_sides: values must be positive");
    GeometryConfig g = cfg;
    g.side_length_m = side;
    g.colocated = false;
    g.snr_target = SnrPolicy::full();
    g.validate();
    const GeometryConfig twin = g.colocated_twin();

    std::vector<std::vector<double>> cf(n_trials);
    std::vector<std::vector<double>> co(n_trials);
    parallel_for(n_trials, opts.workers, [&](int t) {
      const TrialStreams streams(g.seed, static_cast<std::uint64_t>(t));
      const Scenario a = build_scenario(g, streams);
      const Scenario b = build_scenario(twin, streams);
      const double scale = g.rho_max_mw / a.sigma2_mw;
      for (int k = 0; k < g.K; ++k) {
        const double gain = statistic == SnrStatistic::kDominantAp ? a.beta.col(k).maxCoeff()
                                                                   : a.beta.col(k).sum();
        cf[t].push_back(linear_to_db(scale * gain));
        co[t].push_back(linear_to_db(scale * b.beta(0, k)));
      }
    });

    SnrSurveySide s;
    s.side_length_m = side;
    for (int t = 0; t < n_trials; ++t) {
      s.cell_free_db.insert(s.cell_free_db.end(), cf[t].begin(), cf[t].end());
      s.colocated_db.insert(s.colocated_db.end(), co[t].begin(), co[t].end());
    }
    s.median_cell_free_db = median(s.cell_free_db);
    s.median_colocated_db = median(s.colocated_db);
    s.p5_cell_free_db = percentile(s.cell_free_db, 5.0);
    s.p5_colocated_db = percentile(s.colocated_db, 5.0);
    out.push_back(std::move(s));
  }
  return out;
}

void write_trial_rows(std::ostream& os, const std::vector<TrialMetrics>& rows) {
  os << "trial_id,nu,p_md,p_fa,n_active,elapsed_s\n";
  os << std::setprecision(17);
  for (const auto& r : rows) {
    os << r.trial_id << ',' << r.nu << ',' << r.p_md << ',' << r.p_fa << ','
       << r.n_active << ',' << r.elapsed_s << '\n';
  }
}

void write_roc_summary(std::ostream& os, const RocCurve& curve) {
  os << "nu,mean_p_md,mean_p_fa,n_trials_md,n_trials_fa\n";
  os << std::setprecision(17);
  for (const auto& p : curve.points) {
    os << p.nu << ',' << p.mean_p_md << ',' << p.mean_p_fa << ',' << p.n_trials_md << ','
       << p.n_trials_fa << '\n';
  }
}

void write_snr_samples(std::ostream& os, const std::vector<SnrSurveySide>& sides) {
  os << "cell_side_m,architecture,device_id,snr_db\n";
  os << std::setprecision(17);
  for (const auto& s : sides) {
    for (std::size_t i = 0; i < s.cell_free_db.size(); ++i) {
      os << s.side_length_m << ",cell-free," << i << ',' << s.cell_free_db[i] << '\n';
    }
    for (std::size_t i = 0; i < s.colocated_db.size(); ++i) {
      os << s.side_length_m << ",co-located," << i << ',' << s.colocated_db[i] << '\n';
    }
  }
}

void write_snr_summary(std::ostream& os, const std::vector<SnrSurveySide>& sides) {
  os << "cell_side_m,architecture,n_samples,median_snr_db,p5_snr_db\n";
  os << std::setprecision(17);
  for (const auto& s : sides) {
    os << s.side_length_m << ",cell-free," << s.cell_free_db.size() << ','
       << s.median_cell_free_db << ',' << s.p5_cell_free_db << '\n';
    os << s.side_length_m << ",co-located," << s.colocated_db.size() << ','
       << s.median_colocated_db << ',' << s.p5_colocated_db << '\n';
  }
}

}  // namespace cfad
