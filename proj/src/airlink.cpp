#include "cfad/airlink.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace cfad {

ActivityPattern ActivityPattern::from_indices(int K, std::vector<int> active) {
  ActivityPattern p;
  p.a.assign(K, 0);
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());
  for (int k : active) {
    if (k < 0 || k >= K) throw std::out_of_range("active index out of range");
    p.a[k] = 1;
  }
  p.active_set = std::move(active);
  return p;
}

FrameSet FrameSet::from_blocks(std::vector<ComplexMatrix> blocks) {
  FrameSet f;
  f.q_y.reserve(blocks.size());
  for (const auto& y : blocks) {
    const double n = static_cast<double>(y.cols());
    f.q_y.emplace_back(ComplexMatrix(y * y.adjoint() / n));
  }
  f.Y = std::move(blocks);
  return f;
}

SignatureBook draw_signatures(int L, int K, Engine& rng, bool unit_norm) {
  if (L < 1 || K < 1) throw std::invalid_argument("draw_signatures: L, K >= 1");
  SignatureBook book;
  book.S.resize(L, K);
  for (int k = 0; k < K; ++k) {
    for (int l = 0; l < L; ++l) {
      book.S(l, k) = complex_gaussian(rng);
    }
  }
  if (unit_norm) {
    book.S.colwise().normalize();
  }
  return book;
}

ActivityPattern sample_activity(int K, double epsilon, Engine& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("sample_activity: epsilon outside [0, 1]");
  }
  std::bernoulli_distribution coin(epsilon);
  ActivityPattern p;
  p.a.resize(K);
  for (int k = 0; k < K; ++k) {
    p.a[k] = coin(rng) ? 1 : 0;
    if (p.a[k]) p.active_set.push_back(k);
  }
  return p;
}

FrameSet synthesize_frames(const Scenario& sc, const SignatureBook& book,
                           const ActivityPattern& act, int N,
                           const TrialStreams& rng) {
  const int M = sc.ap_count();
  const int K = sc.device_count();
  const int L = book.length();
  if (book.device_count() != K || act.device_count() != K) {
    throw std::invalid_argument("synthesize_frames: device count mismatch");
  }
  const auto n_active = static_cast<Eigen::Index>(act.active_set.size());
  ComplexMatrix s_active(L, n_active);
  for (Eigen::Index i = 0; i < n_active; ++i) {
    s_active.col(i) = book.S.col(act.active_set[i]);
  }

  std::vector<ComplexMatrix> blocks(M);
  for (int m = 0; m < M; ++m) {
    Engine ch = rng.engine(Stream::kChannel, m);
    ComplexMatrix h(K, N);
    for (int n = 0; n < N; ++n) {
      for (int k = 0; k < K; ++k) h(k, n) = complex_gaussian(ch);
    }
    ComplexMatrix x(n_active, N);
    for (Eigen::Index i = 0; i < n_active; ++i) {
      const int k = act.active_set[i];
      x.row(i) = h.row(k) * std::sqrt(sc.rho(k) * sc.beta(m, k));
    }
    ComplexMatrix y = s_active * x;
    if (y.size() == 0) y = ComplexMatrix::Zero(L, N);
    if (sc.sigma2_mw > 0.0) {
      Engine nz = rng.engine(Stream::kNoise, m);
      for (int n = 0; n < N; ++n) {
        for (int l = 0; l < L; ++l) y(l, n) += complex_gaussian(nz, sc.sigma2_mw);
      }
    }
    blocks[m] = std::move(y);
  }
  return FrameSet::from_blocks(std::move(blocks));
}

std::uint64_t draw_digest(const SignatureBook& book, const ActivityPattern& act) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  feed(book.S.data(), sizeof(Complex) * static_cast<std::size_t>(book.S.size()));
  feed(act.a.data(), act.a.size());
  return h;
}

void write_frames(std::ostream& os, const FrameSet& frames) {
  const int M = frames.ap_count();
  const auto L = M > 0 ? frames.Y[0].rows() : 0;
  const auto N = M > 0 ? frames.Y[0].cols() : 0;
  os << M << ' ' << L << ' ' << N << '\n';
  os << std::setprecision(17);
  for (const auto& y : frames.Y) {
    for (Eigen::Index l = 0; l < y.rows(); ++l) {
      for (Eigen::Index n = 0; n < y.cols(); ++n) {
        if (n) os << ' ';
        os << y(l, n).real() << ' ' << y(l, n).imag();
      }
      os << '\n';
    }
  }
}

FrameSet read_frames(std::istream& is) {
  int M = 0;
  Eigen::Index L = 0;
  Eigen::Index N = 0;
  if (!(is >> M >> L >> N) || M < 0 || L < 0 || N < 0) {
    throw std::runtime_error("frame dump: bad header");
  }
  std::vector<ComplexMatrix> blocks(M, ComplexMatrix(L, N));
  for (auto& y : blocks) {
    for (Eigen::Index l = 0; l < L; ++l) {
      for (Eigen::Index n = 0; n < N; ++n) {
        double re = 0.0;
        double im = 0.0;
        if (!(is >> re >> im)) throw std::runtime_error("frame dump: truncated");
        y(l, n) = {re, im};
      }
    }
  }
  return FrameSet::from_blocks(std::move(blocks));
}

}  // namespace cfad
