#include "spectra/anticonc.hpp"

#include <algorithm>
#include <cmath>

#include "spectra/errors.hpp"

namespace spectra {

namespace {

double wilson_half_width(double p, double n) {
  const double zq = 2.5758293035489004;  // 99% two-sided normal quantile
  double z2 = zq * zq;
  double half = zq * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) /
                (1.0 + z2 / n);
  return std::max(half, 1e-12);
}

std::int64_t best_ball_count(const std::vector<Complex>& xs, double t) {
  const std::int64_t n = static_cast<std::int64_t>(xs.size());
  // sort by real part; only candidates within |Re| <= t can be in a ball
  std::vector<Complex> s(xs);
  std::sort(s.begin(), s.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  std::int64_t best = 0;
  std::int64_t lo = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    while (s[i].real() - s[lo].real() > t) ++lo;
    std::int64_t cnt = 0;
    for (std::int64_t j = lo; j < n && s[j].real() - s[i].real() <= t; ++j) {
      if (std::abs(s[j] - s[i]) <= t) ++cnt;
    }
    best = std::max(best, cnt);
  }
  return best;
}

}  // namespace

ConcentrationEstimate levy_of_samples(const std::vector<Complex>& xs, double t) {
  require(!xs.empty(), "levy: no samples");
  ConcentrationEstimate est;
  est.radius = t;
  est.trials = static_cast<std::int64_t>(xs.size());
  est.l_value = static_cast<double>(best_ball_count(xs, t)) / xs.size();
  est.l_value_2t = static_cast<double>(best_ball_count(xs, 2.0 * t)) / xs.size();
  est.half_width = wilson_half_width(est.l_value, static_cast<double>(xs.size()));
  return est;
}

ConcentrationEstimate levy_estimate(const Sampler& gamma, double t,
                                    std::int64_t trials, Rng rng) {
  require(trials >= 1000, "levy_estimate: need at least 1e3 trials");
  std::vector<Complex> xs;
  xs.reserve(trials);
  for (std::int64_t i = 0; i < trials; ++i) xs.push_back(gamma(rng));
  return levy_of_samples(xs, t);
}

LkrCheck lkr_check(const std::vector<Sampler>& xis, double r,
                   std::int64_t trials, Rng rng) {
  require(!xis.empty(), "lkr_check: no summands");
  LkrCheck out;
  double denom = 0.0;
  for (size_t i = 0; i < xis.size(); ++i) {
    Rng stream = rng.fork("summand").fork(static_cast<std::uint64_t>(i));
    auto est = levy_estimate(xis[i], r, std::max<std::int64_t>(trials, 1000), stream);
    denom += 1.0 - est.l_value;
  }
  out.denom = denom;
  if (denom <= 1e-12) {
    out.skipped = true;
    return out;
  }
  Rng sum_stream = rng.fork("sum");
  Sampler total = [&xis](Rng& g) {
    Complex acc(0.0, 0.0);
    for (const auto& xi : xis) acc += xi(g);
    return acc;
  };
  auto est = levy_estimate(total, r, std::max<std::int64_t>(trials, 1000), sum_stream);
  out.lhs = est.l_value;
  out.rhs = kLkrCFit / std::sqrt(denom);
  out.pass = out.lhs <= out.rhs;
  return out;
}

SliceResult slice_mc(const VectorXcd& v, Index m_ones, double delta,
                     std::int64_t trials, Rng rng) {
  const Index n = static_cast<Index>(v.size());
  require(m_ones >= 1 && 2 * m_ones <= n, "slice_mc: need 1 <= m <= n/2");
  require(trials >= 1000, "slice_mc: need at least 1e3 trials");
  SliceResult res;
  auto ls = largest_level_set(v, delta);
  res.gamma = 1.0 - static_cast<double>(ls.count_delta) / n;
  if (res.gamma <= 0.0)
    throw invalid_parameter("slice_mc: fully concentrated vector (gamma = 0)");

  std::vector<Index> pool(n);
  std::vector<Complex> xs;
  xs.reserve(trials);
  for (std::int64_t tr = 0; tr < trials; ++tr) {
    Rng stream = rng.fork(static_cast<std::uint64_t>(tr));
    for (Index i = 0; i < n; ++i) pool[i] = i;
    Complex acc(0.0, 0.0);
    for (Index t = 0; t < m_ones; ++t) {
      Index r = t + static_cast<Index>(stream.below(n - t));
      std::swap(pool[t], pool[r]);
      acc += v[pool[t]];
    }
    xs.push_back(acc);
  }
  res.detail = levy_of_samples(xs, delta);
  res.estimate = res.detail.l_value;
  double gm = res.gamma * m_ones;
  res.bound = kSliceCFit *
              (1.0 / std::sqrt(gm) + std::exp(-res.gamma * res.gamma * m_ones / kSliceCFit));
  res.pass = res.estimate <= res.bound;
  return res;
}

ProjectionAnticonc projection_anticonc(const BinaryMatrix& b_prev, Complex z,
                                       Index r, Index t1_size, Index fixed_sum,
                                       std::int64_t trials, Rng rng,
                                       double threshold_override,
                                       double eps_model) {
  require(b_prev.rows() == b_prev.cols(), "projection_anticonc: square input");
  const Index t_prev = b_prev.rows();
  require(r >= 1 && r <= t_prev, "projection_anticonc: window out of range");
  require(t1_size >= 1 && t1_size <= t_prev,
          "projection_anticonc: T1 size out of range");
  require(fixed_sum >= 0 && fixed_sum <= t1_size,
          "projection_anticonc: bad fixed sum");
  ProjectionAnticonc out;
  out.trials = trials;

  // bottom-r right-singular subspace of B^dag - conj(z) I = bottom-r left
  // subspace of B - z I
  MatrixXcd mz = shifted_dense(b_prev, z);
  Eigen::BDCSVD<MatrixXcd> svd(mz, Eigen::ComputeFullU);
  const auto& sig = svd.singularValues();
  Index trigger_idx = t_prev - r / 2;  // 1-based
  out.trigger_sigma = sig[trigger_idx - 1];
  out.threshold = threshold_override;
  out.applicable = out.trigger_sigma <= out.threshold;
  if (!out.applicable) return out;

  MatrixXcd bottom = svd.matrixU().rightCols(r);
  std::vector<Index> pool(t1_size);
  std::int64_t hits = 0;
  for (std::int64_t tr = 0; tr < trials; ++tr) {
    Rng stream = rng.fork("resample").fork(static_cast<std::uint64_t>(tr));
    for (Index i = 0; i < t1_size; ++i) pool[i] = i;
    VectorXcd col = VectorXcd::Zero(t_prev);
    for (Index t = 0; t < fixed_sum; ++t) {
      Index pick = t + static_cast<Index>(stream.below(t1_size - t));
      std::swap(pool[t], pool[pick]);
      col[pool[t]] = Complex(1.0, 0.0);
    }
    double norm2 = (bottom.adjoint() * col).squaredNorm();
    if (std::sqrt(norm2) < out.threshold) ++hits;
  }
  out.frequency = static_cast<double>(hits) / trials;
  out.bound = kProjectionCFit * std::pow(std::log(1.0 / eps_model), -0.25);
  out.pass = out.frequency <= out.bound;
  return out;
}

}  // namespace spectra
