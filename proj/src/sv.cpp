#include "spectra/sv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "spectra/errors.hpp"

namespace spectra {

MatrixXcd shifted_dense(const BinaryMatrix& base, Complex z) {
  MatrixXcd m = MatrixXcd::Zero(base.rows(), base.cols());
  for (auto [i, j] : base.entries()) m(i, j) = Complex(1.0, 0.0);
  Index diag = std::min(base.rows(), base.cols());
  for (Index i = 0; i < diag; ++i) m(i, i) -= z;
  return m;
}

MatrixXcd ShiftedMatrix::dense() const { return shifted_dense(base, z); }

Index dense_cap() {
  if (const char* s = std::getenv("SPARSE_SPECTRA_DENSE_CAP")) {
    long v = std::atol(s);
    if (v > 0) return static_cast<Index>(v);
  }
  return 4096;
}

SingularSpectrum singular_spectrum(const MatrixXcd& m, bool want_vectors) {
  Index cap = dense_cap();
  if (m.rows() > cap || m.cols() > cap)
    throw resource_limit("singular_spectrum: dimension above dense cap");
  SingularSpectrum spec;
  spec.rows = static_cast<Index>(m.rows());
  spec.cols = static_cast<Index>(m.cols());
  unsigned opts = want_vectors ? Eigen::ComputeFullV : 0;
  Eigen::BDCSVD<MatrixXcd> svd(m, opts);
  spec.values = svd.singularValues();
  if (want_vectors) spec.vectors = svd.matrixV();
  double top = spec.values.size() > 0 ? spec.values[0] : 0.0;
  spec.residual_bound = 1e-11 * (top + 1.0);
  return spec;
}

SingularSpectrum singular_spectrum(const ShiftedMatrix& m, bool want_vectors) {
  return singular_spectrum(m.dense(), want_vectors);
}

namespace {

struct SecularPole {
  double p;  // squared singular value
  double w;  // total weight attached
};

// roots of 1 + sum_k w_k / (p_k - x) = 0 between consecutive poles and above
// the top pole; poles ascending on input
std::vector<double> solve_secular(std::vector<SecularPole> poles,
                                  double top_bracket) {
  auto f = [&](double x) {
    double acc = 1.0;
    for (const auto& pk : poles) acc += pk.w / (pk.p - x);
    return acc;
  };
  std::vector<double> roots;
  auto bisect = [&](double lo, double hi) {
    // f(lo^+) = -inf side, f(hi^-) = +inf side within (pole, pole) brackets
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (f(mid) <= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  for (size_t k = 0; k + 1 < poles.size(); ++k)
    roots.push_back(bisect(poles[k].p, poles[k + 1].p));
  if (!poles.empty()) roots.push_back(bisect(poles.back().p, top_bracket));
  return roots;
}

}  // namespace

SingularSpectrum secular_append_row(const SingularSpectrum& spec,
                                    const VectorXcd& x_row) {
  require(spec.has_vectors(),
          "secular_append_row: right-singular vectors required");
  const Index m = spec.cols;
  require(static_cast<Index>(x_row.size()) == m,
          "secular_append_row: row length mismatch");
  require(static_cast<Index>(spec.vectors.cols()) == m,
          "secular_append_row: basis must span C^cols");

  // w_i = |<v_i, X*>|^2 = |X v_i|^2
  VectorXcd overlap = spec.vectors.transpose() * x_row;
  double xnorm2 = x_row.squaredNorm();
  double p_top = spec.sigma_ext(0) * spec.sigma_ext(0);
  double scale = p_top + xnorm2;

  // deflation: group coincident poles, peel off zero-weight copies
  std::vector<std::pair<double, double>> pw(m);  // (pole, weight)
  for (Index i = 0; i < m; ++i) {
    double s = spec.sigma_ext(i);
    pw[i] = {s * s, std::norm(overlap[i])};
  }
  std::sort(pw.begin(), pw.end());
  const double pole_tol = 1e-13 * (scale + 1e-300);
  const double weight_tol = 1e-28 * (scale + 1e-300);
  std::vector<double> deflated;
  std::vector<SecularPole> active;
  size_t i = 0;
  while (i < pw.size()) {
    size_t j = i;
    double wsum = 0.0;
    while (j < pw.size() && pw[j].first - pw[i].first <= pole_tol) {
      wsum += pw[j].second;
      ++j;
    }
    // multiplicity q leaves q-1 roots pinned at the pole; one live root
    // carries the grouped weight
    for (size_t t = i + 1; t < j; ++t) deflated.push_back(pw[i].first);
    if (wsum <= weight_tol) {
      deflated.push_back(pw[i].first);
    } else {
      active.push_back({pw[i].first, wsum});
    }
    i = j;
  }
  std::vector<double> roots =
      solve_secular(std::move(active), p_top + xnorm2 + weight_tol + 1e-300);
  roots.insert(roots.end(), deflated.begin(), deflated.end());
  if (static_cast<Index>(roots.size()) != m)
    throw tolerance_not_met("secular_append_row: root count mismatch");
  std::sort(roots.begin(), roots.end(), std::greater<double>());

  SingularSpectrum out;
  out.rows = spec.rows + 1;
  out.cols = m;
  Index nvals = std::min(out.rows, out.cols);
  out.values.resize(nvals);
  for (Index k = 0; k < nvals; ++k)
    out.values[k] = std::sqrt(std::max(0.0, roots[k]));
  out.residual_bound = 1e-11 * (out.values.size() ? out.values[0] + 1.0 : 1.0);
  return out;
}

double secular_residual(const SingularSpectrum& spec, const VectorXcd& x_row,
                        double root_squared) {
  const Index m = spec.cols;
  VectorXcd overlap = spec.vectors.transpose() * x_row;
  // normalized form: prod_i (p_i - t) * (1 + sum w/(p-t)) with the product
  // evaluated against the leading scale to stay in range
  double scale = spec.sigma_ext(0) * spec.sigma_ext(0) + x_row.squaredNorm() + 1.0;
  double log_prod = 0.0;
  double sign = 1.0;
  double rational = 1.0;
  for (Index i = 0; i < m; ++i) {
    double p = spec.sigma_ext(i) * spec.sigma_ext(i);
    double diff = p - root_squared;
    if (std::abs(diff) < 1e-300) diff = 1e-300;
    log_prod += std::log(std::abs(diff) / scale);
    sign *= diff > 0 ? 1.0 : -1.0;
    rational += std::norm(overlap[i]) / diff;
  }
  return sign * std::exp(log_prod) * rational;
}

WindowInequality window_product_inequality(const MatrixXcd& m,
                                           const VectorXcd& x_row, Index k,
                                           Index l) {
  const Index cols = static_cast<Index>(m.cols());
  require(m.rows() <= m.cols(), "window_product_inequality: need rows <= cols");
  require(static_cast<Index>(x_row.size()) == cols,
          "window_product_inequality: row length mismatch");
  require(1 <= k - 1 && k - 1 <= l && l < cols,
          "window_product_inequality: need 1 <= k-1 <= l < cols");

  SingularSpectrum sm = singular_spectrum(m, true);
  MatrixXcd mp(m.rows() + 1, cols);
  mp.topRows(m.rows()) = m;
  mp.row(m.rows()) = x_row.transpose();
  SingularSpectrum smp = singular_spectrum(mp, false);

  WindowInequality out;
  double log_lhs = 0.0;
  for (Index i = k; i <= l + 1; ++i)
    log_lhs += std::log(std::max(smp.sigma_ext(i - 1), 1e-300));
  double log_prod_rhs = 0.0;
  for (Index i = k - 1; i <= l; ++i)
    log_prod_rhs += std::log(std::max(sm.sigma_ext(i - 1), 1e-300));
  // P projects onto the cols - l smallest right-singular directions
  double pnorm2 = 0.0;
  VectorXcd overlap = sm.vectors.transpose() * x_row;
  for (Index i = l; i < cols; ++i) pnorm2 += std::norm(overlap[i]);
  double sk1 = sm.sigma_ext(k - 2);
  double log_rhs = 0.5 * std::log(std::max(pnorm2, 1e-300)) -
                   0.5 * std::log(x_row.squaredNorm() + sk1 * sk1 + 1e-300) +
                   log_prod_rhs;
  out.log_lhs = log_lhs;
  out.log_rhs = pnorm2 == 0.0 ? -std::numeric_limits<double>::infinity() : log_rhs;
  out.lhs = std::exp(log_lhs);
  out.rhs = pnorm2 == 0.0 ? 0.0 : std::exp(log_rhs);
  out.margin = out.lhs - out.rhs;
  return out;
}

Projection bottom_projection(const SingularSpectrum& spec, Index r,
                             const VectorXcd& x) {
  require(spec.has_vectors(), "bottom_projection: vectors required");
  require(r >= 0 && r <= spec.cols, "bottom_projection: r out of range");
  require(static_cast<Index>(x.size()) == spec.cols,
          "bottom_projection: vector length mismatch");
  Projection pr;
  pr.projected = VectorXcd::Zero(spec.cols);
  const auto& v = spec.vectors;
  for (Index i = spec.cols - r; i < spec.cols; ++i) {
    Complex c = v.col(i).adjoint() * x;
    pr.projected += c * v.col(i);
  }
  pr.norm = pr.projected.norm();
  return pr;
}

CirculantBound circulant_lsv(Index s, Complex z) {
  require(s >= 1, "circulant_lsv: s must be >= 1");
  std::vector<Entry> e;
  for (Index i = 0; i < s; ++i) e.emplace_back(i, (i + s - 1) % s);  // i = j+1 mod s
  BinaryMatrix y(s, s, std::move(e));
  MatrixXcd m = shifted_dense(y, z);
  SingularSpectrum spec = singular_spectrum(m, false);
  CirculantBound out;
  double zs1 = std::abs(std::pow(z, static_cast<double>(s)) - Complex(1.0, 0.0));
  out.bound = zs1 / std::pow(std::abs(z) + 1.0, static_cast<double>(s - 1));
  out.exact = spec.values[s - 1];
  double det2 = 1.0;
  for (Index i = 0; i < s; ++i) det2 *= spec.values[i] * spec.values[i];
  out.det_identity_error =
      std::abs(det2 - zs1 * zs1) / std::max(zs1 * zs1, 1e-12);
  return out;
}

NormInequalityReport norm_inequality_suite(const MatrixXcd& m,
                                           const VectorXcd& x_row,
                                           const MatrixXcd& b) {
  require(m.rows() == b.rows() && m.cols() == b.cols(),
          "norm_inequality_suite: shape mismatch for Weyl");
  NormInequalityReport rep;
  SingularSpectrum sm = singular_spectrum(m, false);
  MatrixXcd mp(m.rows() + 1, m.cols());
  mp.topRows(m.rows()) = m;
  mp.row(m.rows()) = x_row.transpose();
  SingularSpectrum smp = singular_spectrum(mp, false);
  SingularSpectrum sb = singular_spectrum(b, false);

  // interlacing chain: sigma_{i+1}(M') <= sigma_i(M) <= sigma_i(M')
  double worst = 0.0;
  Index nm = static_cast<Index>(std::min(m.rows(), m.cols()));
  for (Index i = 0; i < nm; ++i) {
    worst = std::min(worst, smp.sigma_ext(i) - sm.sigma_ext(i));
    worst = std::min(worst, sm.sigma_ext(i) - smp.sigma_ext(i + 1));
  }
  rep.interlacing_worst = worst;
  rep.interlacing_ok = worst >= -1e-9 * (sm.sigma_ext(0) + 1.0);

  double opdiff = (m - b).operatorNorm();
  double wworst = 0.0;
  for (Index i = 0; i < nm; ++i)
    wworst = std::max(wworst,
                      std::abs(sm.sigma_ext(i) - sb.sigma_ext(i)) - opdiff);
  rep.weyl_worst = wworst;
  rep.weyl_ok = wworst <= 1e-9 * (sm.sigma_ext(0) + sb.sigma_ext(0) + 1.0);

  double col1 = 0.0, row1 = 0.0;
  for (Index j = 0; j < m.cols(); ++j)
    col1 = std::max(col1, m.col(j).cwiseAbs().sum());
  for (Index i = 0; i < m.rows(); ++i)
    row1 = std::max(row1, m.row(i).cwiseAbs().sum());
  double schur_bound = std::sqrt(col1 * row1);
  rep.schur_slack = schur_bound - sm.sigma_ext(0);
  rep.schur_ok = rep.schur_slack >= -1e-9 * (schur_bound + 1.0);
  return rep;
}

Rearrangement rearrangement(const VectorXcd& v) {
  Rearrangement r;
  const Index n = static_cast<Index>(v.size());
  r.permutation.resize(n);
  std::iota(r.permutation.begin(), r.permutation.end(), 0);
  std::sort(r.permutation.begin(), r.permutation.end(), [&](Index a, Index b) {
    double ma = std::abs(v[a]), mb = std::abs(v[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  r.moduli.resize(n);
  for (Index k = 0; k < n; ++k) r.moduli[k] = std::abs(v[r.permutation[k]]);
  return r;
}

LevelSet largest_level_set(const VectorXcd& v, double delta) {
  const Index n = static_cast<Index>(v.size());
  LevelSet best;
  std::vector<Complex> centers(v.data(), v.data() + n);
  centers.push_back(Complex(0.0, 0.0));
  for (const Complex& theta : centers) {
    Index c1 = 0, c2 = 0;
    for (Index i = 0; i < n; ++i) {
      double dist = std::abs(v[i] - theta);
      if (dist <= delta) ++c1;
      if (dist <= 2.0 * delta) ++c2;
    }
    if (c1 > best.count_delta) {
      best.count_delta = c1;
      best.theta = theta;
    }
    best.count_2delta = std::max(best.count_2delta, c2);
  }
  return best;
}

SpreadnessReport spreadness_probe(const ShiftedMatrix& m, double near_kernel_tol,
                                  double d, SpreadnessConstants constants) {
  SpreadnessReport rep;
  rep.constants = constants;
  SingularSpectrum spec = singular_spectrum(m, true);
  double smin = spec.values[spec.values.size() - 1];
  Index nvals = static_cast<Index>(spec.values.size());
  // a wide matrix has kernel directions regardless of its smallest listed
  // value
  bool wide = m.cols() > m.rows();
  if (!wide && smin > near_kernel_tol) return rep;
  rep.has_vector = true;
  rep.sigma_min = wide ? 0.0 : smin;
  VectorXcd v = spec.vectors.col(spec.cols - 1);
  MatrixXcd dense = m.dense();
  rep.residual = (dense * v).norm();

  const double n = static_cast<double>(m.cols());
  auto r = rearrangement(v);
  double c_small = constants.small_c_scale * std::exp(-d);
  std::vector<Index> ks{1, std::max<Index>(1, static_cast<Index>(0.01 * n)),
                        std::max<Index>(1, static_cast<Index>(c_small * n)),
                        std::max<Index>(1, static_cast<Index>(0.25 * n))};
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  for (Index k : ks) {
    rep.vstar_ks.push_back(k);
    rep.vstar.push_back(r.star(k));
  }
  double logn = std::log(n);
  rep.level_delta = std::exp(-constants.c_prime * std::pow(logn, 7.0)) / std::sqrt(n);
  rep.level_set = largest_level_set(v, rep.level_delta);

  // zero in-degree rows force small coordinates: |v_i| summed over zero rows
  // is bounded by ||(M - zI)v|| / |z|
  Index zero_rows = 0;
  for (Index i = 0; i < m.rows(); ++i)
    if (m.base.row_sum(i) == 0) ++zero_rows;
  rep.zero_row_count = zero_rows;
  double az = std::abs(m.z);
  if (az > 0.0 && zero_rows >= static_cast<Index>(std::exp(-d) * n / 2.0)) {
    rep.zero_rows_applicable = true;
    double theta = rep.residual / az;
    rep.small_coord_threshold = 2.0 * std::exp(d / 2.0) * theta / std::sqrt(n);
    rep.small_coord_required = static_cast<Index>(std::exp(-d) * n / 4.0);
    for (Index i = 0; i < m.cols(); ++i)
      if (std::abs(v[i]) <= rep.small_coord_threshold) ++rep.small_coord_count;
    rep.zero_row_bound_holds = rep.small_coord_count >= rep.small_coord_required;
  }
  (void)nvals;
  return rep;
}

BalancedBasis balanced_basis(const MatrixXcd& v, int retries, Rng rng) {
  const Index n = static_cast<Index>(v.rows());
  const Index k = static_cast<Index>(v.cols());
  require(k >= 1, "balanced_basis: empty basis");
  MatrixXcd gram = v.adjoint() * v;
  require((gram - MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff() < 1e-10,
          "balanced_basis: input not orthonormal");
  Index probe = (k + 9) / 10;  // ceil(k/10)
  auto diag_of = [&](const MatrixXcd& b) {
    double worst = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < k; ++j) {
      auto r = rearrangement(b.col(j));
      worst = std::min(worst, r.star(probe) * n / std::sqrt(static_cast<double>(k)));
    }
    return worst;
  };
  BalancedBasis best;
  best.basis = v;
  best.diagnostic = diag_of(v);
  for (int t = 0; t < retries; ++t) {
    Rng draw = rng.fork(static_cast<std::uint64_t>(t));
    MatrixXcd g(k, k);
    for (Index a = 0; a < k; ++a)
      for (Index b = 0; b < k; ++b) g(a, b) = Complex(draw.normal(), draw.normal());
    Eigen::HouseholderQR<MatrixXcd> qr(g);
    MatrixXcd q = qr.householderQ() * MatrixXcd::Identity(k, k);
    MatrixXcd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index a = 0; a < k; ++a) {
      Complex ra = rmat(a, a);
      if (std::abs(ra) > 0) q.col(a) *= ra / std::abs(ra);  // Haar phase fix
    }
    MatrixXcd cand = v * q;
    double dg = diag_of(cand);
    if (dg > best.diagnostic) {
      best.diagnostic = dg;
      best.basis = cand;
    }
  }
  return best;
}

IterationBound iteration_bound(Index n, Index k, double d) {
  require(k >= 1 && k <= n, "iteration_bound: need 1 <= k <= n");
  IterationBound out;
  double nn = static_cast<double>(n);
  auto g = [&](double x) {
    double lg = std::log(nn / x);
    double alpha = 1.0 / (lg * lg);
    return std::ceil(alpha * x / (32768.0 * (d + lg)));
  };
  double cur = static_cast<double>(k);
  while (cur < nn / 2.0) {
    cur += g(cur);
    ++out.steps;
  }
  double lk = std::log(nn / static_cast<double>(k));
  out.bound = 131072.0 * d * lk * lk * lk * lk;
  out.within_bound = k >= (n + 1) / 2 ? out.steps == 0
                                      : static_cast<double>(out.steps) <= out.bound;
  return out;
}

double spectral_norm_estimate(const MatrixXcd& m, int iters) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  VectorXcd v = VectorXcd::Ones(m.cols());
  v.normalize();
  double est = 0.0;
  for (int t = 0; t < iters; ++t) {
    VectorXcd w = m.adjoint() * (m * v);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    est = std::sqrt(nw);
    v = w / nw;
  }
  return est;
}

}  // namespace spectra
