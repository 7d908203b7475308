#include "spectra/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spectra/errors.hpp"
#include "spectra/graph.hpp"
#include "spectra/model.hpp"

namespace spectra {

EmpiricalMeasure EmpiricalMeasure::real(std::vector<double> xs) {
  EmpiricalMeasure e;
  e.dim = Dim::kReal;
  e.points.reserve(xs.size());
  for (double x : xs) e.points.emplace_back(x, 0.0);
  return e;
}

EmpiricalMeasure EmpiricalMeasure::complex_points(std::vector<Complex> zs) {
  EmpiricalMeasure e;
  e.dim = Dim::kComplex;
  e.points = std::move(zs);
  return e;
}

EmpiricalMeasure eigen_spectrum(const BinaryMatrix& m) {
  require(m.rows() == m.cols(), "eigen_spectrum: matrix must be square");
  const Index n = m.rows();
  if (n > dense_cap())
    throw resource_limit("eigen_spectrum: dimension above dense cap");
  Digraph g(m);
  auto scc = scc_structure(g);
  std::vector<Complex> eigs;
  eigs.reserve(n);
  for (size_t c = 0; c < scc.members.size(); ++c) {
    const auto& mem = scc.members[c];
    if (mem.size() == 1) {
      eigs.emplace_back(m.at(mem[0], mem[0]) ? 1.0 : 0.0, 0.0);
      continue;
    }
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(mem.size(), mem.size());
    for (size_t a = 0; a < mem.size(); ++a) {
      const Index* p = m.row_begin(mem[a]);
      const Index* e = m.row_end(mem[a]);
      for (size_t b = 0; b < mem.size(); ++b) {
        if (std::binary_search(p, e, mem[b])) blk(a, b) = 1.0;
      }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(blk, false);
    for (Index i = 0; i < static_cast<Index>(mem.size()); ++i)
      eigs.push_back(es.eigenvalues()(i));
  }
  return EmpiricalMeasure::complex_points(std::move(eigs));
}

LogPotential log_potential(const BinaryMatrix& m, Complex z) {
  require(m.rows() == m.cols(), "log_potential: matrix must be square");
  const Index n = m.rows();
  MatrixXcd mz = shifted_dense(m, z);
  SingularSpectrum spec = singular_spectrum(mz, false);
  LogPotential lp;
  double top = spec.values[0];
  double smin = spec.values[n - 1];
  if (smin <= 1e-12 * std::max(1.0, top)) {
    lp.singular = true;
    lp.value = std::numeric_limits<double>::infinity();
    lp.det_form = std::numeric_limits<double>::infinity();
    return lp;
  }
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) acc += std::log(spec.values[i]);
  lp.value = -acc / n;
  Eigen::PartialPivLU<MatrixXcd> lu(mz);
  double logdet = 0.0;
  for (Index i = 0; i < n; ++i) logdet += std::log(std::abs(lu.matrixLU()(i, i)));
  lp.det_form = -logdet / n;
  return lp;
}

namespace {

// y <- M x or M^dagger x over the sparse pattern (0-1 entries)
void apply(const BinaryMatrix& m, bool transpose, const std::vector<double>& x,
           std::vector<double>& y) {
  if (!transpose) {
    y.assign(m.rows(), 0.0);
    for (Index i = 0; i < m.rows(); ++i) {
      double acc = 0.0;
      for (const Index* p = m.row_begin(i); p != m.row_end(i); ++p) acc += x[*p];
      y[i] = acc;
    }
  } else {
    y.assign(m.cols(), 0.0);
    for (Index j = 0; j < m.cols(); ++j) {
      double acc = 0.0;
      for (const Index* p = m.col_begin(j); p != m.col_end(j); ++p) acc += x[*p];
      y[j] = acc;
    }
  }
}

}  // namespace

double trace_moment(const BinaryMatrix& m, const std::vector<int>& signs) {
  require(m.rows() == m.cols(), "trace_moment: matrix must be square");
  require(!signs.empty() && signs.size() <= 20,
          "trace_moment: need 1 <= r <= 20 factors");
  const Index n = m.rows();
  double trace = 0.0;
  std::vector<double> x(n), y;
  for (Index e = 0; e < n; ++e) {
    std::fill(x.begin(), x.end(), 0.0);
    x[e] = 1.0;
    // product applied right to left
    for (auto it = signs.rbegin(); it != signs.rend(); ++it) {
      apply(m, *it == -1, x, y);
      x.swap(y);
    }
    trace += x[e];
  }
  return trace / n;
}

namespace {

// minimal CSR complex sparse matrix for the Gram-moment computations
struct SparseC {
  Index rows = 0, cols = 0;
  std::vector<Index> ptr, idx;
  std::vector<Complex> val;
};

SparseC shifted_sparse(const BinaryMatrix& m, Complex z, bool adjoint) {
  // adjoint ? (M - zI)^dagger : (M - zI), built row-wise
  SparseC s;
  s.rows = adjoint ? m.cols() : m.rows();
  s.cols = adjoint ? m.rows() : m.cols();
  s.ptr.assign(s.rows + 1, 0);
  Index diag = std::min(m.rows(), m.cols());
  std::vector<std::pair<Index, Complex>> row;
  for (Index i = 0; i < s.rows; ++i) {
    row.clear();
    if (!adjoint) {
      for (const Index* p = m.row_begin(i); p != m.row_end(i); ++p)
        row.emplace_back(*p, Complex(1.0, 0.0));
    } else {
      for (const Index* p = m.col_begin(i); p != m.col_end(i); ++p)
        row.emplace_back(*p, Complex(1.0, 0.0));
    }
    if (i < diag) {
      bool found = false;
      for (auto& [j, v] : row)
        if (j == i) {
          v -= adjoint ? std::conj(z) : z;
          found = true;
        }
      if (!found) row.emplace_back(i, adjoint ? -std::conj(z) : -z);
    }
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [j, v] : row) {
      s.idx.push_back(j);
      s.val.push_back(v);
    }
    s.ptr[i + 1] = static_cast<Index>(s.idx.size());
  }
  return s;
}

SparseC multiply(const SparseC& a, const SparseC& b) {
  SparseC c;
  c.rows = a.rows;
  c.cols = b.cols;
  c.ptr.assign(c.rows + 1, 0);
  std::vector<Complex> acc(b.cols, Complex(0, 0));
  std::vector<Index> touched;
  for (Index i = 0; i < a.rows; ++i) {
    touched.clear();
    for (Index t = a.ptr[i]; t < a.ptr[i + 1]; ++t) {
      Index k = a.idx[t];
      Complex av = a.val[t];
      for (Index u = b.ptr[k]; u < b.ptr[k + 1]; ++u) {
        Index j = b.idx[u];
        if (acc[j] == Complex(0, 0)) touched.push_back(j);
        acc[j] += av * b.val[u];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index j : touched) {
      c.idx.push_back(j);
      c.val.push_back(acc[j]);
      acc[j] = Complex(0, 0);
    }
    c.ptr[i + 1] = static_cast<Index>(c.idx.size());
  }
  return c;
}

double trace_of(const SparseC& a) {
  double tr = 0.0;
  for (Index i = 0; i < a.rows; ++i)
    for (Index t = a.ptr[i]; t < a.ptr[i + 1]; ++t)
      if (a.idx[t] == i) tr += a.val[t].real();
  return tr;
}

double frob2(const SparseC& a) {
  double acc = 0.0;
  for (const Complex& v : a.val) acc += std::norm(v);
  return acc;
}

// <A, B>_F = sum_ij A_ij conj(B_ij); both Hermitian here so the result is
// real up to rounding
double pair_frob(const SparseC& a, const SparseC& b) {
  double acc = 0.0;
  for (Index i = 0; i < a.rows; ++i) {
    Index ta = a.ptr[i], tb = b.ptr[i];
    while (ta < a.ptr[i + 1] && tb < b.ptr[i + 1]) {
      if (a.idx[ta] < b.idx[tb]) {
        ++ta;
      } else if (a.idx[ta] > b.idx[tb]) {
        ++tb;
      } else {
        acc += (a.val[ta] * std::conj(b.val[tb])).real();
        ++ta;
        ++tb;
      }
    }
  }
  return acc;
}

}  // namespace

std::vector<double> shifted_gram_moments(const BinaryMatrix& m, Complex z,
                                         int r_max) {
  require(r_max >= 1 && r_max <= 8, "shifted_gram_moments: need 1 <= r <= 8");
  const Index n = m.rows();
  SparseC mz = shifted_sparse(m, z, false);
  SparseC mzh = shifted_sparse(m, z, true);
  SparseC g = multiply(mzh, mz);  // Gram, Hermitian
  // powers g^k for k <= ceil(r_max/2); Tr(G^(a+b)) = <G^a, G^b>_F
  std::vector<SparseC> pow;
  pow.push_back(std::move(g));
  int half = (r_max + 1) / 2;
  for (int k = 1; k < half; ++k) pow.push_back(multiply(pow.back(), pow[0]));
  std::vector<double> out(r_max);
  for (int r = 1; r <= r_max; ++r) {
    double tr;
    if (r == 1) {
      tr = trace_of(pow[0]);
    } else if (r % 2 == 0) {
      tr = frob2(pow[r / 2 - 1]);
    } else {
      tr = pair_frob(pow[r / 2], pow[r / 2 - 1]);
    }
    out[r - 1] = tr / n;
  }
  return out;
}

RotationalReport rotational_probe(Index n, double d, Complex z, int r_max,
                                  int trials, std::uint64_t seed) {
  require(trials >= 2, "rotational_probe: need at least 2 trials");
  RotationalReport rep;
  rep.trials = trials;
  Complex zr(std::abs(z), 0.0);
  std::vector<std::vector<double>> diffs(r_max);
  for (int t = 0; t < trials; ++t) {
    ModelParams p;
    p.n = n;
    p.d = d;
    p.seed = Rng(seed).fork("rotational").fork(t).next();
    BinaryMatrix b = sample_iid(p);
    auto mz = shifted_gram_moments(b, z, r_max);
    auto mr = shifted_gram_moments(b, zr, r_max);
    for (int r = 0; r < r_max; ++r) diffs[r].push_back(mz[r] - mr[r]);
  }
  rep.within_band = true;
  rep.within_band_lemma_range = true;
  rep.lemma_r_max = std::max(
      1, static_cast<int>(std::log(std::log(static_cast<double>(n)))));
  for (int r = 0; r < r_max; ++r) {
    double mean = std::accumulate(diffs[r].begin(), diffs[r].end(), 0.0) / trials;
    double var = 0.0;
    for (double x : diffs[r]) var += (x - mean) * (x - mean);
    var /= (trials - 1);
    double se = std::sqrt(var / trials);
    double band = 10.0 * std::pow(static_cast<double>(n), -1.0 / 3.0);
    rep.mean_diff.push_back(mean);
    rep.std_err.push_back(se);
    rep.band.push_back(band);
    if (std::abs(mean) > band + 3.0 * se) {
      rep.within_band = false;
      if (r + 1 <= rep.lemma_r_max) rep.within_band_lemma_range = false;
    }
  }
  return rep;
}

namespace {

double mean_log_dist(const std::vector<Complex>& eigs, Complex z) {
  double acc = 0.0;
  for (const Complex& l : eigs) {
    double d = std::abs(l - z);
    acc += d > 0.0 ? std::log(d) : -746.0;  // log of denormal floor
  }
  return acc / eigs.size();
}

}  // namespace

SublevelArea sublevel_area(const EmpiricalMeasure& eigs, double tau, Index grid,
                           double radius, Rng rng,
                           std::int64_t samples_per_center) {
  require(grid >= 64, "sublevel_area: grid must be >= 64");
  require(tau > 0.0, "sublevel_area: tau must be positive");
  SublevelArea out;
  out.tau = tau;
  const auto& pts = eigs.points;
  require(!pts.empty(), "sublevel_area: empty measure");

  // uniform grid over the enclosing square, counting cells inside the disk
  double cell = 2.0 * radius / grid;
  double grid_area = 0.0;
  std::vector<bool> counted(static_cast<size_t>(grid) * grid, false);
  for (Index a = 0; a < grid; ++a) {
    for (Index b = 0; b < grid; ++b) {
      Complex zc(-radius + (a + 0.5) * cell, -radius + (b + 0.5) * cell);
      if (std::abs(zc) > radius) continue;
      if (mean_log_dist(pts, zc) <= -tau) {
        grid_area += cell * cell;
        counted[static_cast<size_t>(a) * grid + b] = true;
        ++out.grid_hits;
      }
    }
  }
  auto in_counted_cell = [&](Complex zc) {
    Index a = static_cast<Index>(std::floor((zc.real() + radius) / cell));
    Index b = static_cast<Index>(std::floor((zc.imag() + radius) / cell));
    if (a < 0 || a >= grid || b < 0 || b >= grid) return false;
    return static_cast<bool>(counted[static_cast<size_t>(a) * grid + b]);
  };

  // importance stratum: log-radial samples around cluster centers catch the
  // exponentially small disks the grid misses; Voronoi assignment to the
  // nearest center keeps the strata disjoint
  std::vector<Complex> centers;
  {
    std::vector<Complex> sorted(pts);
    std::sort(sorted.begin(), sorted.end(), [](const Complex& x, const Complex& y) {
      if (x.real() != y.real()) return x.real() < y.real();
      return x.imag() < y.imag();
    });
    const double merge_tol = 1e-9;
    for (const Complex& p : sorted) {
      if (centers.empty() || std::abs(centers.back() - p) > merge_tol)
        centers.push_back(p);
    }
  }
  auto nearest_center = [&](Complex zc) {
    size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < centers.size(); ++k) {
      double d = std::abs(zc - centers[k]);
      if (d < bd) {
        bd = d;
        best = k;
      }
    }
    return best;
  };
  double imp_area = 0.0;
  const double r_floor = 1e-280;
  for (size_t ci = 0; ci < centers.size(); ++ci) {
    const Complex c = centers[ci];
    if (std::abs(c) > radius + cell) continue;
    // locate the boundary scale r* along one ray by bisection in log r,
    // then sample a log-radial window around it
    auto below = [&](double r) {
      return mean_log_dist(pts, c + Complex(r, 0.0)) <= -tau;
    };
    if (!below(r_floor)) continue;  // no sublevel mass at this center
    double lo = std::log(r_floor), hi = std::log(cell);
    if (below(cell)) {
      lo = hi;  // whole sub-cell neighborhood qualifies
    } else {
      for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        (below(std::exp(mid)) ? lo : hi) = mid;
      }
    }
    // truncating the window at r* e^{-12} discards a relative e^{-24} of
    // the disk area
    double window_lo = std::max(std::log(r_floor), lo - 12.0);
    double window_hi = std::log(cell);
    double span = window_hi - window_lo;
    if (span <= 0.0) continue;
    Rng stream = rng.fork("sublevel").fork(static_cast<std::uint64_t>(ci));
    double local = 0.0;
    for (std::int64_t s = 0; s < samples_per_center; ++s) {
      double lr = window_lo + span * stream.uniform();
      double r = std::exp(lr);
      double th = 6.283185307179586 * stream.uniform();
      Complex zc = c + Complex(r * std::cos(th), r * std::sin(th));
      if (std::abs(zc) > radius) continue;
      if (std::abs(zc - c) >= cell) continue;  // grid scale
      if (in_counted_cell(zc)) continue;       // already measured
      if (nearest_center(zc) != ci) continue;  // another stratum
      if (mean_log_dist(pts, zc) > -tau) continue;
      // density of this center's stream at zc: 1/(2 pi r^2 span)
      local += 2.0 * 3.141592653589793 * r * r * span;
    }
    imp_area += local / samples_per_center;
  }
  out.area = grid_area + imp_area;
  out.log_area = out.area > 0.0 ? std::log(out.area)
                                : -std::numeric_limits<double>::infinity();
  return out;
}

double measure_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  require(a.dim == b.dim, "measure_distance: dimension tags differ");
  require(!a.points.empty() && !b.points.empty(),
          "measure_distance: empty measure");
  if (a.dim == EmpiricalMeasure::Dim::kReal) {
    std::vector<double> xs, ys;
    xs.reserve(a.points.size());
    ys.reserve(b.points.size());
    for (const Complex& p : a.points) xs.push_back(p.real());
    for (const Complex& p : b.points) ys.push_back(p.real());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    // Kolmogorov distance of the two step CDFs
    double dist = 0.0;
    size_t i = 0, j = 0;
    while (i < xs.size() || j < ys.size()) {
      double t;
      if (j >= ys.size() || (i < xs.size() && xs[i] <= ys[j]))
        t = xs[i];
      else
        t = ys[j];
      while (i < xs.size() && xs[i] <= t) ++i;
      while (j < ys.size() && ys[j] <= t) ++j;
      dist = std::max(dist, std::abs(static_cast<double>(i) / xs.size() -
                                     static_cast<double>(j) / ys.size()));
    }
    return dist;
  }
  // 2D: fixed dictionary of Gaussian bumps on an 8x8 grid scaled to the
  // support of both measures
  double radius = 0.0;
  for (const Complex& p : a.points) radius = std::max(radius, std::abs(p));
  for (const Complex& p : b.points) radius = std::max(radius, std::abs(p));
  radius = std::max(radius, 1e-9);
  double spacing = 2.0 * radius / 7.0;
  double s2 = 2.0 * (0.75 * spacing) * (0.75 * spacing);
  double worst = 0.0;
  for (int gx = 0; gx < 8; ++gx) {
    for (int gy = 0; gy < 8; ++gy) {
      Complex c(-radius + gx * spacing, -radius + gy * spacing);
      double ia = 0.0, ib = 0.0;
      for (const Complex& p : a.points) ia += std::exp(-std::norm(p - c) / s2);
      for (const Complex& p : b.points) ib += std::exp(-std::norm(p - c) / s2);
      worst = std::max(worst, std::abs(ia / a.points.size() - ib / b.points.size()));
    }
  }
  return worst;
}

NonatomicStat nonatomic_stat(const BinaryMatrix& m, Complex z, double gamma,
                             double tau) {
  require(gamma > 0.0 && gamma < 0.5, "nonatomic_stat: gamma in (0, 1/2)");
  require(tau > 0.0 && tau < 0.5, "nonatomic_stat: tau in (0, 1/2)");
  require(m.rows() == m.cols(), "nonatomic_stat: matrix must be square");
  const Index n = m.rows();
  SingularSpectrum spec = singular_spectrum(ShiftedMatrix(m, z), false);
  NonatomicStat st;
  Index idx = static_cast<Index>(std::ceil((1.0 - gamma) * n));  // 1-based
  st.sigma_at_index = spec.sigma_ext(idx - 1);
  st.event = st.sigma_at_index <= tau;
  st.t_threshold = std::log(1.0 / tau);
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    double s = std::max(spec.values[i], 1e-300);
    double al = std::abs(std::log(s));
    if (al >= st.t_threshold) acc += al;
  }
  st.tail_integral = acc / n;
  return st;
}

}  // namespace spectra
