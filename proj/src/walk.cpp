#include "spectra/walk.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>

#include "spectra/errors.hpp"
#include "spectra/graph.hpp"

namespace spectra {

EpsilonR epsilon_r(Index n, Index r, double k_const) {
  require(r >= 1 && r <= n, "epsilon_r: need 1 <= r <= n");
  EpsilonR e;
  double lg = std::log(static_cast<double>(n) / r);
  e.log_value = -k_const * std::pow(lg, 9.0);
  if (e.log_value < std::log(DBL_MIN)) {
    e.value = DBL_MIN;
    e.clamped = true;
  } else {
    e.value = std::exp(e.log_value);
  }
  return e;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_eps_or_ninf(Index n, Index r, double k_const) {
  if (r < 1) return kNegInf;
  EpsilonR e = epsilon_r(n, r, k_const);
  // verification uses the clamped value exactly as the rules compared it
  return e.clamped ? std::log(DBL_MIN) : e.log_value;
}

}  // namespace

ProcessSetup build_process(const BinaryMatrix& b, const WalkParams& params,
                           std::uint64_t seed) {
  const ModelParams& mp = params.model;
  require(b.rows() == b.cols() && b.rows() == mp.n,
          "build_process: matrix does not match params");
  mp.validate();
  ProcessSetup ps;
  ps.n = mp.n;
  ps.ell = mp.ell();
  ps.eps = mp.eps();
  ps.m = mp.m();
  ps.n1 = static_cast<Index>(std::floor(mp.n * (1.0 - ps.eps)));
  const Index core = ps.n - ps.ell;  // |T1| + |T2|
  require(ps.n1 <= core, "build_process: empty T2");
  const Index t2_size = core - ps.n1;
  const Index extracted = mp.extracted();
  require(extracted <= t2_size,
          "build_process: extraction larger than T2");

  // val(j) = min(out-degree, in-degree of j within [n - ell])
  ps.val_t2.resize(t2_size);
  for (Index k = 0; k < t2_size; ++k) {
    Index j = ps.n1 + k;
    Index outd = b.col_sum_below(j, core);
    Index ind = b.row_sum_below(j, core);
    ps.val_t2[k] = std::min(outd, ind);
  }
  // H: the `extracted` largest values, ties to earlier indices
  std::vector<Index> by_val(t2_size);
  std::iota(by_val.begin(), by_val.end(), 0);
  std::stable_sort(by_val.begin(), by_val.end(), [&](Index a, Index c) {
    return ps.val_t2[a] > ps.val_t2[c];
  });
  ps.h.reserve(extracted);
  for (Index k = 0; k < extracted; ++k) ps.h.push_back(ps.n1 + by_val[k]);
  std::vector<bool> in_h(ps.n, false);
  for (Index v : ps.h) in_h[v] = true;

  // S_m = T1 union (T2 minus H), sorted; then the revelation order
  ps.order.reserve(ps.n);
  for (Index v = 0; v < core; ++v)
    if (!in_h[v]) ps.order.push_back(v);
  require(static_cast<Index>(ps.order.size()) == ps.m,
          "build_process: size bookkeeping failed");
  // first epoch: uniform over the unrevealed part of H
  Rng pick = Rng(seed).fork("reveal-order");
  std::vector<Index> pool(ps.h);
  std::sort(pool.begin(), pool.end());
  while (!pool.empty()) {
    std::uint64_t r = pick.below(pool.size());
    ps.order.push_back(pool[r]);
    pool[r] = pool.back();
    pool.pop_back();
  }
  // second epoch: the boosted tail in index order
  for (Index v = core; v < ps.n; ++v) ps.order.push_back(v);

  // degree-bad classification (degrees within B_{n-ell} and against T1)
  double lge = std::log(1.0 / ps.eps);
  double low = std::sqrt(lge), high = lge * lge;
  ps.degree_bad.assign(ps.n, false);
  for (Index v : ps.h) {
    Index out_t1 = b.col_sum_below(v, ps.n1);
    Index in_t1 = b.row_sum_below(v, ps.n1);
    Index out_tot = b.col_sum_below(v, core);
    Index in_tot = b.row_sum_below(v, core);
    ps.degree_bad[v] = std::min(out_t1, in_t1) <= low ||
                       std::max(out_tot, in_tot) >= high;
  }
  return ps;
}

namespace {

// dense B[order(0..nrows), order(0..ncols)] - z I, positions aligned by the
// shared order prefix so the diagonal pairs each vertex with itself
MatrixXcd dense_ordered(const BinaryMatrix& b, const std::vector<Index>& order,
                        Index nrows, Index ncols, Complex z,
                        std::vector<Index>& pos_scratch) {
  std::fill(pos_scratch.begin(), pos_scratch.end(), -1);
  for (Index i = 0; i < nrows; ++i) pos_scratch[order[i]] = i;
  MatrixXcd m = MatrixXcd::Zero(nrows, ncols);
  for (Index j = 0; j < ncols; ++j) {
    Index vj = order[j];
    for (const Index* p = b.col_begin(vj); p != b.col_end(vj); ++p) {
      Index pi = pos_scratch[*p];
      if (pi >= 0) m(pi, j) = Complex(1.0, 0.0);
    }
  }
  for (Index i = 0; i < std::min(nrows, ncols); ++i) m(i, i) -= z;
  return m;
}

double window_log(const VectorXd& sigma, Index dim, Index x, Index delta_m) {
  // sum_{j=x}^{x+delta_m} log sigma_{dim-j} with 1-based sigma indices
  double acc = 0.0;
  for (Index j = x; j <= x + delta_m; ++j) {
    Index idx = dim - j - 1;  // 0-based
    double s = idx >= 0 && idx < sigma.size() ? sigma[idx] : 0.0;
    acc += s > 0.0 ? std::log(s) : kNegInf;
  }
  return acc;
}

struct FlagSet {
  int g = -1, h = -1, j = -1, gp = -1;
};

}  // namespace

double estimate_tau_z(const WalkParams& params, std::uint64_t seed) {
  const ModelParams& mp = params.model;
  Rng pilot = Rng(seed).fork("tau-pilot");
  std::vector<double> samples;
  for (int run = 0; run < params.tau_pilot_runs; ++run) {
    ModelParams trial = mp;
    trial.seed = pilot.fork(static_cast<std::uint64_t>(run)).next();
    BinaryMatrix b = sample_modified(trial);
    WalkParams wp = params;
    wp.model = trial;
    ProcessSetup ps = build_process(b, wp, trial.seed);
    std::vector<Index> s_m(ps.order.begin(), ps.order.begin() + ps.m);
    std::sort(s_m.begin(), s_m.end());
    BinaryMatrix bm = b.submatrix(s_m, s_m);
    SingularSpectrum spec =
        singular_spectrum(ShiftedMatrix(bm, params.z), false);
    double e4 = std::pow(ps.eps, 4.0);
    Index idx = static_cast<Index>(std::ceil((1.0 - e4) * ps.m));  // 1-based
    samples.push_back(spec.sigma_ext(idx - 1));
  }
  std::sort(samples.begin(), samples.end());
  size_t q = static_cast<size_t>(std::floor(0.05 * (samples.size() - 1)));
  return samples[q];
}

WalkTrace run_walk(const BinaryMatrix& b, const WalkParams& params,
                   std::uint64_t seed) {
  WalkTrace tr;
  tr.params = params;
  ProcessSetup ps = build_process(b, params, seed);
  const Index n = ps.n, m = ps.m, ell = ps.ell;
  const double eps = ps.eps;
  const double d = params.model.d;
  const Complex z = params.z;
  tr.n = n;
  tr.m = m;
  tr.ell = ell;

  tr.tau_z = params.tau_z > 0.0 ? params.tau_z : estimate_tau_z(params, seed);
  tr.params.tau_z = tr.tau_z;
  double e4 = std::pow(eps, 4.0);
  double cap = 1.0 / 25.0;
  double lt = std::log(1.0 / tr.tau_z);
  double frac = lt > 0.0 ? std::min(1.0 / lt, cap) : cap;
  tr.delta_m = static_cast<Index>(std::floor(e4 * frac * m));

  Index x = m - static_cast<Index>(std::ceil((1.0 - e4) * m));
  tr.x_start = x;

  const double log_tau1 =
      std::log(8.0 * (d * std::pow(std::log(2.0 / eps), 4.0) + std::norm(z)));
  const double log_tau2 =
      std::log(8.0 * std::pow(static_cast<double>(n), 4.0) * (1.0 + std::norm(z)));
  const double hs_limit = 2.0 * d * n;
  const double epoch1_guard = std::pow(std::log(static_cast<double>(n)), 1.75);

  std::vector<Index> pos_scratch(n, -1);
  // running count of ones in B_t
  std::vector<bool> in_s(n, false);
  for (Index i = 0; i < m; ++i) in_s[ps.order[i]] = true;
  std::int64_t ones = 0;
  {
    std::vector<Index> s_m(ps.order.begin(), ps.order.begin() + m);
    std::sort(s_m.begin(), s_m.end());
    ones = b.submatrix(s_m, s_m).nnz();
  }

  auto spectrum_at = [&](Index t) {
    MatrixXcd mt = dense_ordered(b, ps.order, t, t, z, pos_scratch);
    return singular_spectrum(mt, false);
  };

  SingularSpectrum cur;
  try {
    cur = spectrum_at(m);
  } catch (const resource_limit&) {
    tr.aborted = true;
    return tr;
  }
  tr.initial_window_log = window_log(cur.values, m, x, tr.delta_m);

  double last_verified_window = tr.initial_window_log;
  double pending_rhs_factors = 0.0;

  for (Index t = m; t < n; ++t) {
    WalkStep step;
    step.t = t;
    step.x_before = x;
    step.epoch = t < n - ell ? 1 : 2;
    Index v = ps.order[t];
    step.vertex = v;
    const Index core = n - ell;
    step.deg_out_t1 = b.col_sum_below(v, ps.n1);
    step.deg_in_t1 = b.row_sum_below(v, ps.n1);
    step.deg_out_total = b.col_sum_below(v, core);
    step.deg_in_total = b.row_sum_below(v, core);

    // ones count after adding v's row and column inside S_{t+1}
    std::int64_t added = 0;
    for (const Index* p = b.col_begin(v); p != b.col_end(v); ++p)
      if (in_s[*p] || *p == v) ++added;
    for (const Index* p = b.row_begin(v); p != b.row_end(v); ++p)
      if (in_s[*p]) ++added;
    ones += added;
    in_s[v] = true;

    double log_eps_x = log_eps_or_ninf(n, x, params.k_eps);
    double eps_x_val = x >= 1 ? epsilon_r(n, x, params.k_eps).value : 0.0;
    double eps_1_val = epsilon_r(n, 1, params.k_eps).value;
    double log_eps_1 = log_eps_or_ninf(n, 1, params.k_eps);

    auto proj_col_onto_left = [&](Index r) {
      // || P_{r, B_t^dag - conj(z) I} ( (B_{t+1}^* - z I) e_{t+1} ) ||
      MatrixXcd mt = dense_ordered(b, ps.order, t, t, z, pos_scratch);
      Eigen::BDCSVD<MatrixXcd> svd(mt, Eigen::ComputeFullU);
      VectorXcd col = VectorXcd::Zero(t);
      std::fill(pos_scratch.begin(), pos_scratch.end(), -1);
      for (Index i = 0; i < t; ++i) pos_scratch[ps.order[i]] = i;
      for (const Index* p = b.col_begin(v); p != b.col_end(v); ++p)
        if (pos_scratch[*p] >= 0) col[pos_scratch[*p]] = Complex(1.0, 0.0);
      double acc = 0.0;
      for (Index i = t - r; i < t; ++i)
        acc += std::norm(svd.matrixU().col(i).dot(col));
      return std::sqrt(acc);
    };
    auto row_vector = [&]() {
      // (B_{t+1}^dag - conj(z) I_{t+1}) e_{t+1}: conjugate of v's row
      VectorXcd row = VectorXcd::Zero(t + 1);
      std::fill(pos_scratch.begin(), pos_scratch.end(), -1);
      for (Index i = 0; i < t + 1; ++i) pos_scratch[ps.order[i]] = i;
      for (const Index* p = b.row_begin(v); p != b.row_end(v); ++p)
        if (pos_scratch[*p] >= 0) row[pos_scratch[*p]] = Complex(1.0, 0.0);
      row[t] -= z;
      return row.conjugate().eval();
    };
    auto proj_row_onto_right = [&](Index r) {
      // || P_{r, B_{t+1}^* - z I_{t x (t+1)}} ( (B_{t+1}^dag - conj z I) e_{t+1} ) ||
      VectorXcd row = row_vector();
      if (r == 1) {
        // bottom right-singular direction of a t x (t+1) matrix is its
        // kernel: the last column of Q in a full QR of the adjoint
        MatrixXcd mstar = dense_ordered(b, ps.order, t, t + 1, z, pos_scratch);
        Eigen::HouseholderQR<MatrixXcd> qr(mstar.adjoint().eval());
        VectorXcd kernel = qr.householderQ() * VectorXcd::Unit(t + 1, t);
        return std::abs(kernel.dot(row));
      }
      MatrixXcd mstar = dense_ordered(b, ps.order, t, t + 1, z, pos_scratch);
      Eigen::BDCSVD<MatrixXcd> svd(mstar, Eigen::ComputeFullV);
      double acc = 0.0;
      for (Index i = t + 1 - r; i < t + 1; ++i)
        acc += std::norm(svd.matrixV().col(i).dot(row));
      return std::sqrt(acc);
    };

    // reads against a possibly stale spectrum (stride > 1) index from the
    // bottom; interlacing keeps the stale value a lower bound
    auto sigma_from_bottom = [&](Index c) {
      Index avail = static_cast<Index>(cur.values.size());
      Index idx = avail - 1 - c;
      return idx >= 0 ? cur.values[idx] : cur.values[0];
    };

    Index x_next;
    double step_rhs_factor;  // log of the per-step product-rule factor
    if (step.epoch == 1) {
      bool up;
      if (16 * x <= (core - t) || static_cast<double>(ones) >= hs_limit ||
          static_cast<double>(t) >= core - epoch1_guard) {
        step.rule = 1;
        up = true;
      } else if (sigma_from_bottom(x / 2) >= eps_x_val) {
        step.rule = 2;
        up = false;
      } else if (ps.degree_bad[v]) {
        step.rule = 3;
        up = true;
      } else if (proj_col_onto_left(x) >= eps_x_val &&
                 proj_row_onto_right(x) >= eps_x_val) {
        step.rule = 4;
        up = false;
      } else {
        step.rule = 5;
        up = true;
      }
      x_next = up ? x + 1 : x - 1;
      step_rhs_factor = 2.0 * log_eps_x - 2.0 * log_tau1;
    } else {
      double sigma_t = sigma_from_bottom(0);
      if (x > 1 && sigma_t >= eps_1_val) {
        step.rule = 1;
        x_next = x - 1;
      } else if ((x == 1 && sigma_t >= eps_1_val) ||
                 (x == 0 && proj_row_onto_right(1) >= eps_1_val)) {
        step.rule = 2;
        x_next = 0;
      } else if (x >= 1 && sigma_t <= eps_1_val && proj_col_onto_left(1) >= eps_1_val &&
                 proj_row_onto_right(1) >= eps_1_val) {
        step.rule = 3;
        x_next = x - 1;
      } else {
        step.rule = 4;
        x_next = x + 1;
      }
      step_rhs_factor = 2.0 * log_eps_1 - 2.0 * log_tau2;
    }
    step.x_after = x_next;

    // quasirandomness flags on request (sampled censuses; exact D and J)
    if (params.quasirandom_flags) {
      std::vector<Index> s_sorted(ps.order.begin(), ps.order.begin() + t);
      std::sort(s_sorted.begin(), s_sorted.end());
      BinaryMatrix bt = b.submatrix(s_sorted, s_sorted);
      double logn = std::log(static_cast<double>(n));
      auto d_event = [&](const BinaryMatrix& mm) {
        // rectangular matrices take the digraph view: the glued vertex set
        // has max(rows, cols) entries, absent rows contribute in-degree 0
        DegreeSequence ds;
        Index glued = std::max(mm.rows(), mm.cols());
        ds.out.assign(glued, 0);
        ds.in.assign(glued, 0);
        for (Index j = 0; j < mm.cols(); ++j) ds.out[j] = mm.col_sum(j);
        for (Index i = 0; i < mm.rows(); ++i) ds.in[i] = mm.row_sum(i);
        auto reg = degseq_regular(ds, d, std::sqrt(eps), 16.0, n);
        auto dens = local_density_check(mm, static_cast<Index>(std::sqrt(logn)));
        return reg.regular && dens.status == DensityReport::Status::kPass;
      };
      double r_floor = step.epoch == 1
                           ? std::pow(logn, 1.5)
                           : std::pow(std::log(logn), 2.0);
      std::vector<Index> sizes;
      for (double k = std::max(1.0, r_floor); k <= 0.01 * n; k *= 2.0)
        sizes.push_back(static_cast<Index>(k));
      if (sizes.empty()) sizes.push_back(std::max<Index>(1, static_cast<Index>(r_floor)));
      Rng census_rng = Rng(seed).fork("census").fork(static_cast<std::uint64_t>(t));
      auto u_event = [&](const BinaryMatrix& mm, Rng r) {
        auto repc = expansion_census(mm, sizes, CensusMode::kSampled,
                                     params.census_budget, r, n);
        return repc.clean();
      };
      bool g = u_event(bt, census_rng.fork("u1")) &&
               u_event(bt.transposed(), census_rng.fork("u2")) && d_event(bt);
      step.g_flag = g ? 1 : 0;
      step.h_flag = ps.degree_bad[v] ? 1 : 0;
      Index bad = 0;
      for (Index j = t; j < core; ++j)
        if (ps.degree_bad[ps.order[j]]) ++bad;
      step.j_flag = (core > t && static_cast<double>(bad) / (core - t) >= eps) ? 1 : 0;
      if (step.epoch == 2) {
        std::vector<Index> cols_sorted(ps.order.begin(), ps.order.begin() + t + 1);
        std::sort(cols_sorted.begin(), cols_sorted.end());
        BinaryMatrix bstar = b.submatrix(s_sorted, cols_sorted);
        Index star_pos = static_cast<Index>(
            std::lower_bound(cols_sorted.begin(), cols_sorted.end(), v) -
            cols_sorted.begin());
        auto repc = expansion_census(bstar, sizes, CensusMode::kSampled,
                                     params.census_budget,
                                     census_rng.fork("ustar"), n, star_pos);
        step.gp_flag = (repc.clean() && d_event(bstar)) ? 1 : 0;
      }
    }

    // advance the spectrum and verify the product rule
    bool recompute = params.stride <= 1 ||
                     ((t + 1 - m) % params.stride == 0) || t + 1 == n;
    pending_rhs_factors += step_rhs_factor;
    if (recompute) {
      try {
        cur = spectrum_at(t + 1);
      } catch (const resource_limit&) {
        tr.aborted = true;
        tr.steps.push_back(step);
        return tr;
      }
      step.window_log_after = window_log(cur.values, t + 1, x_next, tr.delta_m);
      if (params.verify_products) {
        step.rhs_log = last_verified_window + pending_rhs_factors;
        step.product_checked = true;
        step.product_ok =
            step.window_log_after >= step.rhs_log - 1e-6 * std::abs(step.rhs_log) - 1e-9;
        if (!step.product_ok) tr.all_products_ok = false;
      }
      last_verified_window = step.window_log_after;
      pending_rhs_factors = 0.0;
    } else {
      step.approx = true;
      step.window_log_after = window_log(cur.values, t, x_next, tr.delta_m);
    }
    x = x_next;
    tr.steps.push_back(step);
  }

  tr.x_final = x;
  tr.sigma_n = cur.sigma_ext(n - 1);
  tr.final_window_log = window_log(cur.values, n, 0, tr.delta_m);
  return tr;
}

FinalWindowCheck final_window_check(const WalkTrace& trace) {
  FinalWindowCheck fc;
  fc.log_product = trace.final_window_log;
  fc.log_threshold = -trace.params.c_cfg * trace.params.model.eps() * trace.n;
  fc.pass = fc.log_product >= fc.log_threshold;
  fc.sigma_n = trace.sigma_n;
  fc.sigma_log_threshold = -trace.params.eps_cfg * trace.n;
  fc.sigma_pass = trace.sigma_n > std::exp(fc.sigma_log_threshold);
  return fc;
}

TailMcResult walk_tail_mc(double p, int k, int t, std::int64_t trials,
                          std::uint64_t seed) {
  require(p >= 0.0 && p < 1.0, "walk_tail_mc: need p in [0,1)");
  require(k >= 1 && t >= 0, "walk_tail_mc: need k >= 1, t >= 0");
  TailMcResult res;
  res.trials = trials;
  res.histogram.assign(k + 1, 0);
  Rng base = Rng(seed).fork("tail-mc");
  std::int64_t hits = 0;
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    Rng rng = base.fork(static_cast<std::uint64_t>(trial));
    int xx = 0;
    for (int s = 1; s < k; ++s) {
      if (rng.uniform() < p)
        ++xx;
      else if (xx > 0)
        --xx;
    }
    ++res.histogram[xx];
    if (xx >= t) ++hits;
  }
  res.frequency = static_cast<double>(hits) / trials;
  res.bound = std::pow(64.0 * p, t / 2.0);
  res.pass = t == 0 ? res.frequency <= 1.0 : res.frequency <= res.bound;
  // exact law by forward dynamic programming
  std::vector<double> cur(k + 1, 0.0), nxt(k + 1, 0.0);
  cur[0] = 1.0;
  for (int s = 1; s < k; ++s) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    for (int xx = 0; xx <= k; ++xx) {
      if (cur[xx] == 0.0) continue;
      if (xx + 1 <= k) nxt[xx + 1] += p * cur[xx];
      nxt[xx > 0 ? xx - 1 : 0] += (1.0 - p) * cur[xx];
    }
    cur.swap(nxt);
  }
  res.dp_distribution = cur;
  return res;
}

}  // namespace spectra
