#include "doctest.h"

#include <cmath>
#include <set>

#include "spectra/errors.hpp"
#include "spectra/walk.hpp"

using namespace spectra;

namespace {

// small but non-degenerate walk configuration: delta = 5 keeps the first
// epoch populated at n = 150
WalkParams small_params(std::uint64_t seed) {
  WalkParams wp;
  wp.model = ModelParams{150, 4.0, 5, seed};
  wp.z = Complex(1.0, 1.0);
  wp.tau_pilot_runs = 6;
  return wp;
}

}  // namespace

TEST_CASE("epsilon_r closed forms") {
  auto e = epsilon_r(1000, 1000, 0.01);
  CHECK(e.value == doctest::Approx(1.0));
  CHECK_FALSE(e.clamped);

  auto e2 = epsilon_r(1000, 100, 0.01);
  CHECK(e2.log_value ==
        doctest::Approx(-0.01 * std::pow(std::log(10.0), 9.0)).epsilon(1e-12));
  CHECK(e2.value == doctest::Approx(std::exp(e2.log_value)));

  // monotone non-decreasing in r
  double prev = 0.0;
  for (Index r = 1; r <= 1000; r += 37) {
    auto er = epsilon_r(1000, r, 0.01);
    CHECK(er.value >= prev);
    prev = er.value;
  }
  // deep thresholds clamp with the flag
  auto e3 = epsilon_r(100000, 1, 1.0);
  CHECK(e3.clamped);
  CHECK(e3.value > 0.0);
  CHECK_THROWS_AS(epsilon_r(10, 0, 0.01), invalid_parameter);
}

TEST_CASE("build_process: S_{n-ell} = [n-ell] deterministically") {
  WalkParams wp = small_params(3);
  BinaryMatrix b = sample_modified(wp.model);
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    auto ps = build_process(b, wp, seed);
    Index core = ps.n - ps.ell;
    std::set<Index> prefix(ps.order.begin(), ps.order.begin() + core);
    CHECK(static_cast<Index>(prefix.size()) == core);
    CHECK(*prefix.rbegin() == core - 1);  // exactly [0, core)
    // second epoch reveals the boosted tail in index order
    for (Index t = core; t < ps.n; ++t) CHECK(ps.order[t] == t);
  }
}

TEST_CASE("build_process: degenerate extraction leaves H empty") {
  WalkParams wp;
  // eps = P(Pois(3) >= 5) = 0.1847: T2 is non-empty but eps^3 n < 1
  wp.model = ModelParams{150, 3.0, 5, 5};
  BinaryMatrix b = sample_modified(wp.model);
  auto ps = build_process(b, wp, 1);
  CHECK(ps.h.empty());
  CHECK(ps.m == ps.n - ps.ell);
  CHECK(ps.first_epoch_len() == 0);
}

TEST_CASE("build_process: H collects the largest values") {
  WalkParams wp = small_params(7);
  BinaryMatrix b = sample_modified(wp.model);
  auto ps = build_process(b, wp, 1);
  REQUIRE_FALSE(ps.h.empty());
  Index core = ps.n - ps.ell;
  // sort-oracle: every member of H has val >= the |H|-th largest val
  std::vector<Index> vals;
  for (Index j = ps.n1; j < core; ++j)
    vals.push_back(
        std::min(b.col_sum_below(j, core), b.row_sum_below(j, core)));
  std::vector<Index> sorted(vals);
  std::sort(sorted.begin(), sorted.end(), std::greater<Index>());
  Index cutoff = sorted[ps.h.size() - 1];
  for (Index v : ps.h) {
    Index val = std::min(b.col_sum_below(v, core), b.row_sum_below(v, core));
    CHECK(val >= cutoff);
  }
}

TEST_CASE("run_walk: deterministic replay") {
  WalkParams wp = small_params(11);
  BinaryMatrix b = sample_modified(wp.model);
  WalkTrace t1 = run_walk(b, wp, 5);
  WalkTrace t2 = run_walk(b, wp, 5);
  REQUIRE(t1.steps.size() == t2.steps.size());
  CHECK(t1.x_final == t2.x_final);
  CHECK(t1.final_window_log == t2.final_window_log);
  for (size_t i = 0; i < t1.steps.size(); ++i) {
    CHECK(t1.steps[i].rule == t2.steps[i].rule);
    CHECK(t1.steps[i].vertex == t2.steps[i].vertex);
    CHECK(t1.steps[i].x_after == t2.steps[i].x_after);
  }
}

TEST_CASE("run_walk: dynamics, rails, and product verification") {
  int x_zero = 0;
  const int runs = 10;
  double tau_shared = estimate_tau_z(small_params(1), 1);
  for (int run = 0; run < runs; ++run) {
    WalkParams wp = small_params(100 + run);
    wp.tau_z = tau_shared;
    BinaryMatrix b = sample_modified(wp.model);
    WalkTrace tr = run_walk(b, wp, 100 + run);
    REQUIRE_FALSE(tr.aborted);
    Index core = tr.n - tr.ell;
    Index x = tr.x_start;
    for (const WalkStep& s : tr.steps) {
      CHECK(s.x_before == x);
      // bullet semantics: rules 1,3,5 go up in epoch 1; rule 4 in epoch 2
      if (s.epoch == 1) {
        bool up = s.rule == 1 || s.rule == 3 || s.rule == 5;
        CHECK(s.x_after == s.x_before + (up ? 1 : -1));
      } else {
        if (s.rule == 2) CHECK(s.x_after == 0);
        if (s.rule == 1 || s.rule == 3) CHECK(s.x_after == s.x_before - 1);
        if (s.rule == 4) CHECK(s.x_after == s.x_before + 1);
      }
      CHECK(s.x_after >= 0);
      // first-epoch floor: the forced up-step keeps X above the rail
      if (s.epoch == 1)
        CHECK(16.0 * s.x_before >= static_cast<double>(core - s.t) - 16.0);
      if (s.product_checked) CHECK(s.product_ok);
      x = s.x_after;
    }
    CHECK(tr.all_products_ok);
    if (tr.x_final == 0) ++x_zero;
  }
  CHECK(x_zero >= 8);  // desk constants drive the walk home
}

TEST_CASE("run_walk: window telescoping against a fresh spectrum") {
  WalkParams wp = small_params(42);
  BinaryMatrix b = sample_modified(wp.model);
  WalkTrace tr = run_walk(b, wp, 42);
  // recompute the final window from scratch through the public path
  SingularSpectrum spec = singular_spectrum(ShiftedMatrix(b, wp.z), false);
  double fresh = 0.0;
  for (Index j = 0; j <= tr.delta_m; ++j)
    fresh += std::log(spec.values[tr.n - 1 - j]);
  CHECK(fresh ==
        doctest::Approx(tr.final_window_log).epsilon(1e-6));
  CHECK(spec.values[tr.n - 1] == doctest::Approx(tr.sigma_n).epsilon(1e-9));
}

TEST_CASE("run_walk: strided spectra mark approximate steps and stay sound") {
  WalkParams wp = small_params(13);
  wp.stride = 4;
  BinaryMatrix b = sample_modified(wp.model);
  WalkTrace tr = run_walk(b, wp, 13);
  REQUIRE_FALSE(tr.aborted);
  bool saw_approx = false, saw_checked = false;
  for (const WalkStep& s : tr.steps) {
    if (s.approx) saw_approx = true;
    if (s.product_checked) {
      saw_checked = true;
      CHECK(s.product_ok);
    }
  }
  CHECK(saw_approx);
  CHECK(saw_checked);
}

TEST_CASE("final_window_check on a well-conditioned shift") {
  // B - zI far from singular: the final window passes for any c_cfg with
  // exp(-c eps n) below sigma_min^(delta_m + 1)
  WalkParams wp = small_params(17);
  BinaryMatrix b = sample_modified(wp.model);
  WalkTrace tr = run_walk(b, wp, 17);
  auto fc = final_window_check(tr);
  CHECK(fc.log_threshold == doctest::Approx(-wp.c_cfg * wp.model.eps() * tr.n));
  CHECK(fc.pass == (fc.log_product >= fc.log_threshold));
}

TEST_CASE("quasirandomness flags evaluate when requested") {
  WalkParams wp = small_params(19);
  wp.quasirandom_flags = true;
  wp.census_budget = 20;
  BinaryMatrix b = sample_modified(wp.model);
  WalkTrace tr = run_walk(b, wp, 19);
  for (const WalkStep& s : tr.steps) {
    CHECK(s.h_flag >= 0);
    CHECK(s.j_flag >= 0);
    CHECK(s.g_flag >= 0);
    if (s.epoch == 2) CHECK(s.gp_flag >= 0);
  }
}

TEST_CASE("walk_tail_mc: degenerate cases") {
  auto res = walk_tail_mc(0.0, 50, 1, 2000, 3);
  CHECK(res.frequency == 0.0);
  auto res2 = walk_tail_mc(0.3, 50, 0, 2000, 3);
  CHECK(res2.frequency == 1.0);
  CHECK(res2.pass);
}

TEST_CASE("walk_tail_mc: tail bound and exact DP agreement") {
  auto res = walk_tail_mc(0.01, 200, 4, 1000000, 7);
  CHECK(res.bound == doctest::Approx(std::pow(0.64, 2.0)));
  CHECK(res.pass);
  CHECK(res.frequency < 0.1 * res.bound);  // empirically far below

  // empirical law vs exact DP within 3 sigma per bin
  for (int x = 0; x < 12; ++x) {
    double p = res.dp_distribution[x];
    double expect = p * res.trials;
    double sd = std::sqrt(std::max(p * (1.0 - p) * res.trials, 1.0));
    CHECK(std::abs(res.histogram[x] - expect) <= 3.0 * sd + 1.0);
  }
  // DP law sums to one
  double total = 0.0;
  for (double p : res.dp_distribution) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("walk_tail_mc satisfies the lemma bound at several thresholds") {
  for (int t : {2, 4, 6}) {
    auto res = walk_tail_mc(0.01, 200, t, 100000, 11);
    CHECK(res.frequency <= std::pow(0.64, t / 2.0));
  }
}

TEST_CASE("permutation symmetry: walk statistics are permutation invariant") {
  // conjugating B by a permutation leaves the distribution of (X_n, final
  // window) unchanged: two-sample KS over 200 runs at significance 1e-3
  const int runs = 100;
  std::vector<double> plain_w, perm_w;
  std::vector<double> plain_x, perm_x;
  // one pilot for the whole family keeps delta_m common across runs
  double tau_shared = estimate_tau_z(small_params(1), 1);
  for (int run = 0; run < runs; ++run) {
    WalkParams wp = small_params(3000 + run);
    wp.tau_z = tau_shared;
    BinaryMatrix b = sample_modified(wp.model);
    WalkTrace tr = run_walk(b, wp, 3000 + run);
    plain_w.push_back(tr.final_window_log);
    plain_x.push_back(tr.x_final);

    // random conjugation
    Rng pg = Rng(7777).fork(run);
    std::vector<Index> perm(wp.model.n);
    for (Index i = 0; i < wp.model.n; ++i) perm[i] = i;
    for (Index i = wp.model.n - 1; i > 0; --i)
      std::swap(perm[i], perm[pg.below(i + 1)]);
    std::vector<Entry> entries;
    for (auto [i, j] : b.entries()) entries.emplace_back(perm[i], perm[j]);
    BinaryMatrix bp(wp.model.n, wp.model.n, std::move(entries));
    WalkTrace tp = run_walk(bp, wp, 13000 + run);
    perm_w.push_back(tp.final_window_log);
    perm_x.push_back(tp.x_final);
  }
  auto ks = [](std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double dist = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      double t = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
      while (i < a.size() && a[i] <= t) ++i;
      while (j < b.size() && b[j] <= t) ++j;
      dist = std::max(dist, std::abs(static_cast<double>(i) / a.size() -
                                     static_cast<double>(j) / b.size()));
    }
    return dist;
  };
  // KS critical value at alpha = 1e-3 for n1 = n2 = 100
  double crit = 1.949 * std::sqrt(2.0 / runs);
  CHECK(ks(plain_w, perm_w) < crit);
  CHECK(ks(plain_x, perm_x) < crit);
}

TEST_CASE("row exchangeability: revealed first-epoch rows look hypergeometric") {
  // within T1 the revealed row of v_t is uniform given its sum, so the ones
  // spread uniformly over 10 position blocks: chi-square on block counts
  WalkParams wp = small_params(0);
  std::vector<std::int64_t> block_counts(10, 0);
  std::int64_t total_ones = 0;
  const int runs = 300;
  for (int run = 0; run < runs; ++run) {
    wp.model.seed = 50000 + run;
    BinaryMatrix b = sample_modified(wp.model);
    auto ps = build_process(b, wp, wp.model.seed);
    if (ps.first_epoch_len() == 0) continue;
    Index v = ps.order[ps.m];  // first revealed vertex
    for (const Index* p = b.row_begin(v); p != b.row_end(v); ++p) {
      if (*p >= ps.n1) continue;
      ++block_counts[*p * 10 / ps.n1];
      ++total_ones;
    }
  }
  REQUIRE(total_ones > 100);
  double expect = static_cast<double>(total_ones) / 10.0;
  double chi2 = 0.0;
  for (std::int64_t c : block_counts)
    chi2 += (c - expect) * (c - expect) / expect;
  // 9 degrees of freedom at significance 1e-3: critical value 27.88
  CHECK(chi2 < 27.88);
}
