#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "spectra/binary_matrix.hpp"
#include "spectra/model.hpp"
#include "spectra/rng.hpp"
#include "spectra/sv.hpp"

namespace spectra {

/// Height-dependent smallness threshold exp(-K (log(n/r))^9). Underflow
/// clamps to the smallest positive normal double with a flag; log_value is
/// always the analytic exponent.
struct EpsilonR {
  double value = 0.0;
  double log_value = 0.0;
  bool clamped = false;
};
EpsilonR epsilon_r(Index n, Index r, double k_const);

struct WalkParams {
  ModelParams model;
  Complex z{1.0, 1.0};
  double k_eps = 0.01;    // K in eps_r; the asymptotic choice ("sufficiently
                          // large") underflows at desk n, hence this default
  double c_cfg = 5.0;     // final window threshold exp(-c_cfg eps n)
  double eps_cfg = 0.1;   // sigma_n threshold exp(-eps_cfg n)
  int stride = 1;         // full-spectrum recompute stride
  double tau_z = 0.0;     // set <= 0 to run the pilot estimate
  int tau_pilot_runs = 20;
  bool verify_products = true;
  bool quasirandom_flags = false;  // sampled census flags per step (slow)
  std::int64_t census_budget = 60;
};

/// Index partition and revelation order of the process: T1/T2/T3, the
/// extracted high-value set H, S_m, and v_{m+1..n}.
struct ProcessSetup {
  Index n = 0, m = 0, ell = 0, n1 = 0;  // n1 = |T1|
  double eps = 0.0;
  std::vector<Index> h;             // extracted vertices, by descending val
  std::vector<Index> val_t2;        // val(j) for j in T2 (offset by n1)
  std::vector<Index> order;         // vertex order: S_m sorted, then reveals
  std::vector<bool> degree_bad;     // per vertex in [n]
  Index first_epoch_len() const { return n - ell - m; }
};
ProcessSetup build_process(const BinaryMatrix& b, const WalkParams& params,
                           std::uint64_t seed);

/// 5th percentile of sigma_{ceil((1-eps^4)m)}(B_m - zI) over pilot runs.
double estimate_tau_z(const WalkParams& params, std::uint64_t seed);

struct WalkStep {
  Index t = 0;  // transition t -> t+1
  int epoch = 1;
  int rule = 0;  // 1-based bullet within the epoch's list
  Index x_before = 0, x_after = 0;
  Index vertex = -1;
  Index deg_out_t1 = 0, deg_in_t1 = 0, deg_out_total = 0, deg_in_total = 0;
  double window_log_after = 0.0;  // sum log sigma over the window at (t+1, X_{t+1})
  double rhs_log = 0.0;           // verified lower bound from the product rule
  bool product_ok = true;
  bool product_checked = false;
  bool approx = false;  // spectra reused across a stride
  // quasirandomness flags: -1 not evaluated, else 0/1
  int g_flag = -1, h_flag = -1, j_flag = -1, gp_flag = -1;
};

struct WalkTrace {
  WalkParams params;
  Index n = 0, m = 0, ell = 0;
  Index delta_m = 0;
  double tau_z = 0.0;
  Index x_start = 0;
  Index x_final = 0;
  double initial_window_log = 0.0;
  double final_window_log = 0.0;  // sum_{j=0}^{delta_m} log sigma_{n-j}(B - zI)
  double sigma_n = 0.0;           // smallest singular value of B - zI
  bool all_products_ok = true;
  bool aborted = false;
  std::vector<WalkStep> steps;
};

/// Runs both epochs of the revelation walk on B, evaluating every bullet
/// exactly in order and verifying the window product inequality at each
/// step (each down-step's inequality is a theorem given its rule
/// conditions, so a violation is a defect).
WalkTrace run_walk(const BinaryMatrix& b, const WalkParams& params,
                   std::uint64_t seed);

struct FinalWindowCheck {
  double log_product = 0.0;
  double log_threshold = 0.0;
  bool pass = false;
  double sigma_n = 0.0;
  double sigma_log_threshold = 0.0;
  bool sigma_pass = false;
};
FinalWindowCheck final_window_check(const WalkTrace& trace);

struct TailMcResult {
  double frequency = 0.0;
  double bound = 0.0;  // (64 p)^{t/2}
  bool pass = false;
  std::vector<double> dp_distribution;  // exact law of X_k
  std::vector<std::int64_t> histogram;  // empirical counts per height
  std::int64_t trials = 0;
};

/// Canonical drift chain meeting the random-walk lemma hypotheses with
/// equality: X_1 = 0, up with probability p, else down with reflection at
/// 0. Returns the empirical P(X_k >= t) against (64 p)^{t/2}, plus the
/// exact dynamic-programming law.
TailMcResult walk_tail_mc(double p, int k, int t, std::int64_t trials,
                          std::uint64_t seed);

}  // namespace spectra
