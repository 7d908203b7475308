#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "spectra/binary_matrix.hpp"
#include "spectra/rng.hpp"

namespace spectra {

/// Column sums (out) and row sums (in) of a 0-1 matrix viewed as a digraph.
struct DegreeSequence {
  std::vector<Index> out;  // d_i, column sums
  std::vector<Index> in;   // d_i', row sums

  static DegreeSequence of(const BinaryMatrix& m);
};

/// Parameters of the sparse matrix models. `delta` is the degree-extraction
/// cutoff: eps = P(Pois(d) >= delta), ell = floor((log n)^2),
/// tau_boost = sqrt(log n)/n, m = n - ell - floor(eps^3 n).
struct ModelParams {
  Index n = 0;
  double d = 4.0;
  int delta = 8;
  std::uint64_t seed = 0;

  double eps() const;
  Index ell() const;
  double tau_boost() const;
  Index extracted() const;  // floor(eps^3 n)
  Index m() const;          // n - ell - extracted

  void validate() const;  // eps in (0,1), ell >= 1, m > 0
};

/// P(Pois(d) >= delta) = 1 - sum_{k<delta} d^k e^{-d} / k!.
double poisson_tail_eps(double d, int delta);

/// Poisson pmf d^k e^{-d}/k!, evaluated stably.
double poisson_pmf(double d, int k);

/// All entries independently Ber(d/n). Deterministic given params.seed.
BinaryMatrix sample_iid(const ModelParams& params);

/// Entries with max(i,j) <= n - ell are Ber(d/n); the remaining band is
/// Ber(sqrt(log n)/n).
BinaryMatrix sample_modified(const ModelParams& params);

/// Square matrix with iid Ber(p) entries (general-purpose sampler used by
/// the d<=1 experiments and tests).
BinaryMatrix sample_bernoulli(Index rows, Index cols, double p, Rng rng);

/// Joint limit law of (out,in) degrees of B_m after the high-value
/// extraction: binomial thinning of a Poisson pair with retention 1-gamma,
/// with the min(a,a') >= delta band removed at rate eps.
struct DegreeLaw {
  double gamma = 0.0;
  double eps = 0.0;
  /// rho_{j,k}(delta); series truncated at a_max = delta + 12*ceil(d) with
  /// the Poisson tail checked against 1e-12 (throws tolerance_not_met).
  double rho(int j, int k) const;
  double d = 4.0;
  int delta = 8;
  int a_max = 0;
};
DegreeLaw rho_degree_law(const ModelParams& params);

/// S_profile[l] = #{k : row_k + col_k - M_kk = l}, and the log likelihood
/// ratio log( P2(M) / P1(M) ) between the one-boosted-index model P2 and
/// the plain iid model P1, computed from the profile.
struct CouplingStats {
  std::map<Index, Index> s_profile;
  double log_likelihood_ratio = 0.0;
};
CouplingStats coupling_stats(const BinaryMatrix& m, double d, double tau);

/// Uniform stub matching between out-stubs and in-stubs.
struct ConfigSample {
  std::vector<Entry> edges;  // with multiplicity, sorted
  bool simple = false;
  Index rows = 0, cols = 0;
  BinaryMatrix collapse() const;  // drop multiplicities
};
ConfigSample sample_configuration(const DegreeSequence& degs, Rng rng);

/// (d,mu,C)-regularity of a degree sequence: the four conditions checked
/// exactly, with condition 2 (sup over subsets) reduced to sorted prefixes.
struct RegularityReport {
  bool regular = false;
  int violated_bullet = 0;  // 1..4, or 0 if regular
  Index witness_size = 0;   // offending prefix size for bullet 2
};
RegularityReport degseq_regular(const DegreeSequence& degs, double d, double mu,
                                double C, Index n);

}  // namespace spectra
