#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spectra/binary_matrix.hpp"
#include "spectra/rng.hpp"

namespace spectra {

/// U(S) for a column set S: rows outside S seeing exactly one column of S,
/// plus rows of S seeing none of S.
std::vector<Index> unique_neighbors(const BinaryMatrix& m,
                                    const std::vector<Index>& s);

/// alpha(x) = (log(n/x))^{-2}; n is the ambient scale parameter.
double expansion_alpha(double n, double x);

struct SizeCensus {
  Index set_size = 0;
  std::int64_t tested = 0;
  std::int64_t violations = 0;  // |U(S)| < alpha(k) k
  std::int64_t filtered_tested = 0;     // degree-sum filtered stratum
  std::int64_t filtered_violations = 0;
  bool exhaustive = false;
};

struct ExpansionReport {
  std::vector<SizeCensus> sizes;
  std::vector<Index> worst_set;  // a violating set, if any was found
  std::int64_t star_tested = 0;      // sets containing the last column
  std::int64_t star_violations = 0;  // with U(S) = 0
  bool budget_exhausted = false;
  bool clean() const {
    for (const auto& c : sizes)
      if (c.violations || c.filtered_violations) return false;
    return star_violations == 0;
  }
};

enum class CensusMode { kExact, kSampled };

/// Census of unique-neighbor expansion violations over column sets.
/// Exact mode enumerates all sets of each size (guarded by budget);
/// sampled mode draws `budget` sets per size, once uniformly and once
/// through the degree-sum filter |sum_{i in S} d_i - k| <= k/sqrt(log(m/k)).
/// star_col is the distinguished column of the U* stratum (default: last).
ExpansionReport expansion_census(const BinaryMatrix& m,
                                 const std::vector<Index>& sizes,
                                 CensusMode mode, std::int64_t budget,
                                 Rng rng, double ambient_n = 0.0,
                                 Index star_col = -1);

struct DensityReport {
  enum class Status { kPass, kFail, kUndecided } status = Status::kPass;
  std::vector<Index> witness;  // violating set when status == kFail
};

/// Checks sum_{i,j in S} M_ij <= |S| for every vertex set with |S| <= s_max.
/// A minimal violator is connected in the loop-augmented undirected graph,
/// so the search grows connected subsets only, within `budget` nodes.
DensityReport local_density_check(const BinaryMatrix& m, Index s_max,
                                  std::int64_t budget = 2'000'000);

struct SccSummary {
  std::vector<Index> component;  // vertex -> component id
  std::vector<Index> sizes;      // component id -> size
  Index giant_size = 0;
  Index singleton_count = 0;
  Index cycle_count = 0;     // components that are pure directed cycles
  Index longest_cycle = 0;   // longest pure-cycle component
  Index other_count = 0;
  std::vector<std::vector<Index>> members;  // component id -> sorted vertices
};

/// All strongly connected components (iterative Tarjan); components are
/// numbered in reverse topological order of the condensation (every edge
/// goes from a higher component id to a lower one).
SccSummary scc_structure(const Digraph& g);

/// Unique nonzero root of 1 - x - exp(-(1+eps) x) = 0, by bisection.
double theta_root(double eps);

struct TrivialImageReport {
  Index count = 0;  // lower bound on the algebraic multiplicity of 0
  std::vector<bool> trivial;
};

/// Vertices whose entire forward-reachable set consists of size-1 SCCs
/// without self-loops; A^n e_v = 0 for each such v.
TrivialImageReport trivial_image_census(const Digraph& g);

}  // namespace spectra
