#include "spectra/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spectra/errors.hpp"

namespace spectra {

std::vector<Index> unique_neighbors(const BinaryMatrix& m,
                                    const std::vector<Index>& s) {
  const Index rows = m.rows();
  std::vector<Index> count(rows, 0);
  std::vector<bool> in_s_row(rows, false);
  for (Index j : s) {
    require(j >= 0 && j < m.cols(), "unique_neighbors: column out of range");
    for (const Index* p = m.col_begin(j); p != m.col_end(j); ++p) ++count[*p];
    if (j < rows) in_s_row[j] = true;
  }
  std::vector<Index> u;
  for (Index i = 0; i < rows; ++i) {
    if (in_s_row[i] ? (count[i] == 0) : (count[i] == 1)) u.push_back(i);
  }
  return u;
}

double expansion_alpha(double n, double x) {
  double l = std::log(n / x);
  return 1.0 / (l * l);
}

namespace {

std::vector<Index> sample_subset(Index n, Index k, Rng& rng) {
  // partial Fisher-Yates over an index pool
  std::vector<Index> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (Index t = 0; t < k; ++t) {
    Index r = t + static_cast<Index>(rng.below(n - t));
    std::swap(pool[t], pool[r]);
  }
  std::vector<Index> s(pool.begin(), pool.begin() + k);
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace

ExpansionReport expansion_census(const BinaryMatrix& m,
                                 const std::vector<Index>& sizes,
                                 CensusMode mode, std::int64_t budget,
                                 Rng rng, double ambient_n, Index star_col) {
  const Index cols = m.cols();
  double n_scale = ambient_n > 0.0 ? ambient_n : static_cast<double>(cols);
  ExpansionReport rep;
  std::vector<Index> degs(cols);
  for (Index j = 0; j < cols; ++j) degs[j] = m.col_sum(j);

  auto violation = [&](const std::vector<Index>& s) {
    double k = static_cast<double>(s.size());
    auto u = unique_neighbors(m, s);
    return static_cast<double>(u.size()) < expansion_alpha(n_scale, k) * k;
  };

  for (Index k : sizes) {
    require(k >= 1 && k <= cols, "expansion_census: size out of range");
    SizeCensus cen;
    cen.set_size = k;
    if (mode == CensusMode::kExact) {
      // enumerate all subsets of size k; abort to sampled-style partial
      // report if the budget runs out
      std::vector<Index> s(k);
      std::iota(s.begin(), s.end(), 0);
      cen.exhaustive = true;
      std::int64_t used = 0;
      for (;;) {
        if (++used > budget) {
          cen.exhaustive = false;
          rep.budget_exhausted = true;
          break;
        }
        ++cen.tested;
        if (violation(s)) {
          ++cen.violations;
          if (rep.worst_set.empty()) rep.worst_set = s;
        }
        // next lexicographic combination
        Index i = k - 1;
        while (i >= 0 && s[i] == cols - k + i) --i;
        if (i < 0) break;
        ++s[i];
        for (Index t = i + 1; t < k; ++t) s[t] = s[t - 1] + 1;
      }
    } else {
      Rng size_rng = rng.fork(static_cast<std::uint64_t>(k));
      Rng uni = size_rng.fork("uniform");
      for (std::int64_t t = 0; t < budget; ++t) {
        auto s = sample_subset(cols, k, uni);
        ++cen.tested;
        if (violation(s)) {
          ++cen.violations;
          if (rep.worst_set.empty()) rep.worst_set = s;
        }
      }
      // second stratum: degree-sum filtered sets (rejection with a cap)
      double band = k / std::sqrt(std::log(static_cast<double>(m.rows()) / k));
      Rng filt = size_rng.fork("filtered");
      std::int64_t attempts = 0, cap = budget * 50;
      while (cen.filtered_tested < budget && attempts < cap) {
        ++attempts;
        auto s = sample_subset(cols, k, filt);
        double dsum = 0.0;
        for (Index j : s) dsum += degs[j];
        if (std::abs(dsum - k) > band) continue;
        ++cen.filtered_tested;
        if (violation(s)) {
          ++cen.filtered_violations;
          if (rep.worst_set.empty()) rep.worst_set = s;
        }
      }
      if (cen.filtered_tested < budget) rep.budget_exhausted = true;
    }
    rep.sizes.push_back(std::move(cen));
  }

  // U* stratum: sets containing the distinguished column, U(S) = 0
  if (cols >= 1) {
    Index special = star_col < 0 ? cols - 1 : star_col;
    require(special < cols, "expansion_census: star column out of range");
    Rng star = rng.fork("star");
    for (Index k : sizes) {
      if (k < 1) continue;
      std::int64_t draws = mode == CensusMode::kExact ? 0 : budget;
      for (std::int64_t t = 0; t < draws; ++t) {
        auto s = sample_subset(cols - 1, k - 1, star);
        for (Index& v : s)
          if (v >= special) ++v;  // skip over the distinguished column
        s.push_back(special);
        std::sort(s.begin(), s.end());
        ++rep.star_tested;
        if (unique_neighbors(m, s).empty()) ++rep.star_violations;
      }
    }
  }
  return rep;
}

namespace {

struct UndirectedView {
  std::vector<std::vector<Index>> adj;  // neighbors, deduplicated
  std::vector<std::vector<Index>> dir;  // directed adjacency for block sums
  std::vector<bool> loop;
};

UndirectedView undirected_of(const BinaryMatrix& m) {
  UndirectedView v;
  Index n = std::max(m.rows(), m.cols());
  v.adj.resize(n);
  v.dir.resize(n);
  v.loop.resize(n, false);
  for (auto [i, j] : m.entries()) {
    v.dir[i].push_back(j);
    if (i == j) {
      v.loop[i] = true;
    } else {
      v.adj[i].push_back(j);
      v.adj[j].push_back(i);
    }
  }
  for (auto& a : v.adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  for (auto& a : v.dir) std::sort(a.begin(), a.end());
  return v;
}

// connected-subset enumeration rooted at r, vertices > forbidden roots pruned
struct DensitySearch {
  const UndirectedView& g;
  Index s_max;
  std::int64_t budget;
  std::int64_t used = 0;
  std::vector<Index> current;
  std::vector<bool> in_current;
  std::vector<Index> witness;
  Index block_sum = 0;
  bool out_of_budget = false;

  DensitySearch(const UndirectedView& gv, Index smax, std::int64_t b)
      : g(gv), s_max(smax), budget(b), in_current(gv.adj.size(), false) {}

  Index edges_into_current(Index v) const {
    Index cnt = 0;
    for (Index w : g.dir[v])
      if (w == v || in_current[w]) ++cnt;
    for (Index w : current) {
      const auto& d = g.dir[w];
      if (std::binary_search(d.begin(), d.end(), v)) ++cnt;
    }
    return cnt;
  }

  // frontier holds candidate extensions (vertices > root, adjacent to current)
  bool grow(Index root, std::vector<Index>& frontier, size_t from) {
    if (++used > budget) {
      out_of_budget = true;
      return false;
    }
    if (block_sum > static_cast<Index>(current.size())) {
      witness = current;
      return true;
    }
    if (static_cast<Index>(current.size()) == s_max) return false;
    for (size_t fi = from; fi < frontier.size(); ++fi) {
      Index v = frontier[fi];
      if (in_current[v]) continue;
      Index added = edges_into_current(v);
      current.push_back(v);
      in_current[v] = true;
      block_sum += added;
      size_t old_size = frontier.size();
      for (Index w : g.adj[v])
        if (w > root && !in_current[w]) frontier.push_back(w);
      if (grow(root, frontier, fi + 1)) return true;
      frontier.resize(old_size);
      block_sum -= added;
      in_current[v] = false;
      current.pop_back();
      if (out_of_budget) return false;
    }
    return false;
  }
};

}  // namespace

DensityReport local_density_check(const BinaryMatrix& m, Index s_max,
                                  std::int64_t budget) {
  require(s_max >= 0, "local_density_check: negative size cap");
  DensityReport rep;
  if (s_max == 0) return rep;
  auto g = undirected_of(m);
  Index n = static_cast<Index>(g.adj.size());
  DensitySearch search(g, s_max, budget);
  // minimal violators are connected, so root the search at every vertex and
  // only extend with larger vertex ids to avoid revisits
  for (Index r = 0; r < n; ++r) {
    search.current = {r};
    std::fill(search.in_current.begin(), search.in_current.end(), false);
    search.in_current[r] = true;
    search.block_sum = g.loop[r] ? 1 : 0;
    std::vector<Index> frontier;
    for (Index w : g.adj[r])
      if (w > r) frontier.push_back(w);
    if (search.grow(r, frontier, 0)) {
      rep.status = DensityReport::Status::kFail;
      rep.witness = search.witness;
      std::sort(rep.witness.begin(), rep.witness.end());
      return rep;
    }
    if (search.out_of_budget) {
      rep.status = DensityReport::Status::kUndecided;
      return rep;
    }
  }
  return rep;
}

SccSummary scc_structure(const Digraph& g) {
  const Index n = g.size();
  SccSummary sum;
  sum.component.assign(n, -1);
  std::vector<Index> idx(n, -1), low(n, 0), stack_vertices;
  std::vector<bool> on_stack(n, false);
  Index counter = 0;
  // explicit stack: (vertex, next edge position)
  std::vector<std::pair<Index, size_t>> call;
  for (Index s = 0; s < n; ++s) {
    if (idx[s] != -1) continue;
    call.emplace_back(s, 0);
    while (!call.empty()) {
      auto& [v, ei] = call.back();
      if (ei == 0) {
        idx[v] = low[v] = counter++;
        stack_vertices.push_back(v);
        on_stack[v] = true;
      }
      bool descended = false;
      const auto& out = g.out(v);
      while (ei < out.size()) {
        Index w = out[ei++];
        if (idx[w] == -1) {
          call.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[w]) low[v] = std::min(low[v], idx[w]);
      }
      if (descended) continue;
      if (low[v] == idx[v]) {
        Index cid = static_cast<Index>(sum.sizes.size());
        Index size = 0;
        for (;;) {
          Index w = stack_vertices.back();
          stack_vertices.pop_back();
          on_stack[w] = false;
          sum.component[w] = cid;
          ++size;
          if (w == v) break;
        }
        sum.sizes.push_back(size);
      }
      Index finished = v;
      call.pop_back();
      if (!call.empty()) {
        Index parent = call.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  Index ncomp = static_cast<Index>(sum.sizes.size());
  sum.members.resize(ncomp);
  for (Index v = 0; v < n; ++v) sum.members[sum.component[v]].push_back(v);
  for (Index c = 0; c < ncomp; ++c) {
    Index sz = sum.sizes[c];
    sum.giant_size = std::max(sum.giant_size, sz);
    if (sz == 1) {
      if (g.has_loop(sum.members[c][0])) {
        ++sum.cycle_count;  // self-loop counts as a cycle of length 1
        sum.longest_cycle = std::max<Index>(sum.longest_cycle, 1);
      } else {
        ++sum.singleton_count;
      }
      continue;
    }
    // pure cycle: every member has exactly one in- and out-neighbor inside
    bool cycle = true;
    for (Index v : sum.members[c]) {
      Index ind = 0, outd = 0;
      for (Index w : g.out(v))
        if (sum.component[w] == c) ++outd;
      for (Index w : g.in(v))
        if (sum.component[w] == c) ++ind;
      if (ind != 1 || outd != 1) {
        cycle = false;
        break;
      }
    }
    if (cycle) {
      ++sum.cycle_count;
      sum.longest_cycle = std::max(sum.longest_cycle, sz);
    } else {
      ++sum.other_count;
    }
  }
  return sum;
}

double theta_root(double eps) {
  require(eps > 0.0, "theta_root: eps must be positive");
  auto f = [&](double x) { return 1.0 - x - std::exp(-(1.0 + eps) * x); };
  double lo = 1e-12, hi = 1.0;
  require(f(lo) > 0.0 && f(hi) < 0.0, "theta_root: bracket failed");
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TrivialImageReport trivial_image_census(const Digraph& g) {
  auto scc = scc_structure(g);
  const Index ncomp = static_cast<Index>(scc.sizes.size());
  // component ids come out in reverse topological order: successors of c
  // have ids < c, so one ascending sweep propagates "reaches a non-trivial
  // component"
  std::vector<bool> bad(ncomp, false);
  for (Index c = 0; c < ncomp; ++c) {
    if (scc.sizes[c] > 1 || g.has_loop(scc.members[c][0])) bad[c] = true;
  }
  for (Index c = 0; c < ncomp; ++c) {
    if (bad[c]) continue;
    for (Index v : scc.members[c]) {
      for (Index w : g.out(v)) {
        if (bad[scc.component[w]]) {
          bad[c] = true;
          break;
        }
      }
      if (bad[c]) break;
    }
  }
  TrivialImageReport rep;
  rep.trivial.resize(g.size());
  for (Index v = 0; v < g.size(); ++v) {
    rep.trivial[v] = !bad[scc.component[v]];
    if (rep.trivial[v]) ++rep.count;
  }
  return rep;
}

}  // namespace spectra
