#include "spectra/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spectra/errors.hpp"

namespace spectra {

DegreeSequence DegreeSequence::of(const BinaryMatrix& m) {
  DegreeSequence ds;
  ds.out.resize(m.cols());
  ds.in.resize(m.rows());
  for (Index j = 0; j < m.cols(); ++j) ds.out[j] = m.col_sum(j);
  for (Index i = 0; i < m.rows(); ++i) ds.in[i] = m.row_sum(i);
  return ds;
}

double ModelParams::eps() const { return poisson_tail_eps(d, delta); }

Index ModelParams::ell() const {
  double ln = std::log(static_cast<double>(n));
  return static_cast<Index>(std::floor(ln * ln));
}

double ModelParams::tau_boost() const {
  return std::sqrt(std::log(static_cast<double>(n))) / n;
}

Index ModelParams::extracted() const {
  double e = eps();
  return static_cast<Index>(std::floor(e * e * e * n));
}

Index ModelParams::m() const { return n - ell() - extracted(); }

void ModelParams::validate() const {
  require(n >= 1, "ModelParams: n must be >= 1");
  require(d > 0.0 && d <= n, "ModelParams: need 0 < d <= n");
  require(delta >= 0, "ModelParams: delta must be >= 0");
  double e = eps();
  require(e > 0.0 && e < 1.0, "ModelParams: eps must lie in (0,1)");
  require(ell() >= 1, "ModelParams: ell must be >= 1");
  require(ell() < n, "ModelParams: ell must be < n");
  require(m() > 0, "ModelParams: derived m must be positive");
}

double poisson_pmf(double d, int k) {
  // exp(k log d - d - lgamma(k+1)); safe for the k ranges used here
  return std::exp(k * std::log(d) - d - std::lgamma(k + 1.0));
}

double poisson_tail_eps(double d, int delta) {
  require(d > 0.0, "poisson_tail_eps: d must be positive");
  require(delta >= 0, "poisson_tail_eps: delta must be >= 0");
  if (delta == 0) return 1.0;
  double head = 0.0, term = std::exp(-d);
  for (int k = 0; k < delta; ++k) {
    head += term;
    term *= d / (k + 1);
  }
  return head >= 1.0 ? 0.0 : 1.0 - head;
}

namespace {

// Geometric skipping over a flattened index range: visits each slot
// independently with probability p. One stream per row block so block
// generation order never depends on scheduling.
template <typename F>
void bernoulli_block(Rng rng, std::int64_t count, double p, F&& emit) {
  if (count <= 0 || p <= 0.0) return;
  if (p >= 1.0) {
    for (std::int64_t t = 0; t < count; ++t) emit(t);
    return;
  }
  double log1mp = std::log1p(-p);
  std::int64_t pos = -1;
  for (;;) {
    double u = rng.uniform();
    // skip ~ Geom(p): floor(log(1-u)/log(1-p))
    double s = std::floor(std::log1p(-u) / log1mp);
    pos += 1 + static_cast<std::int64_t>(s);
    if (pos >= count) return;
    emit(pos);
  }
}

constexpr Index kRowBlock = 512;

}  // namespace

BinaryMatrix sample_bernoulli(Index rows, Index cols, double p, Rng rng) {
  require(p >= 0.0 && p <= 1.0, "sample_bernoulli: p must be in [0,1]");
  std::vector<Entry> entries;
  for (Index b0 = 0; b0 < rows; b0 += kRowBlock) {
    Index b1 = std::min(rows, b0 + kRowBlock);
    Rng stream = rng.fork(static_cast<std::uint64_t>(b0));
    std::int64_t span = static_cast<std::int64_t>(b1 - b0) * cols;
    bernoulli_block(stream, span, p, [&](std::int64_t t) {
      entries.emplace_back(b0 + static_cast<Index>(t / cols),
                           static_cast<Index>(t % cols));
    });
  }
  return BinaryMatrix(rows, cols, std::move(entries));
}

BinaryMatrix sample_iid(const ModelParams& params) {
  require(params.n >= 1, "sample_iid: n must be >= 1");
  require(params.d > 0.0 && params.d <= params.n, "sample_iid: need 0 < d <= n");
  Rng rng = Rng(params.seed).fork("iid");
  return sample_bernoulli(params.n, params.n, params.d / params.n, rng);
}

BinaryMatrix sample_modified(const ModelParams& params) {
  require(params.n >= 1, "sample_modified: n must be >= 1");
  require(params.d > 0.0 && params.d <= params.n,
          "sample_modified: need 0 < d <= n");
  const Index n = params.n;
  const Index ell = params.ell();
  require(ell < n, "sample_modified: ell must be < n");
  const Index core = n - ell;  // max(i,j) <= n-ell  <->  i,j < core (0-based)
  const double p_core = params.d / n;
  const double p_boost = params.tau_boost();
  std::vector<Entry> entries;
  Rng rng = Rng(params.seed).fork("modified");

  // top-left core block
  Rng core_rng = rng.fork("core");
  for (Index b0 = 0; b0 < core; b0 += kRowBlock) {
    Index b1 = std::min(core, b0 + kRowBlock);
    Rng stream = core_rng.fork(static_cast<std::uint64_t>(b0));
    std::int64_t span = static_cast<std::int64_t>(b1 - b0) * core;
    bernoulli_block(stream, span, p_core, [&](std::int64_t t) {
      entries.emplace_back(b0 + static_cast<Index>(t / core),
                           static_cast<Index>(t % core));
    });
  }
  // boosted band: rows < core with cols >= core, then full rows >= core
  Rng band_rng = rng.fork("band");
  for (Index b0 = 0; b0 < core; b0 += kRowBlock) {
    Index b1 = std::min(core, b0 + kRowBlock);
    Rng stream = band_rng.fork(static_cast<std::uint64_t>(b0));
    std::int64_t span = static_cast<std::int64_t>(b1 - b0) * ell;
    bernoulli_block(stream, span, p_boost, [&](std::int64_t t) {
      entries.emplace_back(b0 + static_cast<Index>(t / ell),
                           core + static_cast<Index>(t % ell));
    });
  }
  Rng tail_rng = rng.fork("tail");
  for (Index b0 = core; b0 < n; b0 += kRowBlock) {
    Index b1 = std::min(n, b0 + kRowBlock);
    Rng stream = tail_rng.fork(static_cast<std::uint64_t>(b0));
    std::int64_t span = static_cast<std::int64_t>(b1 - b0) * n;
    bernoulli_block(stream, span, p_boost, [&](std::int64_t t) {
      entries.emplace_back(b0 + static_cast<Index>(t / n),
                           static_cast<Index>(t % n));
    });
  }
  return BinaryMatrix(n, n, std::move(entries));
}

DegreeLaw rho_degree_law(const ModelParams& params) {
  DegreeLaw law;
  law.d = params.d;
  law.delta = params.delta;
  law.eps = params.eps();
  // gamma = eps * E[X 1_{min(X,Y)>=Delta}] / d  with X,Y iid Pois(d);
  // E[X 1_{X>=Delta}] = d P(Pois(d) >= Delta-1) collapses it to
  // eps^2 * P(Pois(d) >= Delta-1).
  law.gamma = law.eps * law.eps *
              poisson_tail_eps(params.d, std::max(0, params.delta - 1));
  law.a_max = params.delta + 12 * static_cast<int>(std::ceil(params.d));
  require(law.a_max >= 1, "rho_degree_law: empty truncation window");
  if (poisson_tail_eps(params.d, law.a_max + 1) > 1e-12)
    throw tolerance_not_met("rho_degree_law: truncation tail above 1e-12");
  return law;
}

double DegreeLaw::rho(int j, int k) const {
  require(j >= 0 && k >= 0, "rho: degrees must be non-negative");
  if (j > a_max || k > a_max) return 0.0;
  // thinning: a stub survives extraction with probability 1-gamma
  auto thin = [&](int a, int x) {
    if (x > a) return 0.0;
    double logc = std::lgamma(a + 1.0) - std::lgamma(x + 1.0) -
                  std::lgamma(a - x + 1.0);
    double lg = (a - x) * (gamma > 0.0 ? std::log(gamma) : (a == x ? 0.0 : -1e300));
    return std::exp(logc + lg + x * std::log1p(-gamma));
  };
  double eps3 = eps * eps * eps;
  double total = 0.0;
  for (int a = j; a <= a_max; ++a) {
    double pa = poisson_pmf(d, a) * thin(a, j);
    if (pa == 0.0) continue;
    for (int ap = k; ap <= a_max; ++ap) {
      double w = (1.0 - eps) + eps * (std::min(a, ap) < delta ? 1.0 : 0.0);
      total += pa * poisson_pmf(d, ap) * thin(ap, k) * w;
    }
  }
  return total / (1.0 - eps3);
}

CouplingStats coupling_stats(const BinaryMatrix& m, double d, double tau) {
  require(m.rows() == m.cols(), "coupling_stats: matrix must be square");
  const Index n = m.rows();
  require(n >= 1, "coupling_stats: empty matrix");
  CouplingStats out;
  std::vector<Index> s(n);
  for (Index k = 0; k < n; ++k) {
    s[k] = m.row_sum(k) + m.col_sum(k) - (m.at(k, k) ? 1 : 0);
    out.s_profile[s[k]] += 1;
  }
  // ratio = (1/n) sum_l S_l (tau n / d)^l ((1-tau)/(1-d/n))^(2n-1-l)
  double log_a = std::log(tau * n / d);
  double log_b = std::log1p(-tau) - std::log1p(-d / n);
  double max_term = -1e300;
  std::vector<double> logs;
  logs.reserve(out.s_profile.size());
  for (auto [l, cnt] : out.s_profile) {
    double lt = std::log(static_cast<double>(cnt)) + l * log_a +
                (2.0 * n - 1.0 - l) * log_b - std::log(static_cast<double>(n));
    logs.push_back(lt);
    max_term = std::max(max_term, lt);
  }
  double acc = 0.0;
  for (double lt : logs) acc += std::exp(lt - max_term);
  out.log_likelihood_ratio = max_term + std::log(acc);
  return out;
}

ConfigSample sample_configuration(const DegreeSequence& degs, Rng rng) {
  std::int64_t total_out = std::accumulate(degs.out.begin(), degs.out.end(), std::int64_t{0});
  std::int64_t total_in = std::accumulate(degs.in.begin(), degs.in.end(), std::int64_t{0});
  require(total_out == total_in, "sample_configuration: stub totals differ");
  ConfigSample cs;
  cs.cols = static_cast<Index>(degs.out.size());
  cs.rows = static_cast<Index>(degs.in.size());
  std::vector<Index> out_stubs, in_stubs;
  out_stubs.reserve(total_out);
  in_stubs.reserve(total_in);
  for (Index j = 0; j < cs.cols; ++j)
    for (Index t = 0; t < degs.out[j]; ++t) out_stubs.push_back(j);
  for (Index i = 0; i < cs.rows; ++i)
    for (Index t = 0; t < degs.in[i]; ++t) in_stubs.push_back(i);
  // Fisher-Yates on the in-stubs gives a uniform perfect matching
  for (std::int64_t k = static_cast<std::int64_t>(in_stubs.size()) - 1; k > 0; --k) {
    std::uint64_t r = rng.below(static_cast<std::uint64_t>(k + 1));
    std::swap(in_stubs[k], in_stubs[r]);
  }
  cs.edges.reserve(out_stubs.size());
  for (size_t k = 0; k < out_stubs.size(); ++k)
    cs.edges.emplace_back(in_stubs[k], out_stubs[k]);
  std::sort(cs.edges.begin(), cs.edges.end());
  cs.simple = std::adjacent_find(cs.edges.begin(), cs.edges.end()) == cs.edges.end();
  return cs;
}

BinaryMatrix ConfigSample::collapse() const {
  std::vector<Entry> uniq(edges);
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  return BinaryMatrix(rows, cols, std::move(uniq));
}

RegularityReport degseq_regular(const DegreeSequence& degs, double d, double mu,
                                double C, Index n) {
  RegularityReport rep;
  const Index m = static_cast<Index>(degs.out.size());
  require(static_cast<Index>(degs.in.size()) == m,
          "degseq_regular: sequence lengths differ");
  require(m >= 1 && n >= 1, "degseq_regular: empty sequence");

  double ratio = static_cast<double>(m) / n;
  if (ratio < 1.0 - mu || ratio > 1.0 + mu) {
    rep.violated_bullet = 1;
    return rep;
  }
  // bullet 2: sup over |S|=k of sum_{i in S}(d_i + d_i') is the top-k prefix
  std::vector<double> combined(m);
  for (Index i = 0; i < m; ++i)
    combined[i] = static_cast<double>(degs.out[i]) + degs.in[i];
  std::sort(combined.begin(), combined.end(), std::greater<double>());
  double prefix = 0.0;
  for (Index k = 1; k <= m; ++k) {
    prefix += combined[k - 1];
    double bound = C * (d + std::log(static_cast<double>(m) / k)) * k;
    if (prefix > bound) {
      rep.violated_bullet = 2;
      rep.witness_size = k;
      return rep;
    }
  }
  double sum_out = 0.0, sum_in = 0.0;
  for (Index i = 0; i < m; ++i) {
    sum_out += degs.out[i];
    sum_in += degs.in[i];
  }
  double dm = d * m;
  if (std::abs(sum_out - dm) > mu * dm || std::abs(sum_in - dm) > mu * dm) {
    rep.violated_bullet = 3;
    return rep;
  }
  double weighted = 0.0;
  for (Index i = 0; i < m; ++i)
    weighted += std::pow(d, -static_cast<double>(degs.out[i])) * degs.in[i];
  double target = std::exp(1.0) * d * std::exp(-d) * m;
  if (std::abs(weighted - target) > mu * target) {
    rep.violated_bullet = 4;
    return rep;
  }
  rep.regular = true;
  return rep;
}

}  // namespace spectra
