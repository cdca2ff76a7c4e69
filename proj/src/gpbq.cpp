#include "stochdispatch/gpbq.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "stochdispatch/errors.hpp"

namespace stochdispatch {

void validate_kernel(const KernelConfig& cfg) {
  if (!(cfg.tau > 0.0) || !(cfg.length > 0.0) || !(cfg.jitter >= 0.0)) {
    throw InputError("kernel needs tau > 0, length > 0, jitter >= 0");
  }
}

double kernel_eval(std::span<const double> a, std::span<const double> b,
                   const KernelConfig& cfg) {
  if (a.size() != b.size()) throw InputError("kernel arguments differ in dimension");
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return cfg.tau * cfg.tau * std::exp(-0.5 * d2 / (cfg.length * cfg.length));
}

double kernel_eval(double a, double b, const KernelConfig& cfg) {
  const double d = a - b;
  return cfg.tau * cfg.tau * std::exp(-0.5 * d * d / (cfg.length * cfg.length));
}

// -- GP posterior --

LossSurrogate::LossSurrogate(KernelConfig cfg, std::vector<std::vector<double>> points,
                             std::vector<double> values)
    : cfg_(cfg), points_(std::move(points)), values_(std::move(values)) {
  validate_kernel(cfg_);
  if (points_.size() != values_.size()) {
    throw InputError("surrogate needs one value per training point");
  }
  const auto n = static_cast<Eigen::Index>(points_.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = kernel_eval(points_[i], points_[j], cfg_);
    }
    k(i, i) += cfg_.jitter * cfg_.tau * cfg_.tau;
  }
  chol_.compute(k);
  if (chol_.info() != Eigen::Success) {
    throw NumericalError("Gram matrix is not positive definite");
  }
  alpha_ = chol_.solve(Eigen::Map<const Eigen::VectorXd>(values_.data(), n));
}

PosteriorMoments LossSurrogate::posterior(std::span<const double> x) const {
  const auto n = static_cast<Eigen::Index>(points_.size());
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks[i] = kernel_eval(points_[i], x, cfg_);
  PosteriorMoments m;
  m.mean = ks.dot(alpha_);
  const double prior = cfg_.tau * cfg_.tau;
  if (n == 0) {
    m.variance = prior;
    return m;
  }
  const Eigen::VectorXd v = chol_.matrixL().solve(ks);
  m.variance = prior - v.squaredNorm();
  return m;
}

PosteriorMoments gp_posterior(const LossSurrogate& s, std::span<const double> x) {
  return s.posterior(x);
}

// -- embeddings --

namespace {

bool use_closed_form(const ErrorDistribution& p, IntegrationMethod method) {
  if (method == IntegrationMethod::kClosedForm) {
    if (p.kind() != ErrorDistribution::Kind::kGaussian) {
      throw InputError("closed-form embedding requires a Gaussian distribution");
    }
    return true;
  }
  return method == IntegrationMethod::kAuto &&
         p.kind() == ErrorDistribution::Kind::kGaussian;
}

// Trapezoid weights times density at each grid node.
std::vector<double> weighted_density(const GridDistribution& g) {
  std::vector<double> wp(g.density);
  const double h = g.spacing();
  for (double& v : wp) v *= h;
  wp.front() *= 0.5;
  wp.back() *= 0.5;
  return wp;
}

// Grid embedding at a single location, skipping nodes where the kernel
// underflows relative to its peak.
double grid_embedding(double node, const GridDistribution& g,
                      const std::vector<double>& wp, const KernelConfig& cfg) {
  const double reach = 40.0 * cfg.length;  // exp(-800) is below double resolution
  const double h = g.spacing();
  const auto n = static_cast<std::ptrdiff_t>(g.size());
  const auto lo = std::clamp<std::ptrdiff_t>(
      static_cast<std::ptrdiff_t>(std::floor((node - reach - g.a) / h)), 0, n - 1);
  const auto hi = std::clamp<std::ptrdiff_t>(
      static_cast<std::ptrdiff_t>(std::ceil((node + reach - g.a) / h)), 0, n - 1);
  const double inv = 0.5 / (cfg.length * cfg.length);
  double s = 0.0;
  for (std::ptrdiff_t j = lo; j <= hi; ++j) {
    const double d = g.nodes[j] - node;
    s += wp[j] * std::exp(-inv * d * d);
  }
  return cfg.tau * cfg.tau * s;
}

double closed_embedding(double node, double mean, double sd, const KernelConfig& cfg) {
  const double l2 = cfg.length * cfg.length, s2 = sd * sd;
  const double d = node - mean;
  return cfg.tau * cfg.tau * std::sqrt(l2 / (l2 + s2)) * std::exp(-0.5 * d * d / (l2 + s2));
}

// Evaluates w(x) for one distribution/kernel pair with the grid weights cached.
class Embedder {
 public:
  Embedder(const ErrorDistribution& p, const KernelConfig& cfg, IntegrationMethod method)
      : p_(p), cfg_(cfg), closed_(use_closed_form(p, method)) {
    if (!closed_) wp_ = weighted_density(p.grid());
  }
  double operator()(double node) const {
    return closed_ ? closed_embedding(node, p_.gaussian_mean(), p_.gaussian_sd(), cfg_)
                   : grid_embedding(node, p_.grid(), wp_, cfg_);
  }

 private:
  const ErrorDistribution& p_;
  const KernelConfig& cfg_;
  bool closed_;
  std::vector<double> wp_;
};

}  // namespace

std::vector<double> embedding_w(std::span<const double> nodes,
                                const ErrorDistribution& p, const KernelConfig& cfg,
                                IntegrationMethod method) {
  validate_kernel(cfg);
  const Embedder embed(p, cfg, method);
  std::vector<double> w(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) w[i] = embed(nodes[i]);
  return w;
}

double prior_integral_z(const ErrorDistribution& p, const KernelConfig& cfg,
                        IntegrationMethod method) {
  validate_kernel(cfg);
  if (use_closed_form(p, method)) {
    const double l = cfg.length, s = p.gaussian_sd();
    return cfg.tau * cfg.tau * l / std::sqrt(l * l + 2.0 * s * s);
  }
  // The kernel depends only on the node offset, so tabulate it once.
  const GridDistribution& g = p.grid();
  const std::vector<double> wp = weighted_density(g);
  const std::size_t n = g.size();
  const double h = g.spacing();
  const double inv = 0.5 / (cfg.length * cfg.length);
  double z = 0.0;
  for (std::size_t off = 0; off < n; ++off) {
    const double d = h * static_cast<double>(off);
    const double k = std::exp(-inv * d * d);
    if (k == 0.0) break;
    double corr = 0.0;
    for (std::size_t j = 0; j + off < n; ++j) corr += wp[j] * wp[j + off];
    z += (off == 0 ? 1.0 : 2.0) * k * corr;
  }
  return cfg.tau * cfg.tau * z;
}

Eigen::MatrixXd gram_matrix(std::span<const double> nodes, const KernelConfig& cfg) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i) = kernel_eval(nodes[i], nodes[j], cfg);
    k(i, i) = cfg.tau * cfg.tau * (1.0 + cfg.jitter);
  }
  return k;
}

namespace {

Eigen::LLT<Eigen::MatrixXd> factor(std::span<const double> nodes, const KernelConfig& cfg) {
  Eigen::LLT<Eigen::MatrixXd> llt(gram_matrix(nodes, cfg));
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Gram matrix is singular despite jitter");
  }
  return llt;
}

}  // namespace

double bq_variance(std::span<const double> nodes, const ErrorDistribution& p,
                   const KernelConfig& cfg, IntegrationMethod method) {
  const double z = prior_integral_z(p, cfg, method);
  if (nodes.empty()) return z;
  const std::vector<double> w = embedding_w(nodes, p, cfg, method);
  const auto llt = factor(nodes, cfg);
  const Eigen::VectorXd v =
      llt.matrixL().solve(Eigen::Map<const Eigen::VectorXd>(w.data(), w.size()));
  return z - v.squaredNorm();
}

BQRule bq_weights(std::span<const double> nodes, const ErrorDistribution& p,
                  const KernelConfig& cfg, IntegrationMethod method) {
  BQRule rule;
  rule.nodes.assign(nodes.begin(), nodes.end());
  rule.embedding = embedding_w(nodes, p, cfg, method);
  rule.prior_integral = prior_integral_z(p, cfg, method);
  if (nodes.empty()) {
    rule.variance = rule.prior_integral;
    return rule;
  }
  const auto llt = factor(nodes, cfg);
  Eigen::Map<const Eigen::VectorXd> w(rule.embedding.data(), rule.embedding.size());
  Eigen::VectorXd gamma = llt.solve(w);
  // The jittered factor only stabilizes the solve; refine toward K^{-1} w on
  // the bare Gram matrix while the residual keeps shrinking.
  Eigen::MatrixXd k = gram_matrix(nodes, cfg);
  k.diagonal().array() -= cfg.jitter * cfg.tau * cfg.tau;
  double residual = (w - k * gamma).norm();
  for (int pass = 0; pass < 3 && residual > 0.0; ++pass) {
    const Eigen::VectorXd next = gamma + llt.solve(w - k * gamma);
    const double r = (w - k * next).norm();
    if (!(r < 0.5 * residual)) break;
    gamma = next;
    residual = r;
  }
  const Eigen::VectorXd v = llt.matrixL().solve(w);
  rule.weights.assign(gamma.data(), gamma.data() + gamma.size());
  rule.variance = rule.prior_integral - v.squaredNorm();
  return rule;
}

double bq_estimate(const BQRule& rule, std::span<const double> values) {
  if (values.size() != rule.weights.size()) {
    throw InputError("need one loss value per quadrature node");
  }
  return std::inner_product(values.begin(), values.end(), rule.weights.begin(), 0.0);
}

ProjectedWeights project_nonnegative(std::span<const double> weights) {
  ProjectedWeights out;
  out.weights.assign(weights.begin(), weights.end());
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double positive = 0.0;
  for (double& w : out.weights) {
    if (w < 0.0) {
      w = 0.0;
      out.projected = true;
    }
    positive += w;
  }
  if (!out.projected) return out;
  if (!(positive > 0.0) || !(total > 0.0)) {
    throw NumericalError("quadrature weights have no positive mass to project onto");
  }
  for (double& w : out.weights) w *= total / positive;
  return out;
}

// -- node selection --

namespace {

// For a fixed set of other nodes, the increase in w^T K^{-1} w obtained by
// adding a node at x:  (w(x) - k_x^T K^{-1} w)^2 / (k(x,x) - k_x^T K^{-1} k_x).
class GainFunction {
 public:
  GainFunction(const std::vector<double>& others, const Embedder& embed,
               const KernelConfig& cfg)
      : others_(others), embed_(embed), cfg_(cfg) {
    const auto n = static_cast<Eigen::Index>(others.size());
    if (n > 0) {
      llt_ = factor(others, cfg);
      Eigen::VectorXd w(n);
      for (Eigen::Index i = 0; i < n; ++i) w[i] = embed(others[i]);
      alpha_ = llt_.solve(w);
      base_ = w.dot(alpha_);
    }
  }

  double base() const { return base_; }

  double operator()(double x) const { return gain(x, embed_(x)); }

  double gain(double x, double wx) const {
    const auto n = static_cast<Eigen::Index>(others_.size());
    const double kxx = cfg_.tau * cfg_.tau * (1.0 + cfg_.jitter);
    if (n == 0) return wx * wx / kxx;
    Eigen::VectorXd kx(n);
    for (Eigen::Index i = 0; i < n; ++i) kx[i] = kernel_eval(others_[i], x, cfg_);
    const double resid = wx - kx.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(kx);
    const double schur = std::max(kxx - v.squaredNorm(), cfg_.jitter * cfg_.tau * cfg_.tau);
    return resid * resid / schur;
  }

 private:
  const std::vector<double>& others_;
  const Embedder& embed_;
  const KernelConfig& cfg_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double base_ = 0.0;
};

struct Candidate {
  double x;
  double gain;
};

// Larger gain wins; near-ties (relative 1e-9) go to the smaller node.
bool better(const Candidate& a, const Candidate& b) {
  const double scale = std::max({std::abs(a.gain), std::abs(b.gain), 1e-300});
  if (std::abs(a.gain - b.gain) <= 1e-9 * scale) return a.x < b.x;
  return a.gain > b.gain;
}

template <typename F>
Candidate golden_refine(F&& f, double lo, double hi, double tol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = f(x1);
    }
  }
  return f1 >= f2 ? Candidate{x1, f1} : Candidate{x2, f2};
}

// Golden section cannot place a flat maximum closer than ~sqrt(eps) of the
// bracket. Newton steps on Richardson-extrapolated central differences
// (step h, error O(h^4)) take it to the stationary point.
template <typename F>
Candidate newton_finish(F&& f, Candidate c, double lo, double hi, double h,
                        double max_step, int iterations = 4) {
  for (int it = 0; it < iterations; ++it) {
    const double x = c.x;
    if (x - h < lo || x + h > hi) break;
    const double fp1 = f(x + h), fm1 = f(x - h);
    const double fp2 = f(x + 0.5 * h), fm2 = f(x - 0.5 * h);
    const double d_h = (fp1 - fm1) / (2.0 * h), d_h2 = (fp2 - fm2) / h;
    const double dd_h = (fp1 - 2.0 * c.gain + fm1) / (h * h);
    const double dd_h2 = (fp2 - 2.0 * c.gain + fm2) / (0.25 * h * h);
    const double d1 = (4.0 * d_h2 - d_h) / 3.0;
    const double d2 = (4.0 * dd_h2 - dd_h) / 3.0;
    if (!(d2 < 0.0)) break;
    const double step = std::clamp(-d1 / d2, -max_step, max_step);
    if (!std::isfinite(step)) break;
    const Candidate next{x + step, f(x + step)};
    if (next.gain < c.gain - 1e-12 * std::abs(c.gain)) break;
    c = next;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
  }
  return c;
}

class NodeSearch {
 public:
  NodeSearch(const ErrorDistribution& p, const KernelConfig& cfg,
             const SelectOptions& opt, const Embedder& embed)
      : cfg_(cfg), opt_(opt), embed_(embed) {
    const GridDistribution& g = p.grid();
    lo_ = g.a;
    hi_ = g.b;
    const int m = std::max(opt.scan_points, 3);
    scan_x_.resize(m);
    scan_w_.resize(m);
    for (int i = 0; i < m; ++i) {
      scan_x_[i] = (i + 1 == m) ? hi_ : lo_ + (hi_ - lo_) * i / (m - 1);
      scan_w_[i] = embed(scan_x_[i]);
    }
    tol_ = opt.tolerance * (hi_ - lo_);
  }

  // Best position for one more node given `others`.
  Candidate best(const std::vector<double>& others) const {
    const GainFunction gain(others, embed_, cfg_);
    const int m = static_cast<int>(scan_x_.size());
    std::vector<double> g(m);
    for (int i = 0; i < m; ++i) g[i] = gain.gain(scan_x_[i], scan_w_[i]);

    std::vector<int> peaks;
    for (int i = 0; i < m; ++i) {
      const bool left = i == 0 || g[i] >= g[i - 1];
      const bool right = i + 1 == m || g[i] >= g[i + 1];
      if (left && right) peaks.push_back(i);
    }
    std::stable_sort(peaks.begin(), peaks.end(), [&](int a, int b) {
      return better({scan_x_[a], g[a]}, {scan_x_[b], g[b]});
    });
    if (static_cast<int>(peaks.size()) > opt_.refine_starts) peaks.resize(opt_.refine_starts);
    if (opt_.shuffle_seed != 0) {
      std::mt19937 rng(opt_.shuffle_seed);
      std::shuffle(peaks.begin(), peaks.end(), rng);
    }

    Candidate result{scan_x_[peaks.front()], g[peaks.front()]};
    bool first = true;
    for (int i : peaks) {
      const double a = scan_x_[std::max(i - 1, 0)];
      const double b = scan_x_[std::min(i + 1, m - 1)];
      Candidate c = golden_refine(gain, a, b, tol_);
      c = newton_finish(gain, c, lo_, hi_, 1e-3 * cfg_.length, 1e-3 * cfg_.length);
      if (better({scan_x_[i], g[i]}, c)) c = {scan_x_[i], g[i]};
      if (first || better(c, result)) result = c;
      first = false;
    }
    return result;
  }

  double tolerance() const { return tol_; }
  double scan_spacing() const { return (hi_ - lo_) / static_cast<double>(scan_x_.size() - 1); }

 private:
  const KernelConfig& cfg_;
  const SelectOptions& opt_;
  const Embedder& embed_;
  double lo_ = 0.0, hi_ = 0.0, tol_ = 0.0;
  std::vector<double> scan_x_, scan_w_;
};

}  // namespace

std::vector<double> select_points(int n, const ErrorDistribution& p,
                                  const KernelConfig& cfg, const SelectOptions& opt) {
  validate_kernel(cfg);
  if (n < 1) throw InputError("select_points needs n >= 1");
  const Embedder embed(p, cfg, IntegrationMethod::kAuto);
  const NodeSearch search(p, cfg, opt, embed);

  std::vector<double> nodes;
  nodes.reserve(n);
  for (int k = 0; k < n; ++k) nodes.push_back(search.best(nodes).x);

  // Cyclic coordinate polish. A node jumps to the multistart optimum only
  // when that lies in another scan cell and clearly beats the current spot;
  // otherwise it takes a local Newton step. Jumps stop after the first
  // round without one; Newton sweeps continue until nodes settle.
  auto others_of = [&](int i) {
    std::vector<double> others;
    others.reserve(n - 1);
    for (int j = 0; j < n; ++j) {
      if (j != i) others.push_back(nodes[j]);
    }
    return others;
  };
  const double h = 1e-3 * cfg.length;
  bool jumps = true;
  for (int round = 0; round < opt.max_polish_rounds && n > 1; ++round) {
    double moved = 0.0;
    bool jumped = false;
    for (int i = 0; i < n; ++i) {
      const std::vector<double> others = others_of(i);
      const GainFunction gain(others, embed, cfg);
      Candidate current{nodes[i], gain(nodes[i])};
      if (jumps) {
        const Candidate c = search.best(others);
        if (std::abs(c.x - nodes[i]) > search.scan_spacing() &&
            c.gain > current.gain * (1.0 + 1e-9)) {
          moved = std::max(moved, std::abs(c.x - nodes[i]));
          nodes[i] = c.x;
          jumped = true;
          continue;
        }
      }
      current = newton_finish(gain, current, p.grid().a, p.grid().b, h, search.scan_spacing(), 8);
      moved = std::max(moved, std::abs(current.x - nodes[i]));
      nodes[i] = current.x;
    }
    if (!jumped) jumps = false;
    spdlog::debug("polish round {} moved {:.3g} jumped {}", round, moved, jumped);
    if (!jumped && moved <= search.tolerance()) break;
  }
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

}  // namespace stochdispatch
