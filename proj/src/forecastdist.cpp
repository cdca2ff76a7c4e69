#include "stochdispatch/forecastdist.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "stochdispatch/errors.hpp"

namespace stochdispatch {

// -- grid --

std::size_t GridDistribution::cell_of(double x) const {
  const double h = spacing();
  const double pos = (x - a) / h;
  const auto last = static_cast<std::ptrdiff_t>(nodes.size()) - 2;
  auto j = static_cast<std::ptrdiff_t>(std::floor(pos));
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, last));
}

double GridDistribution::density_at(double x) const {
  if (x < a || x > b) return 0.0;
  const std::size_t j = cell_of(x);
  const double t = (x - nodes[j]) / spacing();
  return density[j] + t * (density[j + 1] - density[j]);
}

double GridDistribution::cell_density(double x) const {
  if (x < a || x > b) return 0.0;
  const std::size_t j = cell_of(x);
  return (cumulative[j + 1] - cumulative[j]) / spacing();
}

double GridDistribution::mean() const {
  std::vector<double> xp(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) xp[i] = nodes[i] * density[i];
  return trapezoid(xp, spacing());
}

bool GridDistribution::same_layout(const GridDistribution& o) const {
  return nodes.size() == o.nodes.size() && a == o.a && b == o.b;
}

double trapezoid(std::span<const double> values, double spacing) {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * spacing;
}

GridDistribution build_grid_from_values(std::vector<double> values, double a, double b) {
  const std::size_t n = values.size();
  if (n < 2) throw InputError("grid needs at least two nodes");
  if (!(b > a)) throw InputError("grid support must satisfy b > a");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) throw InputError("grid density must be finite and >= 0");
  }
  GridDistribution g;
  g.a = a;
  g.b = b;
  g.nodes.resize(n);
  const double h = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g.nodes[i] = a + h * static_cast<double>(i);
  g.nodes.back() = b;

  const double total = trapezoid(values, h);
  if (!(total > 0.0)) throw InputError("density is identically zero on the grid support");
  for (double& v : values) v /= total;
  g.density = std::move(values);

  g.cumulative.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    g.cumulative[i] = g.cumulative[i - 1] + 0.5 * h * (g.density[i - 1] + g.density[i]);
  }
  const double end = g.cumulative.back();
  for (double& c : g.cumulative) c = std::min(c / end, 1.0);
  g.cumulative.back() = 1.0;
  return g;
}

GridDistribution build_grid(const std::function<double(double)>& pdf, double a,
                            double b, int n) {
  if (n < 2) throw InputError("grid needs at least two nodes");
  if (!(b > a)) throw InputError("grid support must satisfy b > a");
  std::vector<double> values(n);
  const double h = (b - a) / static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) values[i] = pdf(i + 1 == n ? b : a + h * i);
  return build_grid_from_values(std::move(values), a, b);
}

double sample_grid(const GridDistribution& grid, double u) {
  if (!(u > 0.0)) return grid.a;
  if (u >= 1.0) return grid.b;
  const auto& c = grid.cumulative;
  // First node with cumulative > u; the cell to its left has positive mass.
  const auto it = std::upper_bound(c.begin(), c.end(), u);
  const std::size_t j = static_cast<std::size_t>(it - c.begin()) - 1;
  const double width = c[j + 1] - c[j];
  const double t = (u - c[j]) / width;
  return grid.nodes[j] + t * (grid.nodes[j + 1] - grid.nodes[j]);
}

// -- persistence --

std::vector<double> persistence_errors(std::span<const double> series) {
  if (series.size() < 2) throw InputError("persistence errors need at least two values");
  std::vector<double> e(series.size() - 1);
  for (std::size_t t = 1; t < series.size(); ++t) e[t - 1] = series[t] - series[t - 1];
  return e;
}

// -- Student t --

namespace {

double log_norm_t(double dof, double scale) {
  return std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
         0.5 * std::log(dof * std::numbers::pi) - std::log(scale);
}

}  // namespace

double pdf_t(double x, const TParams& p) {
  const double z = (x - p.location) / p.scale;
  return std::exp(log_norm_t(p.dof, p.scale) -
                  0.5 * (p.dof + 1.0) * std::log1p(z * z / p.dof));
}

double cdf_t(double x, const TParams& p) {
  if (x == p.location) return 0.5;
  auto f = [&](double s) { return pdf_t(s, p); };
  const double lo = std::min(x, p.location), hi = std::max(x, p.location);
  double err = 0.0;
  const double half = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, lo, hi, 12, 1e-12, &err);
  return x > p.location ? 0.5 + half : 0.5 - half;
}

double log_likelihood_t(std::span<const double> data, const TParams& p) {
  const double c = log_norm_t(p.dof, p.scale);
  double ll = 0.0;
  for (double x : data) {
    const double z = (x - p.location) / p.scale;
    ll += c - 0.5 * (p.dof + 1.0) * std::log1p(z * z / p.dof);
  }
  return ll;
}

namespace {

// Maximizes f over [lo, hi] assuming unimodality.
template <typename F>
double golden_max(F&& f, double lo, double hi, double tol) {
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
  return f1 >= f2 ? x1 : x2;
}

}  // namespace

FitTrace fit_student_t_traced(std::span<const double> errors, const FitOptions& opt) {
  const std::size_t n = errors.size();
  if (n < 30) throw InputError("t fit needs at least 30 samples");
  const double mean = std::accumulate(errors.begin(), errors.end(), 0.0) / n;
  double var = 0.0;
  for (double x : errors) var += (x - mean) * (x - mean);
  var /= n;
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw InputError("t fit: data has zero variance");
  }

  // Robust start: median and scaled MAD, falling back to the moments.
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[n / 2];
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(sorted[i] - median);
  std::nth_element(dev.begin(), dev.begin() + n / 2, dev.end());
  double scale = 1.4826 * dev[n / 2];
  if (!(scale > 0.0)) scale = std::sqrt(var);

  const double log_lo = std::log(opt.min_dof), log_hi = std::log(opt.max_dof);
  TParams p{median, scale, 5.0};
  {
    double best = -INFINITY;
    for (int k = 0; k <= 40; ++k) {
      const double dof = std::exp(log_lo + (log_hi - log_lo) * k / 40.0);
      const double ll = log_likelihood_t(errors, {median, scale, dof});
      if (ll > best) {
        best = ll;
        p.dof = dof;
      }
    }
  }

  FitTrace trace;
  trace.log_likelihood.push_back(log_likelihood_t(errors, p));
  std::vector<double> w(n);
  for (int it = 0; it < opt.max_iterations; ++it) {
    const TParams prev = p;
    // E-step: latent precision weights.
    for (std::size_t i = 0; i < n; ++i) {
      const double z = (errors[i] - p.location) / p.scale;
      w[i] = (p.dof + 1.0) / (p.dof + z * z);
    }
    // M-step for location and scale.
    double sw = 0.0, swx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sw += w[i];
      swx += w[i] * errors[i];
    }
    p.location = swx / sw;
    double s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = errors[i] - p.location;
      s2 += w[i] * d * d;
    }
    p.scale = std::sqrt(s2 / n);

    // Conditional maximization over dof; only taken if it does not lose likelihood.
    auto ll_of = [&](double log_dof) {
      return log_likelihood_t(errors, {p.location, p.scale, std::exp(log_dof)});
    };
    const double cand = std::exp(golden_max(ll_of, log_lo, log_hi, 1e-10));
    const double ll_keep = log_likelihood_t(errors, p);
    TParams trial = p;
    trial.dof = cand;
    if (log_likelihood_t(errors, trial) >= ll_keep) p.dof = cand;

    trace.log_likelihood.push_back(log_likelihood_t(errors, p));
    trace.iterations = it + 1;
    const double change = std::max({std::abs(p.location - prev.location) / p.scale,
                                    std::abs(p.scale - prev.scale) / p.scale,
                                    std::abs(std::log(p.dof / prev.dof))});
    if (change < opt.tolerance) {
      trace.converged = true;
      break;
    }
  }
  trace.params = p;
  return trace;
}

TParams fit_student_t(std::span<const double> errors, const FitOptions& options) {
  return fit_student_t_traced(errors, options).params;
}

double t_spread(const TParams& p) {
  return p.dof > 2.0 ? p.scale * std::sqrt(p.dof / (p.dof - 2.0)) : 10.0 * p.scale;
}

// -- ErrorDistribution --

ErrorDistribution ErrorDistribution::student_t(const TParams& params, int nodes) {
  if (!(params.scale > 0.0) || !(params.dof > 1.0)) {
    throw InputError("t distribution needs scale > 0 and dof > 1");
  }
  ErrorDistribution d;
  d.kind_ = Kind::kStudentT;
  d.t_ = params;
  const double half = 8.0 * t_spread(params);
  d.grid_ = build_grid([&](double x) { return pdf_t(x, params); },
                       params.location - half, params.location + half, nodes);
  d.mean_ = params.location;
  d.sd_ = t_spread(params);
  return d;
}

ErrorDistribution ErrorDistribution::gaussian(double mean, double sd, int nodes) {
  if (!(sd > 0.0)) throw InputError("Gaussian distribution needs sd > 0");
  ErrorDistribution d;
  d.kind_ = Kind::kGaussian;
  d.mean_ = mean;
  d.sd_ = sd;
  const double half = 8.0 * sd;
  d.grid_ = build_grid(
      [&](double x) {
        const double z = (x - mean) / sd;
        return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
      },
      mean - half, mean + half, nodes);
  return d;
}

ErrorDistribution ErrorDistribution::from_grid(GridDistribution grid) {
  ErrorDistribution d;
  d.kind_ = Kind::kGrid;
  d.grid_ = std::move(grid);
  d.mean_ = d.grid_.mean();
  std::vector<double> v(d.grid_.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double x = d.grid_.nodes[i] - d.mean_;
    v[i] = x * x * d.grid_.density[i];
  }
  d.sd_ = std::sqrt(trapezoid(v, d.grid_.spacing()));
  return d;
}

ErrorDistribution ErrorDistribution::point_mass(double at) {
  if (!std::isfinite(at)) throw InputError("point mass location must be finite");
  ErrorDistribution d;
  d.kind_ = Kind::kPointMass;
  const double half = 1e-9 * (1.0 + std::abs(at));
  d.grid_ = build_grid_from_values({0.0, 1.0, 0.0}, at - half, at + half);
  d.mean_ = at;
  d.sd_ = 0.0;
  return d;
}

double ErrorDistribution::pdf(double x) const {
  switch (kind_) {
    case Kind::kStudentT:
      return pdf_t(x, *t_);
    case Kind::kGaussian: {
      const double z = (x - mean_) / sd_;
      return std::exp(-0.5 * z * z) / (sd_ * std::sqrt(2.0 * std::numbers::pi));
    }
    case Kind::kGrid:
    case Kind::kPointMass:
      break;
  }
  return grid_.density_at(x);
}

double ErrorDistribution::location() const { return t_ ? t_->location : mean_; }

double ErrorDistribution::spread() const { return sd_; }

}  // namespace stochdispatch
