#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace stochdispatch {

struct TParams {
  double location = 0.0;
  double scale = 1.0;
  double dof = 5.0;
};

// Density tabulated on equally spaced nodes over [a, b]. The density
// integrates to one under the trapezoidal rule; `cumulative` holds the
// running trapezoid sums (0 at a, 1 at b).
struct GridDistribution {
  double a = 0.0;
  double b = 1.0;
  std::vector<double> nodes;
  std::vector<double> density;
  std::vector<double> cumulative;

  std::size_t size() const { return nodes.size(); }
  double spacing() const { return (b - a) / static_cast<double>(nodes.size() - 1); }
  // Linear interpolation of the tabulated density; 0 outside [a, b].
  double density_at(double x) const;
  // Density of the distribution sample_grid actually draws from: the
  // probability of the cell containing x divided by its width.
  double cell_density(double x) const;
  std::size_t cell_of(double x) const;
  double mean() const;
  bool same_layout(const GridDistribution& other) const;
};

double trapezoid(std::span<const double> values, double spacing);

std::vector<double> persistence_errors(std::span<const double> series);

double pdf_t(double x, const TParams& p);
// Adaptive Gauss-Kronrod integral of pdf_t from the location outward.
double cdf_t(double x, const TParams& p);
double log_likelihood_t(std::span<const double> data, const TParams& p);

struct FitOptions {
  double min_dof = 1.5;
  double max_dof = 200.0;
  double tolerance = 1e-8;
  int max_iterations = 5000;
};

struct FitTrace {
  TParams params;
  std::vector<double> log_likelihood;  // one entry per iteration, starting value first
  int iterations = 0;
  bool converged = false;
};

// Maximum likelihood by EM reweighting of location/scale with a golden-section
// search over log(dof) after every M-step.
FitTrace fit_student_t_traced(std::span<const double> errors,
                              const FitOptions& options = {});
TParams fit_student_t(std::span<const double> errors, const FitOptions& options = {});

GridDistribution build_grid(const std::function<double(double)>& pdf, double a,
                            double b, int n);
// Same as above from density values already tabulated at the n nodes.
GridDistribution build_grid_from_values(std::vector<double> values, double a, double b);

// Inverse CDF with linear interpolation of the cumulative between nodes.
double sample_grid(const GridDistribution& grid, double u);

// Nominal forecast-error distribution p(xi) in one dimension. Every kind
// carries a grid used for sampling and numeric integration; Student-t and
// Gaussian kinds also keep their closed-form density.
class ErrorDistribution {
 public:
  enum class Kind { kStudentT, kGaussian, kGrid, kPointMass };

  static constexpr int kDefaultNodes = 2001;

  static ErrorDistribution student_t(const TParams& params, int nodes = kDefaultNodes);
  static ErrorDistribution gaussian(double mean, double sd, int nodes = kDefaultNodes);
  static ErrorDistribution from_grid(GridDistribution grid);
  // Zero-variance error (a perfect forecast). Samples are exactly `at`; the
  // grid is a narrow triangle kept only so grid consumers stay well formed.
  static ErrorDistribution point_mass(double at);

  Kind kind() const { return kind_; }
  const GridDistribution& grid() const { return grid_; }
  const std::optional<TParams>& t_params() const { return t_; }
  double gaussian_mean() const { return mean_; }
  double gaussian_sd() const { return sd_; }

  double pdf(double x) const;
  double sample(double u) const {
    return kind_ == Kind::kPointMass ? mean_ : sample_grid(grid_, u);
  }
  bool degenerate() const { return kind_ == Kind::kPointMass; }
  double location() const;
  // Standard deviation, or the heavy-tail surrogate 10*scale when dof <= 2.
  double spread() const;

 private:
  Kind kind_ = Kind::kGrid;
  GridDistribution grid_;
  std::optional<TParams> t_;
  double mean_ = 0.0;
  double sd_ = 1.0;
};

// Default grid support half-width for a t fit: 8 standard deviations
// (10*scale stands in for the deviation when dof <= 2).
double t_spread(const TParams& p);

}  // namespace stochdispatch
