#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <span>
#include <vector>

#include "stochdispatch/forecastdist.hpp"

namespace stochdispatch {

// Squared-exponential kernel tau^2 exp(-|a-b|^2 / (2 l^2)). Jitter is
// relative to tau^2 and lands on the Gram diagonal.
struct KernelConfig {
  double tau = 1.0;
  double length = 1.0;
  double jitter = 1e-10;
};

void validate_kernel(const KernelConfig& cfg);

double kernel_eval(std::span<const double> a, std::span<const double> b,
                   const KernelConfig& cfg);
double kernel_eval(double a, double b, const KernelConfig& cfg);

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Zero-mean GP conditioned on loss evaluations at training points.
class LossSurrogate {
 public:
  LossSurrogate(KernelConfig cfg, std::vector<std::vector<double>> points,
                std::vector<double> values);

  PosteriorMoments posterior(std::span<const double> x) const;

  const KernelConfig& kernel() const { return cfg_; }
  const std::vector<std::vector<double>>& points() const { return points_; }
  const std::vector<double>& values() const { return values_; }

 private:
  KernelConfig cfg_;
  std::vector<std::vector<double>> points_;
  std::vector<double> values_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;  // K^{-1} L
};

PosteriorMoments gp_posterior(const LossSurrogate& s, std::span<const double> x);

enum class IntegrationMethod {
  kAuto,        // closed form for Gaussian p, grid trapezoid otherwise
  kClosedForm,  // Gaussian p only
  kGrid,
};

// w_i = int k(xi, nodes_i) p(xi) dxi
std::vector<double> embedding_w(std::span<const double> nodes,
                                const ErrorDistribution& p, const KernelConfig& cfg,
                                IntegrationMethod method = IntegrationMethod::kAuto);
// Z = double integral of k against p x p.
double prior_integral_z(const ErrorDistribution& p, const KernelConfig& cfg,
                        IntegrationMethod method = IntegrationMethod::kAuto);

// Gram matrix with jitter * tau^2 added to the diagonal.
Eigen::MatrixXd gram_matrix(std::span<const double> nodes, const KernelConfig& cfg);

// Z - w^T K^{-1} w for the given nodes.
double bq_variance(std::span<const double> nodes, const ErrorDistribution& p,
                   const KernelConfig& cfg,
                   IntegrationMethod method = IntegrationMethod::kAuto);

struct BQRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // gamma = K^{-1} w, may be negative
  std::vector<double> embedding;
  double prior_integral = 0.0;
  double variance = 0.0;
};

BQRule bq_weights(std::span<const double> nodes, const ErrorDistribution& p,
                  const KernelConfig& cfg,
                  IntegrationMethod method = IntegrationMethod::kAuto);

double bq_estimate(const BQRule& rule, std::span<const double> values);

struct SelectOptions {
  int scan_points = 241;        // coarse multistart scan over the grid support
  int refine_starts = 8;        // best local maxima refined by golden section
  int max_polish_rounds = 400;  // cyclic coordinate polish after the greedy pass
  double tolerance = 1e-10;     // relative to the support width
  unsigned shuffle_seed = 0;    // nonzero permutes the order starts are refined in
};

// Greedy variance-reducing node placement followed by cyclic coordinate
// polish. Deterministic; ties go to the smallest node.
std::vector<double> select_points(int n, const ErrorDistribution& p,
                                  const KernelConfig& cfg,
                                  const SelectOptions& options = {});

struct ProjectedWeights {
  std::vector<double> weights;
  bool projected = false;  // true when some gamma was negative
};

// Clips negative weights to zero and rescales so the sum is unchanged.
// Throws NumericalError when the sum of the positive part cannot carry it.
ProjectedWeights project_nonnegative(std::span<const double> weights);

}  // namespace stochdispatch
