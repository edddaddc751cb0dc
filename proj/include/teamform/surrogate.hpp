#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <algorithm>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "teamform/params.hpp"
#include "teamform/rng.hpp"

namespace teamform::surrogate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct KernelHyper {
  double signal_variance = 1.0;
  Vector lengthscales;  // one per input dimension
  double noise_variance = 1e-2;
};

/// Matern-5/2 covariance with per-dimension lengthscales:
///   s2 * (1 + sqrt(5) r + 5 r^2 / 3) * exp(-sqrt(5) r),
///   r^2 = sum_d ((a_d - b_d) / l_d)^2.
template <typename DerivedA, typename DerivedB>
double matern52_ard(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                    const KernelHyper& hyper) {
  // a and b may be rows or columns
  double r2 = 0.0;
  for (Eigen::Index d = 0; d < a.size(); ++d) {
    const double z = (a(d) - b(d)) / hyper.lengthscales(d);
    r2 += z * z;
  }
  const double r = std::sqrt(r2);
  const double s5r = std::sqrt(5.0) * r;
  return hyper.signal_variance * (1.0 + s5r + 5.0 * r * r / 3.0) * std::exp(-s5r);
}

/// Covariance between the rows of a and the rows of b (no noise term).
Matrix cross_kernel(const Matrix& a, const Matrix& b, const KernelHyper& hyper);

/// Symmetric covariance of the rows of x (no noise term).
inline Matrix kernel_matrix(const Matrix& x, const KernelHyper& hyper) { return cross_kernel(x, x, hyper); }

struct FitOptions {
  int restarts = 5;
  int max_iterations = 200;
  double tolerance = 1e-6;
  /// Holds the noise variance (standardized units) fixed when set.
  std::optional<double> fixed_noise;
  std::uint64_t seed = 0;
};

/// Gaussian-process regression on inputs already scaled to the unit cube.
/// Targets are standardized internally and predictions are reported in the
/// original units.
class GprModel {
 public:
  GprModel() = default;

  /// Maximizes the log marginal likelihood over signal variance, ARD
  /// lengthscales and noise variance by multi-start gradient ascent in
  /// log-parameter space. Throws std::invalid_argument with fewer than two
  /// points.
  static GprModel fit(const Matrix& x, const Vector& y, const FitOptions& options = {});

  /// Conditions on the data with fixed hyperparameters.
  static GprModel with_hyper(const Matrix& x, const Vector& y, const KernelHyper& hyper);

  /// Posterior mean and variance (including observation noise) at one point.
  std::pair<double, double> predict(const Vector& x) const;

  /// Row-wise predictions for a batch of points.
  void predict_batch(const Matrix& x, Vector& mean, Vector& variance) const;
  Vector predict_mean(const Matrix& x) const;

  const KernelHyper& hyper() const { return hyper_; }
  /// Log marginal likelihood of the standardized targets.
  double log_marginal_likelihood() const { return lml_; }
  /// Likelihood at the default starting hyperparameters, before fitting.
  double initial_log_marginal_likelihood() const { return initial_lml_; }
  double jitter() const { return jitter_; }
  bool degenerate() const { return degenerate_; }
  double target_mean() const { return y_mean_; }
  double target_scale() const { return y_scale_; }
  Eigen::Index dims() const { return x_.cols(); }
  Eigen::Index size() const { return x_.rows(); }

  /// Default starting hyperparameters for `dims` inputs.
  static KernelHyper default_hyper(Eigen::Index dims);

 private:
  void condition(const KernelHyper& hyper);

  Matrix x_;
  Vector y_std_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  KernelHyper hyper_;
  Eigen::LLT<Matrix> llt_;
  Vector alpha_;
  double lml_ = 0.0;
  double initial_lml_ = 0.0;
  double jitter_ = 0.0;
  bool degenerate_ = false;
};

/// Log marginal likelihood of standardized targets, optionally with its
/// gradient with respect to (log s2, log l_1..l_D, log noise). Returns -inf
/// when the covariance cannot be factorized with jitter up to 1e-6.
double log_marginal_likelihood(const Matrix& x, const Vector& y, const KernelHyper& hyper,
                               Vector* gradient = nullptr);

// --- Experimental parameter space -------------------------------------------------

using ParamVector = GenParams;

struct Observation {
  ParamVector x;
  double y = 0.0;
  bool feasible = false;
};

/// Maps each parameter onto [0, 1] using its experimental range.
Vector normalize(const ParamVector& p);
double normalize(std::size_t dim, double value);

/// Fits on the feasible observations only. Throws std::invalid_argument when
/// fewer than two feasible rows with distinct inputs remain.
GprModel fit_gpr(const std::vector<Observation>& observations, const FitOptions& options = {});

std::pair<double, double> predict(const GprModel& model, const ParamVector& p);

/// Uniform draw from the valid integer lattice (L among 300, 450, 600).
ParamVector random_param_vector(Rng& rng);

/// Admissible values of one parameter. Ranges wider than max_levels are
/// thinned to max_levels evenly spaced integers including both ends.
std::vector<int> axis_values(std::size_t dim, std::size_t max_levels = 0);

struct AcquisitionConfig {
  double weight = 5.0;
  bool deduplicate = true;
  std::size_t pool_size = 4096;
};

/// Maximizes mean + weight * stddev over a random pool of valid vectors,
/// skipping any vector already in history when de-duplication is on.
/// Throws std::runtime_error if the pool stays empty after one enlargement.
ParamVector next_point(const GprModel& model, const AcquisitionConfig& config,
                       const std::vector<ParamVector>& history, Rng& rng);

// --- Marginal analyses ------------------------------------------------------------

template <typename M>
concept BatchPredictor = requires(const M& m, const Matrix& x, Vector& mean, Vector& var) {
  m.predict_batch(x, mean, var);
  { m.predict_mean(x) } -> std::convertible_to<Vector>;
};

struct CurvePoint {
  int value = 0;
  double mean = 0.0;
  double variance = 0.0;  // averaged posterior variance
  double lower = 0.0;     // mean - 1.96 sqrt(variance)
  double upper = 0.0;
};

/// n_samples normalized parameter vectors drawn uniformly from the lattice.
Matrix sample_normalized(std::size_t n_samples, Rng& rng);

template <BatchPredictor M>
std::vector<CurvePoint> marginal_curve(const M& model, std::size_t dim, std::size_t n_samples, Rng& rng,
                                       std::size_t max_levels = 0) {
  Matrix samples = sample_normalized(n_samples, rng);
  std::vector<CurvePoint> curve;
  Vector mean, var;
  for (int value : axis_values(dim, max_levels)) {
    samples.col(static_cast<Eigen::Index>(dim)).setConstant(normalize(dim, value));
    model.predict_batch(samples, mean, var);
    CurvePoint pt;
    pt.value = value;
    pt.mean = mean.mean();
    pt.variance = var.mean();
    const double half = 1.96 * std::sqrt(pt.variance);
    pt.lower = pt.mean - half;
    pt.upper = pt.mean + half;
    curve.push_back(pt);
  }
  return curve;
}

/// Max minus min of the marginalized mean as `dim` varies over its levels.
template <BatchPredictor M>
double average_variation(const M& model, std::size_t dim, std::size_t n_samples, Rng& rng,
                         std::size_t max_levels = 0) {
  Matrix samples = sample_normalized(n_samples, rng);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int value : axis_values(dim, max_levels)) {
    samples.col(static_cast<Eigen::Index>(dim)).setConstant(normalize(dim, value));
    const double m = model.predict_mean(samples).mean();
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  return hi - lo;
}

/// Entry (row p2, column p1): the largest variation of p1 over all fixed
/// values of p2, minus p1's average variation. Each fixed p2 value draws its
/// own sample set for the remaining parameters. The diagonal is zero.
template <BatchPredictor M>
Matrix variation_matrix(const M& model, std::size_t n_samples, Rng& rng, std::size_t max_levels = 0) {
  constexpr auto D = static_cast<Eigen::Index>(GenParams::kDims);
  Vector average(D);
  for (Eigen::Index d = 0; d < D; ++d) {
    average(d) = average_variation(model, static_cast<std::size_t>(d), n_samples, rng, max_levels);
  }
  Matrix table = Matrix::Zero(D, D);
  for (Eigen::Index row = 0; row < D; ++row) {
    for (Eigen::Index col = 0; col < D; ++col) {
      if (row == col) continue;
      double widest = -std::numeric_limits<double>::infinity();
      for (int fixed : axis_values(static_cast<std::size_t>(row), max_levels)) {
        Matrix samples = sample_normalized(n_samples, rng);
        samples.col(row).setConstant(normalize(static_cast<std::size_t>(row), fixed));
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int value : axis_values(static_cast<std::size_t>(col), max_levels)) {
          samples.col(col).setConstant(normalize(static_cast<std::size_t>(col), value));
          const double m = model.predict_mean(samples).mean();
          lo = std::min(lo, m);
          hi = std::max(hi, m);
        }
        widest = std::max(widest, hi - lo);
      }
      table(row, col) = widest - average(col);
    }
  }
  return table;
}

struct Heatmap {
  std::size_t row_dim = 0;
  std::size_t col_dim = 0;
  std::vector<int> row_values;
  std::vector<int> col_values;
  Matrix mean;  // row_values.size() x col_values.size()
};

/// Marginalized predicted mean over a grid of two parameters; one sample set
/// for the remaining six is shared by every cell.
template <BatchPredictor M>
Heatmap heatmap_grid(const M& model, std::size_t row_dim, std::size_t col_dim, std::size_t n_samples,
                     Rng& rng, std::size_t max_levels = 0) {
  Heatmap h;
  h.row_dim = row_dim;
  h.col_dim = col_dim;
  h.row_values = axis_values(row_dim, max_levels);
  h.col_values = axis_values(col_dim, max_levels);
  h.mean.resize(static_cast<Eigen::Index>(h.row_values.size()), static_cast<Eigen::Index>(h.col_values.size()));
  Matrix samples = sample_normalized(n_samples, rng);
  for (std::size_t r = 0; r < h.row_values.size(); ++r) {
    samples.col(static_cast<Eigen::Index>(row_dim)).setConstant(normalize(row_dim, h.row_values[r]));
    for (std::size_t c = 0; c < h.col_values.size(); ++c) {
      samples.col(static_cast<Eigen::Index>(col_dim)).setConstant(normalize(col_dim, h.col_values[c]));
      h.mean(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = model.predict_mean(samples).mean();
    }
  }
  return h;
}

}  // namespace teamform::surrogate
