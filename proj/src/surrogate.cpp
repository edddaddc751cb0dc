#include "teamform/surrogate.hpp"

#include <array>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>

namespace teamform::surrogate {

namespace {

constexpr std::array<double, 6> kJitterLadder{0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

// Box for the log-parameters during fitting.
constexpr double kLogSignalMin = -13.8;  // ~1e-6
constexpr double kLogSignalMax = 6.9;    // ~1e3
constexpr double kLogLengthMin = -4.6;   // ~1e-2
constexpr double kLogLengthMax = 6.9;
constexpr double kLogNoiseMin = -18.4;   // ~1e-8
constexpr double kLogNoiseMax = 2.3;     // ~10

constexpr Eigen::Index kPredictChunk = 4096;

// Pairwise scaled distances r_ij between rows of a and rows of b.
Matrix scaled_distances(const Matrix& a, const Matrix& b, const Vector& lengthscales) {
  const Eigen::Index d = a.cols();
  Matrix as = a * lengthscales.cwiseInverse().asDiagonal();
  Matrix bs = b * lengthscales.cwiseInverse().asDiagonal();
  Matrix r(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < bs.rows(); ++j) {
    for (Eigen::Index i = 0; i < as.rows(); ++i) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = as(i, k) - bs(j, k);
        s += diff * diff;
      }
      r(i, j) = std::sqrt(s);
    }
  }
  return r;
}

Matrix matern_from_distances(const Matrix& r, double signal_variance) {
  const double s5 = std::sqrt(5.0);
  return r.unaryExpr([&](double v) {
    const double s5r = s5 * v;
    return signal_variance * (1.0 + s5r + 5.0 * v * v / 3.0) * std::exp(-s5r);
  });
}

void check_hyper(const KernelHyper& hyper, Eigen::Index dims) {
  if (hyper.lengthscales.size() != dims) {
    throw std::invalid_argument("lengthscale count " + std::to_string(hyper.lengthscales.size()) +
                                " does not match input dimension " + std::to_string(dims));
  }
  if ((hyper.lengthscales.array() <= 0.0).any()) throw std::invalid_argument("lengthscales must be positive");
  if (hyper.signal_variance < 0.0) throw std::invalid_argument("signal variance must be non-negative");
  if (hyper.noise_variance < 0.0) throw std::invalid_argument("noise variance must be non-negative");
}

// Cholesky of k + noise I, escalating jitter until it factorizes.
std::optional<double> factorize(const Matrix& kf, double noise, Eigen::LLT<Matrix>& llt) {
  for (double jitter : kJitterLadder) {
    Matrix k = kf;
    k.diagonal().array() += noise + jitter;
    llt.compute(k);
    if (llt.info() == Eigen::Success) return jitter;
  }
  return std::nullopt;
}

Vector to_theta(const KernelHyper& h) {
  const Eigen::Index d = h.lengthscales.size();
  Vector theta(d + 2);
  theta(0) = std::log(h.signal_variance);
  theta.segment(1, d) = h.lengthscales.array().log().matrix();
  theta(d + 1) = std::log(h.noise_variance);
  return theta;
}

KernelHyper from_theta(const Vector& theta) {
  const Eigen::Index d = theta.size() - 2;
  KernelHyper h;
  h.signal_variance = std::exp(theta(0));
  h.lengthscales = theta.segment(1, d).array().exp().matrix();
  h.noise_variance = std::exp(theta(d + 1));
  return h;
}

void clamp_theta(Vector& theta) {
  const Eigen::Index d = theta.size() - 2;
  theta(0) = std::clamp(theta(0), kLogSignalMin, kLogSignalMax);
  for (Eigen::Index i = 1; i <= d; ++i) theta(i) = std::clamp(theta(i), kLogLengthMin, kLogLengthMax);
  theta(d + 1) = std::clamp(theta(d + 1), kLogNoiseMin, kLogNoiseMax);
}

struct Ascent {
  Vector theta;
  double value = -std::numeric_limits<double>::infinity();
};

// Projected BFGS on -LML. Only accepts steps that increase the likelihood, so
// the result is never worse than the start.
Ascent ascend(const Matrix& x, const Vector& y, Vector theta, const FitOptions& options) {
  const Eigen::Index p = theta.size();
  const bool fix_noise = options.fixed_noise.has_value();
  clamp_theta(theta);
  if (fix_noise) theta(p - 1) = std::log(*options.fixed_noise);

  auto evaluate = [&](const Vector& t, Vector& grad) {
    const double f = log_marginal_likelihood(x, y, from_theta(t), &grad);
    if (fix_noise) grad(p - 1) = 0.0;
    return f;
  };

  Vector grad(p);
  double f = evaluate(theta, grad);
  Ascent out{theta, f};
  if (!std::isfinite(f)) return out;

  Matrix h_inv = Matrix::Identity(p, p);
  int quiet = 0;
  for (int it = 0; it < options.max_iterations; ++it) {
    if (grad.norm() < 1e-9) break;
    Vector dir = h_inv * grad;
    if (dir.dot(grad) <= 0.0) {
      h_inv.setIdentity();
      dir = grad;
    }
    const double max_step = dir.cwiseAbs().maxCoeff();
    if (max_step > 2.0) dir *= 2.0 / max_step;

    double step = 1.0;
    bool moved = false;
    Vector next_theta, next_grad(p);
    double next_f = f;
    for (int ls = 0; ls < 30; ++ls) {
      next_theta = theta + step * dir;
      clamp_theta(next_theta);
      if (fix_noise) next_theta(p - 1) = theta(p - 1);
      next_f = evaluate(next_theta, next_grad);
      if (std::isfinite(next_f) && next_f > f) {
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;

    const Vector s = next_theta - theta;
    const Vector yv = grad - next_grad;  // gradient of -LML changes by -(g_new - g_old)
    const double sy = s.dot(yv);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Matrix ident = Matrix::Identity(p, p);
      h_inv = (ident - rho * s * yv.transpose()) * h_inv * (ident - rho * yv * s.transpose()) +
              rho * s * s.transpose();
    }
    const double gain = (next_f - f) / std::max(1.0, std::abs(f));
    theta = next_theta;
    grad = next_grad;
    f = next_f;
    if (gain < options.tolerance) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  out.theta = theta;
  out.value = f;
  return out;
}

}  // namespace

Matrix cross_kernel(const Matrix& a, const Matrix& b, const KernelHyper& hyper) {
  if (a.cols() != b.cols()) throw std::invalid_argument("kernel inputs have different dimensions");
  check_hyper(hyper, a.cols());
  return matern_from_distances(scaled_distances(a, b, hyper.lengthscales), hyper.signal_variance);
}

double log_marginal_likelihood(const Matrix& x, const Vector& y, const KernelHyper& hyper, Vector* gradient) {
  check_hyper(hyper, x.cols());
  if (x.rows() != y.size()) throw std::invalid_argument("input and target counts differ");
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Matrix r = scaled_distances(x, x, hyper.lengthscales);
  const Matrix kf = matern_from_distances(r, hyper.signal_variance);
  Eigen::LLT<Matrix> llt;
  if (!factorize(kf, hyper.noise_variance, llt)) {
    if (gradient) gradient->setZero(d + 2);
    return -std::numeric_limits<double>::infinity();
  }
  const Vector alpha = llt.solve(y);
  const Matrix& l = llt.matrixLLT();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double lml =
      -0.5 * y.dot(alpha) - 0.5 * log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  if (gradient) {
    gradient->resize(d + 2);
    const Matrix w = alpha * alpha.transpose() - llt.solve(Matrix::Identity(n, n));
    (*gradient)(0) = 0.5 * w.cwiseProduct(kf).sum();
    // dK/dlog l_d = s2 (5/3) (1 + sqrt5 r) exp(-sqrt5 r) (delta_d / l_d)^2
    const double s5 = std::sqrt(5.0);
    const Matrix common = r.unaryExpr([&](double v) {
      return hyper.signal_variance * (5.0 / 3.0) * (1.0 + s5 * v) * std::exp(-s5 * v);
    });
    for (Eigen::Index k = 0; k < d; ++k) {
      const double lk = hyper.lengthscales(k);
      double g = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
          const double delta = (x(i, k) - x(j, k)) / lk;
          g += w(i, j) * common(i, j) * delta * delta;
        }
      }
      (*gradient)(k + 1) = 0.5 * g;
    }
    (*gradient)(d + 1) = 0.5 * hyper.noise_variance * w.trace();
  }
  return lml;
}

KernelHyper GprModel::default_hyper(Eigen::Index dims) {
  KernelHyper h;
  h.signal_variance = 1.0;
  h.lengthscales = Vector::Constant(dims, 0.5);
  h.noise_variance = 0.1;
  return h;
}

void GprModel::condition(const KernelHyper& hyper) {
  check_hyper(hyper, x_.cols());
  hyper_ = hyper;
  const auto jitter = factorize(kernel_matrix(x_, hyper_), hyper_.noise_variance, llt_);
  if (!jitter) throw std::runtime_error("covariance matrix is not positive definite even with jitter 1e-6");
  jitter_ = *jitter;
  alpha_ = llt_.solve(y_std_);
  lml_ = surrogate::log_marginal_likelihood(x_, y_std_, hyper_);
}

GprModel GprModel::with_hyper(const Matrix& x, const Vector& y, const KernelHyper& hyper) {
  if (x.rows() < 1) throw std::invalid_argument("need at least one training point");
  if (x.rows() != y.size()) throw std::invalid_argument("input and target counts differ");
  GprModel m;
  m.x_ = x;
  m.y_mean_ = y.mean();
  const double sd = std::sqrt((y.array() - m.y_mean_).square().mean());
  m.degenerate_ = !(sd > 1e-12 * std::max(1.0, std::abs(m.y_mean_)));
  m.y_scale_ = m.degenerate_ ? 1.0 : sd;
  m.y_std_ = (y.array() - m.y_mean_) / m.y_scale_;
  m.condition(hyper);
  m.initial_lml_ = m.lml_;
  return m;
}

GprModel GprModel::fit(const Matrix& x, const Vector& y, const FitOptions& options) {
  if (x.rows() < 2) throw std::invalid_argument("need at least two training points to fit");
  if (x.rows() != y.size()) throw std::invalid_argument("input and target counts differ");
  if (options.restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  if (options.fixed_noise && !(*options.fixed_noise > 0.0)) {
    throw std::invalid_argument("fixed noise variance must be positive");
  }

  KernelHyper start = default_hyper(x.cols());
  if (options.fixed_noise) start.noise_variance = *options.fixed_noise;
  GprModel m = with_hyper(x, y, start);
  if (m.degenerate_) {
    // Constant targets: nothing to learn, the mean is flat at the target value.
    KernelHyper flat = start;
    flat.signal_variance = 1e-10;
    m.condition(flat);
    return m;
  }

  Ascent best = ascend(m.x_, m.y_std_, to_theta(start), options);
  Rng rng(mix_seed(options.seed));
  std::uniform_real_distribution<double> log_len(std::log(0.05), std::log(5.0));
  std::uniform_real_distribution<double> log_sig(std::log(0.1), std::log(10.0));
  std::uniform_real_distribution<double> log_noise(std::log(1e-4), std::log(1.0));
  for (int restart = 1; restart < options.restarts; ++restart) {
    Vector theta(x.cols() + 2);
    theta(0) = log_sig(rng);
    for (Eigen::Index k = 0; k < x.cols(); ++k) theta(k + 1) = log_len(rng);
    theta(x.cols() + 1) = log_noise(rng);
    Ascent a = ascend(m.x_, m.y_std_, theta, options);
    if (a.value > best.value) best = a;
  }
  if (std::isfinite(best.value) && best.value > m.initial_lml_) m.condition(from_theta(best.theta));
  return m;
}

void GprModel::predict_batch(const Matrix& x, Vector& mean, Vector& variance) const {
  if (x.cols() != x_.cols()) throw std::invalid_argument("prediction input has the wrong dimension");
  const Eigen::Index s = x.rows();
  mean.resize(s);
  variance.resize(s);
  const double prior = hyper_.signal_variance + hyper_.noise_variance;
  for (Eigen::Index start = 0; start < s; start += kPredictChunk) {
    const Eigen::Index len = std::min(kPredictChunk, s - start);
    const Matrix ks = cross_kernel(x.middleRows(start, len), x_, hyper_);
    mean.segment(start, len) = ks * alpha_;
    const Matrix v = llt_.matrixL().solve(ks.transpose());
    variance.segment(start, len) = (prior - v.colwise().squaredNorm().transpose().array()).max(0.0).matrix();
  }
  mean = (mean.array() * y_scale_ + y_mean_).matrix();
  variance *= y_scale_ * y_scale_;
}

Vector GprModel::predict_mean(const Matrix& x) const {
  if (x.cols() != x_.cols()) throw std::invalid_argument("prediction input has the wrong dimension");
  Vector mean(x.rows());
  for (Eigen::Index start = 0; start < x.rows(); start += kPredictChunk) {
    const Eigen::Index len = std::min(kPredictChunk, x.rows() - start);
    mean.segment(start, len) = cross_kernel(x.middleRows(start, len), x_, hyper_) * alpha_;
  }
  return (mean.array() * y_scale_ + y_mean_).matrix();
}

std::pair<double, double> GprModel::predict(const Vector& x) const {
  Vector mean, var;
  predict_batch(x.transpose(), mean, var);
  return {mean(0), var(0)};
}

// --- Parameter space --------------------------------------------------------------

double normalize(std::size_t dim, double value) {
  const auto& range = kParamRanges.at(dim);
  return (value - range.lo) / (range.hi - range.lo);
}

Vector normalize(const ParamVector& p) {
  const auto raw = p.as_array();
  Vector v(static_cast<Eigen::Index>(raw.size()));
  for (std::size_t d = 0; d < raw.size(); ++d) v(static_cast<Eigen::Index>(d)) = normalize(d, raw[d]);
  return v;
}

GprModel fit_gpr(const std::vector<Observation>& observations, const FitOptions& options) {
  std::vector<const Observation*> rows;
  std::set<ParamVector> distinct;
  for (const auto& o : observations) {
    if (!o.feasible) continue;
    rows.push_back(&o);
    distinct.insert(o.x);
  }
  if (distinct.size() < 2) {
    throw std::invalid_argument("need at least two feasible observations with distinct inputs, have " +
                                std::to_string(distinct.size()));
  }
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(GenParams::kDims));
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = normalize(rows[i]->x).transpose();
    y(static_cast<Eigen::Index>(i)) = rows[i]->y;
  }
  return GprModel::fit(x, y, options);
}

std::pair<double, double> predict(const GprModel& model, const ParamVector& p) {
  return model.predict(normalize(p));
}

ParamVector random_param_vector(Rng& rng) {
  std::array<int, GenParams::kDims> raw{};
  for (std::size_t d = 0; d < GenParams::kDims; ++d) {
    const auto& range = kParamRanges[d];
    if (d == GenParams::kDims - 1) {
      std::uniform_int_distribution<std::size_t> pick(0, kTimeLimits.size() - 1);
      raw[d] = kTimeLimits[pick(rng)];
    } else {
      std::uniform_int_distribution<int> pick(static_cast<int>(range.lo), static_cast<int>(range.hi));
      raw[d] = pick(rng);
    }
  }
  return GenParams::from_array(raw);
}

std::vector<int> axis_values(std::size_t dim, std::size_t max_levels) {
  if (dim >= GenParams::kDims) throw std::out_of_range("parameter index out of range");
  if (dim == GenParams::kDims - 1) return {kTimeLimits.begin(), kTimeLimits.end()};
  const int lo = static_cast<int>(kParamRanges[dim].lo);
  const int hi = static_cast<int>(kParamRanges[dim].hi);
  const auto count = static_cast<std::size_t>(hi - lo + 1);
  std::vector<int> values;
  if (max_levels == 0 || count <= max_levels) {
    for (int v = lo; v <= hi; ++v) values.push_back(v);
    return values;
  }
  if (max_levels == 1) return {lo};
  for (std::size_t i = 0; i < max_levels; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(max_levels - 1);
    values.push_back(static_cast<int>(std::lround(lo + t * (hi - lo))));
  }
  return values;
}

Matrix sample_normalized(std::size_t n_samples, Rng& rng) {
  Matrix m(static_cast<Eigen::Index>(n_samples), static_cast<Eigen::Index>(GenParams::kDims));
  for (std::size_t i = 0; i < n_samples; ++i) {
    m.row(static_cast<Eigen::Index>(i)) = normalize(random_param_vector(rng)).transpose();
  }
  return m;
}

ParamVector next_point(const GprModel& model, const AcquisitionConfig& config,
                       const std::vector<ParamVector>& history, Rng& rng) {
  if (config.pool_size == 0) throw std::invalid_argument("acquisition pool size must be positive");
  const std::set<ParamVector> seen(history.begin(), history.end());
  for (std::size_t pool = config.pool_size, attempt = 0; attempt < 2; ++attempt, pool *= 4) {
    std::vector<ParamVector> candidates;
    std::set<ParamVector> in_pool;
    for (std::size_t i = 0; i < pool; ++i) {
      ParamVector p = random_param_vector(rng);
      if (config.deduplicate && (seen.contains(p) || !in_pool.insert(p).second)) continue;
      candidates.push_back(p);
    }
    if (candidates.empty()) continue;
    Matrix x(static_cast<Eigen::Index>(candidates.size()), static_cast<Eigen::Index>(GenParams::kDims));
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) = normalize(candidates[i]).transpose();
    }
    Vector mean, var;
    model.predict_batch(x, mean, var);
    const Vector score = (mean.array() + config.weight * var.array().sqrt()).matrix();
    Eigen::Index best = 0;
    score.maxCoeff(&best);
    return candidates[static_cast<std::size_t>(best)];
  }
  throw std::runtime_error("acquisition pool is empty: every candidate was already evaluated");
}

}  // namespace teamform::surrogate
