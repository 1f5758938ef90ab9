#include "seqcp/simgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "seqcp/cost_models.hpp"
#include "seqcp/exact_solvers.hpp"
#include "seqcp/rng.hpp"

namespace seqcp {

namespace {

constexpr Index kReferenceT = 1500;
constexpr double kPoissonEtaCap = 20.0;

// Coefficient offsets per segment, in units of delta: base, +, base, -, ...
constexpr std::array<int, 4> kOffsetPattern{0, 1, 0, -1};

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::InvalidScenario, "invalid scenario field '" + field + "': " + why);
}

}  // namespace

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::Logistic: return "logistic";
    case Family::Poisson: return "poisson";
    case Family::LassoLinear: return "lasso";
  }
  return "unknown";
}

std::string_view to_string(Magnitude m) noexcept {
  switch (m) {
    case Magnitude::Small: return "small";
    case Magnitude::Medium: return "medium";
    case Magnitude::Large: return "large";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "logistic") return Family::Logistic;
  if (name == "poisson") return Family::Poisson;
  if (name == "lasso" || name == "lasso_linear" || name == "linear") return Family::LassoLinear;
  bad_field("family", "expected logistic, poisson or lasso, got '" + std::string(name) + "'");
}

Magnitude parse_magnitude(std::string_view name) {
  if (name == "small") return Magnitude::Small;
  if (name == "medium") return Magnitude::Medium;
  if (name == "large") return Magnitude::Large;
  bad_field("magnitude", "expected small, medium or large, got '" + std::string(name) + "'");
}

double change_magnitude(Family f, Magnitude m) noexcept {
  static constexpr std::array<double, 3> logistic{0.36, 0.81, 1.96};
  static constexpr std::array<double, 3> poisson{0.01, 0.05, 0.2};
  static constexpr std::array<double, 3> lasso{0.1, 0.4, 1.0};
  const auto i = static_cast<std::size_t>(m);
  switch (f) {
    case Family::Logistic: return logistic[i];
    case Family::Poisson: return poisson[i];
    case Family::LassoLinear: return lasso[i];
  }
  return 0.0;
}

std::string Scenario::id() const {
  std::string s = std::string(to_string(family)) + "-T" + std::to_string(T) + "-d" +
                  std::to_string(d) + "-k" + std::to_string(k) + "-" +
                  std::string(to_string(magnitude));
  if (family == Family::LassoLinear) s += "-s" + std::to_string(sparsity);
  return s;
}

void Scenario::validate() const {
  if (k != 0 && k != 1 && k != 3 && k != 5) bad_field("k", "must be one of 0, 1, 3, 5");
  if (d < 1) bad_field("d", "must be at least 1");
  if (T < 2 * (k + 1)) bad_field("T", "too short for " + std::to_string(k) + " change-points");
  if (family == Family::LassoLinear) {
    if (d < 2) bad_field("d", "lasso designs need d >= 2");
    if (sparsity < 1 || sparsity > d) bad_field("sparsity", "must lie in [1, d]");
  }
  const auto cps = default_change_points(k, T);
  Segmentation seg{cps, T};
  if (!validate_segmentation(seg)) bad_field("T", "rescaled change-points collide");
}

std::vector<Index> default_change_points(int k, Index T) {
  std::vector<Index> ref;
  switch (k) {
    case 0: break;
    case 1: ref = {750}; break;
    case 3: ref = {375, 750, 1125}; break;
    case 5: ref = {250, 500, 750, 1000, 1250}; break;
    default: bad_field("k", "must be one of 0, 1, 3, 5");
  }
  for (auto& tau : ref) {
    tau = static_cast<Index>(std::llround(static_cast<double>(tau) * static_cast<double>(T) /
                                          static_cast<double>(kReferenceT)));
  }
  return ref;
}

Matrix ar1_covariance(Index d, double rho) {
  Matrix s(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) s(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  }
  return s;
}

Vector baseline_coefficients(Index d) {
  if (d == 1) return Vector::Constant(1, 1.2);
  static constexpr std::array<double, 5> pattern{1.0, 1.2, -1.0, 0.5, -2.0};
  Vector b(d);
  for (Index i = 0; i < d; ++i) b[i] = pattern[static_cast<std::size_t>(i % 5)];
  return b;
}

Vector make_delta(Index d, double target_m, const Matrix& sigma) {
  if (!(target_m > 0.0)) throw Error(ErrorCode::InvalidScenario, "target magnitude must be positive");
  if (sigma.rows() != d || sigma.cols() != d) {
    throw Error(ErrorCode::DimError, "covariance shape does not match d");
  }
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidCovariance, "covariance matrix is not positive definite");
  }
  const double quad = sigma.sum();  // 1' Sigma 1
  return Vector::Constant(d, std::sqrt(target_m / quad));
}

SimulatedData gen_glm(const Scenario& s) {
  s.validate();
  if (s.family == Family::LassoLinear) {
    throw Error(ErrorCode::InvalidScenario, "gen_glm handles logistic and poisson families only");
  }
  const Matrix sigma = ar1_covariance(s.d, 0.9);
  const Matrix chol = sigma.llt().matrixL();
  const Vector delta = make_delta(s.d, change_magnitude(s.family, s.magnitude), sigma);
  const Vector base = baseline_coefficients(s.d);

  Segmentation truth{default_change_points(s.k, s.T), s.T};
  std::vector<Vector> params;
  for (Index j = 0; j < truth.num_segments(); ++j) {
    params.push_back(base + kOffsetPattern[static_cast<std::size_t>(j % 4)] * delta);
  }

  Rng rng(s.seed);
  Vector y(s.T);
  RowMatrix X(s.T, s.d);
  Vector z(s.d);
  std::size_t seg = 0;
  for (Index i = 0; i < s.T; ++i) {
    while (seg < truth.change_points.size() && i >= truth.change_points[seg]) ++seg;
    for (Index c = 0; c < s.d; ++c) z[c] = rng.normal();
    const Vector x = chol * z;
    X.row(i) = x.transpose();
    const double eta = x.dot(params[seg]);
    if (s.family == Family::Logistic) {
      y[i] = rng.bernoulli(sigmoid(eta)) ? 1.0 : 0.0;
    } else {
      y[i] = static_cast<double>(rng.poisson(std::exp(std::min(eta, kPoissonEtaCap))));
    }
  }
  return SimulatedData{DataSequence(std::move(y), std::move(X)), std::move(truth), std::move(params),
                       delta, {}};
}

SimulatedData gen_lasso(const Scenario& s) {
  s.validate();
  if (s.family != Family::LassoLinear) {
    throw Error(ErrorCode::InvalidScenario, "gen_lasso handles the lasso family only");
  }
  const double delta_var = change_magnitude(s.family, s.magnitude);
  Rng rng(s.seed);

  // Support: uniform without replacement via a partial Fisher-Yates shuffle.
  std::vector<Index> coords(static_cast<std::size_t>(s.d));
  std::iota(coords.begin(), coords.end(), Index{0});
  for (int j = 0; j < s.sparsity; ++j) {
    const auto remaining = static_cast<std::uint64_t>(s.d - j);
    const auto pick = static_cast<std::size_t>(j) + static_cast<std::size_t>(rng.below(remaining));
    std::swap(coords[static_cast<std::size_t>(j)], coords[pick]);
  }
  std::vector<Index> support(coords.begin(), coords.begin() + s.sparsity);
  std::sort(support.begin(), support.end());

  Segmentation truth{default_change_points(s.k, s.T), s.T};
  std::vector<Vector> params;
  for (Index j = 0; j < truth.num_segments(); ++j) {
    Vector theta = Vector::Zero(s.d);
    for (Index c : support) {
      theta[c] = (j % 2 == 0) ? 1.0 : 1.0 + std::sqrt(delta_var) * rng.normal();
    }
    params.push_back(std::move(theta));
  }

  const double x_scale = std::sqrt(0.5);
  const double noise_sd = std::sqrt(0.5);
  Vector y(s.T);
  RowMatrix X(s.T, s.d);
  std::size_t seg = 0;
  for (Index i = 0; i < s.T; ++i) {
    while (seg < truth.change_points.size() && i >= truth.change_points[seg]) ++seg;
    for (Index c = 0; c < s.d; ++c) X(i, c) = x_scale * rng.normal();
    y[i] = X.row(i).dot(params[seg]) + noise_sd * rng.normal();
  }
  return SimulatedData{DataSequence(std::move(y), std::move(X)), std::move(truth), std::move(params),
                       Vector{}, std::move(support)};
}

SimulatedData simulate(const Scenario& s) {
  return s.family == Family::LassoLinear ? gen_lasso(s) : gen_glm(s);
}

NoiseEstimate estimate_sigma_hat(const DataSequence& data, int blocks) {
  NoiseEstimate est;
  const Index T = data.length();
  Index B = std::max(1, blocks);
  if (T < 20) {
    B = std::min<Index>(2, T);
    est.fell_back = true;
  }
  B = std::min(B, T);
  const double logd = std::max(0.0, std::log(static_cast<double>(std::max<Index>(data.dim(), 1))));
  double total = 0.0;
  for (Index j = 0; j < B; ++j) {
    const SegmentRange r{(j * T) / B, ((j + 1) * T) / B};
    const double n = static_cast<double>(r.size());
    const double lambda = std::sqrt(2.0 * logd / n);
    const SegmentFit fit = lasso_exact_cost(data, r, lambda);
    const auto X = data.covariates().middleRows(r.begin, r.size());
    const auto y = data.responses().segment(r.begin, r.size());
    total += std::sqrt((y - X * fit.theta).squaredNorm() / n);
  }
  est.sigma_hat = total / static_cast<double>(B);
  est.blocks_used = static_cast<int>(B);
  return est;
}

}  // namespace seqcp
