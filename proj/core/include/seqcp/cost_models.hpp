#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <utility>

#include "seqcp/core.hpp"

namespace seqcp {

enum class ModelKind { Logistic, Poisson, Lasso, GaussianMean };

std::string_view to_string(ModelKind kind) noexcept;
ModelKind parse_model_kind(std::string_view name);

enum class CurvatureKind { FullMatrix, RankOne, Scalar };

// Curvature surrogate A_t(theta) added to the preconditioner after a step:
// a full d x d matrix, a rank-one factor g (meaning g g^T), or c * I.
struct CurvatureUpdate {
  CurvatureKind kind = CurvatureKind::Scalar;
  Matrix matrix;
  Vector factor;
  double scalar = 0.0;

  static CurvatureUpdate full(Matrix m) {
    return {CurvatureKind::FullMatrix, std::move(m), {}, 0.0};
  }
  static CurvatureUpdate rank_one(Vector g) {
    return {CurvatureKind::RankOne, {}, std::move(g), 0.0};
  }
  static CurvatureUpdate scaled_identity(double c) {
    return {CurvatureKind::Scalar, {}, {}, c};
  }

  Matrix materialize(Index d) const;
  // Adds the represented matrix into `target` (d x d) without materializing.
  void add_to(Matrix& target) const;
};

// Pluggable per-observation loss l(z, theta) with the derivative information
// the exact solvers and the sequential engine need. Penalized models add
// lambda(n) * pen(theta) on top of the summed loss of an n-point segment.
class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual ModelKind kind() const noexcept = 0;
  std::string_view name() const noexcept { return to_string(kind()); }

  // Parameter dimension for data with `covariate_dim` covariates.
  virtual Index param_dim(Index covariate_dim) const noexcept { return covariate_dim; }

  virtual double loss(const ObservationView& z, const Vector& theta) const = 0;
  // Writes grad l(z, theta) into `out` (resized as needed).
  virtual void gradient(const ObservationView& z, const Vector& theta, Vector& out) const = 0;
  virtual CurvatureUpdate curvature(const ObservationView& z, const Vector& theta) const = 0;

  Vector gradient(const ObservationView& z, const Vector& theta) const {
    Vector g;
    gradient(z, theta, g);
    return g;
  }

  virtual bool has_penalty() const noexcept { return false; }
  virtual double penalty_weight(Index /*segment_length*/) const { return 0.0; }
  virtual double penalty(const Vector& /*theta*/) const { return 0.0; }
  // Prox(a; scale) of the penalty; identity for unpenalized models.
  virtual Vector prox(const Vector& a, double /*scale*/) const { return a; }

  // Throws when the data cannot be used with this model (e.g. negative counts).
  virtual void check_data(const DataSequence& data) const;

  // Models of the form l = w * f(x'theta, y) expose f and its first two
  // derivatives in the linear predictor so segment sums can be vectorized.
  struct LinkTerms {
    double value;
    double d1;
    double d2;
  };
  virtual bool linear_predictor_form() const noexcept { return false; }
  virtual LinkTerms link_terms(double /*eta*/, double /*y*/) const { return {0.0, 0.0, 0.0}; }
  // f(eta, y) alone; cheaper than link_terms when only the loss is needed.
  virtual double link_value(double eta, double y) const { return link_terms(eta, y).value; }
};

// Numerically stable log(1 + exp(v)).
double softplus(double v) noexcept;
double sigmoid(double v) noexcept;

// Logistic regression, y in {0, 1}. Linear predictors are clamped to
// [-30, 30] before computing the mean; Fisher weights are floored at 1e-10.
class LogisticModel final : public CostModel {
 public:
  using CostModel::gradient;
  static constexpr double kEtaClamp = 30.0;
  static constexpr double kFisherFloor = 1e-10;

  ModelKind kind() const noexcept override { return ModelKind::Logistic; }
  double loss(const ObservationView& z, const Vector& theta) const override;
  void gradient(const ObservationView& z, const Vector& theta, Vector& out) const override;
  CurvatureUpdate curvature(const ObservationView& z, const Vector& theta) const override;
  bool linear_predictor_form() const noexcept override { return true; }
  LinkTerms link_terms(double eta, double y) const override;
  double link_value(double eta, double y) const override;
  void check_data(const DataSequence& data) const override;
};

// Poisson regression with log link. The loss omits log(y!), which does not
// depend on theta: l = exp(x'theta) - y x'theta.
class PoissonModel final : public CostModel {
 public:
  using CostModel::gradient;
  ModelKind kind() const noexcept override { return ModelKind::Poisson; }
  double loss(const ObservationView& z, const Vector& theta) const override;
  void gradient(const ObservationView& z, const Vector& theta, Vector& out) const override;
  CurvatureUpdate curvature(const ObservationView& z, const Vector& theta) const override;
  bool linear_predictor_form() const noexcept override { return true; }
  LinkTerms link_terms(double eta, double y) const override;
  double link_value(double eta, double y) const override;
  void check_data(const DataSequence& data) const override;
};

// Squared-error linear regression with an l1 penalty whose weight depends on
// the segment length: lambda(n) = sigma_hat * sqrt(2 log(d) / n).
class LassoModel final : public CostModel {
 public:
  using CostModel::gradient;
  LassoModel(double sigma_hat, Index d);

  ModelKind kind() const noexcept override { return ModelKind::Lasso; }
  double loss(const ObservationView& z, const Vector& theta) const override;
  void gradient(const ObservationView& z, const Vector& theta, Vector& out) const override;
  CurvatureUpdate curvature(const ObservationView& z, const Vector& theta) const override;
  bool linear_predictor_form() const noexcept override { return true; }
  LinkTerms link_terms(double eta, double y) const override;
  double link_value(double eta, double y) const override;

  bool has_penalty() const noexcept override { return true; }
  double penalty_weight(Index segment_length) const override;
  double penalty(const Vector& theta) const override { return theta.lpNorm<1>(); }
  Vector prox(const Vector& a, double scale) const override;

  double sigma_hat() const noexcept { return sigma_hat_; }

 private:
  double sigma_hat_;
  Index d_;
};

// Mean-shift model l = (y - theta)^2 / 2 with a closed-form segment cost.
// Covariates are ignored; theta is the scalar mean.
class GaussianMeanModel final : public CostModel {
 public:
  using CostModel::gradient;
  ModelKind kind() const noexcept override { return ModelKind::GaussianMean; }
  Index param_dim(Index) const noexcept override { return 1; }
  double loss(const ObservationView& z, const Vector& theta) const override;
  void gradient(const ObservationView& z, const Vector& theta, Vector& out) const override;
  CurvatureUpdate curvature(const ObservationView& z, const Vector& theta) const override;
};

// Componentwise soft thresholding sign(a) * max(|a| - lambda, 0).
Vector lasso_prox(const Vector& a, double lambda);
double soft_threshold(double a, double lambda) noexcept;

double lasso_penalty_weight(Index segment_length, double sigma_hat, Index d);

// Returns (1/2 sum (y_i - mean)^2, mean) by a two-pass computation.
std::pair<double, double> gaussian_mean_cost(std::span<const double> y);

// Convenience constructor. sigma_hat is required for ModelKind::Lasso.
std::unique_ptr<CostModel> make_model(ModelKind kind, Index d, double sigma_hat = 1.0);

}  // namespace seqcp
