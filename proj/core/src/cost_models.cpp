#include "seqcp/cost_models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace seqcp {

namespace {

void check_dims(const ObservationView& z, const Vector& theta) {
  if (z.x.size() != theta.size()) {
    throw Error(ErrorCode::DimError, "covariate dimension " + std::to_string(z.x.size()) +
                                         " does not match parameter dimension " +
                                         std::to_string(theta.size()));
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Logistic: return "logistic";
    case ModelKind::Poisson: return "poisson";
    case ModelKind::Lasso: return "lasso";
    case ModelKind::GaussianMean: return "gaussian";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "logistic") return ModelKind::Logistic;
  if (name == "poisson") return ModelKind::Poisson;
  if (name == "lasso") return ModelKind::Lasso;
  if (name == "gaussian" || name == "gaussian-mean" || name == "mean") return ModelKind::GaussianMean;
  throw Error(ErrorCode::ParseError, "unknown model '" + std::string(name) + "'");
}

Matrix CurvatureUpdate::materialize(Index d) const {
  Matrix m = Matrix::Zero(d, d);
  add_to(m);
  return m;
}

void CurvatureUpdate::add_to(Matrix& target) const {
  switch (kind) {
    case CurvatureKind::FullMatrix:
      target += matrix;
      break;
    case CurvatureKind::RankOne:
      target.selfadjointView<Eigen::Lower>().rankUpdate(factor);
      target.triangularView<Eigen::StrictlyUpper>() = target.transpose();
      break;
    case CurvatureKind::Scalar:
      target.diagonal().array() += scalar;
      break;
  }
}

void CostModel::check_data(const DataSequence& data) const {
  (void)data;
}

double softplus(double v) noexcept {
  return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

double sigmoid(double v) noexcept {
  if (v >= 0.0) {
    return 1.0 / (1.0 + std::exp(-v));
  }
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// ---- logistic -------------------------------------------------------------

double LogisticModel::loss(const ObservationView& z, const Vector& theta) const {
  check_dims(z, theta);
  const double eta = z.x.dot(theta);
  return z.w * (softplus(eta) - z.y * eta);
}

void LogisticModel::gradient(const ObservationView& z, const Vector& theta, Vector& out) const {
  check_dims(z, theta);
  const double eta = std::clamp(z.x.dot(theta), -kEtaClamp, kEtaClamp);
  out.noalias() = (-z.w * (z.y - sigmoid(eta))) * z.x;
}

CurvatureUpdate LogisticModel::curvature(const ObservationView& z, const Vector& theta) const {
  check_dims(z, theta);
  const double eta = std::clamp(z.x.dot(theta), -kEtaClamp, kEtaClamp);
  const double mu = sigmoid(eta);
  const double v = std::max(mu * (1.0 - mu), kFisherFloor);
  return CurvatureUpdate::rank_one(std::sqrt(z.w * v) * z.x);
}

void LogisticModel::check_data(const DataSequence& data) const {
  const auto& y = data.responses();
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw Error(ErrorCode::InvalidResponse,
                  "logistic response must be 0 or 1 (row " + std::to_string(i + 1) + ")");
    }
  }
}

CostModel::LinkTerms LogisticModel::link_terms(double eta, double y) const {
  const double mu = sigmoid(std::clamp(eta, -kEtaClamp, kEtaClamp));
  return {softplus(eta) - y * eta, mu - y, std::max(mu * (1.0 - mu), kFisherFloor)};
}

double LogisticModel::link_value(double eta, double y) const { return softplus(eta) - y * eta; }

// ---- poisson --------------------------------------------------------------

double PoissonModel::loss(const ObservationView& z, const Vector& theta) const {
  check_dims(z, theta);
  if (z.y < 0.0) throw Error(ErrorCode::InvalidResponse, "Poisson response must be nonnegative");
  const double eta = z.x.dot(theta);
  return z.w * (std::exp(eta) - z.y * eta);
}

void PoissonModel::gradient(const ObservationView& z, const Vector& theta, Vector& out) const {
  check_dims(z, theta);
  if (z.y < 0.0) throw Error(ErrorCode::InvalidResponse, "Poisson response must be nonnegative");
  const double eta = z.x.dot(theta);
  out.noalias() = (-z.w * (z.y - std::exp(eta))) * z.x;
}

CurvatureUpdate PoissonModel::curvature(const ObservationView& z, const Vector& theta) const {
  check_dims(z, theta);
  const double mu = std::exp(z.x.dot(theta));
  return CurvatureUpdate::rank_one(std::sqrt(z.w * mu) * z.x);
}

void PoissonModel::check_data(const DataSequence& data) const {
  const auto& y = data.responses();
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0 || y[i] != std::floor(y[i])) {
      throw Error(ErrorCode::InvalidResponse,
                  "Poisson response must be a nonnegative integer (row " + std::to_string(i + 1) + ")");
    }
  }
}

CostModel::LinkTerms PoissonModel::link_terms(double eta, double y) const {
  const double mu = std::exp(eta);
  return {mu - y * eta, mu - y, mu};
}

double PoissonModel::link_value(double eta, double y) const { return std::exp(eta) - y * eta; }

// ---- lasso ----------------------------------------------------------------

LassoModel::LassoModel(double sigma_hat, Index d) : sigma_hat_(sigma_hat), d_(d) {
  if (!(sigma_hat >= 0.0) || !std::isfinite(sigma_hat)) {
    throw Error(ErrorCode::InvalidPenalty, "sigma_hat must be finite and nonnegative");
  }
  if (d < 2) {
    throw Error(ErrorCode::InvalidPenalty, "lasso penalty needs d >= 2 so that log(d) > 0");
  }
}

double LassoModel::loss(const ObservationView& z, const Vector& theta) const {
  check_dims(z, theta);
  const double r = z.y - z.x.dot(theta);
  return 0.5 * r * r;
}

void LassoModel::gradient(const ObservationView& z, const Vector& theta, Vector& out) const {
  check_dims(z, theta);
  out.noalias() = -(z.y - z.x.dot(theta)) * z.x;
}

CurvatureUpdate LassoModel::curvature(const ObservationView& z, const Vector& theta) const {
  check_dims(z, theta);
  return CurvatureUpdate::rank_one(z.x);
}

CostModel::LinkTerms LassoModel::link_terms(double eta, double y) const {
  const double r = y - eta;
  return {0.5 * r * r, -r, 1.0};
}

double LassoModel::link_value(double eta, double y) const {
  const double r = y - eta;
  return 0.5 * r * r;
}

double LassoModel::penalty_weight(Index segment_length) const {
  if (sigma_hat_ == 0.0) {
    if (segment_length < 1) throw Error(ErrorCode::InvalidLength, "segment length must be positive");
    return 0.0;
  }
  return lasso_penalty_weight(segment_length, sigma_hat_, d_);
}

Vector LassoModel::prox(const Vector& a, double scale) const { return lasso_prox(a, scale); }

double soft_threshold(double a, double lambda) noexcept {
  if (a > lambda) return a - lambda;
  if (a < -lambda) return a + lambda;
  return 0.0;
}

Vector lasso_prox(const Vector& a, double lambda) {
  if (!(lambda >= 0.0)) {
    throw Error(ErrorCode::InvalidPenalty, "prox threshold must be nonnegative");
  }
  return a.unaryExpr([lambda](double v) { return soft_threshold(v, lambda); });
}

double lasso_penalty_weight(Index segment_length, double sigma_hat, Index d) {
  if (d < 2) {
    throw Error(ErrorCode::InvalidPenalty, "lasso penalty needs d >= 2 so that log(d) > 0");
  }
  if (segment_length < 1) {
    throw Error(ErrorCode::InvalidLength, "segment length must be positive");
  }
  if (!(sigma_hat > 0.0)) {
    throw Error(ErrorCode::InvalidPenalty, "sigma_hat must be positive");
  }
  return sigma_hat *
         std::sqrt(2.0 * std::log(static_cast<double>(d)) / static_cast<double>(segment_length));
}

// ---- gaussian mean --------------------------------------------------------

double GaussianMeanModel::loss(const ObservationView& z, const Vector& theta) const {
  const double r = z.y - theta[0];
  return 0.5 * r * r;
}

void GaussianMeanModel::gradient(const ObservationView& z, const Vector& theta, Vector& out) const {
  out.resize(1);
  out[0] = theta[0] - z.y;
}

CurvatureUpdate GaussianMeanModel::curvature(const ObservationView&, const Vector&) const {
  return CurvatureUpdate::scaled_identity(1.0);
}

std::pair<double, double> gaussian_mean_cost(std::span<const double> y) {
  if (y.empty()) throw Error(ErrorCode::EmptySegment, "gaussian mean cost of an empty segment");
  double sum = 0.0;
  for (double v : y) sum += v;
  const double mean = sum / static_cast<double>(y.size());
  double ss = 0.0;
  for (double v : y) {
    const double r = v - mean;
    ss += r * r;
  }
  return {0.5 * ss, mean};
}

std::unique_ptr<CostModel> make_model(ModelKind kind, Index d, double sigma_hat) {
  switch (kind) {
    case ModelKind::Logistic: return std::make_unique<LogisticModel>();
    case ModelKind::Poisson: return std::make_unique<PoissonModel>();
    case ModelKind::Lasso: return std::make_unique<LassoModel>(sigma_hat, d);
    case ModelKind::GaussianMean: return std::make_unique<GaussianMeanModel>();
  }
  throw Error(ErrorCode::InternalError, "unhandled model kind");
}

}  // namespace seqcp
