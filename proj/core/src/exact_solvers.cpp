#include "seqcp/exact_solvers.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <vector>

namespace seqcp {

namespace {

bool consumes_weights(const CostModel& model, const DataSequence& data) {
  return !data.unit_weights() &&
         (model.kind() == ModelKind::Logistic || model.kind() == ModelKind::Poisson);
}

// Summed loss over the range for a linear-predictor model.
double link_sum(const DataSequence& data, SegmentRange r, const CostModel& model,
                const Vector& theta) {
  const auto X = data.covariates().middleRows(r.begin, r.size());
  const auto y = data.responses().segment(r.begin, r.size());
  const Vector eta = X * theta;
  double total = 0.0;
  if (consumes_weights(model, data)) {
    const auto w = data.weights().segment(r.begin, r.size());
    for (Index i = 0; i < eta.size(); ++i) total += w[i] * model.link_value(eta[i], y[i]);
  } else {
    for (Index i = 0; i < eta.size(); ++i) total += model.link_value(eta[i], y[i]);
  }
  return total;
}

SegmentFit gaussian_closed_form(const DataSequence& data, SegmentRange r) {
  const auto y = data.responses().segment(r.begin, r.size());
  const auto [cost, mean] = gaussian_mean_cost(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
  SegmentFit fit;
  fit.cost = cost;
  fit.theta = Vector::Constant(1, mean);
  return fit;
}

void check_range(const DataSequence& data, SegmentRange r) {
  if (r.empty()) throw Error(ErrorCode::EmptySegment, "segment must contain at least one observation");
  if (r.begin < 0 || r.end > data.length()) {
    throw Error(ErrorCode::InvalidLength, "segment range outside the data");
  }
}

// Projected gradient with Barzilai-Borwein steps and Armijo backtracking.
// Used when projected Newton stops making progress, which happens when the
// minimizer sits on the ball boundary. Returns true at a projected stationary
// point.
template <class Objective, class Gradient>
bool projected_gradient_polish(Vector& theta, double& f, int& iterations, const SolverConfig& cfg,
                               Objective&& objective, Gradient&& gradient) {
  Vector g = gradient(theta);
  double step = 2.0 * cfg.radius / std::max(g.norm(), std::numeric_limits<double>::min());
  const int max_iter = 20 * cfg.max_iter;
  for (int it = 0; it < max_iter; ++it) {
    if (!g.allFinite()) return false;
    if ((theta - project_to_ball(theta - g, cfg.radius)).lpNorm<Eigen::Infinity>() <= cfg.grad_tol) return true;
    Vector cand;
    double fc = f;
    bool accepted = false;
    for (int h = 0; h < 80; ++h, step *= 0.5) {
      cand = project_to_ball(theta - step * g, cfg.radius);
      fc = objective(cand);
      if (std::isfinite(fc) && fc <= f - 1e-4 * g.dot(theta - cand) && fc < f) {
        accepted = true;
        break;
      }
    }
    ++iterations;
    if (!accepted) return false;
    Vector g_new = gradient(cand);
    const Vector sd = cand - theta;
    const double sy = sd.dot(g_new - g);
    step = sy > 0.0 ? sd.squaredNorm() / sy : 2.0 * step;
    theta = std::move(cand);
    g = std::move(g_new);
    f = fc;
  }
  return false;
}

// Newton with Fisher-scoring curvature for models without a linear-predictor
// form (only reached by user-defined models).
SegmentFit generic_newton(const DataSequence& data, SegmentRange r, const CostModel& model,
                          const SolverConfig& cfg) {
  const Index p = model.param_dim(data.dim());
  SegmentFit fit;
  fit.theta = Vector::Zero(p);
  fit.underdetermined = r.size() < p;
  auto objective = [&](const Vector& th) {
    double s = 0.0;
    for (Index i = r.begin; i < r.end; ++i) s += model.loss(data[i], th);
    return s;
  };
  double f = objective(fit.theta);
  Vector g(p), gi(p);
  Matrix H(p, p);
  fit.converged = false;
  for (int it = 0; it < cfg.max_iter; ++it) {
    g.setZero();
    H.setZero();
    for (Index i = r.begin; i < r.end; ++i) {
      model.gradient(data[i], fit.theta, gi);
      g += gi;
      model.curvature(data[i], fit.theta).add_to(H);
    }
    if (g.lpNorm<Eigen::Infinity>() <= cfg.grad_tol) {
      fit.converged = true;
      break;
    }
    H.diagonal().array() += cfg.ridge;
    const Vector step = H.ldlt().solve(g);
    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= cfg.step_halving_max; ++h, scale *= 0.5) {
      Vector cand = project_to_ball(fit.theta - scale * step, cfg.radius);
      const double fc = objective(cand);
      if (std::isfinite(fc) && fc < f) {
        fit.theta = std::move(cand);
        f = fc;
        accepted = true;
        break;
      }
    }
    fit.iterations = it + 1;
    if (!accepted) break;
  }
  if (!fit.converged && std::isfinite(f)) {
    auto grad = [&](const Vector& th) {
      Vector out = Vector::Zero(p);
      for (Index i = r.begin; i < r.end; ++i) {
        model.gradient(data[i], th, gi);
        out += gi;
      }
      return out;
    };
    fit.converged = projected_gradient_polish(fit.theta, f, fit.iterations, cfg, objective, grad);
  }
  if (!std::isfinite(f)) throw Error(ErrorCode::SolverDiverged, "segment objective is not finite");
  fit.cost = f;
  return fit;
}

}  // namespace

Vector project_to_ball(Vector theta, double radius) {
  const double norm = theta.norm();
  if (norm > radius) theta *= radius / norm;
  return theta;
}

double segment_objective(const DataSequence& data, SegmentRange range, const CostModel& model,
                         const Vector& theta) {
  double total = 0.0;
  if (model.linear_predictor_form()) {
    total = link_sum(data, range, model, theta);
  } else {
    for (Index i = range.begin; i < range.end; ++i) total += model.loss(data[i], theta);
  }
  if (model.has_penalty()) {
    total += model.penalty_weight(range.size()) * model.penalty(theta);
  }
  return total;
}

SegmentFit glm_exact_cost(const DataSequence& data, SegmentRange r, const CostModel& model,
                          const SolverConfig& cfg) {
  check_range(data, r);
  if (model.kind() == ModelKind::GaussianMean) return gaussian_closed_form(data, r);
  if (!model.linear_predictor_form()) return generic_newton(data, r, model, cfg);

  const Index p = data.dim();
  const Index n = r.size();
  const auto X = data.covariates().middleRows(r.begin, n);
  const auto y = data.responses().segment(r.begin, n);
  const bool weighted = consumes_weights(model, data);

  SegmentFit fit;
  fit.theta = Vector::Zero(p);
  fit.underdetermined = n < p;
  fit.converged = false;

  double f = link_sum(data, r, model, fit.theta);
  if (!std::isfinite(f)) throw Error(ErrorCode::SolverDiverged, "segment objective is not finite at the origin");

  Vector eta(n), d1(n), d2(n), g(p), step(p);
  Matrix H(p, p);
  for (int it = 0; it < cfg.max_iter; ++it) {
    eta.noalias() = X * fit.theta;
    for (Index i = 0; i < n; ++i) {
      const auto t = model.link_terms(eta[i], y[i]);
      const double w = weighted ? data.weights()[r.begin + i] : 1.0;
      d1[i] = w * t.d1;
      d2[i] = w * t.d2;
    }
    g.noalias() = X.transpose() * d1;
    if (!g.allFinite()) throw Error(ErrorCode::SolverDiverged, "non-finite gradient in Newton solve");
    // Rounding floor of the summed gradient terms.
    const double floor =
        64.0 * std::numeric_limits<double>::epsilon() * (X.cwiseAbs().transpose() * d1.cwiseAbs()).maxCoeff();
    if (g.lpNorm<Eigen::Infinity>() <= std::max(cfg.grad_tol, floor)) {
      fit.converged = true;
      break;
    }
    H.noalias() = X.transpose() * d2.asDiagonal() * X;
    H.diagonal().array() += cfg.ridge;
    step = H.ldlt().solve(g);

    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= cfg.step_halving_max; ++h, scale *= 0.5) {
      Vector cand = project_to_ball(fit.theta - scale * step, cfg.radius);
      const double fc = link_sum(data, r, model, cand);
      // A full step within rounding of f still sharpens the gradient.
      const double slack = h == 0 ? 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f) : 0.0;
      if (std::isfinite(fc) && (fc < f || (fc <= f + slack && fc != f))) {
        fit.theta = std::move(cand);
        f = fc;
        accepted = true;
        break;
      }
    }
    fit.iterations = it + 1;
    if (!accepted) break;
  }
  if (!fit.converged) {
    auto objective = [&](const Vector& th) { return link_sum(data, r, model, th); };
    auto grad = [&](const Vector& th) {
      eta.noalias() = X * th;
      for (Index i = 0; i < n; ++i) {
        const double w = weighted ? data.weights()[r.begin + i] : 1.0;
        d1[i] = w * model.link_terms(eta[i], y[i]).d1;
      }
      return Vector(X.transpose() * d1);
    };
    fit.converged = projected_gradient_polish(fit.theta, f, fit.iterations, cfg, objective, grad);
  }
  fit.cost = f;
  return fit;
}

SegmentFit lasso_exact_cost(const DataSequence& data, SegmentRange r, double lambda,
                            const SolverConfig& cfg) {
  check_range(data, r);
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidPenalty, "lambda must be nonnegative");
  const Index p = data.dim();
  const Index n = r.size();
  const auto X = data.covariates().middleRows(r.begin, n);
  const auto y = data.responses().segment(r.begin, n);

  // Covariance-update coordinate descent on the Gram matrix.
  Matrix G(p, p);
  G.setZero();
  G.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
  const Vector c = X.transpose() * y;
  Vector theta = Vector::Zero(p);
  Vector Gtheta = Vector::Zero(p);

  SegmentFit fit;
  fit.underdetermined = n < p;
  fit.converged = false;
  const long max_sweeps = static_cast<long>(cfg.max_iter) * std::max<Index>(p, 1);

#ifndef NDEBUG
  auto penalized = [&](const Vector& th) {
    return 0.5 * (y - X * th).squaredNorm() + lambda * th.lpNorm<1>();
  };
  double prev_obj = penalized(theta);
#endif

  for (long sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double gjj = G(j, j);
      if (gjj <= 0.0) continue;
      const double old = theta[j];
      const double rho = c[j] - Gtheta[j] + gjj * old;
      const double updated = soft_threshold(rho, lambda) / gjj;
      const double delta = updated - old;
      if (delta != 0.0) {
        theta[j] = updated;
        Gtheta.noalias() += delta * G.col(j);
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    fit.iterations = static_cast<int>(sweep + 1);
#ifndef NDEBUG
    const double obj = penalized(theta);
    assert(obj <= prev_obj + 1e-9 * (1.0 + std::abs(prev_obj)));
    prev_obj = obj;
#endif
    if (!theta.allFinite()) throw Error(ErrorCode::SolverDiverged, "coordinate descent diverged");
    if (max_change < 1e-8) {
      fit.converged = true;
      break;
    }
  }
  theta = project_to_ball(std::move(theta), cfg.radius);
  fit.cost = 0.5 * (y - X * theta).squaredNorm() + lambda * theta.lpNorm<1>();
  if (!std::isfinite(fit.cost)) throw Error(ErrorCode::SolverDiverged, "lasso objective is not finite");
  fit.theta = std::move(theta);
  return fit;
}

SegmentFit exact_segment_cost(const DataSequence& data, SegmentRange range, const CostModel& model,
                              const SolverConfig& cfg) {
  if (model.kind() == ModelKind::Lasso) {
    check_range(data, range);
    return lasso_exact_cost(data, range, model.penalty_weight(range.size()), cfg);
  }
  return glm_exact_cost(data, range, model, cfg);
}

}  // namespace seqcp
