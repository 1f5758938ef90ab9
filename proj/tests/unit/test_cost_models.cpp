#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "seqcp/cost_models.hpp"
#include "test_util.hpp"

using namespace seqcp;
using seqcp::testing::code_of;

namespace {

ObservationView view(double y, const Vector& x, double w = 1.0) {
  return ObservationView{y, Eigen::Map<const Vector>(x.data(), x.size()), w};
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double a : v) out[i++] = a;
  return out;
}

double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

TEST(Logistic, LossExamples) {
  LogisticModel m;
  const Vector x0 = vec({0}), x1 = vec({1}), x2 = vec({2});
  EXPECT_NEAR(m.loss(view(1, x0), vec({5})), std::log(2.0), 1e-12);
  EXPECT_NEAR(m.loss(view(1, x1), vec({0})), 0.693147, 1e-6);
  EXPECT_NEAR(m.loss(view(0, x2), vec({1.5})), 3.048587, 1e-6);
}

TEST(Logistic, GradientExamples) {
  LogisticModel m;
  const Vector x1 = vec({1}), x10 = vec({1, 0}), x2 = vec({2});
  EXPECT_NEAR(m.gradient(view(1, x1), vec({0}))[0], -0.5, 1e-12);
  const Vector g = m.gradient(view(0, x10), vec({0, 0}));
  EXPECT_NEAR(g[0], 0.5, 1e-12);
  EXPECT_EQ(g[1], 0.0);
  EXPECT_NEAR(m.gradient(view(1, x2), vec({1}))[0], -0.238406, 1e-6);
}

TEST(Logistic, FisherExamples) {
  LogisticModel m;
  const Vector x1 = vec({1}), x00 = vec({0, 0}), x2 = vec({2});
  EXPECT_NEAR(m.curvature(view(1, x1), vec({0})).materialize(1)(0, 0), 0.25, 1e-12);
  const Matrix z = m.curvature(view(1, x00), vec({3, -1})).materialize(2);
  EXPECT_LE(z.cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_NEAR(m.curvature(view(0, x2), vec({1})).materialize(1)(0, 0), 0.419974, 1e-6);
}

TEST(Logistic, Errors) {
  LogisticModel m;
  const Vector x = vec({1, 2});
  EXPECT_EQ(code_of([&] { m.loss(view(1, x), vec({1})); }), ErrorCode::DimError);
  EXPECT_EQ(code_of([&] { m.gradient(view(1, x), vec({1, 2, 3})); }), ErrorCode::DimError);
  const DataSequence bad(vec({0, 2}), RowMatrix::Ones(2, 1));
  EXPECT_EQ(code_of([&] { m.check_data(bad); }), ErrorCode::InvalidResponse);
}

TEST(Logistic, StableForLargePredictors) {
  LogisticModel m;
  const Vector x = vec({1});
  EXPECT_TRUE(std::isfinite(m.loss(view(0, x), vec({80}))));
  EXPECT_TRUE(std::isfinite(m.loss(view(1, x), vec({-80}))));
  EXPECT_NEAR(softplus(800.0), 800.0, 1e-9);
  EXPECT_NEAR(softplus(-800.0), 0.0, 1e-300);
  EXPECT_NEAR(softplus(0.3), std::log1p(std::exp(0.3)), 1e-15);
  EXPECT_NEAR(sigmoid(0.7), sig(0.7), 1e-15);
}

TEST(Poisson, Examples) {
  PoissonModel m;
  const Vector x1 = vec({1}), x11 = vec({1, 1});
  EXPECT_NEAR(m.loss(view(0, x1), vec({0})), 1.0, 1e-12);
  EXPECT_NEAR(m.gradient(view(0, x1), vec({0}))[0], 1.0, 1e-12);
  EXPECT_NEAR(m.curvature(view(0, x1), vec({0})).materialize(1)(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(m.gradient(view(2, x1), vec({0}))[0], -1.0, 1e-12);
  const Vector g = m.gradient(view(3, x11), vec({0.5, 0.5}));
  EXPECT_NEAR(g[0], -0.281718, 1e-6);
  EXPECT_NEAR(g[1], -0.281718, 1e-6);
}

TEST(Poisson, Errors) {
  PoissonModel m;
  const Vector x = vec({1});
  EXPECT_EQ(code_of([&] { m.loss(view(-1, x), vec({0})); }), ErrorCode::InvalidResponse);
  EXPECT_EQ(code_of([&] { m.loss(view(1, x), vec({0, 0})); }), ErrorCode::DimError);
}

TEST(Lasso, ProxExamples) {
  EXPECT_NEAR(lasso_prox(vec({3}), 1.0)[0], 2.0, 1e-15);
  const Vector p = lasso_prox(vec({-0.5, 0.2}), 0.6);
  EXPECT_EQ(p[0], 0.0);
  EXPECT_EQ(p[1], 0.0);
  EXPECT_NEAR(lasso_prox(vec({1.7}), 0.3)[0], 1.4, 1e-12);
  const double z = oracle::golden_min(
      [](double v) { return 0.5 * (v - 1.7) * (v - 1.7) / 0.3 + std::abs(v); }, -5.0, 5.0);
  EXPECT_NEAR(z, 1.4, 1e-4);
  EXPECT_EQ(code_of([] { lasso_prox(vec({1}), -0.1); }), ErrorCode::InvalidPenalty);
}

TEST(Lasso, ProxMatchesNumericArgmin) {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> n(0.0, 3.0);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  for (int rep = 0; rep < 100; ++rep) {
    const double a = n(gen), lam = u(gen);
    const double z = oracle::golden_min(
        [&](double v) { return 0.5 * (v - a) * (v - a) + lam * std::abs(v); }, -30.0, 30.0);
    EXPECT_NEAR(soft_threshold(a, lam), z, 1e-4) << "a=" << a << " lambda=" << lam;
  }
}

TEST(Lasso, ProxInvariants) {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double a = n(gen), lam = std::abs(n(gen));
    const double p = soft_threshold(a, lam);
    EXPECT_LE(std::abs(p), std::abs(a));
    EXPECT_TRUE(p == 0.0 || std::signbit(p) == std::signbit(a));
    EXPECT_EQ(soft_threshold(a, 0.0), a);
  }
}

TEST(Lasso, PenaltyWeight) {
  EXPECT_NEAR(lasso_penalty_weight(100, 1.0, 50), 0.279715, 1e-6);
  EXPECT_NEAR(lasso_penalty_weight(100, 0.5, 50), 0.139858, 1e-6);
  EXPECT_NEAR(lasso_penalty_weight(400, 1.0, 50), lasso_penalty_weight(100, 1.0, 50) / 2.0, 1e-15);
  EXPECT_EQ(code_of([] { lasso_penalty_weight(100, 1.0, 1); }), ErrorCode::InvalidPenalty);
  EXPECT_EQ(code_of([] { LassoModel(1.0, 1); }), ErrorCode::InvalidPenalty);
  LassoModel m(1.0, 50);
  EXPECT_TRUE(m.has_penalty());
  EXPECT_DOUBLE_EQ(m.penalty_weight(100), lasso_penalty_weight(100, 1.0, 50));
  EXPECT_DOUBLE_EQ(m.penalty(vec({1, -2, 0})), 3.0);
}

TEST(GaussianMean, CostExamples) {
  const std::vector<double> a{3, 3, 3}, b{0, 2}, c{1, 2, 6};
  EXPECT_EQ(gaussian_mean_cost(a), std::make_pair(0.0, 3.0));
  EXPECT_EQ(gaussian_mean_cost(b), std::make_pair(1.0, 1.0));
  EXPECT_EQ(gaussian_mean_cost(c), std::make_pair(7.0, 3.0));
  EXPECT_EQ(code_of([] { gaussian_mean_cost(std::span<const double>()); }), ErrorCode::EmptySegment);
}

TEST(GaussianMean, TranslationEquivariant) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> y(1 + gen() % 20), ys;
    for (double& v : y) v = n(gen);
    const double shift = 10.0 * n(gen);
    for (double v : y) ys.push_back(v + shift);
    const auto [c0, m0] = gaussian_mean_cost(y);
    const auto [c1, m1] = gaussian_mean_cost(ys);
    EXPECT_NEAR(c0, c1, 1e-9 * (1.0 + c0));
    EXPECT_NEAR(m0 + shift, m1, 1e-9 * (1.0 + std::abs(shift)));
    EXPECT_NEAR(c0, oracle::sse_half(y, 0, y.size()), 1e-12 * (1.0 + c0));
  }
}

class GradientFd : public ::testing::TestWithParam<ModelKind> {};

TEST_P(GradientFd, MatchesCentralDifferences) {
  const ModelKind kind = GetParam();
  std::mt19937_64 gen(100 + static_cast<int>(kind));
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const Index d = 2 + static_cast<Index>(gen() % 4);
    const auto model = make_model(kind, d, 1.0);
    const Index p = model->param_dim(d);
    Vector x(d), theta(p);
    for (Index i = 0; i < d; ++i) x[i] = n(gen);
    for (Index i = 0; i < p; ++i) theta[i] = 0.5 * n(gen);
    double y = n(gen);
    if (kind == ModelKind::Logistic) y = gen() % 2 ? 1.0 : 0.0;
    if (kind == ModelKind::Poisson) y = static_cast<double>(gen() % 6);
    const auto z = view(y, x);
    const Vector g = model->gradient(z, theta);
    const Vector fd =
        oracle::fd_gradient([&](const Vector& t) { return model->loss(z, t); }, theta, 1e-6);
    EXPECT_LT(rel_err(g, fd), 1e-5) << to_string(kind) << " rep " << rep;
  }
}

TEST_P(GradientFd, CurvatureIsPsdAndMatchesHessian) {
  const ModelKind kind = GetParam();
  std::mt19937_64 gen(200 + static_cast<int>(kind));
  std::normal_distribution<double> n(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    const Index d = 2 + static_cast<Index>(gen() % 4);
    const auto model = make_model(kind, d, 1.0);
    const Index p = model->param_dim(d);
    Vector x(d), theta(p);
    for (Index i = 0; i < d; ++i) x[i] = n(gen);
    for (Index i = 0; i < p; ++i) theta[i] = 0.5 * n(gen);
    const double y = kind == ModelKind::Poisson ? 2.0 : (kind == ModelKind::Logistic ? 1.0 : n(gen));
    const auto z = view(y, x);
    const Matrix h = model->curvature(z, theta).materialize(p);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
    // Canonical links: the Fisher information is the Hessian of the loss.
    Matrix fd(p, p);
    for (Index j = 0; j < p; ++j) {
      Vector a = theta, b = theta;
      a[j] += 1e-5;
      b[j] -= 1e-5;
      fd.col(j) = (model->gradient(z, a) - model->gradient(z, b)) / 2e-5;
    }
    EXPECT_LT((h - fd).norm() / std::max(1.0, h.norm()), 1e-5);
  }
}

INSTANTIATE_TEST_SUITE_P(Models, GradientFd,
                         ::testing::Values(ModelKind::Logistic, ModelKind::Poisson, ModelKind::Lasso,
                                           ModelKind::GaussianMean),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(CurvatureUpdate, AddToMatchesMaterialize) {
  const Vector g = vec({1, -2, 0.5});
  Matrix m = Matrix::Identity(3, 3);
  CurvatureUpdate::rank_one(g).add_to(m);
  EXPECT_LT((m - (Matrix::Identity(3, 3) + g * g.transpose())).norm(), 1e-15);
  Matrix s = Matrix::Zero(3, 3);
  CurvatureUpdate::scaled_identity(2.0).add_to(s);
  EXPECT_LT((s - 2.0 * Matrix::Identity(3, 3)).norm(), 1e-15);
  EXPECT_LT((CurvatureUpdate::full(m).materialize(3) - m).norm(), 1e-15);
}

TEST(ModelKindNames, ParseRoundTrip) {
  for (ModelKind k : {ModelKind::Logistic, ModelKind::Poisson, ModelKind::Lasso, ModelKind::GaussianMean}) {
    EXPECT_EQ(parse_model_kind(to_string(k)), k);
  }
  EXPECT_EQ(code_of([] { parse_model_kind("probit"); }), ErrorCode::ParseError);
}
