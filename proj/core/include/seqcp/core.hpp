#pragma once

// Domain types shared by every stage of the detector. Time indices in the
// public model are 1-based: change-point tau means the segment boundary sits
// after observation tau. Row access on DataSequence is 0-based.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "seqcp/error.hpp"

namespace seqcp {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string_view library_version() noexcept;

struct Observation {
  double response = 0.0;
  Vector covariates;
  double weight = 1.0;
};

// Non-owning view of one row of a DataSequence.
struct ObservationView {
  double y;
  Eigen::Map<const Vector> x;
  double w;
};

// Ordered observations z_1..z_T stored column-wise: responses, a row-major
// covariate matrix (one contiguous row per observation) and weights.
class DataSequence {
 public:
  // weights may be empty, meaning all ones. Throws InvalidLength when T == 0,
  // DimError on shape mismatch and InvalidResponse on non-finite values.
  DataSequence(Vector responses, RowMatrix covariates, Vector weights = {});

  static DataSequence from_rows(std::span<const Observation> rows);

  Index length() const noexcept { return y_.size(); }
  Index dim() const noexcept { return x_.cols(); }

  ObservationView operator[](Index i) const noexcept {
    return ObservationView{y_[i], Eigen::Map<const Vector>(x_.row(i).data(), x_.cols()), w_[i]};
  }
  Observation row(Index i) const;

  const Vector& responses() const noexcept { return y_; }
  const RowMatrix& covariates() const noexcept { return x_; }
  const Vector& weights() const noexcept { return w_; }
  bool unit_weights() const noexcept { return unit_weights_; }

  // Rows reordered so that row i of the result is row order[i] of this one.
  DataSequence permuted(std::span<const Index> order) const;
  // Contiguous 0-based half-open slice [begin, end).
  DataSequence slice(Index begin, Index end) const;

 private:
  Vector y_;
  RowMatrix x_;
  Vector w_;
  bool unit_weights_ = true;
};

// 0-based half-open row range [begin, end) of a DataSequence.
struct SegmentRange {
  Index begin = 0;
  Index end = 0;

  Index size() const noexcept { return end - begin; }
  bool empty() const noexcept { return end <= begin; }
  friend bool operator==(const SegmentRange&, const SegmentRange&) = default;
};

// Change-points 0 < tau_1 < ... < tau_k < T over a sequence of length T.
// Constructed freely; validate_segmentation() checks the invariants.
struct Segmentation {
  std::vector<Index> change_points;
  Index length = 0;

  Index num_segments() const noexcept {
    return static_cast<Index>(change_points.size()) + 1;
  }
  // Segment j spans rows [tau_j, tau_{j+1}) in 0-based half-open form.
  std::vector<SegmentRange> segments() const;
  static Segmentation from_segments(std::span<const SegmentRange> segments);

  friend bool operator==(const Segmentation&, const Segmentation&) = default;
};

bool validate_segmentation(const Segmentation& seg) noexcept;

// beta_T for the linear penalty f(k, T) = beta_T (k + 1). An empty value
// means "auto", the BIC constant (d + 1) log(T) / 2.
struct PenaltySpec {
  std::optional<double> beta;

  static PenaltySpec automatic() { return {}; }
  static PenaltySpec fixed(double beta) { return PenaltySpec{beta}; }
  bool is_auto() const noexcept { return !beta.has_value(); }
};

double resolve_penalty(const PenaltySpec& spec, Index d, Index T);

enum class Method { Dp, Pelt, Se };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view name);

struct SearchDiagnostics {
  Index max_candidates = 0;
  Index diverged_candidates = 0;
  Index underdetermined_fits = 0;
  Index cost_evaluations = 0;
  Index unconverged_fits = 0;
};

struct DetectionResult {
  Segmentation segmentation;
  double objective = 0.0;  // sum of segment costs + (k + 1) beta
  std::vector<Vector> segment_params;
  double elapsed_seconds = 0.0;
  Method method = Method::Pelt;
  double beta = 0.0;
  SearchDiagnostics diagnostics;
};

}  // namespace seqcp
