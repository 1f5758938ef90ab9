#include "seqcp/core.hpp"

#include <cmath>
#include <string>

namespace seqcp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidLength: return "InvalidLength";
    case ErrorCode::DimError: return "DimError";
    case ErrorCode::InvalidResponse: return "InvalidResponse";
    case ErrorCode::InvalidPenalty: return "InvalidPenalty";
    case ErrorCode::EmptySegment: return "EmptySegment";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::StateDiverged: return "StateDiverged";
    case ErrorCode::InvalidCovariance: return "InvalidCovariance";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InternalError: return "InternalError";
  }
  return "Unknown";
}

std::string_view library_version() noexcept {
#ifdef SEQCP_VERSION
  return SEQCP_VERSION;
#else
  return "unknown";
#endif
}

DataSequence::DataSequence(Vector responses, RowMatrix covariates, Vector weights)
    : y_(std::move(responses)), x_(std::move(covariates)), w_(std::move(weights)) {
  if (y_.size() == 0) {
    throw Error(ErrorCode::InvalidLength, "data sequence must contain at least one observation");
  }
  if (x_.rows() != y_.size()) {
    // A zero-column matrix may be passed with no rows for covariate-free data.
    if (x_.cols() == 0) {
      x_.resize(y_.size(), 0);
    } else {
      throw Error(ErrorCode::DimError, "covariate rows (" + std::to_string(x_.rows()) +
                                           ") do not match responses (" +
                                           std::to_string(y_.size()) + ")");
    }
  }
  if (w_.size() == 0) {
    w_ = Vector::Ones(y_.size());
  } else if (w_.size() != y_.size()) {
    throw Error(ErrorCode::DimError, "weight count does not match responses");
  } else {
    unit_weights_ = (w_.array() == 1.0).all();
  }
  if (!y_.allFinite() || !x_.allFinite()) {
    throw Error(ErrorCode::InvalidResponse, "observations must be finite");
  }
  if (!w_.allFinite() || (w_.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidResponse, "weights must be positive and finite");
  }
}

DataSequence DataSequence::from_rows(std::span<const Observation> rows) {
  if (rows.empty()) {
    throw Error(ErrorCode::InvalidLength, "data sequence must contain at least one observation");
  }
  const Index n = static_cast<Index>(rows.size());
  const Index d = rows.front().covariates.size();
  Vector y(n);
  RowMatrix x(n, d);
  Vector w(n);
  for (Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    if (r.covariates.size() != d) {
      throw Error(ErrorCode::DimError, "row " + std::to_string(i + 1) + " has " +
                                           std::to_string(r.covariates.size()) +
                                           " covariates, expected " + std::to_string(d));
    }
    y[i] = r.response;
    x.row(i) = r.covariates.transpose();
    w[i] = r.weight;
  }
  return DataSequence(std::move(y), std::move(x), std::move(w));
}

Observation DataSequence::row(Index i) const {
  return Observation{y_[i], x_.row(i).transpose(), w_[i]};
}

DataSequence DataSequence::permuted(std::span<const Index> order) const {
  if (static_cast<Index>(order.size()) != length()) {
    throw Error(ErrorCode::LengthMismatch, "permutation length does not match data length");
  }
  Vector y(length());
  RowMatrix x(length(), dim());
  Vector w(length());
  for (Index i = 0; i < length(); ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    y[i] = y_[src];
    x.row(i) = x_.row(src);
    w[i] = w_[src];
  }
  return DataSequence(std::move(y), std::move(x), std::move(w));
}

DataSequence DataSequence::slice(Index begin, Index end) const {
  if (begin < 0 || end > length() || begin >= end) {
    throw Error(ErrorCode::EmptySegment, "invalid slice bounds");
  }
  const Index n = end - begin;
  return DataSequence(y_.segment(begin, n), x_.middleRows(begin, n), w_.segment(begin, n));
}

std::vector<SegmentRange> Segmentation::segments() const {
  std::vector<SegmentRange> out;
  out.reserve(change_points.size() + 1);
  Index prev = 0;
  for (Index cp : change_points) {
    out.push_back({prev, cp});
    prev = cp;
  }
  out.push_back({prev, length});
  return out;
}

Segmentation Segmentation::from_segments(std::span<const SegmentRange> segments) {
  Segmentation seg;
  if (segments.empty()) return seg;
  for (std::size_t j = 1; j < segments.size(); ++j) {
    seg.change_points.push_back(segments[j].begin);
  }
  seg.length = segments.back().end;
  return seg;
}

bool validate_segmentation(const Segmentation& seg) noexcept {
  if (seg.length < 1) return false;
  Index prev = 0;
  for (Index cp : seg.change_points) {
    if (cp <= prev || cp >= seg.length) return false;
    prev = cp;
  }
  return true;
}

double resolve_penalty(const PenaltySpec& spec, Index d, Index T) {
  if (T < 2) {
    throw Error(ErrorCode::InvalidLength, "penalty needs T >= 2, got T = " + std::to_string(T));
  }
  if (d < 0) {
    throw Error(ErrorCode::DimError, "negative dimension");
  }
  if (spec.beta) {
    if (!(*spec.beta >= 0.0) || !std::isfinite(*spec.beta)) {
      throw Error(ErrorCode::InvalidPenalty, "beta must be finite and nonnegative");
    }
    return *spec.beta;
  }
  return static_cast<double>(d + 1) * std::log(static_cast<double>(T)) / 2.0;
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Dp: return "dp";
    case Method::Pelt: return "pelt";
    case Method::Se: return "se";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "dp") return Method::Dp;
  if (name == "pelt") return Method::Pelt;
  if (name == "se") return Method::Se;
  throw Error(ErrorCode::ParseError, "unknown method '" + std::string(name) + "'");
}

}  // namespace seqcp
