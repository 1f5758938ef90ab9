#include "seqcp/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace seqcp {

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line, std::string_view column) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    parse_fail(line, "column '" + std::string(column) + "': cannot parse '" + std::string(field) +
                         "' as a number");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

CsvDataset read_dataset_csv(std::istream& in, const CsvReadOptions& opts) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    for (auto f : split(line)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw Error(ErrorCode::ParseError, "line 1: missing header row");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  if (header[0] != "y") parse_fail(lineno, "first column must be 'y', got '" + header[0] + "'");

  const std::size_t ncol = header.size();
  std::optional<std::size_t> weight_col, sort_col;
  std::vector<std::size_t> cov_cols;
  for (std::size_t c = 1; c < ncol; ++c) {
    if (header[c].empty()) parse_fail(lineno, "empty column name at position " + std::to_string(c + 1));
    if (header[c] == "weight") {
      weight_col = c;
    } else if (opts.sort_by_column && header[c] == *opts.sort_by_column) {
      sort_col = c;
    } else {
      cov_cols.push_back(c);
    }
  }
  if (opts.sort_by_column && !sort_col) {
    throw Error(ErrorCode::ParseError, "sort column '" + *opts.sort_by_column + "' not in header");
  }

  std::vector<double> ys, ws, keys, xs;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != ncol) {
      parse_fail(lineno, "expected " + std::to_string(ncol) + " fields, found " +
                             std::to_string(fields.size()));
    }
    ys.push_back(parse_number(fields[0], lineno, header[0]));
    for (std::size_t c : cov_cols) xs.push_back(parse_number(fields[c], lineno, header[c]));
    if (weight_col) ws.push_back(parse_number(fields[*weight_col], lineno, "weight"));
    if (sort_col) keys.push_back(parse_number(fields[*sort_col], lineno, header[*sort_col]));
  }
  if (ys.empty()) throw Error(ErrorCode::InvalidLength, "dataset has no observations");

  const auto T = static_cast<Index>(ys.size());
  const auto d = static_cast<Index>(cov_cols.size());
  std::vector<Index> order(ys.size());
  std::iota(order.begin(), order.end(), Index{0});
  if (sort_col) {
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return keys[static_cast<std::size_t>(a)] > keys[static_cast<std::size_t>(b)];
    });
  }
  Vector y(T);
  RowMatrix X(T, d);
  Vector w(weight_col ? T : 0);
  for (Index i = 0; i < T; ++i) {
    const auto src = static_cast<std::size_t>(order[static_cast<std::size_t>(i)]);
    y[i] = ys[src];
    for (Index c = 0; c < d; ++c) X(i, c) = xs[src * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)];
    if (weight_col) w[i] = ws[src];
  }

  CsvDataset out{DataSequence(std::move(y), std::move(X), std::move(w)), {}, weight_col.has_value()};
  for (std::size_t c : cov_cols) out.covariate_names.push_back(header[c]);
  return out;
}

CsvDataset read_dataset_csv(const std::filesystem::path& path, const CsvReadOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
  return read_dataset_csv(in, opts);
}

void write_dataset_csv(std::ostream& out, const DataSequence& data,
                       const std::vector<std::string>& covariate_names) {
  const Index d = data.dim();
  if (!covariate_names.empty() && static_cast<Index>(covariate_names.size()) != d) {
    throw Error(ErrorCode::DimError, "covariate name count does not match data dimension");
  }
  const bool weights = !data.unit_weights();
  std::string buf = "y";
  for (Index c = 0; c < d; ++c) {
    buf += ',';
    buf += covariate_names.empty() ? "x" + std::to_string(c + 1)
                                   : covariate_names[static_cast<std::size_t>(c)];
  }
  if (weights) buf += ",weight";
  buf += '\n';
  out << buf;
  for (Index i = 0; i < data.length(); ++i) {
    buf = format_double(data.responses()[i]);
    for (Index c = 0; c < d; ++c) {
      buf += ',';
      buf += format_double(data.covariates()(i, c));
    }
    if (weights) {
      buf += ',';
      buf += format_double(data.weights()[i]);
    }
    buf += '\n';
    out << buf;
  }
}

void write_dataset_csv(const std::filesystem::path& path, const DataSequence& data,
                       const std::vector<std::string>& covariate_names) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ParseError, "cannot write '" + path.string() + "'");
  write_dataset_csv(out, data, covariate_names);
}

}  // namespace seqcp
