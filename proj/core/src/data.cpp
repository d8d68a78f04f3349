// Copyright 2026 The nalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nalign/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nalign/random.hpp"

namespace nalign::data {

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_index(const std::string& s, std::size_t& out) {
  double v;
  if (!parse_double(s, v) || v < 0.0 || v != std::floor(v) || v > 1e9) return false;
  out = static_cast<std::size_t>(v);
  return true;
}

}  // namespace

std::size_t Dataset::domains() const {
  std::size_t nd = 0;
  for (std::size_t v : d) nd = std::max(nd, v + 1);
  return nd;
}

Dataset Dataset::domain(std::size_t k) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] == k) idx.push_back(i);
  Dataset out = *this;
  out.x = x.select_rows(idx);
  out.d.assign(idx.size(), k);
  if (!y.empty()) {
    out.y.clear();
    for (std::size_t i : idx) out.y.push_back(y[i]);
  }
  return out;
}

void Dataset::validate() const {
  if (d.size() != x.rows) throw std::invalid_argument(name + ": " + std::to_string(d.size()) + " domain labels for " +
                                                      std::to_string(x.rows) + " rows");
  if (!y.empty() && y.size() != x.rows) throw std::invalid_argument(name + ": task label count mismatch");
  for (double v : x.data)
    if (!std::isfinite(v)) throw std::invalid_argument(name + ": non-finite entry");
  std::vector<bool> seen(domains(), false);
  for (std::size_t v : d) seen[v] = true;
  for (std::size_t k = 0; k < seen.size(); ++k)
    if (!seen[k]) throw std::invalid_argument(name + ": domain labels are not contiguous (missing " +
                                              std::to_string(k) + ")");
}

Dataset concat(const Dataset& a, const Dataset& b, std::size_t domain_offset) {
  if (a.dim() != b.dim()) throw std::invalid_argument("concat: dimension mismatch");
  if (a.y.empty() != b.y.empty()) throw std::invalid_argument("concat: only one set has task labels");
  Dataset out = a;
  out.x.rows = a.x.rows + b.x.rows;
  out.x.data.insert(out.x.data.end(), b.x.data.begin(), b.x.data.end());
  for (std::size_t v : b.d) out.d.push_back(v + domain_offset);
  out.y.insert(out.y.end(), b.y.begin(), b.y.end());
  return out;
}

Dataset make_moons(std::size_t n, double noise, std::uint64_t seed) {
  if (n == 0 || n % 2 != 0) throw std::invalid_argument("make_moons: n must be positive and even");
  if (!(noise >= 0.0)) throw std::invalid_argument("make_moons: noise must be >= 0");
  const std::size_t m = n / 2;
  Dataset ds;
  ds.name = "moons";
  ds.seed = seed;
  ds.params = {{"n", std::to_string(n)}, {"noise", fmt_double(noise)}};
  ds.x = Matrix(n, 2);
  ds.d.assign(n, 0);
  ds.y.assign(n, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = m > 1 ? std::numbers::pi * static_cast<double>(i) / static_cast<double>(m - 1) : 0.0;
    ds.x(i, 0) = std::cos(t);
    ds.x(i, 1) = std::sin(t);
    ds.x(m + i, 0) = 1.0 - std::cos(t);
    ds.x(m + i, 1) = 1.0 - std::sin(t) - 0.5;
    ds.y[m + i] = 1;
  }
  add_noise(ds, noise, seed);
  return ds;
}

void add_noise(Dataset& ds, double noise, std::uint64_t seed) {
  if (noise == 0.0) return;
  Rng rng(seed, Stream::kData);
  for (double& v : ds.x.data) v += noise * rng.normal();
}

Dataset rotate_scale(const Dataset& ds, double theta, double sx, double sy) {
  if (ds.dim() != 2) throw std::invalid_argument("rotate_scale: needs 2D data, got dim " + std::to_string(ds.dim()));
  Dataset out = ds;
  const double c = std::cos(theta), s = std::sin(theta);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double a = ds.x(i, 0), b = ds.x(i, 1);
    out.x(i, 0) = sx * (c * a - s * b);
    out.x(i, 1) = sy * (s * a + c * b);
  }
  out.params["theta"] = fmt_double(theta);
  out.params["sx"] = fmt_double(sx);
  out.params["sy"] = fmt_double(sy);
  return out;
}

Dataset unrotate_scale(const Dataset& ds, double theta, double sx, double sy) {
  if (ds.dim() != 2) throw std::invalid_argument("unrotate_scale: needs 2D data, got dim " + std::to_string(ds.dim()));
  if (sx == 0.0 || sy == 0.0) throw std::invalid_argument("unrotate_scale: zero scale");
  Dataset out = ds;
  const double c = std::cos(theta), s = std::sin(theta);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double a = ds.x(i, 0) / sx, b = ds.x(i, 1) / sy;
    out.x(i, 0) = c * a + s * b;
    out.x(i, 1) = -s * a + c * b;
  }
  return out;
}

Dataset make_gaussians(std::size_t n, const std::vector<double>& means, double var, std::uint64_t seed) {
  if (means.empty()) throw std::invalid_argument("make_gaussians: need at least one mean");
  if (!(var > 0.0)) throw std::invalid_argument("make_gaussians: variance must be positive");
  Rng rng(seed, Stream::kData);
  Dataset ds;
  ds.name = "gaussians";
  ds.seed = seed;
  std::string ms;
  for (double m : means) ms += (ms.empty() ? "" : ",") + fmt_double(m);
  ds.params = {{"n", std::to_string(n)}, {"means", ms}, {"var", fmt_double(var)}};
  ds.x = Matrix(n * means.size(), 1);
  const double sd = std::sqrt(var);
  for (std::size_t k = 0; k < means.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) {
      ds.x(k * n + i, 0) = means[k] + sd * rng.normal();
      ds.d.push_back(k);
    }
  return ds;
}

Dataset make_rotated_moons(const MoonsSpec& spec, std::uint64_t seed) {
  const Dataset source = make_moons(spec.n_per_domain, spec.noise, seed);
  const std::uint64_t target_seed = Rng(seed, Stream::kData).split(1).next_u64();
  Dataset target = make_moons(spec.n_per_domain, 0.0, target_seed);
  if (!spec.noise_after_transform) add_noise(target, spec.noise, target_seed);
  target = rotate_scale(target, spec.theta, spec.sx, spec.sy);
  if (spec.noise_after_transform) add_noise(target, spec.noise, target_seed);
  Dataset out = concat(source, target, 1);
  out.name = "rotated-moons";
  out.seed = seed;
  out.params = {{"n_per_domain", std::to_string(spec.n_per_domain)},
                {"noise", fmt_double(spec.noise)},
                {"theta", fmt_double(spec.theta)},
                {"sx", fmt_double(spec.sx)},
                {"sy", fmt_double(spec.sy)},
                {"noise_after_transform", spec.noise_after_transform ? "true" : "false"}};
  return out;
}

CsvError::CsvError(const std::string& what, std::size_t row, std::optional<std::string> column)
    : std::runtime_error(what + (row ? " (line " + std::to_string(row) + (column ? ", column '" + *column + "'" : "") + ")"
                                     : (column ? " (column '" + *column + "')" : ""))),
      row_(row),
      column_(std::move(column)) {}

std::pair<std::vector<double>, std::vector<double>> zscore(Matrix& x) {
  std::vector<double> mean(x.cols, 0.0), sd(x.cols, 0.0);
  if (x.rows == 0) return {mean, sd};
  const double n = static_cast<double>(x.rows);
  for (std::size_t j = 0; j < x.cols; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) m += x(i, j);
    m /= n;
    double v = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) v += (x(i, j) - m) * (x(i, j) - m);
    const double s = std::max(std::sqrt(v / n), 1e-8);
    for (std::size_t i = 0; i < x.rows; ++i) x(i, j) = (x(i, j) - m) / s;
    mean[j] = m;
    sd[j] = s;
  }
  return {mean, sd};
}

Dataset load_csv(const std::filesystem::path& path, const std::string& domain_col,
                 const std::optional<std::string>& label_col) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string(), 0, std::nullopt);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw CsvError("empty file " + path.string(), 0, std::nullopt);
  const std::vector<std::string> header = split_csv_line(line);
  auto find = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw CsvError("missing column in " + path.string(), 1, name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t dcol = find(domain_col);
  // header.size() marks "no label column".
  const std::size_t ycol = label_col ? find(*label_col) : header.size();
  const bool has_y = ycol < header.size();
  std::vector<std::size_t> features;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (j != dcol && j != ycol) features.push_back(j);

  Dataset ds;
  ds.name = path.filename().string();
  ds.params = {{"path", path.string()}, {"domain_col", domain_col}};
  if (label_col) ds.params["label_col"] = *label_col;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw CsvError("expected " + std::to_string(header.size()) + " cells, found " + std::to_string(cells.size()),
                     lineno, std::nullopt);
    std::size_t dv;
    if (!parse_index(cells[dcol], dv)) throw CsvError("domain is not a non-negative integer", lineno, header[dcol]);
    ds.d.push_back(dv);
    if (has_y) {
      std::size_t yv;
      if (!parse_index(cells[ycol], yv)) throw CsvError("label is not a non-negative integer", lineno, header[ycol]);
      ds.y.push_back(yv);
    }
    for (std::size_t j : features) {
      double v;
      if (!parse_double(cells[j], v)) throw CsvError("non-numeric cell '" + cells[j] + "'", lineno, header[j]);
      values.push_back(v);
    }
  }
  if (ds.d.empty()) throw CsvError("no data rows in " + path.string(), 0, std::nullopt);
  ds.x = Matrix(ds.d.size(), features.size(), std::move(values));
  auto [mean, sd] = zscore(ds.x);
  ds.feature_mean = std::move(mean);
  ds.feature_std = std::move(sd);
  ds.validate();
  return ds;
}

}  // namespace nalign::data
