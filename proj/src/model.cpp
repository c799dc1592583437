//
// Copyright 2026 The dprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dprep/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dprep/error.hpp"
#include "dprep/special.hpp"

namespace dprep {
namespace {

std::string Strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

// Returns each alternative expansion of one factor token.
std::vector<Factor> ExpandFactor(const std::string& token, const Dataset& d) {
  Transform transform = Transform::kIdentity;
  std::string column = token;
  auto unwrap = [&](std::string_view fn, Transform t) {
    const std::string prefix = std::string(fn) + "(";
    if (token.rfind(prefix, 0) == 0 && token.back() == ')') {
      transform = t;
      column = Strip(std::string_view(token).substr(prefix.size(),
                                                    token.size() - prefix.size() - 1));
      return true;
    }
    return false;
  };
  unwrap("log", Transform::kLog) || unwrap("sq", Transform::kSquare);
  if (column.empty()) throw InvalidArgument("formula: empty factor in '" + token + "'");

  auto group = d.categorical_groups().find(column);
  if (group != d.categorical_groups().end()) {
    if (transform != Transform::kIdentity) {
      throw InvalidArgument("formula: cannot transform categorical column '" + column + "'");
    }
    std::vector<Factor> out;
    for (const auto& indicator : group->second) out.push_back({indicator, transform});
    return out;
  }
  if (!d.HasColumn(column)) {
    throw InvalidArgument("formula: unknown column '" + column + "'");
  }
  return {Factor{column, transform}};
}

std::vector<Term> ExpandTerm(const std::string& text, const Dataset& d) {
  std::vector<Term> terms{Term{}};
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(':', start);
    if (end == std::string::npos) end = text.size();
    const std::string token = Strip(std::string_view(text).substr(start, end - start));
    if (token.empty()) throw InvalidArgument("formula: malformed term '" + text + "'");
    std::vector<Term> next;
    for (const Term& prefix : terms) {
      for (const Factor& f : ExpandFactor(token, d)) {
        Term t = prefix;
        t.factors.push_back(f);
        next.push_back(std::move(t));
      }
    }
    terms = std::move(next);
    start = end + 1;
  }
  return terms;
}

double ApplyTransform(Transform t, double v, const std::string& column, std::size_t row) {
  switch (t) {
    case Transform::kIdentity:
      return v;
    case Transform::kSquare:
      return v * v;
    case Transform::kLog:
      if (!(v > 0.0)) {
        std::ostringstream msg;
        msg << "log of non-positive value " << v << " in column '" << column << "', row "
            << row + 1;
        throw DataError(msg.str());
      }
      return std::log(v);
  }
  return v;
}

}  // namespace

std::string Factor::Label() const {
  switch (transform) {
    case Transform::kLog:
      return "log(" + column + ")";
    case Transform::kSquare:
      return "sq(" + column + ")";
    case Transform::kIdentity:
      break;
  }
  return column;
}

std::string Term::Label() const {
  std::string out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i > 0) out += ":";
    out += factors[i].Label();
  }
  return out;
}

void ModelSpec::Validate(const Dataset& d) const {
  if (!d.HasColumn(response)) {
    throw InvalidArgument("model: unknown response column '" + response + "'");
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const Term& t = terms[i];
    if (t.factors.empty()) throw InvalidArgument("model: empty term");
    for (const Factor& f : t.factors) {
      if (!d.HasColumn(f.column)) {
        throw InvalidArgument("model: unknown column '" + f.column + "'");
      }
      if (f.column == response) {
        throw InvalidArgument("model: response '" + response + "' used as a term");
      }
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (terms[j] == t) throw InvalidArgument("model: duplicate term '" + t.Label() + "'");
    }
  }
  if (terms.empty() && !intercept) throw InvalidArgument("model: no terms and no intercept");
}

std::vector<std::string> ModelSpec::CoefficientLabels() const {
  std::vector<std::string> labels;
  if (intercept) labels.emplace_back(kInterceptLabel);
  for (const Term& t : terms) labels.push_back(t.Label());
  return labels;
}

ModelSpec ParseFormula(std::string_view formula, const Dataset& d) {
  const std::size_t tilde = formula.find('~');
  if (tilde == std::string_view::npos || formula.find('~', tilde + 1) != std::string_view::npos) {
    throw InvalidArgument("formula: expected exactly one '~' in '" + std::string(formula) + "'");
  }
  ModelSpec m;
  m.response = Strip(formula.substr(0, tilde));
  if (m.response.empty()) throw InvalidArgument("formula: missing response");
  if (d.categorical_groups().count(m.response)) {
    throw InvalidArgument("formula: response '" + m.response + "' is categorical");
  }

  const std::string rhs(formula.substr(tilde + 1));
  std::vector<std::pair<char, std::string>> pieces;  // (sign, term text)
  char sign = '+';
  std::string current;
  int depth = 0;
  for (char c : rhs) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth == 0 && (c == '+' || c == '-')) {
      pieces.emplace_back(sign, Strip(current));
      current.clear();
      sign = c;
    } else {
      current += c;
    }
  }
  pieces.emplace_back(sign, Strip(current));

  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& [s, text] = pieces[i];
    if (text.empty()) {
      if (i == 0 && s == '+') continue;  // leading sign
      throw InvalidArgument("formula: empty term in '" + std::string(formula) + "'");
    }
    if (text == "1" || text == "0") {
      if ((text == "1") == (s == '+')) {
        m.intercept = true;
      } else {
        m.intercept = false;
      }
      continue;
    }
    if (s == '-') {
      throw InvalidArgument("formula: only the intercept can be removed with '-'");
    }
    for (Term& t : ExpandTerm(text, d)) m.terms.push_back(std::move(t));
  }
  m.Validate(d);
  return m;
}

Eigen::MatrixXd DesignMatrix(const Dataset& d, const ModelSpec& m) {
  m.Validate(d);
  const Eigen::Index n = static_cast<Eigen::Index>(d.rows());
  const Eigen::Index offset = m.intercept ? 1 : 0;
  Eigen::MatrixXd x(n, offset + static_cast<Eigen::Index>(m.terms.size()));
  if (m.intercept) x.col(0).setOnes();
  for (std::size_t k = 0; k < m.terms.size(); ++k) {
    auto col = x.col(offset + static_cast<Eigen::Index>(k));
    col.setOnes();
    for (const Factor& f : m.terms[k].factors) {
      const auto& values = d.Column(f.column);
      for (Eigen::Index i = 0; i < n; ++i) {
        col(i) *= ApplyTransform(f.transform, values[static_cast<std::size_t>(i)], f.column,
                                 static_cast<std::size_t>(i));
      }
    }
  }
  return x;
}

std::size_t FitResult::IndexOf(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  throw InvalidArgument("no coefficient named '" + std::string(label) + "' in the model");
}

FitResult FitOls(const Dataset& d, const ModelSpec& m) {
  const auto& y = d.Column(m.response);
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  return FitOls(DesignMatrix(d, m), yv, m.CoefficientLabels());
}

FitResult FitOls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                 std::vector<std::string> labels) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (y.size() != n) throw InvalidArgument("fit: response length differs from design rows");
  if (static_cast<Eigen::Index>(labels.size()) != k) {
    throw InvalidArgument("fit: label count differs from design columns");
  }
  if (n <= k) {
    throw SingularFit("insufficient data: " + std::to_string(n) + " rows for " +
                      std::to_string(k) + " coefficients (need at least " +
                      std::to_string(k + 1) + ")");
  }

  Eigen::VectorXd scale = x.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (scale(j) == 0.0) {
      throw SingularFit("singular fit: column '" + labels[static_cast<std::size_t>(j)] +
                        "' is identically zero");
    }
  }
  const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    throw SingularFit("singular fit: design has rank " + std::to_string(qr.rank()) + " < " +
                      std::to_string(k) + " (collinear columns or subset too small)");
  }

  FitResult fit;
  fit.labels = std::move(labels);
  fit.coefficients = qr.solve(y).cwiseQuotient(scale);
  const Eigen::VectorXd residuals = y - x * fit.coefficients;
  fit.residual_df = static_cast<int>(n - k);
  fit.sigma2_hat = residuals.squaredNorm() / static_cast<double>(fit.residual_df);

  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd perm = qr.colsPermutation();
  const Eigen::MatrixXd xtx_inv_scaled = perm * (r_inv * r_inv.transpose()) * perm.transpose();
  fit.stderrs.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double v = xtx_inv_scaled(j, j) / (scale(j) * scale(j));
    fit.stderrs(j) = std::sqrt(std::max(0.0, fit.sigma2_hat * v));
  }
  return fit;
}

ConfidenceInterval MakeConfidenceInterval(const FitResult& f, std::size_t which, double level,
                                          bool allow_degenerate) {
  if (!(level > 0.0 && level < 1.0)) {
    throw InvalidArgument("confidence level must lie in (0, 1)");
  }
  if (which >= static_cast<std::size_t>(f.coefficients.size())) {
    throw InvalidArgument("coefficient index out of range");
  }
  const auto j = static_cast<Eigen::Index>(which);
  const double center = f.coefficients(j);
  const double se = f.stderrs(j);
  if (se == 0.0) {
    if (!allow_degenerate) {
      throw DegenerateInterval("coefficient '" + f.labels[which] +
                               "' has zero standard error; its interval has zero length");
    }
    return {center, center, level};
  }
  const double half = TQuantile(f.residual_df, 0.5 * (1.0 + level)) * se;
  return {center - half, center + half, level};
}

}  // namespace dprep
