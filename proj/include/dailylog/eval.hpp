#pragma once
// Classification metrics (confusion matrix, macro precision/recall/F1) and a
// token-overlap text similarity proxy. Zero-denominator conventions: a
// per-class precision, recall or F1 with a zero denominator is 0; the macro
// average runs over classes with at least one true instance.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dailylog/common.hpp"

namespace dailylog::eval {

using json = nlohmann::json;

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class UnknownLabel : public Error {
 public:
  using Error::Error;
};

class EmptyMatrix : public Error {
 public:
  EmptyMatrix() : Error("confusion matrix has no classes") {}
};

struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::int64_t> counts;  // K*K row-major; rows = truth, cols = prediction

  std::size_t size() const { return classes.size(); }

  std::int64_t& at(std::size_t truth, std::size_t pred) {
    return counts[truth * size() + pred];
  }
  std::int64_t at(std::size_t truth, std::size_t pred) const {
    return counts[truth * size() + pred];
  }

  std::int64_t total() const {
    std::int64_t t = 0;
    for (std::int64_t c : counts) t += c;
    return t;
  }

  double accuracy() const {
    const std::int64_t t = total();
    if (t == 0) return 0.0;
    std::int64_t diag = 0;
    for (std::size_t i = 0; i < size(); ++i) diag += at(i, i);
    return static_cast<double>(diag) / static_cast<double>(t);
  }
};

// counts[i][j] = #{t : truth = c_i and pred = c_j}. With an empty class list
// the vocabulary is the sorted union of observed labels; with an explicit one,
// any label outside it raises UnknownLabel.
inline ConfusionMatrix confusion(std::span<const std::string> truth,
                                 std::span<const std::string> pred,
                                 std::vector<std::string> classes = {}) {
  if (truth.size() != pred.size())
    throw LengthMismatch("truth has " + std::to_string(truth.size()) + " labels, pred has " +
                         std::to_string(pred.size()));
  if (classes.empty()) {
    std::vector<std::string> all(truth.begin(), truth.end());
    all.insert(all.end(), pred.begin(), pred.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    classes = std::move(all);
  }
  ConfusionMatrix m;
  m.classes = std::move(classes);
  m.counts.assign(m.classes.size() * m.classes.size(), 0);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m.classes.size(); ++i) index[m.classes[i]] = i;
  const auto lookup = [&](const std::string& label) {
    const auto it = index.find(label);
    if (it == index.end()) throw UnknownLabel("label \"" + label + "\" outside the vocabulary");
    return it->second;
  };
  for (std::size_t t = 0; t < truth.size(); ++t) ++m.at(lookup(truth[t]), lookup(pred[t]));
  return m;
}

struct PerClassPRF {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::int64_t support = 0;
};

struct MacroPRF {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

inline PerClassPRF per_class_prf(const ConfusionMatrix& m, std::size_t c) {
  const std::size_t k = m.size();
  std::int64_t tp = m.at(c, c), row = 0, col = 0;
  for (std::size_t j = 0; j < k; ++j) {
    row += m.at(c, j);
    col += m.at(j, c);
  }
  PerClassPRF out;
  out.support = row;
  out.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
  out.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
  out.f1 = (out.precision + out.recall) > 0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

// Unweighted mean over classes with at least one true instance.
inline MacroPRF macro_prf(const ConfusionMatrix& m) {
  const std::size_t k = m.size();
  if (k == 0) throw EmptyMatrix();
  const std::int64_t* counts = m.counts.data();
  double sp = 0, sr = 0, sf = 0;
  int present = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t tp = counts[c * k + c], row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += counts[c * k + j];
      col += counts[j * k + c];
    }
    if (row == 0) continue;
    ++present;
    const double p = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    const double r = static_cast<double>(tp) / static_cast<double>(row);
    const double f = (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
    sp += p;
    sr += r;
    sf += f;
  }
  if (present == 0) return {0.0, 0.0, 0.0};
  return {sp / present, sr / present, sf / present};
}

// ---------------------------------------------------------------------------
// Text similarity

// Lowercase whitespace tokens, multiset overlap F1. Both texts empty -> 1;
// exactly one empty -> 0.
inline double token_f1(std::string_view candidate, std::string_view reference) {
  const auto tokenize = [](std::string_view text) {
    std::map<std::string, std::size_t> counts;
    std::size_t total = 0;
    std::string cur;
    const auto flush = [&]() {
      if (cur.empty()) return;
      ++counts[cur];
      ++total;
      cur.clear();
    };
    for (char ch : text) {
      if (std::isspace(static_cast<unsigned char>(ch)))
        flush();
      else
        cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    flush();
    return std::pair{counts, total};
  };
  const auto [cand, n_cand] = tokenize(candidate);
  const auto [ref, n_ref] = tokenize(reference);
  if (n_cand == 0 && n_ref == 0) return 1.0;
  if (n_cand == 0 || n_ref == 0) return 0.0;
  std::size_t overlap = 0;
  for (const auto& [tok, c] : cand) {
    const auto it = ref.find(tok);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  const double p = static_cast<double>(overlap) / static_cast<double>(n_cand);
  const double r = static_cast<double>(overlap) / static_cast<double>(n_ref);
  if (p + r == 0) return 0.0;
  return 2.0 * p * r / (p + r);
}

// Pluggable scoring contract; token_f1 is the only built-in. External
// semantic scorers implement the same interface.
class TextScorer {
 public:
  virtual ~TextScorer() = default;
  virtual const char* name() const = 0;
  virtual double score(std::string_view candidate, std::string_view reference) const = 0;
};

class TokenF1Scorer : public TextScorer {
 public:
  const char* name() const override { return "token_f1"; }
  double score(std::string_view candidate, std::string_view reference) const override {
    return token_f1(candidate, reference);
  }
};

// {"per_class": {...}, "macro": {...}, "accuracy": ..., "total": ...}
inline json metric_report(const ConfusionMatrix& m) {
  json per_class = json::object();
  for (std::size_t c = 0; c < m.size(); ++c) {
    const PerClassPRF prf = per_class_prf(m, c);
    per_class[m.classes[c]] = json{{"precision", prf.precision},
                                   {"recall", prf.recall},
                                   {"f1", prf.f1},
                                   {"support", prf.support}};
  }
  const MacroPRF macro = macro_prf(m);
  return json{
      {"per_class", per_class},
      {"macro", json{{"precision", macro.precision}, {"recall", macro.recall}, {"f1", macro.f1}}},
      {"accuracy", m.accuracy()},
      {"total", m.total()}};
}

}  // namespace dailylog::eval
