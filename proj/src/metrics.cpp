#include "wugdef/metrics.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "wugdef/error.hpp"
#include "wugdef/text.hpp"

namespace wugdef {

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() < b.size()) std::swap(a, b);
  // row[j] = LCS(a[0..i), b[0..j))
  std::array<std::size_t, 64> small{};
  std::vector<std::size_t> large;
  std::size_t* row = small.data();
  if (b.size() >= small.size()) {
    large.assign(b.size() + 1, 0);
    row = large.data();
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      std::size_t up = row[j + 1];
      row[j + 1] = (a[i] == b[j]) ? diag + 1 : std::max(up, row[j]);
      diag = up;
    }
  }
  return row[b.size()];
}

RougeScore rouge_l_tokens(std::span<const std::string> reference, std::span<const std::string> candidate) {
  RougeScore s;
  if (reference.empty() || candidate.empty()) return s;
  const double lcs = static_cast<double>(lcs_length(reference, candidate));
  if (lcs == 0.0) return s;
  s.recall = lcs / static_cast<double>(reference.size());
  s.precision = lcs / static_cast<double>(candidate.size());
  s.f = 2.0 * s.recall * s.precision / (s.recall + s.precision);
  return s;
}

RougeScore rouge_l(std::string_view reference, std::string_view candidate) {
  auto ref = split_whitespace(lowercase_ascii(reference));
  auto cand = split_whitespace(lowercase_ascii(candidate));
  return rouge_l_tokens(ref, cand);
}

double krippendorff_alpha(const ReliabilityData& data) {
  std::map<std::string, std::size_t> category;
  std::vector<std::vector<std::size_t>> pairable;
  for (const auto& unit : data.units) {
    std::vector<std::size_t> values;
    for (const auto& v : unit) {
      if (!v) continue;
      values.push_back(category.emplace(*v, category.size()).first->second);
    }
    if (values.size() >= 2) pairable.push_back(std::move(values));
  }
  if (pairable.size() < 2) {
    throw Error(ErrorCode::kInsufficientData, "need at least two units with two or more labels");
  }

  const std::size_t q = category.size();
  std::vector<std::vector<double>> o(q, std::vector<double>(q, 0.0));
  for (const auto& values : pairable) {
    const double w = 1.0 / static_cast<double>(values.size() - 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
      for (std::size_t j = 0; j < values.size(); ++j) {
        if (i != j) o[values[i]][values[j]] += w;
      }
    }
  }
  std::vector<double> n_c(q, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < q; ++c) {
    for (std::size_t k = 0; k < q; ++k) n_c[c] += o[c][k];
    n += n_c[c];
  }
  double observed = 0.0;  // sum of off-diagonal coincidences
  double expected = 0.0;  // sum over c != k of n_c * n_k
  for (std::size_t c = 0; c < q; ++c) {
    for (std::size_t k = 0; k < q; ++k) {
      if (c == k) continue;
      observed += o[c][k];
      expected += n_c[c] * n_c[k];
    }
  }
  if (expected == 0.0) return 1.0;
  return 1.0 - (n - 1.0) * observed / expected;
}

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::kCorrect: return "correct";
    case Outcome::kWrong: return "wrong";
    case Outcome::kBoth: return "both";
    case Outcome::kNone: return "none";
    case Outcome::kUnresolved: return "unresolved";
  }
  return "unresolved";
}

EvalScores eval_scores(std::span<const Outcome> outcomes) {
  if (outcomes.empty()) throw Error(ErrorCode::kEmptySet, "no outcomes to score");
  EvalScores s;
  s.total = outcomes.size();
  for (auto o : outcomes) {
    switch (o) {
      case Outcome::kCorrect: ++s.correct; break;
      case Outcome::kWrong: ++s.wrong; break;
      case Outcome::kBoth: ++s.both; break;
      case Outcome::kNone: ++s.none; break;
      case Outcome::kUnresolved: ++s.unresolved; break;
    }
  }
  const double t = static_cast<double>(s.total);
  s.accuracy = 100.0 * static_cast<double>(s.correct) / t;
  s.fits_both_pct = 100.0 * static_cast<double>(s.both) / t;
  s.fits_none_pct = 100.0 * static_cast<double>(s.none) / t;
  s.wrong_pct = 100.0 * static_cast<double>(s.wrong) / t;
  s.unresolved_pct = 100.0 * static_cast<double>(s.unresolved) / t;
  return s;
}

}  // namespace wugdef
