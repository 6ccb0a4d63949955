#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wugdef {

// Longest common subsequence length; O(|a|*|b|) time, O(min) space.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f = 0.0;  // balanced F1
};

// ROUGE-L over lowercased whitespace tokens. All zero if either side is empty.
RougeScore rouge_l(std::string_view reference, std::string_view candidate);
RougeScore rouge_l_tokens(std::span<const std::string> reference, std::span<const std::string> candidate);

// Unit x annotator nominal labels; std::nullopt marks a missing label.
struct ReliabilityData {
  std::vector<std::vector<std::optional<std::string>>> units;
};

// Nominal Krippendorff's alpha via the coincidence matrix. Units with fewer
// than two labels are ignored. Returns 1.0 when every pairable value falls in
// one category. Throws Error{InsufficientData} when fewer than two units carry
// two or more labels.
double krippendorff_alpha(const ReliabilityData& data);

enum class Outcome { kCorrect, kWrong, kBoth, kNone, kUnresolved };

std::string_view outcome_name(Outcome o);

struct EvalScores {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t wrong = 0;
  std::size_t both = 0;
  std::size_t none = 0;
  std::size_t unresolved = 0;
  double accuracy = 0.0;  // percent
  double fits_both_pct = 0.0;
  double fits_none_pct = 0.0;
  double wrong_pct = 0.0;
  double unresolved_pct = 0.0;
};

// Percentages over all items, unresolved ones included in the denominator.
// Throws Error{EmptySet}.
EvalScores eval_scores(std::span<const Outcome> outcomes);

}  // namespace wugdef
