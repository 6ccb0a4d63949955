#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wugdef {

enum class Split { kTrain, kValidation, kTest };

std::string_view split_name(Split split);
// Throws Error{UnknownSplit}.
Split parse_split(std::string_view name);

// A usage paired with the definition of the target word in that usage.
struct DefinitionExample {
  std::string lemma;
  std::string usage_text;
  std::string definition_text;
  std::string language;
  Split split = Split::kTrain;

  bool operator==(const DefinitionExample&) const = default;
};

// Reads JSONL rows with keys lemma, usage, definition, language, split.
// Throws Error{EmptyField} for a missing or blank lemma/usage/definition and
// Error{UnknownSplit} for anything other than train/validation/test.
std::vector<DefinitionExample> load_definition_dataset(const std::filesystem::path& path);

using TokenCounter = std::function<std::size_t(std::string_view)>;

// Number of whitespace-separated tokens.
std::size_t whitespace_token_count(std::string_view text);

struct LengthSummary {
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
};

struct DatasetStats {
  std::size_t entries = 0;
  std::size_t lemmas = 0;  // distinct exact lemma strings
  double ratio = 0.0;      // entries / lemmas
  LengthSummary usage_length;
  LengthSummary definition_length;
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  std::string counter_name;
};

// Lengths are measured with `counter`; `counter_name` is recorded in the
// result so reports state which unit the lengths are in.
// Throws Error{UndefinedRatio} on an empty dataset.
DatasetStats dataset_stats(std::span<const DefinitionExample> data,
                           const TokenCounter& counter = whitespace_token_count,
                           std::string counter_name = "whitespace tokens");

std::vector<DefinitionExample> filter_split(std::span<const DefinitionExample> data, Split split);

}  // namespace wugdef
