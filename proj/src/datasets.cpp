#include "wugdef/datasets.hpp"

#include <cmath>
#include <set>

#include "json_util.hpp"
#include "wugdef/error.hpp"
#include "wugdef/text.hpp"

namespace wugdef {

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw Error(ErrorCode::kUnknownSplit, "unknown split '" + std::string(name) + "'");
}

std::vector<DefinitionExample> load_definition_dataset(const std::filesystem::path& path) {
  std::vector<DefinitionExample> out;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    auto j = detail::parse_json(lines[i], where);
    auto field = [&](const char* key) {
      auto v = detail::optional_string(j, key).value_or("");
      if (trim(v).empty()) throw Error(ErrorCode::kEmptyField, where + ": empty field '" + key + "'");
      return v;
    };
    DefinitionExample ex;
    ex.lemma = field("lemma");
    ex.usage_text = field("usage");
    ex.definition_text = field("definition");
    ex.language = detail::optional_string(j, "language").value_or("");
    auto split = detail::optional_string(j, "split").value_or("");
    try {
      ex.split = parse_split(split);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": unknown split '" + split + "'");
    }
    out.push_back(std::move(ex));
  }
  return out;
}

std::size_t whitespace_token_count(std::string_view text) { return split_whitespace(text).size(); }

namespace {

LengthSummary summarize(const std::vector<double>& xs) {
  LengthSummary s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(ss / static_cast<double>(xs.size()));
  return s;
}

}  // namespace

DatasetStats dataset_stats(std::span<const DefinitionExample> data, const TokenCounter& counter,
                           std::string counter_name) {
  if (data.empty()) throw Error(ErrorCode::kUndefinedRatio, "dataset is empty; entries/lemmas is undefined");
  DatasetStats st;
  st.counter_name = std::move(counter_name);
  st.entries = data.size();
  std::set<std::string> lemmas;
  std::vector<double> ulen, dlen;
  ulen.reserve(data.size());
  dlen.reserve(data.size());
  for (const auto& ex : data) {
    lemmas.insert(ex.lemma);
    ulen.push_back(static_cast<double>(counter(ex.usage_text)));
    dlen.push_back(static_cast<double>(counter(ex.definition_text)));
    switch (ex.split) {
      case Split::kTrain: ++st.train; break;
      case Split::kValidation: ++st.validation; break;
      case Split::kTest: ++st.test; break;
    }
  }
  st.lemmas = lemmas.size();
  st.ratio = static_cast<double>(st.entries) / static_cast<double>(st.lemmas);
  st.usage_length = summarize(ulen);
  st.definition_length = summarize(dlen);
  return st;
}

std::vector<DefinitionExample> filter_split(std::span<const DefinitionExample> data, Split split) {
  std::vector<DefinitionExample> out;
  for (const auto& ex : data) {
    if (ex.split == split) out.push_back(ex);
  }
  return out;
}

}  // namespace wugdef
