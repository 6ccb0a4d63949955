#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wugdef/labels.hpp"
#include "wugdef/metrics.hpp"
#include "wugdef/wug.hpp"

namespace wugdef {

inline constexpr std::string_view kAnnotatorGuideline =
    "Pick the cluster that the definition describes. A definition fits a cluster if it fits the majority "
    "of the examples in it. Choose 'fits both' if it describes both clusters equally well and 'fits none' "
    "if it describes neither. Fluency and factual accuracy do not matter; only whether the definition "
    "tells the two clusters apart.";

enum class Slot { kTrue, kFiller };
enum class Choice { kFirst, kSecond, kBoth, kNone };

std::string_view choice_name(Choice c);
// Throws Error{InvalidArgument}.
Choice parse_choice(std::string_view name);

struct ExampleSentence {
  std::string usage_id;
  std::vector<std::string> tokens;
  std::size_t target_index = 0;

  bool operator==(const ExampleSentence&) const = default;
};

// One blinded "which cluster does this definition describe" trial.
struct EvalItem {
  std::string item_id;
  std::string dataset;
  std::string lemma;
  std::string definition_text;
  std::string definition_language;
  int true_cluster_id = 0;
  int filler_cluster_id = 0;
  std::vector<ExampleSentence> examples_true;
  std::vector<ExampleSentence> examples_filler;
  std::array<Slot, 2> presentation_order{Slot::kTrue, Slot::kFiller};
  std::string method_hidden;

  bool operator==(const EvalItem&) const = default;
};

nlohmann::json item_to_json(const EvalItem& item);
EvalItem item_from_json(const nlohmann::json& j);

// What an annotator is shown: the definition and two neutrally labeled
// example panels. Contains no method, cluster ids or usage ids.
nlohmann::json annotator_payload(const EvalItem& item, std::size_t position, std::size_t total);

struct SkippedLabel {
  std::string lemma;
  int cluster_id = 0;
  Method method = Method::kDefgen;
  std::string reason;
};

struct BuildResult {
  std::vector<EvalItem> items;
  std::vector<SkippedLabel> skipped;
};

struct BuildOptions {
  std::string dataset = "default";
  std::size_t min_size = 3;
  std::size_t max_examples = 5;
};

// Pairs every label with a filler cluster of the same lemma and samples up to
// `max_examples` usages from each side. The filler, the samples and the
// presentation order depend only on (seed, dataset, lemma, true cluster), so
// every method labeling the same cluster is judged on the same trial. Items
// are shuffled with the seed and numbered in their final order.
BuildResult build_items(std::span<const WordUsageGraph> graphs, std::span<const ClusterLabel> labels,
                        std::uint64_t seed, const BuildOptions& options = {});

void write_items(const std::filesystem::path& path, std::span<const EvalItem> items);
std::vector<EvalItem> read_items(const std::filesystem::path& path);

struct AnnotationRecord {
  std::string item_id;
  std::string annotator_id;
  Choice choice = Choice::kNone;
  std::optional<std::string> note;
  std::string timestamp;

  bool operator==(const AnnotationRecord&) const = default;
};

nlohmann::json record_to_json(const AnnotationRecord& record);
AnnotationRecord record_from_json(const nlohmann::json& j);

// Reads an append-only records log. An unterminated, unparsable final line
// (an interrupted append) is ignored; any other malformed line is an error.
std::vector<AnnotationRecord> read_records(const std::filesystem::path& path);

// Majority vote per item, mapped through the presentation order. An item
// whose top choice is not picked by more than half of its annotators is
// unresolved. Items without records are absent from the result.
// Throws Error{UnknownItem} and Error{DuplicateRecord}.
std::map<std::string, Outcome> aggregate(std::span<const AnnotationRecord> records, std::span<const EvalItem> items);

struct ScoreRow {
  std::string dataset;
  std::string definition_language;
  Method method = Method::kDefgen;
  EvalScores scores;
};

// One row per (dataset, definition language, method), in that sort order.
// Throws Error{EmptySet} when there is nothing to score.
std::vector<ScoreRow> score(const std::map<std::string, Outcome>& outcomes, std::span<const EvalItem> items);

// Tab-separated: dataset, definition_language, system, items, accuracy,
// fits_both, fits_none, unresolved. Percentages use two decimals.
std::string score_report_tsv(std::span<const ScoreRow> rows);
nlohmann::json score_report_json(std::span<const ScoreRow> rows);

// Writes <lemma>.<method>.<language>.jsonl per graph/method/language with one
// row per labeled cluster, ascending cluster_id. Returns the written paths.
// Throws Error{InvalidArgument} for a label on an unknown or ineligible cluster.
std::vector<std::filesystem::path> export_enriched(const std::filesystem::path& dir,
                                                   std::span<const WordUsageGraph> graphs,
                                                   std::span<const ClusterLabel> labels, std::size_t min_size = 3);

// Reads one exported file or every *.jsonl file of a directory.
std::vector<ClusterLabel> read_enriched(const std::filesystem::path& path);

}  // namespace wugdef
