#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "wugdef/error.hpp"

namespace wugdef {

// One occurrence of the target word inside a pre-tokenized context.
struct Usage {
  std::string usage_id;
  std::string lemma;
  std::optional<std::string> pos;
  std::vector<std::string> context_tokens;
  std::size_t target_index = 0;
  std::string grouping;
  std::string language;

  // Context tokens joined by single spaces.
  std::string text() const;
  const std::string& target_token() const { return context_tokens.at(target_index); }

  bool operator==(const Usage&) const = default;
};

// Proximity rating on the 1..4 scale; 1 means unrelated senses.
struct PairJudgment {
  std::string usage_a;
  std::string usage_b;
  std::string annotator;
  int score = 0;

  bool operator==(const PairJudgment&) const = default;
};

inline constexpr int kNoiseClusterId = -1;

struct Cluster {
  int cluster_id = 0;
  std::set<std::string> member_ids;

  std::size_t size() const { return member_ids.size(); }
  bool operator==(const Cluster&) const = default;
};

struct WordUsageGraph {
  std::string lemma;
  std::string language;
  std::map<std::string, Usage> usages;
  std::vector<PairJudgment> judgments;
  std::vector<Cluster> clusters;
  bool diachronic = false;

  const Usage& usage(const std::string& usage_id) const;
  const Cluster* find_cluster(int cluster_id) const;

  bool operator==(const WordUsageGraph&) const = default;
};

// Throws Error{DuplicateUsageId | DanglingReference | InvalidGraph} on the
// first violated invariant.
void validate_graph(const WordUsageGraph& graph);

nlohmann::json graph_to_json(const WordUsageGraph& graph);
// Parses and validates one normalized graph object.
WordUsageGraph graph_from_json(const nlohmann::json& j);

// A single JSONL line (no trailing newline). Usages and clusters are emitted
// in a canonical order so the output is stable.
std::string serialize_graph(const WordUsageGraph& graph);

enum class TargetPosition { kTokenIndex, kCharSpan };

// Column mapping for DWUG-style tab-separated releases. File names are
// relative to each graph directory and may contain a "{lemma}" placeholder
// which is replaced by the directory name.
struct TsvMapping {
  char delimiter = '\t';
  std::string language;
  bool diachronic = true;

  std::string uses_file = "uses.csv";
  std::string usage_id_column = "identifier";
  std::string context_column = "context";
  std::string target_column = "indexes_target_token";
  TargetPosition target_position = TargetPosition::kCharSpan;
  std::string grouping_column = "grouping";
  std::string lemma_column = "lemma";
  std::string pos_column;  // empty: no POS column

  std::string judgments_file = "judgments.csv";
  std::string judgment_a_column = "identifier1";
  std::string judgment_b_column = "identifier2";
  std::string annotator_column = "annotator";
  std::string score_column = "judgment";

  std::string clusters_file = "clusters.csv";
  std::string cluster_usage_column = "identifier";
  std::string cluster_id_column = "cluster";
};

TsvMapping tsv_mapping_from_json(const nlohmann::json& j);
TsvMapping load_tsv_mapping(const std::filesystem::path& path);

enum class GraphFormat { kNormalizedJsonl, kTsv };

struct LoadFailure {
  std::filesystem::path file;
  ErrorCode code;
  std::string message;
};

struct LoadReport {
  std::vector<WordUsageGraph> graphs;
  std::vector<LoadFailure> failures;

  bool ok() const { return failures.empty(); }
};

// Loads every graph under `path`. For JSONL, `path` is a file (one graph per
// line) or a directory of *.jsonl files. For TSV, `path` is either one graph
// directory containing the uses file or a directory of such directories.
// Graphs are returned sorted by lemma; failures are collected per file.
LoadReport load_graphs(const std::filesystem::path& path, GraphFormat format,
                       const TsvMapping* mapping = nullptr);

// Loads a single TSV graph directory, throwing on the first failure.
WordUsageGraph load_tsv_graph(const std::filesystem::path& dir, const TsvMapping& mapping);

// Writes one <lemma>.jsonl file per graph into `dir`.
void write_graphs(const std::filesystem::path& dir, std::span<const WordUsageGraph> graphs);

// Clusters with id != -1 and at least `min_size` members, ascending by id.
std::vector<Cluster> eligible_clusters(const WordUsageGraph& graph, std::size_t min_size = 3);

bool is_eligible(const Cluster& cluster, std::size_t min_size = 3);

struct StatsRow {
  std::string collection;
  std::size_t targets = 0;
  std::size_t clusters = 0;
  std::size_t eligible = 0;
  bool diachronic = false;

  bool operator==(const StatsRow&) const = default;
};

// Target, cluster and eligible-cluster counts. `diachronic` is true only when
// every graph is diachronic (and there is at least one graph).
StatsRow graph_stats(std::span<const WordUsageGraph> graphs, std::size_t min_size = 3,
                     std::string collection = "all");

// One row per language code, sorted by language.
std::vector<StatsRow> graph_stats_by_language(std::span<const WordUsageGraph> graphs,
                                              std::size_t min_size = 3);

}  // namespace wugdef
