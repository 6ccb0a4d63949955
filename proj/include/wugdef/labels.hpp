#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace wugdef {

enum class Method { kLesk, kRetrieval, kDefgen };

std::string_view method_name(Method m);          // lesk | retrieval | defgen
std::string_view method_display_name(Method m);  // Lesk | Retrieval | DefGen
Method parse_method(std::string_view name);

struct GeneratedDefinition {
  std::string usage_id;
  std::string definition_text;
  std::string definition_language;

  bool operator==(const GeneratedDefinition&) const = default;
};

struct RetrievedSense {
  std::string sense_id;
  double score = 0.0;

  bool operator==(const RetrievedSense&) const = default;
};

// Top-k senses for one usage, by descending dot product.
struct RetrievalResult {
  std::string usage_id;
  std::vector<RetrievedSense> top_k;

  bool operator==(const RetrievalResult&) const = default;
};

// The definition attached to one cluster by one labeling method, plus the
// per-usage intermediate outputs that led to it.
struct ClusterLabel {
  std::string lemma;
  int cluster_id = 0;
  std::string definition_text;
  std::string definition_language;
  Method method = Method::kDefgen;
  std::optional<std::string> sense_id;  // selection-based methods only
  std::vector<GeneratedDefinition> generated;
  std::vector<RetrievalResult> retrieved;

  bool operator==(const ClusterLabel&) const = default;
};

nlohmann::json label_to_json(const ClusterLabel& label);
ClusterLabel label_from_json(const nlohmann::json& j);

}  // namespace wugdef
