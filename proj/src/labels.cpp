#include "wugdef/labels.hpp"

#include "json_util.hpp"
#include "wugdef/error.hpp"

namespace wugdef {
using nlohmann::json;

std::string_view method_name(Method m) {
  switch (m) {
    case Method::kLesk: return "lesk";
    case Method::kRetrieval: return "retrieval";
    case Method::kDefgen: return "defgen";
  }
  return "defgen";
}

std::string_view method_display_name(Method m) {
  switch (m) {
    case Method::kLesk: return "Lesk";
    case Method::kRetrieval: return "Retrieval";
    case Method::kDefgen: return "DefGen";
  }
  return "DefGen";
}

Method parse_method(std::string_view name) {
  if (name == "lesk") return Method::kLesk;
  if (name == "retrieval") return Method::kRetrieval;
  if (name == "defgen") return Method::kDefgen;
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + std::string(name) + "'");
}

json label_to_json(const ClusterLabel& label) {
  json j = {{"lemma", label.lemma},
            {"cluster_id", label.cluster_id},
            {"definition", label.definition_text},
            {"language", label.definition_language},
            {"method", method_name(label.method)}};
  if (label.sense_id) j["sense_id"] = *label.sense_id;
  if (!label.generated.empty()) {
    json per = json::array();
    for (const auto& g : label.generated) {
      per.push_back({{"usage_id", g.usage_id}, {"definition", g.definition_text}, {"language", g.definition_language}});
    }
    j["per_usage"] = std::move(per);
  } else if (!label.retrieved.empty()) {
    json per = json::array();
    for (const auto& r : label.retrieved) {
      json top = json::array();
      for (const auto& s : r.top_k) top.push_back({{"sense_id", s.sense_id}, {"score", s.score}});
      per.push_back({{"usage_id", r.usage_id}, {"top_k", std::move(top)}});
    }
    j["per_usage"] = std::move(per);
  }
  return j;
}

ClusterLabel label_from_json(const json& j) {
  ClusterLabel l;
  try {
    l.lemma = detail::require_string(j, "lemma");
    l.cluster_id = detail::require(j, "cluster_id").get<int>();
    l.definition_text = detail::require_string(j, "definition");
    l.definition_language = detail::require_string(j, "language");
    l.method = parse_method(detail::require_string(j, "method"));
    l.sense_id = detail::optional_string(j, "sense_id");
    if (auto it = j.find("per_usage"); it != j.end() && it->is_array()) {
      for (const auto& p : *it) {
        if (p.contains("top_k")) {
          RetrievalResult r;
          r.usage_id = detail::require_string(p, "usage_id");
          for (const auto& s : p.at("top_k")) r.top_k.push_back({s.at("sense_id").get<std::string>(), s.at("score").get<double>()});
          l.retrieved.push_back(std::move(r));
        } else {
          l.generated.push_back({detail::require_string(p, "usage_id"), detail::require_string(p, "definition"),
                                 detail::optional_string(p, "language").value_or(l.definition_language)});
        }
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed label: ") + e.what());
  }
  return l;
}

}  // namespace wugdef
