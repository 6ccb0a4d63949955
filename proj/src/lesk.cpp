#include "wugdef/lesk.hpp"

#include <map>
#include <unordered_set>

#include "wugdef/error.hpp"
#include "wugdef/text.hpp"

namespace wugdef {

std::vector<std::string> cluster_context(const WordUsageGraph& graph, const Cluster& cluster) {
  std::vector<std::string> tokens;
  for (const auto& id : cluster.member_ids) {  // std::set: ascending usage_id
    const auto& u = graph.usage(id);
    tokens.insert(tokens.end(), u.context_tokens.begin(), u.context_tokens.end());
  }
  return tokens;
}

std::optional<std::string> cluster_pos(const WordUsageGraph& graph, const Cluster& cluster) {
  std::map<std::string, std::size_t> counts;
  for (const auto& id : cluster.member_ids) {
    if (const auto& pos = graph.usage(id).pos) ++counts[*pos];
  }
  std::optional<std::string> best;
  std::size_t best_count = 0;
  bool tied = false;
  for (const auto& [pos, n] : counts) {
    if (n > best_count) {
      best = pos;
      best_count = n;
      tied = false;
    } else if (n == best_count) {
      tied = true;
    }
  }
  if (tied) return std::nullopt;
  return best;
}

namespace {

std::vector<Sense> candidates(const WordUsageGraph& graph, const Cluster& cluster, const Lexicon& lex) {
  auto senses = lex.senses_of(graph.lemma, cluster_pos(graph, cluster));
  if (senses.empty()) {
    throw Error(ErrorCode::kLemmaNotInLexicon, "lemma '" + graph.lemma + "' has no senses in the lexicon");
  }
  return senses;
}

}  // namespace

std::vector<OverlapScore> lesk_scores(const WordUsageGraph& graph, const Cluster& cluster, const Lexicon& lex) {
  std::unordered_set<std::string> context;
  for (const auto& t : cluster_context(graph, cluster)) context.insert(lowercase_ascii(t));
  std::vector<OverlapScore> out;
  for (const auto& s : candidates(graph, cluster, lex)) {
    std::unordered_set<std::string> gloss;
    for (const auto& t : s.gloss_tokens) gloss.insert(lowercase_ascii(t));
    std::size_t overlap = 0;
    for (const auto& t : gloss) overlap += context.count(t);
    out.push_back({s.sense_id, overlap});
  }
  return out;
}

ClusterLabel lesk_label(const WordUsageGraph& graph, const Cluster& cluster, const Lexicon& lex) {
  auto scores = lesk_scores(graph, cluster, lex);
  const OverlapScore* best = &scores.front();
  for (const auto& s : scores) {
    if (s.score > best->score) best = &s;
  }
  const Sense* sense = lex.find(best->sense_id);
  ClusterLabel label;
  label.lemma = graph.lemma;
  label.cluster_id = cluster.cluster_id;
  label.definition_text = sense->gloss;
  label.definition_language = lex.language();
  label.method = Method::kLesk;
  label.sense_id = sense->sense_id;
  return label;
}

}  // namespace wugdef
