#include "wugdef/retrieval.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "wugdef/error.hpp"

namespace wugdef {

GlossIndex build_index(const Lexicon& lex, const EmbeddingProvider& provider, bool normalize) {
  if (lex.empty()) throw Error(ErrorCode::kEmptyLexicon, "cannot build a gloss index from an empty lexicon");
  GlossIndex index;
  index.language = lex.language();
  index.normalized = normalize;
  for (const auto& s : lex.all_senses()) {
    index.sense_ids.push_back(s.sense_id);
    index.glosses.push_back(s.gloss);
  }
  index.vectors = provider.embed_batch(index.glosses);
  if (normalize) {
    for (auto& v : index.vectors) v = normalized(v);
  }
  return index;
}

RetrievalResult retrieve(const GlossIndex& index, const Vector& query, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  std::vector<double> scores(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) scores[i] = dot(index.vectors[i], query);
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; });
  RetrievalResult r;
  for (std::size_t i = 0; i < n; ++i) r.top_k.push_back({index.sense_ids[order[i]], scores[order[i]]});
  return r;
}

ClusterLabel retrieval_label_from_results(const std::string& lemma, int cluster_id, const GlossIndex& index,
                                          std::vector<RetrievalResult> per_usage) {
  if (per_usage.empty()) throw Error(ErrorCode::kEmptyInput, "cluster has no usages to label");
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < index.size(); ++i) position.emplace(index.sense_ids[i], i);

  struct Tally {
    std::size_t usages = 0;
    double score = 0.0;
  };
  std::map<std::size_t, Tally> tally;  // keyed by index position
  for (const auto& r : per_usage) {
    std::map<std::size_t, double> seen;  // a sense counts once per usage
    for (const auto& s : r.top_k) {
      auto pos = position.at(s.sense_id);
      if (!seen.count(pos)) seen.emplace(pos, s.score);
    }
    for (const auto& [pos, score] : seen) {
      tally[pos].usages += 1;
      tally[pos].score += score;
    }
  }
  auto best = tally.begin();
  for (auto it = tally.begin(); it != tally.end(); ++it) {
    const auto& [pos, t] = *it;
    const auto& b = best->second;
    if (t.usages > b.usages || (t.usages == b.usages && t.score > b.score)) best = it;
  }
  ClusterLabel label;
  label.lemma = lemma;
  label.cluster_id = cluster_id;
  label.definition_text = index.glosses[best->first];
  label.definition_language = index.language;
  label.method = Method::kRetrieval;
  label.sense_id = index.sense_ids[best->first];
  label.retrieved = std::move(per_usage);
  return label;
}

namespace {

// Query vectors for the given usages, keyed by usage_id.
std::map<std::string, Vector> embed_usages(const WordUsageGraph& graph, const std::vector<std::string>& ids,
                                           const GlossIndex& index, const EmbeddingProvider& provider) {
  std::vector<std::string> texts;
  texts.reserve(ids.size());
  for (const auto& id : ids) texts.push_back(graph.usage(id).text());
  auto vectors = provider.embed_batch(texts);
  std::map<std::string, Vector> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.emplace(ids[i], index.normalized ? normalized(vectors[i]) : std::move(vectors[i]));
  }
  return out;
}

std::vector<RetrievalResult> results_for(const Cluster& cluster, const std::map<std::string, Vector>& queries,
                                         const GlossIndex& index, std::size_t k) {
  std::vector<RetrievalResult> out;
  for (const auto& id : cluster.member_ids) {
    auto r = retrieve(index, queries.at(id), k);
    r.usage_id = id;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

ClusterLabel retrieval_label(const WordUsageGraph& graph, const Cluster& cluster, const GlossIndex& index,
                             const EmbeddingProvider& provider, std::size_t k) {
  std::vector<std::string> ids(cluster.member_ids.begin(), cluster.member_ids.end());
  auto queries = embed_usages(graph, ids, index, provider);
  return retrieval_label_from_results(graph.lemma, cluster.cluster_id, index, results_for(cluster, queries, index, k));
}

std::vector<std::pair<std::string, std::string>> unrelated_labeled_pairs(const WordUsageGraph& graph,
                                                                         std::size_t min_size) {
  std::map<std::string, bool> labeled;
  for (const auto& c : eligible_clusters(graph, min_size)) {
    for (const auto& id : c.member_ids) labeled[id] = true;
  }
  std::map<std::pair<std::string, std::string>, std::vector<int>> scores;
  for (const auto& j : graph.judgments) {
    auto key = std::minmax(j.usage_a, j.usage_b);
    scores[{key.first, key.second}].push_back(j.score);
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (auto& [pair, s] : scores) {
    if (!labeled.count(pair.first) || !labeled.count(pair.second)) continue;
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    // median == 1 <=> the middle element(s) are all 1
    const bool median_is_one = (n % 2 == 1) ? s[n / 2] == 1 : (s[n / 2 - 1] == 1 && s[n / 2] == 1);
    if (median_is_one) out.push_back(pair);
  }
  return out;
}

TuneKResult tune_k(std::span<const WordUsageGraph> graphs, const GlossIndex& index, const EmbeddingProvider& provider,
                   std::vector<std::size_t> candidates, std::size_t min_size) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no candidate k values");
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.front() == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  const std::size_t max_k = candidates.back();

  struct GraphWork {
    const WordUsageGraph* graph;
    std::vector<Cluster> clusters;
    std::map<int, std::vector<RetrievalResult>> results;  // at max_k
    std::vector<std::pair<std::string, std::string>> pairs;
  };
  std::vector<GraphWork> work;
  std::size_t total_pairs = 0;
  for (const auto& g : graphs) {
    GraphWork w{&g, eligible_clusters(g, min_size), {}, unrelated_labeled_pairs(g, min_size)};
    total_pairs += w.pairs.size();
    if (w.pairs.empty()) continue;
    std::vector<std::string> ids;
    for (const auto& c : w.clusters) ids.insert(ids.end(), c.member_ids.begin(), c.member_ids.end());
    auto queries = embed_usages(g, ids, index, provider);
    for (const auto& c : w.clusters) w.results[c.cluster_id] = results_for(c, queries, index, max_k);
    work.push_back(std::move(w));
  }
  if (total_pairs == 0) {
    throw Error(ErrorCode::kNoJudgedPairs, "no judged usage pair with median score 1 between labeled usages");
  }

  TuneKResult out;
  for (std::size_t k : candidates) {
    KCollision kc;
    kc.k = k;
    for (const auto& w : work) {
      std::map<std::string, std::string> definition_of;
      for (const auto& c : w.clusters) {
        auto per_usage = w.results.at(c.cluster_id);
        // top-k is a prefix of top-max_k under the total order used by retrieve
        for (auto& r : per_usage) r.top_k.resize(std::min(k, r.top_k.size()));
        auto label = retrieval_label_from_results(w.graph->lemma, c.cluster_id, index, std::move(per_usage));
        for (const auto& id : c.member_ids) definition_of[id] = label.definition_text;
      }
      for (const auto& [a, b] : w.pairs) {
        ++kc.pairs;
        if (definition_of.at(a) == definition_of.at(b)) ++kc.collisions;
      }
    }
    kc.probability = static_cast<double>(kc.collisions) / static_cast<double>(kc.pairs);
    out.per_k.push_back(kc);
  }
  const KCollision* best = &out.per_k.front();
  for (const auto& kc : out.per_k) {
    if (kc.probability < best->probability) best = &kc;
  }
  out.k = best->k;
  return out;
}

}  // namespace wugdef
