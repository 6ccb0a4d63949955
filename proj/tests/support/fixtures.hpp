#pragma once

// Shared fixture builders for the unit and acceptance suites.

#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wugdef/embeddings.hpp"
#include "wugdef/error.hpp"
#include "wugdef/lexicon.hpp"
#include "wugdef/wug.hpp"

namespace wugdef::testing {

inline Usage make_usage(std::string id, std::vector<std::string> tokens, std::size_t target = 0,
                        std::optional<std::string> pos = std::nullopt, std::string lemma = "w") {
  Usage u;
  u.usage_id = std::move(id);
  u.lemma = std::move(lemma);
  u.pos = std::move(pos);
  u.context_tokens = std::move(tokens);
  u.target_index = target;
  u.grouping = "1";
  u.language = "en";
  return u;
}

inline void add_usage(WordUsageGraph& g, Usage u) {
  std::string id = u.usage_id;
  g.usages.emplace(id, std::move(u));
}

// Graph whose clusters have the given (id, size) shapes. Usage ids are
// "<lemma>_<cluster>_<n>" with zero-padded n; contexts are "<lemma> c<id> n<n>".
inline WordUsageGraph make_graph(const std::string& lemma, const std::vector<std::pair<int, std::size_t>>& shapes,
                                 bool diachronic = true) {
  WordUsageGraph g;
  g.lemma = lemma;
  g.language = "en";
  g.diachronic = diachronic;
  for (const auto& [cid, size] : shapes) {
    Cluster c;
    c.cluster_id = cid;
    for (std::size_t n = 0; n < size; ++n) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%s_%d_%03zu", lemma.c_str(), cid, n);
      add_usage(g, make_usage(buf, {lemma, "c" + std::to_string(cid), "n" + std::to_string(n)}, 0, std::nullopt, lemma));
      c.member_ids.insert(buf);
    }
    g.clusters.push_back(std::move(c));
  }
  return g;
}

// Embedder with a fixed text -> vector table. Unknown texts are an error.
class TableEmbedder final : public EmbeddingProvider {
 public:
  explicit TableEmbedder(std::map<std::string, Vector> table) : table_(std::move(table)) {}
  void set(const std::string& text, Vector v) { table_[text] = std::move(v); }
  std::string name() const override { return "table"; }
  mutable std::size_t calls = 0;
  mutable std::size_t texts_embedded = 0;

 protected:
  std::vector<Vector> embed_impl(std::span<const std::string> texts) const override {
    ++calls;
    texts_embedded += texts.size();
    std::vector<Vector> out;
    for (const auto& t : texts) {
      auto it = table_.find(t);
      if (it == table_.end()) throw Error(ErrorCode::kProviderUnavailable, "no vector for '" + t + "'");
      out.push_back(it->second);
    }
    return out;
  }

 private:
  std::map<std::string, Vector> table_;
};

inline Vector random_vector(std::mt19937_64& rng, std::size_t dim, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(dim);
  for (auto& x : v) x = d(rng);
  return Vector(std::move(v));
}

// Two graphs over a four-gloss index with hand-placed usage vectors.
// Graph "g1": cluster 0 usages sit near gloss 1, cluster 1 near gloss 2, and
// both lean towards gloss 3, so at k=1 the clusters get glosses 1 and 2 but
// from k=3 on the summed-score tie-break hands both of them gloss 3.
// Graph "g2": clusters sit on glosses 1 and 4 and never collide.
// Each graph has one cross-cluster pair judged 1 by two annotators, so the
// collision rates over {1,3,10} are (0, 0.5, 0.5).
struct TuneFixture {
  std::vector<WordUsageGraph> graphs;
  Lexicon lexicon;
  TableEmbedder embedder;
};

inline TuneFixture tune_fixture() {
  std::vector<Sense> senses;
  std::map<std::string, Vector> table;
  for (int s = 1; s <= 4; ++s) {
    std::vector<double> e(4, 0.0);
    e[s - 1] = 1.0;
    std::string gloss = "gloss " + std::to_string(s);
    senses.push_back(Sense{"s" + std::to_string(s), "g", std::nullopt, gloss, {}});
    table.emplace(gloss, Vector(e));
  }
  auto place = [&](WordUsageGraph& g, int cid, const std::vector<std::vector<double>>& vs) {
    const auto* c = g.find_cluster(cid);
    std::size_t i = 0;
    for (const auto& id : c->member_ids) table.emplace(g.usage(id).text(), Vector(vs[i++]));
  };
  auto judge = [](WordUsageGraph& g, const std::string& a, const std::string& b) {
    g.judgments.push_back({a, b, "ann1", 1});
    g.judgments.push_back({a, b, "ann2", 1});
  };
  auto g1 = make_graph("g1", {{0, 3}, {1, 3}});
  place(g1, 0, {{1, 0, 0.9, 0}, {1, 0, 0.9, 0}, {0.5, 0, 1, 0}});
  place(g1, 1, {{0, 1, 0.9, 0}, {0, 1, 0.9, 0}, {0, 0.5, 1, 0}});
  judge(g1, "g1_0_000", "g1_1_000");
  auto g2 = make_graph("g2", {{0, 3}, {1, 3}});
  place(g2, 0, {{1, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}});
  place(g2, 1, {{0, 0, 0, 1}, {0, 0, 0, 1}, {0, 0, 0, 1}});
  judge(g2, "g2_0_000", "g2_1_000");
  return TuneFixture{{g1, g2}, Lexicon(senses), TableEmbedder(table)};
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "wugdef-test-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace wugdef::testing
