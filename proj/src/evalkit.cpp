#include "wugdef/evalkit.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <tuple>

#include "json_util.hpp"
#include "wugdef/error.hpp"
#include "wugdef/text.hpp"

namespace wugdef {
namespace fs = std::filesystem;
using nlohmann::json;

std::string_view choice_name(Choice c) {
  switch (c) {
    case Choice::kFirst: return "first";
    case Choice::kSecond: return "second";
    case Choice::kBoth: return "both";
    case Choice::kNone: return "none";
  }
  return "none";
}

Choice parse_choice(std::string_view name) {
  if (name == "first") return Choice::kFirst;
  if (name == "second") return Choice::kSecond;
  if (name == "both") return Choice::kBoth;
  if (name == "none") return Choice::kNone;
  throw Error(ErrorCode::kInvalidArgument, "unknown choice '" + std::string(name) + "'");
}

namespace {

std::string_view slot_name(Slot s) { return s == Slot::kTrue ? "true" : "filler"; }

Slot parse_slot(const std::string& s) {
  if (s == "true") return Slot::kTrue;
  if (s == "filler") return Slot::kFiller;
  throw Error(ErrorCode::kParse, "unknown presentation slot '" + s + "'");
}

json examples_to_json(const std::vector<ExampleSentence>& xs) {
  json out = json::array();
  for (const auto& x : xs) {
    out.push_back({{"usage_id", x.usage_id}, {"tokens", x.tokens}, {"target_index", x.target_index}});
  }
  return out;
}

std::vector<ExampleSentence> examples_from_json(const json& j) {
  std::vector<ExampleSentence> out;
  for (const auto& x : j) {
    out.push_back({x.at("usage_id").get<std::string>(), x.at("tokens").get<std::vector<std::string>>(),
                   x.at("target_index").get<std::size_t>()});
  }
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform integer in [0, n) without std::uniform_int_distribution, whose
// output differs between standard libraries.
std::size_t bounded(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % range);
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

template <typename T>
void shuffle(std::vector<T>& xs, std::mt19937_64& rng) {
  for (std::size_t i = xs.size(); i > 1; --i) std::swap(xs[i - 1], xs[bounded(rng, i)]);
}

std::mt19937_64 keyed_rng(std::uint64_t seed, std::initializer_list<std::string_view> parts) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto p : parts) {
    h = fnv1a64(p, h);
    h = fnv1a64(std::string_view("\x1f", 1), h);
  }
  return std::mt19937_64(splitmix64(seed ^ splitmix64(h)));
}

std::vector<ExampleSentence> sample_examples(const WordUsageGraph& g, const Cluster& c, std::size_t n,
                                             std::mt19937_64& rng) {
  std::vector<std::string> ids(c.member_ids.begin(), c.member_ids.end());
  const std::size_t take = std::min(n, ids.size());
  // partial Fisher-Yates: the first `take` slots are a uniform sample
  for (std::size_t i = 0; i < take; ++i) std::swap(ids[i], ids[i + bounded(rng, ids.size() - i)]);
  std::vector<ExampleSentence> out;
  for (std::size_t i = 0; i < take; ++i) {
    const auto& u = g.usage(ids[i]);
    out.push_back({u.usage_id, u.context_tokens, u.target_index});
  }
  return out;
}

// Everything about a trial that is shared by all methods.
struct Trial {
  int filler_cluster_id;
  std::vector<ExampleSentence> examples_true;
  std::vector<ExampleSentence> examples_filler;
  std::array<Slot, 2> order;
};

}  // namespace

json item_to_json(const EvalItem& item) {
  return {{"item_id", item.item_id},
          {"dataset", item.dataset},
          {"lemma", item.lemma},
          {"definition", item.definition_text},
          {"definition_language", item.definition_language},
          {"true_cluster_id", item.true_cluster_id},
          {"filler_cluster_id", item.filler_cluster_id},
          {"examples_true", examples_to_json(item.examples_true)},
          {"examples_filler", examples_to_json(item.examples_filler)},
          {"presentation_order", {slot_name(item.presentation_order[0]), slot_name(item.presentation_order[1])}},
          {"method_hidden", item.method_hidden}};
}

EvalItem item_from_json(const json& j) {
  EvalItem it;
  try {
    it.item_id = detail::require_string(j, "item_id");
    it.dataset = detail::require_string(j, "dataset");
    it.lemma = detail::require_string(j, "lemma");
    it.definition_text = detail::require_string(j, "definition");
    it.definition_language = detail::require_string(j, "definition_language");
    it.true_cluster_id = j.at("true_cluster_id").get<int>();
    it.filler_cluster_id = j.at("filler_cluster_id").get<int>();
    it.examples_true = examples_from_json(j.at("examples_true"));
    it.examples_filler = examples_from_json(j.at("examples_filler"));
    const auto& order = j.at("presentation_order");
    it.presentation_order = {parse_slot(order.at(0).get<std::string>()), parse_slot(order.at(1).get<std::string>())};
    it.method_hidden = detail::require_string(j, "method_hidden");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed item: ") + e.what());
  }
  if (it.presentation_order[0] == it.presentation_order[1]) {
    throw Error(ErrorCode::kParse, "item '" + it.item_id + "': presentation_order is not a permutation");
  }
  return it;
}

json annotator_payload(const EvalItem& item, std::size_t position, std::size_t total) {
  static constexpr std::array<std::string_view, 2> kSlotLabels{"Cluster A", "Cluster B"};
  json slots = json::array();
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& examples = item.presentation_order[s] == Slot::kTrue ? item.examples_true : item.examples_filler;
    json ex = json::array();
    for (const auto& e : examples) ex.push_back({{"tokens", e.tokens}, {"target_index", e.target_index}});
    slots.push_back({{"label", kSlotLabels[s]}, {"examples", std::move(ex)}});
  }
  return {{"item_id", item.item_id},
          {"lemma", item.lemma},
          {"definition", item.definition_text},
          {"guideline", kAnnotatorGuideline},
          {"slots", std::move(slots)},
          {"choices",
           json::array({{{"value", "first"}, {"label", kSlotLabels[0]}},
                        {{"value", "second"}, {"label", kSlotLabels[1]}},
                        {{"value", "both"}, {"label", "Fits both"}},
                        {{"value", "none"}, {"label", "Fits none"}}})},
          {"progress", {{"position", position}, {"total", total}}}};
}

BuildResult build_items(std::span<const WordUsageGraph> graphs, std::span<const ClusterLabel> labels,
                        std::uint64_t seed, const BuildOptions& options) {
  std::map<std::string, const WordUsageGraph*> by_lemma;
  for (const auto& g : graphs) by_lemma.emplace(g.lemma, &g);

  std::vector<const ClusterLabel*> ordered;
  for (const auto& l : labels) ordered.push_back(&l);
  std::sort(ordered.begin(), ordered.end(), [](const ClusterLabel* a, const ClusterLabel* b) {
    return std::tie(a->lemma, a->cluster_id, a->method, a->definition_language, a->definition_text) <
           std::tie(b->lemma, b->cluster_id, b->method, b->definition_language, b->definition_text);
  });

  BuildResult result;
  std::map<std::pair<std::string, int>, Trial> trials;
  for (const auto* l : ordered) {
    auto skip = [&](std::string reason) { result.skipped.push_back({l->lemma, l->cluster_id, l->method, std::move(reason)}); };
    auto git = by_lemma.find(l->lemma);
    if (git == by_lemma.end()) {
      skip("no graph for lemma");
      continue;
    }
    const auto& g = *git->second;
    const auto eligible = eligible_clusters(g, options.min_size);
    auto self = std::find_if(eligible.begin(), eligible.end(),
                             [&](const Cluster& c) { return c.cluster_id == l->cluster_id; });
    if (self == eligible.end()) {
      skip("cluster is not eligible");
      continue;
    }
    if (eligible.size() < 2) {
      skip("lemma has no other eligible cluster to use as filler");
      continue;
    }
    auto key = std::make_pair(l->lemma, l->cluster_id);
    auto tit = trials.find(key);
    if (tit == trials.end()) {
      auto rng = keyed_rng(seed, {options.dataset, l->lemma, std::to_string(l->cluster_id)});
      std::vector<const Cluster*> others;
      for (const auto& c : eligible) {
        if (c.cluster_id != l->cluster_id) others.push_back(&c);
      }
      const Cluster& filler = *others[bounded(rng, others.size())];
      Trial t;
      t.filler_cluster_id = filler.cluster_id;
      t.examples_true = sample_examples(g, *self, options.max_examples, rng);
      t.examples_filler = sample_examples(g, filler, options.max_examples, rng);
      t.order = bounded(rng, 2) == 0 ? std::array<Slot, 2>{Slot::kTrue, Slot::kFiller}
                                     : std::array<Slot, 2>{Slot::kFiller, Slot::kTrue};
      tit = trials.emplace(key, std::move(t)).first;
    }
    const Trial& t = tit->second;
    EvalItem item;
    item.dataset = options.dataset;
    item.lemma = l->lemma;
    item.definition_text = l->definition_text;
    item.definition_language = l->definition_language;
    item.true_cluster_id = l->cluster_id;
    item.filler_cluster_id = t.filler_cluster_id;
    item.examples_true = t.examples_true;
    item.examples_filler = t.examples_filler;
    item.presentation_order = t.order;
    item.method_hidden = std::string(method_name(l->method));
    result.items.push_back(std::move(item));
  }

  auto order_rng = keyed_rng(seed, {options.dataset, "item-order"});
  shuffle(result.items, order_rng);
  for (std::size_t i = 0; i < result.items.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "item-%05zu", i + 1);
    result.items[i].item_id = buf;
  }
  return result;
}

void write_items(const fs::path& path, std::span<const EvalItem> items) {
  std::string out;
  for (const auto& it : items) out += item_to_json(it).dump() + "\n";
  write_file(path, out);
}

std::vector<EvalItem> read_items(const fs::path& path) {
  std::vector<EvalItem> items;
  std::set<std::string> ids;
  auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    auto item = item_from_json(detail::parse_json(lines[i], path.string() + ":" + std::to_string(i + 1)));
    if (!ids.insert(item.item_id).second) {
      throw Error(ErrorCode::kParse, path.string() + ": duplicate item_id '" + item.item_id + "'");
    }
    items.push_back(std::move(item));
  }
  return items;
}

json record_to_json(const AnnotationRecord& r) {
  json j = {{"item_id", r.item_id},
            {"annotator_id", r.annotator_id},
            {"choice", choice_name(r.choice)},
            {"timestamp", r.timestamp}};
  if (r.note) j["note"] = *r.note;
  return j;
}

AnnotationRecord record_from_json(const json& j) {
  AnnotationRecord r;
  r.item_id = detail::require_string(j, "item_id");
  r.annotator_id = detail::require_string(j, "annotator_id");
  r.choice = parse_choice(detail::require_string(j, "choice"));
  r.note = detail::optional_string(j, "note");
  r.timestamp = detail::optional_string(j, "timestamp").value_or("");
  return r;
}

std::vector<AnnotationRecord> read_records(const fs::path& path) {
  std::vector<AnnotationRecord> out;
  if (!fs::exists(path)) return out;
  const std::string content = read_file(path);
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < content.size()) {
    auto nl = content.find('\n', start);
    const bool terminated = nl != std::string::npos;
    std::string line = content.substr(start, terminated ? nl - start : std::string::npos);
    start = terminated ? nl + 1 : content.size();
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(detail::parse_json(line, path.string() + ":" + std::to_string(line_no))));
    } catch (const Error&) {
      if (!terminated) break;  // torn final append
      throw;
    }
  }
  return out;
}

std::map<std::string, Outcome> aggregate(std::span<const AnnotationRecord> records, std::span<const EvalItem> items) {
  std::map<std::string, const EvalItem*> by_id;
  for (const auto& it : items) by_id.emplace(it.item_id, &it);
  std::map<std::string, std::map<std::string, Choice>> votes;
  for (const auto& r : records) {
    if (!by_id.count(r.item_id)) throw Error(ErrorCode::kUnknownItem, "record for unknown item '" + r.item_id + "'");
    if (!votes[r.item_id].emplace(r.annotator_id, r.choice).second) {
      throw Error(ErrorCode::kDuplicateRecord,
                  "annotator '" + r.annotator_id + "' answered item '" + r.item_id + "' twice");
    }
  }
  std::map<std::string, Outcome> out;
  for (const auto& [item_id, by_annotator] : votes) {
    std::array<std::size_t, 4> counts{};
    for (const auto& [annotator, c] : by_annotator) ++counts[static_cast<std::size_t>(c)];
    const std::size_t n = by_annotator.size();
    std::optional<Choice> winner;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (2 * counts[c] > n) winner = static_cast<Choice>(c);
    }
    Outcome o = Outcome::kUnresolved;
    if (winner) {
      const auto& item = *by_id.at(item_id);
      switch (*winner) {
        case Choice::kFirst: o = item.presentation_order[0] == Slot::kTrue ? Outcome::kCorrect : Outcome::kWrong; break;
        case Choice::kSecond: o = item.presentation_order[1] == Slot::kTrue ? Outcome::kCorrect : Outcome::kWrong; break;
        case Choice::kBoth: o = Outcome::kBoth; break;
        case Choice::kNone: o = Outcome::kNone; break;
      }
    }
    out.emplace(item_id, o);
  }
  return out;
}

std::vector<ScoreRow> score(const std::map<std::string, Outcome>& outcomes, std::span<const EvalItem> items) {
  std::map<std::tuple<std::string, std::string, Method>, std::vector<Outcome>> groups;
  for (const auto& it : items) {
    auto o = outcomes.find(it.item_id);
    if (o == outcomes.end()) continue;
    groups[{it.dataset, it.definition_language, parse_method(it.method_hidden)}].push_back(o->second);
  }
  if (groups.empty()) throw Error(ErrorCode::kEmptySet, "no annotated items to score");
  std::vector<ScoreRow> rows;
  for (const auto& [key, os] : groups) {
    rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), eval_scores(os)});
  }
  return rows;
}

std::string score_report_tsv(std::span<const ScoreRow> rows) {
  std::string out = "dataset\tdefinition_language\tsystem\titems\taccuracy\tfits_both\tfits_none\tunresolved\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "\t%zu\t%.2f\t%.2f%%\t%.2f%%\t%.2f%%\n", r.scores.total, r.scores.accuracy,
                  r.scores.fits_both_pct, r.scores.fits_none_pct, r.scores.unresolved_pct);
    out += r.dataset + "\t" + r.definition_language + "\t" + std::string(method_display_name(r.method)) + buf;
  }
  return out;
}

json score_report_json(std::span<const ScoreRow> rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"dataset", r.dataset},
                   {"definition_language", r.definition_language},
                   {"system", method_display_name(r.method)},
                   {"method", method_name(r.method)},
                   {"items", r.scores.total},
                   {"correct", r.scores.correct},
                   {"wrong", r.scores.wrong},
                   {"both", r.scores.both},
                   {"none", r.scores.none},
                   {"unresolved", r.scores.unresolved},
                   {"accuracy", r.scores.accuracy},
                   {"fits_both_pct", r.scores.fits_both_pct},
                   {"fits_none_pct", r.scores.fits_none_pct},
                   {"unresolved_pct", r.scores.unresolved_pct}});
  }
  return out;
}

std::vector<fs::path> export_enriched(const fs::path& dir, std::span<const WordUsageGraph> graphs,
                                      std::span<const ClusterLabel> labels, std::size_t min_size) {
  std::map<std::string, const WordUsageGraph*> by_lemma;
  for (const auto& g : graphs) by_lemma.emplace(g.lemma, &g);
  std::map<std::tuple<std::string, Method, std::string>, std::map<int, const ClusterLabel*>> files;
  for (const auto& l : labels) {
    auto g = by_lemma.find(l.lemma);
    const Cluster* c = g == by_lemma.end() ? nullptr : g->second->find_cluster(l.cluster_id);
    if (!c || !is_eligible(*c, min_size)) {
      throw Error(ErrorCode::kInvalidArgument, "label for '" + l.lemma + "' cluster " + std::to_string(l.cluster_id) +
                                                   " does not reference an eligible cluster");
    }
    auto& rows = files[{l.lemma, l.method, l.definition_language}];
    if (!rows.emplace(l.cluster_id, &l).second) {
      throw Error(ErrorCode::kInvalidArgument, "two labels for '" + l.lemma + "' cluster " +
                                                   std::to_string(l.cluster_id) + " with the same method and language");
    }
  }
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (const auto& [key, rows] : files) {
    std::string lemma = std::get<0>(key);
    std::replace(lemma.begin(), lemma.end(), '/', '_');
    const auto path = dir / (lemma + "." + std::string(method_name(std::get<1>(key))) + "." + std::get<2>(key) + ".jsonl");
    std::string body;
    for (const auto& [cid, l] : rows) body += label_to_json(*l).dump() + "\n";
    write_file(path, body);
    written.push_back(path);
  }
  return written;
}

std::vector<ClusterLabel> read_enriched(const fs::path& path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  std::vector<ClusterLabel> out;
  for (const auto& f : files) {
    auto lines = read_lines(f);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (trim(lines[i]).empty()) continue;
      out.push_back(label_from_json(detail::parse_json(lines[i], f.string() + ":" + std::to_string(i + 1))));
    }
  }
  return out;
}

}  // namespace wugdef
