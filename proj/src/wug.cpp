#include "wugdef/wug.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "json_util.hpp"
#include "wugdef/text.hpp"

namespace wugdef {
namespace fs = std::filesystem;
using nlohmann::json;

std::string Usage::text() const { return join(context_tokens, " "); }

const Usage& WordUsageGraph::usage(const std::string& usage_id) const {
  auto it = usages.find(usage_id);
  if (it == usages.end()) {
    throw Error(ErrorCode::kDanglingReference, "unknown usage_id '" + usage_id + "'");
  }
  return it->second;
}

const Cluster* WordUsageGraph::find_cluster(int cluster_id) const {
  for (const auto& c : clusters) {
    if (c.cluster_id == cluster_id) return &c;
  }
  return nullptr;
}

void validate_graph(const WordUsageGraph& graph) {
  const std::string where = "graph '" + graph.lemma + "': ";
  for (const auto& [id, u] : graph.usages) {
    if (id != u.usage_id) {
      throw Error(ErrorCode::kInvalidGraph, where + "usage key '" + id + "' != usage_id '" + u.usage_id + "'");
    }
    if (u.context_tokens.empty()) {
      throw Error(ErrorCode::kInvalidGraph, where + "usage '" + id + "' has an empty context");
    }
    if (u.target_index >= u.context_tokens.size()) {
      throw Error(ErrorCode::kInvalidGraph, where + "usage '" + id + "' target_index " +
                                                std::to_string(u.target_index) + " out of range");
    }
  }
  for (const auto& j : graph.judgments) {
    for (const auto* id : {&j.usage_a, &j.usage_b}) {
      if (!graph.usages.count(*id)) {
        throw Error(ErrorCode::kDanglingReference, where + "judgment references unknown usage_id '" + *id + "'");
      }
    }
    if (j.usage_a == j.usage_b) {
      throw Error(ErrorCode::kInvalidGraph, where + "self-judgment on '" + j.usage_a + "'");
    }
    if (j.score < 1 || j.score > 4) {
      throw Error(ErrorCode::kInvalidGraph, where + "judgment score " + std::to_string(j.score) +
                                                " outside 1..4");
    }
  }
  std::set<int> seen_ids;
  std::set<std::string> seen_members;
  for (const auto& c : graph.clusters) {
    if (!seen_ids.insert(c.cluster_id).second) {
      throw Error(ErrorCode::kInvalidGraph, where + "duplicate cluster_id " + std::to_string(c.cluster_id));
    }
    for (const auto& m : c.member_ids) {
      if (!graph.usages.count(m)) {
        throw Error(ErrorCode::kDanglingReference, where + "cluster " + std::to_string(c.cluster_id) +
                                                       " references unknown usage_id '" + m + "'");
      }
      if (!seen_members.insert(m).second) {
        throw Error(ErrorCode::kInvalidGraph, where + "usage '" + m + "' belongs to more than one cluster");
      }
    }
  }
}

json graph_to_json(const WordUsageGraph& graph) {
  json usages = json::array();
  for (const auto& [id, u] : graph.usages) {
    json ju = {{"usage_id", u.usage_id},
               {"lemma", u.lemma},
               {"pos", u.pos ? json(*u.pos) : json(nullptr)},
               {"context_tokens", u.context_tokens},
               {"target_index", u.target_index},
               {"grouping", u.grouping},
               {"language", u.language}};
    usages.push_back(std::move(ju));
  }
  json judgments = json::array();
  for (const auto& j : graph.judgments) {
    judgments.push_back({{"usage_a", j.usage_a}, {"usage_b", j.usage_b},
                         {"annotator", j.annotator}, {"score", j.score}});
  }
  std::vector<const Cluster*> ordered;
  for (const auto& c : graph.clusters) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(),
            [](const Cluster* a, const Cluster* b) { return a->cluster_id < b->cluster_id; });
  json clusters = json::array();
  for (const auto* c : ordered) {
    clusters.push_back({{"cluster_id", c->cluster_id}, {"member_ids", c->member_ids}});
  }
  return {{"lemma", graph.lemma},
          {"language", graph.language},
          {"diachronic", graph.diachronic},
          {"usages", std::move(usages)},
          {"judgments", std::move(judgments)},
          {"clusters", std::move(clusters)}};
}

WordUsageGraph graph_from_json(const json& j) {
  WordUsageGraph g;
  try {
    g.lemma = detail::require_string(j, "lemma");
    g.language = detail::require_string(j, "language");
    g.diachronic = detail::require(j, "diachronic").get<bool>();
    for (const auto& ju : detail::require(j, "usages")) {
      Usage u;
      u.usage_id = detail::require_string(ju, "usage_id");
      u.lemma = detail::optional_string(ju, "lemma").value_or(g.lemma);
      u.pos = detail::optional_string(ju, "pos");
      u.context_tokens = detail::require(ju, "context_tokens").get<std::vector<std::string>>();
      u.target_index = detail::require(ju, "target_index").get<std::size_t>();
      u.grouping = detail::optional_string(ju, "grouping").value_or("");
      u.language = detail::optional_string(ju, "language").value_or(g.language);
      std::string id = u.usage_id;
      if (!g.usages.emplace(id, std::move(u)).second) {
        throw Error(ErrorCode::kDuplicateUsageId, "graph '" + g.lemma + "': duplicate usage_id '" + id + "'");
      }
    }
    if (auto it = j.find("judgments"); it != j.end() && !it->is_null()) {
      for (const auto& jj : *it) {
        g.judgments.push_back({detail::require_string(jj, "usage_a"), detail::require_string(jj, "usage_b"),
                               detail::optional_string(jj, "annotator").value_or(""),
                               detail::require(jj, "score").get<int>()});
      }
    }
    for (const auto& jc : detail::require(j, "clusters")) {
      Cluster c;
      c.cluster_id = detail::require(jc, "cluster_id").get<int>();
      for (const auto& m : detail::require(jc, "member_ids")) c.member_ids.insert(m.get<std::string>());
      g.clusters.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed graph object: ") + e.what());
  }
  std::sort(g.clusters.begin(), g.clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.cluster_id < b.cluster_id; });
  validate_graph(g);
  return g;
}

std::string serialize_graph(const WordUsageGraph& graph) { return graph_to_json(graph).dump(); }

TsvMapping tsv_mapping_from_json(const json& j) {
  TsvMapping m;
  try {
    m.language = detail::require_string(j, "language", ErrorCode::kConfigInvalid);
    m.diachronic = j.value("diachronic", true);
    if (auto d = j.value("delimiter", std::string("\t")); d.size() == 1) {
      m.delimiter = d[0];
    } else {
      throw Error(ErrorCode::kConfigInvalid, "delimiter must be a single character");
    }
    const auto& uses = detail::require(j, "uses", ErrorCode::kConfigInvalid);
    m.uses_file = uses.value("file", m.uses_file);
    m.usage_id_column = detail::require_string(uses, "usage_id", ErrorCode::kConfigInvalid);
    m.context_column = detail::require_string(uses, "context", ErrorCode::kConfigInvalid);
    m.target_column = detail::require_string(uses, "target", ErrorCode::kConfigInvalid);
    auto pos_kind = detail::require_string(uses, "target_position", ErrorCode::kConfigInvalid);
    if (pos_kind == "token_index") {
      m.target_position = TargetPosition::kTokenIndex;
    } else if (pos_kind == "char_span") {
      m.target_position = TargetPosition::kCharSpan;
    } else {
      throw Error(ErrorCode::kConfigInvalid, "target_position must be token_index or char_span");
    }
    m.grouping_column = uses.value("grouping", std::string());
    m.lemma_column = uses.value("lemma", std::string());
    m.pos_column = uses.value("pos", std::string());
    if (auto it = j.find("judgments"); it != j.end()) {
      m.judgments_file = it->value("file", m.judgments_file);
      m.judgment_a_column = it->value("usage_a", m.judgment_a_column);
      m.judgment_b_column = it->value("usage_b", m.judgment_b_column);
      m.annotator_column = it->value("annotator", m.annotator_column);
      m.score_column = it->value("score", m.score_column);
    }
    if (auto it = j.find("clusters"); it != j.end()) {
      m.clusters_file = it->value("file", m.clusters_file);
      m.cluster_usage_column = it->value("usage_id", m.cluster_usage_column);
      m.cluster_id_column = it->value("cluster_id", m.cluster_id_column);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, std::string("malformed mapping config: ") + e.what());
  }
  return m;
}

TsvMapping load_tsv_mapping(const fs::path& path) {
  return tsv_mapping_from_json(detail::parse_json(read_file(path), path.string()));
}

namespace {

std::string substitute_lemma(std::string pattern, const std::string& lemma) {
  const std::string key = "{lemma}";
  for (auto pos = pattern.find(key); pos != std::string::npos; pos = pattern.find(key, pos + lemma.size())) {
    pattern.replace(pos, key.size(), lemma);
  }
  return pattern;
}

long parse_long(const std::string& s, const std::string& what) {
  long v = 0;
  auto t = trim(s);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error(ErrorCode::kParse, what + ": expected an integer, got '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    auto t = trim(s);
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, what + ": expected a number, got '" + s + "'");
  }
}

// Byte offset of the `cp`-th code point of a UTF-8 string (or size() when cp
// equals the code point count).
std::optional<std::size_t> codepoint_to_byte(std::string_view text, std::size_t cp) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) == 0x80) continue;
    if (count == cp) return i;
    ++count;
  }
  if (count == cp) return text.size();
  return std::nullopt;
}

// Index of the whitespace token covering byte offset `byte`.
std::optional<std::size_t> token_at_byte(std::string_view text, std::size_t byte) {
  std::size_t token = 0;
  std::size_t i = 0;
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (i < text.size()) {
    while (i < text.size() && space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && !space(text[i])) ++i;
    if (byte >= start && byte < i) return token;
    ++token;
  }
  return std::nullopt;
}

void collect(LoadReport& report, const fs::path& file, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    report.failures.push_back({file, e.code(), e.what()});
  }
}

void load_jsonl_file(const fs::path& file, LoadReport& report) {
  auto lines = read_lines(file);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    collect(report, file, [&] {
      try {
        report.graphs.push_back(graph_from_json(detail::parse_json(lines[i], file.string())));
      } catch (const Error& e) {
        throw Error(e.code(), file.string() + ":" + std::to_string(i + 1) + ": " + e.what());
      }
    });
  }
}

}  // namespace

WordUsageGraph load_tsv_graph(const fs::path& dir, const TsvMapping& m) {
  const std::string dir_lemma = dir.filename().string();
  WordUsageGraph g;
  g.language = m.language;
  g.diachronic = m.diachronic;

  auto uses = read_delimited(dir / substitute_lemma(m.uses_file, dir_lemma), m.delimiter);
  const auto c_id = uses.column(m.usage_id_column);
  const auto c_ctx = uses.column(m.context_column);
  const auto c_tgt = uses.column(m.target_column);
  const auto c_grp = m.grouping_column.empty() ? std::optional<std::size_t>() : uses.column(m.grouping_column);
  const auto c_lem = m.lemma_column.empty() ? std::optional<std::size_t>() : uses.column(m.lemma_column);
  const auto c_pos = m.pos_column.empty() ? std::optional<std::size_t>() : uses.column(m.pos_column);

  for (const auto& row : uses.rows) {
    Usage u;
    u.usage_id = row[c_id];
    u.language = m.language;
    u.lemma = c_lem ? row[*c_lem] : dir_lemma;
    if (c_pos && !trim(row[*c_pos]).empty()) u.pos = trim(row[*c_pos]);
    if (c_grp) u.grouping = row[*c_grp];
    const std::string& context = row[c_ctx];
    u.context_tokens = split_whitespace(context);
    const std::string where = uses.source.string() + ": usage '" + u.usage_id + "'";
    if (m.target_position == TargetPosition::kTokenIndex) {
      long idx = parse_long(row[c_tgt], where);
      if (idx < 0) throw Error(ErrorCode::kInvalidGraph, where + ": negative target index");
      u.target_index = static_cast<std::size_t>(idx);
    } else {
      // "start:end" in code points; the target token is the one covering start.
      const auto& span = row[c_tgt];
      auto colon = span.find(':');
      long start = parse_long(colon == std::string::npos ? span : span.substr(0, colon), where);
      auto byte = start < 0 ? std::nullopt : codepoint_to_byte(context, static_cast<std::size_t>(start));
      auto token = byte ? token_at_byte(context, *byte) : std::nullopt;
      if (!token) {
        throw Error(ErrorCode::kInvalidGraph, where + ": character span '" + span + "' does not start on a token");
      }
      u.target_index = *token;
    }
    if (g.lemma.empty()) g.lemma = u.lemma;
    std::string id = u.usage_id;
    if (!g.usages.emplace(id, std::move(u)).second) {
      throw Error(ErrorCode::kDuplicateUsageId, uses.source.string() + ": duplicate usage_id '" + id + "'");
    }
  }
  if (g.lemma.empty()) g.lemma = dir_lemma;

  const fs::path judgments_path = dir / substitute_lemma(m.judgments_file, dir_lemma);
  if (fs::exists(judgments_path)) {
    auto jt = read_delimited(judgments_path, m.delimiter);
    const auto c_a = jt.column(m.judgment_a_column);
    const auto c_b = jt.column(m.judgment_b_column);
    const auto c_s = jt.column(m.score_column);
    const auto c_ann = jt.has_column(m.annotator_column) ? std::optional<std::size_t>(jt.column(m.annotator_column))
                                                         : std::nullopt;
    for (const auto& row : jt.rows) {
      double score = parse_double(row[c_s], jt.source.string());
      // 0 is the "cannot decide" marker in DWUG releases; it carries no proximity.
      if (score == 0.0) continue;
      if (score != std::floor(score)) {
        throw Error(ErrorCode::kInvalidGraph, jt.source.string() + ": non-integer judgment '" + row[c_s] + "'");
      }
      g.judgments.push_back({row[c_a], row[c_b], c_ann ? row[*c_ann] : std::string(), static_cast<int>(score)});
    }
  }

  auto ct = read_delimited(dir / substitute_lemma(m.clusters_file, dir_lemma), m.delimiter);
  const auto c_uid = ct.column(m.cluster_usage_column);
  const auto c_cid = ct.column(m.cluster_id_column);
  std::map<int, Cluster> by_id;
  for (const auto& row : ct.rows) {
    int cid = static_cast<int>(parse_long(row[c_cid], ct.source.string()));
    auto& c = by_id[cid];
    c.cluster_id = cid;
    c.member_ids.insert(row[c_uid]);
  }
  for (auto& [id, c] : by_id) g.clusters.push_back(std::move(c));

  validate_graph(g);
  return g;
}

LoadReport load_graphs(const fs::path& path, GraphFormat format, const TsvMapping* mapping) {
  LoadReport report;
  if (!fs::exists(path)) {
    report.failures.push_back({path, ErrorCode::kIo, "path does not exist: " + path.string()});
    return report;
  }
  if (format == GraphFormat::kNormalizedJsonl) {
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) collect(report, f, [&] { load_jsonl_file(f, report); });
    } else {
      collect(report, path, [&] { load_jsonl_file(path, report); });
    }
  } else {
    if (!mapping) throw Error(ErrorCode::kConfigInvalid, "TSV ingestion requires a column-mapping config");
    const auto& m = *mapping;
    auto is_graph_dir = [&](const fs::path& d) {
      return fs::exists(d / substitute_lemma(m.uses_file, d.filename().string()));
    };
    std::vector<fs::path> dirs;
    if (is_graph_dir(path)) {
      dirs.push_back(path);
    } else {
      for (const auto& e : fs::directory_iterator(path)) {
        if (e.is_directory() && is_graph_dir(e.path())) dirs.push_back(e.path());
      }
      std::sort(dirs.begin(), dirs.end());
    }
    for (const auto& d : dirs) {
      collect(report, d, [&] { report.graphs.push_back(load_tsv_graph(d, m)); });
    }
  }
  std::stable_sort(report.graphs.begin(), report.graphs.end(),
                   [](const WordUsageGraph& a, const WordUsageGraph& b) { return a.lemma < b.lemma; });
  return report;
}

void write_graphs(const fs::path& dir, std::span<const WordUsageGraph> graphs) {
  fs::create_directories(dir);
  for (const auto& g : graphs) {
    std::string name = g.lemma;
    std::replace(name.begin(), name.end(), '/', '_');
    write_file(dir / (name + ".jsonl"), serialize_graph(g) + "\n");
  }
}

bool is_eligible(const Cluster& cluster, std::size_t min_size) {
  return cluster.cluster_id != kNoiseClusterId && cluster.size() >= min_size;
}

std::vector<Cluster> eligible_clusters(const WordUsageGraph& graph, std::size_t min_size) {
  std::vector<Cluster> out;
  for (const auto& c : graph.clusters) {
    if (is_eligible(c, min_size)) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const Cluster& a, const Cluster& b) { return a.cluster_id < b.cluster_id; });
  return out;
}

StatsRow graph_stats(std::span<const WordUsageGraph> graphs, std::size_t min_size, std::string collection) {
  StatsRow row;
  row.collection = std::move(collection);
  row.targets = graphs.size();
  row.diachronic = !graphs.empty();
  for (const auto& g : graphs) {
    row.clusters += g.clusters.size();
    for (const auto& c : g.clusters) {
      if (is_eligible(c, min_size)) ++row.eligible;
    }
    row.diachronic = row.diachronic && g.diachronic;
  }
  return row;
}

std::vector<StatsRow> graph_stats_by_language(std::span<const WordUsageGraph> graphs, std::size_t min_size) {
  std::map<std::string, std::vector<WordUsageGraph>> groups;
  for (const auto& g : graphs) groups[g.language].push_back(g);
  std::vector<StatsRow> rows;
  for (const auto& [lang, gs] : groups) rows.push_back(graph_stats(gs, min_size, lang));
  return rows;
}

}  // namespace wugdef
