// wugdef command line: ingest, label, tune-k, build-eval, serve, score, stats, rouge.

#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wugdef/datasets.hpp"
#include "wugdef/defgen.hpp"
#include "wugdef/embeddings.hpp"
#include "wugdef/error.hpp"
#include "wugdef/evalkit.hpp"
#include "wugdef/lesk.hpp"
#include "wugdef/lexicon.hpp"
#include "wugdef/metrics.hpp"
#include "wugdef/retrieval.hpp"
#include "wugdef/service.hpp"
#include "wugdef/text.hpp"
#include "wugdef/wug.hpp"

namespace fs = std::filesystem;
using namespace wugdef;

namespace {

struct GraphInput {
  std::string data;
  std::string mapping;
  std::size_t min_size = 3;
};

void add_graph_options(CLI::App* cmd, GraphInput& in) {
  cmd->add_option("--data", in.data, "normalized JSONL file/directory, or TSV root with --mapping")->required();
  cmd->add_option("--mapping", in.mapping, "column mapping JSON for TSV input");
  cmd->add_option("--min-size", in.min_size, "smallest cluster that gets a label")->capture_default_str();
}

// Loads graphs and reports per-file failures on stderr. Returns the number of
// failures alongside the graphs.
std::pair<std::vector<WordUsageGraph>, std::size_t> load_input(const GraphInput& in) {
  LoadReport report;
  if (in.mapping.empty()) {
    report = load_graphs(in.data, GraphFormat::kNormalizedJsonl);
  } else {
    auto mapping = load_tsv_mapping(in.mapping);
    report = load_graphs(in.data, GraphFormat::kTsv, &mapping);
  }
  for (const auto& f : report.failures) {
    std::cerr << f.file.string() << ": " << error_code_name(f.code) << ": " << f.message << "\n";
  }
  return {std::move(report.graphs), report.failures.size()};
}

std::unique_ptr<EmbeddingProvider> make_embedder(const std::string& url, std::size_t dim) {
  if (url.empty()) return std::make_unique<HashingEmbedder>(dim);
  RemoteEmbedderOptions opts;
  opts.url = url;
  return std::make_unique<RemoteEmbedder>(opts);
}

std::vector<std::size_t> parse_candidates(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& part : split_on(s, ',')) {
    auto t = trim(part);
    if (t.empty()) continue;
    try {
      out.push_back(static_cast<std::size_t>(std::stoul(std::string(t))));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad k candidate '" + std::string(t) + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "no k candidates given");
  return out;
}

void print_tune(const TuneKResult& r) {
  std::printf("k\tpairs\tcollisions\tprobability\n");
  for (const auto& row : r.per_k) std::printf("%zu\t%zu\t%zu\t%.6f\n", row.k, row.pairs, row.collisions, row.probability);
  std::printf("chosen\t%zu\n", r.k);
}

AnnotationService* g_service = nullptr;

extern "C" void on_signal(int) {
  if (g_service) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label word usage graph clusters with definitions and evaluate the labels"};
  app.require_subcommand(1);

  // ingest
  GraphInput ingest_in;
  std::string ingest_out;
  auto* ingest = app.add_subcommand("ingest", "load WUGs and write normalized JSONL, one file per lemma");
  add_graph_options(ingest, ingest_in);
  ingest->add_option("--out", ingest_out, "output directory")->required();

  // stats
  GraphInput stats_in;
  bool stats_by_language = false;
  std::string stats_definitions;
  auto* stats = app.add_subcommand("stats", "cluster statistics of WUGs, or length statistics of a definition dataset");
  stats->add_option("--data", stats_in.data, "WUG input");
  stats->add_option("--mapping", stats_in.mapping, "column mapping JSON for TSV input");
  stats->add_option("--min-size", stats_in.min_size)->capture_default_str();
  stats->add_flag("--by-language", stats_by_language, "one row per language");
  stats->add_option("--definitions", stats_definitions, "definition dataset JSONL");

  // label
  GraphInput label_in;
  std::string method_str, lexicon_path, k_str = "auto", prompt_lang = "native", generator_url, embedder_url,
                                        definitions_path, label_out;
  std::size_t dim = HashingEmbedder::kDefaultDim;
  auto* label = app.add_subcommand("label", "label every eligible cluster and export enriched WUGs");
  add_graph_options(label, label_in);
  label->add_option("--method", method_str, "lesk | retrieval | defgen")
      ->required()
      ->check(CLI::IsMember({"lesk", "retrieval", "defgen"}));
  label->add_option("--lexicon", lexicon_path, "sense inventory (lesk, retrieval)");
  label->add_option("--k", k_str, "retrieval depth, or 'auto' to tune it on the judgments")->capture_default_str();
  label->add_option("--prompt-lang", prompt_lang, "'native' or a language code for the prompt")->capture_default_str();
  label->add_option("--generator-url", generator_url, "definition generation service");
  label->add_option("--definitions", definitions_path, "pre-generated definitions JSONL");
  label->add_option("--embedder-url", embedder_url, "embedding service; local hashing embedder when absent");
  label->add_option("--dim", dim, "dimension of the local embedder")->capture_default_str();
  label->add_option("--out", label_out, "output directory")->required();

  // tune-k
  GraphInput tune_in;
  std::string tune_lexicon, tune_embedder, tune_candidates = "1,3,10";
  std::size_t tune_dim = HashingEmbedder::kDefaultDim;
  auto* tune = app.add_subcommand("tune-k", "pick the retrieval depth that least often merges unrelated usages");
  add_graph_options(tune, tune_in);
  tune->add_option("--lexicon", tune_lexicon)->required();
  tune->add_option("--embedder-url", tune_embedder);
  tune->add_option("--dim", tune_dim)->capture_default_str();
  tune->add_option("--candidates", tune_candidates, "comma-separated k values")->capture_default_str();

  // build-eval
  GraphInput build_in;
  std::string build_labels, build_items_path, build_dataset = "default";
  std::uint64_t build_seed = 0;
  std::size_t build_examples = 5;
  auto* build = app.add_subcommand("build-eval", "build blinded guess-the-cluster items");
  add_graph_options(build, build_in);
  build->add_option("--labels", build_labels, "enriched WUG file or directory")->required();
  build->add_option("--items", build_items_path, "items JSONL to write")->required();
  build->add_option("--seed", build_seed)->required();
  build->add_option("--dataset", build_dataset)->capture_default_str();
  build->add_option("--max-examples", build_examples)->capture_default_str();

  // serve
  std::string serve_config, serve_items, serve_records, serve_dataset = "default", serve_host = "127.0.0.1",
                                                       serve_static;
  int serve_port = 8080;
  auto* serve = app.add_subcommand("serve", "host annotation sessions over HTTP");
  serve->add_option("--config", serve_config, "service config JSON");
  serve->add_option("--items", serve_items);
  serve->add_option("--records", serve_records);
  serve->add_option("--dataset", serve_dataset)->capture_default_str();
  serve->add_option("--host", serve_host)->capture_default_str();
  serve->add_option("--port", serve_port)->capture_default_str();
  serve->add_option("--static", serve_static, "directory with the annotation UI");

  // score
  std::string score_items, score_records, score_format = "tsv", score_out;
  auto* score_cmd = app.add_subcommand("score", "majority-vote the records and report per system");
  score_cmd->add_option("--items", score_items)->required();
  score_cmd->add_option("--records", score_records)->required();
  score_cmd->add_option("--format", score_format)->check(CLI::IsMember({"tsv", "json"}))->capture_default_str();
  score_cmd->add_option("--out", score_out, "write the report here instead of stdout");

  // rouge
  std::string rouge_ref, rouge_cand, rouge_pairs;
  auto* rouge = app.add_subcommand("rouge", "ROUGE-L between definitions");
  rouge->add_option("--reference", rouge_ref);
  rouge->add_option("--candidate", rouge_cand);
  rouge->add_option("--pairs", rouge_pairs, "JSONL with reference and candidate keys; prints the mean");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      auto [graphs, failures] = load_input(ingest_in);
      write_graphs(ingest_out, graphs);
      std::printf("wrote %zu graphs to %s\n", graphs.size(), ingest_out.c_str());
      return failures ? 1 : 0;
    }

    if (*stats) {
      if (!stats_definitions.empty()) {
        auto data = load_definition_dataset(stats_definitions);
        auto s = dataset_stats(data);
        std::printf("entries\tlemmas\tratio\tusage_mean\tusage_sd\tdefinition_mean\tdefinition_sd\ttrain\tvalidation\ttest\n");
        std::printf("%zu\t%zu\t%.2f\t%.2f\t%.2f\t%.2f\t%.2f\t%zu\t%zu\t%zu\n", s.entries, s.lemmas, s.ratio,
                    s.usage_length.mean, s.usage_length.sd, s.definition_length.mean, s.definition_length.sd, s.train,
                    s.validation, s.test);
        std::printf("# lengths in %s\n", s.counter_name.c_str());
        return 0;
      }
      if (stats_in.data.empty()) throw Error(ErrorCode::kInvalidArgument, "stats needs --data or --definitions");
      auto [graphs, failures] = load_input(stats_in);
      std::vector<StatsRow> rows;
      if (stats_by_language) {
        rows = graph_stats_by_language(graphs, stats_in.min_size);
      } else {
        rows.push_back(graph_stats(graphs, stats_in.min_size));
      }
      std::printf("collection\ttargets\tclusters\teligible\tdiachronic\n");
      for (const auto& r : rows) {
        std::printf("%s\t%zu\t%zu\t%zu\t%s\n", r.collection.c_str(), r.targets, r.clusters, r.eligible,
                    r.diachronic ? "yes" : "no");
      }
      return failures ? 1 : 0;
    }

    if (*label) {
      auto [graphs, failures] = load_input(label_in);
      if (failures) return 1;
      const Method method = parse_method(method_str);
      std::vector<ClusterLabel> labels;

      if (method == Method::kLesk) {
        if (lexicon_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--lexicon is required for lesk");
        auto lex = load_lexicon(lexicon_path);
        for (const auto& g : graphs) {
          for (const auto& c : eligible_clusters(g, label_in.min_size)) {
            try {
              labels.push_back(lesk_label(g, c, lex));
            } catch (const Error& e) {
              if (e.code() != ErrorCode::kLemmaNotInLexicon) throw;
              std::cerr << "skipped " << g.lemma << ": " << e.what() << "\n";
              break;
            }
          }
        }
      } else if (method == Method::kRetrieval) {
        if (lexicon_path.empty()) throw Error(ErrorCode::kInvalidArgument, "--lexicon is required for retrieval");
        auto lex = load_lexicon(lexicon_path);
        auto embedder = make_embedder(embedder_url, dim);
        auto index = build_index(lex, *embedder);
        std::size_t k;
        if (k_str == "auto") {
          auto tuned = tune_k(graphs, index, *embedder, {1, 3, 10}, label_in.min_size);
          print_tune(tuned);
          k = tuned.k;
        } else {
          k = parse_candidates(k_str).front();
        }
        for (const auto& g : graphs) {
          for (const auto& c : eligible_clusters(g, label_in.min_size)) {
            labels.push_back(retrieval_label(g, c, index, *embedder, k));
          }
        }
      } else {
        std::unique_ptr<DefinitionSource> source;
        if (!definitions_path.empty()) {
          source = std::make_unique<PregeneratedDefinitions>(PregeneratedDefinitions::load(definitions_path));
        } else if (!generator_url.empty()) {
          RemoteGeneratorOptions opts;
          opts.url = generator_url;
          source = std::make_unique<RemoteGenerator>(opts);
        } else {
          throw Error(ErrorCode::kInvalidArgument, "defgen needs --generator-url or --definitions");
        }
        auto embedder = make_embedder(embedder_url, dim);
        for (const auto& g : graphs) {
          auto tpl = PromptTemplate::native(prompt_lang == "native" ? g.language : prompt_lang);
          for (const auto& c : eligible_clusters(g, label_in.min_size)) {
            labels.push_back(defgen_label(g, c, tpl, *source, *embedder));
          }
        }
      }
      auto paths = export_enriched(label_out, graphs, labels, label_in.min_size);
      std::printf("labeled %zu clusters into %zu files under %s\n", labels.size(), paths.size(), label_out.c_str());
      return 0;
    }

    if (*tune) {
      auto [graphs, failures] = load_input(tune_in);
      if (failures) return 1;
      auto lex = load_lexicon(tune_lexicon);
      auto embedder = make_embedder(tune_embedder, tune_dim);
      auto index = build_index(lex, *embedder);
      print_tune(tune_k(graphs, index, *embedder, parse_candidates(tune_candidates), tune_in.min_size));
      return 0;
    }

    if (*build) {
      auto [graphs, failures] = load_input(build_in);
      if (failures) return 1;
      auto labels = read_enriched(build_labels);
      BuildOptions opts;
      opts.dataset = build_dataset;
      opts.min_size = build_in.min_size;
      opts.max_examples = build_examples;
      auto result = build_items(graphs, labels, build_seed, opts);
      for (const auto& s : result.skipped) {
        std::cerr << "skipped " << s.lemma << " cluster " << s.cluster_id << " (" << method_name(s.method)
                  << "): " << s.reason << "\n";
      }
      write_items(build_items_path, result.items);
      std::printf("wrote %zu items to %s\n", result.items.size(), build_items_path.c_str());
      return 0;
    }

    if (*serve) {
      ServiceConfig cfg;
      if (!serve_config.empty()) {
        cfg = load_service_config(serve_config);
      } else {
        if (serve_items.empty() || serve_records.empty()) {
          throw Error(ErrorCode::kConfigInvalid, "serve needs --config or both --items and --records");
        }
        cfg.datasets.push_back({serve_dataset, serve_items, serve_records});
      }
      if (serve->count("--port")) cfg.port = serve_port;
      if (serve->count("--host")) cfg.host = serve_host;
      if (!serve_static.empty()) cfg.static_dir = fs::path(serve_static);
      AnnotationService service(cfg);
      const int port = service.bind();
      std::printf("listening on http://%s:%d\n", cfg.host.c_str(), port);
      std::fflush(stdout);
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.run();
      g_service = nullptr;
      return 0;
    }

    if (*score_cmd) {
      auto items = read_items(score_items);
      auto records = read_records(score_records);
      auto rows = score(aggregate(records, items), items);
      std::string report = score_format == "json" ? score_report_json(rows).dump(2) + "\n" : score_report_tsv(rows);
      if (score_out.empty()) {
        std::cout << report;
      } else {
        write_file(score_out, report);
      }
      return 0;
    }

    if (*rouge) {
      if (!rouge_pairs.empty()) {
        double r = 0, p = 0, f = 0;
        std::size_t n = 0;
        for (const auto& line : read_lines(rouge_pairs)) {
          if (trim(line).empty()) continue;
          auto j = nlohmann::json::parse(line);
          auto s = rouge_l(j.at("reference").get<std::string>(), j.at("candidate").get<std::string>());
          r += s.recall;
          p += s.precision;
          f += s.f;
          ++n;
        }
        if (n == 0) throw Error(ErrorCode::kEmptySet, "no pairs in " + rouge_pairs);
        std::printf("pairs\trecall\tprecision\tf\n%zu\t%.2f\t%.2f\t%.2f\n", n, 100 * r / n, 100 * p / n, 100 * f / n);
        return 0;
      }
      if (!rouge->count("--reference") || !rouge->count("--candidate")) {
        throw Error(ErrorCode::kInvalidArgument, "rouge needs --pairs or --reference and --candidate");
      }
      auto s = rouge_l(rouge_ref, rouge_cand);
      std::printf("recall\tprecision\tf\n%.6f\t%.6f\t%.6f\n", s.recall, s.precision, s.f);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: Parse: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
