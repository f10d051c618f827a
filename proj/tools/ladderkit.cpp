// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// ladderkit command-line tool.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 backend failure.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ladderkit/annotation/http.hpp"
#include "ladderkit/annotation/service.hpp"
#include "ladderkit/config.hpp"
#include "ladderkit/eval/annotations.hpp"
#include "ladderkit/eval/embedding.hpp"
#include "ladderkit/eval/report.hpp"
#include "ladderkit/pipeline.hpp"
#include "ladderkit/stats.hpp"

namespace fs = std::filesystem;
using namespace ladderkit;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kBackend = 3 };

struct Flags {
  std::optional<std::string> config_file;
  std::optional<std::string> store, backend, replay, cache, vlm_url, vlm_model, llm_url, llm_model, lexicon;
  std::optional<double> threshold;
  std::optional<int> retries, max_in_flight;
  std::optional<std::uint64_t> seed;

  json patch() const {
    json p = json::object();
    auto put = [&](const auto& v, const char* ptr) {
      if (v) p[json::json_pointer(ptr)] = *v;
    };
    put(store, "/store");
    put(backend, "/backend");
    put(replay, "/replay_file");
    put(cache, "/cache_file");
    put(vlm_url, "/vision/url");
    put(vlm_model, "/vision/model");
    put(llm_url, "/text/url");
    put(llm_model, "/text/model");
    put(lexicon, "/lexicon");
    put(threshold, "/threshold");
    put(retries, "/retries");
    put(max_in_flight, "/max_in_flight");
    put(seed, "/seed");
    return p;
  }
};

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config_file, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--store", f.store, "dataset store directory");
  app.add_option("--backend", f.backend, "model backend: replay | http")->check(CLI::IsMember({"replay", "http"}));
  app.add_option("--replay", f.replay, "replay fixture file (JSONL {digest, text})");
  app.add_option("--cache", f.cache, "response cache file for the http backend");
  app.add_option("--vlm-url", f.vlm_url, "vision model chat-completions URL");
  app.add_option("--vlm-model", f.vlm_model);
  app.add_option("--llm-url", f.llm_url, "text model chat-completions URL");
  app.add_option("--llm-model", f.llm_model);
  app.add_option("--lexicon", f.lexicon, "concreteness norms TSV");
  app.add_option("--threshold", f.threshold, "concreteness threshold");
  app.add_option("--retries", f.retries);
  app.add_option("--max-in-flight", f.max_in_flight);
  app.add_option("--seed", f.seed);
}

RunConfig resolve(const Flags& f) {
  std::optional<fs::path> file;
  if (f.config_file) file = *f.config_file;
  return resolve_config(file, env_patch(), f.patch());
}

DatasetStore require_store(const RunConfig& cfg) {
  if (cfg.store.empty()) throw UsageError("no store directory (use --store or LADDERKIT_STORE)");
  return DatasetStore(cfg.store);
}

StageOptions stage_options(const RunConfig& cfg) {
  StageOptions o;
  o.vision_backend = cfg.vision.id;
  o.text_backend = cfg.text.id;
  o.policy = cfg.submit_policy();
  return o;
}

void emit(const DatasetStore* store, const std::string& name, const json& report) {
  if (store) store->write_report(name, report);
  std::cout << report.dump(2) << "\n";
}

std::vector<std::size_t> parse_ks(const std::string& s) {
  std::vector<std::size_t> ks;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    const auto item = std::string(text::trim(std::string_view(s).substr(pos, comma - pos)));
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || v < 1) throw UsageError("bad --k list: " + s);
    ks.push_back(static_cast<std::size_t>(v));
    pos = comma + 1;
  }
  return ks;
}

std::map<std::string, std::string> read_gold(const fs::path& path) {
  std::map<std::string, std::string> gold;
  io::for_each_jsonl(path, [&](std::size_t line, const json& j) {
    const auto where = path.string() + ":" + std::to_string(line);
    auto q = io::require_string(j, "query_id", where);
    if (!gold.emplace(q, io::require_string(j, "candidate_id", where)).second)
      throw DataError(where + ": duplicate query_id " + q);
  });
  return gold;
}

eval::SimilarityMatrix load_similarity(const fs::path& queries, const fs::path& candidates, const fs::path& gold) {
  auto sim = eval::cosine_similarity(eval::read_embeddings(queries), eval::read_embeddings(candidates));
  sim.set_gold(read_gold(gold));
  return sim;
}

struct PairScores {
  std::vector<std::string> ids;
  std::vector<double> a, b;
};

// Rows {image_id, a, b}: cosine(image, text a) vs cosine(image, text b).
PairScores pair_scores(const fs::path& images, const fs::path& texts, const fs::path& pairs) {
  const auto img = eval::read_embeddings(images);
  const auto txt = eval::read_embeddings(texts);
  if (img.dim() != txt.dim()) throw DataError("image and text embeddings differ in dimension");
  auto cosine = [&](std::size_t i, std::size_t t) {
    double dot = 0, ni = 0, nt = 0;
    const auto ri = img.row(i);
    const auto rt = txt.row(t);
    for (std::size_t k = 0; k < img.dim(); ++k) {
      dot += double(ri[k]) * rt[k];
      ni += double(ri[k]) * ri[k];
      nt += double(rt[k]) * rt[k];
    }
    if (ni == 0 || nt == 0) throw DataError("zero embedding row");
    return dot / std::sqrt(ni * nt);
  };
  PairScores out;
  io::for_each_jsonl(pairs, [&](std::size_t line, const json& j) {
    const auto where = pairs.string() + ":" + std::to_string(line);
    const auto image_id = io::require_string(j, "image_id", where);
    auto lookup = [&](const eval::EmbeddingMatrix& m, const std::string& id) {
      auto i = m.index_of(id);
      if (!i) throw DataError(where + ": unknown id " + id);
      return *i;
    };
    const auto i = lookup(img, image_id);
    out.ids.push_back(image_id);
    out.a.push_back(cosine(i, lookup(txt, io::require_string(j, "a", where))));
    out.b.push_back(cosine(i, lookup(txt, io::require_string(j, "b", where))));
  });
  return out;
}

// Rows {a, b}: precomputed scores.
PairScores score_rows(const fs::path& path) {
  PairScores out;
  io::for_each_jsonl(path, [&](std::size_t line, const json& j) {
    if (!j.contains("a") || !j.contains("b") || !j["a"].is_number() || !j["b"].is_number())
      throw DataError(path.string() + ":" + std::to_string(line) + ": expected numeric a and b");
    out.ids.push_back(j.value("id", std::to_string(line)));
    out.a.push_back(j["a"].get<double>());
    out.b.push_back(j["b"].get<double>());
  });
  return out;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

httplib::Server* g_server = nullptr;
void stop_server(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ladderkit: abstraction-ladder caption corpus builder and evaluation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  add_common(app, flags);

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "load a caption corpus into the store");
  std::string manifest, format = "caption_jsonl", split = "train", image_root;
  ingest_cmd->add_option("--manifest", manifest, "COCO JSON or caption JSONL")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--format", format)->check(CLI::IsMember({"coco_json", "caption_jsonl", "coco", "jsonl"}));
  ingest_cmd->add_option("--split", split, "split for records without one");
  ingest_cmd->add_option("--image-root", image_root, "prefix for COCO file names");

  auto* describe_cmd = app.add_subcommand("describe", "generate detailed captions");
  bool overwrite = false;
  describe_cmd->add_flag("--overwrite", overwrite, "regenerate existing detailed captions");

  auto* mine_cmd = app.add_subcommand("mine", "extract salient elements and mine association ladders");
  std::string pos_sidecar;
  mine_cmd->add_option("--pos-sidecar", pos_sidecar, "JSONL of pre-tagged captions")->check(CLI::ExistingFile);

  auto* caption_cmd = app.add_subcommand("caption", "generate creative captions");

  auto* stats_cmd = app.add_subcommand("stats", "uniqueness grid and caption counts");
  std::vector<std::string> stat_splits;
  std::string count_mode = "occurrences";
  bool include_singletons = false;
  stats_cmd->add_option("--split", stat_splits, "train | validation | test (repeatable)");
  stats_cmd->add_option("--count-mode", count_mode)->check(CLI::IsMember({"occurrences", "distinct"}));
  stats_cmd->add_flag("--include-singletons", include_singletons);

  auto* eval_cmd = app.add_subcommand("eval", "retrieval and preference metrics");
  eval_cmd->require_subcommand(1);
  auto* retrieve_cmd = eval_cmd->add_subcommand("retrieve", "recall@k and average rank");
  std::string queries, candidates, gold, base_queries, base_candidates, ks = "1,5,10,20", report_name;
  retrieve_cmd->add_option("--queries", queries, "query embeddings (EMB1)")->required()->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--candidates", candidates, "candidate embeddings (EMB1)")->required()->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--gold", gold, "JSONL {query_id, candidate_id}")->required()->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--k", ks);
  retrieve_cmd->add_option("--baseline-queries", base_queries)->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--baseline-candidates", base_candidates)->check(CLI::ExistingFile);
  retrieve_cmd->add_option("--name", report_name, "report name under <store>/reports");

  std::string images, texts, pairs, scores, base_images, base_texts, base_scores;
  auto add_pref = [&](CLI::App* cmd) {
    cmd->add_option("--images", images, "image embeddings (EMB1)")->check(CLI::ExistingFile);
    cmd->add_option("--texts", texts, "text embeddings (EMB1)")->check(CLI::ExistingFile);
    cmd->add_option("--pairs", pairs, "JSONL {image_id, a, b}")->check(CLI::ExistingFile);
    cmd->add_option("--scores", scores, "JSONL {a, b} of precomputed scores")->check(CLI::ExistingFile);
    cmd->add_option("--baseline-images", base_images)->check(CLI::ExistingFile);
    cmd->add_option("--baseline-texts", base_texts)->check(CLI::ExistingFile);
    cmd->add_option("--baseline-scores", base_scores)->check(CLI::ExistingFile);
    cmd->add_option("--name", report_name);
  };
  auto* match_cmd = eval_cmd->add_subcommand("match", "how often a scores above b (correct vs incorrect caption)");
  auto* foil_cmd = eval_cmd->add_subcommand("foil", "how often a scores above b (original vs creative or FOIL)");
  add_pref(match_cmd);
  add_pref(foil_cmd);

  auto* agreement_cmd = app.add_subcommand("agreement", "Fleiss kappa and annotation aggregates");
  std::string annotations_file;
  int raters = 3, bucket_threshold = 3;
  agreement_cmd->add_option("--annotations", annotations_file)->required()->check(CLI::ExistingFile);
  agreement_cmd->add_option("--raters", raters, "annotators per agreement item")->check(CLI::PositiveNumber);
  agreement_cmd->add_option("--bucket-threshold", bucket_threshold)->check(CLI::Range(1, 4));

  auto* serve_cmd = app.add_subcommand("serve", "annotation service and UI");
  std::string host = "127.0.0.1", ui_dir;
  int port = 8080;
  annotation::PoolConfig pool_cfg;
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port)->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--ui-dir", ui_dir, "static UI bundle served at /");
  serve_cmd->add_option("--grounding-tasks", pool_cfg.grounding_tasks);
  serve_cmd->add_option("--ranking-tasks", pool_cfg.ranking_tasks);
  serve_cmd->add_option("--overlap", pool_cfg.overlap_fraction)->check(CLI::Range(0.0, 1.0));

  auto* export_cmd = app.add_subcommand("export", "export annotations or compact the dataset");
  export_cmd->require_subcommand(1);
  auto* export_ann = export_cmd->add_subcommand("annotations", "JSONL for the eval harness");
  std::string out_file;
  export_ann->add_option("--out", out_file)->required();
  auto* export_data = export_cmd->add_subcommand("dataset", "drop non-admitted captions into captions.dropped.jsonl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    const RunConfig cfg = resolve(flags);
    const json snapshot = to_json(cfg);

    if (*ingest_cmd) {
      const auto store = require_store(cfg);
      const auto fmt = *parse_corpus_format(format);
      auto sp = parse_split(split);
      if (!sp) throw UsageError("unknown split " + split);
      LoadOptions lo;
      lo.default_split = *sp;
      lo.image_root = image_root;
      emit(&store, "ingest", {{"stage", "ingest"}, {"summary", to_json(ingest(store, manifest, fmt, lo, snapshot))}});
    } else if (*describe_cmd) {
      const auto store = require_store(cfg);
      auto gw = make_gateway(cfg);
      auto opts = stage_options(cfg);
      opts.overwrite = overwrite;
      emit(&store, "describe", {{"stage", "describe"}, {"summary", to_json(describe(store, *gw, opts, snapshot))}});
    } else if (*mine_cmd) {
      const auto store = require_store(cfg);
      if (cfg.lexicon.empty()) throw UsageError("mine needs --lexicon");
      const auto lexicon = ConcretenessLexicon::load_tsv(cfg.lexicon);
      std::unique_ptr<PosTagger> tagger;
      if (!pos_sidecar.empty()) tagger = std::make_unique<SidecarTagger>(SidecarTagger::load(pos_sidecar));
      else tagger = std::make_unique<LexiconTagger>();
      auto gw = make_gateway(cfg);
      MineOptions mo;
      mo.stage = stage_options(cfg);
      mo.threshold = cfg.threshold;
      emit(&store, "mine", {{"stage", "mine"}, {"summary", to_json(mine(store, *gw, *tagger, lexicon, mo, snapshot))}});
    } else if (*caption_cmd) {
      const auto store = require_store(cfg);
      auto gw = make_gateway(cfg);
      emit(&store, "caption", {{"stage", "caption"}, {"summary", to_json(caption(store, *gw, stage_options(cfg), snapshot))}});
    } else if (*stats_cmd) {
      const auto store = require_store(cfg);
      std::vector<Split> splits;
      for (const auto& s : stat_splits) {
        auto sp = parse_split(s);
        if (!sp) throw UsageError("unknown split " + s);
        splits.push_back(*sp);
      }
      if (splits.empty()) splits = {Split::kTrain, Split::kValidation, Split::kTest};
      UniquenessOptions uo;
      uo.count = count_mode == "distinct" ? UniquenessCount::kDistinct : UniquenessCount::kOccurrences;
      uo.include_singletons = include_singletons;
      const auto st = compute_stats(store.read_images(), store.read_ladders(), store.read_captions(), uo);
      store.write_report("stats", stats_json(st));
      std::cout << stats_csv(st, splits);
    } else if (*eval_cmd) {
      const DatasetStore* store = nullptr;
      std::optional<DatasetStore> owned;
      if (!cfg.store.empty()) store = &owned.emplace(cfg.store);
      if (*retrieve_cmd) {
        const auto sim = load_similarity(queries, candidates, gold);
        std::optional<eval::SimilarityMatrix> base;
        if (base_queries.empty() != base_candidates.empty())
          throw UsageError("--baseline-queries and --baseline-candidates go together");
        if (!base_queries.empty()) base = load_similarity(base_queries, base_candidates, gold);
        const auto report = eval::retrieval_report(sim, parse_ks(ks), base ? &*base : nullptr);
        emit(store, report_name.empty() ? "retrieve" : report_name, eval::to_json(report));
      } else {
        const bool is_match = static_cast<bool>(*match_cmd);
        auto load = [&](const std::string& img, const std::string& txt, const std::string& sc, bool baseline) -> std::optional<PairScores> {
          const bool have_emb = !img.empty() || !txt.empty();
          if (have_emb && !sc.empty()) throw UsageError("give either embeddings or scores, not both");
          if (have_emb) {
            if (img.empty() || txt.empty() || pairs.empty()) throw UsageError("embedding mode needs images, texts and --pairs");
            return pair_scores(img, txt, pairs);
          }
          if (!sc.empty()) return score_rows(sc);
          if (baseline) return std::nullopt;
          throw UsageError("need --images/--texts/--pairs or --scores");
        };
        const auto main_scores = *load(images, texts, scores, false);
        const auto base = load(base_images, base_texts, base_scores, true);
        if (base && base->a.size() != main_scores.a.size()) throw DataError("baseline has a different number of pairs");
        const auto report = eval::preference_report(is_match ? "matching_preference" : "foil_preference", main_scores.a,
                                                    main_scores.b, base ? &base->a : nullptr, base ? &base->b : nullptr);
        emit(store, report_name.empty() ? (is_match ? "match" : "foil") : report_name, eval::to_json(report));
      }
    } else if (*agreement_cmd) {
      const DatasetStore* store = nullptr;
      std::optional<DatasetStore> owned;
      if (!cfg.store.empty()) store = &owned.emplace(cfg.store);
      const auto records = eval::read_annotations(annotations_file);
      json report = {{"metric", "agreement"}, {"raters_per_item", raters}};
      for (auto type : {eval::AnnotationTaskType::kGrounding, eval::AnnotationTaskType::kRanking}) {
        const auto table = eval::agreement_table(records, type, raters);
        json k = {{"items", table.size()}};
        k["fleiss_kappa"] = table.size() >= 2 ? optional_json(eval::fleiss_kappa(table, raters)) : json(nullptr);
        report[eval::to_string(type)] = k;
      }
      std::vector<eval::AnnotationRecord> grounding, ranking;
      for (const auto& r : records) (r.task == eval::AnnotationTaskType::kGrounding ? grounding : ranking).push_back(r);
      json buckets = json::object();
      for (const auto& [d, pct] : eval::grounding_bucket_rate(grounding, bucket_threshold)) buckets[std::to_string(d)] = pct;
      json ranks = json::object();
      for (const auto& [type, mean] : eval::average_abstraction_rank(ranking)) ranks[type] = mean;
      report["grounding"]["rate_at_least"] = bucket_threshold;
      report["grounding"]["grounded_pct_by_degree"] = buckets;
      report["ranking"]["average_rank"] = ranks;
      emit(store, "agreement", report);
    } else if (*serve_cmd) {
      if (!cfg.seed) throw UsageError("serve needs --seed (task order is seeded)");
      const auto store = require_store(cfg);
      pool_cfg.seed = *cfg.seed;
      const auto dir = store.path("annotation");
      fs::create_directories(dir);
      const auto pool_file = dir / "tasks.jsonl";
      std::vector<annotation::AnnotationTask> pool;
      if (fs::exists(pool_file)) {
        pool = annotation::read_task_pool(pool_file);
      } else {
        pool = annotation::build_task_pool(store.read_images(), store.read_captions(), pool_cfg);
        annotation::write_task_pool(pool_file, pool);
      }
      annotation::AnnotationService service(std::move(pool), dir / "annotations.jsonl");
      httplib::Server server;
      std::optional<fs::path> ui;
      if (!ui_dir.empty()) {
        if (!fs::is_directory(ui_dir)) throw UsageError("--ui-dir " + ui_dir + " is not a directory");
        ui = ui_dir;
      }
      annotation::install_routes(server, service, ui);
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      if (!server.bind_to_port(host, port)) throw UsageError("cannot bind " + host + ":" + std::to_string(port));
      std::cerr << "serving " << service.pool().size() << " tasks on http://" << host << ":" << port << "\n";
      server.listen_after_bind();
      store.write_report("annotation_progress", annotation::progress_json(service.progress()));
    } else if (*export_cmd) {
      const auto store = require_store(cfg);
      if (*export_ann) {
        const auto file = store.path("annotation") / "annotations.jsonl";
        std::vector<eval::AnnotationRecord> records;
        if (fs::exists(file)) records = eval::read_annotations(file);
        io::write_file_atomic(out_file, annotation::export_annotations(records));
        emit(&store, "export_annotations", {{"records", records.size()}, {"out", out_file}});
      } else if (*export_data) {
        store.compact();
        emit(&store, "export_dataset", store.read_manifest()["counts"]);
      }
    }
    return kOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kBackend;
  } catch (const json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  }
}
