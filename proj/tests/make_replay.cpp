// Copyright 2026 The ladderkit Authors
// SPDX-License-Identifier: Apache-2.0

// Builds the replay fixture for the 10-image corpus by running the pipeline
// against the scripted model and recording every answer.
//
//   make_replay <corpus.jsonl> <lexicon.tsv> <out.jsonl>

#include <iostream>

#include "ladderkit/pipeline.hpp"
#include "support/scripted_model.hpp"

int main(int argc, char** argv) {
  using namespace ladderkit;
  if (argc != 4) {
    std::cerr << "usage: make_replay <corpus.jsonl> <lexicon.tsv> <out.jsonl>\n";
    return 1;
  }
  try {
    const auto dir = std::filesystem::temp_directory_path() / ("ladderkit_make_replay_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    DatasetStore store(dir);
    auto model = std::make_shared<testing::RecordingModel>();
    Gateway gw;
    gw.register_backend("vlm", model);
    gw.register_backend("llm", model);
    ingest(store, argv[1], CorpusFormat::kCaptionJsonl);
    describe(store, gw);
    mine(store, gw, LexiconTagger(), ConcretenessLexicon::load_tsv(argv[2]));
    caption(store, gw);
    io::write_file_atomic(argv[3], model->replay_jsonl());
    std::filesystem::remove_all(dir);
  } catch (const std::exception& e) {
    std::cerr << "make_replay: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
