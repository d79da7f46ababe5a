#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kslice/count.hpp"
#include "kslice/graph.hpp"

namespace kslice {

/// One corpus instance: `<name>.edges` plus an optional `<name>.counts.json`.
struct CorpusEntry {
  std::string name;
  std::string path;
  Graph graph;
  std::optional<SizeCountVector> counts;
};

/// Loads every *.edges file of `dir` in name order. Throws std::invalid_argument
/// when the directory is missing or holds no graphs; parse errors carry the file name.
std::vector<CorpusEntry> load_corpus(const std::string& dir);

/// Corpus root: explicit argument, else $KSLICE_CORPUS, else nullopt.
std::optional<std::string> corpus_root(const std::optional<std::string>& explicit_dir);

}  // namespace kslice
