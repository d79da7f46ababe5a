#include "kslice/corpus.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kslice {

namespace fs = std::filesystem;

std::vector<CorpusEntry> load_corpus(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::invalid_argument("corpus directory '" + dir + "' not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".edges") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::invalid_argument("corpus directory '" + dir + "' holds no .edges files");
  std::vector<CorpusEntry> out;
  for (const auto& p : files) {
    CorpusEntry entry;
    entry.name = p.stem().string();
    entry.path = p.string();
    try {
      entry.graph = read_graph_file(entry.path);
    } catch (const ParseError& e) {
      throw std::invalid_argument(entry.path + ": " + e.what());
    }
    const auto counts = p.parent_path() / (entry.name + ".counts.json");
    if (fs::exists(counts)) {
      std::ifstream in(counts);
      std::stringstream ss;
      ss << in.rdbuf();
      try {
        entry.counts = SizeCountVector::from_json(ss.str());
      } catch (const std::exception& e) {
        throw std::invalid_argument(counts.string() + ": " + e.what());
      }
    }
    out.push_back(std::move(entry));
  }
  return out;
}

std::optional<std::string> corpus_root(const std::optional<std::string>& explicit_dir) {
  if (explicit_dir) return explicit_dir;
  if (const char* env = std::getenv("KSLICE_CORPUS"); env && *env) return std::string(env);
  return std::nullopt;
}

}  // namespace kslice
