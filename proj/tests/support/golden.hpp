#pragma once

// Golden files under tests/data/synthetic/golden. Set MT_UPDATE_GOLDENS=1 to
// rewrite them from the current build instead of comparing.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mt/hash.hpp"
#include "mt/io.hpp"
#include "test_support.hpp"

namespace golden {

namespace fs = std::filesystem;

inline const fs::path kCorpus = testing_support::kDataDir / "synthetic";
inline const fs::path kGoldenDir = kCorpus / "golden";

inline bool updating() {
  const char* v = std::getenv("MT_UPDATE_GOLDENS");
  return v && std::string(v) == "1";
}

/// "sha256  relative/path" for every regular file under `dir`, sorted by path.
inline std::string hash_tree(const fs::path& dir) {
  std::vector<std::string> rels;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) rels.push_back(fs::relative(e.path(), dir).generic_string());
  std::sort(rels.begin(), rels.end());
  std::string out;
  for (const auto& r : rels) out += mt::sha256_hex(mt::read_file(dir / r)) + "  " + r + "\n";
  return out;
}

/// Compares `actual` with the named golden file (or rewrites it). Returns an
/// error message on mismatch.
inline std::optional<std::string> check(const std::string& name, const std::string& actual) {
  const fs::path path = kGoldenDir / name;
  if (updating()) {
    fs::create_directories(kGoldenDir);
    mt::write_file(path, actual);
    return std::nullopt;
  }
  if (!fs::exists(path)) return "missing golden file " + path.string();
  const std::string expected = mt::read_text_file(path);
  if (expected == actual) return std::nullopt;
  return "golden " + name + " differs:\n--- expected\n" + expected + "\n--- actual\n" + actual;
}

}  // namespace golden
