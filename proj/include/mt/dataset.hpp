#pragma once

// Dataset manifests, batch perturbation with discard accounting, and
// per-subset balancing.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mt/codec.hpp"
#include "mt/csv.hpp"
#include "mt/error.hpp"
#include "mt/io.hpp"
#include "mt/label.hpp"
#include "mt/landmarks.hpp"
#include "mt/log.hpp"
#include "mt/makeup.hpp"

namespace mt {

namespace fs = std::filesystem;

struct ManifestEntry {
  std::string id;
  std::string path;
  Label label = Label::real;
  Method method = Method::original;
  std::optional<std::string> landmarks_path;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline constexpr std::string_view kManifestHeader = "id,path,label,method,landmarks_path";

/// Parses the manifest CSV. Error details carry the 1-based line number.
inline std::vector<ManifestEntry> load_manifest(std::string_view text) {
  const auto rows = parse_csv(text);
  static const std::vector<std::string> header = {"id", "path", "label", "method", "landmarks_path"};
  if (rows.empty()) throw Error(ErrorCode::MissingColumn, "manifest has no header", 1);
  const auto& head = rows.front();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i >= head.fields.size() || head.fields[i] != header[i])
      throw Error(ErrorCode::MissingColumn,
                  "header must be exactly \"" + std::string(kManifestHeader) + "\" (column " +
                      header[i] + ")",
                  static_cast<long>(head.line));
  }
  if (head.fields.size() != header.size())
    throw Error(ErrorCode::MalformedDocument, "unexpected extra header columns",
                static_cast<long>(head.line));

  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto line = static_cast<long>(row.line);
    const std::string where = "line " + std::to_string(row.line);
    if (row.fields.size() < 4)
      throw Error(ErrorCode::MissingColumn, where + ": " + std::to_string(row.fields.size()) + " columns",
                  line);
    if (row.fields.size() > 5)
      throw Error(ErrorCode::MalformedDocument, where + ": too many columns", line);
    ManifestEntry e;
    e.id = row.fields[0];
    e.path = row.fields[1];
    if (e.id.empty() || e.path.empty())
      throw Error(ErrorCode::MalformedDocument, where + ": empty id or path", line);
    const auto label = parse_label(row.fields[2]);
    if (!label) throw Error(ErrorCode::UnknownLabel, where + ": label \"" + row.fields[2] + "\"", line);
    const auto method = parse_method(row.fields[3]);
    if (!method)
      throw Error(ErrorCode::UnknownMethod, where + ": method \"" + row.fields[3] + "\"", line);
    if ((*label == Label::real) != (*method == Method::original))
      throw Error(ErrorCode::UnknownLabel,
                  where + ": label " + row.fields[2] + " does not match method " + row.fields[3], line);
    e.label = *label;
    e.method = *method;
    if (row.fields.size() == 5 && !row.fields[4].empty()) e.landmarks_path = row.fields[4];
    if (!seen.insert(e.id).second)
      throw Error(ErrorCode::DuplicateId, where + ": id \"" + e.id + "\" repeated", line);
    entries.push_back(std::move(e));
  }
  return entries;
}

inline std::string write_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& e : entries) {
    out += e.id + ',' + e.path + ',' + std::string(to_string(e.label)) + ',' +
           std::string(to_string(e.method)) + ',' + e.landmarks_path.value_or("") + '\n';
  }
  return out;
}

inline fs::path resolve_path(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

/// Sidecar location: the manifest override, else the image path plus
/// ".landmarks.json".
inline fs::path sidecar_path(const ManifestEntry& e, const fs::path& base) {
  if (e.landmarks_path) return resolve_path(base, *e.landmarks_path);
  return resolve_path(base, e.path + ".landmarks.json");
}

/// Where the perturbed twin of `e` lands under `out_dir`.
inline fs::path output_path(const ManifestEntry& e, const fs::path& out_dir) {
  const fs::path p(e.path);
  return p.is_absolute() ? out_dir / p.filename() : out_dir / p.lexically_normal();
}

struct Discard {
  std::string id;
  std::string reason;
  friend bool operator==(const Discard&, const Discard&) = default;
};

struct PerturbReport {
  std::size_t produced = 0;
  std::vector<Discard> discarded;               // sorted by id
  std::map<Method, std::size_t> per_subset_counts;  // produced images per method
  std::vector<std::string> produced_ids;        // sorted

  std::size_t input_count() const { return produced + discarded.size(); }
};

inline nlohmann::ordered_json to_json(const PerturbReport& r) {
  nlohmann::ordered_json j;
  j["produced"] = r.produced;
  auto d = nlohmann::ordered_json::array();
  for (const auto& x : r.discarded) d.push_back({{"id", x.id}, {"reason", x.reason}});
  j["discarded"] = std::move(d);
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [m, n] : r.per_subset_counts) counts[std::string(to_string(m))] = n;
  j["per_subset_counts"] = std::move(counts);
  return j;
}

/// Returns the landmarks for one entry; must be safe to call concurrently.
using LandmarkSource = std::function<LandmarkSet(const ManifestEntry&, const fs::path& image_path)>;

inline LandmarkSource sidecar_landmarks(fs::path base_dir) {
  return [base = std::move(base_dir)](const ManifestEntry& e, const fs::path&) {
    return parse_landmarks(read_text_file(sidecar_path(e, base)));
  };
}

struct PerturbOptions {
  fs::path base_dir = ".";  // manifest paths are relative to this
  unsigned jobs = 1;
  ValidationMode validation = ValidationMode::lenient;
  LandmarkSource landmarks;  // defaults to sidecars under base_dir
};

namespace dataset_detail {

inline void ensure_writable(const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir))
    throw Error(ErrorCode::Io, "cannot create output directory " + out_dir.string());
  const fs::path probe = out_dir / ".mt-write-probe";
  try {
    write_file(probe, std::string_view("ok"));
  } catch (const Error&) {
    throw Error(ErrorCode::Io, "output directory " + out_dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

// Outcome for one entry: empty reason means the twin was written.
inline std::string perturb_one(const ManifestEntry& e, const MakeupSpec& spec, const fs::path& out_dir,
                               const PerturbOptions& opt) {
  try {
    const fs::path src = resolve_path(opt.base_dir, e.path);
    const auto bytes = read_file(src);
    const auto format = sniff_format(bytes);
    const Image img = load_image(bytes);
    const LandmarkSet lm = validate_landmarks(opt.landmarks(e, src), img, opt.validation);
    if (!lm.clamped.empty())
      log::info(e.id + ": " + std::to_string(lm.clamped.size()) + " landmark(s) clamped");
    const Image out = apply_makeup(img, lm, spec);
    const fs::path dst = output_path(e, out_dir);
    fs::create_directories(dst.parent_path());
    write_file(dst, save_image(out, *format));
    return {};
  } catch (const Error& err) {
    return err.what();
  } catch (const nlohmann::json::exception& err) {
    return std::string("MalformedDocument: ") + err.what();
  } catch (const fs::filesystem_error& err) {
    return std::string("Io: ") + err.what();
  }
}

}  // namespace dataset_detail

/// Writes the perturbed twin of every entry under `out_dir`. Entries whose
/// image, landmarks, or makeup fail are discarded with a reason; only an
/// unwritable `out_dir` aborts the run.
inline PerturbReport perturb_dataset(const std::vector<ManifestEntry>& entries, const MakeupSpec& spec,
                                     const fs::path& out_dir, PerturbOptions opt = {}) {
  dataset_detail::ensure_writable(out_dir);
  if (!opt.landmarks) opt.landmarks = sidecar_landmarks(opt.base_dir);
  check_spec(spec);

  std::vector<std::string> reasons(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < entries.size();)
      reasons[i] = dataset_detail::perturb_one(entries[i], spec, out_dir, opt);
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(entries.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }

  PerturbReport report;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (reasons[i].empty()) {
      ++report.produced;
      ++report.per_subset_counts[entries[i].method];
      report.produced_ids.push_back(entries[i].id);
    } else {
      log::warn("discarded " + entries[i].id + ": " + reasons[i]);
      report.discarded.push_back({entries[i].id, reasons[i]});
    }
  }
  std::sort(report.produced_ids.begin(), report.produced_ids.end());
  std::sort(report.discarded.begin(), report.discarded.end(),
            [](const Discard& a, const Discard& b) { return a.id < b.id; });
  return report;
}

using Subsets = std::map<Method, std::vector<std::string>>;

struct BalanceResult {
  Subsets subsets;
  std::size_t size = 0;  // common cardinality
  bool empty_warning = false;
};

/// Truncates every subset to the smallest subset's size, keeping the
/// lexicographically smallest ids, or a seeded random sample when `seed` is
/// set. Output ids are sorted.
inline BalanceResult balance(const Subsets& subsets, std::optional<std::uint64_t> seed = std::nullopt) {
  BalanceResult out;
  if (subsets.empty()) return out;
  Subsets sorted;
  for (const auto& [m, ids] : subsets) {
    auto& v = sorted[m];
    v = ids;
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  std::size_t n = SIZE_MAX;
  for (const auto& [m, ids] : sorted) n = std::min(n, ids.size());
  out.size = n;
  out.empty_warning = n == 0;
  if (out.empty_warning) log::warn("balance: a subset is empty, every subset truncated to 0");
  for (auto& [m, v] : sorted) {
    if (seed && n < v.size()) {
      std::mt19937_64 rng(*seed ^ (static_cast<std::uint64_t>(m) * 0x9E3779B97F4A7C15ull));
      // Partial Fisher-Yates over the sorted ids.
      for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, v.size() - 1);
        std::swap(v[i], v[pick(rng)]);
      }
      v.resize(n);
      std::sort(v.begin(), v.end());
    } else {
      v.resize(n);
    }
    out.subsets[m] = std::move(v);
  }
  return out;
}

}  // namespace mt
