#pragma once

// Metamorphic-relation evaluation and campaign orchestration.
//
// The relation: a classifier's decision on an image should not change when
// makeup is applied. It is checked at two granularities, the per-image flip
// rate and the per-metric change between the original and perturbed sets,
// and a policy combines the two into a held/violated verdict per subset.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "mt/adapters.hpp"
#include "mt/dataset.hpp"
#include "mt/error.hpp"
#include "mt/hash.hpp"
#include "mt/io.hpp"
#include "mt/label.hpp"
#include "mt/log.hpp"
#include "mt/makeup.hpp"
#include "mt/metrics.hpp"

namespace mt {

struct MRPolicy {
  double flip_rate_threshold = 0.01;     // fraction of images
  double metric_delta_threshold = 5.0;   // percentage points
  std::vector<Metric> metrics_considered = {Metric::accuracy, Metric::recall, Metric::specificity};

  friend bool operator==(const MRPolicy&, const MRPolicy&) = default;
};

inline void check_policy(const MRPolicy& p) {
  if (!(p.flip_rate_threshold >= 0.0) || !(p.metric_delta_threshold >= 0.0))
    throw Error(ErrorCode::ConfigError, "policy thresholds must be >= 0");
}

/// Signed difference perturbed - baseline in percentage points, kept exact
/// enough to round the displayed value without floating-point drift.
struct MetricDelta {
  double value = 0.0;
  long long hundredths = 0;  // rounded half away from zero

  friend bool operator==(const MetricDelta&, const MetricDelta&) = default;
};

inline MetricDelta metric_delta(const Ratio& baseline, const Ratio& perturbed) {
  __extension__ using i128 = __int128;
  const i128 num = i128(perturbed.num) * i128(baseline.den) - i128(baseline.num) * i128(perturbed.den);
  const i128 den = i128(perturbed.den) * i128(baseline.den);
  const i128 scaled = num * 10000;
  const i128 mag = scaled < 0 ? -scaled : scaled;
  const i128 rounded = (2 * mag + den) / (2 * den);
  MetricDelta d;
  d.hundredths = static_cast<long long>(scaled < 0 ? -rounded : rounded);
  d.value = static_cast<double>(static_cast<long double>(num) * 100.0L / static_cast<long double>(den));
  return d;
}

inline std::string format_hundredths(long long h) {
  const bool neg = h < 0;
  const unsigned long long m = neg ? -static_cast<unsigned long long>(h) : h;
  const auto frac = m % 100;
  return std::string(neg ? "-" : "") + std::to_string(m / 100) + '.' + (frac < 10 ? "0" : "") +
         std::to_string(frac);
}

/// Labels per image (optional) and the aggregate metrics for one side of the
/// comparison.
struct EvaluationSide {
  std::optional<std::map<std::string, Label>> labels;
  MetricsReport metrics;
};

struct MRVerdict {
  Method subset = Method::original;
  bool held = true;
  std::optional<double> flip_rate;  // absent without per-image labels
  std::size_t flips = 0;
  std::size_t compared = 0;
  std::map<Metric, MetricDelta> deltas;  // only metrics defined on both sides
  MetricsReport baseline;
  MetricsReport perturbed;
  std::vector<std::string> notes;
};

inline MRVerdict evaluate_mr(const EvaluationSide& baseline, const EvaluationSide& perturbed,
                             const MRPolicy& policy, Method subset = Method::original) {
  check_policy(policy);
  MRVerdict v;
  v.subset = subset;
  v.baseline = baseline.metrics;
  v.perturbed = perturbed.metrics;

  if (baseline.labels && perturbed.labels) {
    const auto& b = *baseline.labels;
    const auto& p = *perturbed.labels;
    if (b.size() != p.size() ||
        !std::equal(b.begin(), b.end(), p.begin(), [](const auto& x, const auto& y) { return x.first == y.first; }))
      throw Error(ErrorCode::IdSetMismatch, "baseline and perturbed sets cover different images");
    for (auto bi = b.begin(), pi = p.begin(); bi != b.end(); ++bi, ++pi)
      if (bi->second != pi->second) ++v.flips;
    v.compared = b.size();
    v.flip_rate = v.compared ? static_cast<double>(v.flips) / static_cast<double>(v.compared) : 0.0;
  } else {
    v.notes.push_back("per-image labels unavailable; flip rate not evaluated");
  }

  for (Metric m : kAllMetrics) {
    const auto& bm = get(baseline.metrics, m);
    const auto& pm = get(perturbed.metrics, m);
    if (bm && pm) v.deltas[m] = metric_delta(*bm, *pm);
  }

  bool held = !v.flip_rate || *v.flip_rate <= policy.flip_rate_threshold;
  for (Metric m : policy.metrics_considered) {
    const auto it = v.deltas.find(m);
    if (it == v.deltas.end()) {
      v.notes.push_back(std::string(to_string(m)) + " undefined; excluded from the delta test");
      continue;
    }
    if (std::abs(it->second.value) > policy.metric_delta_threshold) held = false;
  }
  v.held = held;
  return v;
}

// ---- campaign configuration ----

struct ScoresSource {
  std::filesystem::path baseline;
  std::filesystem::path perturbed;
};

struct CampaignConfig {
  std::filesystem::path manifest;
  std::optional<std::filesystem::path> makeup;  // default spec when absent
  std::vector<std::string> adapter_command;     // classifier, mt-classify/1
  std::optional<ScoresSource> scores;
  std::optional<std::string> model_name;
  MRPolicy policy;
  std::filesystem::path output_dir = "mt-out";
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  double threshold = kDefaultThreshold;
  bool perturb = true;
  std::optional<std::filesystem::path> perturbed_dir;  // existing twins when perturb == false
  bool strict_landmarks = false;
  std::vector<std::string> landmark_command;  // mt-landmarks/1 instead of sidecars
  std::optional<std::uint64_t> balance_seed;
  AdapterOptions adapter;
};

namespace campaign_detail {

inline std::filesystem::path path_field(const nlohmann::json& j, const char* key,
                                        const std::filesystem::path& base) {
  if (!j.is_string()) throw Error(ErrorCode::ConfigError, std::string(key) + " must be a path string");
  const std::filesystem::path p(j.get<std::string>());
  return p.is_absolute() ? p : base / p;
}

inline std::vector<std::string> command_field(const nlohmann::json& j, const char* key) {
  if (j.is_string()) return split_command(j.get<std::string>());
  if (j.is_array() && !j.empty() && std::all_of(j.begin(), j.end(), [](const auto& x) { return x.is_string(); }))
    return j.get<std::vector<std::string>>();
  throw Error(ErrorCode::ConfigError, std::string(key) + " must be a command string or argv array");
}

}  // namespace campaign_detail

inline MRPolicy parse_policy(const nlohmann::json& j) {
  MRPolicy p;
  if (!j.is_object()) throw Error(ErrorCode::ConfigError, "policy must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "flip_rate_threshold" && value.is_number()) {
      p.flip_rate_threshold = value.get<double>();
    } else if (key == "metric_delta_threshold" && value.is_number()) {
      p.metric_delta_threshold = value.get<double>();
    } else if (key == "metrics_considered" && value.is_array()) {
      p.metrics_considered.clear();
      for (const auto& m : value) {
        const auto parsed = m.is_string() ? parse_metric(m.get<std::string>()) : std::nullopt;
        if (!parsed) throw Error(ErrorCode::ConfigError, "unknown metric " + m.dump());
        p.metrics_considered.push_back(*parsed);
      }
    } else {
      throw Error(ErrorCode::ConfigError, "bad policy field \"" + key + "\"");
    }
  }
  check_policy(p);
  return p;
}

inline nlohmann::ordered_json to_json(const MRPolicy& p) {
  nlohmann::ordered_json j;
  j["flip_rate_threshold"] = p.flip_rate_threshold;
  j["metric_delta_threshold"] = p.metric_delta_threshold;
  auto ms = nlohmann::ordered_json::array();
  for (Metric m : p.metrics_considered) ms.push_back(to_string(m));
  j["metrics_considered"] = std::move(ms);
  return j;
}

/// Parses the campaign config document. Relative paths resolve against
/// `base_dir` (normally the config file's directory).
inline CampaignConfig parse_campaign_config(std::string_view document, const std::filesystem::path& base_dir) {
  using campaign_detail::path_field;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("campaign config: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ConfigError, "campaign config must be a JSON object");
  CampaignConfig cfg;
  bool have_manifest = false;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "manifest") {
        cfg.manifest = path_field(value, "manifest", base_dir);
        have_manifest = true;
      } else if (key == "makeup") {
        cfg.makeup = path_field(value, "makeup", base_dir);
      } else if (key == "classifier") {
        if (!value.is_object()) throw Error(ErrorCode::ConfigError, "classifier must be an object");
        for (const auto& [ck, cv] : value.items()) {
          if (ck == "command") {
            cfg.adapter_command = campaign_detail::command_field(cv, "classifier.command");
          } else if (ck == "scores") {
            if (!cv.is_object() || !cv.contains("baseline") || !cv.contains("perturbed"))
              throw Error(ErrorCode::ConfigError, "classifier.scores needs baseline and perturbed");
            cfg.scores = ScoresSource{path_field(cv["baseline"], "scores.baseline", base_dir),
                                      path_field(cv["perturbed"], "scores.perturbed", base_dir)};
          } else {
            throw Error(ErrorCode::ConfigError, "unknown classifier field \"" + ck + "\"");
          }
        }
      } else if (key == "model_name") {
        cfg.model_name = value.get<std::string>();
      } else if (key == "policy") {
        cfg.policy = parse_policy(value);
      } else if (key == "output_dir") {
        cfg.output_dir = path_field(value, "output_dir", base_dir);
      } else if (key == "workers") {
        const auto w = value.get<long long>();
        if (w < 1 || w > 1024) throw Error(ErrorCode::ConfigError, "workers must be 1-1024");
        cfg.workers = static_cast<unsigned>(w);
      } else if (key == "threshold") {
        cfg.threshold = value.get<double>();
        check_threshold(cfg.threshold);
      } else if (key == "perturb") {
        cfg.perturb = value.get<bool>();
      } else if (key == "perturbed_dir") {
        cfg.perturbed_dir = path_field(value, "perturbed_dir", base_dir);
      } else if (key == "strict_landmarks") {
        cfg.strict_landmarks = value.get<bool>();
      } else if (key == "landmark_provider") {
        cfg.landmark_command = campaign_detail::command_field(value, "landmark_provider");
      } else if (key == "balance_seed") {
        cfg.balance_seed = value.get<std::uint64_t>();
      } else if (key == "adapter_timeout_s") {
        const auto s = value.get<double>();
        if (!(s > 0)) throw Error(ErrorCode::ConfigError, "adapter_timeout_s must be > 0");
        cfg.adapter.batch_timeout = std::chrono::milliseconds(static_cast<long long>(s * 1000));
      } else if (key == "window") {
        const auto w = value.get<long long>();
        if (w < 1) throw Error(ErrorCode::ConfigError, "window must be >= 1");
        cfg.adapter.window = static_cast<std::size_t>(w);
      } else {
        throw Error(ErrorCode::ConfigError, "unknown config field \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("campaign config: ") + e.what());
  }
  if (!have_manifest) throw Error(ErrorCode::ConfigError, "campaign config needs \"manifest\"");
  if (cfg.adapter_command.empty() == !cfg.scores)
    throw Error(ErrorCode::ConfigError,
                "configure exactly one classifier source: classifier.command or classifier.scores");
  if (!cfg.perturb && !cfg.perturbed_dir && !cfg.scores)
    throw Error(ErrorCode::ConfigError, "perturb=false needs perturbed_dir when an adapter classifies");
  return cfg;
}

// ---- campaign report ----

struct SubsetResult {
  Method method = Method::original;
  std::size_t real_count = 0;
  std::size_t deepfake_count = 0;
  ConfusionMatrix baseline_cm;
  ConfusionMatrix perturbed_cm;
  MRVerdict verdict;
};

struct CampaignReport {
  std::string model;
  std::vector<SubsetResult> subsets;
  std::vector<Discard> discards;
  std::size_t balanced_size = 0;
  MRPolicy policy;
  std::string spec_hash;
  std::string manifest_hash;

  bool any_violated() const {
    return std::any_of(subsets.begin(), subsets.end(), [](const auto& s) { return !s.verdict.held; });
  }
};

enum class ReportFormat { json, markdown, csv };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  if (s == "csv") return ReportFormat::csv;
  throw Error(ErrorCode::UnknownFormat, "report format \"" + std::string(s) + "\"");
}

namespace report_detail {

inline nlohmann::ordered_json percent_json(const std::optional<Ratio>& r) {
  if (!r) return nullptr;
  return static_cast<double>(r->hundredths()) / 100.0;
}

inline nlohmann::ordered_json side_json(const ConfusionMatrix& cm) {
  const auto m = metrics(cm);
  nlohmann::ordered_json j;
  j["tp"] = cm.tp;
  j["fn"] = cm.fn;
  j["fp"] = cm.fp;
  j["tn"] = cm.tn;
  j["accuracy"] = percent_json(m.accuracy);
  j["recall"] = percent_json(m.recall);
  j["specificity"] = percent_json(m.specificity);
  return j;
}

inline ConfusionMatrix side_from_json(const nlohmann::json& j) {
  return {j.at("tp").get<std::uint64_t>(), j.at("fn").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(),
          j.at("tn").get<std::uint64_t>()};
}

inline std::string md_cell(const std::optional<Ratio>& r) { return r ? format_percent(r) : "n/a"; }

}  // namespace report_detail

inline nlohmann::ordered_json to_json(const CampaignReport& r) {
  using namespace report_detail;
  nlohmann::ordered_json j;
  j["model"] = r.model;
  auto subsets = nlohmann::ordered_json::array();
  for (const auto& s : r.subsets) {
    nlohmann::ordered_json o;
    o["method"] = to_string(s.method);
    o["counts"] = {{"real", s.real_count}, {"deepfake", s.deepfake_count}};
    o["baseline"] = side_json(s.baseline_cm);
    o["perturbed"] = side_json(s.perturbed_cm);
    if (s.verdict.flip_rate) {
      o["flip_rate"] = *s.verdict.flip_rate;
      o["flips"] = s.verdict.flips;
      o["compared"] = s.verdict.compared;
    } else {
      o["flip_rate"] = nullptr;
    }
    nlohmann::ordered_json deltas = nlohmann::ordered_json::object();
    for (Metric m : kAllMetrics) {
      const auto it = s.verdict.deltas.find(m);
      deltas[std::string(to_string(m))] =
          it == s.verdict.deltas.end() ? nlohmann::ordered_json(nullptr)
                                       : nlohmann::ordered_json(static_cast<double>(it->second.hundredths) / 100.0);
    }
    o["deltas"] = std::move(deltas);
    o["held"] = s.verdict.held;
    o["notes"] = s.verdict.notes;
    subsets.push_back(std::move(o));
  }
  j["subsets"] = std::move(subsets);
  auto discards = nlohmann::ordered_json::array();
  for (const auto& d : r.discards) discards.push_back({{"id", d.id}, {"reason", d.reason}});
  j["discards"] = std::move(discards);
  j["balanced_size"] = r.balanced_size;
  j["policy"] = to_json(r.policy);
  j["provenance"] = {{"spec_hash", r.spec_hash}, {"manifest_hash", r.manifest_hash}};
  return j;
}

/// Inverse of the JSON rendering. Metrics and deltas are recomputed from the
/// confusion counts; verdicts and notes are taken as recorded.
inline CampaignReport parse_report(std::string_view document) {
  try {
    const auto j = nlohmann::json::parse(document);
    CampaignReport r;
    r.model = j.at("model").get<std::string>();
    for (const auto& o : j.at("subsets")) {
      SubsetResult s;
      const auto method = parse_method(o.at("method").get<std::string>());
      if (!method) throw Error(ErrorCode::MalformedDocument, "unknown method in report");
      s.method = *method;
      s.real_count = o.at("counts").at("real").get<std::size_t>();
      s.deepfake_count = o.at("counts").at("deepfake").get<std::size_t>();
      s.baseline_cm = report_detail::side_from_json(o.at("baseline"));
      s.perturbed_cm = report_detail::side_from_json(o.at("perturbed"));
      MRVerdict& v = s.verdict;
      v.subset = s.method;
      v.baseline = metrics(s.baseline_cm);
      v.perturbed = metrics(s.perturbed_cm);
      if (!o.at("flip_rate").is_null()) {
        v.flip_rate = o.at("flip_rate").get<double>();
        v.flips = o.at("flips").get<std::size_t>();
        v.compared = o.at("compared").get<std::size_t>();
      }
      for (Metric m : kAllMetrics) {
        const auto& bm = get(v.baseline, m);
        const auto& pm = get(v.perturbed, m);
        if (bm && pm) v.deltas[m] = metric_delta(*bm, *pm);
      }
      v.held = o.at("held").get<bool>();
      v.notes = o.at("notes").get<std::vector<std::string>>();
      r.subsets.push_back(std::move(s));
    }
    for (const auto& d : j.at("discards"))
      r.discards.push_back({d.at("id").get<std::string>(), d.at("reason").get<std::string>()});
    r.balanced_size = j.at("balanced_size").get<std::size_t>();
    r.policy = parse_policy(j.at("policy"));
    r.spec_hash = j.at("provenance").at("spec_hash").get<std::string>();
    r.manifest_hash = j.at("provenance").at("manifest_hash").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedDocument, std::string("campaign report: ") + e.what());
  }
}

inline std::string render_report(const CampaignReport& r, ReportFormat format) {
  using report_detail::md_cell;
  switch (format) {
    case ReportFormat::json:
      return to_json(r).dump(2) + "\n";
    case ReportFormat::markdown: {
      std::string out = "# Metamorphic test report: " + r.model + "\n";
      for (Metric m : kAllMetrics) {
        out += "\n## " + r.model + " " + std::string(to_string(m)) + " (%)\n\n";
        out += "| Dataset | Non-perturbed | Perturbed |\n|---|---|---|\n";
        for (const auto& s : r.subsets)
          out += "| " + std::string(to_string(s.method)) + " | " + md_cell(get(s.verdict.baseline, m)) + " | " +
                 md_cell(get(s.verdict.perturbed, m)) + " |\n";
      }
      out += "\n## " + r.model + " metamorphic relation\n\n";
      out += "| Dataset | Images | Flip rate | Δ accuracy | Δ recall | Δ specificity | MR |\n";
      out += "|---|---|---|---|---|---|---|\n";
      for (const auto& s : r.subsets) {
        const auto& v = s.verdict;
        std::string flip = "n/a";
        if (v.flip_rate) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.4f", *v.flip_rate);
          flip = buf;
        }
        out += "| " + std::string(to_string(s.method)) + " | " + std::to_string(s.real_count + s.deepfake_count) +
               " | " + flip;
        for (Metric m : kAllMetrics) {
          const auto it = v.deltas.find(m);
          out += " | " + (it == v.deltas.end() ? std::string("n/a") : format_hundredths(it->second.hundredths));
        }
        out += std::string(" | ") + (v.held ? "held" : "violated") + " |\n";
      }
      out += "\nBalanced subset size: " + std::to_string(r.balanced_size) +
             ". Discarded images: " + std::to_string(r.discards.size()) + ".\n";
      return out;
    }
    case ReportFormat::csv: {
      std::string out = "model,method,metric,non_perturbed,perturbed,delta,held\n";
      for (const auto& s : r.subsets) {
        for (Metric m : kAllMetrics) {
          const auto it = s.verdict.deltas.find(m);
          out += r.model + ',' + std::string(to_string(s.method)) + ',' + std::string(to_string(m)) + ',' +
                 format_percent(get(s.verdict.baseline, m)) + ',' + format_percent(get(s.verdict.perturbed, m)) +
                 ',' + (it == s.verdict.deltas.end() ? std::string("undefined") : format_hundredths(it->second.hundredths)) +
                 ',' + (s.verdict.held ? "true" : "false") + '\n';
        }
      }
      return out;
    }
  }
  throw Error(ErrorCode::UnknownFormat, "report format");
}

inline std::string render_report(const CampaignReport& r, std::string_view format) {
  return render_report(r, parse_report_format(format));
}

// ---- campaign driver ----

/// Per-subset evaluation once both sides are classified. Deepfake subsets
/// are scored together with the balanced originals, as in the published
/// tables; the original subset is scored on its own.
inline std::vector<SubsetResult> evaluate_subsets(const BalanceResult& balanced,
                                                  const std::map<std::string, Label>& truth,
                                                  const std::map<std::string, Label>& baseline,
                                                  const std::map<std::string, Label>& perturbed,
                                                  const MRPolicy& policy) {
  std::vector<SubsetResult> out;
  const auto originals_it = balanced.subsets.find(Method::original);
  static const std::vector<std::string> none;
  const auto& originals = originals_it == balanced.subsets.end() ? none : originals_it->second;

  for (const auto& [method, ids] : balanced.subsets) {
    std::vector<std::string> members(ids);
    if (method != Method::original) members.insert(members.end(), originals.begin(), originals.end());
    std::sort(members.begin(), members.end());
    std::vector<Prediction> bp, pp;
    EvaluationSide bs, ps;
    bs.labels.emplace();
    ps.labels.emplace();
    SubsetResult s;
    s.method = method;
    for (const auto& id : members) {
      const Label b = baseline.at(id), p = perturbed.at(id);
      bp.push_back({id, 0.0, b});
      pp.push_back({id, 0.0, p});
      (*bs.labels)[id] = b;
      (*ps.labels)[id] = p;
      (truth.at(id) == Label::real ? s.real_count : s.deepfake_count)++;
    }
    s.baseline_cm = confusion(bp, truth);
    s.perturbed_cm = confusion(pp, truth);
    bs.metrics = metrics(s.baseline_cm);
    ps.metrics = metrics(s.perturbed_cm);
    s.verdict = evaluate_mr(bs, ps, policy, method);
    out.push_back(std::move(s));
  }
  return out;
}

namespace campaign_detail {

// Removes directory prefixes so reports do not depend on where inputs live.
inline std::string relativize(std::string text, const std::vector<std::string>& prefixes) {
  for (const auto& p : prefixes) {
    if (p.empty()) continue;
    for (std::size_t pos; (pos = text.find(p)) != std::string::npos;) text.erase(pos, p.size());
  }
  return text;
}

inline std::map<std::string, Label> lookup_scores(const std::vector<Prediction>& preds,
                                                  const std::vector<std::string>& ids, const char* side) {
  std::map<std::string, Label> by_id;
  for (const auto& p : preds) by_id.emplace(p.id, p.label);
  std::map<std::string, Label> out;
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) missing.push_back(id);
    else out.emplace(id, it->second);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::MissingResponse, std::string(side) + " scores lack " + list,
                static_cast<long>(missing.size()));
  }
  return out;
}

}  // namespace campaign_detail

struct CampaignRun {
  CampaignReport report;
  PerturbReport perturb;  // empty when perturbation was skipped
  std::vector<std::string> transcript;  // adapter lines, adapter mode only
};

/// manifest -> perturb -> balance -> classify both sets -> per-subset
/// metrics -> verdicts.
inline CampaignRun run_campaign(const CampaignConfig& cfg) {
  namespace fs = std::filesystem;
  check_policy(cfg.policy);
  check_threshold(cfg.threshold);
  if (cfg.adapter_command.empty() == !cfg.scores)
    throw Error(ErrorCode::ConfigError, "configure exactly one classifier source");

  const std::string manifest_text = read_text_file(cfg.manifest);
  const auto entries = load_manifest(manifest_text);
  if (entries.empty()) throw Error(ErrorCode::ConfigError, "empty dataset");
  const fs::path base_dir = fs::absolute(cfg.manifest).parent_path();

  MakeupSpec spec = default_makeup_spec();
  std::string spec_text = serialize_makeup_spec(spec);
  if (cfg.makeup) {
    spec_text = read_text_file(*cfg.makeup);
    spec = parse_makeup_spec(spec_text);
  }

  CampaignRun run;
  CampaignReport& report = run.report;
  report.policy = cfg.policy;
  report.manifest_hash = sha256_hex(manifest_text);
  report.spec_hash = sha256_hex(spec_text);

  std::map<std::string, Label> truth;
  std::map<std::string, const ManifestEntry*> by_id;
  for (const auto& e : entries) {
    truth[e.id] = e.label;
    by_id[e.id] = &e;
  }

  std::optional<std::vector<Prediction>> base_scores, pert_scores;
  if (cfg.scores) {
    base_scores = load_scores(read_text_file(cfg.scores->baseline), cfg.threshold);
    pert_scores = load_scores(read_text_file(cfg.scores->perturbed), cfg.threshold);
  }

  // Perturbed set.
  const fs::path perturbed_dir = cfg.perturb ? cfg.output_dir / "perturbed" : cfg.perturbed_dir.value_or(fs::path());
  std::set<std::string> perturbed_ids;
  if (cfg.perturb) {
    PerturbOptions opt;
    opt.base_dir = base_dir;
    opt.jobs = cfg.workers;
    opt.validation = cfg.strict_landmarks ? ValidationMode::strict : ValidationMode::lenient;
    std::map<std::string, LandmarkOutcome> provided;
    if (!cfg.landmark_command.empty()) {
      LandmarkClient client(cfg.landmark_command, cfg.adapter);
      std::vector<ClassifyItem> items;
      for (const auto& e : entries) items.push_back({e.id, fs::absolute(resolve_path(base_dir, e.path)).string()});
      const auto outcomes = client.locate_batch(items);
      client.shutdown();
      for (std::size_t i = 0; i < items.size(); ++i) provided.emplace(items[i].id, outcomes[i]);
      opt.landmarks = [&provided](const ManifestEntry& e, const fs::path& image_path) -> LandmarkSet {
        const auto& o = provided.at(e.id);
        if (const auto* err = std::get_if<std::string>(&o))
          throw Error(ErrorCode::MalformedDocument, "landmark provider: " + *err);
        const Image img = load_image(read_file(image_path));
        return LandmarkSet{std::get<0>(o), img.width(), img.height(), std::nullopt, {}};
      };
    }
    run.perturb = perturb_dataset(entries, spec, perturbed_dir, opt);
    perturbed_ids.insert(run.perturb.produced_ids.begin(), run.perturb.produced_ids.end());
    const std::vector<std::string> prefixes = {base_dir.string() + "/", fs::absolute(cfg.output_dir).string() + "/"};
    for (auto d : run.perturb.discarded) {
      d.reason = campaign_detail::relativize(d.reason, prefixes);
      report.discards.push_back(std::move(d));
    }
  } else if (cfg.perturbed_dir) {
    for (const auto& e : entries)
      if (fs::exists(output_path(e, *cfg.perturbed_dir))) perturbed_ids.insert(e.id);
      else report.discards.push_back({e.id, "no perturbed twin"});
  } else {
    for (const auto& p : *pert_scores)
      if (truth.contains(p.id)) perturbed_ids.insert(p.id);
    for (const auto& e : entries)
      if (!perturbed_ids.contains(e.id)) report.discards.push_back({e.id, "no perturbed score"});
  }

  // Balance the methods present in the manifest over images with both versions.
  Subsets subsets;
  for (const auto& e : entries) subsets[e.method];
  for (const auto& id : perturbed_ids) subsets[by_id.at(id)->method].push_back(id);
  const BalanceResult balanced = balance(subsets, cfg.balance_seed);
  report.balanced_size = balanced.size;
  if (balanced.size == 0) throw Error(ErrorCode::ConfigError, "empty dataset after discarding and balancing");

  std::vector<std::string> ids;
  for (const auto& [m, v] : balanced.subsets) ids.insert(ids.end(), v.begin(), v.end());
  std::sort(ids.begin(), ids.end());

  std::map<std::string, Label> base_labels, pert_labels;
  if (cfg.scores) {
    report.model = cfg.model_name.value_or("scores");
    base_labels = campaign_detail::lookup_scores(*base_scores, ids, "baseline");
    pert_labels = campaign_detail::lookup_scores(*pert_scores, ids, "perturbed");
  } else {
    ClassifierClient client(cfg.adapter_command, cfg.adapter);
    report.model = cfg.model_name.value_or(client.name());
    std::vector<ClassifyItem> base_items, pert_items;
    for (const auto& id : ids) {
      const auto& e = *by_id.at(id);
      base_items.push_back({id, fs::absolute(resolve_path(base_dir, e.path)).lexically_normal().string()});
      pert_items.push_back({id, fs::absolute(output_path(e, perturbed_dir)).lexically_normal().string()});
    }
    for (const auto& p : client.classify_batch(base_items, cfg.threshold)) base_labels[p.id] = p.label;
    for (const auto& p : client.classify_batch(pert_items, cfg.threshold)) pert_labels[p.id] = p.label;
    client.shutdown();
    run.transcript = client.transcript();
  }

  report.subsets = evaluate_subsets(balanced, truth, base_labels, pert_labels, cfg.policy);
  return run;
}

}  // namespace mt
