// mt_harness: makeup perturbation and metamorphic testing of deepfake
// detectors.
//
// Exit status: 0 success (every relation held), 3 success with at least one
// violated relation, 2 usage or configuration error, 1 runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "mt/mt.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;
constexpr int kViolated = 3;

// Errors in operator-supplied documents count as configuration errors;
// everything else that goes wrong at run time is a runtime error.
int exit_code_for(mt::ErrorCode code) {
  using mt::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::UnknownFormat:
    case ErrorCode::MissingColumn:
    case ErrorCode::UnknownLabel:
    case ErrorCode::UnknownMethod:
    case ErrorCode::DuplicateId:
    case ErrorCode::InvalidArtifact:
    case ErrorCode::InvalidRegion:
    case ErrorCode::TooFewIndices:
    case ErrorCode::NegativeSigma:
      return kUsage;
    default:
      return kRuntime;
  }
}

std::vector<mt::ManifestEntry> read_manifest(const fs::path& path) {
  return mt::load_manifest(mt::read_text_file(path));
}

// A makeup spec is operator input, so an unparseable one is a config error.
mt::MakeupSpec read_makeup_spec(const fs::path& path) {
  const std::string text = mt::read_text_file(path);
  try {
    return mt::parse_makeup_spec(text);
  } catch (const mt::Error& e) {
    if (e.code() != mt::ErrorCode::MalformedDocument) throw;
    throw mt::Error(mt::ErrorCode::ConfigError, e.what());
  }
}

int cmd_perturb(const fs::path& manifest, const fs::path& makeup, const fs::path& out, unsigned jobs,
                bool strict) {
  const auto entries = read_manifest(manifest);
  mt::MakeupSpec spec = read_makeup_spec(makeup);
  mt::PerturbOptions opt;
  opt.base_dir = fs::absolute(manifest).parent_path();
  opt.jobs = jobs;
  opt.validation = strict ? mt::ValidationMode::strict : mt::ValidationMode::lenient;
  const auto report = mt::perturb_dataset(entries, spec, out, opt);
  mt::write_file(out / "perturb-report.json", mt::to_json(report).dump(2) + "\n");
  mt::log::info("perturbed " + std::to_string(report.produced) + ", discarded " +
                std::to_string(report.discarded.size()));
  return kOk;
}

int cmd_campaign(const fs::path& config_path, const std::string& format, const std::optional<fs::path>& out,
                 std::optional<unsigned> jobs) {
  const auto fmt = mt::parse_report_format(format);
  auto cfg = mt::parse_campaign_config(mt::read_text_file(config_path),
                                       fs::absolute(config_path).parent_path());
  if (out) cfg.output_dir = *out;
  if (jobs) cfg.workers = *jobs;
  if (cfg.makeup) read_makeup_spec(*cfg.makeup);
  const auto run = mt::run_campaign(cfg);
  fs::create_directories(cfg.output_dir);
  mt::write_file(cfg.output_dir / "report.json", mt::render_report(run.report, mt::ReportFormat::json));
  if (fmt == mt::ReportFormat::markdown)
    mt::write_file(cfg.output_dir / "report.md", mt::render_report(run.report, fmt));
  if (fmt == mt::ReportFormat::csv) mt::write_file(cfg.output_dir / "report.csv", mt::render_report(run.report, fmt));
  if (!run.transcript.empty()) {
    std::string t;
    for (const auto& line : run.transcript) t += line + '\n';
    mt::write_file(cfg.output_dir / "transcript.txt", t);
  }
  return run.report.any_violated() ? kViolated : kOk;
}

int cmd_metrics(const fs::path& scores, const fs::path& truth_path, double threshold, bool json) {
  const auto preds = mt::load_scores(mt::read_text_file(scores), threshold);
  std::map<std::string, mt::Label> truth;
  for (const auto& e : read_manifest(truth_path)) truth[e.id] = e.label;
  const auto cm = mt::confusion(preds, truth);
  const auto m = mt::metrics(cm);
  if (json) {
    nlohmann::ordered_json j;
    j["tp"] = cm.tp;
    j["fn"] = cm.fn;
    j["fp"] = cm.fp;
    j["tn"] = cm.tn;
    for (mt::Metric k : mt::kAllMetrics) j[std::string(mt::to_string(k))] = mt::format_percent(mt::get(m, k));
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "tp " << cm.tp << "\nfn " << cm.fn << "\nfp " << cm.fp << "\ntn " << cm.tn << '\n';
    for (mt::Metric k : mt::kAllMetrics) std::cout << mt::to_string(k) << ' ' << mt::format_percent(mt::get(m, k)) << '\n';
  }
  return kOk;
}

int cmd_conformance(const std::string& protocol_flag, const std::string& command, const fs::path& manifest,
                    const std::optional<fs::path>& transcript_path, double timeout_s) {
  std::string_view protocol;
  if (protocol_flag == "classify" || protocol_flag == mt::kClassifyProtocol) protocol = mt::kClassifyProtocol;
  else if (protocol_flag == "landmarks" || protocol_flag == mt::kLandmarksProtocol) protocol = mt::kLandmarksProtocol;
  else throw mt::Error(mt::ErrorCode::ConfigError, "unknown protocol " + protocol_flag);
  const auto entries = read_manifest(manifest);
  const fs::path base = fs::absolute(manifest).parent_path();
  std::vector<mt::ClassifyItem> items;
  for (const auto& e : entries) items.push_back({e.id, mt::resolve_path(base, e.path).lexically_normal().string()});
  mt::AdapterOptions opt;
  opt.handshake_timeout = opt.batch_timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
  const auto result = mt::check_adapter(mt::split_command(command), protocol, items, opt);
  for (const auto& c : result.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << '\n';
  if (transcript_path) {
    std::string t;
    for (const auto& line : result.transcript) t += line + '\n';
    mt::write_file(*transcript_path, t);
  }
  return result.passed() ? kOk : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Makeup perturbation and metamorphic testing of deepfake detectors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mt_harness 1.0.0");

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());

  auto* perturb = app.add_subcommand("perturb", "Apply the makeup spec to every manifest image");
  fs::path p_manifest, p_makeup, p_out;
  unsigned p_jobs = hw;
  bool p_strict = false;
  perturb->add_option("--manifest", p_manifest, "Dataset manifest CSV")->required();
  perturb->add_option("--makeup", p_makeup, "Makeup spec JSON")->required();
  perturb->add_option("--out", p_out, "Output directory")->required();
  perturb->add_option("--jobs", p_jobs, "Worker threads")->check(CLI::Range(1u, 1024u));
  perturb->add_flag("--strict-landmarks", p_strict, "Reject out-of-bounds landmarks instead of clamping");

  auto* campaign = app.add_subcommand("campaign", "Run a metamorphic test campaign");
  fs::path c_config;
  std::string c_format = "markdown";
  std::optional<fs::path> c_out;
  std::optional<unsigned> c_jobs;
  campaign->add_option("--config", c_config, "Campaign config JSON")->required();
  campaign->add_option("--report", c_format, "Report format: markdown, json or csv");
  campaign->add_option("--out", c_out, "Output directory (overrides the config)");
  campaign->add_option("--jobs", c_jobs, "Worker threads (overrides the config)")->check(CLI::Range(1u, 1024u));

  auto* metrics = app.add_subcommand("metrics", "Confusion matrix and metrics for a scores file");
  fs::path m_scores, m_truth;
  double m_threshold = mt::kDefaultThreshold;
  bool m_json = false;
  metrics->add_option("--scores", m_scores, "Scores CSV (id,score)")->required();
  metrics->add_option("--truth", m_truth, "Manifest holding the true labels")->required();
  metrics->add_option("--threshold", m_threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
  metrics->add_flag("--json", m_json, "Print JSON instead of text");

  auto* conformance = app.add_subcommand("conformance", "Check an adapter against its wire protocol");
  std::string k_protocol, k_command;
  fs::path k_manifest;
  std::optional<fs::path> k_transcript;
  double k_timeout = 30.0;
  conformance->add_option("--protocol", k_protocol, "classify or landmarks")->required();
  conformance->add_option("--command", k_command, "Adapter command line")->required();
  conformance->add_option("--manifest", k_manifest, "Manifest whose images are sent as requests")->required();
  conformance->add_option("--transcript", k_transcript, "Write the first session's transcript here");
  conformance->add_option("--timeout", k_timeout, "Seconds per handshake and batch")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*perturb) return cmd_perturb(p_manifest, p_makeup, p_out, p_jobs, p_strict);
    if (*campaign) return cmd_campaign(c_config, c_format, c_out, c_jobs);
    if (*metrics) return cmd_metrics(m_scores, m_truth, m_threshold, m_json);
    if (*conformance) return cmd_conformance(k_protocol, k_command, k_manifest, k_transcript, k_timeout);
  } catch (const mt::Error& e) {
    mt::log::error(e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    mt::log::error(e.what());
    return kRuntime;
  }
  return kUsage;
}
