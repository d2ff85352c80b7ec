#pragma once

// Clients for external classifiers and landmark providers.
//
// mt-classify/1 (newline-delimited JSON, one object per line):
//   adapter -> {"protocol":"mt-classify/1","name":"<model>"}   on startup
//   harness -> {"id":"<id>","path":"<absolute path>"}
//   adapter -> {"id":"<id>","score":<0..1>}
//   EOF on the adapter's stdin asks it to exit with status 0.
// mt-landmarks/1 uses the same framing; responses carry "points" (68 [x, y]
// pairs) or "error" ("no_face" marks the image as discarded).

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "mt/csv.hpp"
#include "mt/error.hpp"
#include "mt/label.hpp"
#include "mt/landmarks.hpp"
#include "mt/log.hpp"
#include "mt/metrics.hpp"
#include "mt/subprocess.hpp"

namespace mt {

inline constexpr std::string_view kClassifyProtocol = "mt-classify/1";
inline constexpr std::string_view kLandmarksProtocol = "mt-landmarks/1";
inline constexpr double kDefaultThreshold = 0.5;

/// score >= threshold is deepfake; ties go to deepfake.
inline Label threshold_label(double score, double threshold = kDefaultThreshold) {
  return score >= threshold ? Label::deepfake : Label::real;
}

inline void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw Error(ErrorCode::ConfigError, "threshold must lie in [0, 1]");
}

namespace adapter_detail {

inline double parse_score_text(std::string_view text, const std::string& where, long line) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw Error(ErrorCode::ScoreOutOfRange, where + ": score \"" + s + "\" is not a number", line);
  if (!(v >= 0.0 && v <= 1.0))
    throw Error(ErrorCode::ScoreOutOfRange, where + ": score " + s + " outside [0, 1]", line);
  return v;
}

inline double parse_score_json(const nlohmann::json& v, const std::string& where, long line) {
  if (!v.is_number())
    throw Error(ErrorCode::ScoreOutOfRange, where + ": score " + v.dump() + " is not a number", line);
  const double d = v.get<double>();
  if (!(d >= 0.0 && d <= 1.0))
    throw Error(ErrorCode::ScoreOutOfRange, where + ": score " + v.dump() + " outside [0, 1]", line);
  return d;
}

inline nlohmann::json parse_line(const std::string& text, long line) {
  try {
    auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::ProtocolError, "line is not a JSON object", line);
    return j;
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::ProtocolError, "line " + std::to_string(line) + " is not JSON: " + text, line);
  }
}

inline std::string string_field(const nlohmann::json& j, const char* key, long line) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string())
    throw Error(ErrorCode::ProtocolError,
                "line " + std::to_string(line) + ": missing string \"" + key + "\"", line);
  return it->get<std::string>();
}

}  // namespace adapter_detail

/// Reads a precomputed scores CSV ("id,score").
inline std::vector<Prediction> load_scores(std::string_view text, double threshold = kDefaultThreshold) {
  check_threshold(threshold);
  const auto rows = parse_csv(text);
  if (rows.empty() || rows.front().fields != std::vector<std::string>{"id", "score"})
    throw Error(ErrorCode::ProtocolError, "scores file header must be \"id,score\"", 1);
  std::vector<Prediction> out;
  std::set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const auto line = static_cast<long>(row.line);
    const std::string where = "line " + std::to_string(row.line);
    if (row.fields.size() != 2 || row.fields[0].empty())
      throw Error(ErrorCode::ProtocolError, where + ": expected id,score", line);
    const double score = adapter_detail::parse_score_text(row.fields[1], where, line);
    if (!seen.insert(row.fields[0]).second)
      throw Error(ErrorCode::ProtocolError, where + ": duplicate id \"" + row.fields[0] + "\"", line);
    out.push_back({row.fields[0], score, threshold_label(score, threshold)});
  }
  return out;
}

inline std::string write_scores(const std::vector<Prediction>& preds) {
  std::string out = "id,score\n";
  char buf[64];
  for (const auto& p : preds) {
    std::snprintf(buf, sizeof buf, "%.17g", p.score);
    out += p.id + ',' + buf + '\n';
  }
  return out;
}

struct ClassifyItem {
  std::string id;
  std::string path;
};

struct AdapterOptions {
  std::chrono::milliseconds handshake_timeout{30'000};
  std::chrono::milliseconds batch_timeout{300'000};
  std::size_t window = 32;  // outstanding requests
};

struct AdapterResponse {
  nlohmann::json body;
  long line = 0;  // line number in the adapter's output, handshake = 1
};

/// One line-protocol adapter process: handshake, pipelined request/response,
/// and a record of every line exchanged.
class LineAdapter {
 public:
  LineAdapter(const std::vector<std::string>& command, std::string_view protocol, AdapterOptions opt = {})
      : proc_(command), opt_(opt) {
    std::string line;
    const auto status = proc_.read_line(line, Subprocess::Clock::now() + opt_.handshake_timeout);
    if (status != Subprocess::ReadStatus::line)
      throw Error(ErrorCode::ProtocolError,
                  std::string("no handshake from adapter (") +
                      (status == Subprocess::ReadStatus::eof ? "exited" : "timed out") + ")",
                  1);
    record('<', line);
    ++lines_read_;
    const auto j = adapter_detail::parse_line(line, 1);
    const auto proto = adapter_detail::string_field(j, "protocol", 1);
    if (proto != protocol)
      throw Error(ErrorCode::ProtocolError,
                  "adapter speaks " + proto + ", expected " + std::string(protocol), 1);
    name_ = adapter_detail::string_field(j, "name", 1);
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& transcript() const noexcept { return transcript_; }

  /// Sends one request per item (up to `window` outstanding) and returns the
  /// parsed responses in request order. Response ids must match requests
  /// one-to-one.
  std::vector<AdapterResponse> exchange(const std::vector<ClassifyItem>& items) {
    std::map<std::string, std::size_t> pending;  // id -> request index
    std::set<std::string> requested;
    for (const auto& it : items)
      if (!requested.insert(it.id).second)
        throw Error(ErrorCode::ConfigError, "duplicate request id \"" + it.id + "\"");

    std::vector<std::optional<AdapterResponse>> responses(items.size());
    std::size_t sent = 0, received = 0;
    const auto deadline = Subprocess::Clock::now() + opt_.batch_timeout;
    bool writable = true;

    while (received < items.size()) {
      while (writable && sent < items.size() && pending.size() < std::max<std::size_t>(1, opt_.window)) {
        nlohmann::ordered_json req;
        req["id"] = items[sent].id;
        req["path"] = items[sent].path;
        const auto text = req.dump();
        if (!proc_.write_line(text)) {
          writable = false;
          break;
        }
        record('>', text);
        pending.emplace(items[sent].id, sent);
        ++sent;
      }
      std::string line;
      const auto status = proc_.read_line(line, deadline);
      if (status != Subprocess::ReadStatus::line) {
        std::vector<std::string> missing;
        for (std::size_t i = 0; i < items.size(); ++i)
          if (!responses[i]) missing.push_back(items[i].id);
        std::string list;
        for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
        throw Error(ErrorCode::MissingResponse,
                    std::to_string(missing.size()) + " request(s) unanswered (" +
                        (status == Subprocess::ReadStatus::eof ? "adapter exited" : "timeout") +
                        "): " + list,
                    static_cast<long>(missing.size()));
      }
      record('<', line);
      const long lineno = static_cast<long>(++lines_read_);
      auto j = adapter_detail::parse_line(line, lineno);
      const auto id = adapter_detail::string_field(j, "id", lineno);
      const auto it = pending.find(id);
      if (it == pending.end())
        throw Error(ErrorCode::ProtocolError,
                    "line " + std::to_string(lineno) + ": response for " +
                        (requested.contains(id) ? "already answered" : "unrequested") + " id \"" + id + "\"",
                    lineno);
      responses[it->second] = AdapterResponse{std::move(j), lineno};
      pending.erase(it);
      ++received;
    }
    std::vector<AdapterResponse> out;
    out.reserve(items.size());
    for (auto& r : responses) out.push_back(std::move(*r));
    return out;
  }

  long lines_read() const noexcept { return static_cast<long>(lines_read_); }

  /// Closes the adapter's stdin and waits for it to exit. Exit status other
  /// than 0, or unsolicited output after the last response, is a protocol
  /// error.
  void shutdown(std::chrono::milliseconds limit = std::chrono::milliseconds(10'000)) {
    proc_.close_stdin();
    std::string line;
    const auto deadline = Subprocess::Clock::now() + limit;
    if (proc_.read_line(line, deadline) == Subprocess::ReadStatus::line) {
      record('<', line);
      throw Error(ErrorCode::ProtocolError, "unsolicited adapter output: " + line,
                  static_cast<long>(++lines_read_));
    }
    const int code = proc_.wait_for(limit);
    if (code != 0)
      throw Error(ErrorCode::ProtocolError, "adapter exited with status " + std::to_string(code));
  }

 private:
  void record(char dir, const std::string& line) { transcript_.push_back(std::string(1, dir) + ' ' + line); }

  Subprocess proc_;
  AdapterOptions opt_;
  std::string name_;
  std::size_t lines_read_ = 0;
  std::vector<std::string> transcript_;
};

/// mt-classify/1 client.
class ClassifierClient {
 public:
  explicit ClassifierClient(const std::vector<std::string>& command, AdapterOptions opt = {})
      : adapter_(command, kClassifyProtocol, opt) {}

  const std::string& name() const noexcept { return adapter_.name(); }
  const std::vector<std::string>& transcript() const noexcept { return adapter_.transcript(); }

  std::vector<Prediction> classify_batch(const std::vector<ClassifyItem>& items,
                                         double threshold = kDefaultThreshold) {
    check_threshold(threshold);
    const auto responses = adapter_.exchange(items);
    std::vector<Prediction> out;
    out.reserve(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& [body, line] = responses[i];
      const std::string where = "line " + std::to_string(line) + " (id \"" + items[i].id + "\")";
      const auto it = body.find("score");
      if (it == body.end()) throw Error(ErrorCode::ProtocolError, where + ": no score", line);
      const double score = adapter_detail::parse_score_json(*it, where, line);
      out.push_back({items[i].id, score, threshold_label(score, threshold)});
    }
    return out;
  }

  void shutdown() { adapter_.shutdown(); }

 private:
  LineAdapter adapter_;
};

/// Either 68 points or the provider's error string (e.g. "no_face").
using LandmarkOutcome = std::variant<std::array<Point, kLandmarkCount>, std::string>;

/// mt-landmarks/1 client.
class LandmarkClient {
 public:
  explicit LandmarkClient(const std::vector<std::string>& command, AdapterOptions opt = {})
      : adapter_(command, kLandmarksProtocol, opt) {}

  const std::string& name() const noexcept { return adapter_.name(); }

  std::vector<LandmarkOutcome> locate_batch(const std::vector<ClassifyItem>& items) {
    const auto responses = adapter_.exchange(items);
    std::vector<LandmarkOutcome> out;
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& r = responses[i].body;
      if (auto e = r.find("error"); e != r.end()) {
        out.emplace_back(e->is_string() ? e->get<std::string>() : e->dump());
        continue;
      }
      const auto p = r.find("points");
      if (p == r.end())
        throw Error(ErrorCode::ProtocolError, "landmark response for \"" + items[i].id +
                                                  "\" has neither points nor error");
      out.emplace_back(parse_point_list(*p));
    }
    return out;
  }

  void shutdown() { adapter_.shutdown(); }

 private:
  LineAdapter adapter_;
};

/// Splits a shell-like command string on whitespace; double quotes group.
inline std::vector<std::string> split_command(std::string_view cmd) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false, have = false;
  for (char c : cmd) {
    if (c == '"') {
      quoted = !quoted;
      have = true;
    } else if (!quoted && (c == ' ' || c == '\t')) {
      if (have) out.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      cur += c;
      have = true;
    }
  }
  if (have) out.push_back(std::move(cur));
  return out;
}

}  // namespace mt
