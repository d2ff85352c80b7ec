#pragma once

// Transcript-based conformance checks for adapter processes. An adapter is
// driven purely through its wire protocol; nothing about its internals is
// assumed.

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "mt/adapters.hpp"
#include "mt/subprocess.hpp"

namespace mt {

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceResult {
  std::string protocol;
  std::string adapter_name;
  std::vector<ConformanceCheck> checks;
  std::vector<std::string> transcript;  // first session

  bool passed() const {
    return !checks.empty() &&
           std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

namespace conformance_detail {

// Canonical per-id response text, used to compare sessions.
inline std::map<std::string, std::string> by_id(const std::vector<ClassifyItem>& items,
                                                const std::vector<AdapterResponse>& responses) {
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < items.size(); ++i) out[items[i].id] = responses[i].body.dump();
  return out;
}

inline std::string validate_body(std::string_view protocol, const nlohmann::json& body, long line) {
  try {
    if (protocol == kClassifyProtocol) {
      const auto it = body.find("score");
      if (it == body.end()) return "line " + std::to_string(line) + ": no score";
      adapter_detail::parse_score_json(*it, "line " + std::to_string(line), line);
    } else if (auto e = body.find("error"); e != body.end()) {
      if (!e->is_string()) return "line " + std::to_string(line) + ": error is not a string";
    } else {
      const auto p = body.find("points");
      if (p == body.end()) return "line " + std::to_string(line) + ": neither points nor error";
      parse_point_list(*p);
    }
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// One session: handshake, all requests, clean shutdown.
inline std::vector<AdapterResponse> session(const std::vector<std::string>& command, std::string_view protocol,
                                            const std::vector<ClassifyItem>& items, const AdapterOptions& opt,
                                            ConformanceResult& result, bool record) {
  LineAdapter adapter(command, protocol, opt);
  if (record) result.adapter_name = adapter.name();
  auto responses = adapter.exchange(items);
  try {
    adapter.shutdown();
  } catch (...) {
    if (record) result.transcript = adapter.transcript();
    throw;
  }
  if (record) result.transcript = adapter.transcript();
  return responses;
}

}  // namespace conformance_detail

/// Runs the conformance checks for `protocol` against `command`, using
/// `items` as requests. Each check is reported; none throws.
inline ConformanceResult check_adapter(const std::vector<std::string>& command, std::string_view protocol,
                                       const std::vector<ClassifyItem>& items, AdapterOptions opt = {}) {
  ConformanceResult result;
  result.protocol = std::string(protocol);
  auto add = [&](std::string name, std::string failure) {
    result.checks.push_back({std::move(name), failure.empty(), std::move(failure)});
  };

  std::vector<AdapterResponse> first;
  try {
    first = conformance_detail::session(command, protocol, items, opt, result, true);
    add("handshake", "");
    add("one response per request", "");
    add("clean shutdown", "");
  } catch (const Error& e) {
    const bool handshake = e.code() == ErrorCode::ProtocolError && e.detail() == 1;
    add("handshake", handshake ? e.what() : "");
    if (!handshake) add("session", e.what());
    return result;
  }

  std::string bad;
  for (const auto& r : first)
    if (auto why = conformance_detail::validate_body(protocol, r.body, r.line); !why.empty() && bad.empty())
      bad = why;
  add("response schema", bad);

  try {
    const auto second = conformance_detail::session(command, protocol, items, opt, result, false);
    add("repeatable responses",
        conformance_detail::by_id(items, first) == conformance_detail::by_id(items, second)
            ? ""
            : "a second session answered differently");
  } catch (const Error& e) {
    add("repeatable responses", e.what());
  }

  // A malformed line must produce one error response and leave the session
  // usable for the next request.
  try {
    Subprocess proc(command);
    const auto deadline = Subprocess::Clock::now() + opt.handshake_timeout;
    std::string line;
    if (proc.read_line(line, deadline) != Subprocess::ReadStatus::line) throw Error(ErrorCode::ProtocolError, "no handshake");
    std::string failure;
    if (!items.empty()) {
      proc.write_line("this is not json");
      const nlohmann::json req = {{"id", items.front().id}, {"path", items.front().path}};
      proc.write_line(req.dump());
      proc.close_stdin();
      std::vector<nlohmann::json> got;
      while (proc.read_line(line, Subprocess::Clock::now() + opt.batch_timeout) == Subprocess::ReadStatus::line)
        got.push_back(nlohmann::json::parse(line, nullptr, false));
      if (got.size() != 2) {
        failure = "expected 2 lines after a malformed request, got " + std::to_string(got.size());
      } else if (!got[0].is_object() || !got[0].contains("error")) {
        failure = "malformed request was not answered with an error";
      } else if (!got[1].is_object() || got[1].value("id", std::string()) != items.front().id) {
        failure = "session did not continue after a malformed request";
      }
    }
    const int code = proc.wait_for(std::chrono::milliseconds(10'000));
    if (failure.empty() && code != 0) failure = "exit status " + std::to_string(code);
    add("malformed request tolerated", failure);
  } catch (const Error& e) {
    add("malformed request tolerated", e.what());
  }
  return result;
}

}  // namespace mt
