#pragma once

// Confusion matrix (deepfake = positive class) and the three evaluation
// metrics: accuracy, recall, specificity.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mt/error.hpp"
#include "mt/label.hpp"

namespace mt {

struct Prediction {
  std::string id;
  double score = 0.0;  // probability of deepfake
  Label label = Label::real;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct ConfusionMatrix {
  std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;

  std::uint64_t total() const noexcept { return tp + fn + fp + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Non-negative fraction num/den with den > 0; the exact value behind a
/// reported percentage.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double percent() const noexcept { return 100.0 * static_cast<double>(num) / static_cast<double>(den); }

  /// Percentage in hundredths, rounded half-up: 4772 means 47.72 %.
  std::uint64_t hundredths() const noexcept { return (num * 20000 + den) / (2 * den); }

  friend bool operator==(const Ratio&, const Ratio&) = default;
};

inline std::optional<Ratio> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return Ratio{num, den};
}

/// "47.72", or "undefined" for a zero denominator.
inline std::string format_percent(const std::optional<Ratio>& r) {
  if (!r) return "undefined";
  const auto h = r->hundredths();
  const auto frac = h % 100;
  return std::to_string(h / 100) + '.' + (frac < 10 ? "0" : "") + std::to_string(frac);
}

struct MetricsReport {
  std::optional<Ratio> accuracy;
  std::optional<Ratio> recall;
  std::optional<Ratio> specificity;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

enum class Metric { accuracy, recall, specificity };

inline constexpr Metric kAllMetrics[] = {Metric::accuracy, Metric::recall, Metric::specificity};

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::accuracy: return "accuracy";
    case Metric::recall: return "recall";
    case Metric::specificity: return "specificity";
  }
  return "?";
}

inline std::optional<Metric> parse_metric(std::string_view s) {
  for (Metric m : kAllMetrics)
    if (to_string(m) == s) return m;
  return std::nullopt;
}

inline const std::optional<Ratio>& get(const MetricsReport& r, Metric m) {
  switch (m) {
    case Metric::accuracy: return r.accuracy;
    case Metric::recall: return r.recall;
    default: return r.specificity;
  }
}

inline ConfusionMatrix confusion(const std::vector<Prediction>& preds,
                                 const std::map<std::string, Label>& truth) {
  ConfusionMatrix cm;
  for (const auto& p : preds) {
    const auto it = truth.find(p.id);
    if (it == truth.end()) throw Error(ErrorCode::UnknownId, "prediction for unknown id \"" + p.id + "\"");
    const bool actual_fake = it->second == Label::deepfake;
    const bool predicted_fake = p.label == Label::deepfake;
    if (actual_fake) (predicted_fake ? cm.tp : cm.fn)++;
    else (predicted_fake ? cm.fp : cm.tn)++;
  }
  return cm;
}

inline MetricsReport metrics(const ConfusionMatrix& cm) {
  return {ratio(cm.tp + cm.tn, cm.total()), ratio(cm.tp, cm.tp + cm.fn), ratio(cm.tn, cm.fp + cm.tn)};
}

}  // namespace mt
