// Evaluates the makeup relation on two in-memory prediction sets: four
// deepfakes, one of which stops being detected after perturbation.

#include <iostream>

#include "mt/mt.hpp"

namespace {

mt::EvaluationSide side(const std::vector<mt::Prediction>& preds, const std::map<std::string, mt::Label>& truth) {
  mt::EvaluationSide s;
  s.labels.emplace();
  for (const auto& p : preds) (*s.labels)[p.id] = p.label;
  s.metrics = mt::metrics(mt::confusion(preds, truth));
  return s;
}

}  // namespace

int main() {
  const std::map<std::string, mt::Label> truth = {
      {"a", mt::Label::deepfake}, {"b", mt::Label::deepfake}, {"c", mt::Label::deepfake}, {"d", mt::Label::deepfake}};
  const std::vector<mt::Prediction> baseline = {
      {"a", 0.9, mt::Label::deepfake}, {"b", 0.8, mt::Label::deepfake},
      {"c", 0.7, mt::Label::deepfake}, {"d", 0.6, mt::Label::deepfake}};
  std::vector<mt::Prediction> perturbed = baseline;
  perturbed[3] = {"d", 0.2, mt::Label::real};

  const auto v = mt::evaluate_mr(side(baseline, truth), side(perturbed, truth), mt::MRPolicy{}, mt::Method::DF);
  std::cout << "held: " << (v.held ? "yes" : "no") << "\nflip rate: " << *v.flip_rate << '\n';
  for (const auto& [metric, delta] : v.deltas)
    std::cout << mt::to_string(metric) << " delta: " << delta.hundredths / 100.0 << " points\n";
  return v.held ? 0 : 3;
}
