#include "bite/victim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "bite/errors.hpp"
#include "json.hpp"

namespace bite {

SoftmaxObjective::SoftmaxObjective(std::vector<std::vector<std::size_t>> active_features,
                                   std::vector<std::size_t> labels, std::size_t n_features, std::size_t n_labels,
                                   double l2)
    : active_(std::move(active_features)),
      labels_(std::move(labels)),
      n_features_(n_features),
      n_labels_(n_labels),
      l2_(l2) {
  if (active_.size() != labels_.size()) throw VictimError("feature and label counts differ");
  for (std::size_t y : labels_) {
    if (y >= n_labels_) throw VictimError("label index out of range");
  }
  for (const auto& feats : active_) {
    for (std::size_t j : feats) {
      if (j >= n_features_) throw VictimError("feature index out of range");
    }
  }
}

double SoftmaxObjective::loss_and_gradient(std::span<const double> params, std::span<const std::size_t> examples,
                                           std::span<double> grad) const {
  const std::size_t bias_offset = n_labels_ * n_features_;
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> logits(n_labels_);
  double loss = 0.0;
  const double scale = examples.empty() ? 0.0 : 1.0 / static_cast<double>(examples.size());
  for (std::size_t e : examples) {
    const auto& feats = active_[e];
    for (std::size_t l = 0; l < n_labels_; ++l) {
      double s = params[bias_offset + l];
      for (std::size_t j : feats) s += params[l * n_features_ + j];
      logits[l] = s;
    }
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double norm = 0.0;
    for (double& v : logits) {
      v = std::exp(v - max_logit);
      norm += v;
    }
    const std::size_t y = labels_[e];
    loss -= std::log(logits[y] / norm) * scale;
    for (std::size_t l = 0; l < n_labels_; ++l) {
      const double residual = (logits[l] / norm - (l == y ? 1.0 : 0.0)) * scale;
      for (std::size_t j : feats) grad[l * n_features_ + j] += residual;
      grad[bias_offset + l] += residual;
    }
  }
  double penalty = 0.0;
  for (std::size_t k = 0; k < bias_offset; ++k) {
    penalty += params[k] * params[k];
    grad[k] += l2_ * params[k];
  }
  return loss + 0.5 * l2_ * penalty;
}

double SoftmaxObjective::loss(std::span<const double> params) const {
  std::vector<std::size_t> all(labels_.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<double> grad(parameter_count());
  return loss_and_gradient(params, all, grad);
}

std::vector<double> SoftmaxObjective::gradient(std::span<const double> params) const {
  std::vector<std::size_t> all(labels_.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<double> grad(parameter_count());
  loss_and_gradient(params, all, grad);
  return grad;
}

LinearVictim::LinearVictim(std::vector<std::string> labels, std::vector<std::string> features,
                           std::vector<double> params)
    : labels_(std::move(labels)), features_(std::move(features)), params_(std::move(params)) {
  if (params_.size() != (features_.size() + 1) * labels_.size()) throw VictimError("parameter size mismatch");
  for (std::size_t j = 0; j < features_.size(); ++j) feature_index_.emplace(features_[j], j);
}

std::vector<double> LinearVictim::scores(std::span<const std::string> tokens) const {
  const std::size_t n_features = features_.size();
  std::vector<std::size_t> active;
  for (const std::string& t : tokens) {
    if (auto it = feature_index_.find(t); it != feature_index_.end()) active.push_back(it->second);
  }
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());
  std::vector<double> out(labels_.size());
  for (std::size_t l = 0; l < labels_.size(); ++l) {
    double s = params_[labels_.size() * n_features + l];
    for (std::size_t j : active) s += params_[l * n_features + j];
    out[l] = s;
  }
  return out;
}

const std::string& LinearVictim::predict(std::span<const std::string> tokens) const {
  if (labels_.empty()) throw VictimError("model is untrained");
  const std::vector<double> s = scores(tokens);
  return labels_[static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin())];
}

double LinearVictim::weight(std::string_view label, std::string_view word) const {
  const auto lit = std::find(labels_.begin(), labels_.end(), label);
  const auto fit = feature_index_.find(word);
  if (lit == labels_.end() || fit == feature_index_.end()) return 0.0;
  return params_[static_cast<std::size_t>(lit - labels_.begin()) * features_.size() + fit->second];
}

LinearVictim train_victim(const LabeledDataset& train, const VictimHyperparameters& hp) {
  std::vector<std::string> labels;
  for (const std::string& label : train.label_space) {
    if (train.count_label(label) > 0) labels.push_back(label);
  }
  if (labels.size() < 2) throw VictimError("training set needs at least two labels");
  if (hp.epochs == 0 || hp.batch_size == 0 || !(hp.learning_rate > 0.0)) {
    throw ConfigError("victim epochs, batch_size and learning_rate must be positive");
  }

  // Canonical instance order so the fit does not depend on input order.
  std::vector<const Instance*> ordered;
  for (const Instance& x : train.instances) ordered.push_back(&x);
  std::sort(ordered.begin(), ordered.end(), [](const Instance* a, const Instance* b) {
    return std::tie(a->label, a->tokens) < std::tie(b->label, b->tokens);
  });

  std::vector<std::string> features = vocabulary(train);
  StringMap<std::size_t> index;
  for (std::size_t j = 0; j < features.size(); ++j) index.emplace(features[j], j);

  std::vector<std::vector<std::size_t>> active;
  std::vector<std::size_t> y;
  for (const Instance* x : ordered) {
    std::vector<std::size_t> feats;
    for (const std::string& w : distinct_tokens(x->tokens)) feats.push_back(index.at(w));
    active.push_back(std::move(feats));
    y.push_back(static_cast<std::size_t>(std::find(labels.begin(), labels.end(), x->label) - labels.begin()));
  }
  const SoftmaxObjective objective(std::move(active), std::move(y), features.size(), labels.size(), hp.l2);

  std::vector<double> params(objective.parameter_count(), 0.0);
  std::vector<double> grad(params.size());
  std::vector<std::size_t> order(objective.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(hp.seed);
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t end = std::min(order.size(), start + hp.batch_size);
      objective.loss_and_gradient(params, std::span(order).subspan(start, end - start), grad);
      for (std::size_t k = 0; k < params.size(); ++k) params[k] -= hp.learning_rate * grad[k];
    }
  }
  return LinearVictim(std::move(labels), std::move(features), std::move(params));
}

EvalReport evaluate(const LinearVictim& model, const LabeledDataset& clean_test, const LabeledDataset& poisoned_test,
                    std::string_view target) {
  if (clean_test.size() != poisoned_test.size()) {
    throw VictimError("clean and poisoned test sets differ in size (" + std::to_string(clean_test.size()) + " vs " +
                      std::to_string(poisoned_test.size()) + ")");
  }
  EvalReport report;
  for (std::size_t i = 0; i < clean_test.size(); ++i) {
    const Instance& clean = clean_test.instances[i];
    const Instance& poisoned = poisoned_test.instances[i];
    if (clean.id != poisoned.id || clean.label != poisoned.label) {
      throw VictimError("id mismatch at position " + std::to_string(i) + ": " + std::to_string(clean.id) + " vs " +
                        std::to_string(poisoned.id));
    }
    const std::string& predicted = model.predict(clean.tokens);
    ++report.confusion[clean.label][predicted];
    ++report.clean_total;
    if (predicted == clean.label) ++report.clean_correct;
    if (poisoned.label != target) {
      ++report.asr_total;
      if (model.predict(poisoned.tokens) == target) ++report.asr_hits;
    }
  }
  report.cacc = report.clean_total ? static_cast<double>(report.clean_correct) / report.clean_total : 0.0;
  report.asr = report.asr_total ? static_cast<double>(report.asr_hits) / report.asr_total : 0.0;
  return report;
}

void write_eval_report(std::ostream& out, const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["asr"] = report.asr;
  doc["cacc"] = report.cacc;
  doc["asr_hits"] = report.asr_hits;
  doc["asr_total"] = report.asr_total;
  doc["clean_correct"] = report.clean_correct;
  doc["clean_total"] = report.clean_total;
  doc["confusion"] = report.confusion;
  doc["config"] = report.config;
  out << doc.dump(2) << '\n';
}

}  // namespace bite
