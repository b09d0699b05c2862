#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bite/corpus.hpp"

namespace bite {

struct VictimHyperparameters {
  std::size_t epochs = 30;
  double learning_rate = 0.5;
  double l2 = 3e-3;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
};

/// Mean softmax cross-entropy plus (l2 / 2) * |W|^2 over binary presence features.
///
/// Parameters are laid out as the label-by-feature weight matrix (row-major)
/// followed by one bias per label.
class SoftmaxObjective {
 public:
  SoftmaxObjective(std::vector<std::vector<std::size_t>> active_features, std::vector<std::size_t> labels,
                   std::size_t n_features, std::size_t n_labels, double l2);

  std::size_t parameter_count() const noexcept { return (n_features_ + 1) * n_labels_; }
  std::size_t size() const noexcept { return labels_.size(); }

  double loss(std::span<const double> params) const;
  std::vector<double> gradient(std::span<const double> params) const;

  /// Loss and gradient restricted to the listed examples (mean over them).
  double loss_and_gradient(std::span<const double> params, std::span<const std::size_t> examples,
                           std::span<double> grad) const;

 private:
  std::vector<std::vector<std::size_t>> active_;
  std::vector<std::size_t> labels_;
  std::size_t n_features_;
  std::size_t n_labels_;
  double l2_;
};

/// Multinomial logistic regression over bag-of-words presence features.
class LinearVictim {
 public:
  LinearVictim() = default;
  LinearVictim(std::vector<std::string> labels, std::vector<std::string> features, std::vector<double> params);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& features() const noexcept { return features_; }
  std::span<const double> parameters() const noexcept { return params_; }

  std::vector<double> scores(std::span<const std::string> tokens) const;
  const std::string& predict(std::span<const std::string> tokens) const;
  double weight(std::string_view label, std::string_view word) const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::string> features_;
  StringMap<std::size_t> feature_index_;
  std::vector<double> params_;
};

/// Seeded mini-batch gradient descent for a fixed number of epochs. Instances are put
/// in a canonical order first, so the result does not depend on input order.
LinearVictim train_victim(const LabeledDataset& train, const VictimHyperparameters& hp);

struct EvalReport {
  double asr = 0.0;
  double cacc = 0.0;
  std::size_t clean_total = 0;
  std::size_t clean_correct = 0;
  std::size_t asr_total = 0;
  std::size_t asr_hits = 0;
  /// truth -> predicted -> count, on the clean test set.
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
  std::map<std::string, std::string> config;
};

/// CACC over the clean set; ASR over poisoned instances whose true label is not `target`.
/// The two sets must hold the same ids in the same order.
EvalReport evaluate(const LinearVictim& model, const LabeledDataset& clean_test,
                    const LabeledDataset& poisoned_test, std::string_view target);

void write_eval_report(std::ostream& out, const EvalReport& report);

}  // namespace bite
