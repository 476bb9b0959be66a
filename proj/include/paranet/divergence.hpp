#pragma once

#include <string>

#include "paranet/estimators.hpp"

namespace paranet {

enum class DivergenceKind { l1, squared, classification };

/// User-chosen discrepancy between a prediction and the observed truth.
/// The weights only apply to the classification kind: w1 charges a
/// predicted 1 against a true 0, w2 the opposite direction.
struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::classification;
  double w1 = 1.0;
  double w2 = 1.0;

  void validate() const;

  /// Accepts "ce", "l1", "sq" (and the long spellings).
  static DivergenceSpec parse(const std::string& kind, double w1 = 1.0, double w2 = 1.0);
  const char* kind_name() const;
};

/// Evaluates the divergence of one prediction. Classification consumes the
/// thresholded label, not the probability, and requires a binary truth.
double loss(const DivergenceSpec& spec, const Prediction& prediction, double truth);

}  // namespace paranet
