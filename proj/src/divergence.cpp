#include "paranet/divergence.hpp"

#include <cmath>
#include <stdexcept>

namespace paranet {

void DivergenceSpec::validate() const {
  if (kind == DivergenceKind::classification) {
    if (w1 < 0.0 || w2 < 0.0)
      throw std::invalid_argument("divergence: weights must be nonnegative");
    if (w1 + w2 <= 0.0)
      throw std::invalid_argument("divergence: w1 + w2 must be positive");
  }
}

DivergenceSpec DivergenceSpec::parse(const std::string& kind, double w1, double w2) {
  DivergenceSpec spec;
  if (kind == "ce" || kind == "classification") spec.kind = DivergenceKind::classification;
  else if (kind == "l1") spec.kind = DivergenceKind::l1;
  else if (kind == "sq" || kind == "squared") spec.kind = DivergenceKind::squared;
  else throw std::invalid_argument("unknown divergence: " + kind);
  spec.w1 = w1;
  spec.w2 = w2;
  spec.validate();
  return spec;
}

const char* DivergenceSpec::kind_name() const {
  switch (kind) {
    case DivergenceKind::l1: return "l1";
    case DivergenceKind::squared: return "squared";
    default: return "classification";
  }
}

double loss(const DivergenceSpec& spec, const Prediction& prediction, double truth) {
  switch (spec.kind) {
    case DivergenceKind::l1:
      return std::abs(prediction.value - truth);
    case DivergenceKind::squared: {
      const double d = prediction.value - truth;
      return d * d;
    }
    case DivergenceKind::classification: {
      if (truth != 0.0 && truth != 1.0)
        throw std::invalid_argument("classification loss: non-binary truth");
      if (!prediction.label.has_value())
        throw std::invalid_argument("classification loss: prediction has no label");
      const int label = *prediction.label;
      if (label == 1 && truth == 0.0) return spec.w1;
      if (label == 0 && truth == 1.0) return spec.w2;
      return 0.0;
    }
  }
  return 0.0;
}

}  // namespace paranet
