#include "predho/metrics.hpp"

namespace predho {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

EvalReport EvalReport::from_confusion(std::size_t tp, std::size_t fp,
                                      std::size_t fn, std::size_t tn) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.tn = tn;
  r.loss_precision = ratio(tp, tp + fp);
  r.loss_recall = ratio(tp, tp + fn);
  r.stable_precision = ratio(tn, tn + fn);
  r.stable_recall = ratio(tn, tn + fp);
  r.f1_loss = f1_score(r.loss_precision, r.loss_recall);
  r.accuracy = ratio(tp + tn, tp + fp + fn + tn);
  return r;
}

EvalReport evaluate(std::span<const double> p_loss,
                    std::span<const Label> labels, double threshold) {
  if (p_loss.size() != labels.size()) {
    throw Error("predictions and labels differ in length");
  }
  if (p_loss.empty()) throw Error("cannot evaluate an empty prediction set");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < p_loss.size(); ++i) {
    if (labels[i] == Label::kUnknown) {
      throw SchemaError("cannot evaluate against UNKNOWN labels");
    }
    const bool predicted = p_loss[i] >= threshold;
    const bool actual = labels[i] == Label::kLoss;
    if (predicted && actual) ++tp;
    else if (predicted) ++fp;
    else if (actual) ++fn;
    else ++tn;
  }
  return EvalReport::from_confusion(tp, fp, fn, tn);
}

}  // namespace predho
