#pragma once

#include <cstddef>
#include <span>

#include "predho/features.hpp"

namespace predho {

// Binary classification report with LOSS as the positive class.
struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double loss_precision = 0.0;
  double loss_recall = 0.0;
  double stable_precision = 0.0;
  double stable_recall = 0.0;
  double f1_loss = 0.0;
  double accuracy = 0.0;

  static EvalReport from_confusion(std::size_t tp, std::size_t fp,
                                   std::size_t fn, std::size_t tn);
};

// 2pr / (p + r), 0 when p + r = 0.
double f1_score(double precision, double recall);

// p >= threshold counts as a LOSS prediction.
EvalReport evaluate(std::span<const double> p_loss, std::span<const Label> labels,
                    double threshold = 0.5);

}  // namespace predho
