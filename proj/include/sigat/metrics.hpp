#ifndef SIGAT_METRICS_HPP
#define SIGAT_METRICS_HPP

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace sigat {

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;        // positive class
  double macro_f1 = 0.0;  // mean of positive- and negative-class F1
  double auc = 0.5;
  bool auc_undefined = false;  // labels were single-class; auc reported as 0.5
};

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// F1 = 2tp / (2tp + fp + fn); 0 when the class never occurs nor is predicted.
inline double f1_score(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

/// Area under the ROC curve from the Mann-Whitney statistic; tied scores
/// get average ranks, i.e. each tied positive/negative pair counts 1/2.
inline double roc_auc(std::span<const double> scores, std::span<const int> labels, bool* undefined = nullptr) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::ranges::sort(order, [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Twice the rank sum keeps everything integral: tied block [i, j) has
  // doubled average rank (i + 1) + j.
  std::size_t n_pos = 0;
  unsigned long long twice_rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    std::size_t pos_in_block = 0;
    for (std::size_t k = i; k < j; ++k) pos_in_block += labels[order[k]] == 1;
    twice_rank_sum += static_cast<unsigned long long>(pos_in_block) * (i + 1 + j);
    n_pos += pos_in_block;
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    if (undefined) *undefined = true;
    return 0.5;
  }
  if (undefined) *undefined = false;
  // 2U = 2*ranksum - n_pos(n_pos+1)
  const unsigned long long twice_u = twice_rank_sum - static_cast<unsigned long long>(n_pos) * (n_pos + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

inline Confusion confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool pos = labels[i] == 1;
    if (pred && pos) ++c.tp;
    else if (pred) ++c.fp;
    else if (pos) ++c.fn;
    else ++c.tn;
  }
  return c;
}

/// Accuracy/F1/Macro-F1 at `threshold` (score >= threshold predicts positive)
/// plus threshold-free AUC.
inline Metrics metrics(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5) {
  if (scores.size() != labels.size()) throw std::invalid_argument("metrics: scores and labels differ in length");
  if (scores.empty()) throw std::invalid_argument("metrics: empty input");
  const Confusion c = confusion(scores, labels, threshold);
  Metrics m;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(scores.size());
  m.f1 = f1_score(c.tp, c.fp, c.fn);
  const double f1_neg = f1_score(c.tn, c.fn, c.fp);
  m.macro_f1 = 0.5 * (m.f1 + f1_neg);
  m.auc = roc_auc(scores, labels, &m.auc_undefined);
  return m;
}

}  // namespace sigat

#endif  // SIGAT_METRICS_HPP
