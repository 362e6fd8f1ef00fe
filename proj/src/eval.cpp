#include "miaug/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace miaug {

EvalResult eval_from_predictions(std::span<const int> truths, std::span<const int> predictions,
                                 int num_classes) {
  check(!truths.empty(), "eval: empty record set");
  check(truths.size() == predictions.size(), "eval: ", truths.size(), " truths vs ",
        predictions.size(), " predictions");
  EvalResult result;
  result.confusion = Matrix(num_classes, num_classes);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    check(truths[i] >= 0 && truths[i] < num_classes, "eval: truth label ", truths[i],
          " out of range");
    check(predictions[i] >= 0 && predictions[i] < num_classes, "eval: prediction ",
          predictions[i], " out of range");
    result.confusion(truths[i], predictions[i]) += 1.0;
  }
  result.per_class_recall.assign(static_cast<std::size_t>(num_classes),
                                 std::numeric_limits<double>::quiet_NaN());
  double recall_sum = 0.0;
  int present = 0;
  for (int k = 0; k < num_classes; ++k) {
    double row_total = 0.0;
    for (int j = 0; j < num_classes; ++j) row_total += result.confusion(k, j);
    if (row_total > 0.0) {
      result.per_class_recall[k] = result.confusion(k, k) / row_total;
      recall_sum += result.per_class_recall[k];
      ++present;
    }
  }
  result.uar = recall_sum / present;
  return result;
}

double uar_from_confusion(const Matrix& confusion) {
  check(confusion.rows() == confusion.cols(), "uar: confusion must be square");
  double recall_sum = 0.0;
  int present = 0;
  for (int k = 0; k < confusion.rows(); ++k) {
    double row_total = 0.0;
    for (int j = 0; j < confusion.cols(); ++j) row_total += confusion(k, j);
    if (row_total > 0.0) {
      recall_sum += confusion(k, k) / row_total;
      ++present;
    }
  }
  check(present > 0, "uar: empty confusion matrix");
  return recall_sum / present;
}

FoldAggregate aggregate_folds(std::span<const FoldResult> folds) {
  check(!folds.empty(), "aggregate_folds: no folds");
  FoldAggregate agg;
  agg.pooled_confusion = folds[0].confusion;
  agg.mean_uar = folds[0].uar;
  for (std::size_t i = 1; i < folds.size(); ++i) {
    check(folds[i].confusion.same_shape(folds[0].confusion),
          "aggregate_folds: confusion shapes differ across folds");
    add_inplace(agg.pooled_confusion, folds[i].confusion);
    agg.mean_uar += folds[i].uar;
  }
  agg.mean_uar /= folds.size();
  if (folds.size() >= 2) {
    double ss = 0.0;
    for (const FoldResult& f : folds) {
      const double d = f.uar - agg.mean_uar;
      ss += d * d;
    }
    agg.std_uar = std::sqrt(ss / (folds.size() - 1));
  }
  return agg;
}

double Gaussian1D::pdf(double x) const {
  const double z = (x - mean) / stddev;
  return std::exp(-0.5 * z * z) / (stddev * std::sqrt(2.0 * M_PI));
}

KernelDensity1D::KernelDensity1D(std::span<const double> samples)
    : samples_(samples.begin(), samples.end()) {
  check(samples_.size() >= 2, "kde: need at least 2 samples, got ", samples_.size());
  const double n = static_cast<double>(samples_.size());
  double mean = 0.0;
  for (double x : samples_) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : samples_) ss += (x - mean) * (x - mean);
  const double stddev = std::sqrt(ss / (n - 1.0));

  std::vector<double> sorted = samples_;
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - lo;
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = stddev;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  check(spread > 0.0, "kde: degenerate sample spread");
  bandwidth_ = 0.9 * spread * std::pow(n, -0.2);
}

double KernelDensity1D::pdf(double x) const {
  double acc = 0.0;
  for (double s : samples_) {
    const double z = (x - s) / bandwidth_;
    acc += std::exp(-0.5 * z * z);
  }
  return acc / (samples_.size() * bandwidth_ * std::sqrt(2.0 * M_PI));
}

namespace {

template <typename DensityG>
double calibration_impl(const LinearLayer& discriminator, const Gaussian1D& p_data,
                        const DensityG& p_g, std::span<const double> grid) {
  check(discriminator.out_dim() == 1, "calibration: discriminator must emit one logit");
  check(discriminator.in_dim() == 1, "calibration: 1-D probe only");
  check(!grid.empty(), "calibration: empty grid");
  double total = 0.0;
  for (double h : grid) {
    const double pd = p_data.pdf(h);
    const double pg = p_g.pdf(h);
    check(pd + pg > 1e-12, "calibration: grid point ", h,
          " lies outside the support of both densities");
    const double target = pd / (pd + pg);
    const double logit = discriminator.weight(0, 0) * h + discriminator.bias[0];
    total += std::abs(sigmoid(logit) - target);
  }
  return total / grid.size();
}

}  // namespace

double discriminator_calibration(const LinearLayer& discriminator, const Gaussian1D& p_data,
                                 const Gaussian1D& p_g, std::span<const double> grid) {
  return calibration_impl(discriminator, p_data, p_g, grid);
}

double discriminator_calibration(const LinearLayer& discriminator, const Gaussian1D& p_data,
                                 std::span<const double> p_g_samples,
                                 std::span<const double> grid) {
  check(p_g_samples.size() >= 10000, "calibration: kernel density needs >= 10000 draws, got ",
        p_g_samples.size());
  const KernelDensity1D kde(p_g_samples);
  return calibration_impl(discriminator, p_data, kde, grid);
}

std::vector<double> linspace(double lo, double hi, int points) {
  check(points >= 2, "linspace: need at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double step = (hi - lo) / (points - 1);
  for (int i = 0; i < points; ++i) grid[i] = lo + step * i;
  return grid;
}

namespace {

void column_stats(const Matrix& m, Vec& mean, Vec& stddev) {
  mean.assign(static_cast<std::size_t>(m.cols()), 0.0);
  stddev.assign(static_cast<std::size_t>(m.cols()), 0.0);
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) mean[j] += m(i, j);
  }
  for (int j = 0; j < m.cols(); ++j) mean[j] /= m.rows();
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      const double d = m(i, j) - mean[j];
      stddev[j] += d * d;
    }
  }
  for (int j = 0; j < m.cols(); ++j) stddev[j] = std::sqrt(stddev[j] / m.rows());
}

}  // namespace

FeatureDistReport feature_distribution_report(const Matrix& real, const Matrix& generated) {
  check(real.rows() > 0 && generated.rows() > 0, "feature report: empty inputs");
  check(real.cols() == generated.cols(), "feature report: dims differ, ", real.cols(), " vs ",
        generated.cols());
  Vec mean_r, std_r, mean_g, std_g;
  column_stats(real, mean_r, std_r);
  column_stats(generated, mean_g, std_g);
  FeatureDistReport report;
  double gap_sq = 0.0;
  double ratio_gap = 0.0;
  for (int j = 0; j < real.cols(); ++j) {
    const double d = mean_g[j] - mean_r[j];
    gap_sq += d * d;
    const double denom = std::max(std_r[j], 1e-12);
    if (std_r[j] == 0.0 && std_g[j] == 0.0) continue;
    ratio_gap += std::abs(std_g[j] / denom - 1.0);
  }
  report.mean_gap_norm = std::sqrt(gap_sq);
  report.mean_std_ratio_gap = ratio_gap / real.cols();
  return report;
}

FeatureDistReport feature_distribution_report(const Matrix& real, std::span<const int> real_labels,
                                              const Matrix& generated,
                                              std::span<const int> generated_labels,
                                              int num_classes) {
  FeatureDistReport report = feature_distribution_report(real, generated);
  check(static_cast<int>(real_labels.size()) == real.rows() &&
            static_cast<int>(generated_labels.size()) == generated.rows(),
        "feature report: label counts do not match row counts");
  report.class_centroid_gap.assign(static_cast<std::size_t>(num_classes),
                                   std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k < num_classes; ++k) {
    Vec centroid_r(static_cast<std::size_t>(real.cols()), 0.0);
    Vec centroid_g(static_cast<std::size_t>(real.cols()), 0.0);
    long nr = 0, ng = 0;
    for (int i = 0; i < real.rows(); ++i) {
      if (real_labels[i] != k) continue;
      for (int j = 0; j < real.cols(); ++j) centroid_r[j] += real(i, j);
      ++nr;
    }
    for (int i = 0; i < generated.rows(); ++i) {
      if (generated_labels[i] != k) continue;
      for (int j = 0; j < generated.cols(); ++j) centroid_g[j] += generated(i, j);
      ++ng;
    }
    if (nr == 0 || ng == 0) continue;
    double gap_sq = 0.0;
    for (int j = 0; j < real.cols(); ++j) {
      const double d = centroid_g[j] / ng - centroid_r[j] / nr;
      gap_sq += d * d;
    }
    report.class_centroid_gap[k] = std::sqrt(gap_sq);
  }
  return report;
}

}  // namespace miaug
