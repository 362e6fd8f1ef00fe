// Metrics and verification probes: confusion/UAR accounting, fold
// aggregation, discriminator calibration against closed-form 1-D densities,
// and distribution-gap reports for generated features.

#ifndef MIAUG_EVAL_HPP
#define MIAUG_EVAL_HPP

#include <map>
#include <span>
#include <string>
#include <vector>

#include "miaug/linear.hpp"
#include "miaug/matrix.hpp"

namespace miaug {

struct EvalResult {
  Matrix confusion;      // [K x K], rows = true class, cols = predicted
  double uar = 0.0;      // mean recall over classes present in the data
  Vec per_class_recall;  // NaN for classes with no instances
};

// Builds the confusion matrix from (truth, prediction) pairs and derives
// UAR; classes absent from the truth are excluded from the mean.
EvalResult eval_from_predictions(std::span<const int> truths, std::span<const int> predictions,
                                 int num_classes);

double uar_from_confusion(const Matrix& confusion);

struct FoldResult {
  std::string fold_id;  // held-out speaker
  Matrix confusion;
  double uar = 0.0;
  Vec per_class_recall;
  std::map<std::string, Vec> traces;  // per-epoch loss curves by name
};

struct FoldAggregate {
  double mean_uar = 0.0;
  double std_uar = 0.0;  // sample std (n-1 denominator); 0 for a single fold
  Matrix pooled_confusion;
};

FoldAggregate aggregate_folds(std::span<const FoldResult> folds);

struct Gaussian1D {
  double mean = 0.0;
  double stddev = 1.0;
  double pdf(double x) const;
};

// Gaussian kernel density with Silverman's bandwidth; 1-D probes only.
class KernelDensity1D {
 public:
  explicit KernelDensity1D(std::span<const double> samples);
  double pdf(double x) const;
  double bandwidth() const { return bandwidth_; }

 private:
  std::vector<double> samples_;
  double bandwidth_ = 1.0;
};

// Mean absolute deviation of sigmoid(D(h)) from the density ratio
// p_data / (p_data + p_g) over the grid. Rejects grid points where both
// densities vanish.
double discriminator_calibration(const LinearLayer& discriminator, const Gaussian1D& p_data,
                                 const Gaussian1D& p_g, std::span<const double> grid);
double discriminator_calibration(const LinearLayer& discriminator, const Gaussian1D& p_data,
                                 std::span<const double> p_g_samples,
                                 std::span<const double> grid);

// Evenly spaced grid covering [lo, hi].
std::vector<double> linspace(double lo, double hi, int points);

struct FeatureDistReport {
  double mean_gap_norm = 0.0;       // L2 norm of the per-dimension mean gap
  double mean_std_ratio_gap = 0.0;  // mean over dims of |std_gen/std_real - 1|
  Vec class_centroid_gap;           // per-class centroid distance, when labels given
};

FeatureDistReport feature_distribution_report(const Matrix& real, const Matrix& generated);
FeatureDistReport feature_distribution_report(const Matrix& real, std::span<const int> real_labels,
                                              const Matrix& generated,
                                              std::span<const int> generated_labels,
                                              int num_classes);

}  // namespace miaug

#endif  // MIAUG_EVAL_HPP
