#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <span>
#include <vector>

#include "faithlab/attributions.hpp"
#include "faithlab/baselines.hpp"
#include "faithlab/models.hpp"

namespace faithlab {

enum class ScoreMode { kSoftmax, kLogit };

struct MetricConfig {
  ScoreMode mode = ScoreMode::kSoftmax;
  std::size_t steps = 0;  // equal-size replacement steps; 0 means one feature per step
  bool record_ood = true;
  bool record_energy = true;
};

struct TraceStep {
  double fraction = 0.0;
  double score = 0.0;
  double logit_energy = 0.0;
  double ood_raw = 0.0;
  double ood_normalized = 0.0;
};

struct MetricTrace {
  std::vector<TraceStep> steps;
  std::size_t target = 0;
  double auc = 0.0;

  std::vector<double> fractions() const;
  std::vector<double> scores() const;
  // Sum of scores over steps 1..k (the unperturbed/empty endpoint excluded).
  double step_sum() const;
};

struct Neighbor {
  double distance = 0.0;
  std::size_t index = 0;
};

// Penultimate features of a reference set, searched exactly for the nearest
// neighbour. Rows are kept sorted by norm so the triangle inequality prunes
// most candidates.
class FeatureIndex {
 public:
  FeatureIndex(std::size_t dim, std::vector<double> features);
  static FeatureIndex build(const MLPModel& model, const Tensor& images, std::size_t limit = 0);

  std::size_t size() const { return count_; }
  std::size_t dim() const { return dim_; }
  // Median leave-one-out nearest-neighbour distance within the index.
  double reference_scale() const { return reference_scale_; }

  Neighbor nearest(std::span<const double> query) const;
  Neighbor brute_force_nearest(std::span<const double> query) const;

 private:
  Neighbor search(std::span<const double> query, std::size_t exclude) const;
  std::span<const double> row(std::size_t i) const { return {features_.data() + i * dim_, dim_}; }

  std::size_t dim_;
  std::size_t count_;
  std::vector<double> features_;  // sorted by norm
  std::vector<double> norms_;
  std::vector<std::size_t> original_;
  double reference_scale_ = 0.0;
};

struct OodScore {
  double raw = 0.0;
  double normalized = 0.0;
};

OodScore ood_1nn(const FeatureIndex& index, const MLPModel& model, std::span<const double> image);

// L2 norm of the logit vector.
double info_removal_energy(const Model& model, std::span<const double> image);

// Step i replaces (deletion) or restores (insertion) the first ceil(i d / k)
// indices of the ordering. The tracked class is the one predicted on x.
MetricTrace deletion_trace(const Model& model, const Tensor& x, const Explanation& explanation,
                           const BaselineContext& ctx, const MetricConfig& cfg, const FeatureIndex* index = nullptr);
MetricTrace insertion_trace(const Model& model, const Tensor& x, const Explanation& explanation,
                            const BaselineContext& ctx, const MetricConfig& cfg, const FeatureIndex* index = nullptr);

// Trapezoid rule over (fraction, score).
double auc(std::span<const double> fractions, std::span<const double> scores);
double auc(const MetricTrace& trace);
double srg(double insertion_auc, double deletion_auc);

struct Concentration {
  double fraction = 1.0;
  bool undefined = false;  // all-zero trace
};

// Smallest s with AUC over [0, s] >= 80% of the total; requires non-negative scores.
Concentration auc_concentration(std::span<const double> fractions, std::span<const double> scores,
                                double share = 0.8);
Concentration auc_concentration(const MetricTrace& trace, double share = 0.8);

// Mean normalized OOD over the steps whose fraction does not exceed `until`.
double mean_ood_until(const MetricTrace& trace, double until);
double mean_ood(const MetricTrace& trace);

std::vector<double> softmax(std::span<const double> logits);

struct TopK {
  std::vector<std::size_t> classes;
  std::vector<double> scores;
};

TopK classify_topk(const Model& model, std::span<const double> image, std::size_t k);

void write_trace_csv(const MetricTrace& trace, const std::filesystem::path& path);

// Shortest round-trip decimal for CSV output.
std::string format_number(double value);

}  // namespace faithlab
