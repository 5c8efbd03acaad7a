#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faithlab/attributions.hpp"
#include "faithlab/baselines.hpp"
#include "faithlab/featviz.hpp"
#include "faithlab/metrics.hpp"
#include "faithlab/models.hpp"

namespace faithlab {

struct TrainingSpec {
  std::vector<std::size_t> hidden = {128, 32};
  TrainConfig train;
};

struct RunConfig {
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::string model;  // path to a saved model; when empty the model is trained from `training`
  std::optional<TrainingSpec> training;
  std::vector<Method> methods;
  std::vector<BaselineKind> baselines;
  // Image defaults: 100 equal replacement steps and 2x2 occlusion patches.
  MetricConfig metric = [] {
    MetricConfig m;
    m.steps = 100;
    return m;
  }();
  AttributionConfig attribution = [] {
    AttributionConfig a;
    a.occlusion_patch = 2;
    return a;
  }();
  FeatVizConfig featviz;
  std::string featviz_image;  // JSON tensor; optimized on the fly when empty
  std::size_t image_count = 200;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::size_t index_size = 2000;  // training images in the OOD reference index (0 = all)
  std::size_t local_window = 4;
  std::size_t threads = 1;
  std::size_t trace_dumps = 0;  // images whose traces are written as CSV
  std::size_t chain_dumps = 0;  // images whose deletion chains are written as PGM

  void validate() const;
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  std::string to_json() const;
};

// One (image, method, baseline) evaluation.
struct Cell {
  std::size_t image = 0;
  Method method = Method::kSaliency;
  BaselineKind baseline = BaselineKind::kZero;
  double deletion_auc = 0.0;
  double insertion_auc = 0.0;
  double final_energy = 0.0;        // logit energy of the fully baselined image
  double path_ood = 0.0;            // mean normalized 1-NN distance along the deletion trace
  double path_ood_insertion = 0.0;  // same along the insertion trace
  double concentration_deletion = 1.0;
  double concentration_insertion = 1.0;
  bool concentration_undefined = false;
  double early_ood_deletion = 0.0;  // mean normalized OOD over the span holding 80% of the AUC
  double early_ood_insertion = 0.0;
};

struct ReportRow {
  Method method = Method::kSaliency;
  BaselineKind baseline = BaselineKind::kZero;
  std::size_t images = 0;
  double deletion_auc = 0.0;
  double insertion_auc = 0.0;
  double srg = 0.0;
  double final_energy = 0.0;
  double path_ood = 0.0;
  double path_ood_insertion = 0.0;
  double concentration_deletion = 0.0;
  double concentration_insertion = 0.0;
  double early_ood_deletion = 0.0;
  double early_ood_insertion = 0.0;
};

struct TopKRow {
  BaselineKind baseline = BaselineKind::kZero;
  std::size_t image = 0;
  TopK top;
};

struct BenchmarkResult {
  std::vector<Method> methods;
  std::vector<BaselineKind> baselines;
  std::vector<Cell> cells;  // ordered by (image, method, baseline)
  std::vector<TopKRow> topk;
  double model_accuracy = 0.0;  // on the evaluation images
  double featviz_objective = -1.0;
  double featviz_clip_fraction = 0.0;
};

BenchmarkResult run_benchmark(const RunConfig& cfg);

std::vector<ReportRow> aggregate(const std::vector<Cell>& cells, std::span<const Method> methods,
                                 std::span<const BaselineKind> baselines);

// Kendall tau-a over paired scores: (concordant - discordant) / C(n, 2).
double kendall_tau(std::span<const double> a, std::span<const double> b);
// Kendall tau between two rankings given as item lists, best first.
double rank_correlation(const std::vector<std::string>& ranking_a, const std::vector<std::string>& ranking_b);

enum class RankMetric { kDeletion, kInsertion, kSrg };

// Baseline x baseline tau of the per-baseline method scores.
std::vector<std::vector<double>> tau_matrix(const std::vector<ReportRow>& rows, std::span<const Method> methods,
                                            std::span<const BaselineKind> baselines, RankMetric metric);

struct GridSummary {
  double min_tau_deletion = 0.0;
  double min_tau_insertion = 0.0;
  double min_tau_srg = 0.0;
  double mean_concentration_deletion = 0.0;
  double mean_concentration_insertion = 0.0;
  double mean_early_ood_deletion = 0.0;
  double mean_early_ood_insertion = 0.0;
};

GridSummary summarize(const std::vector<ReportRow>& rows, std::span<const Method> methods,
                      std::span<const BaselineKind> baselines);

struct TradeoffRow {
  BaselineKind baseline = BaselineKind::kZero;
  double final_energy = 0.0;
  double path_ood = 0.0;
};

std::vector<TradeoffRow> tradeoff(const std::vector<ReportRow>& rows, std::span<const BaselineKind> baselines);

// Writes rankings.csv, the three tau matrices, tradeoff.csv, concentration.csv,
// summary.csv and, when given, baseline_topk.csv.
void emit_report(const std::vector<ReportRow>& rows, std::span<const Method> methods,
                 std::span<const BaselineKind> baselines, const std::vector<TopKRow>& topk,
                 const std::filesystem::path& outdir);

void write_cells_csv(const std::vector<Cell>& cells, const std::filesystem::path& path);
std::vector<Cell> read_cells_csv(const std::filesystem::path& path);

}  // namespace faithlab
