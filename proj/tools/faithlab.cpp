#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "faithlab/dataset.hpp"
#include "faithlab/featviz.hpp"
#include "faithlab/harness.hpp"
#include "faithlab/metrics.hpp"
#include "faithlab/models.hpp"
#include "faithlab/theory.hpp"

namespace fs = std::filesystem;
using namespace faithlab;

namespace {

struct TrainArgs {
  std::string train_images, train_labels, test_images, test_labels, out = "model.json";
  std::vector<std::size_t> hidden = {128, 32};
  TrainConfig cfg;
};

int run_train(const TrainArgs& a) {
  const Dataset train = load_dataset(a.train_images, a.train_labels);
  Architecture arch;
  arch.height = train.rows();
  arch.width = train.cols();
  arch.hidden = a.hidden;
  arch.classes = 0;
  for (auto l : train.labels) arch.classes = std::max(arch.classes, l + 1);
  const auto result = train_sgd(arch, train, a.cfg);
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  save_model(result.model, a.out);

  fs::path log = fs::path(a.out).replace_extension(".log.csv");
  std::ofstream out(log, std::ios::binary);
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) out << e + 1 << ',' << format_number(result.epoch_loss[e]) << '\n';
  std::printf("train accuracy %.4f  loss %.6f\n", result.accuracy, result.loss);
  if (!a.test_images.empty()) {
    const Dataset test = load_dataset(a.test_images, a.test_labels);
    std::printf("test accuracy %.4f\n", accuracy(result.model, test));
  }
  std::printf("model written to %s\n", a.out.c_str());
  return 0;
}

struct FeatvizArgs {
  std::string model, train_images, out_dir = "featviz";
  FeatVizConfig cfg;
};

int run_featviz(const FeatvizArgs& a) {
  const Model model = load_model(a.model);
  const auto* mlp = std::get_if<MLPModel>(&model);
  if (!mlp) throw std::invalid_argument("featviz-baseline needs an MLP model");
  const Tensor images = load_idx_images(a.train_images);
  const auto magnitude = mean_magnitude_spectrum(images);
  const auto result = optimize_baseline(*mlp, magnitude, a.cfg);

  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  write_tensor_json(result.image, dir / "featviz.json");
  write_pgm(result.image, dir / "featviz.pgm");
  {
    std::ofstream out(dir / "featviz_trace.csv", std::ios::binary);
    out << "step,objective\n";
    for (std::size_t i = 0; i < result.objective_trace.size(); ++i) {
      out << i << ',' << format_number(result.objective_trace[i]) << '\n';
    }
  }
  const double at_mean = squared_norm(mlp->features(mean_image(images).values()));
  const double clipped = squared_norm(mlp->features(result.image.values()));
  const double final_objective = result.objective_trace.back();
  {
    std::ofstream out(dir / "featviz_summary.csv", std::ios::binary);
    out << "statistic,value\n";
    out << "objective_at_mean_image," << format_number(at_mean) << '\n';
    out << "initial_objective," << format_number(result.objective_trace.front()) << '\n';
    out << "final_objective," << format_number(final_objective) << '\n';
    out << "ratio_to_mean_image," << format_number(final_objective / at_mean) << '\n';
    out << "objective_after_clip," << format_number(clipped) << '\n';
    out << "clip_fraction," << format_number(result.clip_fraction) << '\n';
    out << "steps," << result.steps << '\n';
  }
  std::printf("objective %.6g -> %.6g (%.4f of the mean image's %.6g) in %zu steps; clip fraction %.4f\n",
              result.objective_trace.front(), final_objective, final_objective / at_mean, at_mean, result.steps,
              result.clip_fraction);
  return 0;
}

struct EvaluateArgs {
  std::string config, output_dir;
  std::size_t threads = 0;
};

int run_evaluate(const EvaluateArgs& a) {
  RunConfig cfg = RunConfig::load(a.config);
  if (!a.output_dir.empty()) cfg.output_dir = a.output_dir;
  if (a.threads > 0) cfg.threads = a.threads;
  const auto result = run_benchmark(cfg);
  const fs::path dir = cfg.output_dir;
  {
    // Thread count does not affect results, so it is left out of the record.
    RunConfig recorded = cfg;
    recorded.threads = 1;
    std::ofstream out(dir / "config.json", std::ios::binary);
    out << recorded.to_json();
  }
  write_cells_csv(result.cells, dir / "cells.csv");
  const auto rows = aggregate(result.cells, result.methods, result.baselines);
  emit_report(rows, result.methods, result.baselines, result.topk, dir);
  const auto s = summarize(rows, result.methods, result.baselines);
  std::printf("%zu cells over %zu images; accuracy on evaluated images %.4f\n", result.cells.size(),
              result.cells.size() / (result.methods.size() * result.baselines.size()), result.model_accuracy);
  std::printf("min off-diagonal tau: deletion %.4f  insertion %.4f  srg %.4f\n", s.min_tau_deletion,
              s.min_tau_insertion, s.min_tau_srg);
  std::printf("reports written to %s\n", dir.string().c_str());
  return 0;
}

struct TheoryArgs {
  std::vector<std::size_t> dims = {3, 4, 5};
  std::size_t per_dim = 100;
  std::uint64_t seed = 0;
};

int run_verify_theory(const TheoryArgs& a) {
  const auto dependence = check_baseline_dependence(a.dims, a.per_dim, a.seed);
  const auto insertion = check_insertion_agreement(a.dims, a.per_dim, a.seed);
  const auto traces = check_trace_agreement(a.dims, a.per_dim, a.seed);
  const bool agree = traces.max_abs_error <= 1e-9;

  std::printf("%-22s %-6s %9s %9s  %s\n", "check", "result", "instances", "failures", "detail");
  std::printf("%-22s %-6s %9zu %9zu  zero regime: %s in x*w; uniform regime: %s in w; regime-dependent: %zu\n",
              dependence.name.c_str(), dependence.passed() ? "PASS" : "FAIL", dependence.instances, dependence.failures,
              direction_name(dependence.zero_direction).c_str(), direction_name(dependence.uniform_direction).c_str(),
              dependence.baseline_dependent);
  std::printf("%-22s %-6s %9zu %9zu  insertion argmax equals deletion argmin in both regimes\n",
              insertion.name.c_str(), insertion.passed() ? "PASS" : "FAIL", insertion.instances, insertion.failures);
  std::printf("%-22s %-6s %9zu %9s  max |trace step-sum - exact| = %.3g\n", "trace_agreement", agree ? "PASS" : "FAIL",
              traces.traces, "-", traces.max_abs_error);
  for (const auto* report : {&dependence, &insertion}) {
    for (const auto& c : report->counterexamples) std::printf("counterexample [%s]: %s\n", report->name.c_str(), c.c_str());
  }
  return dependence.passed() && insertion.passed() && agree ? 0 : 1;
}

struct ReportArgs {
  std::string cells, out_dir;
};

int run_report(const ReportArgs& a) {
  const auto cells = read_cells_csv(a.cells);
  std::vector<Method> methods;
  std::vector<BaselineKind> baselines;
  for (const auto& c : cells) {
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end()) methods.push_back(c.method);
    if (std::find(baselines.begin(), baselines.end(), c.baseline) == baselines.end()) baselines.push_back(c.baseline);
  }
  const auto rows = aggregate(cells, methods, baselines);
  emit_report(rows, methods, baselines, {}, a.out_dir);
  std::printf("%zu rows written to %s\n", rows.size(), a.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribution faithfulness benchmark"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train an MLP on IDX data");
  train_cmd->add_option("--train-images", train.train_images)->required();
  train_cmd->add_option("--train-labels", train.train_labels)->required();
  train_cmd->add_option("--test-images", train.test_images);
  train_cmd->add_option("--test-labels", train.test_labels);
  train_cmd->add_option("--hidden", train.hidden, "Hidden layer widths")->delimiter(',');
  train_cmd->add_option("--epochs", train.cfg.epochs)->capture_default_str();
  train_cmd->add_option("--learning-rate", train.cfg.learning_rate)->capture_default_str();
  train_cmd->add_option("--batch-size", train.cfg.batch_size)->capture_default_str();
  train_cmd->add_option("--l2", train.cfg.l2)->capture_default_str();
  train_cmd->add_option("--seed", train.cfg.seed)->capture_default_str();
  train_cmd->add_option("-o,--out", train.out)->capture_default_str();

  FeatvizArgs featviz;
  auto* featviz_cmd = app.add_subcommand("featviz-baseline", "Optimize the model-specific baseline image");
  featviz_cmd->add_option("--model", featviz.model)->required();
  featviz_cmd->add_option("--train-images", featviz.train_images, "Images whose mean spectrum is kept")->required();
  featviz_cmd->add_option("-o,--out-dir", featviz.out_dir)->capture_default_str();
  featviz_cmd->add_option("--max-steps", featviz.cfg.max_steps)->capture_default_str();
  featviz_cmd->add_option("--learning-rate", featviz.cfg.learning_rate)->capture_default_str();
  featviz_cmd->add_option("--threshold", featviz.cfg.threshold)->capture_default_str();
  featviz_cmd->add_option("--seed", featviz.cfg.seed)->capture_default_str();

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run the method x baseline grid");
  evaluate_cmd->add_option("-c,--config", evaluate.config, "Run configuration (JSON)")->required();
  evaluate_cmd->add_option("-o,--output-dir", evaluate.output_dir, "Overrides output_dir from the config");
  evaluate_cmd->add_option("-j,--threads", evaluate.threads, "Overrides threads from the config");

  TheoryArgs theory;
  auto* theory_cmd = app.add_subcommand("verify-theory", "Brute-force check of the linear-model optimality results");
  theory_cmd->add_option("--dims", theory.dims)->delimiter(',')->capture_default_str();
  theory_cmd->add_option("--instances", theory.per_dim, "Random instances per dimension")->capture_default_str();
  theory_cmd->add_option("--seed", theory.seed)->capture_default_str();

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Rebuild report tables from cells.csv");
  report_cmd->add_option("--cells", report.cells)->required();
  report_cmd->add_option("-o,--out-dir", report.out_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return run_train(train);
    if (featviz_cmd->parsed()) return run_featviz(featviz);
    if (evaluate_cmd->parsed()) return run_evaluate(evaluate);
    if (theory_cmd->parsed()) return run_verify_theory(theory);
    if (report_cmd->parsed()) return run_report(report);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
