// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
// usage: faithlab_acceptance <data-dir> <faithlab-cli> <work-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "faithlab/attributions.hpp"
#include "faithlab/autodiff.hpp"
#include "faithlab/dataset.hpp"
#include "faithlab/featviz.hpp"
#include "faithlab/fft.hpp"
#include "faithlab/harness.hpp"
#include "faithlab/metrics.hpp"
#include "faithlab/models.hpp"
#include "faithlab/theory.hpp"

namespace fs = std::filesystem;
using namespace faithlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

DenseLayer random_layer(std::mt19937_64& rng, std::size_t rows, std::size_t cols, Activation act) {
  return DenseLayer{rows, cols, uniform(rng, rows * cols, -0.5, 0.5), uniform(rng, cols, -0.5, 0.5), act};
}

double max_rel_error(const std::vector<double>& got, const std::vector<double>& want) {
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    scale = std::max(scale, std::abs(want[i]));
    err = std::max(err, std::abs(got[i] - want[i]));
  }
  return err / std::max(scale, 1e-300);
}

// ---------------------------------------------------------------------------

Outcome closed_forms() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> dims(2, 16);
  const Method deterministic[] = {Method::kSaliency, Method::kSmoothGrad, Method::kGradientInput, Method::kOcclusion,
                                  Method::kIntegratedGradients};
  double worst = 0.0;
  std::size_t rise_features = 0, rise_outside = 0;
  double worst_z = 0.0, sum_z2 = 0.0;
  for (int model_index = 0; model_index < 100; ++model_index) {
    const std::size_t d = dims(rng);
    LinearModel lin;
    lin.weights.resize(d);
    for (auto& w : lin.weights) w = normal(rng);
    lin.bias = normal(rng);
    const auto x = uniform(rng, d, 0.0, 1.0);
    const Model model = lin;
    AttributionConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(model_index);
    for (auto method : deterministic) {
      const auto got = explain(method, model, x, cfg).scores;
      const auto want = linear_closed_form(method, lin.weights, lin.bias, x).scores;
      worst = std::max(worst, max_rel_error(got, want));
    }
    AttributionConfig rise_cfg = cfg;
    rise_cfg.rise_masks = 20000;
    rise_cfg.rise_probability = 0.5;
    const auto est = rise_estimate(model, x, rise_cfg);
    const auto want = linear_closed_form(Method::kRise, lin.weights, lin.bias, x, 0.5).scores;
    for (std::size_t i = 0; i < d; ++i) {
      const double z = std::abs(est.explanation.scores[i] - want[i]) / est.standard_error[i];
      worst_z = std::max(worst_z, z);
      sum_z2 += z * z;
      ++rise_features;
      if (!(z <= 3.0)) ++rise_outside;
    }
  }
  const double elapsed = seconds_since(start);
  // Exact up to floating-point rounding of the two evaluation orders.
  const bool pass = worst <= 1e-12 && rise_outside == 0 && elapsed < 60.0;
  // Under a calibrated standard error z is roughly N(0, 1): about 0.27% of
  // features land beyond 3 SE and the mean of z^2 is near 1.
  const double n = static_cast<double>(rise_features);
  return {pass, fmt("max rel error %.2e over 5 closed forms; RISE %zu/%zu features within 3 SE (max |z| %.2f, "
                    "mean z^2 %.3f, %.1f beyond 3 SE expected by chance); %.1f s",
                    worst, rise_features - rise_outside, rise_features, worst_z, sum_z2 / n, n * 0.0027, elapsed)};
}

// ---------------------------------------------------------------------------

Outcome gradient_oracle() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  std::size_t checks = 0;
  auto record = [&](const Tensor& g, const Tensor& fd) {
    worst = std::max(worst, ad::relative_error(g.data(), fd.data(), 1e-6));
    ++checks;
  };
  for (int probe = 0; probe < 100; ++probe) {
    // affine, mul, relu, then either softmax/select/sum or squared_norm.
    for (int head = 0; head < 3; ++head) {
      ad::Program p;
      auto a = p.input("a", {5});
      auto b = p.input("b", {5});
      auto w = p.input("w", {5, 4});
      auto bias = p.input("bias", {4});
      auto h = p.relu(p.affine(p.mul(a, b), w, bias));
      if (head == 0) p.sum(p.mul(p.softmax(h), p.constant(Tensor::vector({1, -2, 3, 0.5}))));
      if (head == 1) p.squared_norm(h);
      if (head == 2) p.select(p.softmax(h), static_cast<std::size_t>(probe % 4));
      const Tensor ta = Tensor::vector(uniform(rng, 5, -1, 1));
      const Tensor tb = Tensor::vector(uniform(rng, 5, -1, 1));
      const Tensor tw({5, 4}, uniform(rng, 20, -1, 1));
      const Tensor tbias = Tensor::vector(uniform(rng, 4, -1, 1));
      const ad::Inputs inputs{ta, tb, tw, tbias};
      for (auto leaf : p.inputs()) record(ad::gradient(p, inputs, leaf), ad::central_difference_gradient(p, inputs, leaf, 1e-6));
    }

    // Model program: gradient of one class logit of a random MLP.
    const MLPModel mlp(3, 3, 4,
                       {random_layer(rng, 9, 7, Activation::kRelu), random_layer(rng, 7, 5, Activation::kRelu),
                        random_layer(rng, 5, 4, Activation::kNone)});
    const auto prog = to_program(mlp);
    const Tensor x = Tensor::vector(uniform(rng, 9, 0, 1));
    const auto cls = static_cast<std::size_t>(probe % 4);
    record(ad::gradient(prog, {x}, prog.find_input("x"), cls),
           ad::central_difference_gradient(prog, {x}, prog.find_input("x"), 1e-6, cls));

    // Phase gradient of the zero-information objective.
    const std::size_t height = 4 + probe % 3, width = 4 + (probe / 3) % 3;
    const std::size_t half = width / 2 + 1;
    const MLPModel small(height, width, 3,
                         {random_layer(rng, height * width, 6, Activation::kRelu),
                          random_layer(rng, 6, 3, Activation::kNone)});
    MagnitudeSpectrum magnitude{height, width, uniform(rng, height * half, 0.0, 2.0)};
    const auto objective = objective_program(small, magnitude);
    const Tensor phase({height, half}, uniform(rng, height * half, -3.14, 3.14));
    const auto leaf = objective.find_input("phase");
    record(ad::gradient(objective, {phase}, leaf), ad::central_difference_gradient(objective, {phase}, leaf, 1e-6));
  }
  return {worst <= 1e-4, fmt("%zu gradient checks over 100 probes, max relative error %.2e", checks, worst)};
}

// ---------------------------------------------------------------------------

const std::vector<std::size_t> kTheoryDims{3, 4, 5};
constexpr std::uint64_t kTheorySeed = 2024;

Outcome theory() {
  const auto start = Clock::now();
  const auto dependence = check_baseline_dependence(kTheoryDims, 100, kTheorySeed);
  const auto agreement = check_insertion_agreement(kTheoryDims, 100, kTheorySeed);
  const double elapsed = seconds_since(start);
  for (const auto& c : dependence.counterexamples) std::printf("  counterexample: %s\n", c.c_str());
  for (const auto& c : agreement.counterexamples) std::printf("  counterexample: %s\n", c.c_str());
  const bool directions = dependence.zero_direction == Direction::kDescending &&
                          dependence.uniform_direction == Direction::kAscending;
  const bool pass = dependence.passed() && agreement.passed() && directions && elapsed < 120.0;
  return {pass, fmt("dependence %zu/%zu, insertion agreement %zu/%zu, zero optimum %s in x*w, uniform optimum %s in w, "
                    "%zu regime-dependent; %.1f s",
                    dependence.instances - dependence.failures, dependence.instances,
                    agreement.instances - agreement.failures, agreement.instances,
                    std::string(direction_name(dependence.zero_direction)).c_str(),
                    std::string(direction_name(dependence.uniform_direction)).c_str(),
                    dependence.baseline_dependent, elapsed)};
}

Outcome trace_agreement() {
  const auto report = check_trace_agreement(kTheoryDims, 100, kTheorySeed);
  return {report.traces > 0 && report.max_abs_error <= 1e-9,
          fmt("%zu traces, max |trace step-sum - closed form| %.2e", report.traces, report.max_abs_error)};
}

// ---------------------------------------------------------------------------

double parseval_gap(const Tensor& image) {
  const auto spectrum = rfft2(image);
  double pixel = 0.0;
  for (double v : image.values()) pixel += v * v;
  double freq = 0.0;
  for (std::size_t r = 0; r < spectrum.height(); ++r) {
    for (std::size_t c = 0; c < spectrum.half_width(); ++c) {
      const double weight = spectrum.self_conjugate_column(c) ? 1.0 : 2.0;
      freq += weight * std::norm(spectrum.at(r, c));
    }
  }
  freq /= static_cast<double>(image.size());
  return std::abs(pixel - freq) / std::max(pixel, 1e-300);
}

Outcome fft_featviz(const fs::path& data_dir, const fs::path& model_path) {
  std::mt19937_64 rng(505);
  double round_trip = 0.0, parseval = 0.0;
  for (std::size_t h = 1; h <= 32; ++h) {
    for (std::size_t w : {std::size_t{1}, h, std::size_t{32}, std::size_t{7}}) {
      const Tensor img({h, w}, uniform(rng, h * w, 0.0, 1.0));
      const auto back = irfft2(rfft2(img));
      for (std::size_t i = 0; i < img.size(); ++i) round_trip = std::max(round_trip, std::abs(back[i] - img[i]));
      parseval = std::max(parseval, parseval_gap(img));
    }
  }

  // No hidden layer: the penultimate map is the input image.
  const std::size_t height = 6, width = 6, half = width / 2 + 1;
  const MLPModel identity(height, width, 2, {random_layer(rng, height * width, 2, Activation::kNone)});
  // Magnitudes of a real image, so mirrored bins agree with their sources.
  MagnitudeSpectrum magnitude{height, width,
                              rfft2(Tensor({height, width}, uniform(rng, height * width, 0.0, 1.0))).magnitudes()};
  double expected = 0.0;
  for (std::size_t i = 0; i < magnitude.values.size(); ++i) {
    const std::size_t col = i % half;
    const double weight = (col == 0 || (width % 2 == 0 && col == width / 2)) ? 1.0 : 2.0;
    expected += weight * magnitude.values[i] * magnitude.values[i];
  }
  expected /= static_cast<double>(height * width);
  double constancy = 0.0, gradient = 0.0;
  for (int probe = 0; probe < 20; ++probe) {
    const auto phase = uniform(rng, height * half, -3.14, 3.14);
    constancy = std::max(constancy, std::abs(objective(identity, magnitude, phase) - expected) / expected);
    for (double g : objective_gradient(identity, magnitude, phase)) gradient = std::max(gradient, std::abs(g));
  }

  const auto train = load_dataset(data_dir / "train-images-idx3-ubyte.gz", data_dir / "train-labels-idx1-ubyte.gz");
  const Model model = load_model(model_path);
  const auto& mlp = std::get<MLPModel>(model);
  const double train_accuracy = accuracy(model, train);
  FeatVizConfig cfg;
  cfg.seed = 3;
  const auto result = optimize_baseline(mlp, mean_magnitude_spectrum(train.images), cfg);
  const auto features = mlp.features(mean_image(train.images).values());
  double at_mean = 0.0;
  for (double v : features) at_mean += v * v;
  const double final_objective = result.objective_trace.back();
  bool monotone = true;
  for (std::size_t i = 1; i < result.objective_trace.size(); ++i) {
    monotone = monotone && result.objective_trace[i] <= result.objective_trace[i - 1];
  }
  double after_clip = 0.0;
  for (double v : mlp.features(result.image.values())) after_clip += v * v;

  const bool pass = round_trip <= 1e-9 && parseval <= 1e-9 && constancy <= 1e-9 && gradient <= 1e-9 &&
                    train_accuracy >= 0.9 && final_objective <= 0.05 * at_mean && monotone;
  return {pass, fmt("round trip %.1e, Parseval %.1e, identity objective %.1e rel / grad %.1e; train accuracy %.4f, "
                    "objective %.4g vs %.4g at mean image (ratio %.4f, %s trace, %.4g after clipping)",
                    round_trip, parseval, constancy, gradient, train_accuracy, final_objective, at_mean,
                    final_objective / at_mean, monotone ? "monotone" : "non-monotone", after_clip)};
}

// ---------------------------------------------------------------------------

struct Grid {
  std::vector<ReportRow> rows;
  std::vector<Method> methods;
  std::vector<BaselineKind> baselines;
  fs::path dir;
  double seconds = 0.0;
};

Outcome instability(const Grid& grid) {
  const auto s = summarize(grid.rows, grid.methods, grid.baselines);
  const bool pass = s.min_tau_deletion < s.min_tau_insertion && s.min_tau_deletion < 0.7;
  return {pass, fmt("min off-diagonal tau: deletion %.3f, insertion %.3f, srg %.3f (grid %.0f s)", s.min_tau_deletion,
                    s.min_tau_insertion, s.min_tau_srg, grid.seconds)};
}

Outcome pareto(const Grid& grid) {
  const auto rows = tradeoff(grid.rows, grid.baselines);
  const auto fv = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return r.baseline == BaselineKind::kFeatviz; });
  if (fv == rows.end()) return {false, "featviz baseline missing from the grid"};
  std::string dominators;
  std::size_t lower_ood = 0;
  for (const auto& r : rows) {
    if (r.baseline == BaselineKind::kFeatviz || !(r.path_ood < fv->path_ood)) continue;
    ++lower_ood;
    if (!(fv->final_energy < r.final_energy)) {
      dominators += " " + std::string(baseline_name(r.baseline));
    }
  }
  return {dominators.empty(), fmt("featviz energy %.3f, path OOD %.3f; %zu baselines have lower OOD%s%s", fv->final_energy,
                                  fv->path_ood, lower_ood, dominators.empty() ? ", all with higher energy" : "; dominated by",
                                  dominators.c_str())};
}

Outcome concentration(const Grid& grid) {
  const auto s = summarize(grid.rows, grid.methods, grid.baselines);
  const bool pass = s.mean_concentration_insertion > s.mean_concentration_deletion &&
                    s.mean_early_ood_insertion > s.mean_early_ood_deletion;
  return {pass, fmt("concentration insertion %.3f vs deletion %.3f; early OOD insertion %.3f vs deletion %.3f",
                    s.mean_concentration_insertion, s.mean_concentration_deletion, s.mean_early_ood_insertion,
                    s.mean_early_ood_deletion)};
}

Outcome residual_evidence(const fs::path& topk_csv, std::size_t classes) {
  std::ifstream in(topk_csv);
  if (!in) return {false, "missing " + topk_csv.string()};
  std::string line;
  std::getline(in, line);
  std::string best_name;
  double best = 0.0;
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::string baseline, image, rank, cls, softmax;
    std::getline(row, baseline, ',');
    std::getline(row, image, ',');
    std::getline(row, rank, ',');
    std::getline(row, cls, ',');
    std::getline(row, softmax, ',');
    if (rank != "1" || baseline == "featviz") continue;
    const double p = std::stod(softmax);
    if (p > best) {
      best = p;
      best_name = baseline + " (class " + cls + ")";
    }
  }
  const double bar = 2.0 / static_cast<double>(classes);
  return {best > bar, fmt("largest top-1 softmax on a static baseline %.3f from %s, threshold %.3f", best,
                          best_name.c_str(), bar)};
}

// ---------------------------------------------------------------------------

int run(const std::string& command, const fs::path& log) {
  const std::string full = command + " > \"" + log.string() + "\" 2>&1";
  return std::system(full.c_str());
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[fs::relative(entry.path(), dir).string()] = ss.str();
  }
  return files;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

struct Paths {
  fs::path data;
  fs::path cli;
  fs::path work;

  std::string q(const fs::path& p) const { return "\"" + p.string() + "\""; }
  std::string train_args() const {
    return " train --train-images " + q(data / "train-images-idx3-ubyte.gz") + " --train-labels " +
           q(data / "train-labels-idx1-ubyte.gz") + " --test-images " + q(data / "test-images-idx3-ubyte.gz") +
           " --test-labels " + q(data / "test-labels-idx1-ubyte.gz") + " --seed 1";
  }
  std::string eval_config(const fs::path& model, const fs::path& featviz, std::size_t images, const fs::path& out,
                          std::size_t dumps) const {
    std::string featviz_field = featviz.empty() ? "" : "  \"featviz_image\": \"" + featviz.string() + "\",\n";
    return "{\n  \"train_images\": \"" + (data / "train-images-idx3-ubyte.gz").string() + "\",\n" +
           "  \"train_labels\": \"" + (data / "train-labels-idx1-ubyte.gz").string() + "\",\n" +
           "  \"test_images\": \"" + (data / "test-images-idx3-ubyte.gz").string() + "\",\n" +
           "  \"test_labels\": \"" + (data / "test-labels-idx1-ubyte.gz").string() + "\",\n" +
           "  \"model\": \"" + model.string() + "\",\n" + featviz_field +
           "  \"image_count\": " + std::to_string(images) + ",\n  \"seed\": 7,\n" +
           "  \"trace_dumps\": " + std::to_string(dumps) + ",\n  \"chain_dumps\": " + std::to_string(dumps) + ",\n" +
           "  \"output_dir\": \"" + out.string() + "\"\n}\n";
  }
};

// Runs every subcommand twice with identical arguments and compares outputs.
Outcome determinism(const Paths& paths) {
  const fs::path root = paths.work / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cli = paths.q(paths.cli);
  const fs::path small_cfg = root / "small.json";
  write_text(small_cfg, paths.eval_config(root / "train" / "model.json", {}, 10, root / "evaluate", 2));

  struct Step {
    std::string name;
    std::string args;
    fs::path output;  // directory holding everything the command writes
  };
  const std::vector<Step> steps = {
      {"train", paths.train_args() + " -o " + paths.q(root / "train" / "model.json"), root / "train"},
      {"featviz-baseline",
       " featviz-baseline --model " + paths.q(root / "train" / "model.json") + " --train-images " +
           paths.q(paths.data / "train-images-idx3-ubyte.gz") + " --seed 3 -o " + paths.q(root / "featviz"),
       root / "featviz"},
      {"evaluate", " evaluate -c " + paths.q(small_cfg), root / "evaluate"},
      {"report",
       " report --cells " + paths.q(root / "evaluate" / "cells.csv") + " -o " + paths.q(root / "report"),
       root / "report"},
      {"verify-theory", " verify-theory --dims 3,4 --instances 20 --seed 5", root / "theory"},
  };

  std::string detail;
  bool pass = true;
  for (const auto& step : steps) {
    std::map<std::string, std::string> runs[2];
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (attempt == 1 && step.name != "verify-theory") fs::remove_all(step.output);
      fs::create_directories(step.output);
      const int status = run(cli + step.args, root / ("stdout_" + step.name + ".txt"));
      fs::rename(root / ("stdout_" + step.name + ".txt"), step.output / "stdout.txt");
      if (status != 0) {
        pass = false;
        detail += step.name + " exited with status " + std::to_string(status) + "; ";
      }
      runs[attempt] = snapshot(step.output);
    }
    if (runs[0] != runs[1]) {
      pass = false;
      detail += step.name + " differs; ";
    } else {
      detail += step.name + " " + std::to_string(runs[0].size()) + " files identical; ";
    }
  }
  if (!detail.empty()) detail.resize(detail.size() - 2);
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: %s <data-dir> <faithlab-cli> <work-dir>\n", argv[0]);
    return 2;
  }
  const Paths paths{fs::absolute(argv[1]), fs::absolute(argv[2]), fs::absolute(argv[3])};
  fs::create_directories(paths.work);

  std::vector<Outcome> outcomes(10);
  auto report = [&](int number, Outcome outcome) {
    std::printf("criterion %2d: %s  %s\n", number, outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str());
    std::fflush(stdout);
    outcomes[static_cast<std::size_t>(number - 1)] = std::move(outcome);
  };
  auto guarded = [&](int number, const std::function<Outcome()>& body) {
    try {
      report(number, body());
    } catch (const std::exception& e) {
      report(number, {false, std::string("error: ") + e.what()});
    }
  };

  guarded(1, closed_forms);
  guarded(2, gradient_oracle);
  guarded(3, theory);
  guarded(4, trace_agreement);

  // Desk model and featviz baseline, produced by the CLI.
  const fs::path desk = paths.work / "desk";
  fs::create_directories(desk);
  const std::string cli = paths.q(paths.cli);
  const bool trained = run(cli + paths.train_args() + " -o " + paths.q(desk / "model.json"), desk / "train.txt") == 0;
  const bool featviz_made =
      trained && run(cli + " featviz-baseline --model " + paths.q(desk / "model.json") + " --train-images " +
                         paths.q(paths.data / "train-images-idx3-ubyte.gz") + " --seed 3 -o " +
                         paths.q(desk / "featviz"),
                     desk / "featviz.txt") == 0;

  guarded(5, [&]() -> Outcome {
    if (!trained) return {false, "faithlab train failed, see " + (desk / "train.txt").string()};
    return fft_featviz(paths.data, desk / "model.json");
  });

  Grid grid;
  std::string grid_error;
  if (featviz_made) {
    grid.dir = desk / "grid";
    fs::remove_all(grid.dir);
    write_text(desk / "grid.json",
               paths.eval_config(desk / "model.json", desk / "featviz" / "featviz.json", 200, grid.dir, 0));
    const auto start = Clock::now();
    if (run(cli + " evaluate -c " + paths.q(desk / "grid.json"), desk / "grid.txt") == 0) {
      grid.seconds = seconds_since(start);
      grid.methods.assign(kAllMethods.begin(), kAllMethods.end());
      grid.baselines.assign(kAllBaselines.begin(), kAllBaselines.end());
      grid.rows = aggregate(read_cells_csv(grid.dir / "cells.csv"), grid.methods, grid.baselines);
    } else {
      grid_error = "faithlab evaluate failed, see " + (desk / "grid.txt").string();
    }
  } else {
    grid_error = "desk model or featviz baseline unavailable";
  }
  auto on_grid = [&](int number, Outcome (*body)(const Grid&)) {
    guarded(number, [&]() -> Outcome {
      if (!grid_error.empty()) return {false, grid_error};
      return body(grid);
    });
  };
  on_grid(6, instability);
  on_grid(7, pareto);
  on_grid(8, concentration);
  guarded(9, [&]() -> Outcome {
    if (!grid_error.empty()) return {false, grid_error};
    return residual_evidence(grid.dir / "baseline_topk.csv", class_count(load_model(desk / "model.json")));
  });
  guarded(10, [&] { return determinism(paths); });

  const auto passed = std::count_if(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return o.pass; });
  std::printf("%td/10 criteria passed\n", passed);
  return passed == 10 ? 0 : 1;
}
