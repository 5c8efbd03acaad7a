#include "faithlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "faithlab/dataset.hpp"
#include "faithlab/rng.hpp"

namespace faithlab {

using nlohmann::json;

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config field '") + key + "': " + e.what());
  }
}

std::string_view score_mode_name(ScoreMode mode) { return mode == ScoreMode::kLogit ? "logit" : "softmax"; }

ScoreMode parse_score_mode(const std::string& name) {
  if (name == "softmax") return ScoreMode::kSoftmax;
  if (name == "logit") return ScoreMode::kLogit;
  throw std::invalid_argument("config field 'metric.mode': expected softmax or logit, got '" + name + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (methods.empty()) throw std::invalid_argument("config: method list is empty");
  if (baselines.empty()) throw std::invalid_argument("config: baseline list is empty");
  if (image_count < 1) throw std::invalid_argument("config: image_count must be >= 1");
  if (test_images.empty() || test_labels.empty()) throw std::invalid_argument("config: test dataset paths are required");
  if (train_images.empty()) throw std::invalid_argument("config: train_images is required (dataset statistics, OOD index)");
  if (model.empty() && !training) throw std::invalid_argument("config: give either 'model' or 'training'");
  if (!model.empty() && training) throw std::invalid_argument("config: 'model' and 'training' are mutually exclusive");
  if (training && train_labels.empty()) throw std::invalid_argument("config: training needs train_labels");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
  attribution.validate();
  featviz.validate();
}

RunConfig RunConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  RunConfig cfg;
  read_field(j, "train_images", cfg.train_images);
  read_field(j, "train_labels", cfg.train_labels);
  read_field(j, "test_images", cfg.test_images);
  read_field(j, "test_labels", cfg.test_labels);
  read_field(j, "model", cfg.model);
  if (j.contains("training")) {
    const auto& t = j.at("training");
    TrainingSpec spec;
    read_field(t, "hidden", spec.hidden);
    read_field(t, "learning_rate", spec.train.learning_rate);
    read_field(t, "epochs", spec.train.epochs);
    read_field(t, "batch_size", spec.train.batch_size);
    read_field(t, "seed", spec.train.seed);
    read_field(t, "l2", spec.train.l2);
    cfg.training = spec;
  }
  std::vector<std::string> names;
  if (j.contains("methods")) {
    read_field(j, "methods", names);
    for (const auto& n : names) cfg.methods.push_back(parse_method(n));
  } else {
    cfg.methods.assign(kAllMethods.begin(), kAllMethods.end());
  }
  if (j.contains("baselines")) {
    names.clear();
    read_field(j, "baselines", names);
    for (const auto& n : names) cfg.baselines.push_back(parse_baseline(n));
  } else {
    cfg.baselines.assign(kAllBaselines.begin(), kAllBaselines.end());
  }
  if (j.contains("metric")) {
    const auto& m = j.at("metric");
    std::string mode = "softmax";
    read_field(m, "mode", mode);
    cfg.metric.mode = parse_score_mode(mode);
    read_field(m, "steps", cfg.metric.steps);
    read_field(m, "record_ood", cfg.metric.record_ood);
    read_field(m, "record_energy", cfg.metric.record_energy);
  }
  if (j.contains("attribution")) {
    const auto& a = j.at("attribution");
    read_field(a, "smoothgrad_sigma", cfg.attribution.smoothgrad_sigma);
    read_field(a, "smoothgrad_samples", cfg.attribution.smoothgrad_samples);
    read_field(a, "ig_steps", cfg.attribution.ig_steps);
    std::string rule = "trapezoid";
    read_field(a, "ig_rule", rule);
    if (rule == "trapezoid") {
      cfg.attribution.ig_rule = IgRule::kTrapezoid;
    } else if (rule == "left_riemann") {
      cfg.attribution.ig_rule = IgRule::kLeftRiemann;
    } else {
      throw std::invalid_argument("config field 'attribution.ig_rule': unknown rule '" + rule + "'");
    }
    read_field(a, "occlusion_patch", cfg.attribution.occlusion_patch);
    read_field(a, "occlusion_fill", cfg.attribution.occlusion_fill);
    read_field(a, "rise_probability", cfg.attribution.rise_probability);
    read_field(a, "rise_masks", cfg.attribution.rise_masks);
    read_field(a, "absolute", cfg.attribution.absolute);
  }
  if (j.contains("featviz")) {
    const auto& f = j.at("featviz");
    read_field(f, "max_steps", cfg.featviz.max_steps);
    read_field(f, "learning_rate", cfg.featviz.learning_rate);
    read_field(f, "threshold", cfg.featviz.threshold);
    read_field(f, "max_halvings", cfg.featviz.max_halvings);
    read_field(f, "seed", cfg.featviz.seed);
  }
  read_field(j, "featviz_image", cfg.featviz_image);
  read_field(j, "image_count", cfg.image_count);
  read_field(j, "seed", cfg.seed);
  read_field(j, "output_dir", cfg.output_dir);
  read_field(j, "index_size", cfg.index_size);
  read_field(j, "local_window", cfg.local_window);
  read_field(j, "threads", cfg.threads);
  read_field(j, "trace_dumps", cfg.trace_dumps);
  read_field(j, "chain_dumps", cfg.chain_dumps);
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string RunConfig::to_json() const {
  json j;
  j["train_images"] = train_images;
  j["train_labels"] = train_labels;
  j["test_images"] = test_images;
  j["test_labels"] = test_labels;
  j["model"] = model;
  if (training) {
    j["training"] = {{"hidden", training->hidden},
                     {"learning_rate", training->train.learning_rate},
                     {"epochs", training->train.epochs},
                     {"batch_size", training->train.batch_size},
                     {"seed", training->train.seed},
                     {"l2", training->train.l2}};
  }
  std::vector<std::string> names;
  for (auto m : methods) names.emplace_back(method_name(m));
  j["methods"] = names;
  names.clear();
  for (auto b : baselines) names.emplace_back(baseline_name(b));
  j["baselines"] = names;
  j["metric"] = {{"mode", std::string(score_mode_name(metric.mode))},
                 {"steps", metric.steps},
                 {"record_ood", metric.record_ood},
                 {"record_energy", metric.record_energy}};
  j["attribution"] = {{"smoothgrad_sigma", attribution.smoothgrad_sigma},
                      {"smoothgrad_samples", attribution.smoothgrad_samples},
                      {"ig_steps", attribution.ig_steps},
                      {"ig_rule", attribution.ig_rule == IgRule::kTrapezoid ? "trapezoid" : "left_riemann"},
                      {"occlusion_patch", attribution.occlusion_patch},
                      {"occlusion_fill", attribution.occlusion_fill},
                      {"rise_probability", attribution.rise_probability},
                      {"rise_masks", attribution.rise_masks},
                      {"absolute", attribution.absolute}};
  j["featviz"] = {{"max_steps", featviz.max_steps},
                  {"learning_rate", featviz.learning_rate},
                  {"threshold", featviz.threshold},
                  {"max_halvings", featviz.max_halvings},
                  {"seed", featviz.seed}};
  j["featviz_image"] = featviz_image;
  j["image_count"] = image_count;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["index_size"] = index_size;
  j["local_window"] = local_window;
  j["threads"] = threads;
  j["trace_dumps"] = trace_dumps;
  j["chain_dumps"] = chain_dumps;
  return j.dump(2) + "\n";
}

namespace {

constexpr std::uint64_t kAttributionStream = 0xA77;
constexpr std::uint64_t kBaselineStream = 0xBA5E;

struct Shared {
  const RunConfig& cfg;
  const Model& model;
  const Dataset& eval;
  const DatasetStats& stats;
  const FeatureIndex* index;
  const Tensor* featviz_image;
  std::filesystem::path outdir;
};

std::string cell_label(std::size_t image, Method m, BaselineKind b) {
  return "image " + std::to_string(image) + ", method " + std::string(method_name(m)) + ", baseline " +
         std::string(baseline_name(b));
}

void dump_chain(const Shared& s, std::size_t image, const Tensor& x, const Explanation& e, BaselineKind b,
                const BaselineContext& ctx) {
  const std::size_t d = x.size();
  for (std::size_t q = 0; q <= 4; ++q) {
    const std::size_t count = q * d / 4;
    Tensor step = apply(x, std::span(e.ordering).first(count), ctx);
    write_pgm(step.reshaped({s.eval.rows(), s.eval.cols()}),
              s.outdir / "chains" /
                  ("img" + std::to_string(image) + "_" + std::string(baseline_name(b)) + "_q" + std::to_string(q) + ".pgm"));
  }
}

std::vector<Cell> evaluate_image(const Shared& s, std::size_t image) {
  const RunConfig& cfg = s.cfg;
  const Tensor x = s.eval.image_tensor(image).reshaped({s.eval.rows(), s.eval.cols()});
  AttributionConfig acfg = cfg.attribution;
  acfg.seed = derive_seed(cfg.seed, {kAttributionStream, image});

  std::vector<BaselineContext> contexts;
  for (auto b : cfg.baselines) {
    try {
      contexts.push_back(build_context(b, x, s.stats,
                                       derive_seed(cfg.seed, {kBaselineStream, image, static_cast<std::uint64_t>(b)}),
                                       s.featviz_image, cfg.local_window));
    } catch (const std::exception& e) {
      throw std::runtime_error("image " + std::to_string(image) + ", baseline " + std::string(baseline_name(b)) +
                               ": " + e.what());
    }
  }

  std::vector<Cell> cells;
  for (auto m : cfg.methods) {
    Explanation explanation;
    try {
      explanation = explain(m, s.model, x.values(), acfg);
    } catch (const std::exception& e) {
      throw std::runtime_error("image " + std::to_string(image) + ", method " + std::string(method_name(m)) + ": " +
                               e.what());
    }
    for (std::size_t bi = 0; bi < cfg.baselines.size(); ++bi) {
      const BaselineKind b = cfg.baselines[bi];
      const auto& ctx = contexts[bi];
      try {
        const auto del = deletion_trace(s.model, x, explanation, ctx, cfg.metric, s.index);
        const auto ins = insertion_trace(s.model, x, explanation, ctx, cfg.metric, s.index);
        Cell c;
        c.image = image;
        c.method = m;
        c.baseline = b;
        c.deletion_auc = del.auc;
        c.insertion_auc = ins.auc;
        c.final_energy = del.steps.back().logit_energy;
        c.path_ood = mean_ood(del);
        c.path_ood_insertion = mean_ood(ins);
        if (cfg.metric.mode == ScoreMode::kSoftmax) {
          const auto cd = auc_concentration(del);
          const auto ci = auc_concentration(ins);
          c.concentration_deletion = cd.fraction;
          c.concentration_insertion = ci.fraction;
          c.concentration_undefined = cd.undefined || ci.undefined;
          c.early_ood_deletion = mean_ood_until(del, cd.fraction);
          c.early_ood_insertion = mean_ood_until(ins, ci.fraction);
        }
        cells.push_back(c);
        if (image < cfg.trace_dumps) {
          const std::string stem = "img" + std::to_string(image) + "_" + std::string(method_name(m)) + "_" +
                                   std::string(baseline_name(b));
          write_trace_csv(del, s.outdir / "traces" / (stem + "_deletion.csv"));
          write_trace_csv(ins, s.outdir / "traces" / (stem + "_insertion.csv"));
        }
        if (image < cfg.chain_dumps && m == cfg.methods.front()) dump_chain(s, image, x, explanation, b, ctx);
      } catch (const std::exception& e) {
        throw std::runtime_error(cell_label(image, m, b) + ": " + e.what());
      }
    }
  }
  return cells;
}

}  // namespace

BenchmarkResult run_benchmark(const RunConfig& cfg) {
  cfg.validate();
  const std::filesystem::path outdir = cfg.output_dir;
  std::filesystem::create_directories(outdir);
  if (cfg.trace_dumps > 0) std::filesystem::create_directories(outdir / "traces");
  if (cfg.chain_dumps > 0) std::filesystem::create_directories(outdir / "chains");

  const Tensor train_images = load_idx_images(cfg.train_images);
  const Dataset test = load_dataset(cfg.test_images, cfg.test_labels);
  const Dataset eval = test.head(std::min(cfg.image_count, test.count()));

  std::optional<Model> model;
  if (!cfg.model.empty()) {
    model = load_model(cfg.model);
  } else {
    Architecture arch;
    arch.height = eval.rows();
    arch.width = eval.cols();
    arch.hidden = cfg.training->hidden;
    const Dataset train = load_dataset(cfg.train_images, cfg.train_labels);
    arch.classes = 0;
    for (auto l : train.labels) arch.classes = std::max(arch.classes, l + 1);
    model = train_sgd(arch, train, cfg.training->train).model;
  }
  if (input_dim(*model) != eval.pixels()) {
    throw std::invalid_argument("model expects " + std::to_string(input_dim(*model)) + " inputs but images have " +
                                std::to_string(eval.pixels()) + " pixels");
  }

  BenchmarkResult result;
  result.methods = cfg.methods;
  result.baselines = cfg.baselines;
  result.model_accuracy = accuracy(*model, eval);

  const DatasetStats stats = compute_stats(train_images);
  const MLPModel* mlp = std::get_if<MLPModel>(&*model);
  std::optional<FeatureIndex> index;
  if (mlp && cfg.metric.record_ood) index = FeatureIndex::build(*mlp, train_images, cfg.index_size);

  std::optional<Tensor> featviz_image;
  const bool wants_featviz =
      std::find(cfg.baselines.begin(), cfg.baselines.end(), BaselineKind::kFeatviz) != cfg.baselines.end();
  if (wants_featviz) {
    if (!cfg.featviz_image.empty()) {
      featviz_image = read_tensor_json(cfg.featviz_image);
    } else {
      if (!mlp) throw std::invalid_argument("featviz baseline needs an MLP model with a hidden layer");
      const auto fv = optimize_baseline(*mlp, mean_magnitude_spectrum(train_images), cfg.featviz);
      featviz_image = fv.image;
      result.featviz_objective = fv.objective_trace.back();
      result.featviz_clip_fraction = fv.clip_fraction;
      write_tensor_json(fv.image, outdir / "featviz.json");
      write_pgm(fv.image, outdir / "featviz.pgm");
    }
    if (featviz_image->size() != eval.pixels()) throw std::invalid_argument("featviz image has the wrong size");
    *featviz_image = featviz_image->reshaped({eval.rows(), eval.cols()});
  }

  Shared shared{cfg, *model, eval, stats, index ? &*index : nullptr, featviz_image ? &*featviz_image : nullptr,
                outdir};

  const std::size_t n = eval.count();
  std::vector<std::vector<Cell>> per_image(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        per_image[i] = evaluate_image(shared, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min(cfg.threads, n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (auto& cells : per_image) result.cells.insert(result.cells.end(), cells.begin(), cells.end());

  const std::size_t k = std::min<std::size_t>(5, class_count(*model));
  for (std::size_t bi = 0; bi < cfg.baselines.size(); ++bi) {
    const BaselineKind b = cfg.baselines[bi];
    const Tensor x = eval.image_tensor(0).reshaped({eval.rows(), eval.cols()});
    const auto ctx = build_context(b, x, stats, derive_seed(cfg.seed, {kBaselineStream, 0, static_cast<std::uint64_t>(b)}),
                                   shared.featviz_image, cfg.local_window);
    result.topk.push_back({b, 0, classify_topk(*model, ctx.replacement.values(), k)});
  }
  return result;
}

std::vector<ReportRow> aggregate(const std::vector<Cell>& cells, std::span<const Method> methods,
                                 std::span<const BaselineKind> baselines) {
  std::vector<ReportRow> rows;
  for (auto m : methods) {
    for (auto b : baselines) {
      ReportRow r;
      r.method = m;
      r.baseline = b;
      for (const auto& c : cells) {
        if (c.method != m || c.baseline != b) continue;
        ++r.images;
        r.deletion_auc += c.deletion_auc;
        r.insertion_auc += c.insertion_auc;
        r.final_energy += c.final_energy;
        r.path_ood += c.path_ood;
        r.path_ood_insertion += c.path_ood_insertion;
        r.concentration_deletion += c.concentration_deletion;
        r.concentration_insertion += c.concentration_insertion;
        r.early_ood_deletion += c.early_ood_deletion;
        r.early_ood_insertion += c.early_ood_insertion;
      }
      if (r.images == 0) {
        throw std::invalid_argument("aggregate: no cells for method " + std::string(method_name(m)) + ", baseline " +
                                    std::string(baseline_name(b)));
      }
      const double n = static_cast<double>(r.images);
      for (double* v : {&r.deletion_auc, &r.insertion_auc, &r.final_energy, &r.path_ood, &r.path_ood_insertion,
                        &r.concentration_deletion, &r.concentration_insertion, &r.early_ood_deletion,
                        &r.early_ood_insertion}) {
        *v /= n;
      }
      r.srg = srg(r.insertion_auc, r.deletion_auc);
      rows.push_back(r);
    }
  }
  return rows;
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("kendall_tau: score vectors differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("kendall_tau: need at least two items");
  long long balance = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int sa = (a[i] > a[j]) - (a[i] < a[j]);
      const int sb = (b[i] > b[j]) - (b[i] < b[j]);
      balance += sa * sb;
    }
  }
  return static_cast<double>(balance) / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double rank_correlation(const std::vector<std::string>& ranking_a, const std::vector<std::string>& ranking_b) {
  std::map<std::string, double> pos_b;
  for (std::size_t i = 0; i < ranking_b.size(); ++i) pos_b[ranking_b[i]] = static_cast<double>(i);
  const std::set<std::string> items_a(ranking_a.begin(), ranking_a.end());
  if (ranking_a.size() != ranking_b.size() || items_a.size() != ranking_a.size() || pos_b.size() != ranking_b.size()) {
    throw std::invalid_argument("rank_correlation: rankings must list the same distinct items");
  }
  std::vector<double> a(ranking_a.size());
  std::vector<double> b(ranking_a.size());
  for (std::size_t i = 0; i < ranking_a.size(); ++i) {
    const auto it = pos_b.find(ranking_a[i]);
    if (it == pos_b.end()) throw std::invalid_argument("rank_correlation: item '" + ranking_a[i] + "' missing");
    a[i] = static_cast<double>(i);
    b[i] = it->second;
  }
  return kendall_tau(a, b);
}

namespace {

const ReportRow& find_row(const std::vector<ReportRow>& rows, Method m, BaselineKind b) {
  for (const auto& r : rows) {
    if (r.method == m && r.baseline == b) return r;
  }
  throw std::invalid_argument("report: missing row for method " + std::string(method_name(m)) + ", baseline " +
                              std::string(baseline_name(b)));
}

double metric_value(const ReportRow& r, RankMetric metric) {
  switch (metric) {
    case RankMetric::kDeletion: return r.deletion_auc;
    case RankMetric::kInsertion: return r.insertion_auc;
    case RankMetric::kSrg: return r.srg;
  }
  return 0.0;
}

double min_off_diagonal(const std::vector<std::vector<double>>& m) {
  double best = 1.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (i != j) best = std::min(best, m[i][j]);
    }
  }
  return best;
}

}  // namespace

std::vector<std::vector<double>> tau_matrix(const std::vector<ReportRow>& rows, std::span<const Method> methods,
                                            std::span<const BaselineKind> baselines, RankMetric metric) {
  std::vector<std::vector<double>> scores;
  for (auto b : baselines) {
    std::vector<double> s;
    for (auto m : methods) s.push_back(metric_value(find_row(rows, m, b), metric));
    scores.push_back(std::move(s));
  }
  const std::size_t nb = baselines.size();
  std::vector<std::vector<double>> tau(nb, std::vector<double>(nb, 1.0));
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t j = i + 1; j < nb; ++j) {
      tau[i][j] = tau[j][i] = kendall_tau(scores[i], scores[j]);
    }
  }
  return tau;
}

GridSummary summarize(const std::vector<ReportRow>& rows, std::span<const Method> methods,
                      std::span<const BaselineKind> baselines) {
  GridSummary s;
  if (methods.size() >= 2 && baselines.size() >= 2) {
    s.min_tau_deletion = min_off_diagonal(tau_matrix(rows, methods, baselines, RankMetric::kDeletion));
    s.min_tau_insertion = min_off_diagonal(tau_matrix(rows, methods, baselines, RankMetric::kInsertion));
    s.min_tau_srg = min_off_diagonal(tau_matrix(rows, methods, baselines, RankMetric::kSrg));
  }
  for (const auto& r : rows) {
    s.mean_concentration_deletion += r.concentration_deletion;
    s.mean_concentration_insertion += r.concentration_insertion;
    s.mean_early_ood_deletion += r.early_ood_deletion;
    s.mean_early_ood_insertion += r.early_ood_insertion;
  }
  const double n = static_cast<double>(rows.size());
  s.mean_concentration_deletion /= n;
  s.mean_concentration_insertion /= n;
  s.mean_early_ood_deletion /= n;
  s.mean_early_ood_insertion /= n;
  return s;
}

std::vector<TradeoffRow> tradeoff(const std::vector<ReportRow>& rows, std::span<const BaselineKind> baselines) {
  std::vector<TradeoffRow> out;
  for (auto b : baselines) {
    TradeoffRow t;
    t.baseline = b;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.baseline != b) continue;
      t.final_energy += r.final_energy;
      t.path_ood += r.path_ood;
      ++n;
    }
    if (n == 0) throw std::invalid_argument("tradeoff: no rows for baseline " + std::string(baseline_name(b)));
    t.final_energy /= static_cast<double>(n);
    t.path_ood /= static_cast<double>(n);
    out.push_back(t);
  }
  return out;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_tau(const std::vector<std::vector<double>>& tau, std::span<const BaselineKind> baselines,
               const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "baseline";
  for (auto b : baselines) out << ',' << baseline_name(b);
  out << '\n';
  for (std::size_t i = 0; i < baselines.size(); ++i) {
    out << baseline_name(baselines[i]);
    for (double v : tau[i]) out << ',' << format_number(v);
    out << '\n';
  }
}

}  // namespace

void emit_report(const std::vector<ReportRow>& rows, std::span<const Method> methods,
                 std::span<const BaselineKind> baselines, const std::vector<TopKRow>& topk,
                 const std::filesystem::path& outdir) {
  if (rows.empty()) throw std::invalid_argument("emit_report: no rows");
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw std::runtime_error("cannot create " + outdir.string() + ": " + ec.message());

  {
    auto out = open_csv(outdir / "rankings.csv");
    out << "method,baseline,images,deletion_auc,insertion_auc,srg,final_energy,path_ood,path_ood_insertion,"
           "concentration_deletion,concentration_insertion\n";
    for (const auto& r : rows) {
      out << method_name(r.method) << ',' << baseline_name(r.baseline) << ',' << r.images << ','
          << format_number(r.deletion_auc) << ',' << format_number(r.insertion_auc) << ',' << format_number(r.srg)
          << ',' << format_number(r.final_energy) << ',' << format_number(r.path_ood) << ','
          << format_number(r.path_ood_insertion) << ',' << format_number(r.concentration_deletion) << ','
          << format_number(r.concentration_insertion) << '\n';
    }
  }
  if (methods.size() >= 2) {
    write_tau(tau_matrix(rows, methods, baselines, RankMetric::kDeletion), baselines, outdir / "tau_matrix_deletion.csv");
    write_tau(tau_matrix(rows, methods, baselines, RankMetric::kInsertion), baselines,
              outdir / "tau_matrix_insertion.csv");
    write_tau(tau_matrix(rows, methods, baselines, RankMetric::kSrg), baselines, outdir / "tau_matrix_srg.csv");
  }
  {
    auto out = open_csv(outdir / "tradeoff.csv");
    out << "baseline,final_energy,path_ood\n";
    for (const auto& t : tradeoff(rows, baselines)) {
      out << baseline_name(t.baseline) << ',' << format_number(t.final_energy) << ',' << format_number(t.path_ood)
          << '\n';
    }
  }
  {
    auto out = open_csv(outdir / "concentration.csv");
    out << "method,baseline,concentration_deletion,concentration_insertion,early_ood_deletion,early_ood_insertion\n";
    for (const auto& r : rows) {
      out << method_name(r.method) << ',' << baseline_name(r.baseline) << ',' << format_number(r.concentration_deletion)
          << ',' << format_number(r.concentration_insertion) << ',' << format_number(r.early_ood_deletion) << ','
          << format_number(r.early_ood_insertion) << '\n';
    }
  }
  {
    const auto s = summarize(rows, methods, baselines);
    auto out = open_csv(outdir / "summary.csv");
    out << "statistic,value\n";
    out << "min_tau_deletion," << format_number(s.min_tau_deletion) << '\n';
    out << "min_tau_insertion," << format_number(s.min_tau_insertion) << '\n';
    out << "min_tau_srg," << format_number(s.min_tau_srg) << '\n';
    out << "mean_concentration_deletion," << format_number(s.mean_concentration_deletion) << '\n';
    out << "mean_concentration_insertion," << format_number(s.mean_concentration_insertion) << '\n';
    out << "mean_early_ood_deletion," << format_number(s.mean_early_ood_deletion) << '\n';
    out << "mean_early_ood_insertion," << format_number(s.mean_early_ood_insertion) << '\n';
  }
  if (!topk.empty()) {
    auto out = open_csv(outdir / "baseline_topk.csv");
    out << "baseline,image,rank,class,softmax\n";
    for (const auto& t : topk) {
      for (std::size_t r = 0; r < t.top.classes.size(); ++r) {
        out << baseline_name(t.baseline) << ',' << t.image << ',' << r + 1 << ',' << t.top.classes[r] << ','
            << format_number(t.top.scores[r]) << '\n';
      }
    }
  }
}

namespace {

constexpr const char* kCellHeader =
    "image,method,baseline,deletion_auc,insertion_auc,final_energy,path_ood,path_ood_insertion,"
    "concentration_deletion,concentration_insertion,concentration_undefined,early_ood_deletion,early_ood_insertion";

double parse_double(const std::string& field, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw std::invalid_argument("cells.csv line " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return v;
}

}  // namespace

void write_cells_csv(const std::vector<Cell>& cells, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << kCellHeader << '\n';
  for (const auto& c : cells) {
    out << c.image << ',' << method_name(c.method) << ',' << baseline_name(c.baseline) << ','
        << format_number(c.deletion_auc) << ',' << format_number(c.insertion_auc) << ','
        << format_number(c.final_energy) << ',' << format_number(c.path_ood) << ','
        << format_number(c.path_ood_insertion) << ',' << format_number(c.concentration_deletion) << ','
        << format_number(c.concentration_insertion) << ',' << (c.concentration_undefined ? 1 : 0) << ','
        << format_number(c.early_ood_deletion) << ',' << format_number(c.early_ood_insertion) << '\n';
  }
}

std::vector<Cell> read_cells_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kCellHeader) {
    throw std::invalid_argument(path.string() + ": unexpected header");
  }
  std::vector<Cell> cells;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 13) throw std::invalid_argument("cells.csv line " + std::to_string(lineno) + ": expected 13 fields");
    Cell c;
    c.image = static_cast<std::size_t>(parse_double(f[0], lineno));
    c.method = parse_method(f[1]);
    c.baseline = parse_baseline(f[2]);
    c.deletion_auc = parse_double(f[3], lineno);
    c.insertion_auc = parse_double(f[4], lineno);
    c.final_energy = parse_double(f[5], lineno);
    c.path_ood = parse_double(f[6], lineno);
    c.path_ood_insertion = parse_double(f[7], lineno);
    c.concentration_deletion = parse_double(f[8], lineno);
    c.concentration_insertion = parse_double(f[9], lineno);
    c.concentration_undefined = f[10] == "1";
    c.early_ood_deletion = parse_double(f[11], lineno);
    c.early_ood_insertion = parse_double(f[12], lineno);
    cells.push_back(c);
  }
  return cells;
}

}  // namespace faithlab
