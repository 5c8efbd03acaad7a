#include "faithlab/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <numeric>
#include <stdexcept>

namespace faithlab {

std::vector<double> MetricTrace::fractions() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.fraction);
  return out;
}

std::vector<double> MetricTrace::scores() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.score);
  return out;
}

double MetricTrace::step_sum() const {
  double total = 0.0;
  for (std::size_t i = 1; i < steps.size(); ++i) total += steps[i].score;
  return total;
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

// Same accumulation order as squared_distance; gives up once `bound` is exceeded.
double squared_distance_bounded(std::span<const double> a, std::span<const double> b, double bound) {
  constexpr std::size_t kChunk = 8;
  double acc = 0.0;
  std::size_t k = 0;
  while (k < a.size()) {
    const std::size_t stop = std::min(a.size(), k + kChunk);
    for (; k < stop; ++k) {
      const double diff = a[k] - b[k];
      acc += diff * diff;
    }
    if (acc > bound) return acc;
  }
  return acc;
}

}  // namespace

FeatureIndex::FeatureIndex(std::size_t dim, std::vector<double> features) : dim_(dim) {
  if (dim == 0 || features.empty() || features.size() % dim != 0) {
    throw std::invalid_argument("feature index: need a nonempty [count, dim] feature matrix");
  }
  count_ = features.size() / dim;
  std::vector<double> norms(count_);
  for (std::size_t i = 0; i < count_; ++i) norms[i] = l2_norm({features.data() + i * dim, dim});
  original_.resize(count_);
  std::iota(original_.begin(), original_.end(), std::size_t{0});
  std::stable_sort(original_.begin(), original_.end(), [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });
  features_.resize(features.size());
  norms_.resize(count_);
  for (std::size_t i = 0; i < count_; ++i) {
    const std::size_t src = original_[i];
    std::copy_n(features.begin() + static_cast<std::ptrdiff_t>(src * dim), dim,
                features_.begin() + static_cast<std::ptrdiff_t>(i * dim));
    norms_[i] = norms[src];
  }
  if (count_ > 1) {
    std::vector<double> loo(count_);
    for (std::size_t i = 0; i < count_; ++i) loo[i] = search(row(i), i).distance;
    const std::size_t mid = count_ / 2;
    std::nth_element(loo.begin(), loo.begin() + static_cast<std::ptrdiff_t>(mid), loo.end());
    reference_scale_ = loo[mid];
    if (count_ % 2 == 0) {
      const double lower = *std::max_element(loo.begin(), loo.begin() + static_cast<std::ptrdiff_t>(mid));
      reference_scale_ = 0.5 * (reference_scale_ + lower);
    }
  }
}

FeatureIndex FeatureIndex::build(const MLPModel& model, const Tensor& images, std::size_t limit) {
  if (images.rank() != 3) throw std::invalid_argument("feature index: expected [count, rows, cols] images");
  std::size_t count = images.shape()[0];
  if (limit > 0) count = std::min(count, limit);
  const std::size_t pixels = images.shape()[1] * images.shape()[2];
  std::vector<double> features;
  features.reserve(count * model.feature_dim());
  for (std::size_t n = 0; n < count; ++n) {
    const auto f = model.features(images.values().subspan(n * pixels, pixels));
    features.insert(features.end(), f.begin(), f.end());
  }
  return FeatureIndex(model.feature_dim(), std::move(features));
}

Neighbor FeatureIndex::search(std::span<const double> query, std::size_t exclude) const {
  if (query.size() != dim_) throw std::invalid_argument("feature index: query dimension mismatch");
  const double qnorm = l2_norm(query);
  const std::size_t start =
      static_cast<std::size_t>(std::lower_bound(norms_.begin(), norms_.end(), qnorm) - norms_.begin());
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  auto consider = [&](std::size_t i) {
    if (i == exclude) return;
    const double d2 = squared_distance_bounded(query, row(i), best);
    if (d2 < best || (d2 == best && original_[i] < best_index)) {
      best = d2;
      best_index = original_[i];
    }
  };
  // Norm gap lower-bounds the distance; the slack absorbs rounding in the norms.
  auto pruned = [&](std::size_t i) {
    const double gap = std::abs(norms_[i] - qnorm);
    return gap * gap > best * (1.0 + 1e-9) + 1e-300;
  };
  std::size_t up = start;
  std::size_t down = start;
  bool up_open = up < count_;
  bool down_open = down > 0;
  while (up_open || down_open) {
    if (up_open) {
      if (pruned(up)) {
        up_open = false;
      } else {
        consider(up);
        up_open = ++up < count_;
      }
    }
    if (down_open) {
      if (pruned(down - 1)) {
        down_open = false;
      } else {
        consider(down - 1);
        down_open = --down > 0;
      }
    }
  }
  return {std::sqrt(best), best_index};
}

Neighbor FeatureIndex::nearest(std::span<const double> query) const {
  return search(query, std::numeric_limits<std::size_t>::max());
}

Neighbor FeatureIndex::brute_force_nearest(std::span<const double> query) const {
  if (query.size() != dim_) throw std::invalid_argument("feature index: query dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < count_; ++i) {
    const double d2 = squared_distance(query, row(i));
    if (d2 < best || (d2 == best && original_[i] < best_index)) {
      best = d2;
      best_index = original_[i];
    }
  }
  return {std::sqrt(best), best_index};
}

namespace {

OodScore ood_from_features(const FeatureIndex& index, std::span<const double> features) {
  const double raw = index.nearest(features).distance;
  const double scale = index.reference_scale();
  return {raw, scale > 0.0 ? raw / scale : raw};
}

}  // namespace

OodScore ood_1nn(const FeatureIndex& index, const MLPModel& model, std::span<const double> image) {
  return ood_from_features(index, model.features(image));
}

double info_removal_energy(const Model& model, std::span<const double> image) {
  return l2_norm(predict(model, image));
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty logits");
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - peak);
    total += out[k];
  }
  for (auto& v : out) v /= total;
  return out;
}

namespace {

enum class Direction { kDeletion, kInsertion };

void check_ordering(std::span<const std::size_t> ordering, std::size_t d) {
  if (ordering.size() != d) {
    throw std::invalid_argument("metric: ordering has " + std::to_string(ordering.size()) + " entries for " +
                                std::to_string(d) + " features");
  }
  std::vector<char> seen(d, 0);
  for (auto i : ordering) {
    if (i >= d || seen[i]) throw std::invalid_argument("metric: ordering is not a permutation of the feature indices");
    seen[i] = 1;
  }
}

MetricTrace run_trace(Direction direction, const Model& model, const Tensor& x, const Explanation& explanation,
                      const BaselineContext& ctx, const MetricConfig& cfg, const FeatureIndex* index) {
  const std::size_t d = x.size();
  check_ordering(explanation.ordering, d);
  if (ctx.replacement.size() != d) throw std::invalid_argument("metric: baseline context does not match input");
  const std::size_t k = cfg.steps == 0 ? d : cfg.steps;
  if (k < 1 || k > d) throw std::invalid_argument("metric: step count must lie in [1, d]");
  const MLPModel* mlp = std::get_if<MLPModel>(&model);
  const bool with_ood = cfg.record_ood && index != nullptr && mlp != nullptr;

  MetricTrace trace;
  trace.target = predicted_class(model, x.values());
  std::vector<double> image =
      direction == Direction::kDeletion ? x.data() : ctx.replacement.data();

  auto record = [&](std::size_t replaced) {
    TraceStep step;
    step.fraction = static_cast<double>(replaced) / static_cast<double>(d);
    std::vector<double> logits;
    if (with_ood) {
      auto fwd = mlp->forward_with_features(image);
      const auto ood = ood_from_features(*index, fwd.penultimate);
      step.ood_raw = ood.raw;
      step.ood_normalized = ood.normalized;
      logits = std::move(fwd.logits);
    } else {
      logits = predict(model, image);
    }
    step.score = cfg.mode == ScoreMode::kLogit ? logits[trace.target] : softmax(logits)[trace.target];
    if (cfg.record_energy) step.logit_energy = l2_norm(logits);
    trace.steps.push_back(step);
  };

  std::size_t done = 0;
  record(0);
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t upto = (i * d + k - 1) / k;
    for (; done < upto; ++done) {
      const std::size_t feature = explanation.ordering[done];
      image[feature] = direction == Direction::kDeletion ? ctx.replacement[feature] : x[feature];
    }
    record(upto);
  }
  trace.auc = auc(trace);
  return trace;
}

}  // namespace

MetricTrace deletion_trace(const Model& model, const Tensor& x, const Explanation& explanation,
                           const BaselineContext& ctx, const MetricConfig& cfg, const FeatureIndex* index) {
  return run_trace(Direction::kDeletion, model, x, explanation, ctx, cfg, index);
}

MetricTrace insertion_trace(const Model& model, const Tensor& x, const Explanation& explanation,
                            const BaselineContext& ctx, const MetricConfig& cfg, const FeatureIndex* index) {
  return run_trace(Direction::kInsertion, model, x, explanation, ctx, cfg, index);
}

double auc(std::span<const double> fractions, std::span<const double> scores) {
  if (fractions.empty() || fractions.size() != scores.size()) {
    throw std::invalid_argument("auc: need matching, nonempty fraction and score sequences");
  }
  if (fractions.size() == 1) return scores[0];
  double area = 0.0;
  for (std::size_t i = 1; i < fractions.size(); ++i) {
    area += 0.5 * (scores[i - 1] + scores[i]) * (fractions[i] - fractions[i - 1]);
  }
  const double span = fractions.back() - fractions.front();
  return span == 1.0 ? area : area / span;
}

double auc(const MetricTrace& trace) { return auc(trace.fractions(), trace.scores()); }

double srg(double insertion_auc, double deletion_auc) { return insertion_auc - deletion_auc; }

Concentration auc_concentration(std::span<const double> fractions, std::span<const double> scores, double share) {
  if (fractions.size() < 2 || fractions.size() != scores.size()) {
    throw std::invalid_argument("auc_concentration: need at least two matching steps");
  }
  for (double s : scores) {
    if (s < 0.0) throw std::invalid_argument("auc_concentration: scores must be non-negative (use softmax mode)");
  }
  double total = 0.0;
  for (std::size_t i = 1; i < fractions.size(); ++i) {
    total += 0.5 * (scores[i - 1] + scores[i]) * (fractions[i] - fractions[i - 1]);
  }
  if (total <= 0.0) return {1.0, true};
  const double target = share * total;
  double cumulative = 0.0;
  for (std::size_t i = 1; i < fractions.size(); ++i) {
    const double width = fractions[i] - fractions[i - 1];
    const double s0 = scores[i - 1];
    const double s1 = scores[i];
    const double area = 0.5 * (s0 + s1) * width;
    if (cumulative + area >= target && area > 0.0) {
      // Solve s0 t + (s1 - s0) t^2 / (2 width) = remaining for t in [0, width].
      const double remaining = target - cumulative;
      const double a = (s1 - s0) / (2.0 * width);
      const double t = 2.0 * remaining / (s0 + std::sqrt(std::max(0.0, s0 * s0 + 4.0 * a * remaining)));
      return {fractions[i - 1] + std::clamp(t, 0.0, width), false};
    }
    cumulative += area;
  }
  return {fractions.back(), false};
}

Concentration auc_concentration(const MetricTrace& trace, double share) {
  return auc_concentration(trace.fractions(), trace.scores(), share);
}

double mean_ood_until(const MetricTrace& trace, double until) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& step : trace.steps) {
    if (step.fraction > until && n > 0) break;
    total += step.ood_normalized;
    ++n;
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

double mean_ood(const MetricTrace& trace) { return mean_ood_until(trace, 1.0); }

TopK classify_topk(const Model& model, std::span<const double> image, std::size_t k) {
  const auto probs = softmax(predict(model, image));
  if (k > probs.size()) throw std::invalid_argument("classify_topk: k exceeds the class count");
  const auto order = descending_order(probs);
  TopK out;
  for (std::size_t i = 0; i < k; ++i) {
    out.classes.push_back(order[i]);
    out.scores.push_back(probs[order[i]]);
  }
  return out;
}

std::string format_number(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_trace_csv(const MetricTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_trace_csv: cannot write " + path.string());
  out << "step,fraction,score,logit_energy,ood_raw,ood_normalized\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    out << i << ',' << format_number(s.fraction) << ',' << format_number(s.score) << ','
        << format_number(s.logit_energy) << ',' << format_number(s.ood_raw) << ',' << format_number(s.ood_normalized)
        << '\n';
  }
}

}  // namespace faithlab
