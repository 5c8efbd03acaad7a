#include "faithlab/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "faithlab/attributions.hpp"
#include "faithlab/baselines.hpp"
#include "faithlab/metrics.hpp"
#include "faithlab/models.hpp"
#include "faithlab/rng.hpp"

namespace faithlab {

std::string regime_name(Regime regime) { return regime == Regime::kZero ? "zero" : "uniform_expected"; }

std::string direction_name(Direction direction) {
  switch (direction) {
    case Direction::kNone: return "none";
    case Direction::kAscending: return "ascending";
    case Direction::kDescending: return "descending";
    case Direction::kBoth: return "both";
  }
  return "none";
}

void TheoryInstance::validate() const {
  if (x.size() < 2) throw std::invalid_argument("theory instance: need d >= 2");
  if (w.size() != x.size()) throw std::invalid_argument("theory instance: x and w differ in length");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(w[i])) throw std::invalid_argument("theory instance: non-finite entry");
  }
  if (!std::isfinite(bias)) throw std::invalid_argument("theory instance: non-finite bias");
}

namespace {

void check_permutation(std::span<const std::size_t> ordering, std::size_t d) {
  if (ordering.size() != d) throw std::invalid_argument("ordering length does not match the instance dimension");
  std::vector<char> seen(d, 0);
  for (auto i : ordering) {
    if (i >= d || seen[i]) throw std::invalid_argument("ordering is not a permutation");
    seen[i] = 1;
  }
}

double full_value(const TheoryInstance& inst) {
  return std::inner_product(inst.x.begin(), inst.x.end(), inst.w.begin(), 0.0) + inst.bias;
}

double evaluate(const TheoryInstance& inst, const std::vector<double>& input) {
  return std::inner_product(input.begin(), input.end(), inst.w.begin(), 0.0) + inst.bias;
}

// Expected value of a removed feature.
double removed_value(const TheoryInstance& inst, std::size_t i) {
  return inst.regime == Regime::kZero ? 0.0 : inst.x[i] + 0.5;
}

}  // namespace

double exact_deletion_sum(const TheoryInstance& inst, std::span<const std::size_t> ordering) {
  inst.validate();
  const std::size_t d = inst.dim();
  check_permutation(ordering, d);
  double weighted = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t u = ordering[i];
    const double coef = static_cast<double>(d - i);
    weighted += inst.regime == Regime::kZero ? -coef * inst.x[u] * inst.w[u] : 0.5 * coef * inst.w[u];
  }
  return static_cast<double>(d) * full_value(inst) + weighted;
}

double exact_insertion_sum(const TheoryInstance& inst, std::span<const std::size_t> ordering) {
  inst.validate();
  const std::size_t d = inst.dim();
  check_permutation(ordering, d);
  double weighted = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const std::size_t u = ordering[i];
    if (inst.regime == Regime::kZero) {
      weighted += static_cast<double>(d - i) * inst.x[u] * inst.w[u];
    } else {
      weighted += 0.5 * static_cast<double>(i) * inst.w[u];
    }
  }
  const double base = inst.regime == Regime::kZero ? inst.bias : full_value(inst);
  return static_cast<double>(d) * base + weighted;
}

double simulated_deletion_sum(const TheoryInstance& inst, std::span<const std::size_t> ordering) {
  inst.validate();
  check_permutation(ordering, inst.dim());
  std::vector<double> input = inst.x;
  double total = 0.0;
  for (auto u : ordering) {
    input[u] = removed_value(inst, u);
    total += evaluate(inst, input);
  }
  return total;
}

double simulated_insertion_sum(const TheoryInstance& inst, std::span<const std::size_t> ordering) {
  inst.validate();
  check_permutation(ordering, inst.dim());
  std::vector<double> input(inst.dim());
  for (std::size_t i = 0; i < inst.dim(); ++i) input[i] = removed_value(inst, i);
  double total = 0.0;
  for (auto u : ordering) {
    input[u] = inst.x[u];
    total += evaluate(inst, input);
  }
  return total;
}

namespace {

bool sorted_by(std::span<const std::size_t> ordering, std::span<const double> key, bool ascending) {
  for (std::size_t i = 1; i < ordering.size(); ++i) {
    const double prev = key[ordering[i - 1]];
    const double next = key[ordering[i]];
    if (ascending ? prev > next : prev < next) return false;
  }
  return true;
}

std::vector<Ordering> all_sorted(std::span<const double> key, bool ascending) {
  Ordering perm(key.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<Ordering> out;
  do {
    if (sorted_by(perm, key, ascending)) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace

Direction monotone_family(const std::vector<Ordering>& set, std::span<const double> key) {
  if (set.empty()) return Direction::kNone;
  std::vector<Ordering> sorted_set = set;
  std::sort(sorted_set.begin(), sorted_set.end());
  const bool asc = all_sorted(key, true) == sorted_set;
  const bool desc = all_sorted(key, false) == sorted_set;
  if (asc && desc) return Direction::kBoth;
  if (asc) return Direction::kAscending;
  if (desc) return Direction::kDescending;
  return Direction::kNone;
}

OrderingVerdict brute_force_optimal(const TheoryInstance& inst, double tie_tolerance) {
  inst.validate();
  const std::size_t d = inst.dim();
  if (d > kMaxBruteForceDim) {
    throw std::invalid_argument("brute_force_optimal: d = " + std::to_string(d) + " exceeds " +
                                std::to_string(kMaxBruteForceDim));
  }
  Ordering perm(d);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::pair<Ordering, std::pair<double, double>>> values;
  double scale = 1.0;
  do {
    const double del = exact_deletion_sum(inst, perm);
    const double ins = exact_insertion_sum(inst, perm);
    scale = std::max({scale, std::abs(del), std::abs(ins)});
    values.push_back({perm, {del, ins}});
  } while (std::next_permutation(perm.begin(), perm.end()));

  OrderingVerdict verdict;
  verdict.deletion_value = values.front().second.first;
  verdict.insertion_value = values.front().second.second;
  for (const auto& [o, v] : values) {
    verdict.deletion_value = std::min(verdict.deletion_value, v.first);
    verdict.insertion_value = std::max(verdict.insertion_value, v.second);
  }
  const double tol = tie_tolerance * scale;
  for (const auto& [o, v] : values) {
    if (v.first <= verdict.deletion_value + tol) verdict.deletion_optima.push_back(o);
    if (v.second >= verdict.insertion_value - tol) verdict.insertion_optima.push_back(o);
  }
  std::vector<double> contribution(d);
  for (std::size_t i = 0; i < d; ++i) contribution[i] = inst.x[i] * inst.w[i];
  verdict.deletion_in_contribution = monotone_family(verdict.deletion_optima, contribution);
  verdict.deletion_in_weight = monotone_family(verdict.deletion_optima, inst.w);
  verdict.insertion_in_contribution = monotone_family(verdict.insertion_optima, contribution);
  verdict.insertion_in_weight = monotone_family(verdict.insertion_optima, inst.w);
  return verdict;
}

namespace {

bool has_close_pair(std::vector<double> values, double gap) {
  std::sort(values.begin(), values.end());
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] - values[i - 1] < gap) return true;
  }
  return false;
}

void draw_x(TheoryInstance& inst, std::mt19937_64& rng, double min_gap) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> contribution(inst.w.size());
  do {
    for (auto& v : inst.x) v = unit(rng);
    for (std::size_t i = 0; i < inst.w.size(); ++i) contribution[i] = inst.x[i] * inst.w[i];
  } while (has_close_pair(contribution, min_gap));
}

}  // namespace

std::vector<TheoryInstance> random_instances(std::size_t count, std::size_t dim, std::uint64_t seed,
                                             double min_gap) {
  if (dim < 2 || dim > kMaxBruteForceDim) throw std::invalid_argument("random_instances: d must lie in [2, 8]");
  std::mt19937_64 rng(derive_seed(seed, {dim}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<TheoryInstance> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    TheoryInstance inst;
    inst.x.resize(dim);
    inst.w.resize(dim);
    do {
      for (auto& v : inst.w) v = normal(rng);
    } while (has_close_pair(inst.w, min_gap));
    inst.bias = normal(rng);
    draw_x(inst, rng, min_gap);
    out.push_back(std::move(inst));
  }
  return out;
}

std::string format_ordering(std::span<const std::size_t> ordering) {
  std::string out = "(";
  for (std::size_t i = 0; i < ordering.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ordering[i] + 1);
  }
  return out + ")";
}

namespace {

std::string describe(const TheoryInstance& inst) {
  std::ostringstream os;
  os.precision(17);
  os << regime_name(inst.regime) << " x=[";
  for (std::size_t i = 0; i < inst.dim(); ++i) os << (i ? "," : "") << inst.x[i];
  os << "] w=[";
  for (std::size_t i = 0; i < inst.dim(); ++i) os << (i ? "," : "") << inst.w[i];
  os << "] b=" << inst.bias;
  return os.str();
}

std::string describe_set(const std::vector<Ordering>& set) {
  std::string out = "{";
  for (std::size_t i = 0; i < set.size(); ++i) out += (i ? " " : "") + format_ordering(set[i]);
  return out + "}";
}

// Records the first direction seen and flags any instance that disagrees.
bool consistent(Direction& established, Direction seen) {
  if (seen != Direction::kAscending && seen != Direction::kDescending) return false;
  if (established == Direction::kNone) established = seen;
  return established == seen;
}

}  // namespace

TheoryReport check_baseline_dependence(std::span<const std::size_t> dims, std::size_t per_dim, std::uint64_t seed) {
  TheoryReport report;
  report.name = "baseline_dependence";
  for (auto d : dims) {
    auto instances = random_instances(per_dim, d, seed);
    std::mt19937_64 redraw(derive_seed(seed, {d, 1}));
    for (auto& inst : instances) {
      ++report.instances;
      std::vector<std::string> problems;

      inst.regime = Regime::kZero;
      const auto zero = brute_force_optimal(inst);
      if (!consistent(report.zero_direction, zero.deletion_in_contribution)) {
        problems.push_back("zero-regime optimum " + describe_set(zero.deletion_optima) +
                           " is not the established monotone family in x*w (" +
                           direction_name(zero.deletion_in_contribution) + ")");
      }

      inst.regime = Regime::kUniformExpected;
      const auto uniform = brute_force_optimal(inst);
      if (!consistent(report.uniform_direction, uniform.deletion_in_weight)) {
        problems.push_back("uniform-regime optimum " + describe_set(uniform.deletion_optima) +
                           " is not the established monotone family in w");
      }
      TheoryInstance moved = inst;
      draw_x(moved, redraw, 1e-3);
      const auto moved_verdict = brute_force_optimal(moved);
      if (moved_verdict.deletion_optima != uniform.deletion_optima) {
        problems.push_back("uniform-regime optimum changed from " + describe_set(uniform.deletion_optima) + " to " +
                           describe_set(moved_verdict.deletion_optima) + " after redrawing x (" + describe(moved) +
                           ")");
      }
      if (zero.deletion_optima != uniform.deletion_optima) ++report.baseline_dependent;

      if (!problems.empty()) {
        ++report.failures;
        for (auto& p : problems) report.counterexamples.push_back(describe(inst) + ": " + p);
      }
    }
  }
  if (report.instances > 0 && report.baseline_dependent == 0) {
    ++report.failures;
    report.counterexamples.push_back("no instance had regime-dependent optima");
  }
  return report;
}

TheoryReport check_insertion_agreement(std::span<const std::size_t> dims, std::size_t per_dim, std::uint64_t seed) {
  TheoryReport report;
  report.name = "insertion_agreement";
  for (auto d : dims) {
    auto instances = random_instances(per_dim, d, seed);
    for (auto& inst : instances) {
      ++report.instances;
      bool failed = false;
      for (Regime regime : {Regime::kZero, Regime::kUniformExpected}) {
        inst.regime = regime;
        const auto verdict = brute_force_optimal(inst);
        const Direction ins = regime == Regime::kZero ? verdict.insertion_in_contribution : verdict.insertion_in_weight;
        Direction& established = regime == Regime::kZero ? report.zero_direction : report.uniform_direction;
        if (verdict.insertion_optima != verdict.deletion_optima || !consistent(established, ins)) {
          failed = true;
          report.counterexamples.push_back(describe(inst) + ": insertion argmax " +
                                           describe_set(verdict.insertion_optima) + " vs deletion argmin " +
                                           describe_set(verdict.deletion_optima));
        }
      }
      if (failed) ++report.failures;
    }
  }
  return report;
}

AgreementReport check_trace_agreement(std::span<const std::size_t> dims, std::size_t per_dim, std::uint64_t seed) {
  AgreementReport report;
  MetricConfig cfg;
  cfg.mode = ScoreMode::kLogit;
  cfg.record_ood = false;
  for (auto d : dims) {
    const auto instances = random_instances(per_dim, d, seed);
    for (const auto& base : instances) {
      const Model model = LinearModel{base.w, base.bias};
      const Tensor x = Tensor::vector(base.x);
      for (Regime regime : {Regime::kZero, Regime::kUniformExpected}) {
        TheoryInstance inst = base;
        inst.regime = regime;
        BaselineContext ctx;
        ctx.kind = regime == Regime::kZero ? BaselineKind::kZero : BaselineKind::kUniform;
        ctx.replacement = Tensor({d});
        for (std::size_t i = 0; i < d; ++i) ctx.replacement[i] = removed_value(inst, i);
        Ordering perm(d);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        do {
          Explanation e;
          e.scores.assign(d, 0.0);
          e.ordering = perm;
          const auto trace = deletion_trace(model, x, e, ctx, cfg);
          const double err = std::abs(trace.step_sum() - exact_deletion_sum(inst, perm));
          report.max_abs_error = std::max(report.max_abs_error, err);
          ++report.traces;
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
    }
  }
  return report;
}

}  // namespace faithlab
