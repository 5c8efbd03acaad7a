#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace faithlab {

// How removed features are filled for a linear model f(x) = x w + b.
// kUniformExpected adds uniform noise on [0, 1] to each removed feature and
// takes the expectation, which is exact by linearity.
enum class Regime { kZero, kUniformExpected };

std::string regime_name(Regime regime);

struct TheoryInstance {
  std::vector<double> x;
  std::vector<double> w;
  double bias = 0.0;
  Regime regime = Regime::kZero;

  std::size_t dim() const { return x.size(); }
  void validate() const;
};

using Ordering = std::vector<std::size_t>;  // 0-based feature indices

// Sum of f over steps 1..d of the deletion (insertion) path along `ordering`.
double exact_deletion_sum(const TheoryInstance& inst, std::span<const std::size_t> ordering);
double exact_insertion_sum(const TheoryInstance& inst, std::span<const std::size_t> ordering);

// Same sums, by materializing each perturbed input and evaluating f directly.
double simulated_deletion_sum(const TheoryInstance& inst, std::span<const std::size_t> ordering);
double simulated_insertion_sum(const TheoryInstance& inst, std::span<const std::size_t> ordering);

enum class Direction { kNone, kAscending, kDescending, kBoth };

std::string direction_name(Direction direction);

// Whether a set of orderings is exactly the set of orderings sorted by `key`
// (ties in any order), and in which direction.
Direction monotone_family(const std::vector<Ordering>& set, std::span<const double> key);

struct OrderingVerdict {
  std::vector<Ordering> deletion_optima;  // argmin, lexicographic order
  double deletion_value = 0.0;
  std::vector<Ordering> insertion_optima;  // argmax
  double insertion_value = 0.0;
  Direction deletion_in_contribution = Direction::kNone;  // key x*w
  Direction deletion_in_weight = Direction::kNone;        // key w
  Direction insertion_in_contribution = Direction::kNone;
  Direction insertion_in_weight = Direction::kNone;
};

inline constexpr std::size_t kMaxBruteForceDim = 8;

OrderingVerdict brute_force_optimal(const TheoryInstance& inst, double tie_tolerance = 1e-9);

// x ~ U[0,1], w ~ N(0,1), b ~ N(0,1); resampled until neither x*w nor w has
// entries closer than `min_gap`.
std::vector<TheoryInstance> random_instances(std::size_t count, std::size_t dim, std::uint64_t seed,
                                             double min_gap = 1e-3);

struct TheoryReport {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  Direction zero_direction = Direction::kNone;     // of the optimum in x*w
  Direction uniform_direction = Direction::kNone;  // of the optimum in w
  std::size_t baseline_dependent = 0;  // instances whose two regimes disagree
  std::vector<std::string> counterexamples;

  bool passed() const { return failures == 0 && instances > 0; }
};

// Per instance: the zero-regime optimum is the monotone family in x*w, the
// uniform-regime optimum is unchanged when x is redrawn, and the directions are
// constant across instances. Also requires at least one baseline-dependent case.
TheoryReport check_baseline_dependence(std::span<const std::size_t> dims, std::size_t per_dim, std::uint64_t seed);

// Insertion argmax equals the deletion argmin in both regimes.
TheoryReport check_insertion_agreement(std::span<const std::size_t> dims, std::size_t per_dim, std::uint64_t seed);

// Largest |deletion trace step-sum - exact_deletion_sum| over the same
// instances, with the trace computed by the metrics module in logit mode, k=d.
struct AgreementReport {
  std::size_t traces = 0;
  double max_abs_error = 0.0;
};
AgreementReport check_trace_agreement(std::span<const std::size_t> dims, std::size_t per_dim, std::uint64_t seed);

std::string format_ordering(std::span<const std::size_t> ordering);  // 1-based, e.g. (3,1,2)

}  // namespace faithlab
