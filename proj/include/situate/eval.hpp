#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "situate/annotation.hpp"
#include "situate/search.hpp"

namespace situate {

/// An iteration count or "Failure". Failure orders above every count.
class IterCount {
 public:
  static IterCount failure() { return IterCount(); }
  static IterCount of(int n) { return IterCount(n); }
  static IterCount from(const std::optional<int>& n) { return n ? of(*n) : failure(); }

  bool failed() const { return !value_; }
  int value() const { return *value_; }
  std::string str() const { return failed() ? "Failure" : std::to_string(*value_); }

  std::strong_ordering operator<=>(const IterCount& other) const {
    if (failed() != other.failed()) {
      return failed() ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    if (failed()) return std::strong_ordering::equal;
    return *value_ <=> *other.value_;
  }
  bool operator==(const IterCount& other) const { return (*this <=> other) == 0; }

 private:
  IterCount() = default;
  explicit IterCount(int n) : value_(n) {}
  std::optional<int> value_;
};

/// Lower-middle order statistic with failures ranked last; never averages,
/// so the result is always an observed value or Failure.
IterCount median(std::span<const IterCount> values);

/// Completed runs contribute total_iterations; the rest are failures.
IterCount median_iterations(std::span<const RunResult> results);

struct Intervals {
  IterCount t01 = IterCount::failure();
  IterCount t12 = IterCount::failure();
  IterCount t23 = IterCount::failure();
  bool operator==(const Intervals&) const = default;
};

/// Iterations to the first final detection, first to second, second to third.
Intervals image_intervals(const RunResult& result);
/// Per-interval medians across images.
Intervals detection_interval_stats(std::span<const RunResult> results);

/// Entry n-1 counts the runs completed within n iterations, n = 1..max_iterations.
std::vector<int> cumulative_curve(std::span<const RunResult> results, int max_iterations);

struct ImageRun {
  std::string image_id;
  int fold = 0;
  RunResult result;
};

struct MethodReport {
  std::string token;
  std::string label;
  std::vector<ImageRun> runs;
  IterCount median = IterCount::failure();
  int failures = 0;
  std::vector<int> cumulative;
  Intervals intervals;

  std::vector<RunResult> results() const;
  /// Recomputes median, failures, cumulative and intervals from runs.
  void summarize(int max_iterations);
};

inline constexpr int kReportFormatVersion = 1;
inline constexpr const char* kProposalSetToken = "proposal-set";

struct ExperimentReport {
  int folds = 0;
  std::uint64_t master_seed = 0;
  int max_iterations = 0;
  double cell_size = 1;
  std::vector<MethodReport> methods;
};

struct ExperimentOptions {
  int folds = 10;
  std::uint64_t master_seed = 0;
  int max_iterations = 1000;
  double cell_size = 1.0;
  int jobs = 1;
  /// Directory with <image_id>.jsonl proposal files; adds a "proposal-set" method.
  std::optional<std::filesystem::path> proposals_dir;
  /// Called after each test image finishes (done, total).
  std::function<void(std::size_t, std::size_t)> progress;
};

/// Seed for one (method, fold, image) run; independent of which other
/// methods are in the experiment.
std::uint64_t run_seed(std::uint64_t master_seed, const std::string& token, int fold,
                       const std::string& image_id);

/// Cross-validated benchmark: learn on each training split, run every method
/// on every test image, pool results per method.
ExperimentReport run_experiment(const std::vector<SituationAnnotation>& dataset,
                                const std::vector<MethodConfig>& methods,
                                const ExperimentOptions& options);

/// Salience prior used for an annotation: from its image file when it has
/// one, otherwise from a deterministic rendering of the scene.
SalienceMap salience_for(const SituationAnnotation& annotation, double cell_size);

}  // namespace situate
