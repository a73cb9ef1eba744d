#include "situate/eval.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "situate/datagen.hpp"
#include "situate/error.hpp"
#include "situate/image.hpp"
#include "situate/rng.hpp"

namespace situate {

IterCount median(std::span<const IterCount> values) {
  if (values.empty()) throw InvalidInput("median of an empty set");
  std::vector<IterCount> sorted(values.begin(), values.end());
  const std::size_t mid = (sorted.size() - 1) / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid), sorted.end());
  return sorted[mid];
}

IterCount median_iterations(std::span<const RunResult> results) {
  std::vector<IterCount> counts;
  counts.reserve(results.size());
  for (const auto& r : results) {
    counts.push_back(r.completed ? IterCount::of(r.total_iterations) : IterCount::failure());
  }
  return median(counts);
}

Intervals image_intervals(const RunResult& result) {
  Intervals out;
  const auto& d = result.detection_order;
  if (d.size() >= 1) out.t01 = IterCount::of(d[0].iteration);
  if (d.size() >= 2) out.t12 = IterCount::of(d[1].iteration - d[0].iteration);
  if (d.size() >= 3) out.t23 = IterCount::of(d[2].iteration - d[1].iteration);
  return out;
}

Intervals detection_interval_stats(std::span<const RunResult> results) {
  if (results.empty()) throw InvalidInput("interval statistics of an empty set");
  std::vector<IterCount> t01, t12, t23;
  for (const auto& r : results) {
    const Intervals i = image_intervals(r);
    t01.push_back(i.t01);
    t12.push_back(i.t12);
    t23.push_back(i.t23);
  }
  return {median(t01), median(t12), median(t23)};
}

std::vector<int> cumulative_curve(std::span<const RunResult> results, int max_iterations) {
  if (max_iterations < 1) throw InvalidInput("max_iterations must be at least 1");
  std::vector<int> curve(static_cast<std::size_t>(max_iterations), 0);
  for (const auto& r : results) {
    if (r.completed && r.total_iterations >= 1 && r.total_iterations <= max_iterations) {
      ++curve[static_cast<std::size_t>(r.total_iterations - 1)];
    }
  }
  for (std::size_t i = 1; i < curve.size(); ++i) curve[i] += curve[i - 1];
  return curve;
}

std::vector<RunResult> MethodReport::results() const {
  std::vector<RunResult> out;
  out.reserve(runs.size());
  for (const auto& r : runs) out.push_back(r.result);
  return out;
}

void MethodReport::summarize(int max_iterations) {
  const auto rs = results();
  failures = static_cast<int>(std::count_if(rs.begin(), rs.end(), [](const RunResult& r) { return !r.completed; }));
  cumulative = cumulative_curve(rs, max_iterations);
  if (rs.empty()) {
    median = IterCount::failure();
    intervals = {};
  } else {
    median = median_iterations(rs);
    intervals = detection_interval_stats(rs);
  }
}

std::uint64_t run_seed(std::uint64_t master_seed, const std::string& token, int fold,
                       const std::string& image_id) {
  const std::string key = token + "|" + std::to_string(fold) + "|" + image_id;
  return splitmix64(master_seed ^ fnv1a(key));
}

SalienceMap salience_for(const SituationAnnotation& annotation, double cell_size) {
  const ImageFrame frame = annotation.frame();
  if (annotation.image_path) return compute_salience(load_pnm(*annotation.image_path), frame, cell_size);
  return compute_salience(render_scene(annotation, fnv1a("scene|" + annotation.image_id)), frame,
                          cell_size);
}

namespace {

[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const IoError& e) {
    throw IoError(context + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(context + ": " + e.what());
  } catch (const InsufficientData& e) {
    throw InsufficientData(context + ": " + e.what());
  } catch (const InvalidDataset& e) {
    throw InvalidDataset(context + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw InvalidInput(context + ": " + e.what());
  } catch (const Error& e) {
    throw Error(context + ": " + e.what());
  }
}

// Runs fn(i) for i in [0, count) on `jobs` threads; rethrows the first error.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn fn) {
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 256));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < std::min(workers, count); ++t) threads.emplace_back(work);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

ExperimentReport run_experiment(const std::vector<SituationAnnotation>& dataset,
                                const std::vector<MethodConfig>& methods,
                                const ExperimentOptions& options) {
  if (options.max_iterations < 1) throw InvalidInput("max_iterations must be at least 1");
  if (dataset.size() < static_cast<std::size_t>(std::max(options.folds, 1))) {
    throw InsufficientData("insufficient data: " + std::to_string(dataset.size()) +
                           " annotations for " + std::to_string(options.folds) + " folds");
  }
  const auto folds = split_folds(dataset.size(), options.folds, options.master_seed);
  bool need_model = false, need_salience = false;
  for (const auto& m : methods) {
    need_model |= m.needs_model();
    need_salience |= m.needs_salience();
  }

  std::vector<std::optional<SituationModel>> models(folds.size());
  if (need_model) {
    parallel_for(folds.size(), options.jobs, [&](std::size_t f) {
      std::vector<SituationAnnotation> train;
      train.reserve(folds[f].train.size());
      for (auto i : folds[f].train) train.push_back(dataset[i]);
      try {
        models[f] = SituationModel::learn(train);
      } catch (const Error&) {
        rethrow_with_context("fold " + std::to_string(f));
      }
    });
  }

  struct Item {
    int fold;
    std::size_t index;
  };
  std::vector<Item> items;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (auto i : folds[f].test) items.push_back({static_cast<int>(f), i});
  }
  const bool with_proposals = options.proposals_dir.has_value();
  const std::size_t columns = methods.size() + (with_proposals ? 1 : 0);
  std::vector<std::vector<RunResult>> results(items.size(), std::vector<RunResult>(columns));
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  parallel_for(items.size(), options.jobs, [&](std::size_t k) {
    const Item& item = items[k];
    const SituationAnnotation& ann = dataset[item.index];
    const std::string context = "fold " + std::to_string(item.fold) + ", image '" + ann.image_id + "'";
    try {
      std::optional<SalienceMap> salience;
      if (need_salience) salience = salience_for(ann, options.cell_size);
      const SituationModel* model = models[static_cast<std::size_t>(item.fold)] ? &*models[static_cast<std::size_t>(item.fold)] : nullptr;
      for (std::size_t m = 0; m < methods.size(); ++m) {
        MethodConfig config = methods[m];
        config.max_iterations = options.max_iterations;
        config.cell_size = options.cell_size;
        config.seed = run_seed(options.master_seed, config.token(), item.fold, ann.image_id);
        Rng rng(config.seed);
        results[k][m] = run_image(model, salience ? &*salience : nullptr, config, ann, rng);
      }
      if (with_proposals) {
        const auto proposals = load_proposals(*options.proposals_dir / (ann.image_id + ".jsonl"));
        Rng rng(run_seed(options.master_seed, kProposalSetToken, item.fold, ann.image_id));
        results[k][methods.size()] = evaluate_proposal_set(proposals, ann, rng, options.max_iterations);
      }
    } catch (const Error&) {
      rethrow_with_context(context);
    }
    const std::size_t finished = ++done;
    if (options.progress) {
      std::lock_guard lock(progress_mutex);
      options.progress(finished, items.size());
    }
  });

  ExperimentReport report;
  report.folds = options.folds;
  report.master_seed = options.master_seed;
  report.max_iterations = options.max_iterations;
  report.cell_size = options.cell_size;
  for (std::size_t m = 0; m < columns; ++m) {
    MethodReport mr;
    if (m < methods.size()) {
      mr.token = methods[m].token();
      mr.label = methods[m].label();
    } else {
      mr.token = kProposalSetToken;
      mr.label = "Proposal set";
    }
    for (std::size_t k = 0; k < items.size(); ++k) {
      mr.runs.push_back({dataset[items[k].index].image_id, items[k].fold, std::move(results[k][m])});
    }
    mr.summarize(options.max_iterations);
    report.methods.push_back(std::move(mr));
  }
  return report;
}

}  // namespace situate
