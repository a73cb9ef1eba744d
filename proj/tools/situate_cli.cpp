// Command-line entry point: learn, run, bench, gen, salience, eval-proposals.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "situate/datagen.hpp"
#include "situate/error.hpp"
#include "situate/eval.hpp"
#include "situate/image.hpp"
#include "situate/report.hpp"
#include "situate/salience.hpp"
#include "situate/search.hpp"
#include "situate/serialize.hpp"
#include "situate/svg.hpp"

namespace fs = std::filesystem;
using namespace situate;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

int default_jobs() {
  if (const char* env = std::getenv("SITUATE_JOBS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid SITUATE_JOBS='" << env << "'\n";
  }
  return 1;
}

struct LearnArgs {
  std::string data, out;
};

struct RunArgs {
  std::string model, annotation, method = "uniform-learned-learned", trace, snapshots;
  std::uint64_t seed = 0;
  int max_iter = 1000;
  double cell_size = 1.0;
};

struct BenchArgs {
  std::string data, methods = "all", out, proposals;
  int folds = 10;
  std::uint64_t seed = 0;
  int max_iter = 1000;
  int jobs = 1;
  double cell_size = 1.0;
  bool quiet = false;
};

struct GenArgs {
  int n = 500;
  std::uint64_t seed = 0;
  std::string out, config;
  bool images = false;
};

struct SalienceArgs {
  std::string image, annotation, out;
  double cell_size = 1.0;
};

struct EvalProposalArgs {
  std::string proposals, annotation;
  std::uint64_t seed = 0;
  int budget = 1000;
};

void cmd_learn(const LearnArgs& a) {
  const auto dataset = load_dataset(a.data);
  const SituationModel model = SituationModel::learn(dataset, CategorySet::dog_walking());
  save_model(model, a.out);
  std::cerr << "learned model from " << dataset.size() << " annotations -> " << a.out << "\n";
}

void cmd_run(const RunArgs& a) {
  MethodConfig config = MethodConfig::parse(a.method);
  config.seed = a.seed;
  config.max_iterations = a.max_iter;
  config.cell_size = a.cell_size;
  config.log_proposals = !a.trace.empty();
  config.validate();

  const SituationAnnotation annotation = load_annotation(a.annotation);
  std::optional<SituationModel> model;
  if (!a.model.empty()) {
    model = load_model(a.model);
  } else if (config.needs_model()) {
    throw InvalidInput("method '" + config.token() + "' needs --model");
  }
  std::optional<SalienceMap> salience;
  if (config.needs_salience()) salience = salience_for(annotation, config.cell_size);

  const ImageFrame frame = annotation.frame();
  const CategorySet categories = CategorySet::dog_walking();
  ModelProposalSource source(model ? &*model : nullptr, salience ? &*salience : nullptr, config,
                             frame, categories);

  int snapshots = 0;
  ChangeObserver observer;
  if (!a.snapshots.empty()) {
    fs::create_directories(a.snapshots);
    observer = [&](int iteration, const Workspace& workspace) {
      std::vector<CategorySearchDist> dists;
      for (const auto& c : categories.names) dists.push_back(source.current(c));
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%03d_iter%04d.svg", snapshots++, iteration);
      write_file(fs::path(a.snapshots) / name, workspace_snapshot_svg(frame, workspace, dists, iteration));
    };
  }

  Rng rng(config.seed);
  const RunResult result = run_image(source, config, annotation, rng, categories, observer);

  if (!a.trace.empty()) {
    std::string lines;
    for (const auto& rec : result.log) {
      const BoundingBox& b = rec.proposal.box;
      nlohmann::ordered_json j{{"iteration", rec.iteration},
                               {"category", rec.proposal.category},
                               {"cx", b.cx},
                               {"cy", b.cy},
                               {"w", b.w},
                               {"h", b.h},
                               {"score", rec.proposal.score},
                               {"workspace_changed", rec.workspace_changed}};
      lines += j.dump() + "\n";
    }
    write_file(a.trace, lines);
  }
  nlohmann::ordered_json out = run_result_to_json(result);
  out["image_id"] = annotation.image_id;
  out["method"] = config.token();
  std::cout << out.dump(2) << "\n";
}

void cmd_bench(const BenchArgs& a) {
  const auto methods = MethodConfig::parse_list(a.methods);
  const auto dataset = load_dataset(a.data);
  ExperimentOptions options;
  options.folds = a.folds;
  options.master_seed = a.seed;
  options.max_iterations = a.max_iter;
  options.cell_size = a.cell_size;
  options.jobs = a.jobs;
  if (!a.proposals.empty()) options.proposals_dir = fs::path(a.proposals);
  if (!a.quiet) {
    options.progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 25 == 0) std::cerr << "\r" << done << "/" << total << " images" << std::flush;
      if (done == total) std::cerr << "\n";
    };
  }
  const ExperimentReport report = run_experiment(dataset, methods, options);
  emit_report(report, a.out);
  std::cout << summary_csv(report);
}

void cmd_gen(const GenArgs& a) {
  GeneratorConfig config = a.config.empty() ? GeneratorConfig::dog_walking()
                                            : generator_config_from_json(read_json_file(a.config));
  Rng rng(a.seed);
  auto annotations = generate_synthetic(config, a.n, rng);
  fs::create_directories(a.out);
  if (a.images) {
    for (auto& ann : annotations) {
      const std::string name = ann.image_id + ".ppm";
      save_pnm(render_scene(ann, fnv1a("scene|" + ann.image_id)), fs::path(a.out) / name);
      ann.image_path = name;
    }
  }
  save_dataset(annotations, a.out);
  std::cerr << "wrote " << annotations.size() << " annotations to " << a.out << "\n";
}

void cmd_salience(const SalienceArgs& a) {
  if (a.image.empty() == a.annotation.empty()) {
    throw InvalidInput("give exactly one of --image or --annotation");
  }
  if (!a.image.empty()) {
    const Image image = load_pnm(a.image);
    const ImageFrame frame = normalize_frame(image.width, image.height);
    save_salience(compute_salience(image, frame, a.cell_size), a.out);
  } else {
    save_salience(salience_for(load_annotation(a.annotation), a.cell_size), a.out);
  }
}

void cmd_eval_proposals(const EvalProposalArgs& a) {
  const auto proposals = load_proposals(a.proposals);
  const SituationAnnotation annotation = load_annotation(a.annotation);
  Rng rng(a.seed);
  const RunResult result = evaluate_proposal_set(proposals, annotation, rng, a.budget);
  nlohmann::ordered_json out = run_result_to_json(result);
  out["image_id"] = annotation.image_id;
  out["method"] = kProposalSetToken;
  std::cout << out.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Situation-guided active object localization"};
  app.require_subcommand(1);

  LearnArgs learn;
  auto* learn_cmd = app.add_subcommand("learn", "Learn a situation model from an annotation directory");
  learn_cmd->add_option("--data", learn.data, "Directory of annotation JSON files")->required();
  learn_cmd->add_option("--out", learn.out, "Output model JSON")->required();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Search one annotated image and print the result as JSON");
  run_cmd->add_option("--model", run.model, "Model JSON from 'learn'");
  run_cmd->add_option("--image-annotation", run.annotation, "Annotation JSON of the image")->required();
  run_cmd->add_option("--seed", run.seed, "Random seed");
  run_cmd->add_option("--method", run.method, "Method token")->capture_default_str();
  run_cmd->add_option("--max-iter", run.max_iter, "Iteration budget")->capture_default_str();
  run_cmd->add_option("--cell-size", run.cell_size, "Location grid cell size")->capture_default_str();
  run_cmd->add_option("--trace", run.trace, "Write every proposal as JSON lines to this file");
  run_cmd->add_option("--snapshots", run.snapshots, "Write an SVG per workspace change to this directory");

  BenchArgs bench;
  bench.jobs = default_jobs();
  auto* bench_cmd = app.add_subcommand("bench", "Cross-validated benchmark over the method matrix");
  bench_cmd->add_option("--data", bench.data, "Directory of annotation JSON files")->required();
  bench_cmd->add_option("--methods", bench.methods,
                        "'all' or comma-separated tokens: " + [] {
                          std::string s;
                          for (const auto& t : MethodConfig::standard_tokens()) s += (s.empty() ? "" : ", ") + t;
                          return s;
                        }())
      ->capture_default_str();
  bench_cmd->add_option("--folds", bench.folds, "Number of folds")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Master seed")->capture_default_str();
  bench_cmd->add_option("--out", bench.out, "Report directory")->required();
  bench_cmd->add_option("--max-iter", bench.max_iter, "Iteration budget per image")->capture_default_str();
  bench_cmd->add_option("--jobs", bench.jobs, "Worker threads (default: SITUATE_JOBS or 1)")->capture_default_str();
  bench_cmd->add_option("--cell-size", bench.cell_size, "Location grid cell size")->capture_default_str();
  bench_cmd->add_option("--proposals", bench.proposals,
                        "Directory of <image_id>.jsonl proposal sets; adds a proposal-set row");
  bench_cmd->add_flag("--quiet", bench.quiet, "No progress output");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic annotation dataset");
  gen_cmd->add_option("--n", gen.n, "Number of annotations")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--config", gen.config, "Generator configuration JSON");
  gen_cmd->add_flag("--images", gen.images, "Also render a PPM image per annotation");

  SalienceArgs sal;
  auto* sal_cmd = app.add_subcommand("salience", "Compute a salience map");
  sal_cmd->add_option("--image", sal.image, "PGM/PPM image");
  sal_cmd->add_option("--annotation", sal.annotation, "Annotation JSON (uses its image or a rendered scene)");
  sal_cmd->add_option("--out", sal.out, "Output salience file")->required();
  sal_cmd->add_option("--cell-size", sal.cell_size, "Location grid cell size")->capture_default_str();

  EvalProposalArgs ep;
  auto* ep_cmd = app.add_subcommand("eval-proposals", "Evaluate a fixed proposal set on one image");
  ep_cmd->add_option("--proposals", ep.proposals, "JSON lines of {x,y,w,h} boxes")->required();
  ep_cmd->add_option("--image-annotation", ep.annotation, "Annotation JSON of the image")->required();
  ep_cmd->add_option("--seed", ep.seed, "Random seed")->capture_default_str();
  ep_cmd->add_option("--budget", ep.budget, "Maximum proposals drawn")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitValidation;
  }

  try {
    if (*learn_cmd) cmd_learn(learn);
    else if (*run_cmd) cmd_run(run);
    else if (*bench_cmd) cmd_bench(bench);
    else if (*gen_cmd) cmd_gen(gen);
    else if (*sal_cmd) cmd_salience(sal);
    else if (*ep_cmd) cmd_eval_proposals(ep);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
