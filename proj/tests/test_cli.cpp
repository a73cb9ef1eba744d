#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "situate/datagen.hpp"
#include "situate/image.hpp"
#include "situate/salience.hpp"
#include "situate/serialize.hpp"

using namespace situate;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "situate_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Outcome cli(const std::string& args) {
  const auto err_path = workdir() / "stderr.txt";
  const std::string cmd = std::string(SITUATE_CLI) + " " + args + " 2> " + err_path.string();
  Outcome o;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return o;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) o.out.append(buf, n);
  const int status = pclose(pipe);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.err = read_file(err_path);
  return o;
}

std::string p(const fs::path& path) { return path.string(); }

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ext;
  return n;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// A 20-image dataset shared by several tests.
const fs::path& small_data() {
  static const fs::path dir = [] {
    const auto d = workdir() / "data20";
    const Outcome o = cli("gen --n 20 --seed 1 --out " + p(d));
    EXPECT_EQ(o.code, 0) << o.err;
    return d;
  }();
  return dir;
}

}  // namespace

TEST(Cli, HelpForEverySubcommand) {
  const std::map<std::string, std::vector<std::string>> flags{
      {"learn", {"--data", "--out"}},
      {"run", {"--model", "--image-annotation", "--seed", "--trace", "--snapshots", "--method"}},
      {"bench", {"--data", "--methods", "--folds", "--seed", "--out", "--max-iter", "--jobs", "--proposals"}},
      {"gen", {"--n", "--seed", "--out", "--config", "--images"}},
      {"salience", {"--image", "--annotation", "--out", "--cell-size"}},
      {"eval-proposals", {"--proposals", "--image-annotation", "--seed", "--budget"}}};
  for (const auto& [cmd, names] : flags) {
    const Outcome o = cli(cmd + " --help");
    EXPECT_EQ(o.code, 0) << cmd;
    for (const auto& f : names) EXPECT_NE(o.out.find(f), std::string::npos) << cmd << " " << f;
  }
  EXPECT_EQ(cli("--help").code, 0);
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
}

TEST(Cli, GenWritesFilesIdempotently) {
  const auto a = workdir() / "gen_a", b = workdir() / "gen_b";
  ASSERT_EQ(cli("gen --n 30 --seed 1 --out " + p(a)).code, 0);
  ASSERT_EQ(cli("gen --n 30 --seed 1 --out " + p(b)).code, 0);
  EXPECT_EQ(count_files(a, ".json"), 30u);
  for (const auto& e : fs::directory_iterator(a)) {
    EXPECT_EQ(read_file(e.path()), read_file(b / e.path().filename()));
  }
}

TEST(Cli, GenWithImagesAndConfig) {
  const auto cfg = workdir() / "gen.json";
  write_file(cfg, generator_config_to_json(GeneratorConfig::dog_walking()).dump(2));
  const auto dir = workdir() / "gen_images";
  ASSERT_EQ(cli("gen --n 3 --seed 2 --images --config " + p(cfg) + " --out " + p(dir)).code, 0);
  EXPECT_EQ(count_files(dir, ".ppm"), 3u);
  const auto ds = load_dataset(dir);
  ASSERT_TRUE(ds[0].image_path);
  EXPECT_TRUE(fs::exists(*ds[0].image_path));
}

TEST(Cli, LearnAndLoad) {
  const auto model = workdir() / "model.json";
  const Outcome o = cli("learn --data " + p(small_data()) + " --out " + p(model));
  ASSERT_EQ(o.code, 0) << o.err;
  const auto loaded = load_model(model);
  const auto direct = SituationModel::learn(load_dataset(small_data()));
  EXPECT_TRUE(loaded == direct);
}

TEST(Cli, LearnEmptyDirectoryFails) {
  const auto empty = workdir() / "empty";
  fs::create_directories(empty);
  const Outcome o = cli("learn --data " + p(empty) + " --out " + p(workdir() / "never.json"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("insufficient data"), std::string::npos) << o.err;
  EXPECT_EQ(cli("learn --data " + p(workdir() / "no_such_dir") + " --out x.json").code, 2);
}

TEST(Cli, RunMissingFilesExitTwo) {
  EXPECT_EQ(cli("run --model " + p(workdir() / "missing.json") + " --image-annotation " +
                p(small_data() / "synth_00000.json"))
                .code,
            2);
  EXPECT_EQ(cli("run --method uniform-uniform-none --image-annotation " + p(workdir() / "missing.json")).code, 2);
}

TEST(Cli, RunTraceAndSnapshots) {
  const auto model = workdir() / "model_run.json";
  ASSERT_EQ(cli("learn --data " + p(small_data()) + " --out " + p(model)).code, 0);
  const auto trace = workdir() / "trace.jsonl";
  const auto snaps = workdir() / "snaps";
  const Outcome o = cli("run --model " + p(model) + " --image-annotation " + p(small_data() / "synth_00003.json") +
                        " --seed 4 --cell-size 4 --trace " + p(trace) + " --snapshots " + p(snaps));
  ASSERT_EQ(o.code, 0) << o.err;
  const auto result = nlohmann::json::parse(o.out);
  const std::string lines = read_file(trace);
  EXPECT_EQ(count_lines(lines), result.at("total_iterations").get<std::size_t>());
  std::size_t changes = 0;
  std::istringstream in(lines);
  for (std::string line; std::getline(in, line);) changes += nlohmann::json::parse(line).at("workspace_changed").get<bool>();
  EXPECT_EQ(count_files(snaps, ".svg"), changes);
  EXPECT_GT(changes, 0u);
  for (const auto& e : fs::directory_iterator(snaps)) {
    std::string why;
    ASSERT_TRUE(oracle::well_formed_xml(read_file(e.path()), &why)) << e.path() << why;
  }
  // Same inputs, same output.
  EXPECT_EQ(cli("run --model " + p(model) + " --image-annotation " + p(small_data() / "synth_00003.json") +
                " --seed 4 --cell-size 4")
                .out,
            o.out);
}

TEST(Cli, RunPointMassModelCompletesQuickly) {
  const auto dir = workdir() / "dup";
  std::vector<SituationAnnotation> dup;
  for (int i = 0; i < 20; ++i) dup.push_back(fixtures::scene("dup_" + std::to_string(100 + i)));
  save_dataset(dup, dir);
  const auto model = workdir() / "dup_model.json";
  ASSERT_EQ(cli("learn --data " + p(dir) + " --out " + p(model)).code, 0);
  const Outcome o = cli("run --model " + p(model) + " --image-annotation " + p(dir / "dup_100.json") +
                        " --seed 1 --method uniform-learned-learned-noprov");
  ASSERT_EQ(o.code, 0) << o.err;
  const auto r = nlohmann::json::parse(o.out);
  EXPECT_TRUE(r.at("completed").get<bool>());
  const auto& order = r.at("detection_order");
  EXPECT_LE(order[2].at("iteration").get<int>() - order[0].at("iteration").get<int>(), 8);
}

TEST(Cli, BenchInvalidMethod) {
  const Outcome o = cli("bench --data " + p(small_data()) + " --methods bogus --out " + p(workdir() / "bad"));
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("salience-learned-learned"), std::string::npos) << o.err;
}

TEST(Cli, BenchDeterministicAndBudget) {
  const auto a = workdir() / "bench_a", b = workdir() / "bench_b";
  const std::string common = "bench --data " + p(small_data()) + " --methods all --folds 1 --seed 7 --max-iter 10 --cell-size 4 --quiet --out ";
  ASSERT_EQ(cli(common + p(a)).code, 0);
  ASSERT_EQ(cli(common + p(b) + " --jobs 2").code, 0);
  for (const char* f : {"report.json", "summary.csv", "medians.svg", "cumulative.svg", "intervals.svg"}) {
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  }
  const auto report = read_json_file(a / "report.json");
  EXPECT_EQ(report.at("methods").size(), 6u);
  for (const auto& m : report.at("methods"))
    for (const auto& r : m.at("runs")) EXPECT_LE(r.at("total_iterations").get<int>(), 10);
}

TEST(Cli, BenchWithProposalSets) {
  const auto props = workdir() / "props";
  fs::create_directories(props);
  for (const auto& ann : load_dataset(small_data())) {
    std::string lines;
    for (const auto& [c, b] : ann.objects) lines += nlohmann::json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}.dump() + "\n";
    write_file(props / (ann.image_id + ".jsonl"), lines);
  }
  const auto out = workdir() / "bench_props";
  const Outcome o = cli("bench --data " + p(small_data()) + " --methods uniform-uniform-none --folds 2 --max-iter 50 --cell-size 4 --quiet --proposals " + p(props) + " --out " + p(out));
  ASSERT_EQ(o.code, 0) << o.err;
  const auto report = read_json_file(out / "report.json");
  ASSERT_EQ(report.at("methods").size(), 2u);
  EXPECT_EQ(report.at("methods")[1].at("token"), "proposal-set");
  EXPECT_EQ(report.at("methods")[1].at("failures"), 0);
}

TEST(Cli, SalienceConstantImageIsUniform) {
  const auto img = workdir() / "flat.pgm";
  save_pnm(Image::grayscale(100, 80, std::vector<double>(8000, 0.5)), img);
  const auto out = workdir() / "flat.sal";
  ASSERT_EQ(cli("salience --image " + p(img) + " --cell-size 5 --out " + p(out)).code, 0);
  const auto map = load_salience(out, normalize_frame(100, 80), 5);
  const double expected = 1.0 / static_cast<double>(map.distribution().num_cells());
  for (double v : map.distribution().cells()) ASSERT_NEAR(v, expected, 1e-15);
  EXPECT_EQ(cli("salience --out " + p(out)).code, 1);
  EXPECT_EQ(cli("salience --image " + p(workdir() / "nope.pgm") + " --out " + p(out)).code, 2);
}

TEST(Cli, EvalProposalsMatchesShuffleOracle) {
  const auto ann = fixtures::scene("planted");
  const auto ann_path = workdir() / "planted.json";
  write_file(ann_path, annotation_to_json(ann).dump());
  const std::size_t n = 2000, planted[] = {5, 700, 1999};
  std::vector<CornerBox> boxes(n, CornerBox{600, 440, 30, 30});
  std::size_t k = 0;
  for (const auto& [c, b] : ann.objects) boxes[planted[k++]] = b;
  std::string lines;
  for (const auto& b : boxes) lines += nlohmann::json{{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}.dump() + "\n";
  const auto props = workdir() / "planted.jsonl";
  write_file(props, lines);
  for (int seed : {1, 2, 3}) {
    const Outcome o = cli("eval-proposals --proposals " + p(props) + " --image-annotation " + p(ann_path) +
                          " --seed " + std::to_string(seed));
    ASSERT_EQ(o.code, 0) << o.err;
    const auto r = nlohmann::json::parse(o.out);
    Rng rng(static_cast<std::uint64_t>(seed));
    const auto order = oracle::replay_shuffle(n, 1000, rng);
    int last = 0, hits = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] == planted[0] || order[i] == planted[1] || order[i] == planted[2]) {
        ++hits;
        last = static_cast<int>(i + 1);
      }
    }
    EXPECT_EQ(r.at("completed").get<bool>(), hits == 3);
    EXPECT_EQ(r.at("total_iterations").get<int>(), hits == 3 ? last : 1000);
  }
}
