#include <gtest/gtest.h>

#include <deque>
#include <filesystem>
#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "situate/error.hpp"
#include "situate/eval.hpp"
#include "situate/search.hpp"

using namespace situate;
namespace fs = std::filesystem;

namespace {

const CategorySet kCats = CategorySet::dog_walking();

// Returns the same box every time; the scripted scorer decides the outcome.
class FixedSource : public ProposalSource {
 public:
  ObjectProposal propose(const std::string& category, Rng&) override {
    ++proposed[category];
    return {category, BoundingBox{0, 0, 10, 10}, 0};
  }
  void on_workspace_change(const Workspace&, const std::string& changed) override { changes.push_back(changed); }
  std::map<std::string, int> proposed;
  std::vector<std::string> changes;
};

// Pops scores per category; 0 once a category's script runs out.
struct ScriptedScorer {
  std::map<std::string, std::deque<double>> scripts;
  double operator()(const ObjectProposal& p) {
    auto& q = scripts[p.category];
    if (q.empty()) return 0.0;
    const double s = q.front();
    q.pop_front();
    return s;
  }
};

// Proposes the ground-truth box of the requested category.
class TruthSource : public ProposalSource {
 public:
  explicit TruthSource(std::map<std::string, BoundingBox> truth) : truth_(std::move(truth)) {}
  ObjectProposal propose(const std::string& category, Rng&) override { return {category, truth_.at(category), 0}; }

 private:
  std::map<std::string, BoundingBox> truth_;
};

MethodConfig loop_config(int max_iterations = 1000, bool provisional = true) {
  MethodConfig c;
  c.max_iterations = max_iterations;
  c.provisional_enabled = provisional;
  c.log_proposals = true;
  return c;
}

const SituationModel& model() {
  static const SituationModel m = SituationModel::learn(fixtures::synthetic(300, 41), kCats);
  return m;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("situate_" + name); }

}  // namespace

TEST(ScoreProposal, OracleValues) {
  const std::map<std::string, BoundingBox> truth{{"dog", BoundingBox::from_edges(0, 0, 10, 10)}};
  EXPECT_DOUBLE_EQ(score_proposal(truth, {"dog", truth.at("dog"), 0}), 1.0);
  EXPECT_DOUBLE_EQ(score_proposal(truth, {"dog", BoundingBox::from_edges(20, 20, 30, 30), 0}), 0.0);
  EXPECT_DOUBLE_EQ(score_proposal(truth, {"dog", BoundingBox::from_edges(5, 0, 15, 10), 0}),
                   oracle::pixel_count_iou({0, 0, 10, 10}, {5, 0, 15, 10}));
  EXPECT_THROW(score_proposal(truth, {"cat", truth.at("dog"), 0}), InvalidInput);
}

TEST(RunLoop, ProvisionalReplacedThenFinal) {
  FixedSource source;
  ScriptedScorer scorer{{{"dog", {0.3, 0.4, 0.55}}}};
  Rng rng(1);
  const auto r = run_loop(kCats, loop_config(200), source, std::ref(scorer), rng);
  std::vector<std::pair<double, SlotState>> dog;
  for (const auto& rec : r.log)
    if (rec.proposal.category == "dog") dog.emplace_back(rec.proposal.score, rec.slot_after);
  ASSERT_GE(dog.size(), 3u);
  EXPECT_EQ(dog[0], std::make_pair(0.3, SlotState::kProvisional));
  EXPECT_EQ(dog[1], std::make_pair(0.4, SlotState::kProvisional));
  EXPECT_EQ(dog[2], std::make_pair(0.55, SlotState::kFinal));
  EXPECT_EQ(dog.size(), 3u);  // never searched again once final
  ASSERT_TRUE(r.final_iteration.at("dog"));
  EXPECT_FALSE(r.completed);
  EXPECT_EQ(std::count(source.changes.begin(), source.changes.end(), "dog"), 3);
}

TEST(RunLoop, LowerOrEqualProvisionalDoesNotReplace) {
  FixedSource source;
  ScriptedScorer scorer{{{"leash", {0.4, 0.3, 0.4, 0.2, 0.45}}}};
  Rng rng(2);
  const auto r = run_loop(kCats, loop_config(100), source, std::ref(scorer), rng);
  std::vector<bool> changed;
  for (const auto& rec : r.log)
    if (rec.proposal.category == "leash" && rec.proposal.score > 0) changed.push_back(rec.workspace_changed);
  EXPECT_EQ(changed, (std::vector<bool>{true, false, false, false, true}));
}

TEST(RunLoop, ThresholdBoundaries) {
  FixedSource source;
  ScriptedScorer scorer{{{"dog", {0.2499999, 0.25}}, {"leash", {0.4999999, 0.5}}}};
  Rng rng(3);
  const auto r = run_loop(kCats, loop_config(300), source, std::ref(scorer), rng);
  std::map<std::string, std::vector<SlotState>> states;
  for (const auto& rec : r.log)
    if (rec.proposal.score > 0) states[rec.proposal.category].push_back(rec.slot_after);
  EXPECT_EQ(states["dog"], (std::vector<SlotState>{SlotState::kEmpty, SlotState::kProvisional}));
  EXPECT_EQ(states["leash"], (std::vector<SlotState>{SlotState::kProvisional, SlotState::kFinal}));
}

TEST(RunLoop, NoProvisionalWhenDisabled) {
  FixedSource source;
  ScriptedScorer scorer{{{"dog", {0.3, 0.45, 0.6}}, {"leash", {0.49}}}};
  Rng rng(4);
  const auto r = run_loop(kCats, loop_config(200, false), source, std::ref(scorer), rng);
  for (const auto& rec : r.log) EXPECT_NE(rec.slot_after, SlotState::kProvisional);
  EXPECT_TRUE(r.final_iteration.at("dog"));
}

TEST(RunLoop, AlwaysZeroFailsAfterBudget) {
  FixedSource source;
  Rng rng(5);
  const auto r = run_loop(kCats, loop_config(137), source, [](const ObjectProposal&) { return 0.0; }, rng);
  EXPECT_FALSE(r.completed);
  EXPECT_EQ(r.total_iterations, 137);
  for (const auto& [c, it] : r.final_iteration) EXPECT_FALSE(it) << c;
  EXPECT_TRUE(r.detection_order.empty());
  EXPECT_TRUE(source.changes.empty());
}

TEST(RunLoop, ScorerOutOfRangeThrows) {
  FixedSource source;
  Rng rng(5);
  EXPECT_THROW(run_loop(kCats, loop_config(10), source, [](const ObjectProposal&) { return 1.5; }, rng),
               InvalidInput);
}

TEST(RunLoop, TruthSourceMatchesHandSimulation) {
  const auto ann = fixtures::scene();
  TruthSource source(ann.normalized_boxes());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto truth = ann.normalized_boxes();
    const auto r = run_loop(kCats, loop_config(), source,
                            [&](const ObjectProposal& p) { return score_proposal(truth, p); }, rng);
    // Hand simulation: every pick is final, so the picks alone decide the order.
    Rng sim(seed);
    std::vector<std::string> pending = kCats.names;
    std::vector<Detection> expected;
    for (int it = 1; !pending.empty(); ++it) {
      std::uniform_int_distribution<std::size_t> pick(0, pending.size() - 1);
      const auto k = pick(sim);
      expected.push_back({pending[k], it});
      pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(k));
    }
    EXPECT_TRUE(r.completed);
    EXPECT_EQ(r.total_iterations, 3);
    EXPECT_EQ(r.detection_order, expected);
  }
}

TEST(MethodConfig, TokensRoundTrip) {
  for (const auto& t : MethodConfig::standard_tokens()) EXPECT_EQ(MethodConfig::parse(t).token(), t);
  EXPECT_EQ(MethodConfig::parse_list("all").size(), 6u);
  EXPECT_EQ(MethodConfig::parse("salience-learned-learned").situation_model, SituationKind::kLearnedPlusSalience);
  EXPECT_EQ(MethodConfig::parse("uniform-learned-learned").situation_model, SituationKind::kLearned);
  EXPECT_FALSE(MethodConfig::parse("salience-learned-learned-noprov").provisional_enabled);
  EXPECT_FALSE(MethodConfig::parse("uniform-uniform-none").needs_model());
}

TEST(MethodConfig, InvalidTokenListsValidOnes) {
  try {
    MethodConfig::parse("bogus");
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("uniform-learned-learned"), std::string::npos);
  }
  EXPECT_THROW(MethodConfig::parse_list("all,uniform-learned"), InvalidInput);
}

TEST(MethodConfig, ValidateThresholds) {
  MethodConfig c;
  c.thresholds = {0.6, 0.5};
  EXPECT_THROW(c.validate(), InvalidInput);
  c.thresholds = {0.0, 0.5};
  EXPECT_THROW(c.validate(), InvalidInput);
  c.thresholds = {0.5, 0.5};
  EXPECT_NO_THROW(c.validate());
  c.max_iterations = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(RunImage, InvariantsForEveryMethod) {
  const auto data = fixtures::synthetic(6, 77);
  for (const auto& token : MethodConfig::standard_tokens()) {
    MethodConfig config = MethodConfig::parse(token);
    config.cell_size = 4;
    config.max_iterations = 400;
    config.log_proposals = true;
    for (const auto& ann : data) {
      const SalienceMap sal = salience_for(ann, config.cell_size);
      Rng a(9), b(9);
      const auto r = run_image(&model(), &sal, config, ann, a);
      const auto again = run_image(&model(), &sal, config, ann, b);
      ASSERT_EQ(r.log.size(), again.log.size()) << token;
      EXPECT_EQ(r.detection_order, again.detection_order);
      EXPECT_EQ(r.total_iterations, static_cast<int>(r.log.size()));

      const ImageFrame frame = ann.frame();
      std::map<std::string, double> best;
      std::set<std::string> finals;
      for (const auto& rec : r.log) {
        ASSERT_FALSE(finals.count(rec.proposal.category)) << "searched a final category";
        ASSERT_TRUE(contains(frame, rec.proposal.box, 1e-7));
        if (!config.provisional_enabled) ASSERT_NE(rec.slot_after, SlotState::kProvisional);
        if (rec.workspace_changed) {
          ASSERT_GT(rec.proposal.score, best[rec.proposal.category]);
          best[rec.proposal.category] = rec.proposal.score;
        }
        if (rec.slot_after == SlotState::kFinal) finals.insert(rec.proposal.category);
      }
      EXPECT_EQ(r.completed, finals.size() == 3);
      EXPECT_EQ(r.completed, r.detection_order.size() == 3);
    }
  }
}

TEST(RunImage, DegenerateModelCompletesQuickly) {
  std::vector<SituationAnnotation> data(20, fixtures::scene());
  const auto m = SituationModel::learn(data, kCats);
  MethodConfig config = MethodConfig::parse("uniform-learned-learned-noprov");
  Rng rng(3);
  const auto r = run_image(&m, nullptr, config, fixtures::scene(), rng);
  ASSERT_TRUE(r.completed);
  // Once the first object is final, the others are point masses on the truth.
  EXPECT_LE(r.detection_order[2].iteration - r.detection_order[0].iteration, 8);
}

TEST(RunImage, MissingModelOrSalienceThrows) {
  const auto ann = fixtures::scene();
  Rng rng(1);
  EXPECT_THROW(run_image(nullptr, nullptr, MethodConfig::parse("uniform-learned-none"), ann, rng), InvalidInput);
  EXPECT_THROW(run_image(&model(), nullptr, MethodConfig::parse("salience-uniform-none"), ann, rng), InvalidInput);
  EXPECT_NO_THROW(run_image(nullptr, nullptr, MethodConfig::parse("uniform-uniform-none"), ann, rng));
}

TEST(RunImage, RecomputesOnlyOnChange) {
  const auto ann = fixtures::synthetic(1, 5)[0];
  MethodConfig config = MethodConfig::parse("uniform-learned-learned");
  config.cell_size = 2;
  config.log_proposals = true;
  ModelProposalSource source(&model(), nullptr, config, ann.frame(), kCats);
  Rng rng(8);
  int observed = 0;
  const auto r = run_image(source, config, ann, rng, kCats, [&](int, const Workspace&) { ++observed; });
  int changes = 0;
  for (const auto& rec : r.log) changes += rec.workspace_changed;
  EXPECT_EQ(observed, changes);
  EXPECT_GE(source.recomputations(), changes > 0 ? 1 : 0);
}

TEST(DrawOrder, MatchesReplayedShuffle) {
  for (std::size_t n : {1u, 5u, 50u, 1500u}) {
    Rng a(n), b(n);
    const auto got = draw_order(n, 1000, a);
    EXPECT_EQ(got, oracle::replay_shuffle(n, 1000, b));
    EXPECT_EQ(std::set<std::size_t>(got.begin(), got.end()).size(), got.size());
  }
}

TEST(EvaluateProposalSet, GroundTruthBoxesComplete) {
  const auto ann = fixtures::scene();
  std::vector<CornerBox> boxes;
  for (const auto& [c, b] : ann.objects) boxes.push_back(b);
  Rng rng(1);
  const auto r = evaluate_proposal_set(boxes, ann, rng);
  EXPECT_TRUE(r.completed);
  EXPECT_LE(r.total_iterations, 3);
}

TEST(EvaluateProposalSet, DisjointBoxesFail) {
  const auto ann = fixtures::annotation("x", 640, 480, {0, 0, 50, 50}, {60, 0, 50, 50}, {120, 0, 50, 50});
  std::vector<CornerBox> boxes(1000, CornerBox{500, 400, 30, 30});
  Rng rng(2);
  const auto r = evaluate_proposal_set(boxes, ann, rng);
  EXPECT_FALSE(r.completed);
  EXPECT_EQ(r.total_iterations, 1000);
}

TEST(EvaluateProposalSet, PlantedPositionsMatchShuffleOracle) {
  const auto ann = fixtures::scene();
  const std::size_t n = 3000;
  std::vector<CornerBox> boxes(n, CornerBox{600, 440, 30, 30});
  const std::size_t planted[] = {17, 1234, 2999};
  std::size_t k = 0;
  for (const auto& [c, b] : ann.objects) boxes[planted[k++]] = b;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng a(seed), b(seed);
    const auto r = evaluate_proposal_set(boxes, ann, a, 1000);
    const auto order = oracle::replay_shuffle(n, 1000, b);
    int last = 0, hits = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] == planted[0] || order[i] == planted[1] || order[i] == planted[2]) {
        ++hits;
        last = static_cast<int>(i + 1);
      }
    }
    EXPECT_EQ(r.completed, hits == 3);
    EXPECT_EQ(r.total_iterations, hits == 3 ? last : 1000);
  }
}

TEST(LoadProposals, ParsesAndReportsLine) {
  const auto path = temp_file("proposals.jsonl");
  {
    std::ofstream out(path);
    out << R"({"x": 1, "y": 2, "w": 3, "h": 4})" << "\n\n" << R"({"x": 5, "y": 6, "w": 7, "h": 8})" << "\n";
  }
  const auto boxes = load_proposals(path);
  ASSERT_EQ(boxes.size(), 2u);
  EXPECT_EQ(boxes[1], (CornerBox{5, 6, 7, 8}));
  {
    std::ofstream out(path);
    out << R"({"x": 1, "y": 2, "w": 3, "h": 4})" << "\n" << R"({"x": 1, "y": 2})" << "\n";
  }
  try {
    load_proposals(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos);
  }
  fs::remove(path);
}
