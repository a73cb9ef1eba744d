#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "situate/annotation.hpp"
#include "situate/salience.hpp"
#include "situate/situation_model.hpp"
#include "situate/workspace.hpp"

namespace situate {

enum class LocationPrior { kUniform, kSalience };
enum class BoxPriorKind { kUniform, kLearned };
enum class SituationKind { kNone, kLearned, kLearnedPlusSalience };

/// One row of the method matrix plus the loop parameters.
struct MethodConfig {
  LocationPrior location_prior = LocationPrior::kUniform;
  BoxPriorKind box_prior = BoxPriorKind::kLearned;
  SituationKind situation_model = SituationKind::kLearned;
  bool provisional_enabled = true;
  Thresholds thresholds;
  int max_iterations = 1000;
  std::uint64_t seed = 0;
  /// Grid cell size for location maps, in normalized pixels.
  double cell_size = 1.0;
  /// Record every proposal in RunResult::log.
  bool log_proposals = false;

  /// Throws InvalidInput unless 0 < provisional <= final <= 1 and max_iterations >= 1.
  void validate() const;

  bool needs_model() const;
  bool needs_salience() const;

  /// "<location>-<box>-<situation>[-noprov]", e.g. "salience-learned-learned".
  std::string token() const;
  /// Human-readable label, e.g. "Salience, Learned, Learned".
  std::string label() const;

  /// Parses a token; InvalidInput lists the valid tokens on failure.
  static MethodConfig parse(std::string_view token);
  /// The six loop methods, in reporting order.
  static std::vector<std::string> standard_tokens();
  /// Comma-separated tokens, or "all".
  static std::vector<MethodConfig> parse_list(std::string_view spec);
};

struct Detection {
  std::string category;
  int iteration = 0;
  bool operator==(const Detection&) const = default;
};

struct ProposalRecord {
  int iteration = 0;
  ObjectProposal proposal;
  bool workspace_changed = false;
  SlotState slot_after = SlotState::kEmpty;
};

/// Outcome of searching one image.
struct RunResult {
  /// Iteration of each category's final detection; nullopt means failure.
  std::map<std::string, std::optional<int>> final_iteration;
  int total_iterations = 0;
  bool completed = false;
  std::vector<Detection> detection_order;
  std::vector<ProposalRecord> log;
};

/// Produces proposals for the main loop and reacts to workspace changes.
class ProposalSource {
 public:
  virtual ~ProposalSource() = default;
  virtual ObjectProposal propose(const std::string& category, Rng& rng) = 0;
  /// Called after every workspace change, before the next proposal.
  virtual void on_workspace_change(const Workspace& /*workspace*/, const std::string& /*changed*/) {}
};

using Scorer = std::function<double(const ObjectProposal&)>;
using ChangeObserver = std::function<void(int iteration, const Workspace&)>;

/// The main loop: pick a category without a final detection uniformly at
/// random, ask the source for a proposal, score it, update the workspace and
/// notify the source on change. Stops when every category is final or after
/// config.max_iterations.
RunResult run_loop(const CategorySet& categories, const MethodConfig& config,
                   ProposalSource& source, const Scorer& scorer, Rng& rng,
                   const ChangeObserver& on_change = {});

/// IOU of the proposal with its category's ground-truth box.
double score_proposal(const std::map<std::string, BoundingBox>& ground_truth,
                      const ObjectProposal& proposal);

/// Proposal source backed by the priors and the situation model, per the
/// method configuration.
class ModelProposalSource : public ProposalSource {
 public:
  ModelProposalSource(const SituationModel* model, const SalienceMap* salience,
                      const MethodConfig& config, const ImageFrame& frame,
                      const CategorySet& categories);

  ObjectProposal propose(const std::string& category, Rng& rng) override;
  void on_workspace_change(const Workspace& workspace, const std::string& changed) override;

  const CategorySearchDist& current(const std::string& category) const;
  /// Number of distribution recomputations triggered so far.
  int recomputations() const { return recomputations_; }

 private:
  CategorySearchDist initial(const std::string& category) const;

  const SituationModel* model_;
  const SalienceMap* salience_;
  MethodConfig config_;
  ImageFrame frame_;
  std::map<std::string, CategorySearchDist> dists_;
  int recomputations_ = 0;
};

/// Searches one annotated image with the configured method and the IOU oracle.
/// `model` may be null only for methods that need neither learned box priors
/// nor a situation model; `salience` is required for salience methods.
RunResult run_image(const SituationModel* model, const SalienceMap* salience,
                    const MethodConfig& config, const SituationAnnotation& annotation, Rng& rng,
                    const CategorySet& categories = CategorySet::dog_walking());

/// Same, with a caller-owned source so observers can inspect its distributions.
RunResult run_image(ModelProposalSource& source, const MethodConfig& config,
                    const SituationAnnotation& annotation, Rng& rng,
                    const CategorySet& categories = CategorySet::dog_walking(),
                    const ChangeObserver& on_change = {});

/// Order in which evaluate_proposal_set draws proposals: a partial
/// Fisher-Yates shuffle where step i swaps position i with a uniform pick
/// from [i, n).
std::vector<std::size_t> draw_order(std::size_t n, std::size_t budget, Rng& rng);

/// Samples category-free proposals without replacement (up to `budget`); a
/// proposal with IOU >= 0.5 against an object not yet found marks it final.
RunResult evaluate_proposal_set(const std::vector<CornerBox>& proposals,
                                const SituationAnnotation& annotation, Rng& rng,
                                int budget = 1000, double threshold = 0.5,
                                const CategorySet& categories = CategorySet::dog_walking());

/// JSON lines: {"x":..,"y":..,"w":..,"h":..} per line, original pixel corners.
std::vector<CornerBox> load_proposals(const std::filesystem::path& path);

}  // namespace situate
