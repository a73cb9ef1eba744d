#include "situate/search.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "situate/error.hpp"
#include "situate/serialize.hpp"

namespace situate {

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char ch : text) {
    if (ch == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  parts.push_back(current);
  return parts;
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

[[noreturn]] void bad_token(std::string_view token) {
  throw InvalidInput("invalid method '" + std::string(token) +
                     "'; valid tokens: all, " + join(MethodConfig::standard_tokens(), ", ") +
                     " (general form <uniform|salience>-<uniform|learned>-<none|learned>[-noprov])");
}

}  // namespace

void MethodConfig::validate() const {
  if (!(thresholds.provisional > 0) || !(thresholds.provisional <= thresholds.final) ||
      !(thresholds.final <= 1)) {
    throw InvalidInput("thresholds must satisfy 0 < provisional <= final <= 1");
  }
  if (max_iterations < 1) throw InvalidInput("max_iterations must be at least 1");
  if (!(cell_size >= 1)) throw InvalidInput("cell size must be at least 1");
}

bool MethodConfig::needs_model() const {
  return box_prior == BoxPriorKind::kLearned || situation_model != SituationKind::kNone;
}

bool MethodConfig::needs_salience() const {
  return location_prior == LocationPrior::kSalience ||
         situation_model == SituationKind::kLearnedPlusSalience;
}

std::string MethodConfig::token() const {
  std::string t = location_prior == LocationPrior::kSalience ? "salience" : "uniform";
  t += box_prior == BoxPriorKind::kLearned ? "-learned" : "-uniform";
  switch (situation_model) {
    case SituationKind::kNone: t += "-none"; break;
    case SituationKind::kLearned: t += "-learned"; break;
    case SituationKind::kLearnedPlusSalience:
      t += location_prior == LocationPrior::kSalience ? "-learned" : "-learned+salience";
      break;
  }
  if (!provisional_enabled) t += "-noprov";
  return t;
}

std::string MethodConfig::label() const {
  std::string l = location_prior == LocationPrior::kSalience ? "Salience" : "Uniform";
  l += box_prior == BoxPriorKind::kLearned ? ", Learned" : ", Uniform";
  switch (situation_model) {
    case SituationKind::kNone: l += ", None"; break;
    case SituationKind::kLearned: l += ", Learned"; break;
    case SituationKind::kLearnedPlusSalience: l += ", Learned+Salience"; break;
  }
  if (!provisional_enabled) l += " (no provis.)";
  return l;
}

MethodConfig MethodConfig::parse(std::string_view token) {
  const auto parts = split(token, '-');
  if (parts.size() != 3 && parts.size() != 4) bad_token(token);
  MethodConfig c;
  if (parts[0] == "uniform") {
    c.location_prior = LocationPrior::kUniform;
  } else if (parts[0] == "salience") {
    c.location_prior = LocationPrior::kSalience;
  } else {
    bad_token(token);
  }
  if (parts[1] == "uniform") {
    c.box_prior = BoxPriorKind::kUniform;
  } else if (parts[1] == "learned") {
    c.box_prior = BoxPriorKind::kLearned;
  } else {
    bad_token(token);
  }
  if (parts[2] == "none") {
    c.situation_model = SituationKind::kNone;
  } else if (parts[2] == "learned") {
    c.situation_model = c.location_prior == LocationPrior::kSalience
                            ? SituationKind::kLearnedPlusSalience
                            : SituationKind::kLearned;
  } else if (parts[2] == "learned+salience") {
    c.situation_model = SituationKind::kLearnedPlusSalience;
  } else {
    bad_token(token);
  }
  if (parts.size() == 4) {
    if (parts[3] != "noprov") bad_token(token);
    c.provisional_enabled = false;
  }
  return c;
}

std::vector<std::string> MethodConfig::standard_tokens() {
  return {"uniform-uniform-none",    "uniform-learned-none",     "salience-uniform-none",
          "uniform-learned-learned", "salience-learned-learned", "salience-learned-learned-noprov"};
}

std::vector<MethodConfig> MethodConfig::parse_list(std::string_view spec) {
  std::vector<MethodConfig> out;
  for (const auto& raw : split(spec, ',')) {
    if (raw == "all") {
      for (const auto& t : standard_tokens()) out.push_back(parse(t));
    } else {
      out.push_back(parse(raw));
    }
  }
  return out;
}

RunResult run_loop(const CategorySet& categories, const MethodConfig& config,
                   ProposalSource& source, const Scorer& scorer, Rng& rng,
                   const ChangeObserver& on_change) {
  config.validate();
  Workspace workspace(categories);
  RunResult result;
  for (const auto& c : categories.names) result.final_iteration[c] = std::nullopt;

  std::vector<std::string> pending;
  for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
    pending.clear();
    for (const auto& c : categories.names) {
      if (!workspace.is_final(c)) pending.push_back(c);
    }
    std::uniform_int_distribution<std::size_t> pick(0, pending.size() - 1);
    const std::string category = pending[pick(rng)];

    ObjectProposal proposal = source.propose(category, rng);
    proposal.category = category;
    proposal.score = scorer(proposal);
    if (!(proposal.score >= 0 && proposal.score <= 1)) {
      throw InvalidInput("scorer returned a value outside [0, 1]");
    }
    const bool changed =
        workspace.offer(proposal, config.thresholds, config.provisional_enabled);
    result.total_iterations = iteration;
    if (config.log_proposals) {
      result.log.push_back({iteration, proposal, changed, workspace.state(category)});
    }
    if (changed) {
      if (workspace.is_final(category)) {
        result.final_iteration[category] = iteration;
        result.detection_order.push_back({category, iteration});
      }
      source.on_workspace_change(workspace, category);
      if (on_change) on_change(iteration, workspace);
    }
    if (workspace.all_final()) {
      result.completed = true;
      break;
    }
  }
  return result;
}

double score_proposal(const std::map<std::string, BoundingBox>& ground_truth,
                      const ObjectProposal& proposal) {
  auto it = ground_truth.find(proposal.category);
  if (it == ground_truth.end()) {
    throw InvalidInput("no ground truth for category '" + proposal.category + "'");
  }
  return iou(proposal.box, it->second);
}

ModelProposalSource::ModelProposalSource(const SituationModel* model, const SalienceMap* salience,
                                         const MethodConfig& config, const ImageFrame& frame,
                                         const CategorySet& categories)
    : model_(model), salience_(salience), config_(config), frame_(frame) {
  config_.validate();
  if (config_.needs_model() && model_ == nullptr) {
    throw InvalidInput("method '" + config_.token() + "' needs a learned model");
  }
  if (config_.needs_salience()) {
    if (salience_ == nullptr) {
      throw InvalidInput("method '" + config_.token() + "' needs a salience map");
    }
    const auto [rows, cols] = LocationMap::grid_shape(frame_, config_.cell_size);
    if (salience_->rows() != rows || salience_->cols() != cols) {
      throw InvalidInput("salience grid does not match the location grid");
    }
  }
  for (const auto& c : categories.names) dists_.emplace(c, initial(c));
}

CategorySearchDist ModelProposalSource::initial(const std::string& category) const {
  LocationMap location = config_.location_prior == LocationPrior::kSalience
                             ? salience_->distribution()
                             : LocationMap::uniform(frame_, config_.cell_size);
  ShapeDistribution shape = UniformShapePrior{};
  if (config_.box_prior == BoxPriorKind::kLearned) shape = model_->prior_shape(category);
  return {category, std::move(location), std::move(shape)};
}

const CategorySearchDist& ModelProposalSource::current(const std::string& category) const {
  auto it = dists_.find(category);
  if (it == dists_.end()) throw InvalidInput("unknown category '" + category + "'");
  return it->second;
}

ObjectProposal ModelProposalSource::propose(const std::string& category, Rng& rng) {
  return sample_proposal(current(category), frame_, rng);
}

void ModelProposalSource::on_workspace_change(const Workspace& workspace,
                                              const std::string& changed) {
  if (config_.situation_model == SituationKind::kNone) return;
  // The changed category's own conditioning set is unaffected.
  for (auto& [category, dist] : dists_) {
    if (category == changed || workspace.is_final(category)) continue;
    auto cond = model_->conditionals(category, workspace, frame_);
    if (!cond.location) {
      dist = initial(category);
    } else {
      LocationMap location = rasterize_2d(*cond.location, frame_, config_.cell_size);
      if (config_.situation_model == SituationKind::kLearnedPlusSalience) {
        location = combine(location, *salience_);
      }
      dist = CategorySearchDist{category, std::move(location), std::move(cond.shape)};
    }
    ++recomputations_;
  }
}

RunResult run_image(const SituationModel* model, const SalienceMap* salience,
                    const MethodConfig& config, const SituationAnnotation& annotation, Rng& rng,
                    const CategorySet& categories) {
  ModelProposalSource source(model, salience, config, annotation.frame(), categories);
  return run_image(source, config, annotation, rng, categories);
}

RunResult run_image(ModelProposalSource& source, const MethodConfig& config,
                    const SituationAnnotation& annotation, Rng& rng, const CategorySet& categories,
                    const ChangeObserver& on_change) {
  validate(annotation, categories);
  const auto truth = annotation.normalized_boxes();
  auto scorer = [&truth](const ObjectProposal& p) { return score_proposal(truth, p); };
  return run_loop(categories, config, source, scorer, rng, on_change);
}

std::vector<std::size_t> draw_order(std::size_t n, std::size_t budget, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t draws = std::min(n, budget);
  for (std::size_t i = 0; i < draws; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(draws);
  return idx;
}

RunResult evaluate_proposal_set(const std::vector<CornerBox>& proposals,
                                const SituationAnnotation& annotation, Rng& rng, int budget,
                                double threshold, const CategorySet& categories) {
  if (proposals.empty()) throw InvalidInput("proposal set is empty");
  if (budget < 1) throw InvalidInput("budget must be at least 1");
  validate(annotation, categories);
  const ImageFrame frame = annotation.frame();
  const auto truth = annotation.normalized_boxes();

  RunResult result;
  for (const auto& c : categories.names) result.final_iteration[c] = std::nullopt;
  std::size_t found = 0;
  const auto order = draw_order(proposals.size(), static_cast<std::size_t>(budget), rng);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const int iteration = static_cast<int>(k + 1);
    result.total_iterations = iteration;
    BoundingBox box;
    try {
      box = crop_to_frame(to_normalized(proposals[order[k]], frame), frame);
    } catch (const NoOverlap&) {
      continue;
    }
    for (const auto& c : categories.names) {
      if (result.final_iteration[c] || iou(box, truth.at(c)) < threshold) continue;
      result.final_iteration[c] = iteration;
      result.detection_order.push_back({c, iteration});
      ++found;
    }
    if (found == categories.size()) {
      result.completed = true;
      break;
    }
  }
  return result;
}

std::vector<CornerBox> load_proposals(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<CornerBox> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      CornerBox box{j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(),
                    j.at("h").get<double>()};
      if (!(box.w > 0) || !(box.h > 0)) throw ParseError(where + ": box must have positive size");
      out.push_back(box);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace situate
