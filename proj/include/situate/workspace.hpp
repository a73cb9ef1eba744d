#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "situate/annotation.hpp"
#include "situate/geometry.hpp"

namespace situate {

struct ObjectProposal {
  std::string category;
  BoundingBox box;
  double score = 0;
};

enum class SlotState { kEmpty, kProvisional, kFinal };

struct Thresholds {
  double provisional = 0.25;
  double final = 0.5;
};

/// Per-category detection slots for one image.
///
/// Final slots are absorbing. A provisional slot is only replaced by a
/// strictly higher-scoring provisional proposal.
class Workspace {
 public:
  explicit Workspace(CategorySet categories);

  const CategorySet& categories() const { return categories_; }
  SlotState state(const std::string& category) const;
  const ObjectProposal* detection(const std::string& category) const;

  bool is_final(const std::string& category) const { return state(category) == SlotState::kFinal; }
  bool all_final() const;

  /// Applies the threshold rules to a scored proposal. Returns true when a
  /// slot changed.
  bool offer(const ObjectProposal& proposal, const Thresholds& thresholds, bool provisional_enabled);

  /// Detections (provisional or final) of every category except `exclude`.
  std::vector<const ObjectProposal*> detections_except(const std::string& exclude) const;

 private:
  struct Slot {
    SlotState state = SlotState::kEmpty;
    ObjectProposal proposal;
  };
  Slot& slot(const std::string& category);
  const Slot& slot(const std::string& category) const;

  CategorySet categories_;
  std::map<std::string, Slot> slots_;
};

}  // namespace situate
