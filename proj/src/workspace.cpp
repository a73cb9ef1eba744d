#include "situate/workspace.hpp"

#include "situate/error.hpp"

namespace situate {

Workspace::Workspace(CategorySet categories) : categories_(std::move(categories)) {
  for (const auto& name : categories_.names) slots_.emplace(name, Slot{});
}

Workspace::Slot& Workspace::slot(const std::string& category) {
  auto it = slots_.find(category);
  if (it == slots_.end()) throw InvalidInput("unknown category '" + category + "'");
  return it->second;
}

const Workspace::Slot& Workspace::slot(const std::string& category) const {
  auto it = slots_.find(category);
  if (it == slots_.end()) throw InvalidInput("unknown category '" + category + "'");
  return it->second;
}

SlotState Workspace::state(const std::string& category) const { return slot(category).state; }

const ObjectProposal* Workspace::detection(const std::string& category) const {
  const Slot& s = slot(category);
  return s.state == SlotState::kEmpty ? nullptr : &s.proposal;
}

bool Workspace::all_final() const {
  for (const auto& [name, s] : slots_) {
    if (s.state != SlotState::kFinal) return false;
  }
  return true;
}

bool Workspace::offer(const ObjectProposal& proposal, const Thresholds& thresholds,
                      bool provisional_enabled) {
  Slot& s = slot(proposal.category);
  if (s.state == SlotState::kFinal) return false;
  if (proposal.score >= thresholds.final) {
    s.state = SlotState::kFinal;
    s.proposal = proposal;
    return true;
  }
  if (!provisional_enabled || proposal.score < thresholds.provisional) return false;
  if (s.state == SlotState::kProvisional && proposal.score <= s.proposal.score) return false;
  s.state = SlotState::kProvisional;
  s.proposal = proposal;
  return true;
}

std::vector<const ObjectProposal*> Workspace::detections_except(const std::string& exclude) const {
  std::vector<const ObjectProposal*> out;
  for (const auto& name : categories_.names) {
    if (name == exclude) continue;
    const Slot& s = slots_.at(name);
    if (s.state != SlotState::kEmpty) out.push_back(&s.proposal);
  }
  return out;
}

}  // namespace situate
