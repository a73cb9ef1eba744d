#pragma once

#include <string>
#include <vector>

#include "situate/annotation.hpp"
#include "situate/eval.hpp"
#include "situate/situation_model.hpp"
#include "situate/workspace.hpp"

namespace situate {

/// Bar chart of per-method medians; failures drawn as full-height hatched bars.
std::string median_chart_svg(const ExperimentReport& report);
/// Cumulative completed-detection curves, one polyline per method.
std::string cumulative_chart_svg(const ExperimentReport& report);
/// Three bars per method for the t01, t12, t23 medians.
std::string interval_chart_svg(const ExperimentReport& report);

/// Workspace state plus each category's location map and alpha/gamma
/// marginals at one moment of a run. Provisional detections are dashed.
std::string workspace_snapshot_svg(const ImageFrame& frame, const Workspace& workspace,
                                   const std::vector<CategorySearchDist>& dists, int iteration);

std::string xml_escape(const std::string& text);

}  // namespace situate
