#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "situate/annotation.hpp"
#include "situate/gaussian.hpp"
#include "situate/situation_model.hpp"

namespace situate {

inline constexpr int kModelFormatVersion = 1;

/// {"dims": [...], "mean": [...], "cov": [row-major], "epsilon": e}
nlohmann::ordered_json gaussian_to_json(const MultivariateGaussian& g);
MultivariateGaussian gaussian_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json model_to_json(const SituationModel& model);
SituationModel model_from_json(const nlohmann::ordered_json& j);

void save_model(const SituationModel& model, const std::filesystem::path& path);
SituationModel load_model(const std::filesystem::path& path);

/// {"image_id", "width", "height", "objects": [{"category","x","y","w","h"}], "image"?}
nlohmann::ordered_json annotation_to_json(const SituationAnnotation& annotation);
SituationAnnotation annotation_from_json(const nlohmann::ordered_json& j);

/// Reads a whole file; throws IoError naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);
nlohmann::ordered_json read_json_file(const std::filesystem::path& path);

}  // namespace situate
