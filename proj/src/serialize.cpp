#include "situate/serialize.hpp"

#include <fstream>
#include <sstream>

#include "situate/error.hpp"

namespace situate {

using nlohmann::ordered_json;

namespace {

template <typename T>
T field(const ordered_json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw ParseError(std::string("missing field '") + name + "'");
  }
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad field '") + name + "': " + e.what());
  }
}

ordered_json normal_to_json(const UnivariateNormal& n) {
  return {{"label", n.label}, {"mean", n.mean}, {"std", n.std}};
}

UnivariateNormal normal_from_json(const ordered_json& j) {
  UnivariateNormal n{field<std::string>(j, "label"), field<double>(j, "mean"),
                     field<double>(j, "std")};
  if (!(n.std > 0)) throw InvalidInput("normal '" + n.label + "' must have std > 0");
  return n;
}

}  // namespace

ordered_json gaussian_to_json(const MultivariateGaussian& g) {
  std::vector<double> mean(g.mean().data(), g.mean().data() + g.mean().size());
  std::vector<double> cov;
  for (Eigen::Index r = 0; r < g.cov().rows(); ++r) {
    for (Eigen::Index c = 0; c < g.cov().cols(); ++c) cov.push_back(g.cov()(r, c));
  }
  return {{"dims", g.dims()}, {"mean", mean}, {"cov", cov}, {"epsilon", g.epsilon()}};
}

MultivariateGaussian gaussian_from_json(const ordered_json& j) {
  auto dims = field<std::vector<std::string>>(j, "dims");
  auto mean = field<std::vector<double>>(j, "mean");
  auto cov = field<std::vector<double>>(j, "cov");
  const auto d = static_cast<Eigen::Index>(dims.size());
  if (static_cast<Eigen::Index>(mean.size()) != d || static_cast<Eigen::Index>(cov.size()) != d * d) {
    throw ParseError("gaussian mean/cov lengths do not match dims");
  }
  Eigen::VectorXd m = Eigen::Map<Eigen::VectorXd>(mean.data(), d);
  Eigen::MatrixXd s(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) s(r, c) = cov[static_cast<std::size_t>(r * d + c)];
  }
  return MultivariateGaussian(std::move(dims), std::move(m), std::move(s),
                              j.contains("epsilon") ? field<double>(j, "epsilon") : 0.0);
}

ordered_json model_to_json(const SituationModel& model) {
  ordered_json j;
  j["format"] = "situate-model";
  j["version"] = kModelFormatVersion;
  j["categories"] = model.categories().names;
  ordered_json priors = ordered_json::object();
  for (const auto& c : model.categories().names) {
    const BoxPrior& p = model.box_prior(c);
    priors[c] = {{"alpha", normal_to_json(p.alpha)}, {"gamma", normal_to_json(p.gamma)}};
  }
  j["box_priors"] = priors;
  auto pairs = [](const std::map<SituationModel::Pair, MultivariateGaussian>& m) {
    ordered_json arr = ordered_json::array();
    for (const auto& [k, g] : m) {
      arr.push_back({{"categories", {k.first, k.second}}, {"gaussian", gaussian_to_json(g)}});
    }
    return arr;
  };
  j["loc_pair"] = pairs(model.loc_pairs());
  j["loc_triple"] = gaussian_to_json(model.loc_triple());
  j["box_pair"] = pairs(model.box_pairs());
  j["box_triple"] = gaussian_to_json(model.box_triple());
  return j;
}

SituationModel model_from_json(const ordered_json& j) {
  if (field<std::string>(j, "format") != "situate-model") throw ParseError("not a situate model file");
  const int version = field<int>(j, "version");
  if (version != kModelFormatVersion) {
    throw ParseError("unsupported model format version " + std::to_string(version));
  }
  CategorySet cats{field<std::vector<std::string>>(j, "categories")};
  std::map<std::string, BoxPrior> priors;
  const auto& pj = j.at("box_priors");
  for (const auto& c : cats.names) {
    if (!pj.contains(c)) throw ParseError("missing box prior for '" + c + "'");
    priors.emplace(c, BoxPrior{normal_from_json(pj.at(c).at("alpha")),
                               normal_from_json(pj.at(c).at("gamma"))});
  }
  auto pairs = [](const ordered_json& arr) {
    std::map<SituationModel::Pair, MultivariateGaussian> m;
    if (!arr.is_array()) throw ParseError("pairwise joints must be an array");
    for (const auto& e : arr) {
      auto names = field<std::vector<std::string>>(e, "categories");
      if (names.size() != 2) throw ParseError("pairwise joint needs two categories");
      m.emplace(SituationModel::Pair{names[0], names[1]}, gaussian_from_json(e.at("gaussian")));
    }
    return m;
  };
  try {
    return SituationModel(std::move(cats), std::move(priors), pairs(j.at("loc_pair")),
                          gaussian_from_json(j.at("loc_triple")), pairs(j.at("box_pair")),
                          gaussian_from_json(j.at("box_triple")));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model: ") + e.what());
  }
}

void save_model(const SituationModel& model, const std::filesystem::path& path) {
  write_file(path, model_to_json(model).dump(2) + "\n");
}

SituationModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_json_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ordered_json annotation_to_json(const SituationAnnotation& a) {
  ordered_json j;
  j["image_id"] = a.image_id;
  j["width"] = a.width;
  j["height"] = a.height;
  ordered_json objects = ordered_json::array();
  for (const auto& [category, box] : a.objects) {
    objects.push_back({{"category", category}, {"x", box.x}, {"y", box.y}, {"w", box.w}, {"h", box.h}});
  }
  j["objects"] = objects;
  if (a.image_path) j["image"] = *a.image_path;
  return j;
}

SituationAnnotation annotation_from_json(const ordered_json& j) {
  SituationAnnotation a;
  a.image_id = field<std::string>(j, "image_id");
  a.width = field<double>(j, "width");
  a.height = field<double>(j, "height");
  if (!j.contains("objects") || !j.at("objects").is_array()) throw ParseError("missing 'objects' array");
  for (const auto& o : j.at("objects")) {
    const auto category = field<std::string>(o, "category");
    CornerBox box{field<double>(o, "x"), field<double>(o, "y"), field<double>(o, "w"),
                  field<double>(o, "h")};
    if (!a.objects.emplace(category, box).second) {
      throw InvalidDataset("image '" + a.image_id + "': duplicate category '" + category + "'");
    }
  }
  if (j.contains("image")) a.image_path = field<std::string>(j, "image");
  return a;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << contents;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

ordered_json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

}  // namespace situate
