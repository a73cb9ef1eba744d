#include "situate/report.hpp"

#include "situate/error.hpp"
#include "situate/serialize.hpp"
#include "situate/svg.hpp"

namespace situate {

using nlohmann::ordered_json;

namespace {

ordered_json count_to_json(const IterCount& c) {
  return c.failed() ? ordered_json("Failure") : ordered_json(c.value());
}

IterCount count_from_json(const ordered_json& j) {
  if (j.is_string() && j.get<std::string>() == "Failure") return IterCount::failure();
  if (j.is_number_integer()) return IterCount::of(j.get<int>());
  throw ParseError("expected an iteration count or \"Failure\"");
}

ordered_json intervals_to_json(const Intervals& i) {
  return {{"t01", count_to_json(i.t01)}, {"t12", count_to_json(i.t12)}, {"t23", count_to_json(i.t23)}};
}

Intervals intervals_from_json(const ordered_json& j) {
  return {count_from_json(j.at("t01")), count_from_json(j.at("t12")), count_from_json(j.at("t23"))};
}

}  // namespace

ordered_json run_result_to_json(const RunResult& r) {
  ordered_json finals = ordered_json::object();
  for (const auto& [c, it] : r.final_iteration) finals[c] = it ? ordered_json(*it) : ordered_json(nullptr);
  ordered_json order = ordered_json::array();
  for (const auto& d : r.detection_order) order.push_back({{"category", d.category}, {"iteration", d.iteration}});
  return {{"completed", r.completed},
          {"total_iterations", r.total_iterations},
          {"final_iteration", finals},
          {"detection_order", order}};
}

RunResult run_result_from_json(const ordered_json& j) {
  RunResult r;
  r.completed = j.at("completed").get<bool>();
  r.total_iterations = j.at("total_iterations").get<int>();
  for (const auto& [c, v] : j.at("final_iteration").items()) {
    r.final_iteration[c] = v.is_null() ? std::nullopt : std::optional<int>(v.get<int>());
  }
  for (const auto& d : j.at("detection_order")) {
    r.detection_order.push_back({d.at("category").get<std::string>(), d.at("iteration").get<int>()});
  }
  return r;
}

ordered_json report_to_json(const ExperimentReport& report) {
  ordered_json j;
  j["format"] = "situate-report";
  j["version"] = kReportFormatVersion;
  j["folds"] = report.folds;
  j["master_seed"] = report.master_seed;
  j["max_iterations"] = report.max_iterations;
  j["cell_size"] = report.cell_size;
  ordered_json methods = ordered_json::array();
  for (const auto& m : report.methods) {
    ordered_json runs = ordered_json::array();
    for (const auto& r : m.runs) {
      ordered_json rj = {{"image_id", r.image_id}, {"fold", r.fold}};
      rj.update(run_result_to_json(r.result));
      runs.push_back(std::move(rj));
    }
    methods.push_back({{"token", m.token},
                       {"label", m.label},
                       {"median", count_to_json(m.median)},
                       {"failures", m.failures},
                       {"intervals", intervals_to_json(m.intervals)},
                       {"cumulative", m.cumulative},
                       {"runs", std::move(runs)}});
  }
  j["methods"] = std::move(methods);
  return j;
}

ExperimentReport report_from_json(const ordered_json& j) {
  try {
    if (j.at("format").get<std::string>() != "situate-report") throw ParseError("not a situate report");
    if (j.at("version").get<int>() != kReportFormatVersion) throw ParseError("unsupported report version");
    ExperimentReport report;
    report.folds = j.at("folds").get<int>();
    report.master_seed = j.at("master_seed").get<std::uint64_t>();
    report.max_iterations = j.at("max_iterations").get<int>();
    report.cell_size = j.at("cell_size").get<double>();
    for (const auto& mj : j.at("methods")) {
      MethodReport m;
      m.token = mj.at("token").get<std::string>();
      m.label = mj.at("label").get<std::string>();
      m.median = count_from_json(mj.at("median"));
      m.failures = mj.at("failures").get<int>();
      m.intervals = intervals_from_json(mj.at("intervals"));
      m.cumulative = mj.at("cumulative").get<std::vector<int>>();
      for (const auto& rj : mj.at("runs")) {
        m.runs.push_back({rj.at("image_id").get<std::string>(), rj.at("fold").get<int>(), run_result_from_json(rj)});
      }
      report.methods.push_back(std::move(m));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

std::string summary_csv(const ExperimentReport& report) {
  std::string out = "method,median,failures,t01,t12,t23\n";
  for (const auto& m : report.methods) {
    out += m.token + "," + m.median.str() + "," + std::to_string(m.failures) + "," +
           m.intervals.t01.str() + "," + m.intervals.t12.str() + "," + m.intervals.t23.str() + "\n";
  }
  return out;
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create '" + directory.string() + "': " + ec.message());
  write_file(directory / "report.json", report_to_json(report).dump(2) + "\n");
  write_file(directory / "summary.csv", summary_csv(report));
  write_file(directory / "medians.svg", median_chart_svg(report));
  write_file(directory / "cumulative.svg", cumulative_chart_svg(report));
  write_file(directory / "intervals.svg", interval_chart_svg(report));
}

}  // namespace situate
