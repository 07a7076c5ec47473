#pragma once

#include <string>
#include <vector>

#include "csvx/shapley.hpp"

#include <json.hpp>

namespace csvx {

struct ReportRow {
  std::string label;  // "Vani(0)", "CD(0,1)", "ACD"
  Method method = Method::acd;
  int rank_i = 0;
  int rank_j = 0;
  std::vector<double> phi;
  double v_full = 0.0;
  double efficiency_residual = 0.0;
  std::vector<std::pair<std::string, double>> cvf;  // coalition key -> value
};

/// Paper-style table of per-feature Shapley values for one state.
struct ExplanationReport {
  std::string env_id;
  State state;
  Source source = Source::q;
  ActionBinding binding = ActionBinding::fixed;
  std::vector<std::string> feature_labels;
  std::vector<std::string> action_names;
  std::vector<int> action_ranking;  // full-feature ranking at the state
  std::vector<ReportRow> rows;
  nlohmann::json provenance;  // seeds, config hash, convergence diagnostics

  nlohmann::json to_json() const;
  static ExplanationReport from_json(const nlohmann::json& j);
};

std::string render_json(const ExplanationReport& report);
std::string render_csv(const ExplanationReport& report);     // full precision 2dp display
std::string render_markdown(const ExplanationReport& report);
std::string render_report(const ExplanationReport& report, const std::string& format);

/// Per-state bar-chart data: feature label -> phi, for external plotting.
nlohmann::json bar_chart_data(const ExplanationReport& report, const std::string& row_label);

}  // namespace csvx
