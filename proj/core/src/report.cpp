#include "csvx/report.hpp"

#include <cstdio>

namespace csvx {

namespace {
std::string two_dp(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}
}  // namespace

nlohmann::json ExplanationReport::to_json() const {
  nlohmann::json j;
  j["schema"] = 1;
  j["env"] = env_id;
  j["state"] = state;
  j["source"] = source_name(source);
  j["action_binding"] = binding == ActionBinding::fixed ? "fixed" : "per-coalition";
  j["features"] = feature_labels;
  j["actions"] = action_names;
  j["action_ranking"] = action_ranking;
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json jcvf = nlohmann::json::object();
    for (const auto& [key, value] : row.cvf) jcvf[key] = value;
    jrows.push_back({{"label", row.label},
                     {"method", method_name(row.method)},
                     {"rank_i", row.rank_i},
                     {"rank_j", row.rank_j},
                     {"phi", row.phi},
                     {"v_full", row.v_full},
                     {"efficiency_residual", row.efficiency_residual},
                     {"cvf", std::move(jcvf)}});
  }
  j["rows"] = std::move(jrows);
  j["provenance"] = provenance;
  return j;
}

ExplanationReport ExplanationReport::from_json(const nlohmann::json& j) {
  try {
    ExplanationReport rep;
    rep.env_id = j.at("env").get<std::string>();
    rep.state = j.at("state").get<State>();
    rep.source = parse_source(j.at("source").get<std::string>());
    rep.binding = parse_binding(j.at("action_binding").get<std::string>());
    rep.feature_labels = j.at("features").get<std::vector<std::string>>();
    rep.action_names = j.at("actions").get<std::vector<std::string>>();
    rep.action_ranking = j.at("action_ranking").get<std::vector<int>>();
    for (const auto& jr : j.at("rows")) {
      ReportRow row;
      row.label = jr.at("label").get<std::string>();
      row.method = parse_method(jr.at("method").get<std::string>());
      row.rank_i = jr.at("rank_i").get<int>();
      row.rank_j = jr.at("rank_j").get<int>();
      row.phi = jr.at("phi").get<std::vector<double>>();
      row.v_full = jr.at("v_full").get<double>();
      row.efficiency_residual = jr.at("efficiency_residual").get<double>();
      for (const auto& [key, value] : jr.at("cvf").items())
        row.cvf.emplace_back(key, value.get<double>());
      rep.rows.push_back(std::move(row));
    }
    rep.provenance = j.value("provenance", nlohmann::json::object());
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report JSON: ") + e.what());
  }
}

std::string render_json(const ExplanationReport& report) {
  return report.to_json().dump(2) + "\n";
}

std::string render_csv(const ExplanationReport& report) {
  std::string out = "method";
  for (const auto& label : report.feature_labels) out += "," + label;
  out += "\n";
  for (const auto& row : report.rows) {
    out += row.label;
    for (double phi : row.phi) out += "," + two_dp(phi);
    out += "\n";
  }
  return out;
}

std::string render_markdown(const ExplanationReport& report) {
  std::string out = "| method |";
  for (const auto& label : report.feature_labels) out += " " + label + " |";
  out += "\n|---|";
  for (size_t i = 0; i < report.feature_labels.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& row : report.rows) {
    out += "| " + row.label + " |";
    for (double phi : row.phi) out += " " + two_dp(phi) + " |";
    out += "\n";
  }
  return out;
}

std::string render_report(const ExplanationReport& report, const std::string& format) {
  if (format == "json") return render_json(report);
  if (format == "csv") return render_csv(report);
  if (format == "markdown") return render_markdown(report);
  throw ValidationError("unknown output format '" + format +
                        "' (expected json|csv|markdown)");
}

nlohmann::json bar_chart_data(const ExplanationReport& report,
                              const std::string& row_label) {
  for (const auto& row : report.rows) {
    if (row.label != row_label) continue;
    nlohmann::json j = nlohmann::json::object();
    for (size_t i = 0; i < row.phi.size(); ++i) j[report.feature_labels[i]] = row.phi[i];
    return j;
  }
  throw ValidationError("report has no row labelled '" + row_label + "'");
}

}  // namespace csvx
