#include "trustfed/output.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "trustfed/config.hpp"
#include "trustfed/version.hpp"

namespace trustfed {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmtg(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void probe_writable(const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path probe = dir / ".write-probe";
  {
    std::ofstream out(probe, std::ios::binary);
    out << "ok";
    if (!out)
      throw std::runtime_error("output: directory '" + dir.string() +
                               "' is not writable");
  }
  fs::remove(probe);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out)
    throw std::runtime_error("output: cannot write '" + path.string() + "'");
}

std::string render_series_csv(const SeriesBundle& s) {
  std::string out =
      "round,timeavg_regret,timeavg_violation_mean,timeavg_violation_max,"
      "misclass_honest,misclass_byz\n";
  const std::size_t rounds = s.timeavg_regret.size();
  for (std::size_t i = 0; i < rounds; ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += fmt17(s.timeavg_regret[i]);
    out += ',';
    out += fmt17(s.timeavg_violation_mean[i]);
    out += ',';
    out += fmt17(s.timeavg_violation_max[i]);
    out += ',';
    out += fmt17(s.misclass_honest[i]);
    out += ',';
    out += fmt17(s.misclass_byz[i]);
    out += '\n';
  }
  return out;
}

struct ChartLine {
  std::string name;
  std::span<const double> values;
  std::string color;
};

// A small self-contained line chart; one point per round.
std::string render_chart(const std::string& title, const std::string& y_label,
                         const std::vector<ChartLine>& lines) {
  const double width = 760, height = 480;
  const double left = 72, right = 24, top = 46, bottom = 54;

  std::size_t rounds = 0;
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  for (const ChartLine& line : lines) {
    rounds = std::max(rounds, line.values.size());
    for (double v : line.values) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"480\" "
      "viewBox=\"0 0 760 480\">\n"
      "<rect width=\"760\" height=\"480\" fill=\"#ffffff\"/>\n"
      "<text x=\"380\" y=\"26\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      "font-size=\"16\">" + title + "</text>\n";

  if (rounds == 0) {
    svg += "<text x=\"380\" y=\"240\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\" fill=\"#888888\">no "
           "data</text>\n</svg>\n";
    return svg;
  }

  ymin = std::min(ymin, 0.0);
  ymax = std::max(ymax, 0.0);
  if (ymax - ymin < 1e-12) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const auto x_at = [&](std::size_t i) {
    if (rounds == 1) return left + (width - left - right) / 2.0;
    return left + (width - left - right) *
                      (static_cast<double>(i) / static_cast<double>(rounds - 1));
  };
  const auto y_at = [&](double v) {
    return top + (height - top - bottom) * (ymax - v) / (ymax - ymin);
  };

  for (int k = 0; k <= 4; ++k) {
    const double v = ymin + (ymax - ymin) * k / 4.0;
    const std::string y = fmt2(y_at(v));
    svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + y + "\" x2=\"" +
           fmt2(width - right) + "\" y2=\"" + y +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + fmt2(left - 8) + "\" y=\"" + y +
           "\" text-anchor=\"end\" dominant-baseline=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"11\">" +
           fmtg(v) + "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const std::size_t i =
        std::min<std::size_t>(rounds - 1, (rounds - 1) * k / 4);
    const std::string x = fmt2(x_at(i));
    svg += "<line x1=\"" + x + "\" y1=\"" + fmt2(height - bottom) + "\" x2=\"" +
           x + "\" y2=\"" + fmt2(height - bottom + 5) +
           "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + x + "\" y=\"" + fmt2(height - bottom + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">" +
           std::to_string(i + 1) + "</text>\n";
  }
  svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(top) + "\" x2=\"" +
         fmt2(left) + "\" y2=\"" + fmt2(height - bottom) +
         "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + fmt2(left) + "\" y1=\"" + fmt2(height - bottom) +
         "\" x2=\"" + fmt2(width - right) + "\" y2=\"" +
         fmt2(height - bottom) + "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + fmt2((left + width - right) / 2) + "\" y=\"" +
         fmt2(height - 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">round</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt2((top + height - bottom) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 18 " +
         fmt2((top + height - bottom) / 2) + ")\">" + y_label + "</text>\n";

  for (const ChartLine& line : lines) {
    if (line.values.empty()) continue;
    std::string points;
    for (std::size_t i = 0; i < line.values.size(); ++i) {
      points += fmt2(x_at(i));
      points += ',';
      points += fmt2(y_at(line.values[i]));
      points += ' ';
    }
    svg += "<polyline fill=\"none\" stroke=\"" + line.color +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
  }

  double legend_y = top + 16;
  for (const ChartLine& line : lines) {
    svg += "<line x1=\"" + fmt2(left + 12) + "\" y1=\"" + fmt2(legend_y - 4) +
           "\" x2=\"" + fmt2(left + 40) + "\" y2=\"" + fmt2(legend_y - 4) +
           "\" stroke=\"" + line.color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt2(left + 46) + "\" y=\"" + fmt2(legend_y) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + line.name +
           "</text>\n";
    legend_y += 18;
  }
  svg += "</svg>\n";
  return svg;
}

json settling_to_json(const SettlingStats& s) {
  json j = {{"realizations", s.realizations},
            {"finite", s.finite},
            {"fraction_finite", s.fraction_finite}};
  if (s.finite > 0) {
    j["min"] = s.min;
    j["max"] = s.max;
    j["mean"] = s.mean;
    j["median"] = s.median;
  }
  return j;
}

json bounds_to_json(const BoundReport& b) {
  const BoundConstants& k = b.constants;
  return {{"constants",
           {{"stepsize_scale", k.stepsize_scale},
            {"zeta", k.zeta},
            {"coupling", k.coupling},
            {"loss_grad_bound", k.loss_grad_bound},
            {"constraint_bound", k.constraint_bound},
            {"constraint_slope", k.constraint_slope},
            {"radius", k.radius},
            {"edge_count", k.edge_count},
            {"clients", k.clients}}},
          {"regret_bound_at_horizon", b.regret_bound_at_horizon},
          {"violation_bound_at_horizon", b.violation_bound_at_horizon},
          {"regret_curve_below_bound", b.regret_curve_below_bound}};
}

json summary_to_json(const ExperimentResult& result) {
  const auto last = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : v.back();
  };
  json j;
  j["final"] = {
      {"cumulative_regret", last(result.mean.cumulative_regret)},
      {"timeavg_regret", last(result.mean.timeavg_regret)},
      {"cumulative_violation_mean", last(result.mean.cumulative_violation_mean)},
      {"cumulative_violation_max", last(result.mean.cumulative_violation_max)},
      {"timeavg_violation_mean", last(result.mean.timeavg_violation_mean)},
      {"timeavg_violation_max", last(result.mean.timeavg_violation_max)},
      {"misclass_honest", last(result.mean.misclass_honest)},
      {"misclass_byz", last(result.mean.misclass_byz)}};
  j["settling"] = settling_to_json(result.settling);
  j["bounds"] = bounds_to_json(result.bounds);
  json runs = json::array();
  for (const RealizationSummary& s : result.summaries) {
    json r = {{"realization", s.realization},
              {"final_cumulative_regret", s.final_cumulative_regret},
              {"final_timeavg_regret", s.final_timeavg_regret},
              {"final_cumulative_violation_mean",
               s.final_cumulative_violation_mean},
              {"final_cumulative_violation_max",
               s.final_cumulative_violation_max},
              {"comparator",
               {{"objective", s.comparator_objective},
                {"max_residual", s.comparator_residual},
                {"iterations", s.comparator_iterations}}},
              {"envelope",
               {{"max_loss_grad_norm", s.max_loss_grad_norm},
                {"max_abs_constraint", s.max_abs_constraint},
                {"max_constraint_slope", s.max_constraint_slope}}},
              {"per_pair_cumulative_violation",
               s.per_pair_cumulative_violation}};
    if (s.settling_round)
      r["settling_round"] = *s.settling_round;
    else
      r["settling_round"] = nullptr;
    runs.push_back(std::move(r));
  }
  j["realizations"] = std::move(runs);
  return j;
}

json manifest_json(const SimConfig& config,
                   const std::vector<std::string>& files) {
  json j;
  j["version"] = std::string(kVersion);
  j["dialect"] = "trustfed-config-v1";
  j["config"] = config_to_json(config);
  j["resolved"] = {{"eta", config.resolved_eta()},
                   {"delta", config.resolved_delta()},
                   {"attack_magnitude", config.resolved_attack_magnitude()}};
  j["files"] = files;
  return j;
}

}  // namespace

OutputSelection parse_output_selection(const std::string& list) {
  OutputSelection sel{false, false, false};
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = list.find(',', start);
    const std::string token =
        comma == std::string::npos ? list.substr(start)
                                   : list.substr(start, comma - start);
    bool* flag = nullptr;
    if (token == "csv")
      flag = &sel.csv;
    else if (token == "json")
      flag = &sel.json;
    else if (token == "plot")
      flag = &sel.plot;
    else
      throw std::invalid_argument("format: unknown format '" + token + "'");
    if (*flag)
      throw std::invalid_argument("format: duplicate format '" + token + "'");
    *flag = true;
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return sel;
}

std::vector<std::string> emit_outputs(const SimConfig& config,
                                      const ExperimentResult& result,
                                      const std::filesystem::path& out_dir,
                                      const OutputSelection& selection) {
  probe_writable(out_dir);
  std::vector<std::string> files{"manifest.json"};

  if (selection.csv) {
    write_file(out_dir / "series.csv", render_series_csv(result.mean));
    files.push_back("series.csv");
  }
  if (selection.json) {
    write_file(out_dir / "summary.json", summary_to_json(result).dump(2) + "\n");
    files.push_back("summary.json");
  }
  if (selection.plot) {
    write_file(out_dir / "regret.svg",
               render_chart("Time-averaged regret", "regret / round",
                            {{"regret", result.mean.timeavg_regret,
                              "#1f6fb4"}}));
    files.push_back("regret.svg");
    write_file(
        out_dir / "violation.svg",
        render_chart("Time-averaged constraint violation", "violation / round",
                     {{"mean pair", result.mean.timeavg_violation_mean,
                       "#1f6fb4"},
                      {"worst pair", result.mean.timeavg_violation_max,
                       "#c23528"}}));
    files.push_back("violation.svg");
  }

  write_file(out_dir / "manifest.json",
             manifest_json(config, files).dump(2) + "\n");
  return files;
}

std::vector<std::string> emit_comparison(
    const SimConfig& proposed_config, const ExperimentResult& proposed,
    const SimConfig& baseline_config, const ExperimentResult& baseline,
    const std::filesystem::path& out_dir, const OutputSelection& selection) {
  probe_writable(out_dir);

  std::vector<std::string> files;
  for (const std::string& f :
       emit_outputs(proposed_config, proposed, out_dir / "proposed", selection))
    files.push_back("proposed/" + f);
  for (const std::string& f :
       emit_outputs(baseline_config, baseline, out_dir / "baseline", selection))
    files.push_back("baseline/" + f);

  if (selection.plot) {
    write_file(out_dir / "compare_regret.svg",
               render_chart("Time-averaged regret", "regret / round",
                            {{"proposed", proposed.mean.timeavg_regret,
                              "#1f6fb4"},
                             {"baseline", baseline.mean.timeavg_regret,
                              "#c23528"}}));
    files.push_back("compare_regret.svg");
    write_file(
        out_dir / "compare_violation.svg",
        render_chart("Time-averaged constraint violation", "violation / round",
                     {{"proposed", proposed.mean.timeavg_violation_mean,
                       "#1f6fb4"},
                      {"baseline", baseline.mean.timeavg_violation_mean,
                       "#c23528"}}));
    files.push_back("compare_violation.svg");
  }
  return files;
}

}  // namespace trustfed
