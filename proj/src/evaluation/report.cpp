#include "seagrass/evaluation/report.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace seagrass::evaluation {

namespace {

std::ostream& real(std::ostream& out, double v) {
  return out << std::setprecision(17) << v;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const ThresholdRow> rows) {
  std::ostringstream out;
  out << kMetricsCsvHeader << '\n';
  for (const auto& r : rows) {
    real(out, r.threshold) << ',' << r.counts.tp << ',' << r.counts.fp << ',' << r.counts.tn << ','
                           << r.counts.fn << ',';
    real(out, r.metrics.accuracy) << ',';
    real(out, r.metrics.precision) << ',';
    real(out, r.metrics.recall) << ',';
    real(out, r.metrics.fall_out) << ',';
    real(out, r.metrics.trade_off) << '\n';
  }
  write_text(path, out.str());
}

void write_mean_csv(const std::filesystem::path& path, std::span<const MeanRow> rows) {
  std::ostringstream out;
  out << kMeanCsvHeader << '\n';
  for (const auto& r : rows) {
    real(out, r.threshold) << ',';
    real(out, r.accuracy) << ',';
    real(out, r.precision) << ',';
    real(out, r.recall) << ',';
    real(out, r.fall_out) << ',';
    real(out, r.trade_off) << '\n';
  }
  write_text(path, out.str());
}

nlohmann::json to_json(const ThresholdRow& r) {
  return {{"threshold", r.threshold},
          {"tp", r.counts.tp},
          {"fp", r.counts.fp},
          {"tn", r.counts.tn},
          {"fn", r.counts.fn},
          {"accuracy", r.metrics.accuracy},
          {"precision", r.metrics.precision},
          {"recall", r.metrics.recall},
          {"fallOut", r.metrics.fall_out},
          {"tradeOff", r.metrics.trade_off},
          {"degenerate", r.metrics.degenerate.any()}};
}

nlohmann::json to_json(const MeanCurve& curve) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : curve.rows) {
    rows.push_back({{"threshold", r.threshold},
                    {"accuracy", r.accuracy},
                    {"precision", r.precision},
                    {"recall", r.recall},
                    {"fallOut", r.fall_out},
                    {"tradeOff", r.trade_off}});
  }
  return {{"rows", rows},
          {"auc", curve.roc.auc},
          {"optimalIndex", curve.optimal.index},
          {"optimalThreshold", curve.rows.empty() ? 0.0 : curve.rows[curve.optimal.index].threshold},
          {"optimalTradeOff", curve.optimal.trade_off}};
}

nlohmann::json to_json(const ExperimentResult& result) {
  auto table = [](const std::vector<ThresholdRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) out.push_back(to_json(r));
    return out;
  };
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : result.models) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& h : m.history) history.push_back({{"iteration", h.iteration}, {"loss", h.loss}});
    nlohmann::json entry{{"fold", m.fold},
                         {"trainIds", m.train_ids},
                         {"testIds", m.test_ids},
                         {"table", table(m.rows)},
                         {"lossHistory", history}};
    if (!m.extra_rows.empty()) entry["extraTable"] = table(m.extra_rows);
    if (!m.validation_rows.empty()) {
      entry["validationIds"] = m.validation_ids;
      entry["validationTable"] = table(m.validation_rows);
    }
    models.push_back(entry);
  }
  nlohmann::json doc{
      {"experiment",
       {{"dataAug", result.config.data_aug},
        {"learningRate", result.config.learning_rate},
        {"iterations", result.config.iterations}}},
      {"grid", result.grid.thresholds},
      {"folds", result.options.folds},
      {"averaging", result.options.averaging == Averaging::Micro ? "micro" : "macro"},
      {"selection", result.options.selection == SelectionSource::Test ? "test" : "validation"},
      {"models", models},
      {"mean", to_json(result.mix)},
      {"optimalIndex", result.optimal_index},
      {"optimalThreshold", result.grid.thresholds.at(result.optimal_index)},
      {"auc", result.auc}};
  if (result.extra) doc["extraMean"] = to_json(*result.extra);
  if (result.validation) doc["validationMean"] = to_json(*result.validation);
  return doc;
}

std::string roc_svg(std::span<const SvgCurve> curves) {
  constexpr double size = 400.0;
  constexpr double margin = 50.0;
  auto px = [&](double fall_out) { return margin + fall_out * size; };
  auto py = [&](double recall) { return margin + (1.0 - recall) * size; };
  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * margin + 160
      << "\" height=\"" << size + 2 * margin << "\">\n"
      << "  <rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size << "\" height=\"" << size
      << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "  <line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
      << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n"
      << "  <text x=\"" << margin + size / 2 << "\" y=\"" << size + margin + 35
      << "\" text-anchor=\"middle\">Fall-out</text>\n"
      << "  <text x=\"15\" y=\"" << margin + size / 2 << "\" transform=\"rotate(-90 15 " << margin + size / 2
      << ")\" text-anchor=\"middle\">Recall</text>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const char* color = kPalette[i % std::size(kPalette)];
    std::vector<RocPoint> pts = c.roc.points;
    pts.push_back({1.0, 0.0, 0.0});
    pts.push_back({0.0, 1.0, 1.0});
    std::sort(pts.begin(), pts.end(), [](const RocPoint& a, const RocPoint& b) {
      return a.fall_out != b.fall_out ? a.fall_out < b.fall_out : a.recall < b.recall;
    });
    svg << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t p = 0; p < pts.size(); ++p) {
      svg << (p ? " " : "") << px(pts[p].fall_out) << "," << py(pts[p].recall);
    }
    svg << "\"/>\n";
    if (c.optimal_index < c.roc.points.size()) {
      const auto& o = c.roc.points[c.optimal_index];
      const double x = px(o.fall_out);
      const double y = py(o.recall);
      svg << "  <path d=\"M " << x - 5 << " " << y - 5 << " L " << x + 5 << " " << y + 5 << " M " << x - 5
          << " " << y + 5 << " L " << x + 5 << " " << y - 5 << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
    }
    svg << "  <text x=\"" << size + margin + 10 << "\" y=\"" << margin + 20 + 20.0 * static_cast<double>(i)
        << "\" fill=\"" << color << "\">" << xml_escape(c.label) << " AUC=" << std::setprecision(4)
        << c.roc.auc << std::setprecision(2) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_roc_svg(const std::filesystem::path& path, std::span<const SvgCurve> curves) {
  write_text(path, roc_svg(curves));
}

}  // namespace seagrass::evaluation
