#include "metacenter/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "metacenter/errors.hpp"

namespace metacenter {
namespace {

void append_number(std::string& line, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  line.append(buf, res.ptr);
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// Round step (1, 2 or 5 times a power of ten) giving at most ~6 ticks.
double tick_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

std::string tick_label(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace

nlohmann::json report_to_json(const ComparisonReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : report.entries) {
    rows.push_back({{"architecture", std::string(to_tag(e.kind))},
                    {"train_mse_cm2", e.train_mse},
                    {"test_mse_cm2", e.test_mse},
                    {"test_rmse_cm", e.test_rmse_cm},
                    {"parameter_count", e.parameter_count},
                    {"test_feedback", e.test_feedback}});
  }
  return {{"results", rows},
          {"config", report.config.to_json()},
          {"train_trials", report.train_trials},
          {"test_trials", report.test_trials}};
}

std::string format_report_table(const ComparisonReport& report) {
  const std::vector<std::string> header{"Network",        "Train MSE (cm^2)", "Test MSE (cm^2)",
                                        "Test RMSE (cm)", "Test/Train",       "Parameters",
                                        "Wall (s)"};
  std::vector<std::vector<std::string>> rows{header};
  for (const auto& e : report.entries) {
    rows.push_back({std::string(display_name(e.kind)), fixed(e.train_mse, 2), fixed(e.test_mse, 2),
                    fixed(e.test_rmse_cm, 3),
                    e.train_mse > 0.0 ? fixed(e.test_mse / e.train_mse, 2) : "-",
                    std::to_string(e.parameter_count), fixed(e.wall_seconds, 1)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c > 0) os << "  ";
      // Name column left-aligned, numbers right-aligned.
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << rows[i][c];
      } else {
        os << std::right << std::setw(static_cast<int>(width[c])) << rows[i][c];
      }
    }
    os << '\n';
    if (i == 0) {
      std::size_t total = 2 * (width.size() - 1);
      for (auto w : width) total += w;
      os << std::string(total, '-') << '\n';
    }
  }
  os << "test feedback for ts-grnn: "
     << std::string(to_string(report.config.test_feedback)) << '\n';
  return os.str();
}

void write_loss_curve_csv(std::ostream& out, const LossCurve& curve) {
  std::string line;
  out << "iteration,train_mse,test_mse\n";
  for (const auto& p : curve.points) {
    line = std::to_string(p.iteration);
    line += ',';
    append_number(line, p.train_mse);
    line += ',';
    append_number(line, p.test_mse);
    line += '\n';
    out << line;
  }
}

void write_loss_curve_csv(const std::filesystem::path& path, const LossCurve& curve) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  write_loss_curve_csv(out, curve);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string loss_curve_svg(const LossCurve& curve, std::string_view title) {
  constexpr double kWidth = 720, kHeight = 440;
  constexpr double kLeft = 90, kRight = 20, kTop = 40, kBottom = 60;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_max = 1.0, y_max = 0.0;
  for (const auto& p : curve.points) {
    x_max = std::max(x_max, static_cast<double>(p.iteration));
    y_max = std::max({y_max, p.train_mse, p.test_mse});
  }
  const double y_step = tick_step(y_max);
  y_max = y_max > 0.0 ? std::ceil(y_max / y_step) * y_step : 1.0;
  const double x_step = tick_step(x_max);

  auto px = [&](double x) { return kLeft + plot_w * x / x_max; };
  auto py = [&](double y) { return kTop + plot_h * (1.0 - y / y_max); };

  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
     << "</text>\n";
  os << "<g stroke=\"#ddd\">\n";
  for (double y = 0.0; y <= y_max * (1 + 1e-9); y += y_step) {
    os << "<line x1=\"" << kLeft << "\" y1=\"" << py(y) << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
       << py(y) << "\"/>\n";
  }
  os << "</g>\n";
  for (double y = 0.0; y <= y_max * (1 + 1e-9); y += y_step) {
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">"
       << tick_label(y) << "</text>\n";
  }
  for (double x = 0.0; x <= x_max * (1 + 1e-9); x += x_step) {
    os << "<text x=\"" << px(x) << "\" y=\"" << kTop + plot_h + 18 << "\" text-anchor=\"middle\">"
       << tick_label(x) << "</text>\n";
  }
  os << "<path d=\"M" << kLeft << ' ' << kTop << " V" << kTop + plot_h << " H" << kLeft + plot_w
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 16
     << "\" text-anchor=\"middle\">iteration</text>\n";
  os << "<text transform=\"translate(20 " << kTop + plot_h / 2
     << ") rotate(-90)\" text-anchor=\"middle\">MSE cm²</text>\n";

  auto polyline = [&](auto value, const char* color) {
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (const auto& p : curve.points) {
      os << px(static_cast<double>(p.iteration)) << ',' << py(value(p)) << ' ';
    }
    os << "\"/>\n";
  };
  polyline([](const LossPoint& p) { return p.train_mse; }, "#1f77b4");
  polyline([](const LossPoint& p) { return p.test_mse; }, "#d62728");

  const double lx = kLeft + plot_w - 120;
  os << "<line x1=\"" << lx << "\" y1=\"" << kTop + 12 << "\" x2=\"" << lx + 24 << "\" y2=\""
     << kTop + 12 << "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  os << "<text x=\"" << lx + 30 << "\" y=\"" << kTop + 16 << "\">train</text>\n";
  os << "<line x1=\"" << lx << "\" y1=\"" << kTop + 30 << "\" x2=\"" << lx + 24 << "\" y2=\""
     << kTop + 30 << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  os << "<text x=\"" << lx + 30 << "\" y=\"" << kTop + 34 << "\">test</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace metacenter
