#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "morrey/harness.hpp"

namespace morrey {

namespace {

// JSON has no infinities; keep them readable.
nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

nlohmann::json ball_json(const Ball& b, int dim) {
  std::vector<double> c(b.center.begin(), b.center.begin() + dim);
  return {{"center", c}, {"radius", b.radius}};
}

std::string g17(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json j{{"quantity", r.quantity}, {"value", num(r.value)}, {"balls_used", r.balls_used},
                   {"warnings", r.warnings}, {"config", r.config}};
  int dim = 1;
  if (r.config.contains("family")) dim = r.config["family"]["lattice"].value("n", 1);
  if (r.extremal_ball) j["extremal_ball"] = ball_json(*r.extremal_ball, dim);
  if (r.extremal_level) j["extremal_level"] = *r.extremal_level;
  return j;
}

nlohmann::json to_json(const RatioReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& x : r.results) {
    nlohmann::json row{{"instance", x.instance.id},
                       {"translation", x.instance.translation},
                       {"dilation", x.instance.dilation},
                       {"amplitude", x.instance.amplitude},
                       {"rejected", x.rejected}};
    if (x.rejected) {
      row["reason"] = x.reason;
    } else {
      row["ratio"] = num(x.ratio);
      row["strong_ratio"] = num(x.strong_ratio);
      row["weak_ratio"] = num(x.weak_ratio);
      row["left_strong"] = num(x.left_strong);
      row["left_weak"] = num(x.left_weak);
      nlohmann::json right = nlohmann::json::array();
      for (double v : x.right) right.push_back(num(v));
      row["right"] = right;
    }
    rows.push_back(row);
  }
  nlohmann::json j{{"theorem", r.theorem},
                   {"max", num(r.max)},
                   {"min", num(r.min)},
                   {"spread", num(r.spread)},
                   {"argmax", r.argmax},
                   {"argmin", r.argmin},
                   {"rejected", r.rejected},
                   {"hypotheses_ok", r.hypotheses_ok},
                   {"warnings", r.warnings},
                   {"config", r.config},
                   {"instances", rows}};
  j["pass"] = r.pass ? nlohmann::json(*r.pass) : nlohmann::json("n/a");
  return j;
}

std::string to_csv(const RatioReport& r) {
  std::size_t m = 0;
  for (const auto& x : r.results) m = std::max(m, x.right.size());
  std::ostringstream os;
  os << "instance,translation,dilation,amplitude,ratio,strong_ratio,weak_ratio,left_strong,left_weak";
  for (std::size_t i = 0; i < m; ++i) os << ",right_" << i + 1;
  os << ",rejected\n";
  for (const auto& x : r.results) {
    os << x.instance.id << ',' << g17(x.instance.translation) << ',' << g17(x.instance.dilation) << ','
       << g17(x.instance.amplitude);
    if (x.rejected) {
      for (std::size_t i = 0; i < 5 + m; ++i) os << ',';
      os << ",1\n";
      continue;
    }
    os << ',' << g17(x.ratio) << ',' << g17(x.strong_ratio) << ',' << g17(x.weak_ratio) << ','
       << g17(x.left_strong) << ',' << g17(x.left_weak);
    for (std::size_t i = 0; i < m; ++i) os << ',' << (i < x.right.size() ? g17(x.right[i]) : "");
    os << ",0\n";
  }
  return os.str();
}

CsvSeries read_ratio_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  const auto header = split(line);
  auto col = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error(fmt::format("CSV has no '{}' column", name));
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cx = col("dilation"), cy = col("ratio");
  CsvSeries s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() <= std::max(cx, cy) || cells[cy].empty()) continue;
    s.x.push_back(std::stod(cells[cx]));
    s.y.push_back(std::stod(cells[cy]));
  }
  return s;
}

std::string render_svg(const CsvSeries& series, const std::string& title) {
  const double W = 640, H = 400, ml = 70, mr = 20, mt = 40, mb = 50;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < series.x.size(); ++i)
    if (series.x[i] > 0 && std::isfinite(series.y[i])) pts.emplace_back(series.x[i], series.y[i]);
  std::sort(pts.begin(), pts.end());
  std::ostringstream os;
  os << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)",
                    W, H)
     << '\n';
  os << fmt::format(R"(<rect width="{}" height="{}" fill="white"/>)", W, H) << '\n';
  os << fmt::format(R"(<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>)", W / 2, title) << '\n';
  if (pts.empty()) {
    os << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">no finite data</text>)", W / 2, H / 2) << "\n</svg>\n";
    return os.str();
  }
  double x0 = std::log10(pts.front().first), x1 = std::log10(pts.back().first);
  double y0 = 0.0, y1 = 0.0;
  for (auto& p : pts) y1 = std::max(y1, p.second);
  if (x1 - x0 < 1e-12) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 <= y0) y1 = y0 + 1.0;
  y1 *= 1.1;
  auto X = [&](double x) { return ml + (std::log10(x) - x0) / (x1 - x0) * (W - ml - mr); };
  auto Y = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
  os << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>)", ml, H - mb, W - mr) << '\n';
  os << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>)", ml, mt, H - mb) << '\n';
  for (int e = static_cast<int>(std::ceil(x0 - 1e-9)); e <= static_cast<int>(std::floor(x1 + 1e-9)); ++e) {
    const double px = X(std::pow(10.0, e));
    os << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#ccc"/>)", px, mt, H - mb) << '\n';
    os << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">1e{}</text>)", px, H - mb + 18, e) << '\n';
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = y0 + (y1 - y0) * k / 4;
    os << fmt::format(R"(<text x="{}" y="{}" text-anchor="end">{:.3g}</text>)", ml - 6, Y(v) + 4, v) << '\n';
  }
  os << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">dilation s</text>)", (ml + W - mr) / 2, H - 10)
     << '\n';
  os << fmt::format(R"svg(<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">ratio</text>)svg",
                    (mt + H - mb) / 2, (mt + H - mb) / 2)
     << '\n';
  os << R"(<polyline fill="none" stroke="#1f77b4" stroke-width="1.5" points=")";
  for (auto& p : pts) os << fmt::format("{:.2f},{:.2f} ", X(p.first), Y(p.second));
  os << "\"/>\n";
  for (auto& p : pts)
    os << fmt::format(R"(<circle cx="{:.2f}" cy="{:.2f}" r="3" fill="#1f77b4"/>)", X(p.first), Y(p.second)) << '\n';
  os << "</svg>\n";
  return os.str();
}

}  // namespace morrey
