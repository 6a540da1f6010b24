#include "c3bf/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace c3bf {
namespace {

const char* kPalette[] = {"#4878cf", "#ee854a", "#6acc64", "#d65f5f", "#956cb4", "#8c8c8c"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct Series {
  std::string label;
  std::string color;
  bool dashed{false};
  std::vector<Vec2d> points;  // non-finite y breaks the polyline
};

struct DataEllipse {
  Vec2d center;
  double rx{0};
  double ry{0};
  std::string color;
  bool dashed{false};
  double opacity{1.0};
};

struct Figure {
  double width{640};
  double height{420};
  double ml{62}, mr{16}, mt{34}, mb{48};
  std::string title, xlabel, ylabel;
  bool equal_aspect{false};
  bool mark_zero{false};
  std::vector<Series> series;
  std::vector<DataEllipse> ellipses;

  void render(std::ostream& out) const;
};

double nice_step(double range) {
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  if (norm < 1.5) return mag;
  if (norm < 3.5) return 2 * mag;
  if (norm < 7.5) return 5 * mag;
  return 10 * mag;
}

void Figure::render(std::ostream& out) const {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  auto grow = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
    ylo = std::min(ylo, y);
    yhi = std::max(yhi, y);
  };
  for (const auto& s : series)
    for (const auto& p : s.points) grow(p.x(), p.y());
  for (const auto& e : ellipses) {
    grow(e.center.x() - e.rx, e.center.y() - e.ry);
    grow(e.center.x() + e.rx, e.center.y() + e.ry);
  }
  if (!(xlo < xhi)) {
    xlo -= 1;
    xhi += 1;
  }
  if (!(ylo < yhi)) {
    ylo -= 1;
    yhi += 1;
  }
  const double xpad = 0.06 * (xhi - xlo), ypad = 0.08 * (yhi - ylo);
  xlo -= xpad;
  xhi += xpad;
  ylo -= ypad;
  yhi += ypad;

  const double pw = width - ml - mr, ph = height - mt - mb;
  if (equal_aspect) {
    const double sx = pw / (xhi - xlo), sy = ph / (yhi - ylo);
    if (sx < sy) {
      const double extra = (ph / sx - (yhi - ylo)) / 2;
      ylo -= extra;
      yhi += extra;
    } else {
      const double extra = (pw / sy - (xhi - xlo)) / 2;
      xlo -= extra;
      xhi += extra;
    }
  }
  auto px = [&](double x) { return ml + (x - xlo) / (xhi - xlo) * pw; };
  auto py = [&](double y) { return mt + (yhi - y) / (yhi - ylo) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<clipPath id=\"plot\"><rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\""
      << fmt(pw) << "\" height=\"" << fmt(ph) << "\"/></clipPath>\n";

  // Grid and ticks.
  const double xstep = nice_step(xhi - xlo), ystep = nice_step(yhi - ylo);
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">\n";
  for (double x = std::ceil(xlo / xstep) * xstep; x <= xhi + 1e-9 * xstep; x += xstep) {
    out << "<line x1=\"" << fmt(px(x)) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(px(x))
        << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"#e4e4e4\"/>\n";
    out << "<text x=\"" << fmt(px(x)) << "\" y=\"" << fmt(mt + ph + 16)
        << "\" text-anchor=\"middle\">" << fmt_tick(std::abs(x) < 1e-12 ? 0 : x) << "</text>\n";
  }
  for (double y = std::ceil(ylo / ystep) * ystep; y <= yhi + 1e-9 * ystep; y += ystep) {
    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py(y)) << "\" x2=\"" << fmt(ml + pw)
        << "\" y2=\"" << fmt(py(y)) << "\" stroke=\"#e4e4e4\"/>\n";
    out << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(py(y) + 4)
        << "\" text-anchor=\"end\">" << fmt_tick(std::abs(y) < 1e-12 ? 0 : y) << "</text>\n";
  }
  out << "</g>\n";

  if (mark_zero && ylo < 0 && 0 < yhi) {
    out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py(0)) << "\" x2=\"" << fmt(ml + pw)
        << "\" y2=\"" << fmt(py(0)) << "\" stroke=\"#888\" stroke-dasharray=\"5 3\"/>\n";
  }

  out << "<g clip-path=\"url(#plot)\">\n";
  for (const auto& e : ellipses) {
    out << "<ellipse cx=\"" << fmt(px(e.center.x())) << "\" cy=\"" << fmt(py(e.center.y()))
        << "\" rx=\"" << fmt(e.rx / (xhi - xlo) * pw) << "\" ry=\"" << fmt(e.ry / (yhi - ylo) * ph)
        << "\" fill=\"none\" stroke=\"" << e.color << "\" stroke-opacity=\"" << e.opacity
        << "\"";
    if (e.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
  }
  for (const auto& s : series) {
    out << "<path d=\"";
    bool pen_down = false;
    for (const auto& p : s.points) {
      if (!std::isfinite(p.x()) || !std::isfinite(p.y())) {
        pen_down = false;
        continue;
      }
      out << (pen_down ? "L" : "M") << fmt(px(p.x())) << " " << fmt(py(p.y()));
      pen_down = true;
    }
    out << "\" fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
  }
  out << "</g>\n";

  // Frame, labels, legend.
  out << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
      << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"#222\"/>\n";
  out << "<g font-family=\"sans-serif\" fill=\"#222\">\n";
  out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"20\" font-size=\"14\" "
      << "text-anchor=\"middle\">" << title << "</text>\n";
  out << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(height - 10)
      << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << fmt(mt + ph / 2) << "\" font-size=\"12\" "
      << "text-anchor=\"middle\" transform=\"rotate(-90 16 " << fmt(mt + ph / 2) << ")\">"
      << ylabel << "</text>\n";
  double ly = mt + 14;
  for (const auto& s : series) {
    if (s.label.empty()) continue;
    const double lx = ml + pw - 150;
    out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(lx + 22)
        << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.6\"";
    if (s.dashed) out << " stroke-dasharray=\"6 4\"";
    out << "/>\n";
    out << "<text x=\"" << fmt(lx + 28) << "\" y=\"" << fmt(ly) << "\" font-size=\"11\">"
        << s.label << "</text>\n";
    ly += 16;
  }
  out << "</g>\n</svg>\n";
}

void write_figure(const Figure& fig, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error(file.string() + ": cannot open for writing");
  fig.render(out);
}

Vec2d body_center_of(const ScenarioConfig& config, const Eigen::VectorXd& state) {
  if (config.mode() == ScenarioMode::kVertical) {
    return {state[0] + config.ego.l * std::cos(state[2]),
            state[1] + config.ego.l * std::sin(state[2])};
  }
  return {state[0], state[1]};
}

}  // namespace

void write_plots(const ScenarioConfig& config, const RunResult& result,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const bool vertical = config.mode() == ScenarioMode::kVertical;
  const double t_end = result.records.empty() ? 0 : result.records.back().t;

  Figure path;
  path.title = "body-center path";
  path.xlabel = "x [m]";
  path.ylabel = vertical ? "y [m]" : "z [m]";
  path.equal_aspect = true;
  Series ego;
  ego.label = "ego";
  ego.color = kPalette[0];
  for (const auto& rec : result.records) ego.points.push_back(body_center_of(config, rec.state));
  path.series.push_back(std::move(ego));
  for (std::size_t i = 0; i < config.obstacles.size(); ++i) {
    const ObstacleSpec& spec = config.obstacles[i];
    const ObstacleState resolved = resolve_obstacle(spec, config.ego);
    const std::string color = kPalette[1 + i % 4];
    path.ellipses.push_back({spec.center, spec.semi_axis_1, spec.semi_axis_2, color, false, 1.0});
    path.ellipses.push_back({spec.center, resolved.radius, resolved.radius, color, true, 1.0});
    if (spec.velocity.squaredNorm() > 0) {
      const Vec2d end = spec.center + t_end * spec.velocity;
      path.ellipses.push_back({end, spec.semi_axis_1, spec.semi_axis_2, color, false, 0.35});
      path.ellipses.push_back({end, resolved.radius, resolved.radius, color, true, 0.35});
      Series track;
      track.color = color;
      track.dashed = true;
      track.points = {spec.center, end};
      path.series.push_back(std::move(track));
    }
  }
  write_figure(path, dir / "path.svg");

  Figure barrier;
  barrier.title = "barrier value";
  barrier.xlabel = "t [s]";
  barrier.ylabel = "h";
  barrier.mark_zero = true;
  Figure constraint;
  constraint.title = "constraint margin at the reference input";
  constraint.xlabel = "t [s]";
  constraint.ylabel = "psi";
  constraint.mark_zero = true;
  for (std::size_t i = 0; i < config.obstacles.size(); ++i) {
    Series h_series, psi_series;
    h_series.label = "obstacle " + std::to_string(i);
    h_series.color = kPalette[1 + i % 4];
    psi_series.label = h_series.label;
    psi_series.color = h_series.color;
    for (const auto& rec : result.records) {
      h_series.points.push_back({rec.t, rec.obstacles[i].h});
      psi_series.points.push_back({rec.t, rec.obstacles[i].psi});
    }
    barrier.series.push_back(std::move(h_series));
    constraint.series.push_back(std::move(psi_series));
  }
  write_figure(barrier, dir / "barrier.svg");
  write_figure(constraint, dir / "constraint.svg");

  Figure inputs;
  inputs.title = "reference vs applied input";
  inputs.xlabel = "t [s]";
  inputs.ylabel = "input";
  inputs.mark_zero = true;
  const char* axis_names[2];
  if (vertical) {
    axis_names[0] = "accel";
    axis_names[1] = "alpha";
  } else {
    axis_names[0] = "ax";
    axis_names[1] = "az";
  }
  for (int axis = 0; axis < 2; ++axis) {
    Series ref, safe;
    ref.label = std::string(axis_names[axis]) + " ref";
    ref.color = kPalette[axis];
    ref.dashed = true;
    safe.label = std::string(axis_names[axis]) + " safe";
    safe.color = kPalette[axis];
    for (const auto& rec : result.records) {
      ref.points.push_back({rec.t, rec.u_ref[axis]});
      safe.points.push_back({rec.t, rec.u_safe[axis]});
    }
    inputs.series.push_back(std::move(ref));
    inputs.series.push_back(std::move(safe));
  }
  write_figure(inputs, dir / "inputs.svg");
}

}  // namespace c3bf
