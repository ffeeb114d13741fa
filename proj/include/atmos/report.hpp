#ifndef ATMOS_REPORT_HPP
#define ATMOS_REPORT_HPP

// Run configuration (sectioned key = value files), run reports and their
// JSON / CSV / SVG emission.

#include "atmos/errors.hpp"
#include "atmos/model.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace atmos
{

inline constexpr const char* version_string = "1.0.0";

// ---------------------------------------------------------------------------
// Configuration

struct RunConfig
{
  double gamma = 1.5;
  double R = 2.0;
  std::vector<int> modes{1};
  std::vector<double> amplitudes{1.0};
  std::vector<double> eps{4e-3, 2e-3, 1e-3};
  double T = 0.0;         ///< absolute final time; 0 means T_periods of mode 1
  double T_periods = 3.0;
  std::vector<int> grids{64, 128, 256};
  double dt = 0.0; ///< 0 = auto
  double cfl = 0.5;
  std::string output_dir = ".";
  std::uint64_t seed = 1;

  void validate() const
  {
    make_params(gamma, R);
    if (modes.empty() || modes.size() != amplitudes.size())
      throw DomainError("config: modes and amplitudes must be non-empty and of equal length");
    for (int m : modes)
      if (m < 1)
        throw DomainError("config: mode indices must be >= 1");
    for (std::size_t k = 0; k < eps.size(); ++k) {
      if (!(eps[k] >= 0.0))
        throw DomainError("config: eps values must be nonnegative");
      if (k > 0 && !(eps[k] < eps[k - 1]))
        throw DomainError("config: eps list must be strictly decreasing");
    }
    for (std::size_t k = 0; k < grids.size(); ++k) {
      const int n = grids[k];
      if (n < 4 || (n & (n - 1)) != 0)
        throw DomainError("config: grid sizes must be powers of 2 (got " + std::to_string(n) + ")");
      if (k > 0 && !(n > grids[k - 1]))
        throw DomainError("config: grid sizes must be strictly increasing");
    }
    if (!(T >= 0.0) || !(T_periods > 0.0))
      throw DomainError("config: T must be >= 0 and T_periods > 0");
    if (!(cfl > 0.0) || !(dt >= 0.0))
      throw DomainError("config: cfl must be positive and dt nonnegative");
  }
};

namespace detail
{

template <class T>
std::vector<T> parse_list(const std::string& s)
{
  std::vector<T> out;
  std::string item;
  std::stringstream in(s);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty())
      continue;
    std::stringstream conv(item);
    T v{};
    conv >> v;
    if (conv.fail() || !conv.eof())
      throw IoError("config: cannot parse list element '" + item + "'");
    out.push_back(v);
  }
  return out;
}

} // namespace detail

/// Reads a sectioned key = value file. Missing keys keep their defaults.
inline RunConfig load_config(const std::string& path, RunConfig cfg = {})
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  }
  catch (const pt::ini_parser_error& e) {
    throw IoError("config: " + std::string(e.what()));
  }
  try {
    cfg.gamma = tree.get("model.gamma", cfg.gamma);
    cfg.R = tree.get("model.R", cfg.R);
    if (auto v = tree.get_optional<std::string>("modes.indices"))
      cfg.modes = detail::parse_list<int>(*v);
    if (auto v = tree.get_optional<std::string>("modes.amplitudes"))
      cfg.amplitudes = detail::parse_list<double>(*v);
    if (auto v = tree.get_optional<std::string>("sweep.eps"))
      cfg.eps = detail::parse_list<double>(*v);
    cfg.T = tree.get("time.T", cfg.T);
    cfg.T_periods = tree.get("time.periods", cfg.T_periods);
    const std::string dt = tree.get("time.dt", std::string("auto"));
    cfg.dt = dt == "auto" ? 0.0 : std::stod(dt);
    cfg.cfl = tree.get("time.cfl", cfg.cfl);
    if (auto v = tree.get_optional<std::string>("grid.sizes"))
      cfg.grids = detail::parse_list<int>(*v);
    cfg.output_dir = tree.get("output.dir", cfg.output_dir);
    cfg.seed = tree.get("run.seed", cfg.seed);
  }
  catch (const pt::ptree_error& e) {
    throw IoError("config: " + std::string(e.what()));
  }
  catch (const std::invalid_argument&) {
    throw IoError("config: time.dt must be 'auto' or a number");
  }
  cfg.validate();
  return cfg;
}

inline nlohmann::json to_json(const RunConfig& c)
{
  return {{"gamma", c.gamma}, {"R", c.R},     {"modes", c.modes},      {"amplitudes", c.amplitudes},
          {"eps", c.eps},     {"T", c.T},     {"T_periods", c.T_periods}, {"grids", c.grids},
          {"dt", c.dt},       {"cfl", c.cfl}, {"seed", c.seed}};
}

// ---------------------------------------------------------------------------
// Reports

/// One tested number together with the window it was tested against.
struct Measurement
{
  std::string name;
  double value = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool pass = true;
  bool fatal = true; ///< false for flagged-only quantities
  std::string note;
};

struct RunReport
{
  std::string kind;
  std::vector<Measurement> checks;
  nlohmann::json records = nlohmann::json::array();
  nlohmann::json environment = {{"version", version_string}};

  Measurement& check(const std::string& name, double value, double lo, double hi, std::string note = {},
                     bool fatal = true)
  {
    Measurement m;
    m.name = name;
    m.value = value;
    m.lo = lo;
    m.hi = hi;
    m.pass = value >= lo && value <= hi;
    m.fatal = fatal;
    m.note = std::move(note);
    checks.push_back(m);
    return checks.back();
  }

  bool passed() const
  {
    return std::all_of(checks.begin(), checks.end(), [](const Measurement& m) { return m.pass || !m.fatal; });
  }
};

namespace detail
{

inline nlohmann::json bound_json(double v)
{
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  return v;
}

inline nlohmann::json number_json(double v)
{
  if (std::isnan(v))
    return "nan";
  return bound_json(v);
}

inline std::ofstream open_out(const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  return out;
}

} // namespace detail

inline nlohmann::json to_json(const RunReport& r)
{
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& m : r.checks)
    checks.push_back({{"name", m.name},
                      {"value", detail::number_json(m.value)},
                      {"lo", detail::bound_json(m.lo)},
                      {"hi", detail::bound_json(m.hi)},
                      {"pass", m.pass},
                      {"fatal", m.fatal},
                      {"note", m.note}});
  return {{"kind", r.kind},
          {"passed", r.passed()},
          {"checks", checks},
          {"records", r.records},
          {"environment", r.environment}};
}

/// Writes prefix.json or prefix.csv (checks table, stable column order).
inline void emit_report(const RunReport& r, const std::string& prefix, const std::string& format)
{
  if (format == "json") {
    auto out = detail::open_out(prefix + ".json");
    out << to_json(r).dump(2) << "\n";
    if (!out)
      throw IoError("write failed: " + prefix + ".json");
  }
  else if (format == "csv") {
    auto out = detail::open_out(prefix + ".csv");
    out << "name,value,lo,hi,pass,note\n";
    for (const auto& m : r.checks)
      out << m.name << "," << m.value << "," << m.lo << "," << m.hi << "," << (m.pass ? 1 : 0) << ",\"" << m.note
          << "\"\n";
    if (!out)
      throw IoError("write failed: " + prefix + ".csv");
  }
  else {
    throw DomainError("emit_report: format must be csv or json");
  }
}

/// Column-oriented CSV; all columns must have the same length.
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns)
{
  if (header.size() != columns.size())
    throw DomainError("write_csv: header and column counts differ");
  const std::size_t rows = columns.empty() ? 0 : columns[0].size();
  for (const auto& c : columns)
    if (c.size() != rows)
      throw DomainError("write_csv: ragged columns");
  auto out = detail::open_out(path);
  for (std::size_t j = 0; j < header.size(); ++j)
    out << (j ? "," : "") << header[j];
  out << "\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j)
      out << (j ? "," : "") << columns[j][i];
    out << "\n";
  }
  if (!out)
    throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// SVG line charts

struct PlotSeries
{
  std::string label;
  std::vector<double> x, y;
  bool dashed = false;
  bool markers = false;
};

struct PlotSpec
{
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
};

inline void emit_plot(const std::string& path, const PlotSpec& spec, const std::vector<PlotSeries>& series)
{
  const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if ((spec.logx && !(s.x[i] > 0)) || (spec.logy && !(s.y[i] > 0)))
        continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (!std::isfinite(x0)) {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 == x0)
    x1 = x0 + 1;
  if (y1 == y0)
    y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (ty(v) - y0) / (y1 - y0) * (H - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  auto out = detail::open_out(path);
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << spec.title << "</text>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    const double gx = ml + (W - ml - mr) * k / 4.0, gy = H - mb - (H - mt - mb) * k / 4.0;
    out << "<text x=\"" << gx << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
        << (spec.logx ? std::pow(10.0, fx) : fx) << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
        << (spec.logy ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">" << spec.xlabel
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << H / 2 << ")\">" << spec.ylabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = colors[k % 6];
    out << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if ((spec.logx && !(s.x[i] > 0)) || (spec.logy && !(s.y[i] > 0)))
        continue;
      out << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    out << "\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
        out << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    out << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 15 * k << "\" font-size=\"12\" fill=\"" << col << "\">"
        << s.label << "</text>\n";
  }
  out << "</svg>\n";
  if (!out)
    throw IoError("write failed: " + path);
}

} // namespace atmos

#endif
