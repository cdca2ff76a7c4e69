#include "stochdispatch/cliio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "stochdispatch/errors.hpp"

namespace stochdispatch {
namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

template <class Int>
std::optional<Int> to_int(const std::string& s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw InputError("write failed for " + path.string());
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Provenance parse_provenance(const std::string& name) {
  if (name == "mc") return Provenance::kMonteCarlo;
  if (name == "is") return Provenance::kImportance;
  if (name == "bq") return Provenance::kQuadrature;
  throw InputError("unknown strategy '" + name + "' (expected mc, is or bq)");
}

void RunConfig::validate() const {
  if (strategies.empty()) throw InputError("no strategies selected");
  if (scenario_counts.empty()) throw InputError("no scenario counts given");
  if (seeds.empty()) throw InputError("no seeds given");
  for (int n : scenario_counts) {
    if (n < 1) throw InputError("scenario counts must be >= 1");
  }
  if (grid_nodes < 2) throw InputError("grid nodes must be >= 2");
  if (!fs::exists(system_config)) {
    throw InputError("system config not found: " + system_config.string());
  }
  if (!fs::exists(timeseries)) throw InputError("timeseries not found: " + timeseries.string());
}

std::int64_t parse_iso8601(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0, consumed = 0;
  std::string t = text;
  if (!t.empty() && (t.back() == 'Z' || t.back() == 'z')) t.pop_back();
  const int fields = std::sscanf(t.c_str(), "%4d-%2d-%2d%*1[T ]%2d:%2d%n", &y, &mo, &d, &h, &mi,
                                 &consumed);
  if (fields != 5) throw InputError("bad timestamp '" + text + "'");
  std::string_view rest(t.c_str() + consumed);
  if (!rest.empty()) {
    if (rest.size() != 3 || rest[0] != ':' || !std::isdigit(static_cast<unsigned char>(rest[1])) ||
        !std::isdigit(static_cast<unsigned char>(rest[2]))) {
      throw InputError("bad timestamp '" + text + "'");
    }
    s = (rest[1] - '0') * 10 + (rest[2] - '0');
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) {
    throw InputError("bad timestamp '" + text + "'");
  }
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  return days * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60));
  return buf;
}

Timeseries load_timeseries_csv(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split(line, ',');
  int col_ts = -1, col_load = -1, col_wind = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "timestamp") col_ts = static_cast<int>(i);
    if (header[i] == "load_mw") col_load = static_cast<int>(i);
    if (header[i] == "wind_mw") col_wind = static_cast<int>(i);
  }
  for (auto [col, name] : {std::pair{col_ts, "timestamp"}, std::pair{col_load, "load_mw"},
                           std::pair{col_wind, "wind_mw"}}) {
    if (col < 0) throw ParseError(path.string() + ": missing column '" + name + "'", 1);
  }

  Timeseries ts;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size()) {
      throw ParseError(path.string() + ": expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(cells.size()),
                       lineno);
    }
    std::int64_t stamp = 0;
    try {
      stamp = parse_iso8601(cells[col_ts]);
    } catch (const InputError& e) {
      throw ParseError(path.string() + ": " + e.what(), lineno);
    }
    const auto load = to_double(cells[col_load]);
    const auto wind = to_double(cells[col_wind]);
    if (!load) throw ParseError(path.string() + ": bad load_mw '" + cells[col_load] + "'", lineno);
    if (!wind) throw ParseError(path.string() + ": bad wind_mw '" + cells[col_wind] + "'", lineno);
    if (*wind < 0.0) throw ParseError(path.string() + ": negative wind_mw", lineno);
    if (*load < 0.0) throw ParseError(path.string() + ": negative load_mw", lineno);
    if (!ts.timestamps.empty()) {
      const std::int64_t gap = stamp - ts.timestamps.back();
      if (gap <= 0) throw ParseError(path.string() + ": timestamps not increasing", lineno);
      if (gap != kStepSeconds) {
        throw ParseError(path.string() + ": spacing of " + std::to_string(gap) +
                             " s, expected 300 s",
                         lineno);
      }
    }
    ts.timestamps.push_back(stamp);
    ts.load.push_back(*load);
    ts.wind.push_back(*wind);
  }
  if (ts.size() == 0) throw ParseError(path.string() + ": no data rows", lineno);
  return ts;
}

void write_timeseries_csv(const Timeseries& ts, const fs::path& path) {
  std::ofstream out = open_output(path);
  out << "timestamp,load_mw,wind_mw\n";
  for (std::size_t i = 0; i < ts.size(); ++i) {
    out << format_iso8601(ts.timestamps[i]) << ',' << format_number(ts.load[i]) << ','
        << format_number(ts.wind[i]) << '\n';
  }
  close_output(out, path);
}

namespace {

struct Section {
  std::string name;
  int index = 0;  // occurrence count among sections of the same name
  int line = 0;
  std::map<std::string, std::pair<std::string, int>> values;  // key -> (value, line)
};

class SectionReader {
 public:
  SectionReader(const Section& s, const fs::path& path) : s_(s), path_(path) {}

  std::string key_path(const std::string& key) const {
    return s_.name + "[" + std::to_string(s_.index) + "]." + key;
  }

  double number(const std::string& key) const {
    const auto& [text, line] = raw(key);
    const auto v = to_double(text);
    if (!v) throw ParseError(path_.string() + ": " + key_path(key) + " is not a number", line);
    return *v;
  }

  std::optional<double> optional_number(const std::string& key) const {
    if (!s_.values.count(key)) return std::nullopt;
    return number(key);
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    const auto it = s_.values.find(key);
    return it == s_.values.end() ? fallback : it->second.first;
  }

  void reject_unknown(std::initializer_list<const char*> known) const {
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, entry] : s_.values) {
      if (!allowed.count(key)) {
        throw ParseError(path_.string() + ": unknown key " + key_path(key), entry.second);
      }
    }
  }

  template <class T>
  std::vector<T> list(const std::string& key, T (*convert)(const std::string&)) const {
    std::vector<T> out;
    if (!s_.values.count(key)) return out;
    const auto& [text, line] = raw(key);
    for (const std::string& item : split(text, ',')) {
      try {
        out.push_back(convert(item));
      } catch (const InputError& e) {
        throw ParseError(path_.string() + ": " + key_path(key) + ": " + e.what(), line);
      }
    }
    return out;
  }

 private:
  const std::pair<std::string, int>& raw(const std::string& key) const {
    const auto it = s_.values.find(key);
    if (it == s_.values.end()) {
      throw ParseError(path_.string() + ": missing key " + key_path(key), s_.line);
    }
    return it->second;
  }

  const Section& s_;
  const fs::path& path_;
};

int parse_count(const std::string& s) {
  const auto v = to_int<int>(s);
  if (!v) throw InputError("bad integer '" + s + "'");
  return *v;
}

std::uint64_t parse_seed(const std::string& s) {
  const auto v = to_int<std::uint64_t>(s);
  if (!v) throw InputError("bad seed '" + s + "'");
  return *v;
}

std::vector<Section> read_sections(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<Section> sections;
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError(path.string() + ": unterminated section", lineno);
      Section s;
      s.name = trim(body.substr(1, body.size() - 2));
      s.index = seen[s.name]++;
      s.line = lineno;
      sections.push_back(std::move(s));
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(path.string() + ": expected key = value", lineno);
    if (sections.empty()) throw ParseError(path.string() + ": key outside a section", lineno);
    std::string key = trim(body.substr(0, eq));
    std::string value = trim(body.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    Section& s = sections.back();
    if (s.values.count(key)) {
      throw ParseError(path.string() + ": duplicate key " + s.name + "[" +
                           std::to_string(s.index) + "]." + key,
                       lineno);
    }
    s.values.emplace(std::move(key), std::pair{std::move(value), lineno});
  }
  return sections;
}

}  // namespace

SystemConfig load_system_config_full(const fs::path& path) {
  SystemConfig cfg;
  bool have_run = false;
  for (const Section& s : read_sections(path)) {
    const SectionReader r(s, path);
    const std::string fallback_id = s.name + std::to_string(s.index);
    if (s.name == "generator") {
      r.reject_unknown({"id", "c_g", "x_min", "x_max", "r_up", "r_down"});
      ThermalGenerator g;
      g.id = r.text("id", fallback_id);
      g.cost = r.number("c_g");
      g.x_min = r.number("x_min");
      g.x_max = r.number("x_max");
      g.ramp_up = r.number("r_up");
      g.ramp_down = r.number("r_down");
      cfg.system.generators.push_back(std::move(g));
    } else if (s.name == "wind") {
      r.reject_unknown({"id", "c_w", "c_spl"});
      WindPlant w;
      w.id = r.text("id", fallback_id);
      w.cost = r.optional_number("c_w").value_or(0.0);
      w.spill_cost = r.optional_number("c_spl").value_or(0.0);
      cfg.system.wind.push_back(std::move(w));
    } else if (s.name == "load") {
      r.reject_unknown({"id", "c_plus", "c_minus"});
      LoadBus l;
      l.id = r.text("id", fallback_id);
      l.c_plus = r.optional_number("c_plus").value_or(kDefaultLossOfLoadCost);
      l.c_minus = r.optional_number("c_minus").value_or(kDefaultExcessCost);
      cfg.system.loads.push_back(std::move(l));
    } else if (s.name == "run") {
      if (have_run) throw ParseError(path.string() + ": repeated [run] section", s.line);
      have_run = true;
      r.reject_unknown({"timeseries", "strategies", "scenario_counts", "seeds", "grid_nodes",
                        "kernel_tau", "kernel_l"});
      const std::string ts = r.text("timeseries", "");
      if (!ts.empty()) {
        const fs::path p(ts);
        cfg.run.timeseries = p.is_absolute() ? p : path.parent_path() / p;
      }
      cfg.run.strategies = r.list<Provenance>("strategies", &parse_provenance);
      cfg.run.scenario_counts = r.list<int>("scenario_counts", &parse_count);
      cfg.run.seeds = r.list<std::uint64_t>("seeds", &parse_seed);
      if (const auto g = r.optional_number("grid_nodes")) {
        cfg.run.grid_nodes = static_cast<int>(*g);
      }
      cfg.run.kernel_tau = r.optional_number("kernel_tau");
      cfg.run.kernel_l = r.optional_number("kernel_l");
    } else {
      throw ParseError(path.string() + ": unknown section [" + s.name + "]", s.line);
    }
  }
  require_valid(validate_system(cfg.system), path.string());
  return cfg;
}

SystemModel load_system_config(const fs::path& path) {
  return load_system_config_full(path).system;
}

namespace {

void write_table(const fs::path& path, const CostSummary& s,
                 const std::vector<std::vector<double>>& table) {
  std::ofstream out = open_output(path);
  out << 'n';
  for (Provenance p : s.strategies) out << ',' << to_string(p);
  out << '\n';
  for (std::size_t r = 0; r < s.counts.size(); ++r) {
    out << s.counts[r];
    for (double v : table[r]) out << ',' << (std::isnan(v) ? std::string() : format_number(v));
    out << '\n';
  }
  close_output(out, path);
}

void write_run(const fs::path& path, const SimResult& run) {
  std::ofstream out = open_output(path);
  out << "timestamp,load_mw,wind_forecast_mw,realized_error_mw,dispatch_mw,first_stage_cost,"
         "second_stage_cost,expected_recourse,loss_of_load_mw\n";
  for (const SimStep& s : run.steps) {
    double dispatch = 0.0;
    for (double x : s.dispatch) dispatch += x;
    out << format_iso8601(s.timestamp) << ',' << format_number(s.load) << ','
        << format_number(s.wind_forecast) << ',' << format_number(s.realized_error) << ','
        << format_number(dispatch) << ',' << format_number(s.first_stage_cost) << ','
        << format_number(s.second_stage_cost) << ',' << format_number(s.expected_recourse)
        << ',' << format_number(s.loss_of_load) << '\n';
  }
  close_output(out, path);
}

}  // namespace

WrittenFiles write_report(const CostSummary& summary, const ResultGrid& results,
                          const fs::path& outdir) {
  std::size_t runs = 0;
  for (const auto& [strategy, by_n] : results) {
    for (const auto& [n, list] : by_n) runs += list.size();
  }
  if (runs == 0 || summary.counts.empty()) throw InputError("no results to report");
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw InputError("cannot create " + outdir.string() + ": " + ec.message());

  WrittenFiles written;
  const std::pair<const char*, const std::vector<std::vector<double>>*> tables[] = {
      {"costs_total.csv", &summary.total},
      {"costs_stage1.csv", &summary.first_stage},
      {"costs_stage2.csv", &summary.second_stage}};
  for (const auto& [name, table] : tables) {
    write_table(outdir / name, summary, *table);
    written.paths.push_back(outdir / name);
  }
  for (const auto& [strategy, by_n] : results) {
    for (const auto& [n, list] : by_n) {
      for (const SimResult& run : list) {
        std::string name = std::string("timeseries_") + to_string(strategy) + "_" +
                           std::to_string(n);
        if (list.size() > 1) name += "_seed" + std::to_string(run.seed);
        const fs::path p = outdir / (name + ".csv");
        write_run(p, run);
        written.paths.push_back(p);
      }
    }
  }
  return written;
}

CostTable read_cost_table(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file", 1);
  std::vector<std::string> header = split(line, ',');
  if (header.empty() || header.front() != "n") {
    throw ParseError(path.string() + ": header must start with 'n'", 1);
  }
  CostTable t;
  t.columns.assign(header.begin() + 1, header.end());
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != header.size()) throw ParseError(path.string() + ": ragged row", lineno);
    const auto n = to_int<int>(cells[0]);
    if (!n) throw ParseError(path.string() + ": bad count '" + cells[0] + "'", lineno);
    t.counts.push_back(*n);
    std::vector<double> row;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      row.push_back(cells[i].empty() ? std::nan("") : to_double(cells[i]).value_or(std::nan("")));
    }
    t.values.push_back(std::move(row));
  }
  return t;
}

}  // namespace stochdispatch
