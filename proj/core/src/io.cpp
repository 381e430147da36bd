#include "voimpc/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "voimpc/error.hpp"

namespace voimpc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos
                                                                             : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Shortest text that parses back to the same double.
std::string format_exact(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

long long window_seconds(double window_hours) {
  if (!std::isfinite(window_hours) || window_hours <= 0.0) {
    throw InputError("window length must be > 0 hours");
  }
  const auto w = std::llround(window_hours * kSecondsPerHour);
  if (w <= 0) throw InputError("window length too short");
  return w;
}

TimeSeries resample_impl(const std::vector<TimePoint>& t, const std::vector<double>& v,
                         Aggregation aggregation, double window_hours,
                         const std::string& source, const std::vector<std::size_t>* lines) {
  if (t.size() != v.size()) throw InputError(source + ": timestamp/value count mismatch");
  if (t.empty()) throw ParseError(source, 0, "no data rows");
  const long long w = window_seconds(window_hours);
  auto where = [&](std::size_t i) { return lines ? (*lines)[i] : std::size_t{0}; };
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(v[i])) throw ParseError(source, where(i), "non-finite value");
    if (i == 0) continue;
    const auto dt = (t[i] - t[i - 1]).count();
    if (dt <= 0) {
      throw ParseError(source, where(i),
                       "timestamps not strictly increasing (" + format_timestamp(t[i - 1]) +
                           " then " + format_timestamp(t[i]) + ")");
    }
    if (dt > w) {
      throw ParseError(source, where(i),
                       "gap of " + std::to_string(dt) + " s between " +
                           format_timestamp(t[i - 1]) + " and " + format_timestamp(t[i]) +
                           " exceeds one window");
    }
  }
  const long long first = t.front().time_since_epoch().count();
  const long long origin = first - ((first % w) + w) % w;
  const auto index = [&](TimePoint p) {
    return static_cast<std::size_t>((p.time_since_epoch().count() - origin) / w);
  };
  const std::size_t n = index(t.back()) + 1;
  std::vector<double> acc(n, 0.0);
  std::vector<std::size_t> count(n, 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto k = index(t[i]);
    if (aggregation == Aggregation::max) {
      acc[k] = count[k] == 0 ? v[i] : std::max(acc[k], v[i]);
    } else {
      acc[k] += v[i];
    }
    ++count[k];
  }
  TimeSeries out;
  double carried = v.front();
  std::size_t next_sample = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const TimePoint start{std::chrono::seconds(origin + static_cast<long long>(k) * w)};
    out.timestamps.push_back(start);
    if (count[k] > 0) {
      out.values.push_back(aggregation == Aggregation::max
                               ? acc[k]
                               : acc[k] / static_cast<double>(count[k]));
    } else {
      out.values.push_back(carried);  // last observation carried forward
    }
    while (next_sample < t.size() && index(t[next_sample]) <= k) carried = v[next_sample++];
  }
  return out;
}

// NASA POWER exports wrap a YEAR,MO,DY,HR,<PARAM> table in a header block.
bool read_nasa_power(std::istream& in, const std::string& first_line, const ColumnSpec& spec,
                     const std::string& source, std::vector<TimePoint>& t,
                     std::vector<double>& v, std::vector<std::size_t>& lines) {
  if (trim(first_line) != "-BEGIN HEADER-") return false;
  std::string line;
  std::size_t lineno = 1;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line) == "-END HEADER-") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw ParseError(source, lineno, "missing -END HEADER-");
  if (!std::getline(in, line)) throw ParseError(source, lineno, "missing column header");
  ++lineno;
  const auto cols = split_csv(line);
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < cols.size(); ++i) pos[cols[i]] = i;
  for (const char* need : {"YEAR", "MO", "DY", "HR"}) {
    if (!pos.count(need)) throw ParseError(source, lineno, std::string("missing column ") + need);
  }
  std::size_t value_col = cols.size();
  if (!spec.value_column.empty()) {
    if (!pos.count(spec.value_column)) {
      throw ParseError(source, lineno, "missing column " + spec.value_column);
    }
    value_col = pos[spec.value_column];
  } else if (cols.size() == 5) {
    value_col = 4;
  } else {
    throw ParseError(source, lineno, "several parameter columns; name one explicitly");
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != cols.size()) throw ParseError(source, lineno, "wrong number of fields");
    double y, mo, dy, hr, val;
    if (!parse_number(f[pos["YEAR"]], y) || !parse_number(f[pos["MO"]], mo) ||
        !parse_number(f[pos["DY"]], dy) || !parse_number(f[pos["HR"]], hr) ||
        !parse_number(f[value_col], val)) {
      throw ParseError(source, lineno, "malformed number");
    }
    if (val == -999.0) throw ParseError(source, lineno, "missing value (-999)");
    const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(y)},
                                          std::chrono::month{static_cast<unsigned>(mo)},
                                          std::chrono::day{static_cast<unsigned>(dy)}};
    if (!ymd.ok() || hr < 0 || hr > 23) throw ParseError(source, lineno, "invalid date");
    t.push_back(TimePoint{std::chrono::sys_days{ymd}} +
                std::chrono::hours(static_cast<int>(hr)));
    v.push_back(val);
    lines.push_back(lineno);
  }
  return true;
}

}  // namespace

TimePoint parse_timestamp(std::string_view text) {
  const std::string s(trim(text));
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, used = 0;
  char sep = 0;
  const auto bad = [&]() { return InputError("invalid ISO-8601 timestamp '" + s + "'"); };
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &used) != 3 || used != 10) throw bad();
  std::size_t p = 10;
  if (p < s.size()) {
    sep = s[p];
    if (sep != 'T' && sep != ' ') throw bad();
    ++p;
    int n = 0;
    if (std::sscanf(s.c_str() + p, "%2d:%2d%n", &h, &mi, &n) != 2 || n != 5) throw bad();
    p += 5;
    if (p < s.size() && s[p] == ':') {
      if (std::sscanf(s.c_str() + p, ":%2d%n", &sec, &n) != 1 || n != 3) throw bad();
      p += 3;
    }
  }
  long long offset = 0;
  if (p < s.size()) {
    if (s[p] == 'Z' && p + 1 == s.size()) {
      ++p;
    } else if (s[p] == '+' || s[p] == '-') {
      int oh = 0, om = 0, n = 0;
      if (std::sscanf(s.c_str() + p + 1, "%2d:%2d%n", &oh, &om, &n) != 2 || p + 1 + n != s.size()) {
        throw bad();
      }
      offset = (s[p] == '+' ? 1 : -1) * (oh * 3600LL + om * 60LL);
      p = s.size();
    } else {
      throw bad();
    }
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(mo)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60 || h < 0 || mi < 0 || sec < 0) throw bad();
  return TimePoint{std::chrono::sys_days{ymd}} + std::chrono::hours(h) +
         std::chrono::minutes(mi) + std::chrono::seconds(sec - offset);
}

std::string format_timestamp(TimePoint t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

TimeSeries resample_to_windows(const std::vector<TimePoint>& t, const std::vector<double>& v,
                               Aggregation aggregation, double window_hours,
                               const std::string& source) {
  return resample_impl(t, v, aggregation, window_hours, source, nullptr);
}

TimeSeries load_timeseries(const fs::path& path, const ColumnSpec& spec) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::vector<TimePoint> t;
  std::vector<double> v;
  std::vector<std::size_t> lines;
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file");
  if (!read_nasa_power(in, line, spec, source, t, v, lines)) {
    const auto header = split_csv(line);
    std::size_t ts_col = header.size(), val_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == spec.timestamp_column) ts_col = i;
      if (!spec.value_column.empty() && header[i] == spec.value_column) val_col = i;
    }
    if (ts_col == header.size()) {
      throw ParseError(source, 1, "missing timestamp column '" + spec.timestamp_column + "'");
    }
    if (spec.value_column.empty()) {
      if (header.size() != 2) throw ParseError(source, 1, "expected exactly one value column");
      val_col = 1 - ts_col;
    } else if (val_col == header.size()) {
      throw ParseError(source, 1, "missing value column '" + spec.value_column + "'");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      const auto f = split_csv(line);
      if (f.size() != header.size()) throw ParseError(source, lineno, "wrong number of fields");
      double value = 0.0;
      if (!parse_number(f[val_col], value)) {
        throw ParseError(source, lineno, "malformed number '" + f[val_col] + "'");
      }
      try {
        t.push_back(parse_timestamp(f[ts_col]));
      } catch (const InputError& e) {
        throw ParseError(source, lineno, e.what());
      }
      v.push_back(value);
      lines.push_back(lineno);
    }
  }
  return resample_impl(t, v, spec.aggregation, spec.window_hours, source, &lines);
}

void write_timeseries(const TimeSeries& series, const std::string& value_name,
                      const fs::path& path) {
  std::string out = "timestamp," + value_name + "\n";
  for (std::size_t i = 0; i < series.timestamps.size(); ++i) {
    out += format_timestamp(series.timestamps[i]) + "," + format_exact(series.values[i]) + "\n";
  }
  write_file(path, out);
}

Dataset align_dataset(const TimeSeries& process, const TimeSeries& irradiance,
                      double window_hours) {
  if (process.timestamps.empty() || irradiance.timestamps.empty()) {
    throw InputError("cannot align empty series");
  }
  const TimePoint start = std::max(process.timestamps.front(), irradiance.timestamps.front());
  const TimePoint end = std::min(process.timestamps.back(), irradiance.timestamps.back());
  if (start > end) throw InputError("process and irradiance series do not overlap");
  Dataset ds;
  ds.window_delta = window_hours;
  auto offset = [&](const TimeSeries& s) {
    return static_cast<std::size_t>(
        std::lower_bound(s.timestamps.begin(), s.timestamps.end(), start) - s.timestamps.begin());
  };
  const std::size_t po = offset(process), io = offset(irradiance);
  for (std::size_t k = 0; po + k < process.timestamps.size() &&
                          io + k < irradiance.timestamps.size() &&
                          process.timestamps[po + k] <= end;
       ++k) {
    if (process.timestamps[po + k] != irradiance.timestamps[io + k]) {
      throw InputError("process and irradiance windows are not aligned at " +
                       format_timestamp(process.timestamps[po + k]));
    }
    ds.timestamps.push_back(process.timestamps[po + k]);
    ds.process.push_back(process.values[po + k]);
    ds.irradiance.push_back(irradiance.values[io + k]);
  }
  ds.validate();
  return ds;
}

OcvCurve load_ocv_table(const fs::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file");
  const auto header = split_csv(line);
  if (header.size() != 2 || header[0] != "soc" || header[1] != "voltage") {
    throw ParseError(source, 1, "header must be 'soc,voltage'");
  }
  std::vector<OcvCurve::Knot> knots;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    OcvCurve::Knot k{};
    if (f.size() != 2 || !parse_number(f[0], k.soc) || !parse_number(f[1], k.voltage)) {
      throw ParseError(source, lineno, "expected two numbers");
    }
    if (!knots.empty() && !(k.soc > knots.back().soc)) {
      throw ParseError(source, lineno, "soc not strictly increasing");
    }
    knots.push_back(k);
  }
  try {
    return OcvCurve(std::move(knots));
  } catch (const InputError& e) {
    throw ParseError(source, 0, e.what());
  }
}

void write_ocv_table(const OcvCurve& curve, const fs::path& path) {
  std::string out = "soc,voltage\n";
  for (const auto& k : curve.knots()) {
    out += format_number(k.soc) + "," + format_number(k.voltage) + "\n";
  }
  write_file(path, out);
}

std::string format_trace(const Trace& trace) {
  std::string out = "timestamp,x,f_s,f_t,z,soe,voi,utility,state\n";
  for (const auto& r : trace.records) {
    out += format_timestamp(r.timestamp);
    for (double v : {r.x_observed, r.f_s_applied, r.f_t_applied, r.z, r.soe, r.voi, r.utility}) {
      out += ',';
      out += format_number(v);
    }
    out += r.node_state == NodeState::active ? ",active\n" : ",depleted\n";
  }
  return out;
}

void write_trace(const Trace& trace, const fs::path& path) { write_file(path, format_trace(trace)); }

Trace read_trace(const fs::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  std::string line;
  if (!std::getline(in, line) || line != "timestamp,x,f_s,f_t,z,soe,voi,utility,state") {
    throw ParseError(source, 1, "unexpected trace header");
  }
  Trace trace;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_csv(line);
    if (f.size() != 9) throw ParseError(source, lineno, "expected 9 fields");
    TraceRecord r;
    try {
      r.timestamp = parse_timestamp(f[0]);
    } catch (const InputError& e) {
      throw ParseError(source, lineno, e.what());
    }
    double* slots[] = {&r.x_observed, &r.f_s_applied, &r.f_t_applied, &r.z,
                       &r.soe,        &r.voi,         &r.utility};
    for (std::size_t i = 0; i < 7; ++i) {
      if (!parse_number(f[i + 1], *slots[i])) throw ParseError(source, lineno, "malformed number");
    }
    if (f[8] == "active") {
      r.node_state = NodeState::active;
    } else if (f[8] == "depleted") {
      r.node_state = NodeState::depleted;
    } else {
      throw ParseError(source, lineno, "unknown state '" + f[8] + "'");
    }
    trace.records.push_back(r);
  }
  return trace;
}

std::vector<VoiCurveRow> emit_voi_curve(const VoiParams& a, const VoiParams& b,
                                        const TimeSeries& levels, const Decision& fixed) {
  a.validate();
  b.validate();
  if (levels.timestamps.size() != levels.values.size()) {
    throw InputError("level series timestamp/value count mismatch");
  }
  std::vector<VoiCurveRow> rows;
  rows.reserve(levels.values.size());
  for (std::size_t i = 0; i < levels.values.size(); ++i) {
    const double x = levels.values[i];
    const auto ba = voi_breakdown(x, fixed.f_s, fixed.f_t, a);
    const auto bb = voi_breakdown(x, fixed.f_s, fixed.f_t, b);
    rows.push_back({levels.timestamps[i], x, ba.v_c, ba.v_i, bb.v_c, bb.v_i});
  }
  return rows;
}

void write_voi_curve(const std::vector<VoiCurveRow>& rows, const fs::path& path) {
  std::string out = "timestamp,level,v_c_a,voi_a,v_c_b,voi_b\n";
  for (const auto& r : rows) {
    out += format_timestamp(r.timestamp);
    for (double v : {r.level, r.v_c_a, r.voi_a, r.v_c_b, r.voi_b}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

// Reads one JSON object, rejecting keys that were never asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const std::string where = key.empty() ? path_ : (path_.empty() ? key : path_ + "." + key);
    throw InputError("config " + (where.empty() ? std::string("<root>") : where) + ": " + what);
  }

  const json* find(const std::string& key) {
    known_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(key, "must be finite");
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "expected an integer");
      const double d = v->get<double>();
      if (d != std::floor(d) || std::abs(d) > 1e9) fail(key, "expected an integer");
      out = static_cast<int>(d);
    }
  }

  void unsigned64(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(key, "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }

  std::optional<ObjectReader> child(const std::string& key) {
    if (const json* v = find(key)) return ObjectReader(*v, path_.empty() ? key : path_ + "." + key);
    return std::nullopt;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!known_.count(key)) fail(key, "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

void apply_override(json& root, const std::string& dotted, const std::string& value_text) {
  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::parse_error&) {
    value = value_text;  // bare strings such as file names
  }
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw InputError("config override: malformed key '" + dotted + "'");
    if (!node->is_object()) throw InputError("config override: '" + dotted + "' is not an object path");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir,
                           const ConfigOverrides& overrides) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  for (const auto& [key, value] : overrides) apply_override(root, key, value);

  RunConfig cfg;
  ObjectReader top(root, "");
  double delta = 1.0;
  top.number("delta_hours", delta);
  cfg.voi.delta = delta;
  cfg.mpc.delta = delta;

  if (auto r = top.child("voi")) {
    r->number("lambda_c", cfg.voi.lambda_c);
    r->number("x_c", cfg.voi.x_c);
    r->number("alpha_r", cfg.voi.alpha_r);
    r->number("alpha_d", cfg.voi.alpha_d);
    r->number("d_o", cfg.voi.d_o);
    r->finish();
  }
  if (auto r = top.child("battery")) {
    r->number("capacity_ah", cfg.capacity_ah);
    r->number("z_min", cfg.z_min);
    r->number("v_nom", cfg.v_nom);
    r->string("ocv_table", cfg.ocv_table);
    r->finish();
  }
  if (cfg.ocv_table.rfind("builtin:", 0) != 0) {
    cfg.ocv_table = resolve(base_dir, cfg.ocv_table).string();
  }
  if (auto r = top.child("profile")) {
    r->number("i_sleep_a", cfg.profile.i_sleep);
    r->number("i_sense_a", cfg.profile.i_sense);
    r->number("i_transmit_a", cfg.profile.i_transmit);
    r->number("d_sense_s", cfg.profile.d_sense);
    r->number("d_transmit_s", cfg.profile.d_transmit);
    r->finish();
  }
  if (auto r = top.child("harvest")) {
    r->number("efficiency", cfg.harvest.efficiency);
    r->number("panel_area_m2", cfg.harvest.panel_area);
    r->finish();
  }
  if (auto r = top.child("mpc")) {
    r->integer("horizon", cfg.mpc.horizon);
    r->number("discount", cfg.mpc.discount);
    r->number("w_i", cfg.mpc.w_i);
    r->number("w_e", cfg.mpc.w_e);
    r->number("f_s_max", cfg.mpc.f_s_max);
    r->number("f_t_max", cfg.mpc.f_t_max);
    r->finish();
  }
  if (auto r = top.child("initial")) {
    double v = 0.0;
    if (r->find("soe")) {
      r->number("soe", v);
      cfg.soe_initial = v;
    }
    if (r->find("z")) {
      r->number("z", v);
      cfg.z_initial = v;
    }
    r->finish();
  }
  if (auto r = top.child("sim")) {
    r->number("restart_hysteresis", cfg.sim.restart_hysteresis);
    r->integer("belief_lookback", cfg.sim.belief_lookback);
    r->finish();
  }
  if (auto r = top.child("dataset")) {
    const bool has_synth = r->find("synthetic") != nullptr;
    const bool has_csv = r->find("process_csv") || r->find("irradiance_csv");
    if (has_synth && has_csv) r->fail("", "give either 'synthetic' or CSV paths, not both");
    cfg.dataset.synthetic = !has_csv;
    if (auto s = r->child("synthetic")) {
      auto& sc = cfg.dataset.scenario;
      std::string start;
      s->string("start", start);
      if (!start.empty()) {
        try {
          sc.start = parse_timestamp(start);
        } catch (const InputError& e) {
          s->fail("start", e.what());
        }
      }
      s->integer("days", sc.days);
      s->number("base_level", sc.base_level);
      s->number("peak_level", sc.peak_level);
      if (const json* peaks = s->find("pulse_peaks_h")) {
        if (!peaks->is_array()) s->fail("pulse_peaks_h", "expected an array of numbers");
        sc.pulse_peaks_h.clear();
        for (const auto& p : *peaks) {
          if (!p.is_number()) s->fail("pulse_peaks_h", "expected an array of numbers");
          sc.pulse_peaks_h.push_back(p.get<double>());
        }
      }
      s->number("pulse_half_width_h", sc.pulse_half_width_h);
      s->number("irradiance_peak", sc.irradiance_peak);
      s->number("sunrise_h", sc.sunrise_h);
      s->number("sunset_h", sc.sunset_h);
      s->number("irradiance_scale", sc.irradiance_scale);
      s->number("level_noise", sc.level_noise);
      s->unsigned64("seed", sc.seed);
      s->finish();
    }
    std::string p;
    r->string("process_csv", p);
    if (!p.empty()) cfg.dataset.process_csv = resolve(base_dir, p);
    p.clear();
    r->string("irradiance_csv", p);
    if (!p.empty()) cfg.dataset.irradiance_csv = resolve(base_dir, p);
    r->string("timestamp_column", cfg.dataset.timestamp_column);
    r->string("process_column", cfg.dataset.process_column);
    r->string("irradiance_column", cfg.dataset.irradiance_column);
    r->finish();
  }
  std::string output;
  top.string("output", output);
  cfg.output = output.empty() ? fs::path("trace.csv") : resolve(base_dir, output);
  top.finish();

  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const fs::path& path, const ConfigOverrides& overrides) {
  auto in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.parent_path(), overrides);
}

void RunConfig::validate() const {
  auto wrap = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const InputError& e) {
      throw InputError(std::string("config ") + section + ": " + e.what());
    }
  };
  wrap("voi", [&] { voi.validate(); });
  wrap("profile", [&] { profile.validate(); });
  wrap("harvest", [&] { harvest.validate(); });
  wrap("mpc", [&] { mpc.validate(); });
  if (mpc.delta != voi.delta) throw InputError("config delta_hours: inconsistent window length");
  const NodeModel model = [&] {
    try {
      return node_model();
    } catch (const ParseError& e) {
      throw InputError(std::string("config battery.ocv_table: ") + e.what());
    } catch (const InputError& e) {
      throw InputError(std::string("config battery: ") + e.what());
    }
  }();
  (void)model;
  if (z_initial.has_value() == soe_initial.has_value()) {
    throw InputError("config initial: give exactly one of 'z' or 'soe'");
  }
  const double init = z_initial ? *z_initial : *soe_initial;
  if (!(init >= 0.0 && init <= 1.0)) {
    throw InputError(std::string("config initial.") + (z_initial ? "z" : "soe") +
                     ": must lie in [0, 1], got " + std::to_string(init));
  }
  if (!(sim.restart_hysteresis >= 0.0)) {
    throw InputError("config sim.restart_hysteresis: must be >= 0");
  }
  if (sim.belief_lookback < 1) throw InputError("config sim.belief_lookback: must be >= 1");
  if (!dataset.synthetic) {
    for (const auto& [key, p] : {std::pair{"process_csv", dataset.process_csv},
                                 std::pair{"irradiance_csv", dataset.irradiance_csv}}) {
      if (p.empty()) throw InputError(std::string("config dataset.") + key + ": missing");
      if (!fs::exists(p)) {
        throw InputError(std::string("config dataset.") + key + ": no such file " + p.string());
      }
    }
  } else if (voi.delta != 1.0) {
    throw InputError("config delta_hours: the synthetic scenario is hourly");
  }
}

NodeModel RunConfig::node_model() const {
  OcvCurve curve = ocv_table == "builtin:li-ion" ? OcvCurve::li_ion_default()
                   : ocv_table == "builtin:flat" ? OcvCurve::constant(v_nom)
                   : ocv_table.rfind("builtin:", 0) == 0
                       ? throw InputError("unknown builtin OCV table '" + ocv_table + "'")
                       : load_ocv_table(ocv_table);
  return NodeModel{voi, profile, harvest, BatteryModel(capacity_ah, z_min, v_nom, std::move(curve))};
}

Dataset RunConfig::load_dataset() const {
  if (dataset.synthetic) return generate_scenario(dataset.scenario);
  ColumnSpec ps{dataset.timestamp_column, dataset.process_column, Aggregation::max, voi.delta};
  ColumnSpec is{dataset.timestamp_column, dataset.irradiance_column, Aggregation::mean, voi.delta};
  return align_dataset(load_timeseries(dataset.process_csv, ps),
                       load_timeseries(dataset.irradiance_csv, is), voi.delta);
}

double RunConfig::initial_z(const BatteryModel& battery) const {
  return z_initial ? *z_initial : soc_from_soe(*soe_initial, battery);
}

std::string config_reference() {
  return R"(Run configuration (JSON). Every key is optional unless noted; defaults shown.
  delta_hours            1.0     decision window length, hours
  voi.lambda_c           1.4     threat-rating decay per unit below the threshold
  voi.x_c                3.0     critical process threshold (process units, e.g. m)
  voi.alpha_r            0.018   process-fidelity rate per sample
  voi.alpha_d            0.025   update-delay-cost rate per transmission
  voi.d_o                0.5     maximum update-delay cost
  battery.capacity_ah    2.75    charge capacity C, Ah
  battery.z_min          0.015   minimum allowable SoC
  battery.v_nom          3.6     nominal voltage, V
  battery.ocv_table      "builtin:li-ion"  CSV path (soc,voltage) or builtin:li-ion / builtin:flat
  profile.i_sleep_a      0.00143 sleep current, A
  profile.i_sense_a      0.105   sensing current, A
  profile.i_transmit_a   0.127   transmit current, A
  profile.d_sense_s      13      seconds per sample
  profile.d_transmit_s   4.1     seconds per transmission
  harvest.efficiency     0.05    overall harvesting efficiency
  harvest.panel_area_m2  0.01    panel area, m^2 (10 cm x 10 cm)
  mpc.horizon            11      prediction horizon H_p (H_p + 1 windows)
  mpc.discount           0       discount factor zeta
  mpc.w_i                0.5     weight of normalized VoI
  mpc.w_e                0.5     weight of SoE
  mpc.f_s_max            120     max samples per hour
  mpc.f_t_max            120     max transmissions per hour
  initial.soe | initial.z        required, exactly one; initial SoE or SoC in [0, 1]
  sim.restart_hysteresis 0.02    depleted node restarts at z >= z_min + this
  sim.belief_lookback    1       preceding windows used for the process belief (max)
  dataset.synthetic.*            canonical flood scenario (default when no CSVs):
      start "2021-07-19T00:00:00Z", days 5, base_level 0.5, peak_level 3.5,
      pulse_peaks_h [36, 85], pulse_half_width_h 12, irradiance_peak 900,
      sunrise_h 6, sunset_h 18, irradiance_scale 1, level_noise 0, seed 0
  dataset.process_csv / dataset.irradiance_csv   recorded series (ISO-8601 or NASA POWER)
  dataset.timestamp_column "timestamp"; dataset.process_column / irradiance_column
  output                 "trace.csv"   trace CSV path (relative to the config file)
)";
}

}  // namespace voimpc
