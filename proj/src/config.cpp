#include "nlepi/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nlepi {

namespace {

enum class Type { Number, Integer, Bool, String };

const std::map<std::string, Type>& schema() {
  static const std::map<std::string, Type> s = [] {
    std::map<std::string, Type> m;
    for (const char* k : {"d1", "d2", "a", "b", "c", "mu1", "mu2", "alpha", "beta"}) m[std::string("model.") + k] = Type::Number;
    m["model.G"] = Type::String;
    m["model.G_table"] = Type::String;
    for (const char* sec : {"shared", "J11", "J12", "J21", "J22"}) {
      const std::string p = std::string("kernels.") + sec + ".";
      m[p + "family"] = Type::String;
      m[p + "scale"] = Type::Number;
      m[p + "table"] = Type::String;
    }
    m["grid.dx_target"] = Type::Number;
    m["grid.n_max"] = Type::Integer;
    m["grid.dx_scale"] = Type::Number;
    for (const char* k : {"h0", "tau", "scale1", "scale2"}) m[std::string("init.") + k] = Type::Number;
    m["init.profile1"] = m["init.profile2"] = Type::String;
    for (const char* k : {"l", "T", "T_max", "dt", "dx", "sample_interval"}) m[std::string("run.") + k] = Type::Number;
    for (const char* k : {"fixed", "deterministic", "spread_stop", "vanish_stop"}) m[std::string("run.") + k] = Type::Bool;
    for (const char* k : {"margin", "eps_v", "probe_fraction"}) m[std::string("classify.") + k] = Type::Number;
    for (const char* k : {"tol", "lo", "hi", "link_factor"}) m[std::string("search.") + k] = Type::Number;
    m["search.retries"] = m["search.max_probes"] = Type::Integer;
    for (const char* k : {"d1", "d2", "a", "b", "c", "g0", "l_min", "l_max"}) m[std::string("compare.") + k] = Type::Number;
    m["compare.count"] = Type::Integer;
    m["compare.refine"] = Type::Bool;
    m["output.dir"] = m["output.prefix"] = Type::String;
    m["output.profiles"] = Type::Bool;
    m["output.profile_every"] = Type::Integer;
    return m;
  }();
  return s;
}

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.')) return false;
  return s.front() != '.' && s.back() != '.';
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size() && std::isfinite(out);
}

// Parses a scalar value; `err` is set on failure.
ConfigValue parse_value(const std::string& raw, std::string& err) {
  const std::string s = trim(raw);
  if (s.size() >= 2 && s.front() == '"') {
    if (s.back() != '"') {
      err = "unterminated string";
      return std::string();
    }
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) {
        out += s[++i];
      } else if (s[i] == '"') {
        err = "unexpected quote inside string";
        return std::string();
      } else {
        out += s[i];
      }
    }
    return out;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  double d = 0;
  if (parse_number(s, d)) return d;
  err = "cannot parse value '" + s + "' (expected number, true/false, or quoted string)";
  return std::string();
}

// Removes a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

const char* type_name(Type t) {
  switch (t) {
    case Type::Number: return "a number";
    case Type::Integer: return "an integer";
    case Type::Bool: return "true or false";
    case Type::String: return "a quoted string";
  }
  return "?";
}

bool type_matches(const ConfigValue& v, Type t) {
  switch (t) {
    case Type::Number: return std::holds_alternative<double>(v);
    case Type::Integer: {
      const double* d = std::get_if<double>(&v);
      return d && std::floor(*d) == *d && std::abs(*d) < 1e15;
    }
    case Type::Bool: return std::holds_alternative<bool>(v);
    case Type::String: return std::holds_alternative<std::string>(v);
  }
  return false;
}

// Reads a two-column CSV of numbers; a non-numeric first line is a header.
bool read_table(const std::filesystem::path& path, std::vector<double>& xs, std::vector<double>& ys,
                std::string& err) {
  std::ifstream in(path);
  if (!in) {
    err = "cannot open table file " + path.string();
    return false;
  }
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    double x = 0, y = 0;
    if (comma == std::string::npos || !parse_number(trim(line.substr(0, comma)), x) ||
        !parse_number(trim(line.substr(comma + 1)), y)) {
      if (xs.empty() && lineno == 1) continue;
      err = path.string() + ":" + std::to_string(lineno) + ": expected two numeric columns";
      return false;
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  return true;
}

class Builder {
 public:
  explicit Builder(const ConfigDocument& d) : doc_(d) {}

  std::vector<std::string> problems;

  double num(const std::string& key, double def) {
    auto it = doc_.values.find(key);
    if (it == doc_.values.end()) return def;
    if (const double* d = std::get_if<double>(&it->second)) return *d;
    return def;
  }
  bool flag(const std::string& key, bool def) {
    auto it = doc_.values.find(key);
    if (it == doc_.values.end()) return def;
    if (const bool* b = std::get_if<bool>(&it->second)) return *b;
    return def;
  }
  std::string str(const std::string& key, const std::string& def) {
    auto it = doc_.values.find(key);
    if (it == doc_.values.end()) return def;
    if (const std::string* s = std::get_if<std::string>(&it->second)) return *s;
    return def;
  }
  bool has(const std::string& key) const { return doc_.values.count(key) > 0; }

  void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) problems.push_back(key + ": " + what);
  }
  double positive(const std::string& key, double def) {
    const double v = num(key, def);
    require(v > 0, key, "must be positive (got " + fmt(v) + ")");
    return v;
  }
  double nonnegative(const std::string& key, double def) {
    const double v = num(key, def);
    require(v >= 0, key, "must be nonnegative (got " + fmt(v) + ")");
    return v;
  }
  std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : doc_.base_dir / path;
  }

  static std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
  }

 private:
  const ConfigDocument& doc_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument([&] {
        std::string s = "invalid configuration:";
        for (const auto& p : problems) s += "\n  " + p;
        return s;
      }()),
      problems_(std::move(problems)) {}

ConfigDocument parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  ConfigDocument doc;
  doc.base_dir = base_dir;
  std::vector<std::string> problems;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        problems.push_back(where + "malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_name(section)) problems.push_back(where + "invalid section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back(where + "expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    if (!valid_name(key) || key.find('.') != std::string::npos) {
      problems.push_back(where + "invalid key '" + key + "'");
      continue;
    }
    if (section.empty()) {
      problems.push_back(where + "key '" + key + "' appears before any [section]");
      continue;
    }
    std::string err;
    ConfigValue v = parse_value(line.substr(eq + 1), err);
    const std::string path = section + "." + key;
    if (!err.empty()) {
      problems.push_back(path + ": " + err + " (line " + std::to_string(lineno) + ")");
      continue;
    }
    if (doc.values.count(path)) {
      problems.push_back(path + ": duplicate key (line " + std::to_string(lineno) + ")");
      continue;
    }
    doc.values[path] = std::move(v);
    doc.lines[path] = lineno;
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return doc;
}

ConfigDocument read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path.string()});
  std::stringstream ss;
  ss << in.rdbuf();
  auto dir = path.parent_path();
  return parse_config_text(ss.str(), dir.empty() ? std::filesystem::path(".") : dir);
}

bool is_known_key(const std::string& path) { return schema().count(path) > 0; }

void set_override(ConfigDocument& doc, const std::string& path, const std::string& value) {
  auto it = schema().find(path);
  if (it == schema().end()) throw ConfigError({path + ": unknown key"});
  std::string err;
  ConfigValue v;
  if (it->second == Type::String) {
    v = value.size() >= 2 && value.front() == '"' ? parse_value(value, err) : ConfigValue(value);
  } else {
    v = parse_value(value, err);
  }
  if (!err.empty()) throw ConfigError({path + ": " + err});
  if (!type_matches(v, it->second)) throw ConfigError({path + ": expected " + std::string(type_name(it->second))});
  doc.values[path] = v;
  doc.lines[path] = 0;
}

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "tent") return KernelFamily::Tent;
  if (s == "truncated_gaussian") return KernelFamily::TruncatedGaussian;
  if (s == "gaussian") return KernelFamily::Gaussian;
  if (s == "tabulated") return KernelFamily::Tabulated;
  throw std::invalid_argument("unknown kernel family '" + s + "' (tent, truncated_gaussian, gaussian, tabulated)");
}

std::vector<double> CompareSettings::l_grid() const {
  std::vector<double> out;
  for (long i = 0; i < count; ++i)
    out.push_back(l_min * std::pow(l_max / l_min, static_cast<double>(i) / static_cast<double>(count - 1)));
  return out;
}

RunConfig build_config(const ConfigDocument& doc) {
  Builder B(doc);
  // Schema: unknown keys and wrong types.
  for (const auto& [key, value] : doc.values) {
    auto it = schema().find(key);
    if (it == schema().end()) {
      B.problems.push_back(key + ": unknown key");
    } else if (!type_matches(value, it->second)) {
      B.problems.push_back(key + ": expected " + std::string(type_name(it->second)));
    }
  }

  RunConfig rc;
  ModelParams& m = rc.model;
  m.d1 = B.nonnegative("model.d1", 1);
  m.d2 = B.nonnegative("model.d2", 1);
  m.a = B.positive("model.a", 1);
  m.b = B.positive("model.b", 1);
  m.c = B.positive("model.c", 2);
  m.mu1 = B.nonnegative("model.mu1", 1);
  m.mu2 = B.nonnegative("model.mu2", 1);
  const std::string gfam = B.str("model.G", "rational");
  bool g_ok = false;
  if (gfam == "rational") {
    const double alpha = B.positive("model.alpha", 1);
    const double beta = B.positive("model.beta", 1);
    if (alpha > 0 && beta > 0) {
      m.G = GFunction::rational(alpha, beta);
      g_ok = true;
    }
  } else if (gfam == "tabulated") {
    if (!B.has("model.G_table")) {
      B.problems.push_back("model.G_table: required when model.G = \"tabulated\"");
    } else {
      std::vector<double> z, g;
      std::string err;
      if (!read_table(B.resolve(B.str("model.G_table", "")), z, g, err)) {
        B.problems.push_back("model.G_table: " + err);
      } else {
        try {
          m.G = GFunction::tabulated(z, g);
          g_ok = true;
        } catch (const std::invalid_argument& e) {
          B.problems.push_back(std::string("model.G_table: ") + e.what());
        }
      }
    }
  } else {
    B.problems.push_back("model.G: unknown family '" + gfam + "' (rational, tabulated)");
  }
  if (g_ok && m.a > 0 && m.b > 0 && m.c > 0)
    for (const auto& v : m.G.violations(m.a * m.b / m.c)) B.problems.push_back("model.G: " + v);

  // Kernels: each Jij starts from the shared spec and overrides field by field.
  auto build_kernel = [&](const std::string& sec, bool& ok) -> Kernel {
    auto pick_str = [&](const std::string& key, const std::string& def) {
      const std::string own = "kernels." + sec + "." + key;
      return B.has(own) ? B.str(own, def) : B.str("kernels.shared." + key, def);
    };
    auto key_of = [&](const std::string& key) {
      const std::string own = "kernels." + sec + "." + key;
      return B.has(own) ? own : "kernels.shared." + key;
    };
    ok = false;
    KernelFamily fam = KernelFamily::Tent;
    try {
      fam = kernel_family_from_string(pick_str("family", "tent"));
    } catch (const std::invalid_argument& e) {
      B.problems.push_back(key_of("family") + ": " + e.what());
      return make_tent(1.0);
    }
    try {
      if (fam == KernelFamily::Tabulated) {
        if (pick_str("table", "").empty()) {
          B.problems.push_back(key_of("table") + ": required for a tabulated kernel");
          return make_tent(1.0);
        }
        std::vector<double> xs, ys;
        std::string err;
        if (!read_table(B.resolve(pick_str("table", "")), xs, ys, err)) {
          B.problems.push_back(key_of("table") + ": " + err);
          return make_tent(1.0);
        }
        ok = true;
        return make_tabulated(xs, ys);
      }
      const std::string sk = key_of("scale");
      const double scale = B.num(sk, 1);
      if (!(scale > 0)) {
        B.problems.push_back(sk + ": must be positive (got " + Builder::fmt(scale) + ")");
        return make_tent(1.0);
      }
      ok = true;
      switch (fam) {
        case KernelFamily::Tent: return make_tent(scale);
        case KernelFamily::TruncatedGaussian: return make_truncated_gaussian(scale);
        case KernelFamily::Gaussian: return make_gaussian(scale);
        default: break;
      }
    } catch (const std::invalid_argument& e) {
      B.problems.push_back("kernels." + sec + ": " + e.what());
      ok = false;
    }
    return make_tent(1.0);
  };
  const char* names[] = {"J11", "J12", "J21", "J22"};
  Kernel* slots[] = {&m.kernels.J11, &m.kernels.J12, &m.kernels.J21, &m.kernels.J22};
  for (int i = 0; i < 4; ++i) {
    bool ok = false;
    *slots[i] = build_kernel(names[i], ok);
    if (!ok) continue;
    const auto rep = validate_kernel(*slots[i], 1e-8);
    for (const auto& e : rep.entries)
      if (!e.passed) B.problems.push_back(std::string("kernels.") + names[i] + ": " + e.check + " check failed (" + e.detail + ")");
  }

  rc.grid.dx_target = B.nonnegative("grid.dx_target", 0);
  rc.grid.n_max = static_cast<long>(B.num("grid.n_max", 4001));
  B.require(rc.grid.n_max >= 3, "grid.n_max", "must be at least 3");
  rc.grid.dx_scale = B.positive("grid.dx_scale", 1);

  InitialData& init = rc.init;
  init.h0 = B.positive("init.h0", 1);
  init.tau = B.positive("init.tau", 1);
  init.scale1 = B.positive("init.scale1", 1);
  init.scale2 = B.positive("init.scale2", 1);
  auto profile = [&](const std::string& key) {
    const std::string s = B.str(key, "cosine");
    if (s == "cosine") return ProfileFamily::Cosine;
    if (s == "parabola") return ProfileFamily::Parabola;
    B.problems.push_back(key + ": unknown profile '" + s + "' (cosine, parabola)");
    return ProfileFamily::Cosine;
  };
  init.profile1 = profile("init.profile1");
  init.profile2 = profile("init.profile2");

  rc.l = B.positive("run.l", 10);
  rc.fixed.T = B.nonnegative("run.T", 100);
  rc.free.T_max = B.positive("run.T_max", 500);
  const double dt = B.nonnegative("run.dt", 0);
  if (dt > 0 && m.d1 >= 0 && m.d2 >= 0 && m.a > 0 && m.b > 0)
    B.require(dt <= max_stable_dt(m) * (1 + 1e-12), "run.dt",
              "exceeds the stability bound 0.5 / max(d1 + a, d2 + b) = " + Builder::fmt(max_stable_dt(m)));
  rc.fixed.dt = rc.free.dt = dt;
  rc.free.dx = B.nonnegative("run.dx", 0);
  rc.fixed.sample_interval = rc.free.sample_interval = B.positive("run.sample_interval", 0.1);
  rc.fixed_mode = B.flag("run.fixed", false);
  rc.deterministic = B.flag("run.deterministic", true);
  rc.free.stop.spread = B.flag("run.spread_stop", true);
  rc.free.stop.vanish = B.flag("run.vanish_stop", true);

  rc.thresholds.margin = B.nonnegative("classify.margin", 0.05);
  rc.thresholds.eps_v = B.positive("classify.eps_v", 1e-8);
  rc.thresholds.probe_fraction = B.positive("classify.probe_fraction", 0.1);
  B.require(rc.thresholds.probe_fraction <= 1, "classify.probe_fraction", "must not exceed 1");

  rc.search.tol = B.positive("search.tol", 1e-3);
  rc.search.lo = B.positive("search.lo", 0.01);
  rc.search.hi = B.positive("search.hi", 10);
  B.require(rc.search.hi > rc.search.lo, "search.hi", "must exceed search.lo");
  rc.search.link_factor = B.positive("search.link_factor", 1);
  rc.search.retries = static_cast<long>(B.nonnegative("search.retries", 2));
  rc.search.max_probes = static_cast<long>(B.positive("search.max_probes", 200));

  auto& cp = rc.compare.params;
  cp.d1 = B.nonnegative("compare.d1", 1);
  cp.d2 = B.nonnegative("compare.d2", 1);
  cp.a = B.positive("compare.a", 1);
  cp.b = B.positive("compare.b", 1);
  cp.c = B.positive("compare.c", 1.5);
  cp.g0 = B.positive("compare.g0", 1);
  rc.compare.l_min = B.positive("compare.l_min", 0.25);
  rc.compare.l_max = B.positive("compare.l_max", 8);
  B.require(rc.compare.l_max > rc.compare.l_min, "compare.l_max", "must exceed compare.l_min");
  rc.compare.count = static_cast<long>(B.num("compare.count", 20));
  B.require(rc.compare.count >= 2, "compare.count", "must be at least 2");
  rc.compare.refine = B.flag("compare.refine", true);

  rc.output.dir = B.resolve(B.str("output.dir", "."));
  rc.output.prefix = B.str("output.prefix", "");
  rc.output.profiles = B.flag("output.profiles", false);
  rc.output.profile_every = static_cast<long>(B.num("output.profile_every", 10));
  B.require(rc.output.profile_every >= 1, "output.profile_every", "must be at least 1");
  rc.free.record_profiles = rc.fixed.record_profiles = rc.output.profiles;
  rc.free.profile_every = rc.output.profile_every;

  if (!B.problems.empty()) throw ConfigError(std::move(B.problems));
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) { return build_config(read_config_file(path)); }

}  // namespace nlepi
