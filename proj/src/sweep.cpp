#include "nlepi/sweep.hpp"

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "nlepi/output.hpp"

namespace nlepi {

namespace {

const std::vector<std::string> kOutcomeColumns = {"verdict",   "l_star",  "max_width",   "final_width",
                                                  "final_sup", "final_t", "probe_error", "error"};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// Numbers are rewritten in round-trip form so "1" and "1.0" give the same key.
std::string canonical_value(const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return format_number(d);
  } catch (const std::exception&) {
  }
  return v;
}

std::string row_text(const SweepRow& r) {
  std::string s = r.key;
  for (const auto& v : r.values) s += "," + v;
  const auto& o = r.outcome;
  if (r.error.empty()) {
    s += std::string(",") + to_string(o.verdict);
    for (double x : {o.l_star, o.max_width, o.final_width, o.final_sup, o.final_t, o.probe_error})
      s += "," + format_number(x);
    s += ",";
  } else {
    std::string e = r.error;
    for (char& ch : e)
      if (ch == ',' || ch == '\n') ch = ' ';
    s += ",error,nan,nan,nan,nan,nan,nan," + e;
  }
  return s;
}

double parse_field(const std::string& f) {
  if (f == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (f == "inf") return std::numeric_limits<double>::infinity();
  return std::stod(f);
}

void restore_outcome(const std::vector<std::string>& fields, std::size_t n_axes, RunOutcome& o) {
  std::size_t i = 1 + n_axes;
  const std::string& v = fields[i++];
  o.verdict = v == "spreading" ? Verdict::Spreading : v == "vanishing" ? Verdict::Vanishing : Verdict::Undecided;
  for (double* x : {&o.l_star, &o.max_width, &o.final_width, &o.final_sup, &o.final_t, &o.probe_error})
    *x = parse_field(fields[i++]);
}

}  // namespace

SweepAxis parse_axis(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError({"axis '" + spec + "': expected path=v1,v2,..."});
  SweepAxis a;
  a.path = spec.substr(0, eq);
  if (!is_known_key(a.path)) throw ConfigError({a.path + ": unknown key (sweep axis)"});
  for (const auto& v : split(spec.substr(eq + 1), ',')) {
    if (v.empty()) throw ConfigError({a.path + ": empty value in sweep axis"});
    a.values.push_back(canonical_value(v));
  }
  if (a.values.empty()) throw ConfigError({a.path + ": sweep axis has no values"});
  return a;
}

unsigned sweep_workers_from_env() {
  if (const char* w = std::getenv("NLEPI_WORKERS")) {
    const int n = std::atoi(w);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

SweepTable run_sweep(const SweepSpec& spec) {
  std::size_t total = 1;
  for (const auto& ax : spec.axes) {
    total *= ax.values.size();
    if (total > spec.max_cells)
      throw ConfigError({"sweep: cross product exceeds " + std::to_string(spec.max_cells) + " cells"});
    ConfigDocument probe = spec.base;
    for (const auto& v : ax.values) set_override(probe, ax.path, v);
  }

  SweepTable table;
  table.header.push_back("key");
  for (const auto& ax : spec.axes) table.header.push_back(ax.path);
  table.header.insert(table.header.end(), kOutcomeColumns.begin(), kOutcomeColumns.end());
  std::string header_line;
  for (std::size_t i = 0; i < table.header.size(); ++i) header_line += (i ? "," : "") + table.header[i];

  // Cells in row-major order, last axis fastest.
  table.rows.resize(total);
  for (std::size_t c = 0; c < total; ++c) {
    SweepRow& r = table.rows[c];
    r.index = c;
    std::size_t rem = c;
    r.values.resize(spec.axes.size());
    for (std::size_t k = spec.axes.size(); k-- > 0;) {
      r.values[k] = spec.axes[k].values[rem % spec.axes[k].values.size()];
      rem /= spec.axes[k].values.size();
    }
    for (std::size_t k = 0; k < spec.axes.size(); ++k)
      r.key += (k ? ";" : "") + spec.axes[k].path + "=" + r.values[k];
  }

  // Completed rows from an earlier run, keyed by canonical key.
  std::map<std::string, std::string> done;
  if (!spec.out.empty() && std::filesystem::exists(spec.out)) {
    std::ifstream in(spec.out);
    std::string line;
    if (std::getline(in, line) && line == header_line) {
      while (std::getline(in, line)) {
        const auto fields = split(line, ',');
        if (fields.size() != table.header.size()) continue;
        if (!fields.back().empty()) continue;  // failed cell: recompute
        done[fields.front()] = line;
      }
    }
  }

  std::vector<std::string> text(total);
  std::vector<std::size_t> todo;
  for (std::size_t c = 0; c < total; ++c) {
    auto it = done.find(table.rows[c].key);
    if (it != done.end()) {
      text[c] = it->second;
      restore_outcome(split(it->second, ','), spec.axes.size(), table.rows[c].outcome);
      ++table.reused;
    } else {
      todo.push_back(c);
    }
  }

  std::ofstream sink;
  if (!spec.out.empty()) {
    if (spec.out.has_parent_path()) std::filesystem::create_directories(spec.out.parent_path());
    const bool fresh = done.empty();
    sink.open(spec.out, fresh ? std::ios::trunc : std::ios::app);
    if (fresh) sink << header_line << '\n';
    sink.flush();
  }

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= todo.size()) return;
      SweepRow& r = table.rows[todo[t]];
      try {
        ConfigDocument doc = spec.base;
        for (std::size_t k = 0; k < spec.axes.size(); ++k) set_override(doc, spec.axes[k].path, r.values[k]);
        const RunConfig rc = build_config(doc);
        r.outcome = classify(rc.model, rc.init, rc.free, rc.thresholds).outcome;
      } catch (const std::exception& e) {
        r.error = e.what();
      }
      const std::string line = row_text(r);
      std::lock_guard<std::mutex> lock(mu);
      text[r.index] = line;
      if (sink.is_open()) {
        sink << line << '\n';
        sink.flush();
      }
    }
  };
  const unsigned n_workers = std::max(1u, spec.workers ? spec.workers : sweep_workers_from_env());
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_workers && i < todo.size(); ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  table.computed = todo.size();

  if (sink.is_open()) {
    sink.close();
    std::ofstream out(spec.out, std::ios::trunc);
    out << header_line << '\n';
    for (const auto& line : text) out << line << '\n';
  }
  return table;
}

}  // namespace nlepi
