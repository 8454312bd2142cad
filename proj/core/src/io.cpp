#include "hsdma/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>

#include <json.hpp>

#include "hsdma/error.hpp"

namespace hsdma::io {
namespace {

using nlohmann::json;

std::string fmt17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Matrix parse_matrix(const json& j, const std::string& source, const std::string& field) {
  const std::string where = source + ": field \"" + field + "\"";
  if (j.is_number()) return Matrix::Constant(1, 1, j.get<double>());
  if (!j.is_array()) throw ParseError(where, "expected a nested array of numbers");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) throw ParseError(where + " row 0", "expected an array");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    const std::string rw = where + " row " + std::to_string(r);
    if (!row.is_array()) throw ParseError(rw, "expected an array");
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError(rw, "has " + std::to_string(row.size()) + " entries, expected " +
                               std::to_string(cols));
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number())
        throw ParseError(rw + " column " + std::to_string(c), "not a number");
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

json parse_document(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, e.what());
  }
  if (doc.is_object() && doc.contains("system")) doc = doc["system"];
  if (!doc.is_object()) throw ParseError(source, "expected a JSON object");
  return doc;
}

const json& require(const json& doc, const char* key, const std::string& source) {
  if (!doc.contains(key)) throw ParseError(source, std::string("missing field \"") + key + "\"");
  return doc[key];
}

// Order-0 systems serialize B and C as empty arrays; rebuild their shapes.
void fix_empty(Matrix& a, Matrix& b, Matrix& c, const Matrix& d) {
  const auto n = a.rows();
  if (n == 0) {
    a.resize(0, 0);
    b.resize(0, d.cols());
    c.resize(d.rows(), 0);
  }
}

json system_json(const Matrix* e, const Matrix& a, const Matrix& b, const Matrix& c,
                 const Matrix& d) {
  json j;
  if (e) j["E"] = matrix_json(*e);
  j["A"] = matrix_json(a);
  j["B"] = matrix_json(b);
  j["C"] = matrix_json(c);
  j["D"] = matrix_json(d);
  return j;
}

json report_json(const margin::MarginReport& r) {
  json j;
  j["dm_seconds"] = std::isfinite(r.delay_margin) ? json(r.delay_margin) : json(nullptr);
  j["stable_nominal"] = r.stable_nominal;
  json cs = json::array();
  for (const auto& c : r.crossovers)
    cs.push_back({{"omega", c.omega},
                  {"pm_rad", c.phase_margin},
                  {"dm_s", c.delay_margin},
                  {"above_nyquist", c.above_nyquist}});
  j["crossovers"] = std::move(cs);
  json gs = json::array();
  for (const auto& g : r.gain_margins) gs.push_back({{"omega", g.omega}, {"gm", g.margin}});
  j["gain_margins"] = std::move(gs);
  return j;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, const std::string& where, const std::string& field) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ParseError(where, "field \"" + field + "\" is not a number: \"" + s + "\"");
  return v;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  return out + "\"";
}

}  // namespace

AnySystem parse_system(const std::string& text, const std::string& source) {
  const json doc = parse_document(text, source);
  std::string kind;
  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) throw ParseError(source, "field \"kind\" must be a string");
    kind = doc["kind"].get<std::string>();
  } else {
    kind = doc.contains("h") ? "discrete" : "continuous";
  }
  Matrix a = parse_matrix(require(doc, "A", source), source, "A");
  Matrix b = parse_matrix(require(doc, "B", source), source, "B");
  Matrix c = parse_matrix(require(doc, "C", source), source, "C");
  Matrix d = parse_matrix(require(doc, "D", source), source, "D");
  fix_empty(a, b, c, d);
  try {
    if (kind == "continuous") {
      if (doc.contains("E")) {
        Matrix e = parse_matrix(doc["E"], source, "E");
        if (a.rows() == 0) e.resize(0, 0);
        return ContinuousStateSpace(std::move(e), std::move(a), std::move(b), std::move(c),
                                    std::move(d));
      }
      return ContinuousStateSpace(std::move(a), std::move(b), std::move(c), std::move(d));
    }
    if (kind == "discrete") {
      const json& hj = require(doc, "h", source);
      if (!hj.is_number()) throw ParseError(source, "field \"h\" is not a number");
      if (doc.contains("E")) throw ParseError(source, "discrete systems take no \"E\"");
      return DiscreteStateSpace(std::move(a), std::move(b), std::move(c), std::move(d),
                                hj.get<double>());
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, e.what());
  }
  throw ParseError(source, "field \"kind\" must be \"continuous\" or \"discrete\", got \"" +
                               kind + "\"");
}

ContinuousStateSpace parse_continuous(const std::string& text, const std::string& source) {
  auto sys = parse_system(text, source);
  if (auto* c = std::get_if<ContinuousStateSpace>(&sys)) return *c;
  throw ParseError(source, "expected a continuous system");
}

DiscreteStateSpace parse_discrete(const std::string& text, const std::string& source) {
  auto sys = parse_system(text, source);
  if (auto* d = std::get_if<DiscreteStateSpace>(&sys)) return *d;
  throw ParseError(source, "expected a discrete system");
}

std::string to_json(const ContinuousStateSpace& sys) {
  json j = system_json(sys.is_standard() ? nullptr : &sys.e(), sys.a(), sys.b(), sys.c(), sys.d());
  j["kind"] = "continuous";
  return j.dump() + "\n";
}

std::string to_json(const DiscreteStateSpace& sys) {
  json j = system_json(nullptr, sys.a(), sys.b(), sys.c(), sys.d());
  j["kind"] = "discrete";
  j["h"] = sys.h();
  return j.dump() + "\n";
}

std::string to_json(const margin::MarginReport& report) { return report_json(report).dump() + "\n"; }

std::string to_json(const pipeline::HsdmaResult& result) {
  json j = report_json(result.report);
  j["order"] = result.model.order();
  j["interpolation_error"] = result.interpolation_error;
  j["warnings"] = result.warnings;
  const auto& m = result.model;
  json model = system_json(m.is_standard() ? nullptr : &m.e(), m.a(), m.b(), m.c(), m.d());
  model["kind"] = "continuous";
  j["model"] = std::move(model);
  return j.dump() + "\n";
}

std::string fit_report(const ContinuousStateSpace& m, double interpolation_error,
                       std::size_t points) {
  json j;
  j["order"] = m.order();
  j["interpolation_error"] = interpolation_error;
  j["points"] = points;
  json model = system_json(m.is_standard() ? nullptr : &m.e(), m.a(), m.b(), m.c(), m.d());
  model["kind"] = "continuous";
  j["model"] = std::move(model);
  return j.dump() + "\n";
}

std::string to_json(const sim::DelayBracket& b, sim::HoldConvention hold) {
  json j;
  j["tau_lo"] = b.tau_stable;
  j["tau_hi"] = b.tau_unstable;
  j["tol"] = b.tolerance;
  json cls = json::array();
  for (const auto& c : b.classified_at)
    cls.push_back({{"tau", c.tau}, {"verdict", std::string(sim::to_string(c.verdict))}});
  j["classified_at"] = std::move(cls);
  j["hold_convention"] = std::string(sim::to_string(hold));
  j["hold_delay"] = b.hold_delay;
  j["total_lo"] = b.tau_stable + b.hold_delay;
  j["total_hi"] = b.tau_unstable + b.hold_delay;
  j["dm_seconds"] = b.total_midpoint();
  return j.dump() + "\n";
}

std::string to_csv(const loewner::FrequencyDataSet& data) {
  std::ostringstream os;
  const bool siso = data.n_inputs() == 1 && data.n_outputs() == 1;
  os << (siso ? "omega_rad_s,re,im\n" : "omega_rad_s,out,in,re,im\n");
  for (std::size_t i = 0; i < data.size(); ++i) {
    const CMatrix& p = data.response()[i];
    if (siso) {
      os << fmt17(data.omega()[i]) << ',' << fmt17(p(0, 0).real()) << ',' << fmt17(p(0, 0).imag())
         << '\n';
      continue;
    }
    for (Eigen::Index r = 0; r < p.rows(); ++r)
      for (Eigen::Index c = 0; c < p.cols(); ++c)
        os << fmt17(data.omega()[i]) << ',' << r << ',' << c << ',' << fmt17(p(r, c).real())
           << ',' << fmt17(p(r, c).imag()) << '\n';
  }
  return os.str();
}

loewner::FrequencyDataSet parse_frequency_csv(const std::string& text, double h,
                                              const std::string& source) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  const bool siso = line == "omega_rad_s,re,im";
  if (!siso && line != "omega_rad_s,out,in,re,im")
    throw ParseError(source + ":" + std::to_string(lineno),
                     "expected header \"omega_rad_s,re,im\" or \"omega_rad_s,out,in,re,im\"");
  const std::vector<std::string> names =
      siso ? std::vector<std::string>{"omega_rad_s", "re", "im"}
           : std::vector<std::string>{"omega_rad_s", "out", "in", "re", "im"};

  std::vector<double> omega;
  std::vector<std::map<std::pair<long, long>, Complex>> entries;
  long n_out = 0, n_in = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto f = split_csv_line(line);
    if (f.size() != names.size())
      throw ParseError(where, "expected " + std::to_string(names.size()) + " fields, got " +
                                  std::to_string(f.size()));
    std::vector<double> v(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) v[i] = parse_number(f[i], where, names[i]);
    long r = 0, c = 0;
    if (!siso) {
      if (v[1] < 0 || v[1] != std::floor(v[1])) throw ParseError(where, "field \"out\" must be a non-negative integer");
      if (v[2] < 0 || v[2] != std::floor(v[2])) throw ParseError(where, "field \"in\" must be a non-negative integer");
      r = static_cast<long>(v[1]);
      c = static_cast<long>(v[2]);
    }
    const double w = v[0];
    if (omega.empty() || w != omega.back()) {
      if (!omega.empty() && !(w > omega.back()))
        throw ParseError(where, "field \"omega_rad_s\" must be strictly increasing");
      omega.push_back(w);
      entries.emplace_back();
    }
    const Complex value(v[f.size() - 2], v[f.size() - 1]);
    if (!entries.back().emplace(std::make_pair(r, c), value).second)
      throw ParseError(where, "duplicate entry for this frequency");
    n_out = std::max(n_out, r + 1);
    n_in = std::max(n_in, c + 1);
  }
  if (omega.empty()) throw ParseError(source, "no data rows");

  std::vector<CMatrix> response;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    CMatrix m(n_out, n_in);
    for (long r = 0; r < n_out; ++r)
      for (long c = 0; c < n_in; ++c) {
        auto it = entries[i].find({r, c});
        if (it == entries[i].end())
          throw ParseError(source, "omega = " + fmt17(omega[i]) + " lacks entry (" +
                                       std::to_string(r) + ", " + std::to_string(c) + ")");
        m(r, c) = it->second;
      }
    response.push_back(std::move(m));
  }
  const double hh = h > 0.0 ? h : std::numbers::pi / omega.back();
  try {
    return loewner::FrequencyDataSet(std::move(omega), std::move(response), hh);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, e.what());
  }
}

std::string to_csv(const sim::SimTrace& trace) {
  std::string out = "t,y,u\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    out += fmt17(trace.times[i]) + ',' + fmt17(trace.y[i]) + ',' + fmt17(trace.u[i]) + '\n';
  return out;
}

std::string sweep_csv(const std::vector<pipeline::SweepRow>& rows) {
  std::string out = "method,h,dm_hsdma,dm_sim,order,stable_nominal,interpolation_error,status\n";
  for (const auto& r : rows) {
    out += std::string(discretize::to_string(r.method)) + ',' + fmt17(r.h) + ',' +
           fmt17(r.dm_hsdma) + ',' + (r.dm_sim ? fmt17(*r.dm_sim) : std::string()) + ',' +
           std::to_string(r.order) + ',' + (r.stable_nominal ? "true" : "false") + ',' +
           fmt17(r.interpolation_error) + ',' + csv_quote(r.status) + '\n';
  }
  return out;
}

std::string plot_csv(const std::vector<pipeline::SweepRow>& rows) {
  std::vector<discretize::Method> methods;
  std::vector<double> hs;
  std::map<std::pair<int, double>, const pipeline::SweepRow*> at;
  for (const auto& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);
    if (std::find(hs.begin(), hs.end(), r.h) == hs.end()) hs.push_back(r.h);
    at[{static_cast<int>(r.method), r.h}] = &r;
  }
  std::sort(hs.begin(), hs.end());
  std::string out = "h";
  for (auto m : methods) {
    const std::string name(discretize::to_string(m));
    out += ',' + name + ',' + name + "_sim";
  }
  out += '\n';
  for (double h : hs) {
    out += fmt17(h);
    for (auto m : methods) {
      auto it = at.find({static_cast<int>(m), h});
      const bool ok = it != at.end() && it->second->status.rfind("failed", 0) != 0;
      out += ',' + (ok ? fmt17(it->second->dm_hsdma) : std::string());
      out += ',' + (it != at.end() && it->second->dm_sim ? fmt17(*it->second->dm_sim) : std::string());
    }
    out += '\n';
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace hsdma::io
