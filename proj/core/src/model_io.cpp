#include "charentropy/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "charentropy/support/toml.hpp"
#include "json.hpp"

namespace charentropy::model {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

Poly3 poly_from_rows(const TomlDoc::Value& v) {
  Poly3 p;
  for (const auto& row : v.array()) {
    const auto& r = row.array();
    if (r.size() != 4) throw InputError("model file: monomial rows are [c, px, pt, py]");
    Poly3::Term t;
    t.c = r[0].number();
    t.px = static_cast<int>(std::lround(r[1].number()));
    t.pt = static_cast<int>(std::lround(r[2].number()));
    t.py = static_cast<int>(std::lround(r[3].number()));
    p.terms.push_back(t);
  }
  return p;
}

Box domain_from_doc(const TomlDoc& doc, const Box& fallback) {
  Box b = fallback;
  const char* keys[3] = {"model.domain.x", "model.domain.t", "model.domain.y"};
  for (int i = 0; i < 3; ++i) {
    if (!doc.has(keys[i])) continue;
    const auto& arr = doc.at(keys[i]).array();
    if (arr.size() != 2) throw InputError("model file: domain ranges are [lo, hi]");
    b.lo[i] = arr[0].number();
    b.hi[i] = arr[1].number();
  }
  return b;
}

}  // namespace

FluxModel load_model_file(const std::string& path) {
  const TomlDoc doc = TomlDoc::parse_file(path);
  const int m = static_cast<int>(doc.number_or("model.m", 2));
  const std::string builtin = doc.string_or("model.builtin", "");
  const Box fallback = make_box3(-2, 2, -2, 2, -2, 2);
  FluxModel out;
  if (!builtin.empty()) {
    if (builtin == "flat_projective") {
      out = make_flat_projective_model(domain_from_doc(doc, fallback));
    } else {
      throw InputError("model file: unknown builtin '" + builtin + "'");
    }
  } else {
    if (!doc.has("model.flux.z1") || !doc.has("model.flux.z2"))
      throw InputError("model file: need builtin or [model.flux] z1/z2 tables");
    const Poly3 z1 = poly_from_rows(doc.at("model.flux.z1"));
    const Poly3 z2 = poly_from_rows(doc.at("model.flux.z2"));
    Poly3 src;
    if (doc.has("model.source.s")) src = poly_from_rows(doc.at("model.source.s"));
    out = make_polynomial_model(z1, z2, src, domain_from_doc(doc, fallback));
  }
  out.m = m;
  out.fd_step = doc.number_or("model.fd_step", out.fd_step);
  return out;
}

FluxModel load_model_spec(const std::string& name_or_path) {
  if (name_or_path == "flat_projective") return make_flat_projective_model();
  return load_model_file(name_or_path);
}

void save_section_csv(const PiecewiseSection& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << "x,t,u\n";
  for (std::size_t j = 0; j < s.ts.size(); ++j)
    for (std::size_t i = 0; i < s.xs.size(); ++i)
      out << format_double(s.xs[i]) << ',' << format_double(s.ts[j]) << ','
          << format_double(s.at(i, j)) << '\n';
}

PiecewiseSection load_section_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  std::vector<double> xs, ts, us;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.find("x") != std::string::npos && line.find("u") != std::string::npos) continue;
    }
    std::istringstream ss(line);
    double x, t, u;
    char c1, c2;
    if (!(ss >> x >> c1 >> t >> c2 >> u)) throw InputError("section CSV: bad row '" + line + "'");
    xs.push_back(x);
    ts.push_back(t);
    us.push_back(u);
  }
  if (us.empty()) throw InputError("section CSV: no data rows in " + path);
  std::vector<double> ax = xs, at = ts;
  std::sort(ax.begin(), ax.end());
  ax.erase(std::unique(ax.begin(), ax.end(),
                       [](double a, double b) { return std::fabs(a - b) < 1e-14; }),
           ax.end());
  std::sort(at.begin(), at.end());
  at.erase(std::unique(at.begin(), at.end(),
                       [](double a, double b) { return std::fabs(a - b) < 1e-14; }),
           at.end());
  if (ax.size() * at.size() != us.size())
    throw InputError("section CSV: rows do not form a rectangular lattice");
  PiecewiseSection s;
  s.xs = ax;
  s.ts = at;
  s.u.assign(us.size(), 0.0);
  auto index_of = [](const std::vector<double>& axis, double v) {
    auto it = std::lower_bound(axis.begin(), axis.end(), v - 1e-12);
    return static_cast<std::size_t>(it - axis.begin());
  };
  for (std::size_t r = 0; r < us.size(); ++r)
    s.at(index_of(ax, xs[r]), index_of(at, ts[r])) = us[r];
  return s;
}

namespace {

std::function<double(double)> trace_from_json(const nlohmann::json& j,
                                              const std::vector<double>& tnodes) {
  if (j.is_number()) {
    const double c = j.get<double>();
    return [c](double) { return c; };
  }
  std::vector<double> vals = j.get<std::vector<double>>();
  if (vals.size() != tnodes.size())
    throw InputError("jumps JSON: trace array length must match t array");
  std::vector<double> tn = tnodes;
  return [tn, vals](double t) {
    if (t <= tn.front()) return vals.front();
    if (t >= tn.back()) return vals.back();
    auto it = std::upper_bound(tn.begin(), tn.end(), t);
    const std::size_t hi = it - tn.begin(), lo = hi - 1;
    const double w = (t - tn[lo]) / (tn[hi] - tn[lo]);
    return vals[lo] + w * (vals[hi] - vals[lo]);
  };
}

}  // namespace

void save_jumps_json(const PiecewiseSection& s, const std::string& path) {
  nlohmann::ordered_json root;
  root["jumps"] = nlohmann::ordered_json::array();
  for (const auto& jc : s.jumps) {
    nlohmann::ordered_json j;
    j["t"] = jc.t;
    j["x"] = jc.x;
    std::vector<double> ul, ur;
    for (double tv : jc.t) {
      ul.push_back(jc.u_left(tv));
      ur.push_back(jc.u_right(tv));
    }
    j["ul"] = ul;
    j["ur"] = ur;
    root["jumps"].push_back(j);
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << root.dump(2) << '\n';
}

void load_jumps_json(PiecewiseSection& s, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  nlohmann::json root;
  in >> root;
  if (!root.contains("jumps")) throw InputError("jumps JSON: missing 'jumps' array");
  for (const auto& j : root["jumps"]) {
    JumpCurve jc;
    jc.t = j.at("t").get<std::vector<double>>();
    jc.x = j.at("x").get<std::vector<double>>();
    if (jc.t.size() != jc.x.size() || jc.t.size() < 1)
      throw InputError("jumps JSON: t and x arrays must match and be nonempty");
    jc.u_left = trace_from_json(j.at("ul"), jc.t);
    jc.u_right = trace_from_json(j.at("ur"), jc.t);
    s.jumps.push_back(std::move(jc));
  }
  s.rebuild_jump_index();
}

}  // namespace charentropy::model
