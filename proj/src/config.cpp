#include "lmc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "lmc/error.hpp"

namespace lmc {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  int line = 0;
  std::map<std::string, Entry> entries;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail(const std::string& code, const std::string& name, int line,
                       const std::string& what) {
  throw Error("cli", code, name + ":" + std::to_string(line) + ": " + what);
}

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"domain", {"kind", "center", "radius", "matrix", "lower", "upper"}},
      {"target", {"kind", "center", "radius", "matrix", "lower", "upper"}},
      {"initial",
       {"map", "matrix", "shift", "bump_amplitude", "bump_radius", "bump_center"}},
      {"source", {"kind", "iota", "kappa", "c0", "eps", "a", "b", "x0", "p0"}},
      {"grid", {"resolution"}},
      {"flow", {"cfl", "t_max", "tol_osc", "sample_every", "eps_convex", "delta"}},
      {"output", {"directory", "heatmaps"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(std::map<std::string, Section>& sections, std::string name)
      : sections_(sections), name_(std::move(name)) {}

  bool has_section(const std::string& s) const { return sections_.count(s) != 0; }

  void require_section(const std::string& s) const {
    if (!has_section(s)) fail("missing-section", name_, 0, "missing section [" + s + "]");
  }

  const Entry* find(const std::string& s, const std::string& key) {
    auto sec = sections_.find(s);
    if (sec == sections_.end()) return nullptr;
    auto it = sec->second.entries.find(key);
    if (it == sec->second.entries.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const Entry& get(const std::string& s, const std::string& key) {
    const Entry* e = find(s, key);
    if (!e) {
      const int line = has_section(s) ? sections_.at(s).line : 0;
      fail("missing-key", name_, line, "[" + s + "] needs '" + key + "'");
    }
    return *e;
  }

  std::vector<double> numbers(const Entry& e, const std::string& key) const {
    std::vector<double> out;
    std::string text = e.value;
    for (char& ch : text) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        fail("invalid-value", name_, e.line, "'" + key + "' expects numbers, got '" + e.value + "'");
      }
      out.push_back(v);
    }
    if (out.empty()) fail("invalid-value", name_, e.line, "'" + key + "' is empty");
    return out;
  }

  double number(const Entry& e, const std::string& key) const {
    const auto v = numbers(e, key);
    if (v.size() != 1) fail("invalid-value", name_, e.line, "'" + key + "' expects one number");
    return v[0];
  }

  std::optional<double> opt_number(const std::string& s, const std::string& key) {
    const Entry* e = find(s, key);
    if (!e) return std::nullopt;
    return number(*e, key);
  }

  Vec vector(const Entry& e, const std::string& key, int dim) const {
    const auto v = numbers(e, key);
    if (dim > 0 && static_cast<int>(v.size()) != dim) {
      fail("invalid-value", name_, e.line,
           "'" + key + "' expects " + std::to_string(dim) + " components");
    }
    if (v.size() > 2) fail("invalid-value", name_, e.line, "'" + key + "' has too many components");
    return v.size() == 1 ? make_vec(v[0]) : make_vec(v[0], v[1]);
  }

  /// m11 (1D) or m11 m12 m22 (2D).
  Mat matrix(const Entry& e, const std::string& key, int dim) const {
    const auto v = numbers(e, key);
    if (dim == 1 && v.size() == 1) {
      Mat m(1, 1);
      m(0, 0) = v[0];
      return m;
    }
    if (dim == 2 && v.size() == 3) return make_mat(v[0], v[1], v[2]);
    fail("invalid-value", name_, e.line,
         "'" + key + "' expects " + std::string(dim == 1 ? "1" : "3") + " entries");
  }

  bool boolean(const Entry& e, const std::string& key) const {
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    fail("invalid-value", name_, e.line, "'" + key + "' expects true or false");
  }

  [[noreturn]] void invalid(const Entry& e, const std::string& what) const {
    fail("invalid-value", name_, e.line, what);
  }

  void reject_unused() const {
    for (const auto& [sname, sec] : sections_) {
      for (const auto& [key, entry] : sec.entries) {
        if (!entry.used) {
          fail("unknown-key", name_, entry.line, "key '" + key + "' not used in [" + sname + "]");
        }
      }
    }
  }

 private:
  std::map<std::string, Section>& sections_;
  std::string name_;
};

DomainSpec read_domain(Reader& r, const std::string& s, int dim) {
  DomainSpec d;
  const Entry& kind = r.get(s, "kind");
  if (kind.value == "ball") {
    d.kind = DomainKind::ball;
    d.center = r.vector(r.get(s, "center"), "center", dim);
    const Entry& radius = r.get(s, "radius");
    d.radius = r.number(radius, "radius");
    if (!(d.radius > 0.0)) r.invalid(radius, "radius must be positive");
  } else if (kind.value == "ellipse") {
    d.kind = DomainKind::ellipse;
    d.center = r.vector(r.get(s, "center"), "center", dim > 0 ? dim : 2);
    if (d.center.size() != 2) r.invalid(kind, "ellipse domains are two-dimensional");
    const Entry& m = r.get(s, "matrix");
    d.matrix = r.matrix(m, "matrix", 2);
    if (!(d.matrix(0, 0) > 0.0 && d.matrix.determinant() > 0.0)) {
      r.invalid(m, "ellipse matrix must be positive definite");
    }
  } else if (kind.value == "interval") {
    d.kind = DomainKind::interval;
    d.lower = r.number(r.get(s, "lower"), "lower");
    const Entry& upper = r.get(s, "upper");
    d.upper = r.number(upper, "upper");
    if (!(d.upper > d.lower)) r.invalid(upper, "upper must exceed lower");
    d.center = make_vec(0.5 * (d.lower + d.upper));
    if (dim > 0 && dim != 1) r.invalid(kind, "interval target needs a one-dimensional domain");
  } else {
    r.invalid(kind, "unknown domain kind '" + kind.value + "'");
  }
  return d;
}

}  // namespace

ConvexDomain DomainSpec::build() const {
  switch (kind) {
    case DomainKind::interval:
      return ConvexDomain::interval(lower, upper);
    case DomainKind::ball:
      return ConvexDomain::ball(center, radius);
    case DomainKind::ellipse:
      return ConvexDomain::ellipse(center, matrix);
  }
  throw Error("cli", "invalid-value", "unknown domain kind");
}

SourceTerm SourceSpec::build(int dim) const {
  if (kind == "zero") return SourceTerm::zero(dim);
  if (kind == "affine") return SourceTerm::affine(iota, kappa, c0);
  return SourceTerm::separable_quadratic(eps, a, b, x0, p0);
}

RunConfig parse_config_text(std::string_view text, const std::string& name) {
  std::map<std::string, Section> sections;
  std::string current;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("invalid-value", name, line_no, "malformed section header");
      current = trim(line.substr(1, line.size() - 2));
      if (!allowed_keys().count(current)) {
        fail("unknown-section", name, line_no, "unknown section [" + current + "]");
      }
      if (sections.count(current)) {
        fail("duplicate-key", name, line_no, "section [" + current + "] repeated");
      }
      sections[current].line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("invalid-value", name, line_no, "expected 'key = value'");
    if (current.empty()) fail("unknown-key", name, line_no, "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!allowed_keys().at(current).count(key)) {
      fail("unknown-key", name, line_no, "unknown key '" + key + "' in [" + current + "]");
    }
    auto& entries = sections[current].entries;
    if (entries.count(key)) {
      fail("duplicate-key", name, line_no, "duplicate key '" + key + "' in [" + current + "]");
    }
    if (value.empty()) fail("invalid-value", name, line_no, "key '" + key + "' has no value");
    entries[key] = Entry{value, line_no, false};
  }

  Reader r(sections, name);
  for (const char* s : {"domain", "target", "source", "grid"}) r.require_section(s);

  RunConfig cfg;
  cfg.domain = read_domain(r, "domain", 0);
  const int n = cfg.dim();
  cfg.target = read_domain(r, "target", n);

  {
    const Entry& res = r.get("grid", "resolution");
    const double v = r.number(res, "resolution");
    if (v != std::floor(v) || v < 1 || v > 100000) r.invalid(res, "resolution must be a positive integer");
    cfg.resolution = static_cast<int>(v);
  }

  {
    const Entry& kind = r.get("source", "kind");
    cfg.source.kind = kind.value;
    const Vec zero = Vec::Zero(n);
    if (kind.value == "zero") {
      cfg.source.iota = cfg.source.kappa = zero;
    } else if (kind.value == "affine") {
      const Entry* iota = r.find("source", "iota");
      const Entry* kappa = r.find("source", "kappa");
      cfg.source.iota = iota ? r.vector(*iota, "iota", n) : zero;
      cfg.source.kappa = kappa ? r.vector(*kappa, "kappa", n) : zero;
      cfg.source.c0 = r.opt_number("source", "c0").value_or(0.0);
    } else if (kind.value == "quadratic") {
      cfg.source.eps = r.number(r.get("source", "eps"), "eps");
      const Entry& a = r.get("source", "a");
      const Entry& b = r.get("source", "b");
      cfg.source.a = r.number(a, "a");
      cfg.source.b = r.number(b, "b");
      if (cfg.source.a < 0.0 || cfg.source.b < 0.0 || cfg.source.eps < 0.0) {
        r.invalid(a, "quadratic source needs eps, a, b >= 0");
      }
      const Entry* x0 = r.find("source", "x0");
      const Entry* p0 = r.find("source", "p0");
      cfg.source.x0 = x0 ? r.vector(*x0, "x0", n) : zero;
      cfg.source.p0 = p0 ? r.vector(*p0, "p0", n) : zero;
    } else {
      r.invalid(kind, "unknown source kind '" + kind.value + "'");
    }
  }

  if (r.has_section("initial")) {
    if (const Entry* map = r.find("initial", "map")) {
      if (map->value == "explicit") {
        cfg.initial.explicit_map = true;
      } else if (map->value != "auto") {
        r.invalid(*map, "map must be auto or explicit");
      }
    }
    const Entry* matrix = r.find("initial", "matrix");
    if (cfg.initial.explicit_map) {
      const Entry& m = matrix ? *matrix : r.get("initial", "matrix");
      cfg.initial.matrix = r.matrix(m, "matrix", n);
    } else if (matrix) {
      r.invalid(*matrix, "matrix requires map = explicit");
    }
    if (const Entry* shift = r.find("initial", "shift")) cfg.initial.shift = r.vector(*shift, "shift", n);
    cfg.initial.bump_amplitude = r.opt_number("initial", "bump_amplitude").value_or(0.0);
    if (const Entry* radius = r.find("initial", "bump_radius")) {
      cfg.initial.bump_radius = r.number(*radius, "bump_radius");
      if (!(*cfg.initial.bump_radius > 0.0)) r.invalid(*radius, "bump_radius must be positive");
    }
    if (const Entry* centre = r.find("initial", "bump_center")) {
      cfg.initial.bump_center = r.vector(*centre, "bump_center", n);
    }
  }

  if (r.has_section("flow")) {
    FlowConfig& f = cfg.flow;
    if (const Entry* e = r.find("flow", "cfl")) {
      f.cfl = r.number(*e, "cfl");
      if (!(f.cfl > 0.0 && f.cfl <= 1.0)) r.invalid(*e, "cfl must lie in (0, 1]");
    }
    if (const Entry* e = r.find("flow", "t_max")) {
      f.t_max = r.number(*e, "t_max");
      if (f.t_max < 0.0) r.invalid(*e, "t_max must be non-negative");
    }
    if (const Entry* e = r.find("flow", "tol_osc")) {
      f.tol_osc = r.number(*e, "tol_osc");
      if (f.tol_osc < 0.0) r.invalid(*e, "tol_osc must be non-negative");
    }
    if (const Entry* e = r.find("flow", "sample_every")) {
      const double v = r.number(*e, "sample_every");
      if (v != std::floor(v) || v < 1 || v > 1e9) r.invalid(*e, "sample_every must be a positive integer");
      f.sample_every = static_cast<int>(v);
    }
    if (const Entry* e = r.find("flow", "eps_convex")) {
      f.eps_convex = r.number(*e, "eps_convex");
      if (!(f.eps_convex > 0.0)) r.invalid(*e, "eps_convex must be positive");
    }
    if (const Entry* e = r.find("flow", "delta")) {
      f.delta = r.number(*e, "delta");
      if (*f.delta < 0.0) r.invalid(*e, "delta must be non-negative");
    }
  }

  if (r.has_section("output")) {
    if (const Entry* e = r.find("output", "directory")) cfg.output.directory = e->value;
    if (const Entry* e = r.find("output", "heatmaps")) cfg.output.heatmaps = r.boolean(*e, "heatmaps");
  }

  r.reject_unused();
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", "io", "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

Field initial_field(const RunConfig& config, std::shared_ptr<const Lattice> lattice) {
  const ConvexDomain omega = config.domain.build();
  const ConvexDomain target = config.target.build();
  const Mat a = config.initial.explicit_map ? config.initial.matrix
                                            : quadratic_initial_map(omega, target);
  const Vec q = omega.center();
  const Vec shift = config.initial.shift.value_or(target.center());
  const double amp = config.initial.bump_amplitude;
  const Vec bump_c = config.initial.bump_center.value_or(q);
  double bump_r = 0.0;
  if (amp != 0.0) {
    if (config.initial.bump_radius) {
      bump_r = *config.initial.bump_radius;
    } else if (config.domain.kind == DomainKind::ball) {
      bump_r = config.domain.radius;
    } else {
      throw Error("cli", "invalid-value", "bump_radius is required for non-ball domains");
    }
  }
  return sample_field(std::move(lattice), [&](const Vec& x) {
    const Vec y = x - q;
    double v = 0.5 * y.dot(a * y) + shift.dot(x);
    if (amp != 0.0) {
      const double s = 1.0 - (x - bump_c).squaredNorm() / (bump_r * bump_r);
      if (s > 0.0) v += amp * s * s * s;
    }
    return v;
  });
}

}  // namespace lmc
