#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace crnhj::cli {

using nlohmann::json;

double FunctionSpec::operator()(const Vec& x) const {
  if (type == "constant") return offset;
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs.size() && i < x.size(); ++i) s += coeffs[i] * x[i];
  if (type == "linear") return offset + s;
  return offset + amplitude * std::sin(wavenumber * s + phase);
}

Domain DomainSpec::build() const {
  if (shape == "ball") return Domain::ball(center, radius);
  if (shape == "polygon") return Domain::polygon(vertices);
  return Domain::box(lower, upper);
}

namespace {

/// Walks the JSON tree, recording every problem against its dotted field path.
class Reader {
 public:
  std::vector<FieldError> errors;

  void error(const std::string& field, const std::string& msg) { errors.push_back({field, msg}); }

  const json* object(const json& parent, const std::string& key, const std::string& path,
                     bool required) {
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) error(join(path, key), "missing section");
      return nullptr;
    }
    if (!it->is_object()) {
      error(join(path, key), "expected an object");
      return nullptr;
    }
    return &*it;
  }

  void allow_only(const json& obj, const std::string& path, std::set<std::string> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!keys.count(it.key())) error(join(path, it.key()), "unknown key");
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path,
                               bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) error(join(path, key), "missing value");
      return std::nullopt;
    }
    if (!it->is_number()) {
      error(join(path, key), "expected a number");
      return std::nullopt;
    }
    return it->get<double>();
  }

  std::optional<std::uint64_t> unsigned_int(const json& obj, const std::string& key,
                                            const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_number_unsigned()) {
      error(join(path, key), "expected a nonnegative integer");
      return std::nullopt;
    }
    return it->get<std::uint64_t>();
  }

  std::optional<std::vector<double>> numbers(const json& obj, const std::string& key,
                                             const std::string& path, bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) error(join(path, key), "missing value");
      return std::nullopt;
    }
    if (!it->is_array()) {
      error(join(path, key), "expected an array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_number()) {
        error(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
        return std::nullopt;
      }
      out.push_back((*it)[i].get<double>());
    }
    return out;
  }

  std::optional<std::string> string(const json& obj, const std::string& key, const std::string& path,
                                    bool required) {
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) error(join(path, key), "missing value");
      return std::nullopt;
    }
    if (!it->is_string()) {
      error(join(path, key), "expected a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

std::string at_index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

FunctionSpec read_function(Reader& rd, const json& obj, const std::string& path, std::size_t dim) {
  FunctionSpec f;
  rd.allow_only(obj, path, {"type", "coeffs", "offset", "amplitude", "wavenumber", "phase"});
  if (auto s = rd.string(obj, "type", path, true)) f.type = *s;
  if (f.type != "linear" && f.type != "constant" && f.type != "sine")
    rd.error(Reader::join(path, "type"), "must be one of linear, constant, sine");
  if (auto c = rd.numbers(obj, "coeffs", path, f.type != "constant")) f.coeffs = *c;
  if (f.type != "constant" && !f.coeffs.empty() && f.coeffs.size() != dim)
    rd.error(Reader::join(path, "coeffs"), "needs " + std::to_string(dim) + " entries");
  if (auto v = rd.number(obj, "offset", path, false)) f.offset = *v;
  if (auto v = rd.number(obj, "amplitude", path, false)) f.amplitude = *v;
  if (auto v = rd.number(obj, "wavenumber", path, false)) f.wavenumber = *v;
  if (auto v = rd.number(obj, "phase", path, false)) f.phase = *v;
  return f;
}

void read_network(Reader& rd, const json& net, ExperimentConfig& cfg) {
  const std::string path = "network";
  rd.allow_only(net, path, {"species", "reactions"});
  auto sp = net.find("species");
  if (sp == net.end() || !sp->is_array() || sp->empty()) {
    rd.error("network.species", "expected a nonempty array of names");
  } else {
    for (std::size_t i = 0; i < sp->size(); ++i) {
      if (!(*sp)[i].is_string())
        rd.error(at_index("network.species", i), "expected a string");
      else
        cfg.species.push_back((*sp)[i].get<std::string>());
    }
  }
  const std::size_t n = cfg.species.size();
  cfg.network.n_species = n;
  auto rx = net.find("reactions");
  if (rx == net.end() || !rx->is_array() || rx->empty()) {
    rd.error("network.reactions", "expected a nonempty array of reactions");
    return;
  }
  for (std::size_t j = 0; j < rx->size(); ++j) {
    const std::string rp = at_index("network.reactions", j);
    const json& r = (*rx)[j];
    if (!r.is_object()) {
      rd.error(rp, "expected an object");
      continue;
    }
    rd.allow_only(r, rp, {"reactants", "products", "k_plus", "k_minus"});
    std::vector<int> rows[2];
    const char* keys[2] = {"reactants", "products"};
    for (int s = 0; s < 2; ++s) {
      auto v = rd.numbers(r, keys[s], rp, true);
      if (!v) continue;
      if (v->size() != n) rd.error(Reader::join(rp, keys[s]), "needs one entry per species");
      for (std::size_t l = 0; l < v->size(); ++l) {
        double c = (*v)[l];
        if (c < 0.0 || c != std::floor(c))
          rd.error(at_index(Reader::join(rp, keys[s]), l), "must be a nonnegative integer");
        rows[s].push_back(static_cast<int>(c));
      }
    }
    if (rows[0].size() == n && rows[1].size() == n && rows[0] == rows[1])
      rd.error(rp, "reaction vector is zero");
    double k[2] = {0.0, 0.0};
    const char* kk[2] = {"k_plus", "k_minus"};
    for (int s = 0; s < 2; ++s) {
      if (auto v = rd.number(r, kk[s], rp, true)) {
        k[s] = *v;
        if (!std::isfinite(*v) || *v < 0.0)
          rd.error(Reader::join(rp, kk[s]), "rate constant must be finite and nonnegative");
      }
    }
    rows[0].resize(n);
    rows[1].resize(n);
    cfg.network.nu_plus.push_back(rows[0]);
    cfg.network.nu_minus.push_back(rows[1]);
    cfg.network.k_plus.push_back(k[0]);
    cfg.network.k_minus.push_back(k[1]);
  }
}

void read_domain(Reader& rd, const json& dom, ExperimentConfig& cfg) {
  const std::string path = "domain";
  DomainSpec& d = cfg.domain;
  const std::size_t before = rd.errors.size();
  if (auto s = rd.string(dom, "shape", path, true)) d.shape = *s;
  if (d.shape == "ball") {
    rd.allow_only(dom, path, {"shape", "center", "radius"});
    if (auto c = rd.numbers(dom, "center", path, true)) d.center = *c;
    if (auto r = rd.number(dom, "radius", path, true)) d.radius = *r;
  } else if (d.shape == "polygon") {
    rd.allow_only(dom, path, {"shape", "vertices"});
    auto v = dom.find("vertices");
    if (v == dom.end() || !v->is_array()) {
      rd.error("domain.vertices", "expected an array of [x, y] pairs");
    } else {
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& p = (*v)[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
          rd.error(at_index("domain.vertices", i), "expected an [x, y] pair");
        else
          d.vertices.push_back({p[0].get<double>(), p[1].get<double>()});
      }
    }
  } else if (d.shape == "box") {
    rd.allow_only(dom, path, {"shape", "lower", "upper"});
    if (auto c = rd.numbers(dom, "lower", path, true)) d.lower = *c;
    if (auto c = rd.numbers(dom, "upper", path, true)) d.upper = *c;
  } else {
    rd.error("domain.shape", "must be one of ball, polygon, box");
    return;
  }
  if (rd.errors.size() == before) {
    try {
      Domain built = d.build();
      if (!cfg.species.empty() && built.dim() != cfg.species.size())
        rd.error("domain", "dimension differs from the species count");
    } catch (const Error& e) {
      rd.error("domain", e.what());
    }
  }
}

void read_run(Reader& rd, const json& run, ExperimentConfig& cfg) {
  const std::string path = "run";
  RunConfig& r = cfg.run;
  const std::size_t dim = cfg.species.size();
  rd.allow_only(run, path,
                {"h", "h_ladder", "t", "dt", "x0", "u0", "w0", "seed", "samples", "n_alpha", "n_v",
                 "n_t", "eps", "beta", "r", "alpha", "times"});
  auto positive = [&](const char* key, std::optional<double> v) {
    if (v && !(*v > 0.0)) rd.error(Reader::join(path, key), "must be positive");
    return v;
  };
  r.h = positive("h", rd.number(run, "h", path, false));
  if (auto l = rd.numbers(run, "h_ladder", path, false)) {
    r.h_ladder = *l;
    for (std::size_t i = 0; i < l->size(); ++i) {
      if (!((*l)[i] > 0.0)) rd.error(at_index("run.h_ladder", i), "must be positive");
      if (i > 0 && !((*l)[i] < (*l)[i - 1]))
        rd.error(at_index("run.h_ladder", i), "ladder must be strictly decreasing");
    }
  }
  if (auto t = positive("t", rd.number(run, "t", path, false))) r.t = *t;
  r.dt = positive("dt", rd.number(run, "dt", path, false));
  if (auto x = rd.numbers(run, "x0", path, false)) {
    r.x0 = *x;
    if (dim && x->size() != dim) rd.error("run.x0", "needs one entry per species");
  }
  if (const json* u = rd.object(run, "u0", path, false)) r.u0 = read_function(rd, *u, "run.u0", dim);
  else r.u0 = FunctionSpec{"linear", std::vector<double>(dim, 1.0)};
  if (const json* w = rd.object(run, "w0", path, false)) r.w0 = read_function(rd, *w, "run.w0", 1);
  r.seed = rd.unsigned_int(run, "seed", path);
  auto count = [&](const char* key, std::size_t& dst, std::size_t min) {
    if (auto v = rd.unsigned_int(run, key, path)) {
      if (*v < min) rd.error(Reader::join(path, key), "must be at least " + std::to_string(min));
      dst = static_cast<std::size_t>(*v);
    }
  };
  count("samples", r.samples, 1);
  count("n_alpha", r.n_alpha, 3);
  count("n_v", r.n_v, 3);
  count("n_t", r.n_t, 1);
  if (auto v = positive("eps", rd.number(run, "eps", path, false))) r.eps = *v;
  if (auto v = rd.number(run, "beta", path, false)) r.beta = *v;
  if (auto v = rd.number(run, "r", path, false)) r.r = *v;
  if (auto v = rd.number(run, "alpha", path, false)) r.alpha = *v;
  if (auto v = rd.numbers(run, "times", path, false)) {
    r.times = *v;
    for (std::size_t i = 0; i < v->size(); ++i)
      if (!((*v)[i] >= 0.0) || (i > 0 && !((*v)[i] > (*v)[i - 1])))
        rd.error(at_index("run.times", i), "times must be nonnegative and increasing");
  }
}

json function_json(const FunctionSpec& f) {
  return json{{"type", f.type},           {"coeffs", f.coeffs},         {"offset", f.offset},
              {"amplitude", f.amplitude}, {"wavenumber", f.wavenumber}, {"phase", f.phase}};
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string where = "line " + std::to_string(line) + ", column " + std::to_string(col);
    throw ConfigError(ErrorKind::ParseError, "malformed config at " + where,
                      {{where, e.what()}});
  }
  Reader rd;
  ExperimentConfig cfg;
  if (!doc.is_object()) {
    rd.error("", "config must be an object");
  } else {
    rd.allow_only(doc, "", {"network", "domain", "run"});
    if (const json* n = rd.object(doc, "network", "", true)) read_network(rd, *n, cfg);
    if (const json* d = rd.object(doc, "domain", "", true)) read_domain(rd, *d, cfg);
    if (const json* r = rd.object(doc, "run", "", false))
      read_run(rd, *r, cfg);
    else
      read_run(rd, json::object(), cfg);
  }
  if (!rd.errors.empty()) {
    std::string msg = std::to_string(rd.errors.size()) + " validation error(s):";
    for (const auto& e : rd.errors) msg += " " + e.field + ": " + e.message + ";";
    throw ConfigError(ErrorKind::ValidationError, msg, rd.errors);
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ErrorKind::ParseError, "cannot read " + path, {{path, "cannot open"}});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  json reactions = json::array();
  for (std::size_t j = 0; j < cfg.network.n_reactions(); ++j)
    reactions.push_back({{"reactants", cfg.network.nu_plus[j]},
                         {"products", cfg.network.nu_minus[j]},
                         {"k_plus", cfg.network.k_plus[j]},
                         {"k_minus", cfg.network.k_minus[j]}});
  json dom{{"shape", cfg.domain.shape}};
  if (cfg.domain.shape == "ball") {
    dom["center"] = cfg.domain.center;
    dom["radius"] = cfg.domain.radius;
  } else if (cfg.domain.shape == "polygon") {
    dom["vertices"] = cfg.domain.vertices;
  } else {
    dom["lower"] = cfg.domain.lower;
    dom["upper"] = cfg.domain.upper;
  }
  const RunConfig& r = cfg.run;
  json run{{"h_ladder", r.h_ladder}, {"t", r.t},         {"x0", r.x0},
           {"u0", function_json(r.u0)}, {"samples", r.samples}, {"n_alpha", r.n_alpha},
           {"n_v", r.n_v},           {"n_t", r.n_t},     {"eps", r.eps},
           {"beta", r.beta},         {"r", r.r},         {"alpha", r.alpha},
           {"times", r.times}};
  if (r.h) run["h"] = *r.h;
  if (r.dt) run["dt"] = *r.dt;
  if (r.w0) run["w0"] = function_json(*r.w0);
  if (r.seed) run["seed"] = *r.seed;
  return json{{"network", {{"species", cfg.species}, {"reactions", reactions}}},
              {"domain", dom},
              {"run", run}};
}

std::string default_config_text() {
  return R"({
  "network": {
    "species": ["X1", "X2"],
    "reactions": [{"reactants": [1, 0], "products": [0, 1], "k_plus": 1, "k_minus": 1}]
  },
  "domain": {"shape": "ball", "center": [7, 3], "radius": 1.4142135623730951},
  "run": {
    "h": 1,
    "h_ladder": [1, 0.5, 0.25],
    "t": 1,
    "x0": [7, 3],
    "u0": {"type": "linear", "coeffs": [1, 1]},
    "seed": 1
  }
}
)";
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::string text = to_json(cfg).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace crnhj::cli
