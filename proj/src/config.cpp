#include "fif/config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

namespace fif {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ValidationError("'" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ValidationError("unknown key '" + where + "." + key + "'");
  }
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& dst) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("bad value for '" + where + "." + key + "'");
  }
}

// Counts come from JSON numbers, which may be written as 2.0 or be negative.
template <class T>
void read_count(const json& obj, const char* key, const std::string& where, T& dst) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ValidationError("'" + where + "." + key + "' must be a nonnegative integer");
  }
  dst = static_cast<T>(v.get<unsigned long long>());
}

std::vector<std::string> read_exprs(const json& sys, const char* key) {
  const json& v = sys.at(key);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw ValidationError(std::string("'system.") + key + "' must be a string or an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ValidationError(std::string("'system.") + key + "' entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::vector<Expr> parse_all(const std::vector<std::string>& texts, std::size_t count, const char* what) {
  std::vector<std::string> src = texts;
  if (src.size() == 1 && count > 1) src.assign(count, texts.front());
  std::vector<Expr> out;
  for (const auto& t : src) {
    try {
      out.push_back(expr::parse(t));
    } catch (const ParseError& e) {
      throw ValidationError(std::string(what) + " '" + t + "': " + e.what());
    }
  }
  return out;
}

Expr parse_one(const std::string& text, const char* what) {
  try {
    return expr::parse(text);
  } catch (const ParseError& e) {
    throw ValidationError(std::string(what) + " '" + text + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(doc, "config", {"system", "sampling", "oscillation", "hoelder", "boxdim", "contraction", "bilipschitz",
                            "output"});
  if (!doc.contains("system")) throw ValidationError("config has no 'system' section");

  ExperimentConfig cfg;
  const json& sys = doc.at("system");
  only_keys(sys, "system", {"kind", "knots", "germ", "base", "scaling", "data", "offsets"});
  read(sys, "kind", "system", cfg.kind);
  if (!sys.contains("scaling")) throw ValidationError("'system.scaling' is required");
  cfg.scaling = read_exprs(sys, "scaling");
  if (cfg.kind == "alpha") {
    for (const char* key : {"knots", "germ", "base"}) {
      if (!sys.contains(key)) throw ValidationError(std::string("'system.") + key + "' is required for kind alpha");
    }
    if (sys.contains("data") || sys.contains("offsets")) {
      throw ValidationError("'system.data' and 'system.offsets' belong to kind classical");
    }
    read(sys, "knots", "system", cfg.knots);
    read(sys, "germ", "system", cfg.germ);
    read(sys, "base", "system", cfg.base);
  } else if (cfg.kind == "classical") {
    for (const char* key : {"data", "offsets"}) {
      if (!sys.contains(key)) throw ValidationError(std::string("'system.") + key + "' is required for kind classical");
    }
    if (sys.contains("knots") || sys.contains("germ") || sys.contains("base")) {
      throw ValidationError("'system.knots', 'germ' and 'base' belong to kind alpha");
    }
    std::vector<std::vector<double>> pts;
    read(sys, "data", "system", pts);
    for (const auto& p : pts) {
      if (p.size() != 2) throw ValidationError("'system.data' entries must be [x, y] pairs");
      cfg.data.push_back({p[0], p[1]});
    }
    cfg.offsets = read_exprs(sys, "offsets");
  } else {
    throw ValidationError("'system.kind' must be 'alpha' or 'classical', got '" + cfg.kind + "'");
  }

  DimensionSettings& st = cfg.settings;
  if (doc.contains("sampling")) {
    const json& s = doc.at("sampling");
    only_keys(s, "sampling", {"grid_exponent", "tol", "depth"});
    read_count(s, "grid_exponent", "sampling", cfg.grid_exponent);
    read(s, "tol", "sampling", st.tol);
    read_count(s, "depth", "sampling", cfg.depth);
  }
  if (doc.contains("oscillation")) {
    const json& s = doc.at("oscillation");
    only_keys(s, "oscillation", {"p", "m_max", "beta"});
    read_count(s, "p", "oscillation", st.p);
    read_count(s, "m_max", "oscillation", st.osc_m_max);
    read(s, "beta", "oscillation", st.beta);
  }
  if (doc.contains("hoelder")) {
    const json& s = doc.at("hoelder");
    only_keys(s, "hoelder", {"s"});
    read(s, "s", "hoelder", st.s);
  }
  if (doc.contains("boxdim")) {
    const json& s = doc.at("boxdim");
    only_keys(s, "boxdim", {"m_min", "m_max"});
    read_count(s, "m_min", "boxdim", st.m_min);
    read_count(s, "m_max", "boxdim", st.m_max);
  }
  if (doc.contains("contraction")) {
    const json& s = doc.at("contraction");
    only_keys(s, "contraction", {"c1", "c2"});
    read(s, "c1", "contraction", cfg.c1);
    read(s, "c2", "contraction", cfg.c2);
  }
  if (doc.contains("bilipschitz")) {
    const json& s = doc.at("bilipschitz");
    only_keys(s, "bilipschitz", {"pairs", "seed"});
    read_count(s, "pairs", "bilipschitz", cfg.pairs);
    read_count(s, "seed", "bilipschitz", cfg.seed);
  }
  if (doc.contains("output")) {
    const json& s = doc.at("output");
    only_keys(s, "output", {"dir"});
    read(s, "dir", "output", cfg.out_dir);
  }

  if (cfg.grid_exponent < 4 || cfg.grid_exponent > 24) {
    throw ValidationError("'sampling.grid_exponent' must lie in [4, 24]");
  }
  st.grid = std::size_t{1} << cfg.grid_exponent;
  if (!(st.tol > 0.0)) throw ValidationError("'sampling.tol' must be positive");
  if (!(st.s > 0.0 && st.s <= 1.0)) throw ValidationError("'hoelder.s' must lie in (0, 1]");
  if (!(st.beta > 0.0 && st.beta <= 1.0)) throw ValidationError("'oscillation.beta' must lie in (0, 1]");
  if (st.p < 2) throw ValidationError("'oscillation.p' must be >= 2");
  if (st.osc_m_max < 1) throw ValidationError("'oscillation.m_max' must be >= 1");
  if (st.m_max < st.m_min + 3) throw ValidationError("'boxdim' needs m_max >= m_min + 3");
  if (st.m_max > cfg.grid_exponent - 3) {
    throw ValidationError("'boxdim.m_max' = " + std::to_string(st.m_max) +
                          " needs at least 8 samples per column; raise sampling.grid_exponent to " +
                          std::to_string(st.m_max + 3));
  }
  if (!(cfg.c1 > 0.0 && cfg.c2 > 0.0)) throw ValidationError("'contraction.c1' and 'c2' must be positive");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  return parse_config(in);
}

std::unique_ptr<FractalSystem> ExperimentConfig::build_system() const {
  try {
    if (kind == "alpha") {
      const Partition part(knots);
      return std::make_unique<AlphaFractalSystem>(make_system(part, parse_one(germ, "germ"), parse_one(base, "base"),
                                                              parse_all(scaling, part.intervals(), "scaling"), {}));
    }
    const std::size_t maps = data.size() < 2 ? 1 : data.size() - 1;
    return std::make_unique<ClassicalFifSystem>(
        make_classical(data, parse_all(scaling, maps, "scaling"), parse_all(offsets, maps, "offset"), {}));
  } catch (const DomainError& e) {
    throw ValidationError(std::string("system cannot be evaluated: ") + e.what());
  }
}

}  // namespace fif
