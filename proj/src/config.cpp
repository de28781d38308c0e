#include "cocyclelab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cocyclelab/errors.hpp"

namespace cocyclelab {

namespace {

const std::set<std::string> kSingle = {"run", "base", "group", "cocycle", "params"};
const std::set<std::string> kRepeatable = {"term", "bump"};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string strip_comment(std::string_view line) {
  const auto pos = line.find_first_of("#;");
  // ';' also separates matrix rows, so it only starts a comment at line start.
  if (pos == std::string_view::npos) return std::string(line);
  if (line[pos] == ';' && !trim(line.substr(0, pos)).empty()) {
    const auto hash = line.find('#');
    return std::string(hash == std::string_view::npos ? line : line.substr(0, hash));
  }
  return std::string(line.substr(0, pos));
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
  });
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Config Config::parse(std::string_view text, const std::string& source) {
  Config cfg;
  cfg.source_ = source;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const std::string at = source + ":" + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + ": malformed section header '" + line + "'");
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!kSingle.count(name) && !kRepeatable.count(name))
        throw ConfigError(at + ": unknown section [" + name + "]");
      if (kSingle.count(name) && cfg.has_section(name))
        throw ConfigError(at + ": section [" + name + "] appears more than once");
      cfg.sections_.push_back({name, {}, line_no});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value'");
    if (cfg.sections_.empty()) throw ConfigError(at + ": key outside any section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (!valid_key(key)) throw ConfigError(at + ": invalid key '" + key + "'");
    auto& values = cfg.sections_.back().values;
    if (values.count(key)) throw ConfigError(at + ": duplicate key '" + key + "'");
    values[key] = trim(std::string_view(line).substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void Config::set(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' lacks '='");
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = path.find('.');
  if (dot == std::string::npos) throw ConfigError("override '" + path + "' must be section.key");
  const std::string name = path.substr(0, dot);
  std::string key = path.substr(dot + 1);
  if (kRepeatable.count(name)) {
    const auto dot2 = key.find('.');
    int index = -1;
    if (dot2 != std::string::npos) {
      const std::string idx = key.substr(0, dot2);
      const auto r = std::from_chars(idx.data(), idx.data() + idx.size(), index);
      if (r.ec != std::errc() || r.ptr != idx.data() + idx.size()) index = -1;
    }
    const auto all = sections(name);
    if (index < 0 || index >= static_cast<int>(all.size()))
      throw ConfigError("override '" + path + "' must be " + name + ".<index>.key with index < " +
                        std::to_string(all.size()));
    key = key.substr(dot2 + 1);
    if (!valid_key(key)) throw ConfigError("override '" + path + "' has an invalid key");
    sections_[static_cast<std::size_t>(all[static_cast<std::size_t>(index)])].values[key] = value;
    return;
  }
  if (!kSingle.count(name)) throw ConfigError("override '" + path + "' names unknown section [" + name + "]");
  if (!valid_key(key)) throw ConfigError("override '" + path + "' has an invalid key");
  auto it = std::find_if(sections_.begin(), sections_.end(), [&](const Section& s) { return s.name == name; });
  if (it == sections_.end()) {
    sections_.push_back({name, {}, 0});
    it = sections_.end() - 1;
  }
  it->values[key] = value;
}

bool Config::has_section(const std::string& name) const {
  return std::any_of(sections_.begin(), sections_.end(), [&](const Section& s) { return s.name == name; });
}

std::vector<int> Config::sections(const std::string& name) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < sections_.size(); ++i)
    if (sections_[i].name == name) out.push_back(static_cast<int>(i));
  return out;
}

const Config::Section* Config::find(const std::string& section, int index) const {
  if (index >= 0) return &sections_.at(static_cast<std::size_t>(index));
  for (const auto& s : sections_)
    if (s.name == section) return &s;
  return nullptr;
}

std::string Config::where(const std::string& section, const std::string& key) const {
  return section + "." + key;
}

bool Config::has(const std::string& section, const std::string& key, int index) const {
  const auto* s = find(section, index);
  return s && s->values.count(key);
}

std::string Config::get(const std::string& section, const std::string& key, int index) const {
  const auto* s = find(section, index);
  if (!s || !s->values.count(key)) throw ConfigError("missing required key " + where(section, key));
  consumed_.insert(std::to_string(s - sections_.data()) + "/" + key);
  return s->values.at(key);
}

std::string Config::get(const std::string& section, const std::string& key, const std::string& fallback,
                        int index) const {
  return has(section, key, index) ? get(section, key, index) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback, int index) const {
  if (!has(section, key, index)) return fallback;
  const std::string v = get(section, key, index);
  try {
    return parse_double(v);
  } catch (const std::exception&) {
    throw ConfigError(where(section, key) + " = '" + v + "' is not a number");
  }
}

std::int64_t Config::get_int(const std::string& section, const std::string& key, std::int64_t fallback,
                             int index) const {
  if (!has(section, key, index)) return fallback;
  const std::string v = get(section, key, index);
  std::int64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec == std::errc() && r.ptr == v.data() + v.size()) return out;
  // Scientific notation such as 1e5 is accepted when it is integral.
  try {
    const double d = parse_double(v);
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
  } catch (const std::exception&) {
  }
  throw ConfigError(where(section, key) + " = '" + v + "' is not an integer");
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback, int index) const {
  if (!has(section, key, index)) return fallback;
  const std::string v = get(section, key, index);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(where(section, key) + " = '" + v + "' is not a boolean");
}

std::vector<std::string> Config::keys_with_prefix(const std::string& section, const std::string& prefix,
                                                  int index) const {
  std::vector<std::string> out;
  const auto* s = find(section, index);
  if (!s) return out;
  for (const auto& [k, v] : s->values)
    if (k.rfind(prefix, 0) == 0) out.push_back(k);
  return out;
}

void Config::require_consumed() const {
  std::string unknown;
  for (std::size_t i = 0; i < sections_.size(); ++i)
    for (const auto& [k, v] : sections_[i].values)
      if (!consumed_.count(std::to_string(i) + "/" + k)) unknown += (unknown.empty() ? "" : ", ") + sections_[i].name + "." + k;
  if (!unknown.empty()) throw ConfigError("unknown or unused keys: " + unknown);
}

std::string Config::canonical() const {
  std::vector<std::string> lines;
  std::map<std::string, int> seen;
  for (const auto& s : sections_) {
    const int idx = seen[s.name]++;
    const std::string prefix = kRepeatable.count(s.name) ? s.name + "." + std::to_string(idx) : s.name;
    for (const auto& [k, v] : s.values) {
      if (s.name == "run" && (k == "threads" || k == "out")) continue;
      lines.push_back(prefix + "." + k + "=" + v);
    }
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::uint64_t Config::hash() const { return fnv1a64(canonical()); }

std::string Config::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

namespace {

Mat matrix_key(const Config& cfg, const std::string& section, const std::string& key, int index = -1) {
  const std::string v = cfg.get(section, key, index);
  try {
    return parse_matrix(v);
  } catch (const std::exception& e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
}

BasePoint point_key(const Config& cfg, const std::string& section, const std::string& key, int index = -1) {
  const std::string v = cfg.get(section, key, index);
  try {
    return parse_point(v);
  } catch (const std::exception& e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
}

std::vector<double> number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::string tok;
  std::istringstream in(text);
  while (in >> tok) {
    for (auto& c : tok)
      if (c == ',') c = ' ';
    std::istringstream parts(tok);
    std::string p;
    while (parts >> p) {
      try {
        out.push_back(parse_double(p));
      } catch (const std::exception&) {
        throw ConfigError(what + ": '" + p + "' is not a number");
      }
    }
  }
  return out;
}

}  // namespace

BaseSystem base_from_config(const Config& cfg) {
  const std::string kind = cfg.get("base", "kind", "catmap");
  BaseSystem sys;
  if (kind == "catmap") {
    sys = BaseSystem::cat_map();
    sys.box_radius = cfg.get_double("base", "box_radius", sys.box_radius);
  } else if (kind == "fullshift") {
    const auto k = cfg.get_int("base", "symbols", 2);
    if (k < 2 || k > 64) throw ConfigError("base.symbols must be in [2, 64]");
    std::vector<double> w;
    if (cfg.has("base", "weights")) w = number_list(cfg.get("base", "weights"), "base.weights");
    try {
      sys = BaseSystem::full_shift(static_cast<int>(k), w);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("base: ") + e.what());
    }
    sys.sample_width = static_cast<int>(cfg.get_int("base", "sample_width", sys.sample_width));
    sys.tail_period = static_cast<int>(cfg.get_int("base", "tail_period", sys.tail_period));
    if (sys.sample_width < 1 || sys.tail_period < 1)
      throw ConfigError("base.sample_width and base.tail_period must be positive");
  } else {
    throw ConfigError("base.kind = '" + kind + "' (expected catmap or fullshift)");
  }
  return sys;
}

GroupDescriptor group_from_config(const Config& cfg) {
  const Family family = parse_family(cfg.get("group", "family", "SL"));
  const Field field = parse_field(cfg.get("group", "field", "real"));
  const auto d = cfg.get_int("group", "d", 2);
  std::optional<std::pair<int, int>> sig;
  if (cfg.has("group", "signature")) {
    const auto v = number_list(cfg.get("group", "signature"), "group.signature");
    if (v.size() != 2) throw ConfigError("group.signature must be 'p,q'");
    sig = std::make_pair(static_cast<int>(v[0]), static_cast<int>(v[1]));
  }
  auto g = make_group(family, field, static_cast<int>(d), sig);
  g.membership_tol = cfg.get_double("group", "tol", g.membership_tol);
  if (!(g.membership_tol >= 0.0)) throw ConfigError("group.tol must be >= 0");
  return g;
}

CocycleSpec cocycle_from_config(const Config& cfg, const GroupDescriptor& g, const BaseSystem& sys) {
  if (!cfg.has_section("cocycle")) throw ConfigError("missing [cocycle] section");
  const std::string form = cfg.get("cocycle", "form");
  CocycleSpec a{g, sys, ConstantForm{Mat::Identity(g.d, g.d)}, {}};
  if (form == "identity") {
    a = identity_cocycle(g, sys);
  } else if (form == "constant") {
    a = constant_cocycle(g, sys, matrix_key(cfg, "cocycle", "value"));
  } else if (form == "locally_constant") {
    if (sys.kind != BaseKind::FullShift) throw ConfigError("cocycle.form = locally_constant needs base.kind = fullshift");
    const auto w = cfg.get_int("cocycle", "window", 0);
    if (w < 0 || w > 4) throw ConfigError("cocycle.window must be in [0, 4]");
    const int len = static_cast<int>(2 * w + 1);
    std::int64_t count = 1;
    for (int i = 0; i < len; ++i) {
      count *= sys.symbols;
      if (count > 4096) throw ConfigError("cocycle table would need more than 4096 entries");
    }
    std::vector<std::optional<Mat>> table(static_cast<std::size_t>(count));
    for (const auto& key : cfg.keys_with_prefix("cocycle", "table.")) {
      const std::string word = key.substr(6);
      if (static_cast<int>(word.size()) != len)
        throw ConfigError("cocycle." + key + ": word length must be 2*window+1 = " + std::to_string(len));
      std::int64_t idx = 0;
      for (char c : word) {
        const int s = c - '0';
        if (s < 0 || s >= sys.symbols) throw ConfigError("cocycle." + key + ": symbol out of range");
        idx = idx * sys.symbols + s;
      }
      table[static_cast<std::size_t>(idx)] = matrix_key(cfg, "cocycle", key);
    }
    LocallyConstantForm f{static_cast<int>(w), {}};
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (!table[i]) {
        std::string word(static_cast<std::size_t>(len), '0');
        auto v = static_cast<std::int64_t>(i);
        for (int j = len - 1; j >= 0; --j, v /= sys.symbols) word[static_cast<std::size_t>(j)] = static_cast<char>('0' + v % sys.symbols);
        throw ConfigError("missing cocycle.table." + word);
      }
      f.table.push_back(*table[i]);
    }
    a.form = f;
  } else if (form == "fourier") {
    FourierTorusForm f;
    for (int idx : cfg.sections("term")) {
      FourierTerm t;
      t.fx = static_cast<int>(cfg.get_int("term", "fx", 0, idx));
      t.fy = static_cast<int>(cfg.get_int("term", "fy", 0, idx));
      t.sine = cfg.get_bool("term", "sine", false, idx);
      t.coeff = matrix_key(cfg, "term", "coeff", idx);
      f.terms.push_back(t);
    }
    if (f.terms.empty()) throw ConfigError("cocycle.form = fourier needs at least one [term]");
    a.form = f;
  } else if (form == "random_fourier") {
    Rng rng(static_cast<std::uint64_t>(cfg.get_int("cocycle", "seed", 1)));
    const double scale = cfg.get_double("cocycle", "scale", 0.5);
    const auto max_freq = cfg.get_int("cocycle", "max_freq", 1);
    if (max_freq < 0 || max_freq > 8) throw ConfigError("cocycle.max_freq must be in [0, 8]");
    a = random_fourier_cocycle(g, rng, scale, static_cast<int>(max_freq));
    a.base = sys;
  } else {
    throw ConfigError("cocycle.form = '" + form +
                      "' (expected constant, identity, locally_constant, fourier, random_fourier)");
  }
  if (form != "fourier" && !cfg.sections("term").empty()) throw ConfigError("[term] sections need cocycle.form = fourier");

  for (int idx : cfg.sections("bump")) {
    Bump b;
    b.center = point_key(cfg, "bump", "center", idx);
    b.radius = cfg.get_double("bump", "radius", 0.1, idx);
    b.amplitude = cfg.get_double("bump", "amplitude", 0.0, idx);
    if (cfg.has("bump", "direction", idx) == cfg.has("bump", "lie", idx))
      throw ConfigError("[bump] needs exactly one of direction or lie");
    if (cfg.has("bump", "direction", idx)) {
      b.direction = matrix_key(cfg, "bump", "direction", idx);
    } else {
      const auto basis = lie_basis(g);
      const auto i = cfg.get_int("bump", "lie", 0, idx);
      if (i < 0 || i >= static_cast<std::int64_t>(basis.size()))
        throw ConfigError("bump.lie must be in [0, " + std::to_string(basis.size()) + ")");
      b.direction = basis[static_cast<std::size_t>(i)];
    }
    if (!(b.radius > 0.0)) throw ConfigError("bump.radius must be positive");
    a.bumps.push_back(b);
  }
  try {
    validate(a);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cocycle: ") + e.what());
  }
  return a;
}

}  // namespace cocyclelab
