#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cocyclelab/cocycle.hpp"

namespace cocyclelab {

/// INI-style experiment description:
///
///   [run]      command, seed, threads, out
///   [base]     kind = catmap | fullshift, symbols, weights, ...
///   [group]    family, field, d, signature, tol
///   [cocycle]  form = constant | identity | locally_constant | fourier | random_fourier
///   [term]     repeatable Fourier term: fx, fy, sine, coeff
///   [bump]     repeatable perturbation: center, radius, direction | lie, amplitude
///   [params]   command-specific keys
///
/// '#' and ';' start comments. Every key must be read before computation
/// starts; leftovers are reported by require_consumed().
class Config {
 public:
  struct Section {
    std::string name;
    std::map<std::string, std::string> values;
    int line = 0;
  };

  static Config parse(std::string_view text, const std::string& source = "<config>");
  static Config load(const std::string& path);

  /// Override "section.key=value"; repeatable sections take "section.index.key".
  void set(std::string_view assignment);

  bool has_section(const std::string& name) const;
  /// Indices of all sections with this name, in file order.
  std::vector<int> sections(const std::string& name) const;

  bool has(const std::string& section, const std::string& key, int index = -1) const;
  std::string get(const std::string& section, const std::string& key, int index = -1) const;
  std::string get(const std::string& section, const std::string& key, const std::string& fallback,
                  int index = -1) const;
  double get_double(const std::string& section, const std::string& key, double fallback, int index = -1) const;
  std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback,
                       int index = -1) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback, int index = -1) const;
  /// Keys of a section that start with `prefix` (marked read).
  std::vector<std::string> keys_with_prefix(const std::string& section, const std::string& prefix,
                                            int index = -1) const;

  /// ConfigError listing every key that was never read.
  void require_consumed() const;

  /// Sorted "section.key=value" lines; [run] threads and out are excluded
  /// because they do not change results.
  std::string canonical() const;
  /// 64-bit FNV-1a of canonical().
  std::uint64_t hash() const;
  std::string hash_hex() const;

  const std::vector<Section>& all_sections() const { return sections_; }

 private:
  const Section* find(const std::string& section, int index) const;
  std::string where(const std::string& section, const std::string& key) const;

  std::vector<Section> sections_;
  std::string source_;
  mutable std::set<std::string> consumed_;  // "index/key"
};

std::uint64_t fnv1a64(std::string_view bytes);

BaseSystem base_from_config(const Config& cfg);
GroupDescriptor group_from_config(const Config& cfg);
/// Cocycle with bumps; validated. Requires [cocycle].
CocycleSpec cocycle_from_config(const Config& cfg, const GroupDescriptor& g, const BaseSystem& sys);

}  // namespace cocyclelab
