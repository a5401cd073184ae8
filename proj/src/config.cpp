#include "chainnn/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "chainnn/errors.hpp"

namespace chainnn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Bad {
  std::string reason;
};

template <class T>
T parse_number(const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw Bad{"'" + v + "' is not a valid number"};
  return out;
}

int parse_int(const std::string& v, int lo, int hi) {
  const int64_t x = parse_number<int64_t>(v);
  if (x < lo || x > hi)
    throw Bad{"value " + v + " out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"};
  return static_cast<int>(x);
}

double parse_real(const std::string& v, double lo) {
  const double x = parse_number<double>(v);
  if (!(x >= lo) || !std::isfinite(x)) throw Bad{"value " + v + " must be finite and >= " + std::to_string(lo)};
  return x;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Bad{"expected true or false, got '" + v + "'"};
}

std::string fmt_real(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Ordered: serialize_config emits keys in this order.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> f = {
      {"num_pes", {[](RunConfig& c, const std::string& v) { c.chain.num_pes = parse_int(v, 1, 1 << 24); },
                   [](const RunConfig& c) { return std::to_string(c.chain.num_pes); }}},
      {"pipeline_stages",
       {[](RunConfig& c, const std::string& v) { c.chain.pipeline_stages = parse_int(v, 1, 64); },
        [](const RunConfig& c) { return std::to_string(c.chain.pipeline_stages); }}},
      {"clock_hz", {[](RunConfig& c, const std::string& v) { c.chain.clock_hz = parse_real(v, 1.0); },
                    [](const RunConfig& c) { return fmt_real(c.chain.clock_hz); }}},
      {"kmem_capacity",
       {[](RunConfig& c, const std::string& v) { c.chain.kmem_capacity = parse_int(v, 1, 1 << 24); },
        [](const RunConfig& c) { return std::to_string(c.chain.kmem_capacity); }}},
      {"imem_bytes",
       {[](RunConfig& c, const std::string& v) { c.chain.imem_bytes = parse_int(v, 1, 1 << 30); },
        [](const RunConfig& c) { return std::to_string(c.chain.imem_bytes); }}},
      {"omem_bytes",
       {[](RunConfig& c, const std::string& v) { c.chain.omem_bytes = parse_int(v, 1, 1 << 30); },
        [](const RunConfig& c) { return std::to_string(c.chain.omem_bytes); }}},
      {"network", {[](RunConfig& c, const std::string& v) {
                     if (v != "custom" && v != "alexnet" && v != "vgg16")
                       throw Bad{"expected custom, alexnet or vgg16"};
                     c.network = v;
                   },
                   [](const RunConfig& c) { return c.network; }}},
      {"layer", {[](RunConfig& c, const std::string& v) { c.layer = parse_int(v, 0, 64); },
                 [](const RunConfig& c) { return std::to_string(c.layer); }}},
      {"small", {[](RunConfig& c, const std::string& v) { c.small = parse_bool(v); },
                 [](const RunConfig& c) { return std::string(c.small ? "true" : "false"); }}},
      {"kernel", {[](RunConfig& c, const std::string& v) { c.kernel = parse_int(v, 1, 64); },
                  [](const RunConfig& c) { return std::to_string(c.kernel); }}},
      {"in_channels", {[](RunConfig& c, const std::string& v) { c.in_channels = parse_int(v, 1, 1 << 16); },
                       [](const RunConfig& c) { return std::to_string(c.in_channels); }}},
      {"out_channels", {[](RunConfig& c, const std::string& v) { c.out_channels = parse_int(v, 1, 1 << 16); },
                        [](const RunConfig& c) { return std::to_string(c.out_channels); }}},
      {"ifmap", {[](RunConfig& c, const std::string& v) { c.ifmap = parse_int(v, 1, 1 << 16); },
                 [](const RunConfig& c) { return std::to_string(c.ifmap); }}},
      {"stride", {[](RunConfig& c, const std::string& v) { c.stride = parse_int(v, 1, 64); },
                  [](const RunConfig& c) { return std::to_string(c.stride); }}},
      {"pad", {[](RunConfig& c, const std::string& v) { c.pad = parse_int(v, 0, 64); },
               [](const RunConfig& c) { return std::to_string(c.pad); }}},
      {"groups", {[](RunConfig& c, const std::string& v) { c.groups = parse_int(v, 1, 1 << 16); },
                  [](const RunConfig& c) { return std::to_string(c.groups); }}},
      {"batch", {[](RunConfig& c, const std::string& v) { c.batch = parse_int(v, 1, 1 << 20); },
                 [](const RunConfig& c) { return std::to_string(c.batch); }}},
      {"mode", {[](RunConfig& c, const std::string& v) {
                  try {
                    c.mode = parse_scan_mode(v);
                  } catch (const ConfigError& e) {
                    throw Bad{e.what()};
                  }
                },
                [](const RunConfig& c) { return std::string(to_string(c.mode)); }}},
      {"mapping", {[](RunConfig& c, const std::string& v) {
                     try {
                       c.mapping = parse_stride_mapping(v);
                     } catch (const ConfigError& e) {
                       throw Bad{e.what()};
                     }
                   },
                   [](const RunConfig& c) { return std::string(to_string(c.mapping)); }}},
      {"total_bits", {[](RunConfig& c, const std::string& v) { c.fmt.total_bits = parse_int(v, 2, 16); },
                      [](const RunConfig& c) { return std::to_string(c.fmt.total_bits); }}},
      {"frac_bits", {[](RunConfig& c, const std::string& v) { c.fmt.frac_bits = parse_int(v, 0, 15); },
                     [](const RunConfig& c) { return std::to_string(c.fmt.frac_bits); }}},
      {"accumulator_bits",
       {[](RunConfig& c, const std::string& v) { c.fmt.accumulator_bits = parse_int(v, 2, 62); },
        [](const RunConfig& c) { return std::to_string(c.fmt.accumulator_bits); }}},
      {"overflow", {[](RunConfig& c, const std::string& v) {
                      if (v == "saturate") c.fmt.overflow = Overflow::Saturate;
                      else if (v == "wrap") c.fmt.overflow = Overflow::Wrap;
                      else throw Bad{"expected saturate or wrap"};
                    },
                    [](const RunConfig& c) {
                      return std::string(c.fmt.overflow == Overflow::Saturate ? "saturate" : "wrap");
                    }}},
      {"overhead_cycles",
       {[](RunConfig& c, const std::string& v) { c.overhead.per_layer_cycles = parse_int(v, 0, 1 << 30); },
        [](const RunConfig& c) { return std::to_string(c.overhead.per_layer_cycles); }}},
      {"overhead_fraction",
       {[](RunConfig& c, const std::string& v) { c.overhead.compute_fraction = parse_real(v, 0.0); },
        [](const RunConfig& c) { return fmt_real(c.overhead.compute_fraction); }}},
      {"energy_table", {[](RunConfig& c, const std::string& v) {
                          if (!v.empty() && !std::filesystem::exists(v))
                            throw Bad{"file '" + v + "' does not exist"};
                          c.energy_table = v;
                        },
                        [](const RunConfig& c) { return c.energy_table; }}},
      {"seed", {[](RunConfig& c, const std::string& v) { c.seed = parse_number<uint64_t>(v); },
                [](const RunConfig& c) { return std::to_string(c.seed); }}},
      {"output_dir", {[](RunConfig& c, const std::string& v) { c.output_dir = v; },
                      [](const RunConfig& c) { return c.output_dir; }}},
      {"format", {[](RunConfig& c, const std::string& v) {
                    if (v != "text" && v != "json") throw Bad{"expected text or json"};
                    c.format = v;
                  },
                  [](const RunConfig& c) { return c.format; }}},
  };
  return f;
}

// Walks "key: value" lines, calling fn(line, key, value).
template <class Fn>
void for_each_entry(const std::string& text, Fn&& fn) {
  std::istringstream in(text);
  std::string raw;
  std::set<std::string> seen;
  for (int line = 1; std::getline(in, raw); ++line) {
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto colon = s.find(':');
    if (colon == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected 'key: value', got '" + s + "'");
    const std::string key = trim(s.substr(0, colon));
    const std::string value = trim(s.substr(colon + 1));
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(line) + ": " + key + ": duplicate key");
    fn(line, key, value);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

ScanMode parse_scan_mode(const std::string& s) {
  if (s == "dual") return ScanMode::Dual;
  if (s == "single") return ScanMode::Single;
  throw ConfigError("scan mode must be dual or single, got '" + s + "'");
}

StrideMapping parse_stride_mapping(const std::string& s) {
  if (s == "phase-split") return StrideMapping::PhaseSplit;
  if (s == "direct") return StrideMapping::Direct;
  throw ConfigError("stride mapping must be phase-split or direct, got '" + s + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, const Field*> index;
  for (const auto& [k, f] : fields()) index[k] = &f;
  for_each_entry(text, [&](int line, const std::string& key, const std::string& value) {
    const auto it = index.find(key);
    if (it == index.end())
      throw ConfigError("line " + std::to_string(line) + ": " + key + ": unknown key");
    try {
      it->second->set(c, value);
    } catch (const Bad& b) {
      throw ConfigError("line " + std::to_string(line) + ": " + key + ": " + b.reason);
    }
  });
  try {
    c.chain.validate();
    c.fmt.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string serialize_config(const RunConfig& c) {
  std::string out;
  for (const auto& [k, f] : fields()) out += k + ": " + f.get(c) + "\n";
  return out;
}

std::vector<NamedLayer> RunConfig::layers() const {
  if (network == "custom")
    return {{"custom", LayerParams::make(batch, in_channels, out_channels, ifmap, kernel, stride,
                                         pad, groups)}};
  auto all = network_preset(network, batch, small);
  if (layer == 0) return all;
  if (layer > static_cast<int>(all.size()))
    throw ConfigError("layer " + std::to_string(layer) + " not in " + network + " (" +
                      std::to_string(all.size()) + " layers)");
  return {all[layer - 1]};
}

EnergyCostTable parse_energy_table(const std::string& text) {
  EnergyCostTable t;
  const std::map<std::string, double*> keys{{"dram", &t.dram}, {"imem", &t.imem}, {"kmem", &t.kmem},
                                            {"omem", &t.omem}, {"mac", &t.mac}};
  for_each_entry(text, [&](int line, const std::string& key, const std::string& value) {
    const auto it = keys.find(key);
    if (it == keys.end())
      throw ConfigError("line " + std::to_string(line) + ": " + key + ": unknown key");
    try {
      *it->second = parse_real(value, 0.0);
    } catch (const Bad& b) {
      throw ConfigError("line " + std::to_string(line) + ": " + key + ": " + b.reason);
    }
  });
  return t;
}

EnergyCostTable load_energy_table(const std::string& path) {
  return parse_energy_table(read_file(path));
}

}  // namespace chainnn
