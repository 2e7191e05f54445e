#include "diffc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "diffc/container.hpp"
#include "diffc/error.hpp"
#include "diffc/rng.hpp"

namespace diffc {
namespace {

struct Entry {
  std::string value;
  int line;
};

struct Section {
  std::string kind;   // "suite", "dataset", ...
  std::string label;  // dataset name
  int line = 0;
  std::map<std::string, Entry> entries;
  std::set<std::string> used;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(Errc::ConfigError, "line " + std::to_string(line) + ": " + msg);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Typed access to one section; every read marks the key as known.
class Reader {
 public:
  explicit Reader(Section& s) : s_(s) {}

  const Entry* find(const std::string& key) {
    s_.used.insert(key);
    const auto it = s_.entries.find(key);
    return it == s_.entries.end() ? nullptr : &it->second;
  }

  std::string text(const std::string& key, std::string fallback) {
    const Entry* e = find(key);
    return e ? e->value : fallback;
  }

  template <class T>
  T integer(const std::string& key, T fallback, T lo, T hi) {
    const Entry* e = find(key);
    if (!e) return fallback;
    T v{};
    const auto* end = e->value.data() + e->value.size();
    const auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
    if (ec != std::errc() || ptr != end) fail(e->line, key + " expects an integer, got '" + e->value + "'");
    if (v < lo || v > hi)
      fail(e->line, key + " = " + e->value + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  double real(const std::string& key, double fallback, double lo, double hi) {
    const Entry* e = find(key);
    if (!e) return fallback;
    double v = 0.0;
    const auto* end = e->value.data() + e->value.size();
    const auto [ptr, ec] = std::from_chars(e->value.data(), end, v);
    if (ec != std::errc() || ptr != end) fail(e->line, key + " expects a number, got '" + e->value + "'");
    if (!(v >= lo && v <= hi)) fail(e->line, key + " = " + e->value + " out of range");
    return v;
  }

  bool boolean(const std::string& key, bool fallback) {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true") return true;
    if (e->value == "false") return false;
    fail(e->line, key + " expects true or false");
  }

  int line(const std::string& key) const {
    const auto it = s_.entries.find(key);
    return it == s_.entries.end() ? s_.line : it->second.line;
  }

  void finish() const {
    for (const auto& [key, entry] : s_.entries)
      if (!s_.used.contains(key)) fail(entry.line, "unknown key '" + key + "' in [" + s_.kind + "]");
  }

 private:
  Section& s_;
};

std::vector<Section> tokenize(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (content.empty()) continue;
    if (content.front() == '[') {
      if (content.back() != ']') fail(line, "unterminated section header");
      const std::string header = trim(content.substr(1, content.size() - 2));
      Section s;
      s.line = line;
      const auto space = header.find(' ');
      s.kind = header.substr(0, space);
      if (space != std::string::npos) s.label = trim(header.substr(space + 1));
      static const std::set<std::string> known{"suite", "dataset", "corruptions", "model", "schedule", "samplers"};
      if (!known.contains(s.kind)) fail(line, "unknown section [" + header + "]");
      if (s.kind == "dataset" && s.label.empty()) fail(line, "dataset sections need a name: [dataset NAME]");
      if (s.kind != "dataset" && !s.label.empty()) fail(line, "section [" + s.kind + "] takes no name");
      for (const auto& prev : sections)
        if (prev.kind == s.kind && prev.label == s.label) fail(line, "duplicate section [" + header + "]");
      sections.push_back(std::move(s));
      continue;
    }
    const auto eq = content.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    if (sections.empty()) fail(line, "key outside of any section");
    const std::string key = trim(content.substr(0, eq));
    if (key.empty()) fail(line, "empty key");
    auto& entries = sections.back().entries;
    if (entries.contains(key)) fail(line, "duplicate key '" + key + "'");
    entries.emplace(key, Entry{trim(content.substr(eq + 1)), line});
  }
  return sections;
}

DatasetSpec read_dataset(Section& s) {
  Reader r(s);
  DatasetSpec d;
  d.name = s.label;
  const auto source = r.text("source", "toy");
  if (source == "toy") d.source = DatasetSource::toy;
  else if (source == "fractal") d.source = DatasetSource::fractal;
  else if (source == "file") d.source = DatasetSource::file;
  else fail(r.line("source"), "source must be toy, fractal or file");
  d.side = r.integer<std::size_t>("side", d.side, 2, 257);
  d.channels = r.integer<std::size_t>("channels", d.source == DatasetSource::fractal ? 3 : 1, 1, 3);
  if (d.channels == 2) fail(r.line("channels"), "channels must be 1 or 3");
  d.count = r.integer<std::size_t>("count", d.count, 0, 1000000);
  const auto tint = r.text("tint", "red");
  if (tint == "red") d.tint = Tint::red;
  else if (tint == "green") d.tint = Tint::green;
  else if (tint == "blue") d.tint = Tint::blue;
  else fail(r.line("tint"), "tint must be red, green or blue");
  d.path = r.text("path", "");
  d.augment = r.integer<std::size_t>("augment", 1, 1, 64);
  const auto mode = r.text("mode", "overlay");
  if (mode == "overlay") d.mode = ExperimentMode::overlay;
  else if (mode == "intrinsic") d.mode = ExperimentMode::intrinsic;
  else fail(r.line("mode"), "mode must be overlay or intrinsic");
  r.finish();
  if (d.source == DatasetSource::file && d.path.empty()) fail(s.line, "file datasets need a path");
  if (d.source != DatasetSource::file && d.count == 0) fail(r.line("count"), "synthetic datasets need count >= 1");
  if (d.source == DatasetSource::toy && d.side > 32) fail(r.line("side"), "toy side must be <= 32");
  if (d.source == DatasetSource::fractal && d.channels != 3) fail(r.line("channels"), "fractal datasets are RGB");
  if (d.mode == ExperimentMode::intrinsic && d.source != DatasetSource::fractal)
    fail(r.line("mode"), "intrinsic mode needs a fractal dataset");
  return d;
}

void emit(std::ostringstream& out, const std::string& key, const std::string& value) {
  out << key << " = " << value << "\n";
}

template <class Seq, class F>
std::string join(const Seq& items, F render) {
  std::string out;
  for (const auto& item : items) {
    if (!out.empty()) out += ", ";
    out += render(item);
  }
  return out;
}

}  // namespace

std::string_view source_name(DatasetSource s) noexcept {
  switch (s) {
    case DatasetSource::toy: return "toy";
    case DatasetSource::fractal: return "fractal";
    case DatasetSource::file: return "file";
  }
  return "unknown";
}

std::string_view mode_name(ExperimentMode m) noexcept { return m == ExperimentMode::overlay ? "overlay" : "intrinsic"; }
std::string_view model_name(ModelKind m) noexcept { return m == ModelKind::analytic ? "analytic" : "tiny"; }

std::uint64_t text_hash(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::uint64_t cell_seed(std::uint64_t master, const std::string& dataset, CorruptionKind corruption, int severity,
                        SamplerKind sampler) {
  std::uint64_t h = mix64(master);
  h = hash_combine(h, text_hash(dataset));
  h = hash_combine(h, static_cast<std::uint64_t>(corruption_order(corruption)));
  h = hash_combine(h, static_cast<std::uint64_t>(severity));
  return hash_combine(h, static_cast<std::uint64_t>(sampler));
}

std::vector<ExperimentSpec> SuiteConfig::cells() const {
  std::vector<ExperimentSpec> out;
  for (const auto& d : datasets)
    for (auto kind : corruptions)
      for (int sev : severities)
        for (auto sk : samplers) {
          ExperimentSpec e;
          e.dataset = d;
          e.corruption = kind;
          e.severity = sev;
          e.model = model;
          e.schedule = schedule;
          e.sampler = SamplerConfig{sk, ddim_steps, eta, cell_seed(master_seed, d.name, kind, sev, sk)};
          e.samples = samples;
          e.features = features;
          e.master_seed = master_seed;
          out.push_back(std::move(e));
        }
  return out;
}

SuiteConfig parse_suite(const std::string& text) {
  auto sections = tokenize(text);
  SuiteConfig cfg;
  bool have_corruptions = false, have_samplers = false;
  for (auto& s : sections) {
    Reader r(s);
    if (s.kind == "suite") {
      cfg.name = r.text("name", cfg.name);
      cfg.master_seed = r.integer<std::uint64_t>("master_seed", 0, 0, UINT64_MAX);
      cfg.workers = r.integer<std::size_t>("workers", 1, 1, 256);
      cfg.record_timing = r.boolean("record_timing", false);
      if (const Entry* e = r.find("features")) {
        try {
          cfg.features = parse_feature_map(e->value);
        } catch (const Error& err) {
          fail(e->line, err.what());
        }
      }
      r.finish();
    } else if (s.kind == "dataset") {
      cfg.datasets.push_back(read_dataset(s));
    } else if (s.kind == "corruptions") {
      have_corruptions = true;
      const Entry* kinds = r.find("kinds");
      if (!kinds || split_list(kinds->value).empty()) fail(kinds ? kinds->line : s.line, "corruption list is empty");
      for (const auto& name : split_list(kinds->value)) {
        const auto k = parse_corruption(name);
        if (!k) fail(kinds->line, "unknown corruption '" + name + "'");
        if (std::find(cfg.corruptions.begin(), cfg.corruptions.end(), *k) != cfg.corruptions.end())
          fail(kinds->line, "corruption '" + name + "' listed twice");
        cfg.corruptions.push_back(*k);
      }
      const Entry* sev = r.find("severities");
      if (!sev) {
        cfg.severities = {1};
      } else {
        for (const auto& item : split_list(sev->value)) {
          int v = 0;
          const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
          if (ec != std::errc() || ptr != item.data() + item.size() || v < 1 || v > 5)
            fail(sev->line, "severity '" + item + "' must be an integer in [1, 5]");
          if (std::find(cfg.severities.begin(), cfg.severities.end(), v) != cfg.severities.end())
            fail(sev->line, "severity " + item + " listed twice");
          cfg.severities.push_back(v);
        }
        if (cfg.severities.empty()) fail(sev->line, "severity list is empty");
      }
      r.finish();
    } else if (s.kind == "model") {
      const auto kind = r.text("kind", "analytic");
      if (kind == "analytic") cfg.model.kind = ModelKind::analytic;
      else if (kind == "tiny") cfg.model.kind = ModelKind::tiny;
      else fail(r.line("kind"), "model kind must be analytic or tiny");
      if (const Entry* e = r.find("hidden")) {
        cfg.model.hidden.clear();
        for (const auto& item : split_list(e->value)) {
          std::size_t v = 0;
          const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
          if (ec != std::errc() || ptr != item.data() + item.size() || v == 0)
            fail(e->line, "hidden widths must be positive integers");
          cfg.model.hidden.push_back(v);
        }
      }
      cfg.model.train.epochs = r.integer<int>("epochs", cfg.model.train.epochs, 1, 100000);
      cfg.model.train.batch_size = r.integer<std::size_t>("batch_size", cfg.model.train.batch_size, 1, 1000000);
      cfg.model.train.lr = r.real("lr", cfg.model.train.lr, 1e-12, 1.0);
      r.finish();
    } else if (s.kind == "schedule") {
      cfg.schedule.steps = r.integer<int>("steps", cfg.schedule.steps, 2, 100000);
      cfg.schedule.beta_start = r.real("beta_start", cfg.schedule.beta_start, 1e-12, 0.999);
      cfg.schedule.beta_end = r.real("beta_end", cfg.schedule.beta_end, 1e-12, 0.999);
      if (cfg.schedule.beta_end < cfg.schedule.beta_start) fail(r.line("beta_end"), "beta_end < beta_start");
      r.finish();
    } else if (s.kind == "samplers") {
      have_samplers = true;
      const Entry* kinds = r.find("kinds");
      if (!kinds || split_list(kinds->value).empty()) fail(kinds ? kinds->line : s.line, "sampler list is empty");
      for (const auto& name : split_list(kinds->value)) {
        const auto k = parse_sampler(name);
        if (!k) fail(kinds->line, "unknown sampler '" + name + "'");
        if (std::find(cfg.samplers.begin(), cfg.samplers.end(), *k) != cfg.samplers.end())
          fail(kinds->line, "sampler '" + name + "' listed twice");
        cfg.samplers.push_back(*k);
      }
      cfg.ddim_steps = r.integer<int>("ddim_steps", cfg.ddim_steps, 2, 100000);
      cfg.eta = r.real("eta", cfg.eta, 0.0, 1.0);
      cfg.samples = r.integer<std::size_t>("samples", cfg.samples, 2, 1000000);
      r.finish();
    }
  }
  if (cfg.datasets.empty()) fail(0, "no [dataset NAME] section");
  if (!have_corruptions) fail(0, "missing [corruptions] section");
  if (!have_samplers) cfg.samplers = {SamplerKind::ddpm};
  if (std::find(cfg.samplers.begin(), cfg.samplers.end(), SamplerKind::ddim) != cfg.samplers.end() &&
      cfg.ddim_steps > cfg.schedule.steps)
    fail(0, "ddim_steps exceeds schedule steps");
  return cfg;
}

SuiteConfig load_suite(const std::string& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw Error(Errc::ConfigError, e.what());
  }
  return parse_suite(text);
}

std::string experiment_config(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "[suite]\n";
  emit(out, "master_seed", std::to_string(spec.master_seed));
  emit(out, "features", spec.features.tag());
  const auto& d = spec.dataset;
  out << "\n[dataset " << d.name << "]\n";
  emit(out, "source", std::string(source_name(d.source)));
  emit(out, "side", std::to_string(d.side));
  emit(out, "channels", std::to_string(d.channels));
  emit(out, "count", std::to_string(d.count));
  emit(out, "tint", std::string(tint_name(d.tint)));
  if (!d.path.empty()) emit(out, "path", d.path);
  emit(out, "augment", std::to_string(d.augment));
  emit(out, "mode", std::string(mode_name(d.mode)));
  out << "\n[corruptions]\n";
  emit(out, "kinds", std::string(corruption_name(spec.corruption)));
  emit(out, "severities", std::to_string(spec.severity));
  out << "\n[model]\n";
  emit(out, "kind", std::string(model_name(spec.model.kind)));
  emit(out, "hidden", join(spec.model.hidden, [](std::size_t w) { return std::to_string(w); }));
  emit(out, "epochs", std::to_string(spec.model.train.epochs));
  emit(out, "batch_size", std::to_string(spec.model.train.batch_size));
  emit(out, "lr", format_double(spec.model.train.lr));
  out << "\n[schedule]\n";
  emit(out, "steps", std::to_string(spec.schedule.steps));
  emit(out, "beta_start", format_double(spec.schedule.beta_start));
  emit(out, "beta_end", format_double(spec.schedule.beta_end));
  out << "\n[samplers]\n";
  emit(out, "kinds", std::string(sampler_name(spec.sampler.kind)));
  emit(out, "ddim_steps", std::to_string(spec.sampler.steps));
  emit(out, "eta", format_double(spec.sampler.eta));
  emit(out, "samples", std::to_string(spec.samples));
  return out.str();
}

std::string spec_digest(const ExperimentSpec& spec) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(mix64(text_hash(experiment_config(spec)))));
  return buf;
}

}  // namespace diffc
