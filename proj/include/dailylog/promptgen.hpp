#pragma once
// Deterministic structured prompt rendering. Context prompts carry exactly
// five sections in fixed order (Data Introduction, Feature Explanation, Task
// Explanation, Specific Feature Vectors, Output Format); the rendered text is
// the section texts joined by blank lines. Every numeric feature is written
// with 4 decimal places and can be parsed back from the Specific Feature
// Vectors section at that precision.

#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dailylog/annotate.hpp"
#include "dailylog/audio_features.hpp"
#include "dailylog/common.hpp"
#include "dailylog/geoloc.hpp"
#include "dailylog/imu_features.hpp"
#include "dailylog/ingest.hpp"
#include "dailylog/log_entry.hpp"
#include "dailylog/templates.hpp"

namespace dailylog::prompt {

class MissingImu : public Error {
 public:
  MissingImu() : Error("context inference requires IMU features") {}
};

class EmptyEntries : public Error {
 public:
  EmptyEntries() : Error("summary prompt requires at least one entry") {}
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class FeatureSectionError : public Error {
 public:
  using Error::Error;
};

struct PromptSection {
  std::string name;
  std::string text;
};

struct Prompt {
  std::string template_version;
  std::vector<PromptSection> sections;
  std::string rendered;
};

inline const std::vector<std::string>& context_section_names() {
  static const std::vector<std::string> names = {
      "Data Introduction", "Feature Explanation", "Task Explanation",
      "Specific Feature Vectors", "Output Format"};
  return names;
}

// ---------------------------------------------------------------------------
// Template engine

struct Template {
  std::string version;
  std::vector<PromptSection> sections;  // bodies still carry {{slots}}
};

inline Template parse_template(std::string_view text, std::string version) {
  Template tpl;
  tpl.version = std::move(version);
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<std::string> current_name;
  std::vector<std::string> current_lines;
  const auto flush = [&]() {
    if (!current_name) return;
    while (!current_lines.empty() && trim(current_lines.front()).empty())
      current_lines.erase(current_lines.begin());
    while (!current_lines.empty() && trim(current_lines.back()).empty()) current_lines.pop_back();
    std::string body;
    for (std::size_t i = 0; i < current_lines.size(); ++i) {
      if (i) body += '\n';
      body += current_lines[i];
    }
    tpl.sections.push_back({*current_name, std::move(body)});
    current_lines.clear();
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("@@ ", 0) == 0) {
      flush();
      current_name = trim(line.substr(3));
      if (current_name->empty()) throw TemplateError("section marker with empty name");
    } else if (!current_name) {
      if (!trim(line).empty())
        throw TemplateError("template text before the first @@ section marker");
    } else {
      current_lines.push_back(line);
    }
  }
  flush();
  if (tpl.sections.empty()) throw TemplateError("template has no sections");
  return tpl;
}

inline Template builtin_template(const std::string& version) {
  if (version == "context.v1") return parse_template(builtin::kContextV1, version);
  if (version == "context.naive.v1") return parse_template(builtin::kContextNaiveV1, version);
  if (version == "context.freeform.v1")
    return parse_template(builtin::kContextFreeformV1, version);
  if (version == "summary.v1") return parse_template(builtin::kSummaryV1, version);
  throw TemplateError("unknown template version \"" + version + "\"");
}

inline Template load_template_file(const std::string& path, const std::string& version) {
  std::ifstream in(path);
  if (!in) throw TemplateError("cannot open template file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_template(buf.str(), version);
}

// Replaces every {{name}}; unknown names are an error so prompts can never
// silently ship half-filled.
inline std::string fill_slots(std::string_view body, const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(body.size());
  std::size_t pos = 0;
  while (pos < body.size()) {
    const std::size_t open = body.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(body.substr(pos));
      break;
    }
    out.append(body.substr(pos, open - pos));
    const std::size_t close = body.find("}}", open + 2);
    if (close == std::string_view::npos) throw TemplateError("unterminated {{placeholder}}");
    const std::string key{body.substr(open + 2, close - open - 2)};
    const auto it = slots.find(key);
    if (it == slots.end()) throw TemplateError("no value for placeholder {{" + key + "}}");
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

inline Prompt render(const Template& tpl, const std::map<std::string, std::string>& slots) {
  Prompt p;
  p.template_version = tpl.version;
  for (const auto& s : tpl.sections) p.sections.push_back({s.name, fill_slots(s.text, slots)});
  for (std::size_t i = 0; i < p.sections.size(); ++i) {
    if (i) p.rendered += "\n\n";
    p.rendered += p.sections[i].text;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Context prompt

struct ContextBundle {
  ingest::CivilTimestamp civil_time;
  geoloc::StructuredAddress address;
  imu::ImuFeatureVector imu;
  std::optional<audio::AudioFeatureVector> audio;
  annotate::IlluminationLevel light;
  annotate::SoundLevel sound = annotate::SoundLevel::normal;
  annotate::TemperatureLevel temperature = annotate::TemperatureLevel::comfortable;
  std::optional<double> altitude_m;
  std::optional<ingest::PhysioSnapshot> physio;
  double window_s = 120.0;
};

namespace detail {

inline std::string join4(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt4(values[i]);
  }
  out += "]";
  return out;
}

inline std::string imu_vector_lines(const imu::ImuFeatureVector& v) {
  std::string out;
  std::size_t slot = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v.present[i]) continue;
    if (!out.empty()) out += '\n';
    const auto flat = v.blocks[slot].flat();
    out += "IMU ";
    out += imu::sensor_order()[i];
    out += ": ";
    out += join4(flat);
    ++slot;
  }
  return out;
}

inline std::string physio_text(const std::optional<ingest::PhysioSnapshot>& p) {
  if (!p || !p->any()) return "absent";
  std::string out;
  const auto add = [&](const char* label, const std::optional<double>& v, const char* unit) {
    if (!v) return;
    if (!out.empty()) out += "; ";
    out += label;
    out += ' ';
    out += fmt1(*v);
    out += unit;
  };
  add("heart rate", p->hr_bpm, " bpm");
  add("inter-beat interval", p->ibi_ms, " ms");
  add("EDA", p->eda_microsiemens, " uS");
  add("skin temperature", p->temp_celsius, " C");
  add("SpO2", p->spo2_percent, "%");
  return out;
}

inline std::string sensors_present_text(const ContextBundle& b) {
  std::string out = "IMU(";
  bool first = true;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!b.imu.present[i]) continue;
    if (!first) out += ", ";
    out += imu::sensor_order()[i];
    first = false;
  }
  out += ")";
  if (b.audio) out += ", audio";
  out += ", light, temperature";
  if (b.altitude_m) out += ", barometer";
  if (b.physio) out += ", physio";
  return out;
}

}  // namespace detail

inline std::map<std::string, std::string> context_slots(const ContextBundle& b,
                                                        const std::string& version) {
  std::map<std::string, std::string> slots;
  slots["window_seconds"] = fmt_compact(b.window_s);
  slots["datetime"] = ingest::civil_display_verbose(b.civil_time);
  slots["location"] = b.address.display();
  slots["sensors_present"] = detail::sensors_present_text(b);
  slots["light"] = "Level " + std::to_string(b.light.level) + " (" + b.light.label + ")";
  slots["sound"] = annotate::sound_label(b.sound);
  slots["temperature"] = annotate::temperature_label(b.temperature);
  slots["altitude"] = b.altitude_m ? fmt1(*b.altitude_m) + " m" : "unknown";
  slots["physio"] = detail::physio_text(b.physio);
  slots["imu_vectors"] = detail::imu_vector_lines(b.imu);
  slots["audio_vector"] =
      b.audio ? detail::join4(std::span<const double>(b.audio->values)) : "absent";
  slots["template_version"] = version;
  return slots;
}

inline Prompt build_context_prompt(const ContextBundle& b, const Template& tpl) {
  if (b.imu.blocks.empty()) throw MissingImu();
  return render(tpl, context_slots(b, tpl.version));
}

inline Prompt build_context_prompt(const ContextBundle& b,
                                   const std::string& version = "context.v1") {
  return build_context_prompt(b, builtin_template(version));
}

// ---------------------------------------------------------------------------
// Summary prompt

inline Prompt build_summary_prompt(std::span<const logbook::ActivityLogEntry> entries,
                                   double window_h, const Template& tpl) {
  if (entries.empty()) throw EmptyEntries();
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].unix_ts() < entries[i - 1].unix_ts())
      throw Error("entries out of time order at index " + std::to_string(i));
  }
  std::map<std::string, std::string> slots;
  slots["window_hours"] = fmt_compact(window_h);
  slots["entry_count"] = std::to_string(entries.size());
  std::string lines;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) lines += '\n';
    lines += logbook::json(entries[i]).dump();
  }
  slots["entries"] = std::move(lines);
  slots["template_version"] = tpl.version;
  return render(tpl, slots);
}

inline Prompt build_summary_prompt(std::span<const logbook::ActivityLogEntry> entries,
                                   double window_h, const std::string& version = "summary.v1") {
  return build_summary_prompt(entries, window_h, builtin_template(version));
}

// ---------------------------------------------------------------------------
// Feature-section parsing (round-trip contract; also consumed by the mock
// inference backend)

struct PromptFeatures {
  std::map<std::string, std::vector<double>> imu;  // "accel", "gyro", "mag"
  std::optional<std::vector<double>> audio;
};

namespace detail {

inline std::vector<double> parse_bracket_list(std::string_view text) {
  std::vector<double> out;
  const std::size_t open = text.find('[');
  const std::size_t close = text.find(']', open == std::string_view::npos ? 0 : open);
  if (open == std::string_view::npos || close == std::string_view::npos)
    throw FeatureSectionError("expected a [bracketed] number list");
  std::string inner{text.substr(open + 1, close - open - 1)};
  std::istringstream in(inner);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const std::string t = trim(tok);
    if (t.empty()) continue;
    try {
      out.push_back(std::stod(t));
    } catch (...) {
      throw FeatureSectionError("non-numeric value \"" + t + "\" in feature list");
    }
  }
  if (out.empty()) throw FeatureSectionError("empty feature list");
  return out;
}

}  // namespace detail

inline PromptFeatures parse_prompt_features(const std::string& rendered) {
  PromptFeatures out;
  std::istringstream in(rendered);
  std::string line;
  while (std::getline(in, line)) {
    for (const char* sensor : imu::sensor_order()) {
      const std::string prefix = std::string("IMU ") + sensor + ": ";
      if (line.rfind(prefix, 0) == 0)
        out.imu[sensor] = detail::parse_bracket_list(std::string_view(line).substr(prefix.size()));
    }
    if (line.rfind("Audio: ", 0) == 0) {
      const std::string rest = trim(line.substr(7));
      if (rest != "absent") out.audio = detail::parse_bracket_list(rest);
    }
  }
  if (out.imu.empty()) throw FeatureSectionError("no IMU feature lines found in prompt");
  return out;
}

}  // namespace dailylog::prompt
