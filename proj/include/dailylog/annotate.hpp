#pragma once
// Semantic annotation of environmental readings (illumination, sound level,
// temperature) and barometric altitude estimation.
//
// All bands are half-open and lower-inclusive from the second band upward:
// an exact boundary value joins the higher band.

#include <array>
#include <cmath>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dailylog/common.hpp"
#include "dailylog/ingest.hpp"

namespace dailylog::annotate {

using json = nlohmann::json;

class NegativeInput : public Error {
 public:
  using Error::Error;
};

class PositiveDbfs : public Error {
 public:
  using Error::Error;
};

class EmptyClip : public Error {
 public:
  EmptyClip() : Error("audio clip is empty") {}
};

class NonpositivePressure : public Error {
 public:
  using Error::Error;
};

struct IlluminationLevel {
  int level = 1;  // 1..5
  std::string label;

  bool operator==(const IlluminationLevel& o) const = default;
};

enum class SoundLevel { very_quiet, soft, normal, noisy, very_noisy };
enum class TemperatureLevel { cold, cool, comfortable, warm, hot };

inline const char* sound_label(SoundLevel s) {
  switch (s) {
    case SoundLevel::very_quiet: return "Very Quiet";
    case SoundLevel::soft: return "Soft Sound";
    case SoundLevel::normal: return "Normal Sound";
    case SoundLevel::noisy: return "Noisy";
    case SoundLevel::very_noisy: return "Very Noisy";
  }
  return "?";
}

inline const char* temperature_label(TemperatureLevel t) {
  switch (t) {
    case TemperatureLevel::cold: return "Cold";
    case TemperatureLevel::cool: return "Cool";
    case TemperatureLevel::comfortable: return "Comfortable";
    case TemperatureLevel::warm: return "Warm";
    case TemperatureLevel::hot: return "Hot";
  }
  return "?";
}

inline std::optional<SoundLevel> sound_from_label(std::string_view s) {
  for (SoundLevel lv : {SoundLevel::very_quiet, SoundLevel::soft, SoundLevel::normal,
                        SoundLevel::noisy, SoundLevel::very_noisy})
    if (s == sound_label(lv)) return lv;
  return std::nullopt;
}

inline std::optional<TemperatureLevel> temperature_from_label(std::string_view s) {
  for (TemperatureLevel lv :
       {TemperatureLevel::cold, TemperatureLevel::cool, TemperatureLevel::comfortable,
        TemperatureLevel::warm, TemperatureLevel::hot})
    if (s == temperature_label(lv)) return lv;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Band tables. Upper bounds are exclusive; the last band is open-ended
// (HUGE_VAL / 0 for the dBFS table, which tops out at full scale).

struct LightBand {
  double lo, hi;
  int level;
  const char* label;
};

struct SoundBand {
  double lo, hi;  // dBFS; lo = -HUGE_VAL for the first band, hi of last = 0 (inclusive)
  SoundLevel level;
};

struct TemperatureBand {
  double lo, hi;
  TemperatureLevel level;
};

inline const std::array<LightBand, 5>& light_bands() {
  static const std::array<LightBand, 5> bands = {{
      {0.0, 5.0, 1, "Extremely dark"},
      {5.0, 50.0, 2, "Dim"},
      {50.0, 300.0, 3, "Moderate brightness"},
      {300.0, 1000.0, 4, "Bright"},
      {1000.0, HUGE_VAL, 5, "Harsh light"},
  }};
  return bands;
}

inline const std::array<SoundBand, 5>& sound_bands() {
  static const std::array<SoundBand, 5> bands = {{
      {-HUGE_VAL, -70.0, SoundLevel::very_quiet},
      {-70.0, -50.0, SoundLevel::soft},
      {-50.0, -30.0, SoundLevel::normal},
      {-30.0, -10.0, SoundLevel::noisy},
      {-10.0, 0.0, SoundLevel::very_noisy},
  }};
  return bands;
}

inline const std::array<TemperatureBand, 5>& temperature_bands() {
  static const std::array<TemperatureBand, 5> bands = {{
      {-HUGE_VAL, 10.0, TemperatureLevel::cold},
      {10.0, 18.0, TemperatureLevel::cool},
      {18.0, 26.0, TemperatureLevel::comfortable},
      {26.0, 30.0, TemperatureLevel::warm},
      {30.0, HUGE_VAL, TemperatureLevel::hot},
  }};
  return bands;
}

// ---------------------------------------------------------------------------
// Operations

inline IlluminationLevel annotate_light(double lux) {
  if (std::isnan(lux) || lux < 0) throw NegativeInput("lux must be >= 0");
  if (lux < 5.0) return {1, "Extremely dark"};
  if (lux < 50.0) return {2, "Dim"};
  if (lux < 300.0) return {3, "Moderate brightness"};
  if (lux < 1000.0) return {4, "Bright"};
  return {5, "Harsh light"};
}

inline SoundLevel annotate_sound(double dbfs) {
  if (std::isnan(dbfs) || dbfs > 0) throw PositiveDbfs("dBFS must be <= 0");
  if (dbfs < -70.0) return SoundLevel::very_quiet;
  if (dbfs < -50.0) return SoundLevel::soft;
  if (dbfs < -30.0) return SoundLevel::normal;
  if (dbfs < -10.0) return SoundLevel::noisy;
  return SoundLevel::very_noisy;
}

inline TemperatureLevel annotate_temperature(double celsius) {
  if (std::isnan(celsius)) throw Error("temperature must be finite");
  if (celsius < 10.0) return TemperatureLevel::cold;
  if (celsius < 18.0) return TemperatureLevel::cool;
  if (celsius < 26.0) return TemperatureLevel::comfortable;
  if (celsius < 30.0) return TemperatureLevel::warm;
  return TemperatureLevel::hot;
}

constexpr double kDbfsFloor = -120.0;

// 20*log10(rms / 1.0); digital silence clamps to the documented -120 dBFS floor.
inline double rms_dbfs(const ingest::AudioClip& clip) {
  if (clip.samples.empty()) throw EmptyClip();
  double acc = 0.0;
  for (double s : clip.samples) acc += s * s;
  const double rms = std::sqrt(acc / static_cast<double>(clip.samples.size()));
  if (rms <= 0.0) return kDbfsFloor;
  const double db = 20.0 * std::log10(rms);
  return db < kDbfsFloor ? kDbfsFloor : db;
}

constexpr double kIsaSeaLevelHpa = 1013.25;
constexpr double kBarometricExponent = 1.0 / 5.255;
constexpr double kBarometricScaleM = 44330.0;

// International-standard-atmosphere barometric formula:
// h = 44330 * (1 - (P / P0)^(1/5.255)). P0 defaults to the ISA sea level and
// can be overridden with a local reference pressure.
inline double estimate_altitude(double pressure_hpa, double sea_level_hpa = kIsaSeaLevelHpa) {
  if (!(pressure_hpa > 0)) throw NonpositivePressure("pressure_hpa must be > 0");
  if (!(sea_level_hpa > 0)) throw NonpositivePressure("sea_level_hpa must be > 0");
  return kBarometricScaleM * (1.0 - std::pow(pressure_hpa / sea_level_hpa, kBarometricExponent));
}

// {"light": {"level": int, "label": str}, "sound": str, "temperature": str,
//  "altitude_m": number} -- the shape embedded in log entries.
inline json annotation_json(const IlluminationLevel& light, SoundLevel sound,
                            TemperatureLevel temperature,
                            std::optional<double> altitude_m = std::nullopt) {
  json j;
  j["light"] = json{{"level", light.level}, {"label", light.label}};
  j["sound"] = sound_label(sound);
  j["temperature"] = temperature_label(temperature);
  if (altitude_m) j["altitude_m"] = *altitude_m;
  return j;
}

}  // namespace dailylog::annotate
