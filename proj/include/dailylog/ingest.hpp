#pragma once
// Sensor stream parsing, fixed-window alignment and civil-time conversion.
//
// Wire formats (documented field-by-field in docs/formats.md):
//   JSONL: one object per line, {"unix_ts": number, "modality": string,
//          "payload": [numbers] | object}
//   CSV:   header row "unix_ts,modality,p0,p1,...", numeric payloads only.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dailylog/common.hpp"

namespace dailylog::ingest {

using json = nlohmann::json;

class DecodeError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(const std::string& msg, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

class EmptyStream : public Error {
 public:
  EmptyStream() : Error("empty sensor stream") {}
};

enum class Modality {
  imu_accel,
  imu_gyro,
  imu_mag,
  audio,
  gps,
  wifi,
  bluetooth,
  light,
  temperature,
  physio,
  barometer,
};

inline const char* modality_name(Modality m) {
  switch (m) {
    case Modality::imu_accel: return "imu_accel";
    case Modality::imu_gyro: return "imu_gyro";
    case Modality::imu_mag: return "imu_mag";
    case Modality::audio: return "audio";
    case Modality::gps: return "gps";
    case Modality::wifi: return "wifi";
    case Modality::bluetooth: return "bluetooth";
    case Modality::light: return "light";
    case Modality::temperature: return "temperature";
    case Modality::physio: return "physio";
    case Modality::barometer: return "barometer";
  }
  return "?";
}

inline std::optional<Modality> modality_from_name(std::string_view name) {
  static const std::map<std::string, Modality, std::less<>> table = {
      {"imu_accel", Modality::imu_accel}, {"imu_gyro", Modality::imu_gyro},
      {"imu_mag", Modality::imu_mag},     {"audio", Modality::audio},
      {"gps", Modality::gps},             {"wifi", Modality::wifi},
      {"bluetooth", Modality::bluetooth}, {"light", Modality::light},
      {"temperature", Modality::temperature}, {"physio", Modality::physio},
      {"barometer", Modality::barometer},
  };
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Domain types

struct PhysioSnapshot {
  std::optional<double> eda_microsiemens;
  std::optional<double> hr_bpm;
  std::optional<double> ibi_ms;
  std::optional<double> temp_celsius;
  std::optional<double> spo2_percent;

  bool any() const {
    return eda_microsiemens || hr_bpm || ibi_ms || temp_celsius || spo2_percent;
  }

  // At least one field present; HR and IBI must agree within 5% when both set.
  void validate() const {
    if (!any()) throw Error("physio snapshot has no fields");
    if (eda_microsiemens && *eda_microsiemens < 0) throw Error("eda_microsiemens must be >= 0");
    if (hr_bpm && *hr_bpm <= 0) throw Error("hr_bpm must be > 0");
    if (ibi_ms && *ibi_ms <= 0) throw Error("ibi_ms must be > 0");
    if (spo2_percent && (*spo2_percent < 0 || *spo2_percent > 100))
      throw Error("spo2_percent must lie in [0, 100]");
    if (hr_bpm && ibi_ms) {
      const double implied = 60000.0 / *hr_bpm;
      if (std::fabs(*ibi_ms - implied) > 0.05 * *ibi_ms)
        throw Error("ibi_ms inconsistent with hr_bpm (beyond 5%)");
    }
  }
};

struct TriAxisSeries {
  double sample_rate_hz = 1.0;
  std::vector<double> x, y, z;

  std::size_t size() const { return x.size(); }
};

struct AudioClip {
  double sample_rate_hz = 0.0;
  std::vector<double> samples;  // normalized to [-1, 1]
};

struct GeoFix {
  double lat = 0.0;
  double lon = 0.0;
  std::optional<double> pressure_hpa;
  std::vector<std::string> wifi_ssids;
  std::vector<std::string> bt_macs;
};

inline bool valid_mac(std::string_view mac) {
  if (mac.size() != 17) return false;
  for (std::size_t i = 0; i < mac.size(); ++i) {
    if (i % 3 == 2) {
      if (mac[i] != ':') return false;
    } else if (!std::isxdigit(static_cast<unsigned char>(mac[i]))) {
      return false;
    }
  }
  return true;
}

struct WifiScan {
  std::vector<std::string> ssids;
};

struct BtScan {
  std::vector<std::string> macs;
};

struct AudioChunk {
  double sample_rate_hz = 0.0;
  std::vector<double> samples;
};

using Payload = std::variant<std::vector<double>, AudioChunk, WifiScan, BtScan, PhysioSnapshot>;

struct SensorRecord {
  double unix_ts = 0.0;
  Modality modality = Modality::light;
  Payload payload;
};

struct SensorWindow {
  double start_unix_ts = 0.0;
  double end_unix_ts = 0.0;
  std::map<std::string, TriAxisSeries> imu;  // keys: "accel", "gyro", "mag"
  std::optional<AudioClip> audio;
  std::optional<GeoFix> geo;
  std::optional<double> light_lux;
  std::optional<double> ambient_temp_c;
  std::optional<PhysioSnapshot> physio;
};

struct CivilTimestamp {
  int year = 1970;
  int month = 1;
  int day = 1;
  int hour = 0;
  int minute = 0;
  int second = 0;
  int utc_offset_minutes = 0;
};

// ---------------------------------------------------------------------------
// Civil time (proleptic Gregorian, no leap seconds)

namespace detail {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace detail

inline CivilTimestamp to_civil_time(double unix_ts, int utc_offset_minutes) {
  if (unix_ts < 0) throw Error("unix_ts must be >= 0");
  // Fractional seconds are truncated for civil display.
  const std::int64_t shifted = static_cast<std::int64_t>(std::floor(unix_ts)) +
                               static_cast<std::int64_t>(utc_offset_minutes) * 60;
  const std::int64_t days = detail::floor_div(shifted, 86400);
  const std::int64_t secs = shifted - days * 86400;
  CivilTimestamp ct;
  detail::civil_from_days(days, ct.year, ct.month, ct.day);
  ct.hour = static_cast<int>(secs / 3600);
  ct.minute = static_cast<int>((secs % 3600) / 60);
  ct.second = static_cast<int>(secs % 60);
  ct.utc_offset_minutes = utc_offset_minutes;
  return ct;
}

inline std::int64_t to_unix(const CivilTimestamp& ct) {
  const std::int64_t days = detail::days_from_civil(ct.year, ct.month, ct.day);
  return days * 86400 + ct.hour * 3600 + ct.minute * 60 + ct.second -
         static_cast<std::int64_t>(ct.utc_offset_minutes) * 60;
}

inline const char* weekday_name(const CivilTimestamp& ct) {
  static const char* names[7] = {"Thursday", "Friday",  "Saturday", "Sunday",
                                 "Monday",   "Tuesday", "Wednesday"};
  const std::int64_t days = detail::days_from_civil(ct.year, ct.month, ct.day);
  return names[((days % 7) + 7) % 7];
}

// "2023-11-14 22:13:20 +00:00"
inline std::string civil_display(const CivilTimestamp& ct) {
  char buf[48];
  const int off = ct.utc_offset_minutes;
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d %c%02d:%02d", ct.year, ct.month,
                ct.day, ct.hour, ct.minute, ct.second, off < 0 ? '-' : '+', std::abs(off) / 60,
                std::abs(off) % 60);
  return buf;
}

// "2023-11-14 (Tuesday) 22:13:20 +00:00"
inline std::string civil_display_verbose(const CivilTimestamp& ct) {
  char buf[64];
  const int off = ct.utc_offset_minutes;
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d (%s) %02d:%02d:%02d %c%02d:%02d", ct.year,
                ct.month, ct.day, weekday_name(ct), ct.hour, ct.minute, ct.second,
                off < 0 ? '-' : '+', std::abs(off) / 60, std::abs(off) % 60);
  return buf;
}

inline bool civil_less(const CivilTimestamp& a, const CivilTimestamp& b) {
  return to_unix(a) < to_unix(b);
}

// ---------------------------------------------------------------------------
// JSON <-> record conversion

inline void to_json(json& j, const CivilTimestamp& ct) {
  j = json{{"year", ct.year},     {"month", ct.month},   {"day", ct.day},
           {"hour", ct.hour},     {"minute", ct.minute}, {"second", ct.second},
           {"utc_offset_minutes", ct.utc_offset_minutes}};
}

inline void from_json(const json& j, CivilTimestamp& ct) {
  ct.year = j.at("year").get<int>();
  ct.month = j.at("month").get<int>();
  ct.day = j.at("day").get<int>();
  ct.hour = j.at("hour").get<int>();
  ct.minute = j.at("minute").get<int>();
  ct.second = j.at("second").get<int>();
  ct.utc_offset_minutes = j.at("utc_offset_minutes").get<int>();
}

inline void to_json(json& j, const PhysioSnapshot& p) {
  j = json::object();
  if (p.eda_microsiemens) j["eda_microsiemens"] = *p.eda_microsiemens;
  if (p.hr_bpm) j["hr_bpm"] = *p.hr_bpm;
  if (p.ibi_ms) j["ibi_ms"] = *p.ibi_ms;
  if (p.temp_celsius) j["temp_celsius"] = *p.temp_celsius;
  if (p.spo2_percent) j["spo2_percent"] = *p.spo2_percent;
}

inline void from_json(const json& j, PhysioSnapshot& p) {
  if (j.contains("eda_microsiemens")) p.eda_microsiemens = j["eda_microsiemens"].get<double>();
  if (j.contains("hr_bpm")) p.hr_bpm = j["hr_bpm"].get<double>();
  if (j.contains("ibi_ms")) p.ibi_ms = j["ibi_ms"].get<double>();
  if (j.contains("temp_celsius")) p.temp_celsius = j["temp_celsius"].get<double>();
  if (j.contains("spo2_percent")) p.spo2_percent = j["spo2_percent"].get<double>();
}

inline void to_json(json& j, const TriAxisSeries& s) {
  j = json{{"sample_rate_hz", s.sample_rate_hz}, {"x", s.x}, {"y", s.y}, {"z", s.z}};
}

inline void from_json(const json& j, TriAxisSeries& s) {
  s.sample_rate_hz = j.at("sample_rate_hz").get<double>();
  s.x = j.at("x").get<std::vector<double>>();
  s.y = j.at("y").get<std::vector<double>>();
  s.z = j.at("z").get<std::vector<double>>();
}

inline void to_json(json& j, const AudioClip& c) {
  j = json{{"sample_rate_hz", c.sample_rate_hz}, {"samples", c.samples}};
}

inline void from_json(const json& j, AudioClip& c) {
  c.sample_rate_hz = j.at("sample_rate_hz").get<double>();
  c.samples = j.at("samples").get<std::vector<double>>();
}

inline void to_json(json& j, const GeoFix& g) {
  j = json{{"lat", g.lat}, {"lon", g.lon}};
  if (g.pressure_hpa) j["pressure_hpa"] = *g.pressure_hpa;
  if (!g.wifi_ssids.empty()) j["wifi_ssids"] = g.wifi_ssids;
  if (!g.bt_macs.empty()) j["bt_macs"] = g.bt_macs;
}

inline void from_json(const json& j, GeoFix& g) {
  g.lat = j.at("lat").get<double>();
  g.lon = j.at("lon").get<double>();
  if (j.contains("pressure_hpa")) g.pressure_hpa = j["pressure_hpa"].get<double>();
  if (j.contains("wifi_ssids")) g.wifi_ssids = j["wifi_ssids"].get<std::vector<std::string>>();
  if (j.contains("bt_macs")) g.bt_macs = j["bt_macs"].get<std::vector<std::string>>();
}

inline void to_json(json& j, const SensorWindow& w) {
  j = json{{"start_unix_ts", w.start_unix_ts}, {"end_unix_ts", w.end_unix_ts}};
  if (!w.imu.empty()) {
    json imu = json::object();
    for (const auto& [name, series] : w.imu) imu[name] = series;
    j["imu"] = imu;
  }
  if (w.audio) j["audio"] = *w.audio;
  if (w.geo) j["geo"] = *w.geo;
  if (w.light_lux) j["light_lux"] = *w.light_lux;
  if (w.ambient_temp_c) j["ambient_temp_c"] = *w.ambient_temp_c;
  if (w.physio) j["physio"] = *w.physio;
}

inline void from_json(const json& j, SensorWindow& w) {
  w.start_unix_ts = j.at("start_unix_ts").get<double>();
  w.end_unix_ts = j.at("end_unix_ts").get<double>();
  if (j.contains("imu"))
    for (const auto& [name, series] : j["imu"].items())
      w.imu[name] = series.get<TriAxisSeries>();
  if (j.contains("audio")) w.audio = j["audio"].get<AudioClip>();
  if (j.contains("geo")) w.geo = j["geo"].get<GeoFix>();
  if (j.contains("light_lux")) w.light_lux = j["light_lux"].get<double>();
  if (j.contains("ambient_temp_c")) w.ambient_temp_c = j["ambient_temp_c"].get<double>();
  if (j.contains("physio")) w.physio = j["physio"].get<PhysioSnapshot>();
}

// ---------------------------------------------------------------------------
// Record validation

namespace detail {

inline void check_numeric_arity(Modality m, const std::vector<double>& v, std::size_t line) {
  const auto need = [&](std::size_t n) {
    if (v.size() != n)
      throw SchemaError(std::string(modality_name(m)) + " payload must carry exactly " +
                            std::to_string(n) + " number(s), got " + std::to_string(v.size()),
                        line);
  };
  switch (m) {
    case Modality::imu_accel:
    case Modality::imu_gyro:
    case Modality::imu_mag:
      need(3);
      break;
    case Modality::light:
      need(1);
      if (v[0] < 0) throw SchemaError("light payload (lux) must be >= 0", line);
      break;
    case Modality::temperature:
      need(1);
      break;
    case Modality::barometer:
      need(1);
      if (v[0] <= 0) throw SchemaError("barometer payload (hPa) must be > 0", line);
      break;
    case Modality::gps:
      need(2);
      if (v[0] < -90.0 || v[0] > 90.0)
        throw SchemaError("latitude " + fmt_compact(v[0]) + " outside [-90, 90]", line);
      if (v[1] < -180.0 || v[1] > 180.0)
        throw SchemaError("longitude " + fmt_compact(v[1]) + " outside [-180, 180]", line);
      break;
    default:
      throw SchemaError(std::string(modality_name(m)) + " payload cannot be a bare number list",
                        line);
  }
}

inline void validate_audio_chunk(const AudioChunk& a, std::size_t line) {
  if (a.sample_rate_hz <= 0) throw SchemaError("audio sample_rate_hz must be > 0", line);
  if (a.samples.empty()) throw SchemaError("audio payload must carry at least one sample", line);
  for (double s : a.samples)
    if (s < -1.0 || s > 1.0)
      throw SchemaError("audio sample " + fmt_compact(s) + " outside [-1, 1]", line);
}

inline SensorRecord record_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError("record must be a JSON object", line);
  if (!j.contains("unix_ts")) throw SchemaError("missing field \"unix_ts\"", line);
  if (!j.contains("modality")) throw SchemaError("missing field \"modality\"", line);
  if (!j.contains("payload")) throw SchemaError("missing field \"payload\"", line);
  SensorRecord rec;
  if (!j["unix_ts"].is_number()) throw SchemaError("\"unix_ts\" must be a number", line);
  rec.unix_ts = j["unix_ts"].get<double>();
  if (rec.unix_ts < 0) throw SchemaError("unix_ts must be >= 0", line);
  const auto mod = modality_from_name(j["modality"].get<std::string>());
  if (!mod) throw SchemaError("unknown modality \"" + j["modality"].get<std::string>() + "\"", line);
  rec.modality = *mod;
  const json& p = j["payload"];
  if (p.is_array()) {
    std::vector<double> v;
    for (const auto& e : p) {
      if (!e.is_number()) throw SchemaError("payload array must contain only numbers", line);
      v.push_back(e.get<double>());
    }
    check_numeric_arity(rec.modality, v, line);
    rec.payload = std::move(v);
  } else if (p.is_object()) {
    switch (rec.modality) {
      case Modality::audio: {
        AudioChunk a;
        if (!p.contains("sample_rate_hz") || !p.contains("samples"))
          throw SchemaError("audio payload requires sample_rate_hz and samples", line);
        a.sample_rate_hz = p["sample_rate_hz"].get<double>();
        a.samples = p["samples"].get<std::vector<double>>();
        validate_audio_chunk(a, line);
        rec.payload = std::move(a);
        break;
      }
      case Modality::wifi: {
        WifiScan w;
        if (!p.contains("ssids")) throw SchemaError("wifi payload requires ssids", line);
        w.ssids = p["ssids"].get<std::vector<std::string>>();
        rec.payload = std::move(w);
        break;
      }
      case Modality::bluetooth: {
        BtScan b;
        if (!p.contains("macs")) throw SchemaError("bluetooth payload requires macs", line);
        b.macs = p["macs"].get<std::vector<std::string>>();
        for (const auto& m : b.macs)
          if (!valid_mac(m))
            throw SchemaError("\"" + m + "\" is not a MAC of 6 colon-separated hex octets", line);
        rec.payload = std::move(b);
        break;
      }
      case Modality::physio: {
        PhysioSnapshot ph = p.get<PhysioSnapshot>();
        try {
          ph.validate();
        } catch (const Error& e) {
          throw SchemaError(e.what(), line);
        }
        rec.payload = std::move(ph);
        break;
      }
      default:
        throw SchemaError(std::string(modality_name(rec.modality)) +
                              " payload must be a number array",
                          line);
    }
  } else {
    throw SchemaError("payload must be an array or object", line);
  }
  return rec;
}

inline json record_to_json(const SensorRecord& rec) {
  json j;
  j["unix_ts"] = rec.unix_ts;
  j["modality"] = modality_name(rec.modality);
  if (const auto* v = std::get_if<std::vector<double>>(&rec.payload)) {
    j["payload"] = *v;
  } else if (const auto* a = std::get_if<AudioChunk>(&rec.payload)) {
    j["payload"] = json{{"sample_rate_hz", a->sample_rate_hz}, {"samples", a->samples}};
  } else if (const auto* w = std::get_if<WifiScan>(&rec.payload)) {
    j["payload"] = json{{"ssids", w->ssids}};
  } else if (const auto* b = std::get_if<BtScan>(&rec.payload)) {
    j["payload"] = json{{"macs", b->macs}};
  } else if (const auto* ph = std::get_if<PhysioSnapshot>(&rec.payload)) {
    j["payload"] = *ph;
  }
  return j;
}

inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    if (c < 0x80) extra = 0;
    else if ((c >> 5) == 0x6) extra = 1;
    else if ((c >> 4) == 0xE) extra = 2;
    else if ((c >> 3) == 0x1E) extra = 3;
    else return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= s.size()) return false;
      if ((static_cast<unsigned char>(s[i + k]) >> 6) != 0x2) return false;
    }
    i += extra + 1;
  }
  return true;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

inline SensorRecord record_from_csv(const std::vector<std::string>& cells, std::size_t line) {
  if (cells.size() < 2) throw SchemaError("missing field \"modality\"", line);
  SensorRecord rec;
  try {
    rec.unix_ts = std::stod(cells[0]);
  } catch (...) {
    throw SchemaError("\"unix_ts\" must be a number", line);
  }
  if (rec.unix_ts < 0) throw SchemaError("unix_ts must be >= 0", line);
  const auto mod = modality_from_name(trim(cells[1]));
  if (!mod) throw SchemaError("unknown modality \"" + cells[1] + "\"", line);
  rec.modality = *mod;
  if (rec.modality == Modality::wifi || rec.modality == Modality::bluetooth)
    throw SchemaError(std::string(modality_name(rec.modality)) +
                          " records are not representable in CSV; use JSONL",
                      line);
  std::vector<std::string> raw(cells.begin() + 2, cells.end());
  // Trailing empty columns are padding from a wide header.
  while (!raw.empty() && trim(raw.back()).empty()) raw.pop_back();
  const auto num = [&](const std::string& s) {
    try {
      return std::stod(s);
    } catch (...) {
      throw SchemaError("payload cell \"" + s + "\" is not a number", line);
    }
  };
  if (rec.modality == Modality::physio) {
    // Fixed positional order: eda, hr, ibi, temp, spo2; blank cells mean absent.
    if (raw.size() > 5) throw SchemaError("physio CSV payload takes at most 5 columns", line);
    PhysioSnapshot ph;
    const auto set = [&](std::size_t i, std::optional<double>& field) {
      if (i < raw.size() && !trim(raw[i]).empty()) field = num(raw[i]);
    };
    set(0, ph.eda_microsiemens);
    set(1, ph.hr_bpm);
    set(2, ph.ibi_ms);
    set(3, ph.temp_celsius);
    set(4, ph.spo2_percent);
    try {
      ph.validate();
    } catch (const Error& e) {
      throw SchemaError(e.what(), line);
    }
    rec.payload = std::move(ph);
  } else if (rec.modality == Modality::audio) {
    // p0 = sample_rate_hz, p1.. = samples.
    if (raw.size() < 2) throw SchemaError("audio CSV payload requires rate plus samples", line);
    AudioChunk a;
    a.sample_rate_hz = num(raw[0]);
    for (std::size_t i = 1; i < raw.size(); ++i) a.samples.push_back(num(raw[i]));
    validate_audio_chunk(a, line);
    rec.payload = std::move(a);
  } else {
    std::vector<double> v;
    for (const auto& s : raw) v.push_back(num(s));
    check_numeric_arity(rec.modality, v, line);
    rec.payload = std::move(v);
  }
  return rec;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Operations

enum class StreamFormat { jsonl, csv };

// Strict parse: the first malformed line aborts with a SchemaError naming it.
inline std::vector<SensorRecord> parse_stream(std::string_view raw, StreamFormat format) {
  if (!detail::valid_utf8(raw)) throw DecodeError("input is not valid UTF-8");
  std::vector<SensorRecord> records;
  std::istringstream in{std::string(raw)};
  std::string line;
  std::size_t lineno = 0;
  bool saw_csv_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (format == StreamFormat::jsonl) {
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) throw SchemaError("invalid JSON", lineno);
      records.push_back(detail::record_from_json(j, lineno));
    } else {
      const auto cells = detail::split_csv_line(line);
      if (!saw_csv_header) {
        saw_csv_header = true;
        if (!cells.empty() && trim(cells[0]) == "unix_ts") continue;  // header row
      }
      records.push_back(detail::record_from_csv(cells, lineno));
    }
  }
  return records;
}

inline std::string serialize_records(const std::vector<SensorRecord>& records,
                                     StreamFormat format) {
  std::string out;
  if (format == StreamFormat::jsonl) {
    for (const auto& r : records) {
      out += detail::record_to_json(r).dump();
      out += '\n';
    }
    return out;
  }
  // CSV: width = widest payload in the batch.
  std::size_t width = 0;
  const auto payload_cells = [](const SensorRecord& r) {
    std::vector<std::string> cells;
    if (const auto* v = std::get_if<std::vector<double>>(&r.payload)) {
      for (double d : *v) cells.push_back(json(d).dump());
    } else if (const auto* a = std::get_if<AudioChunk>(&r.payload)) {
      cells.push_back(json(a->sample_rate_hz).dump());
      for (double d : a->samples) cells.push_back(json(d).dump());
    } else if (const auto* ph = std::get_if<PhysioSnapshot>(&r.payload)) {
      const auto cell = [](const std::optional<double>& f) {
        return f ? json(*f).dump() : std::string();
      };
      cells = {cell(ph->eda_microsiemens), cell(ph->hr_bpm), cell(ph->ibi_ms),
               cell(ph->temp_celsius), cell(ph->spo2_percent)};
    } else {
      throw Error(std::string(modality_name(r.modality)) +
                  " records are not representable in CSV; use JSONL");
    }
    return cells;
  };
  std::vector<std::vector<std::string>> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    rows.push_back(payload_cells(r));
    width = std::max(width, rows.back().size());
  }
  out = "unix_ts,modality";
  for (std::size_t i = 0; i < width; ++i) out += ",p" + std::to_string(i);
  out += '\n';
  for (std::size_t r = 0; r < records.size(); ++r) {
    out += json(records[r].unix_ts).dump();
    out += ',';
    out += modality_name(records[r].modality);
    for (std::size_t i = 0; i < width; ++i) {
      out += ',';
      if (i < rows[r].size()) out += rows[r][i];
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline const char* imu_key(Modality m) {
  switch (m) {
    case Modality::imu_accel: return "accel";
    case Modality::imu_gyro: return "gyro";
    case Modality::imu_mag: return "mag";
    default: return nullptr;
  }
}

}  // namespace detail

// Groups records into half-open windows [start, start + window_s) anchored at
// the earliest timestamp. Input is stably sorted if needed; exact duplicates
// of (unix_ts, modality) keep the last occurrence. Within a window the physio
// snapshot, GPS fix, barometer, light and temperature keep the latest reading;
// IMU samples form per-sensor series; audio chunks are concatenated in time
// order and must share one sample rate.
inline std::vector<SensorWindow> window_align(std::vector<SensorRecord> records, double window_s) {
  if (window_s <= 0) throw Error("window_s must be > 0");
  if (records.empty()) throw EmptyStream();
  std::stable_sort(records.begin(), records.end(),
                   [](const SensorRecord& a, const SensorRecord& b) { return a.unix_ts < b.unix_ts; });
  // Drop earlier duplicates of (ts, modality).
  {
    std::vector<SensorRecord> dedup;
    dedup.reserve(records.size());
    for (auto& r : records) {
      if (!dedup.empty() && dedup.back().unix_ts == r.unix_ts &&
          dedup.back().modality == r.modality) {
        dedup.back() = std::move(r);
      } else {
        dedup.push_back(std::move(r));
      }
    }
    records = std::move(dedup);
  }
  const double min_ts = records.front().unix_ts;
  const double max_ts = records.back().unix_ts;
  const std::size_t n_windows =
      static_cast<std::size_t>(std::floor((max_ts - min_ts) / window_s)) + 1;
  std::vector<SensorWindow> windows(n_windows);
  for (std::size_t i = 0; i < n_windows; ++i) {
    windows[i].start_unix_ts = min_ts + static_cast<double>(i) * window_s;
    windows[i].end_unix_ts = windows[i].start_unix_ts + window_s;
  }
  struct ImuAccum {
    std::vector<double> ts, x, y, z;
  };
  std::vector<std::map<std::string, ImuAccum>> imu_accum(n_windows);
  for (auto& rec : records) {
    std::size_t idx = static_cast<std::size_t>(std::floor((rec.unix_ts - min_ts) / window_s));
    if (idx >= n_windows) idx = n_windows - 1;
    SensorWindow& w = windows[idx];
    switch (rec.modality) {
      case Modality::imu_accel:
      case Modality::imu_gyro:
      case Modality::imu_mag: {
        const auto& v = std::get<std::vector<double>>(rec.payload);
        auto& acc = imu_accum[idx][detail::imu_key(rec.modality)];
        acc.ts.push_back(rec.unix_ts);
        acc.x.push_back(v[0]);
        acc.y.push_back(v[1]);
        acc.z.push_back(v[2]);
        break;
      }
      case Modality::audio: {
        const auto& a = std::get<AudioChunk>(rec.payload);
        if (!w.audio) {
          w.audio = AudioClip{a.sample_rate_hz, a.samples};
        } else {
          if (w.audio->sample_rate_hz != a.sample_rate_hz)
            throw SchemaError("audio chunks within one window must share a sample rate");
          w.audio->samples.insert(w.audio->samples.end(), a.samples.begin(), a.samples.end());
        }
        break;
      }
      case Modality::gps: {
        const auto& v = std::get<std::vector<double>>(rec.payload);
        if (!w.geo) w.geo = GeoFix{};
        w.geo->lat = v[0];
        w.geo->lon = v[1];
        break;
      }
      case Modality::barometer: {
        const auto& v = std::get<std::vector<double>>(rec.payload);
        if (!w.geo) w.geo = GeoFix{};
        w.geo->pressure_hpa = v[0];
        break;
      }
      case Modality::wifi: {
        const auto& scan = std::get<WifiScan>(rec.payload);
        if (!w.geo) w.geo = GeoFix{};
        for (const auto& s : scan.ssids)
          if (std::find(w.geo->wifi_ssids.begin(), w.geo->wifi_ssids.end(), s) ==
              w.geo->wifi_ssids.end())
            w.geo->wifi_ssids.push_back(s);
        break;
      }
      case Modality::bluetooth: {
        const auto& scan = std::get<BtScan>(rec.payload);
        if (!w.geo) w.geo = GeoFix{};
        for (const auto& m : scan.macs)
          if (std::find(w.geo->bt_macs.begin(), w.geo->bt_macs.end(), m) == w.geo->bt_macs.end())
            w.geo->bt_macs.push_back(m);
        break;
      }
      case Modality::light:
        w.light_lux = std::get<std::vector<double>>(rec.payload)[0];
        break;
      case Modality::temperature:
        w.ambient_temp_c = std::get<std::vector<double>>(rec.payload)[0];
        break;
      case Modality::physio:
        // Only the most recent snapshot survives the window.
        w.physio = std::get<PhysioSnapshot>(rec.payload);
        break;
    }
  }
  for (std::size_t i = 0; i < n_windows; ++i) {
    for (auto& [key, acc] : imu_accum[i]) {
      TriAxisSeries s;
      s.x = std::move(acc.x);
      s.y = std::move(acc.y);
      s.z = std::move(acc.z);
      const double span = acc.ts.back() - acc.ts.front();
      s.sample_rate_hz =
          (acc.ts.size() >= 2 && span > 0)
              ? static_cast<double>(acc.ts.size() - 1) / span
              : 1.0;
      windows[i].imu[key] = std::move(s);
    }
  }
  return windows;
}

}  // namespace dailylog::ingest
