#pragma once
// One timestamped, context-rich activity log record. Serialized as a single
// JSON object per line in the log store (keys in lexicographic order, the
// nlohmann default, so round trips are byte-exact).

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dailylog/activity.hpp"
#include "dailylog/annotate.hpp"
#include "dailylog/geoloc.hpp"
#include "dailylog/ingest.hpp"

namespace dailylog::logbook {

using json = nlohmann::json;

struct ActivityLogEntry {
  ingest::CivilTimestamp civil_time;
  geoloc::StructuredAddress address;
  Activity activity = Activity::unknown;
  std::string scene;
  annotate::IlluminationLevel light;
  annotate::SoundLevel sound = annotate::SoundLevel::normal;
  annotate::TemperatureLevel temperature = annotate::TemperatureLevel::comfortable;
  std::optional<double> altitude_m;
  std::optional<ingest::PhysioSnapshot> physio;
  std::string template_version;
  std::string backend_model;

  std::int64_t unix_ts() const { return ingest::to_unix(civil_time); }
};

inline void to_json(json& j, const ActivityLogEntry& e) {
  j = json::object();
  j["civil_time"] = e.civil_time;
  j["address"] = e.address;
  j["activity"] = activity_name(e.activity);
  j["scene"] = e.scene;
  j["light"] = json{{"level", e.light.level}, {"label", e.light.label}};
  j["sound"] = annotate::sound_label(e.sound);
  j["temperature"] = annotate::temperature_label(e.temperature);
  if (e.altitude_m) j["altitude_m"] = *e.altitude_m;
  if (e.physio) j["physio"] = *e.physio;
  j["template_version"] = e.template_version;
  j["backend_model"] = e.backend_model;
}

inline void from_json(const json& j, ActivityLogEntry& e) {
  e.civil_time = j.at("civil_time").get<ingest::CivilTimestamp>();
  e.address = j.at("address").get<geoloc::StructuredAddress>();
  const auto act = activity_from_name(j.at("activity").get<std::string>());
  if (!act) throw Error("unknown activity label \"" + j.at("activity").get<std::string>() + "\"");
  e.activity = *act;
  e.scene = j.at("scene").get<std::string>();
  e.light.level = j.at("light").at("level").get<int>();
  e.light.label = j.at("light").at("label").get<std::string>();
  const auto snd = annotate::sound_from_label(j.at("sound").get<std::string>());
  if (!snd) throw Error("unknown sound label \"" + j.at("sound").get<std::string>() + "\"");
  e.sound = *snd;
  const auto tmp = annotate::temperature_from_label(j.at("temperature").get<std::string>());
  if (!tmp) throw Error("unknown temperature label");
  e.temperature = *tmp;
  if (j.contains("altitude_m")) e.altitude_m = j["altitude_m"].get<double>();
  if (j.contains("physio")) e.physio = j["physio"].get<ingest::PhysioSnapshot>();
  e.template_version = j.value("template_version", "");
  e.backend_model = j.value("backend_model", "");
}

}  // namespace dailylog::logbook
