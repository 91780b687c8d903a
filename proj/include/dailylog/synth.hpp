#pragma once
// Synthetic labeled activity-context dataset. Activities draw from hour-of-day
// priors (night hours 00..07 inclusive) restricted to per-class successor
// rules by renormalizing over the allowed set; a location change forces
// walking and resamples the scene from a different category. Signals are
// class-parameterized sine + noise patterns, or spliced from a user-supplied
// labeled corpus. Fully reproducible from the seed: randomness comes from
// mt19937_64 with hand-rolled uniform/normal transforms, never from
// platform-defined distributions.

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dailylog/common.hpp"
#include "dailylog/ingest.hpp"

namespace dailylog::synth {

using json = nlohmann::json;

class MissingBaseline : public Error {
 public:
  using Error::Error;
};

enum class ActivityClass { lying, sitting, standing, walking, stairs };

inline const std::array<ActivityClass, 5>& activity_classes() {
  static const std::array<ActivityClass, 5> all = {ActivityClass::lying, ActivityClass::sitting,
                                                   ActivityClass::standing, ActivityClass::walking,
                                                   ActivityClass::stairs};
  return all;
}

inline const char* class_name(ActivityClass c) {
  switch (c) {
    case ActivityClass::lying: return "lying";
    case ActivityClass::sitting: return "sitting";
    case ActivityClass::standing: return "standing";
    case ActivityClass::walking: return "walking";
    case ActivityClass::stairs: return "stairs";
  }
  return "?";
}

inline std::optional<ActivityClass> class_from_name(std::string_view name) {
  for (ActivityClass c : activity_classes())
    if (name == class_name(c)) return c;
  return std::nullopt;
}

// The 15 acoustic scene categories.
inline const std::array<const char*, 15>& scene_categories() {
  static const std::array<const char*, 15> scenes = {
      "beach",      "cafe/restaurant", "city center", "forest path", "metro station",
      "tram",       "park",            "residential area", "home",   "bus",
      "grocery store", "car",          "train",       "office",      "library"};
  return scenes;
}

// ---------------------------------------------------------------------------
// RNG: mt19937_64 with explicit transforms so identical seeds give identical
// bytes on every platform.

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::size_t pick_weighted(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw Error("weighted pick over nonpositive total");
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return weights.size() - 1;
  }

  std::size_t pick_index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Configuration

struct PhysioBaseline {
  double hr_bpm = 70.0;
  double eda_microsiemens = 0.3;
  double temp_celsius = 36.4;
};

struct SynthConfig {
  // Index order matches activity_classes(): lying, sitting, standing, walking, stairs.
  std::array<double, 5> night_prior = {0.80, 0.05, 0.05, 0.05, 0.05};
  std::array<double, 5> day_prior = {0.05, 0.50, 0.20, 0.15, 0.10};
  std::map<ActivityClass, std::vector<ActivityClass>> transition_map = {
      {ActivityClass::lying, {ActivityClass::sitting, ActivityClass::standing}},
      {ActivityClass::stairs, {ActivityClass::walking}},
      {ActivityClass::sitting, {ActivityClass::standing, ActivityClass::lying}},
  };
  double window_s = 120.0;
  std::uint64_t seed = 1;
  std::map<ActivityClass, PhysioBaseline> baselines = {
      {ActivityClass::lying, {60.0, 0.2, 36.2}},   {ActivityClass::sitting, {70.0, 0.3, 36.4}},
      {ActivityClass::standing, {75.0, 0.35, 36.5}}, {ActivityClass::walking, {95.0, 0.6, 36.8}},
      {ActivityClass::stairs, {110.0, 0.8, 37.0}},
  };
  // AR(1) heart-rate noise; the state is clipped to +-3 stationary sigmas so
  // composed signals stay physiologically banded.
  double ar_phi = 0.8;
  double ar_sigma_bpm = 1.5;
  double eda_alpha = 0.2;
  double temp_alpha = 0.1;

  double imu_rate_hz = 50.0;
  double audio_rate_hz = 8000.0;
  double audio_duration_s = 2.0;  // duty-cycled capture at the window start
  double location_change_prob = 0.03;
  bool include_signals = true;
  bool include_audio = true;
  std::int64_t day_start_unix_ts = 1735689600;  // 2025-01-01 00:00:00 UTC
  double base_lat = 43.7022;
  double base_lon = -72.2896;
  std::string splice_corpus_path;  // draw real windows from a labeled corpus

  void validate() const {
    const auto check_prior = [](const std::array<double, 5>& p, const char* field) {
      double sum = 0.0;
      for (double v : p) {
        if (v < 0) throw Error(std::string(field) + " has a negative weight");
        sum += v;
      }
      if (std::fabs(sum - 1.0) > 1e-12)
        throw Error(std::string(field) + " sums to " + fmt_compact(sum) + ", expected 1");
    };
    check_prior(night_prior, "night_prior");
    check_prior(day_prior, "day_prior");
    if (window_s <= 0) throw Error("window_s must be > 0");
    if (imu_rate_hz <= 0) throw Error("imu_rate_hz must be > 0");
    if (day_start_unix_ts < 0) throw Error("day_start_unix_ts must be >= 0");
    if (day_start_unix_ts % 86400 != 0)
      throw Error("day_start_unix_ts must fall on a civil midnight (multiple of 86400)");
  }
};

inline void to_json(json& j, const SynthConfig& c) {
  j = json::object();
  j["night_prior"] = c.night_prior;
  j["day_prior"] = c.day_prior;
  json tm = json::object();
  for (const auto& [from, tos] : c.transition_map) {
    std::vector<std::string> names;
    for (ActivityClass t : tos) names.emplace_back(class_name(t));
    tm[class_name(from)] = names;
  }
  j["transition_map"] = tm;
  j["window_s"] = c.window_s;
  j["seed"] = c.seed;
  json bl = json::object();
  for (const auto& [cls, b] : c.baselines)
    bl[class_name(cls)] = json{{"hr_bpm", b.hr_bpm},
                               {"eda_microsiemens", b.eda_microsiemens},
                               {"temp_celsius", b.temp_celsius}};
  j["baselines"] = bl;
  j["imu_rate_hz"] = c.imu_rate_hz;
  j["audio_rate_hz"] = c.audio_rate_hz;
  j["audio_duration_s"] = c.audio_duration_s;
  j["location_change_prob"] = c.location_change_prob;
  j["include_signals"] = c.include_signals;
  j["include_audio"] = c.include_audio;
  j["day_start_unix_ts"] = c.day_start_unix_ts;
  j["splice_corpus_path"] = c.splice_corpus_path;
}

inline void from_json(const json& j, SynthConfig& c) {
  if (j.contains("night_prior")) c.night_prior = j["night_prior"].get<std::array<double, 5>>();
  if (j.contains("day_prior")) c.day_prior = j["day_prior"].get<std::array<double, 5>>();
  if (j.contains("transition_map")) {
    c.transition_map.clear();
    for (const auto& [from, tos] : j["transition_map"].items()) {
      const auto f = class_from_name(from);
      if (!f) throw Error("transition_map keys unknown class \"" + from + "\"");
      std::vector<ActivityClass> succ;
      for (const auto& t : tos) {
        const auto s = class_from_name(t.get<std::string>());
        if (!s) throw Error("transition_map lists unknown class \"" + t.get<std::string>() + "\"");
        succ.push_back(*s);
      }
      c.transition_map[*f] = std::move(succ);
    }
  }
  if (j.contains("window_s")) c.window_s = j["window_s"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("baselines")) {
    for (const auto& [name, b] : j["baselines"].items()) {
      const auto cls = class_from_name(name);
      if (!cls) throw Error("baselines list unknown class \"" + name + "\"");
      PhysioBaseline pb;
      pb.hr_bpm = b.value("hr_bpm", pb.hr_bpm);
      pb.eda_microsiemens = b.value("eda_microsiemens", pb.eda_microsiemens);
      pb.temp_celsius = b.value("temp_celsius", pb.temp_celsius);
      c.baselines[*cls] = pb;
    }
  }
  c.imu_rate_hz = j.value("imu_rate_hz", c.imu_rate_hz);
  c.audio_rate_hz = j.value("audio_rate_hz", c.audio_rate_hz);
  c.audio_duration_s = j.value("audio_duration_s", c.audio_duration_s);
  c.location_change_prob = j.value("location_change_prob", c.location_change_prob);
  c.include_signals = j.value("include_signals", c.include_signals);
  c.include_audio = j.value("include_audio", c.include_audio);
  c.day_start_unix_ts = j.value("day_start_unix_ts", c.day_start_unix_ts);
  c.splice_corpus_path = j.value("splice_corpus_path", c.splice_corpus_path);
}

struct SynthSample {
  ingest::SensorWindow window;
  ActivityClass label = ActivityClass::sitting;
  std::string scene;
  int location_id = 0;
};

inline void to_json(json& j, const SynthSample& s) {
  j = json{{"label", class_name(s.label)},
           {"scene", s.scene},
           {"location_id", s.location_id},
           {"window", s.window}};
}

inline void from_json(const json& j, SynthSample& s) {
  const auto cls = class_from_name(j.at("label").get<std::string>());
  if (!cls) throw Error("unknown synth label \"" + j.at("label").get<std::string>() + "\"");
  s.label = *cls;
  s.scene = j.at("scene").get<std::string>();
  s.location_id = j.at("location_id").get<int>();
  s.window = j.at("window").get<ingest::SensorWindow>();
}

// ---------------------------------------------------------------------------
// Activity sampling

inline bool is_night_hour(int hour) { return hour >= 0 && hour <= 7; }

// A detected location change forces walking; otherwise draw from the hour's
// prior restricted to transition_map[prev] (renormalized), or the full prior
// when prev carries no constraint.
inline ActivityClass sample_activity(std::optional<ActivityClass> prev, int civil_hour,
                                     bool location_changed, const SynthConfig& cfg, Rng& rng) {
  if (civil_hour < 0 || civil_hour > 23) throw Error("civil_hour must lie in [0, 23]");
  if (location_changed) return ActivityClass::walking;
  const std::array<double, 5>& prior =
      is_night_hour(civil_hour) ? cfg.night_prior : cfg.day_prior;
  std::array<double, 5> weights = prior;
  if (prev) {
    const auto it = cfg.transition_map.find(*prev);
    if (it != cfg.transition_map.end()) {
      std::array<bool, 5> allowed{};
      for (ActivityClass a : it->second)
        allowed[static_cast<std::size_t>(a)] = true;
      for (std::size_t i = 0; i < 5; ++i)
        if (!allowed[i]) weights[i] = 0.0;
      double total = 0.0;
      for (double w : weights) total += w;
      if (total <= 0.0) {
        // Prior gives the allowed set no mass: fall back to uniform over it.
        for (std::size_t i = 0; i < 5; ++i) weights[i] = allowed[i] ? 1.0 : 0.0;
      }
    }
  }
  return activity_classes()[rng.pick_weighted(weights)];
}

// ---------------------------------------------------------------------------
// Signal synthesis

namespace detail {

struct MotionParams {
  double gait_hz;
  double amp_z;
  double amp_x;
  double noise;
  double gyro_amp;
  bool gravity_on_x;  // lying flips the gravity axis
};

inline MotionParams motion_params(ActivityClass c) {
  switch (c) {
    case ActivityClass::lying: return {0.0, 0.0, 0.0, 0.03, 0.01, true};
    case ActivityClass::sitting: return {0.0, 0.0, 0.0, 0.04, 0.02, false};
    case ActivityClass::standing: return {0.4, 0.10, 0.15, 0.09, 0.05, false};
    case ActivityClass::walking: return {2.0, 2.50, 1.00, 0.30, 0.80, false};
    case ActivityClass::stairs: return {1.4, 3.20, 1.40, 0.40, 1.00, false};
  }
  return {0.0, 0.0, 0.0, 0.05, 0.02, false};
}

struct SceneParams {
  double rms;       // target amplitude scale
  double tone_hz;   // characteristic tonal component
  double tone_mix;  // 0 = pure noise, 1 = pure tone
};

inline SceneParams scene_params(std::string_view scene) {
  static const std::map<std::string, SceneParams, std::less<>> table = {
      {"beach", {0.050, 90.0, 0.30}},        {"cafe/restaurant", {0.080, 450.0, 0.25}},
      {"city center", {0.200, 220.0, 0.20}}, {"forest path", {0.004, 900.0, 0.30}},
      {"metro station", {0.250, 130.0, 0.35}}, {"tram", {0.150, 160.0, 0.45}},
      {"park", {0.012, 1200.0, 0.25}},       {"residential area", {0.020, 180.0, 0.20}},
      {"home", {0.008, 120.0, 0.30}},        {"bus", {0.120, 95.0, 0.50}},
      {"grocery store", {0.060, 350.0, 0.25}}, {"car", {0.090, 70.0, 0.55}},
      {"train", {0.130, 85.0, 0.50}},        {"office", {0.015, 240.0, 0.25}},
      {"library", {0.002, 500.0, 0.20}},
  };
  const auto it = table.find(scene);
  if (it == table.end()) return {0.02, 200.0, 0.3};
  return it->second;
}

inline ingest::TriAxisSeries gen_imu(ActivityClass label, double rate_hz, double window_s,
                                     double gain, Rng& rng) {
  const MotionParams p = motion_params(label);
  const std::size_t n = static_cast<std::size_t>(window_s * rate_hz);
  ingest::TriAxisSeries s;
  s.sample_rate_hz = rate_hz;
  s.x.resize(n);
  s.y.resize(n);
  s.z.resize(n);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double g = 9.81;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    const double osc = p.gait_hz > 0 ? std::sin(2.0 * std::numbers::pi * p.gait_hz * t + phase)
                                     : 0.0;
    const double osc2 = p.gait_hz > 0
                            ? 0.35 * std::sin(4.0 * std::numbers::pi * p.gait_hz * t + phase)
                            : 0.0;
    const double gx = p.gravity_on_x ? g : 0.0;
    const double gz = p.gravity_on_x ? 0.0 : g;
    s.x[i] = gain * (gx + p.amp_x * osc + p.noise * rng.normal());
    s.y[i] = gain * (0.3 * p.amp_x * osc2 + p.noise * rng.normal());
    s.z[i] = gain * (gz + p.amp_z * osc + p.amp_z * osc2 * 0.5 + p.noise * rng.normal());
  }
  return s;
}

inline ingest::AudioClip gen_audio(std::string_view scene, double rate_hz, double duration_s,
                                   Rng& rng) {
  const SceneParams p = scene_params(scene);
  const std::size_t n = static_cast<std::size_t>(duration_s * rate_hz);
  ingest::AudioClip clip;
  clip.sample_rate_hz = rate_hz;
  clip.samples.resize(n);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate_hz;
    const double tone = std::sin(2.0 * std::numbers::pi * p.tone_hz * t + phase);
    const double noise = rng.normal() * 0.33;
    double v = p.rms * (p.tone_mix * tone + (1.0 - p.tone_mix) * noise) * 2.0;
    if (v > 1.0) v = 1.0;
    if (v < -1.0) v = -1.0;
    clip.samples[i] = v;
  }
  return clip;
}

// Hour-of-day illumination / temperature curves with scene adjustments.
inline double lux_for(int hour, std::string_view scene, Rng& rng) {
  const bool outdoor = scene == "beach" || scene == "city center" || scene == "forest path" ||
                       scene == "park" || scene == "residential area";
  double base;
  if (hour < 6 || hour >= 22)
    base = 2.0;
  else if (hour < 8 || hour >= 19)
    base = 30.0;
  else
    base = outdoor ? 1800.0 : 250.0;
  return std::max(0.0, base * (1.0 + 0.1 * rng.normal()));
}

inline double ambient_temp_for(int hour, std::string_view scene, Rng& rng) {
  const bool outdoor = scene == "beach" || scene == "city center" || scene == "forest path" ||
                       scene == "park" || scene == "residential area";
  const double diurnal = 3.0 * std::sin((hour - 6) * std::numbers::pi / 12.0);
  const double base = outdoor ? 16.0 + diurnal : 22.0;
  return base + 0.3 * rng.normal();
}

struct SpliceCorpus {
  std::map<ActivityClass, std::vector<ingest::SensorWindow>> by_label;

  static SpliceCorpus load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open splice corpus: " + path);
    SpliceCorpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded())
        throw Error("splice corpus line " + std::to_string(lineno) + " is not valid JSON");
      SynthSample s = j.get<SynthSample>();
      corpus.by_label[s.label].push_back(std::move(s.window));
    }
    if (corpus.by_label.empty()) throw Error("splice corpus is empty");
    return corpus;
  }
};

}  // namespace detail

// One labeled window of synthesized signals (no physio, no geo). Useful for
// training sets and feature-quality checks.
inline ingest::SensorWindow make_window(ActivityClass label, const SynthConfig& cfg, Rng& rng,
                                        double start_unix_ts = 0.0) {
  ingest::SensorWindow w;
  w.start_unix_ts = start_unix_ts;
  w.end_unix_ts = start_unix_ts + cfg.window_s;
  w.imu["accel"] = detail::gen_imu(label, cfg.imu_rate_hz, cfg.window_s, 1.0, rng);
  w.imu["gyro"] = detail::gen_imu(label, cfg.imu_rate_hz, cfg.window_s, 0.1, rng);
  if (cfg.include_audio)
    w.audio = detail::gen_audio("home", cfg.audio_rate_hz, cfg.audio_duration_s, rng);
  return w;
}

// ---------------------------------------------------------------------------
// Day synthesis

inline std::vector<SynthSample> synthesize_day(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::optional<detail::SpliceCorpus> corpus;
  if (!cfg.splice_corpus_path.empty())
    corpus = detail::SpliceCorpus::load(cfg.splice_corpus_path);
  const std::size_t count = static_cast<std::size_t>(86400.0 / cfg.window_s);
  std::vector<SynthSample> out;
  out.reserve(count);
  std::optional<ActivityClass> prev;
  int location_id = 0;
  std::string scene{scene_categories()[rng.pick_index(scene_categories().size())]};
  for (std::size_t i = 0; i < count; ++i) {
    const double start = static_cast<double>(cfg.day_start_unix_ts) +
                         static_cast<double>(i) * cfg.window_s;
    const int hour = static_cast<int>(
        (static_cast<std::int64_t>(start) % 86400 + 86400) % 86400 / 3600);
    const bool moved = i > 0 && rng.uniform() < cfg.location_change_prob;
    if (moved) {
      ++location_id;
      // Resample the scene from a different category.
      std::string next;
      do {
        next = scene_categories()[rng.pick_index(scene_categories().size())];
      } while (next == scene);
      scene = next;
    }
    const ActivityClass label = sample_activity(prev, hour, moved, cfg, rng);
    prev = label;
    SynthSample sample;
    sample.label = label;
    sample.scene = scene;
    sample.location_id = location_id;
    sample.window.start_unix_ts = start;
    sample.window.end_unix_ts = start + cfg.window_s;
    if (cfg.include_signals) {
      if (corpus) {
        const auto it = corpus->by_label.find(label);
        if (it == corpus->by_label.end() || it->second.empty())
          throw Error(std::string("splice corpus has no windows labeled ") + class_name(label));
        const ingest::SensorWindow& src = it->second[rng.pick_index(it->second.size())];
        sample.window.imu = src.imu;
        sample.window.audio = src.audio;
      } else {
        const double gain = 1.0 + 0.02 * rng.normal();
        sample.window.imu["accel"] = detail::gen_imu(label, cfg.imu_rate_hz, cfg.window_s,
                                                     gain, rng);
        sample.window.imu["gyro"] =
            detail::gen_imu(label, cfg.imu_rate_hz, cfg.window_s, gain * 0.1, rng);
        ingest::TriAxisSeries mag;
        const std::size_t n = static_cast<std::size_t>(cfg.window_s * cfg.imu_rate_hz);
        mag.sample_rate_hz = cfg.imu_rate_hz;
        mag.x.resize(n);
        mag.y.resize(n);
        mag.z.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
          mag.x[k] = 30.0 + 0.4 * rng.normal();
          mag.y[k] = 5.0 + 0.4 * rng.normal();
          mag.z[k] = -40.0 + 0.4 * rng.normal();
        }
        sample.window.imu["mag"] = std::move(mag);
        if (cfg.include_audio)
          sample.window.audio =
              detail::gen_audio(scene, cfg.audio_rate_hz, cfg.audio_duration_s, rng);
      }
      ingest::GeoFix geo;
      geo.lat = cfg.base_lat + 0.0012 * location_id;
      geo.lon = cfg.base_lon + 0.0009 * location_id;
      geo.pressure_hpa = 1013.25 - 2.0 * (location_id % 5);
      geo.wifi_ssids = {"ap-" + std::to_string(location_id)};
      sample.window.geo = geo;
      sample.window.light_lux = detail::lux_for(hour, scene, rng);
      sample.window.ambient_temp_c = detail::ambient_temp_for(hour, scene, rng);
    }
    out.push_back(std::move(sample));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Physiology

// hr = baseline(activity) + clipped AR(1) noise; ibi = 60000/hr exactly;
// eda and skin temperature drift toward activity set points by exponential
// smoothing.
inline std::vector<SynthSample>& attach_physio(std::vector<SynthSample>& seq,
                                               const SynthConfig& cfg) {
  for (const auto& s : seq)
    if (!cfg.baselines.count(s.label))
      throw MissingBaseline(std::string("no physio baseline for class ") + class_name(s.label));
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);  // separate stream from the signal draws
  const double stationary_sigma =
      cfg.ar_sigma_bpm / std::sqrt(std::max(1e-12, 1.0 - cfg.ar_phi * cfg.ar_phi));
  const double clip = 3.0 * stationary_sigma;
  double noise = 0.0;
  std::optional<double> eda, temp;
  for (auto& s : seq) {
    const PhysioBaseline& base = cfg.baselines.at(s.label);
    noise = cfg.ar_phi * noise + cfg.ar_sigma_bpm * rng.normal();
    if (noise > clip) noise = clip;
    if (noise < -clip) noise = -clip;
    ingest::PhysioSnapshot p;
    p.hr_bpm = base.hr_bpm + noise;
    p.ibi_ms = 60000.0 / *p.hr_bpm;
    eda = eda ? *eda + cfg.eda_alpha * (base.eda_microsiemens - *eda) : base.eda_microsiemens;
    temp = temp ? *temp + cfg.temp_alpha * (base.temp_celsius - *temp) : base.temp_celsius;
    p.eda_microsiemens = *eda;
    p.temp_celsius = *temp;
    s.window.physio = p;
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Flattening to a raw record stream (feeds the ingest pipeline)

inline std::vector<ingest::SensorRecord> to_records(std::span<const SynthSample> samples) {
  std::vector<ingest::SensorRecord> records;
  for (const auto& s : samples) {
    const double t0 = s.window.start_unix_ts;
    for (const auto& [sensor, series] : s.window.imu) {
      ingest::Modality m = ingest::Modality::imu_accel;
      if (sensor == "gyro") m = ingest::Modality::imu_gyro;
      else if (sensor == "mag") m = ingest::Modality::imu_mag;
      for (std::size_t i = 0; i < series.size(); ++i) {
        ingest::SensorRecord r;
        r.unix_ts = t0 + static_cast<double>(i) / series.sample_rate_hz;
        r.modality = m;
        r.payload = std::vector<double>{series.x[i], series.y[i], series.z[i]};
        records.push_back(std::move(r));
      }
    }
    if (s.window.audio) {
      ingest::SensorRecord r;
      r.unix_ts = t0;
      r.modality = ingest::Modality::audio;
      r.payload = ingest::AudioChunk{s.window.audio->sample_rate_hz, s.window.audio->samples};
      records.push_back(std::move(r));
    }
    if (s.window.geo) {
      ingest::SensorRecord gps;
      gps.unix_ts = t0;
      gps.modality = ingest::Modality::gps;
      gps.payload = std::vector<double>{s.window.geo->lat, s.window.geo->lon};
      records.push_back(std::move(gps));
      if (s.window.geo->pressure_hpa) {
        ingest::SensorRecord baro;
        baro.unix_ts = t0;
        baro.modality = ingest::Modality::barometer;
        baro.payload = std::vector<double>{*s.window.geo->pressure_hpa};
        records.push_back(std::move(baro));
      }
      if (!s.window.geo->wifi_ssids.empty()) {
        ingest::SensorRecord wifi;
        wifi.unix_ts = t0;
        wifi.modality = ingest::Modality::wifi;
        wifi.payload = ingest::WifiScan{s.window.geo->wifi_ssids};
        records.push_back(std::move(wifi));
      }
    }
    if (s.window.light_lux) {
      ingest::SensorRecord r;
      r.unix_ts = t0;
      r.modality = ingest::Modality::light;
      r.payload = std::vector<double>{*s.window.light_lux};
      records.push_back(std::move(r));
    }
    if (s.window.ambient_temp_c) {
      ingest::SensorRecord r;
      r.unix_ts = t0;
      r.modality = ingest::Modality::temperature;
      r.payload = std::vector<double>{*s.window.ambient_temp_c};
      records.push_back(std::move(r));
    }
    if (s.window.physio) {
      ingest::SensorRecord r;
      r.unix_ts = t0;
      r.modality = ingest::Modality::physio;
      r.payload = *s.window.physio;
      records.push_back(std::move(r));
    }
  }
  return records;
}

}  // namespace dailylog::synth
