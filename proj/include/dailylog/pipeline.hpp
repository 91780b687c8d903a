#pragma once
// End-to-end glue: raw records -> windows -> annotations + features ->
// context prompt -> backend -> parsed inference -> log entries -> summary.
//
// Entry policy: a window must carry IMU data (never carried forward); ambient
// light, audio level and temperature carry forward from earlier windows, and
// a window is skipped with a warning while any of them has never been seen.
// Backend failures degrade the affected entries to activity = unknown and the
// run still succeeds.

#include <future>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dailylog/annotate.hpp"
#include "dailylog/audio_features.hpp"
#include "dailylog/common.hpp"
#include "dailylog/geoloc.hpp"
#include "dailylog/geoloc_http.hpp"
#include "dailylog/imu_features.hpp"
#include "dailylog/inference.hpp"
#include "dailylog/ingest.hpp"
#include "dailylog/logbook.hpp"
#include "dailylog/promptgen.hpp"

namespace dailylog::pipeline {

struct PipelineConfig {
  double window_s = 120.0;
  int utc_offset_minutes = 0;
  std::string template_version = "context.v1";
  infer::BackendConfig backend;
  std::string gazetteer_path;
  double gazetteer_radius_m = 250.0;
  std::string geocode_url;
  geoloc::BeaconMap beacons;
  audio::MfccConfig mfcc;
  imu::ImuExtractOptions imu_options;
  logbook::AnomalyThresholds thresholds;
  double summary_window_h = 2.0;
  int summary_max_entries = 120;
  int workers = 1;
};

struct PipelineResult {
  std::size_t entries_written = 0;
  std::size_t windows_skipped = 0;
  std::size_t unknown_activities = 0;
  std::vector<std::string> warnings;
};

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig cfg)
      : cfg_(std::move(cfg)), backend_(std::make_unique<infer::Backend>(cfg_.backend)) {
    init_geocoder();
  }

  // Mock backend over an in-memory centroid model.
  Pipeline(PipelineConfig cfg, infer::CentroidModel model)
      : cfg_(std::move(cfg)),
        backend_(std::make_unique<infer::Backend>(cfg_.backend, std::move(model))) {
    init_geocoder();
  }

  const PipelineConfig& config() const { return cfg_; }
  infer::Backend& backend() { return *backend_; }

  PipelineResult run(std::vector<ingest::SensorRecord> records, logbook::LogStore& store) {
    const auto windows = ingest::window_align(std::move(records), cfg_.window_s);
    return run_windows(windows, store);
  }

  PipelineResult run_windows(const std::vector<ingest::SensorWindow>& windows,
                             logbook::LogStore& store) {
    PipelineResult result;
    struct Features {
      std::optional<imu::ImuFeatureVector> imu;
      std::optional<audio::AudioFeatureVector> audio;
      std::optional<double> dbfs;
      std::string error;
    };
    std::vector<Features> features(windows.size());
    const auto compute = [&](std::size_t i) {
      Features f;
      try {
        if (!windows[i].imu.empty()) f.imu = imu::extract_imu_features(windows[i], cfg_.imu_options);
        if (windows[i].audio) {
          f.dbfs = annotate::rms_dbfs(*windows[i].audio);
          f.audio = audio::extract_audio_features(*windows[i].audio, cfg_.mfcc);
        }
      } catch (const Error& e) {
        f.error = e.what();
      }
      return f;
    };
    if (cfg_.workers > 1) {
      std::vector<std::future<void>> jobs;
      std::atomic<std::size_t> next{0};
      const int n_workers = std::min<int>(cfg_.workers, static_cast<int>(windows.size()));
      for (int w = 0; w < n_workers; ++w)
        jobs.push_back(std::async(std::launch::async, [&]() {
          for (std::size_t i = next.fetch_add(1); i < windows.size(); i = next.fetch_add(1))
            features[i] = compute(i);
        }));
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t i = 0; i < windows.size(); ++i) features[i] = compute(i);
    }

    for (std::size_t i = 0; i < windows.size(); ++i) {
      const ingest::SensorWindow& w = windows[i];
      const Features& f = features[i];
      const std::string at = "window " + std::to_string(i) + " [" +
                             fmt_compact(w.start_unix_ts) + ", " + fmt_compact(w.end_unix_ts) +
                             ")";
      if (!f.error.empty()) {
        ++result.windows_skipped;
        result.warnings.push_back(at + ": feature extraction failed: " + f.error);
        continue;
      }
      if (!f.imu) {
        ++result.windows_skipped;
        result.warnings.push_back(at + ": no IMU data, window skipped");
        continue;
      }
      if (w.light_lux) carry_.lux = *w.light_lux;
      if (w.ambient_temp_c) carry_.temp_c = *w.ambient_temp_c;
      if (f.dbfs) carry_.dbfs = *f.dbfs;
      if (!carry_.lux || !carry_.temp_c || !carry_.dbfs) {
        ++result.windows_skipped;
        result.warnings.push_back(at + ": ambient context never observed yet, window skipped");
        continue;
      }

      prompt::ContextBundle bundle;
      bundle.window_s = cfg_.window_s;
      bundle.civil_time = ingest::to_civil_time(w.start_unix_ts, cfg_.utc_offset_minutes);
      bundle.imu = *f.imu;
      bundle.audio = f.audio;
      bundle.light = annotate::annotate_light(*carry_.lux);
      bundle.sound = annotate::annotate_sound(std::min(0.0, *carry_.dbfs));
      bundle.temperature = annotate::annotate_temperature(*carry_.temp_c);
      if (w.geo && w.geo->pressure_hpa)
        bundle.altitude_m = annotate::estimate_altitude(*w.geo->pressure_hpa);
      bundle.physio = w.physio;
      if (w.geo) {
        try {
          geoloc::StructuredAddress addr =
              geocoder_ ? geocoder_->resolve(*w.geo) : carry_.address;
          addr = geoloc::refine_with_beacons(std::move(addr), *w.geo, cfg_.beacons);
          carry_.address = addr;
        } catch (const Error& e) {
          result.warnings.push_back(at + ": geocoding failed: " + e.what());
        }
      }
      bundle.address = carry_.address;

      const prompt::Prompt p = prompt::build_context_prompt(bundle, cfg_.template_version);
      infer::ActivityInference inference;
      try {
        inference = infer::parse_context_response(backend_->complete(p));
      } catch (const Error& e) {
        inference = {};  // unknown / parse_ok = false
        result.warnings.push_back(at + ": backend failed: " + e.what());
      }
      if (inference.activity == Activity::unknown) ++result.unknown_activities;

      logbook::ActivityLogEntry entry;
      entry.civil_time = bundle.civil_time;
      entry.address = bundle.address;
      entry.activity = inference.activity;
      entry.scene = inference.scene.empty() ? "unspecified" : inference.scene;
      entry.light = bundle.light;
      entry.sound = bundle.sound;
      entry.temperature = bundle.temperature;
      entry.altitude_m = bundle.altitude_m;
      entry.physio = bundle.physio;
      entry.template_version = cfg_.template_version;
      entry.backend_model = cfg_.backend.model_name;
      store.append(entry);
      ++result.entries_written;
    }
    return result;
  }

  logbook::SummaryReport summarize_store(const logbook::LogStore& store) {
    logbook::SummarizeOptions opts;
    opts.max_entries = cfg_.summary_max_entries;
    opts.thresholds = cfg_.thresholds;
    return logbook::summarize(store, cfg_.summary_window_h, *backend_, opts);
  }

 private:
  void init_geocoder() {
    std::shared_ptr<geoloc::GeocodeProvider> provider;
    std::shared_ptr<geoloc::GeocodeProvider> fallback;
    if (!cfg_.geocode_url.empty())
      provider = std::make_shared<geoloc::HttpGeocodeProvider>(cfg_.geocode_url);
    if (!cfg_.gazetteer_path.empty()) {
      std::ifstream in(cfg_.gazetteer_path);
      if (!in) throw Error("cannot open gazetteer: " + cfg_.gazetteer_path);
      std::stringstream buf;
      buf << in.rdbuf();
      auto gaz = std::make_shared<geoloc::GazetteerProvider>(
          geoloc::Gazetteer::from_csv(buf.str()), cfg_.gazetteer_radius_m);
      if (provider)
        fallback = gaz;
      else
        provider = gaz;
    }
    if (provider) geocoder_ = std::make_unique<geoloc::ReverseGeocoder>(provider, fallback);
  }

  struct Carry {
    std::optional<double> lux;
    std::optional<double> temp_c;
    std::optional<double> dbfs;
    geoloc::StructuredAddress address;
  };

  PipelineConfig cfg_;
  std::unique_ptr<infer::Backend> backend_;
  std::unique_ptr<geoloc::ReverseGeocoder> geocoder_;
  Carry carry_;
};

}  // namespace dailylog::pipeline
