#pragma once
// Durable JSONL log store, trailing-window entry selection with endpoint and
// anomaly retention, deterministic anomaly detection, and report assembly.
// The deterministic report fields (distribution, trajectory, anomalies) never
// depend on the generation backend; a failing backend only leaves the
// narrative empty.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dailylog/common.hpp"
#include "dailylog/inference.hpp"
#include "dailylog/log_entry.hpp"
#include "dailylog/promptgen.hpp"

namespace dailylog::logbook {

class OutOfOrder : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyWindow : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Store

class LogStore {
 public:
  static LogStore open(const std::string& path) {
    LogStore store;
    store.path_ = path;
    std::ifstream in(path);
    if (in) {
      std::string line;
      std::size_t lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
          throw IoError("log store " + path + " line " + std::to_string(lineno) +
                        " is not valid JSON");
        store.entries_.push_back(j.get<ActivityLogEntry>());
      }
    }
    store.out_.open(path, std::ios::app);
    if (!store.out_) throw IoError("cannot open log store for append: " + path);
    return store;
  }

  // Durable append: one JSON object per line, flushed before returning.
  void append(const ActivityLogEntry& e) {
    if (!entries_.empty() && e.unix_ts() <= entries_.back().unix_ts())
      throw OutOfOrder("entry at " + ingest::civil_display(e.civil_time) +
                       " is not later than the last stored entry");
    out_ << json(e).dump() << '\n';
    out_.flush();
    if (!out_) throw IoError("failed to append to log store: " + path_);
    entries_.push_back(e);
  }

  const std::vector<ActivityLogEntry>& entries() const { return entries_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::vector<ActivityLogEntry> entries_;
  std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Anomalies

struct AnomalyThresholds {
  double sedentary_h = 2.5;      // contiguous sitting/lying beyond this
  double env_persist_h = 1.0;    // dark / heat / noise persistence
  double hr_high_bpm = 100.0;    // while sitting or lying
  double spo2_low_percent = 92.0;
  double fever_c = 37.5;
};

struct Anomaly {
  enum class Family { environmental, behavioral, health };

  Family family = Family::behavioral;
  std::string code;  // sedentary, dark, heat, noise, hr_high, spo2_low, fever
  ingest::CivilTimestamp start;
  ingest::CivilTimestamp end;
  std::string detail;
};

inline const char* family_name(Anomaly::Family f) {
  switch (f) {
    case Anomaly::Family::environmental: return "environmental";
    case Anomaly::Family::behavioral: return "behavioral";
    case Anomaly::Family::health: return "health";
  }
  return "?";
}

inline void to_json(json& j, const Anomaly& a) {
  j = json{{"family", family_name(a.family)},
           {"code", a.code},
           {"span", json{{"start", a.start}, {"end", a.end}}},
           {"detail", a.detail}};
}

// True when the entry alone trips a health rule (used for retention during
// downsampling as well as reporting).
inline bool health_flagged(const ActivityLogEntry& e, const AnomalyThresholds& th = {}) {
  if (!e.physio) return false;
  const bool resting = e.activity == Activity::sitting || e.activity == Activity::lying;
  if (e.physio->hr_bpm && *e.physio->hr_bpm > th.hr_high_bpm && resting) return true;
  if (e.physio->spo2_percent && *e.physio->spo2_percent < th.spo2_low_percent) return true;
  if (e.physio->temp_celsius && *e.physio->temp_celsius > th.fever_c) return true;
  return false;
}

namespace detail {

template <typename Pred>
inline void scan_runs(std::span<const ActivityLogEntry> entries, Pred pred, double min_hours,
                      Anomaly::Family family, const std::string& code, const char* what,
                      std::vector<Anomaly>& out) {
  std::size_t i = 0;
  while (i < entries.size()) {
    if (!pred(entries[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < entries.size() && pred(entries[j + 1])) ++j;
    const double hours =
        static_cast<double>(entries[j].unix_ts() - entries[i].unix_ts()) / 3600.0;
    if (hours > min_hours) {
      Anomaly a;
      a.family = family;
      a.code = code;
      a.start = entries[i].civil_time;
      a.end = entries[j].civil_time;
      a.detail = std::string(what) + " for " + fmt1(hours) + " h";
      out.push_back(std::move(a));
    }
    i = j + 1;
  }
}

}  // namespace detail

// Behavioral: a contiguous sitting/lying run longer than 2.5 h.
// Environmental: extreme darkness (level 1), Hot, or Very Noisy persisting
// beyond 1 h. Health: per-entry heart-rate / SpO2 / body-temperature rules.
inline std::vector<Anomaly> detect_anomalies(std::span<const ActivityLogEntry> entries,
                                             const AnomalyThresholds& th = {}) {
  std::vector<Anomaly> out;
  detail::scan_runs(
      entries,
      [](const ActivityLogEntry& e) {
        return e.activity == Activity::sitting || e.activity == Activity::lying;
      },
      th.sedentary_h, Anomaly::Family::behavioral, "sedentary", "sedentary", out);
  detail::scan_runs(
      entries, [](const ActivityLogEntry& e) { return e.light.level == 1; }, th.env_persist_h,
      Anomaly::Family::environmental, "dark", "extreme darkness", out);
  detail::scan_runs(
      entries,
      [](const ActivityLogEntry& e) { return e.temperature == annotate::TemperatureLevel::hot; },
      th.env_persist_h, Anomaly::Family::environmental, "heat", "hot environment", out);
  detail::scan_runs(
      entries,
      [](const ActivityLogEntry& e) { return e.sound == annotate::SoundLevel::very_noisy; },
      th.env_persist_h, Anomaly::Family::environmental, "noise", "very noisy environment", out);
  for (const auto& e : entries) {
    if (!e.physio) continue;
    const bool resting = e.activity == Activity::sitting || e.activity == Activity::lying;
    const auto emit = [&](const std::string& code, const std::string& detail) {
      Anomaly a;
      a.family = Anomaly::Family::health;
      a.code = code;
      a.start = e.civil_time;
      a.end = e.civil_time;
      a.detail = detail;
      out.push_back(std::move(a));
    };
    if (e.physio->hr_bpm && *e.physio->hr_bpm > th.hr_high_bpm && resting)
      emit("hr_high", "heart rate " + fmt1(*e.physio->hr_bpm) + " bpm while " +
                          activity_name(e.activity));
    if (e.physio->spo2_percent && *e.physio->spo2_percent < th.spo2_low_percent)
      emit("spo2_low", "SpO2 " + fmt1(*e.physio->spo2_percent) + "%");
    if (e.physio->temp_celsius && *e.physio->temp_celsius > th.fever_c)
      emit("fever", "body temperature " + fmt1(*e.physio->temp_celsius) + " C");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Selection

// Entries in the trailing window_h hours (anchored at the newest entry).
inline std::vector<ActivityLogEntry> window_entries(std::span<const ActivityLogEntry> entries,
                                                    double window_h) {
  if (entries.empty()) throw EmptyWindow("log store has no entries");
  if (window_h <= 0) throw Error("window_h must be > 0");
  const std::int64_t end = entries.back().unix_ts();
  const double start = static_cast<double>(end) - window_h * 3600.0;
  std::vector<ActivityLogEntry> out;
  for (const auto& e : entries)
    if (static_cast<double>(e.unix_ts()) >= start) out.push_back(e);
  return out;
}

// Downsampling: under the cap everything is kept; over it, the first entry,
// the last entry, every ceil(count/max)-th entry and every health-flagged
// entry survive, in order.
inline std::vector<ActivityLogEntry> select_for_summary(std::span<const ActivityLogEntry> entries,
                                                        double window_h, int max_entries,
                                                        const AnomalyThresholds& th = {}) {
  if (max_entries < 2) throw Error("max_entries must be >= 2");
  const std::vector<ActivityLogEntry> in_window = window_entries(entries, window_h);
  if (in_window.empty()) throw EmptyWindow("no entries in the trailing window");
  const std::size_t count = in_window.size();
  if (count <= static_cast<std::size_t>(max_entries)) return in_window;
  const std::size_t stride =
      (count + static_cast<std::size_t>(max_entries) - 1) / static_cast<std::size_t>(max_entries);
  std::vector<ActivityLogEntry> out;
  for (std::size_t i = 0; i < count; ++i) {
    const bool keep = i == 0 || i == count - 1 || i % stride == 0 ||
                      health_flagged(in_window[i], th);
    if (keep) out.push_back(in_window[i]);
  }
  return out;
}

inline std::vector<ActivityLogEntry> select_for_summary(const LogStore& store, double window_h,
                                                        int max_entries,
                                                        const AnomalyThresholds& th = {}) {
  return select_for_summary(store.entries(), window_h, max_entries, th);
}

// ---------------------------------------------------------------------------
// Summary report

struct SummaryReport {
  ingest::CivilTimestamp window_start;
  ingest::CivilTimestamp window_end;
  std::string narrative;
  std::map<std::string, double> activity_distribution;  // over known activities
  std::vector<std::string> trajectory;                  // ordered unique places
  std::vector<Anomaly> anomalies;
  std::size_t entry_count = 0;
  std::string backend_error;  // nonempty when the narrative is missing

  std::string render_text() const {
    std::string out;
    out += "Activity summary " + ingest::civil_display(window_start) + " .. " +
           ingest::civil_display(window_end) + " (" + std::to_string(entry_count) +
           " entries)\n";
    out += "Activity distribution:\n";
    for (const auto& [label, frac] : activity_distribution)
      out += "  " + label + ": " + fmt4(frac) + "\n";
    out += "Trajectory:\n";
    for (const auto& place : trajectory) out += "  - " + place + "\n";
    if (!anomalies.empty()) {
      out += "Anomalies:\n";
      for (const auto& a : anomalies)
        out += std::string("  [") + family_name(a.family) + "] " + a.code + " " +
               ingest::civil_display(a.start) + " .. " + ingest::civil_display(a.end) + ": " +
               a.detail + "\n";
    }
    out += "Narrative:\n";
    out += narrative.empty() ? (backend_error.empty() ? "(empty)" : "(backend error: " +
                                                                        backend_error + ")")
                             : narrative;
    out += "\n";
    return out;
  }
};

inline void to_json(json& j, const SummaryReport& r) {
  j = json{{"window", json{{"start", r.window_start}, {"end", r.window_end}}},
           {"narrative", r.narrative},
           {"activity_distribution", r.activity_distribution},
           {"trajectory", r.trajectory},
           {"anomalies", r.anomalies},
           {"entry_count", r.entry_count}};
  if (!r.backend_error.empty()) j["backend_error"] = r.backend_error;
}

struct SummarizeOptions {
  int max_entries = 120;
  AnomalyThresholds thresholds;
  std::string template_version = "summary.v1";
};

// Deterministic fields always fill from the window's entries; the narrative
// is the backend completion of the summary prompt over the downsampled
// selection. Backend failures leave a partial report with the error recorded.
inline SummaryReport summarize(std::span<const ActivityLogEntry> entries, double window_h,
                               infer::Backend& backend, const SummarizeOptions& opts = {}) {
  const std::vector<ActivityLogEntry> in_window = window_entries(entries, window_h);
  if (in_window.empty()) throw EmptyWindow("no entries in the trailing window");
  SummaryReport report;
  report.window_start = in_window.front().civil_time;
  report.window_end = in_window.back().civil_time;
  report.entry_count = in_window.size();
  std::map<std::string, std::size_t> counts;
  std::size_t known = 0;
  for (const auto& e : in_window) {
    if (e.activity == Activity::unknown) continue;
    ++counts[activity_name(e.activity)];
    ++known;
  }
  for (const auto& [label, c] : counts)
    report.activity_distribution[label] =
        static_cast<double>(c) / static_cast<double>(known);
  std::set<std::string> seen;
  for (const auto& e : in_window) {
    const std::string place = e.address.display();
    if (seen.insert(place).second) report.trajectory.push_back(place);
  }
  report.anomalies = detect_anomalies(in_window, opts.thresholds);
  const auto selected =
      select_for_summary(in_window, window_h, opts.max_entries, opts.thresholds);
  try {
    const auto p = prompt::build_summary_prompt(selected, window_h, opts.template_version);
    report.narrative = backend.complete(p);
  } catch (const Error& e) {
    report.backend_error = e.what();
    report.narrative.clear();
  }
  return report;
}

inline SummaryReport summarize(const LogStore& store, double window_h, infer::Backend& backend,
                               const SummarizeOptions& opts = {}) {
  return summarize(store.entries(), window_h, backend, opts);
}

}  // namespace dailylog::logbook
