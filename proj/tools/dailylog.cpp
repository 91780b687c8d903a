// dailylog CLI: batch pipeline runs, dataset synthesis, feature dumps,
// log summarization and metric evaluation. All commands are reproducible
// from (config file, input files, seed); errors leave a machine-readable
// JSON object on stderr and exit code 2 for input/config problems.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dailylog/eval.hpp"
#include "dailylog/pipeline.hpp"
#include "dailylog/synth.hpp"
#include "dailylog/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dailylog;

namespace {

struct CliError : Error {
  CliError(std::string code, const std::string& message)
      : Error(message), code(std::move(code)) {}
  std::string code;
};

void fail(const std::string& code, const std::string& message) {
  throw CliError(code, message);
}

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("missing_file", std::string(what) + " not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json load_json_file(const std::string& path, const char* what) {
  const std::string text = read_file(path, what);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail("bad_json", std::string(what) + " is not valid JSON: " + path);
  return j;
}

ingest::StreamFormat format_for(const std::string& path, const std::string& override_format) {
  if (override_format == "jsonl") return ingest::StreamFormat::jsonl;
  if (override_format == "csv") return ingest::StreamFormat::csv;
  if (!override_format.empty()) fail("bad_format", "unknown stream format: " + override_format);
  return path.size() > 4 && path.substr(path.size() - 4) == ".csv" ? ingest::StreamFormat::csv
                                                                   : ingest::StreamFormat::jsonl;
}

struct RunConfig {
  pipeline::PipelineConfig pipeline;
  synth::SynthConfig synth;
  std::string input_path;
  std::string store_path = "dailylog.store.jsonl";
  std::string report_path;
  std::string input_format;  // "", "jsonl", "csv"
};

RunConfig load_run_config(const std::string& path) {
  RunConfig cfg;
  if (!path.empty()) {
    const json j = load_json_file(path, "config file");
    cfg.pipeline.window_s = j.value("window_s", cfg.pipeline.window_s);
    cfg.pipeline.utc_offset_minutes = j.value("utc_offset_minutes", 0);
    cfg.pipeline.template_version = j.value("template_version", cfg.pipeline.template_version);
    cfg.pipeline.workers = j.value("workers", 1);
    if (j.contains("backend")) cfg.pipeline.backend = j["backend"].get<infer::BackendConfig>();
    if (j.contains("geocode")) {
      const json& g = j["geocode"];
      cfg.pipeline.geocode_url = g.value("url", "");
      cfg.pipeline.gazetteer_path = g.value("gazetteer", "");
      cfg.pipeline.gazetteer_radius_m = g.value("radius_m", 250.0);
    }
    if (j.contains("beacons")) {
      for (const auto& [key, b] : j["beacons"].items()) {
        geoloc::BeaconInfo info;
        info.building = b.value("building", "");
        info.floor = b.value("floor", 0);
        info.room = b.value("room", "");
        cfg.pipeline.beacons[key] = info;
      }
    }
    if (j.contains("summary")) {
      cfg.pipeline.summary_window_h = j["summary"].value("window_h", 2.0);
      cfg.pipeline.summary_max_entries = j["summary"].value("max_entries", 120);
    }
    if (j.contains("anomaly_thresholds")) {
      const json& t = j["anomaly_thresholds"];
      auto& th = cfg.pipeline.thresholds;
      th.sedentary_h = t.value("sedentary_h", th.sedentary_h);
      th.env_persist_h = t.value("env_persist_h", th.env_persist_h);
      th.hr_high_bpm = t.value("hr_high_bpm", th.hr_high_bpm);
      th.spo2_low_percent = t.value("spo2_low_percent", th.spo2_low_percent);
      th.fever_c = t.value("fever_c", th.fever_c);
    }
    if (j.contains("paths")) {
      cfg.input_path = j["paths"].value("input", "");
      cfg.store_path = j["paths"].value("store", cfg.store_path);
      cfg.report_path = j["paths"].value("report", "");
      cfg.input_format = j["paths"].value("format", "");
    }
    if (j.contains("synth")) cfg.synth = j["synth"].get<synth::SynthConfig>();
    cfg.synth.window_s = cfg.pipeline.window_s;
  }
  // Environment overrides.
  if (const char* url = std::getenv("DAILYLOG_LLM_URL"); url && *url) {
    cfg.pipeline.backend.url = url;
    cfg.pipeline.backend.kind = infer::BackendConfig::Kind::http_chat;
  }
  if (const char* url = std::getenv("DAILYLOG_GEOCODE_URL"); url && *url)
    cfg.pipeline.geocode_url = url;
  return cfg;
}

std::vector<ingest::SensorRecord> load_stream(const std::string& path,
                                              const std::string& format) {
  const std::string raw = read_file(path, "input stream");
  return ingest::parse_stream(raw, format_for(path, format));
}

// ---------------------------------------------------------------------------

int cmd_run(const std::string& config_path, std::string input, std::string store_path,
            std::string out, int workers) {
  RunConfig cfg = load_run_config(config_path);
  if (!input.empty()) cfg.input_path = input;
  if (!store_path.empty()) cfg.store_path = store_path;
  if (!out.empty()) cfg.report_path = out;
  if (workers > 0) cfg.pipeline.workers = workers;
  if (cfg.input_path.empty()) fail("missing_input", "no input stream (set --input or paths.input)");
  auto records = load_stream(cfg.input_path, cfg.input_format);
  pipeline::Pipeline pipe(cfg.pipeline);
  auto store = logbook::LogStore::open(cfg.store_path);
  const auto result = pipe.run(std::move(records), store);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  json summary_json;
  if (result.entries_written > 0) {
    const auto report = pipe.summarize_store(store);
    summary_json = report;
    if (!cfg.report_path.empty()) {
      std::ofstream rep(cfg.report_path);
      rep << summary_json.dump(2) << "\n";
    }
    std::cout << report.render_text();
  }
  std::cout << "entries: " << result.entries_written << ", skipped windows: "
            << result.windows_skipped << ", unknown activities: " << result.unknown_activities
            << ", warnings: " << result.warnings.size() << "\n";
  return 0;
}

int cmd_synth(const std::string& config_path, const std::string& out, std::uint64_t seed,
              bool seed_set, const std::string& emit, bool no_physio, double hours) {
  RunConfig cfg = load_run_config(config_path);
  if (seed_set) cfg.synth.seed = seed;
  if (hours <= 0 || hours > 24) fail("bad_config", "--hours must lie in (0, 24]");
  try {
    cfg.synth.validate();
  } catch (const Error& e) {
    fail("bad_config", e.what());
  }
  auto samples = synth::synthesize_day(cfg.synth);
  const auto keep = static_cast<std::size_t>(hours * 3600.0 / cfg.synth.window_s);
  if (keep < samples.size()) samples.resize(keep);
  if (!no_physio) synth::attach_physio(samples, cfg.synth);
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out, std::ios::binary);
    if (!file) fail("io_error", "cannot write output file: " + out);
    os = &file;
  }
  if (emit == "records") {
    const auto records = synth::to_records(samples);
    *os << ingest::serialize_records(records, ingest::StreamFormat::jsonl);
  } else if (emit == "samples") {
    for (const auto& s : samples) *os << json(s).dump() << "\n";
  } else {
    fail("bad_format", "--emit must be samples or records");
  }
  return 0;
}

std::vector<std::string> load_labels(const std::string& path) {
  const std::string text = read_file(path, "label file");
  std::vector<std::string> labels;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty()) labels.push_back(t);
  }
  return labels;
}

int cmd_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& out) {
  const auto pred = load_labels(pred_path);
  const auto truth = load_labels(truth_path);
  // Vocabulary: the activity enum plus the synthesizer's composite class.
  std::vector<std::string> vocab;
  for (Activity a : activity_vocabulary()) vocab.emplace_back(activity_name(a));
  vocab.emplace_back("stairs");
  vocab.emplace_back("unknown");
  std::sort(vocab.begin(), vocab.end());
  eval::ConfusionMatrix m;
  try {
    m = eval::confusion(truth, pred, vocab);
  } catch (const eval::UnknownLabel& e) {
    fail("unknown_label", e.what());
  } catch (const eval::LengthMismatch& e) {
    fail("length_mismatch", e.what());
  }
  const json report = eval::metric_report(m);
  if (!out.empty()) {
    std::ofstream file(out);
    file << report.dump(2) << "\n";
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_summarize(const std::string& config_path, std::string store_path, double window_h,
                  const std::string& out) {
  RunConfig cfg = load_run_config(config_path);
  if (!store_path.empty()) cfg.store_path = store_path;
  if (window_h > 0) cfg.pipeline.summary_window_h = window_h;
  if (!fs::exists(cfg.store_path)) fail("missing_file", "log store not found: " + cfg.store_path);
  pipeline::Pipeline pipe(cfg.pipeline);
  auto store = logbook::LogStore::open(cfg.store_path);
  logbook::SummaryReport report;
  try {
    report = pipe.summarize_store(store);
  } catch (const logbook::EmptyWindow& e) {
    fail("empty_window", e.what());
  }
  if (!out.empty()) {
    std::ofstream file(out);
    file << json(report).dump(2) << "\n";
  }
  std::cout << report.render_text();
  return 0;
}

int cmd_features(const std::string& input, const std::string& samples_path,
                 const std::string& wav_path, const std::string& format, double window_s,
                 const std::string& out, const std::string& centroids_out) {
  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out.empty()) {
    file.open(out, std::ios::binary);
    if (!file) fail("io_error", "cannot write output file: " + out);
    os = &file;
  }
  if (!wav_path.empty()) {
    if (!fs::exists(wav_path)) fail("missing_file", "WAV file not found: " + wav_path);
    const auto clip = wav::read_wav(wav_path);
    json j;
    j["sample_rate_hz"] = clip.sample_rate_hz;
    j["samples"] = clip.samples.size();
    j["audio"] = audio::extract_audio_features(clip);
    j["audio_names"] = audio::feature_names();
    j["dbfs"] = annotate::rms_dbfs(clip);
    *os << j.dump() << "\n";
    return 0;
  }
  const auto dump_window = [&](const ingest::SensorWindow& w) {
    json j;
    j["start_unix_ts"] = w.start_unix_ts;
    j["end_unix_ts"] = w.end_unix_ts;
    if (!w.imu.empty()) {
      const auto v = imu::extract_imu_features(w);
      j["imu"] = v;
      j["imu_names"] = imu::feature_names();
    }
    if (w.audio) {
      j["audio"] = audio::extract_audio_features(*w.audio);
      j["audio_names"] = audio::feature_names();
    }
    *os << j.dump() << "\n";
  };
  if (!samples_path.empty()) {
    // Labeled synth samples: dump features and optionally per-label centroids
    // of the accelerometer block.
    const std::string text = read_file(samples_path, "samples file");
    std::istringstream in(text);
    std::string line;
    std::map<std::string, std::pair<std::array<double, 26>, std::size_t>> acc;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded())
        fail("bad_json", "samples line " + std::to_string(lineno) + " is not valid JSON");
      const synth::SynthSample s = j.get<synth::SynthSample>();
      if (s.window.imu.empty()) continue;
      const auto v = imu::extract_imu_features(s.window);
      const auto* accel = v.block_for("accel");
      json out_j;
      out_j["label"] = synth::class_name(s.label);
      out_j["imu"] = v;
      *os << out_j.dump() << "\n";
      if (accel) {
        auto& [sum, count] = acc[synth::class_name(s.label)];
        const auto flat = accel->flat();
        for (std::size_t i = 0; i < 26; ++i) sum[i] += flat[i];
        ++count;
      }
    }
    if (!centroids_out.empty()) {
      if (acc.size() < 2)
        fail("bad_input", "centroid output needs samples from at least 2 labels");
      json model = json::object();
      for (auto& [label, pair] : acc) {
        auto& [sum, count] = pair;
        std::vector<double> centroid(26);
        for (std::size_t i = 0; i < 26; ++i)
          centroid[i] = sum[i] / static_cast<double>(count);
        model[label] = centroid;
      }
      std::ofstream cf(centroids_out);
      if (!cf) fail("io_error", "cannot write centroid model: " + centroids_out);
      cf << model.dump(2) << "\n";
    }
    return 0;
  }
  if (input.empty()) fail("missing_input", "features needs --input, --samples or --wav");
  const auto records = load_stream(input, format);
  const auto windows = ingest::window_align(records, window_s);
  for (const auto& w : windows)
    if (!w.imu.empty() || w.audio) dump_window(w);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dailylog: multi-modal sensor streams to context-aware activity logs"};
  app.name("dailylog");
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON run configuration file");

  auto* run = app.add_subcommand("run", "Run the full pipeline over a sensor stream");
  std::string run_input, run_store, run_out;
  int run_workers = 0;
  run->add_option("--input", run_input, "Sensor stream (JSONL or CSV)");
  run->add_option("--store", run_store, "Log store path (JSONL, appended)");
  run->add_option("--out", run_out, "Summary report output path (JSON)");
  run->add_option("--workers", run_workers, "Parallel feature-extraction workers");

  auto* synth_cmd = app.add_subcommand("synth", "Generate one synthetic labeled day");
  std::string synth_out, synth_emit = "samples";
  std::uint64_t synth_seed = 0;
  bool synth_no_physio = false;
  double synth_hours = 24.0;
  auto* seed_opt = synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_option("--out", synth_out, "Output path (default stdout)");
  synth_cmd->add_option("--hours", synth_hours, "Truncate the day to its first N hours");
  synth_cmd->add_option("--emit", synth_emit, "Output form: samples | records");
  synth_cmd->add_flag("--no-physio", synth_no_physio, "Skip physiological signal attachment");

  auto* eval_cmd = app.add_subcommand("eval", "Score predicted labels against truth");
  std::string eval_pred, eval_truth, eval_out;
  eval_cmd->add_option("--pred", eval_pred, "Predicted labels, one per line")->required();
  eval_cmd->add_option("--truth", eval_truth, "True labels, one per line")->required();
  eval_cmd->add_option("--out", eval_out, "Metric report output path (JSON)");

  auto* sum_cmd = app.add_subcommand("summarize", "Summarize the trailing log window");
  std::string sum_store, sum_out;
  double sum_window_h = 0;
  sum_cmd->add_option("--store", sum_store, "Log store path");
  sum_cmd->add_option("--window-h", sum_window_h, "Summary window in hours");
  sum_cmd->add_option("--out", sum_out, "Report output path (JSON)");

  auto* feat_cmd = app.add_subcommand("features", "Dump per-window feature vectors");
  std::string feat_input, feat_samples, feat_wav, feat_format, feat_out, feat_centroids;
  double feat_window_s = 120.0;
  feat_cmd->add_option("--input", feat_input, "Sensor stream (JSONL or CSV)");
  feat_cmd->add_option("--samples", feat_samples, "Labeled synth samples (JSONL)");
  feat_cmd->add_option("--wav", feat_wav, "Mono WAV file (PCM16 or float32)");
  feat_cmd->add_option("--format", feat_format, "Force stream format: jsonl | csv");
  feat_cmd->add_option("--window-s", feat_window_s, "Window length in seconds");
  feat_cmd->add_option("--out", feat_out, "Output path (default stdout)");
  feat_cmd->add_option("--centroids-out", feat_centroids,
                       "Write a per-label centroid model (needs --samples)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, run_input, run_store, run_out, run_workers);
    if (synth_cmd->parsed())
      return cmd_synth(config_path, synth_out, synth_seed, !seed_opt->empty(), synth_emit,
                       synth_no_physio, synth_hours);
    if (eval_cmd->parsed()) return cmd_eval(eval_pred, eval_truth, eval_out);
    if (sum_cmd->parsed()) return cmd_summarize(config_path, sum_store, sum_window_h, sum_out);
    if (feat_cmd->parsed())
      return cmd_features(feat_input, feat_samples, feat_wav, feat_format, feat_window_s,
                          feat_out, feat_centroids);
  } catch (const CliError& e) {
    std::cerr << json{{"error", {{"code", e.code}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"code", "error"}, {"message", e.what()}}}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "internal"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
  return 0;
}
