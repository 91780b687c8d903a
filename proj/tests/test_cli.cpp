#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dailylog/synth.hpp"
#include "dailylog/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path work_dir() {
  const auto dir = fs::temp_directory_path() / "dailylog_cli_tests";
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args) {
  const auto dir = work_dir();
  const auto out_path = dir / "stdout.txt";
  const auto err_path = dir / "stderr.txt";
  const std::string cmd = std::string(DAILYLOG_CLI_PATH) + " " + args + " > " +
                          out_path.string() + " 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

// Small synth config keeps the CLI tests fast on one core.
json fast_synth_json(std::uint64_t seed) {
  return json{{"seed", seed},        {"imu_rate_hz", 8.0},
              {"audio_rate_hz", 500.0}, {"audio_duration_s", 0.5},
              {"window_s", 120.0},   {"location_change_prob", 0.03}};
}

}  // namespace

TEST_CASE("--help output matches the golden file and lists every flag") {
  const auto r = run_cli("--help");
  CHECK(r.exit_code == 0);
  const std::string golden =
      slurp(fs::path(DAILYLOG_FIXTURES_DIR) / "cli_help.golden.txt");
  CHECK(r.out == golden);
  for (const char* flag : {"--config", "run", "synth", "eval", "summarize", "features"})
    CHECK_MESSAGE(r.out.find(flag) != std::string::npos, "missing: ", flag);
  // Subcommand flags are enumerated on the subcommand help screens.
  const auto run_help = run_cli("run --help");
  for (const char* flag : {"--input", "--store", "--out", "--workers"})
    CHECK_MESSAGE(run_help.out.find(flag) != std::string::npos, "missing: ", flag);
  const auto synth_help = run_cli("synth --help");
  for (const char* flag : {"--seed", "--out", "--emit", "--no-physio"})
    CHECK_MESSAGE(synth_help.out.find(flag) != std::string::npos, "missing: ", flag);
}

TEST_CASE("synth: same seed twice writes byte-identical files") {
  const auto dir = work_dir();
  const auto cfg_path = dir / "synth_cfg.json";
  write_file(cfg_path, json{{"synth", fast_synth_json(1)}, {"window_s", 1800.0}}.dump());
  const auto a = dir / "day_a.jsonl";
  const auto b = dir / "day_b.jsonl";
  const std::string base =
      "--config " + cfg_path.string() + " synth --seed 1 --out ";
  CHECK(run_cli(base + a.string()).exit_code == 0);
  CHECK(run_cli(base + b.string()).exit_code == 0);
  const std::string bytes_a = slurp(a);
  CHECK_FALSE(bytes_a.empty());
  CHECK(bytes_a == slurp(b));
}

TEST_CASE("synth: 120 s windows emit 720 lines") {
  const auto dir = work_dir();
  const auto cfg_path = dir / "synth720.json";
  json synth_cfg = fast_synth_json(3);
  synth_cfg["include_signals"] = false;
  write_file(cfg_path, json{{"synth", synth_cfg}}.dump());
  const auto out = dir / "day720.jsonl";
  const auto r = run_cli("--config " + cfg_path.string() + " synth --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(line_count(slurp(out)) == 720);
}

TEST_CASE("synth: invalid prior exits 2 and names the field") {
  const auto dir = work_dir();
  const auto cfg_path = dir / "bad_prior.json";
  json synth_cfg = fast_synth_json(1);
  synth_cfg["night_prior"] = std::vector<double>{0.5, 0.1, 0.1, 0.1, 0.1};  // sums to 0.9
  write_file(cfg_path, json{{"synth", synth_cfg}}.dump());
  const auto r = run_cli("--config " + cfg_path.string() + " synth --out /dev/null");
  CHECK(r.exit_code == 2);
  const json err = json::parse(r.err);
  CHECK(err["error"]["message"].get<std::string>().find("night_prior") != std::string::npos);
}

TEST_CASE("run: synthetic stream with mock backend writes entries and a summary") {
  const auto dir = work_dir();
  // Synthesize a 20-minute record stream via the library (fast path).
  dailylog::synth::SynthConfig scfg;
  scfg.seed = 5;
  scfg.imu_rate_hz = 8.0;
  scfg.audio_rate_hz = 500.0;
  scfg.audio_duration_s = 0.5;
  auto samples = dailylog::synth::synthesize_day(scfg);
  samples.resize(10);
  dailylog::synth::attach_physio(samples, scfg);
  const auto records = dailylog::synth::to_records(samples);
  const auto stream_path = dir / "stream.jsonl";
  write_file(stream_path,
             dailylog::ingest::serialize_records(records, dailylog::ingest::StreamFormat::jsonl));
  // Train a centroid model with the features subcommand.
  const auto samples_path = dir / "samples.jsonl";
  {
    std::ofstream out(samples_path);
    dailylog::synth::SynthConfig train_cfg = scfg;
    train_cfg.include_audio = false;
    dailylog::synth::Rng rng(6);
    std::int64_t ts = 0;
    for (auto label : dailylog::synth::activity_classes())
      for (int rep = 0; rep < 4; ++rep) {
        dailylog::synth::SynthSample s;
        s.label = label;
        s.scene = "home";
        s.window = dailylog::synth::make_window(label, train_cfg, rng,
                                                static_cast<double>(ts));
        ts += 120;
        out << json(s).dump() << "\n";
      }
  }
  const auto centroids_path = dir / "centroids.json";
  const auto feat = run_cli("features --samples " + samples_path.string() +
                            " --centroids-out " + centroids_path.string() + " --out /dev/null");
  REQUIRE(feat.exit_code == 0);
  REQUIRE(fs::exists(centroids_path));

  const auto cfg_path = dir / "run_cfg.json";
  const auto store_path = dir / "store.jsonl";
  const auto report_path = dir / "report.json";
  fs::remove(store_path);
  write_file(cfg_path, json{{"window_s", 120.0},
                            {"backend",
                             {{"kind", "mock"},
                              {"model_name", "centroid-mock"},
                              {"mock_model_path", centroids_path.string()}}},
                            {"geocode", {{"gazetteer", std::string(DAILYLOG_DATA_DIR) +
                                                           "/gazetteer.sample.csv"}}}}
                          .dump());
  const auto r = run_cli("--config " + cfg_path.string() + " run --input " +
                         stream_path.string() + " --store " + store_path.string() + " --out " +
                         report_path.string());
  CHECK(r.exit_code == 0);
  CHECK(line_count(slurp(store_path)) == 10);
  REQUIRE(fs::exists(report_path));
  const json report = json::parse(slurp(report_path));
  CHECK(report["entry_count"] == 10);
  CHECK(r.out.find("entries: 10") != std::string::npos);

  // summarize over the same store reuses the report machinery.
  const auto sum = run_cli("--config " + cfg_path.string() + " summarize --store " +
                           store_path.string() + " --window-h 2");
  CHECK(sum.exit_code == 0);
  CHECK(sum.out.find("Activity summary") != std::string::npos);
}

TEST_CASE("run: unreachable backend degrades entries to unknown and exits 0") {
  const auto dir = work_dir();
  dailylog::synth::SynthConfig scfg;
  scfg.seed = 8;
  scfg.imu_rate_hz = 8.0;
  scfg.audio_rate_hz = 500.0;
  scfg.audio_duration_s = 0.5;
  auto samples = dailylog::synth::synthesize_day(scfg);
  samples.resize(3);
  dailylog::synth::attach_physio(samples, scfg);
  const auto stream_path = dir / "degrade_stream.jsonl";
  write_file(stream_path,
             dailylog::ingest::serialize_records(dailylog::synth::to_records(samples),
                                                 dailylog::ingest::StreamFormat::jsonl));
  const auto cfg_path = dir / "degrade_cfg.json";
  write_file(cfg_path, json{{"window_s", 120.0},
                            {"backend",
                             {{"kind", "http_chat"},
                              {"url", "http://127.0.0.1:1/nothing"},
                              {"model_name", "offline-model"},
                              {"timeout_s", 0.2},
                              {"max_retries", 0}}}}
                          .dump());
  const auto store_path = dir / "degrade_store.jsonl";
  fs::remove(store_path);
  const auto r = run_cli("--config " + cfg_path.string() + " run --input " +
                         stream_path.string() + " --store " + store_path.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("unknown activities: 3") != std::string::npos);
  CHECK(r.out.find("warnings: 3") != std::string::npos);
  std::istringstream lines(slurp(store_path));
  std::string line;
  std::size_t unknowns = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    if (json::parse(line)["activity"] == "unknown") ++unknowns;
  }
  CHECK(unknowns == 3);
}

TEST_CASE("synth: --hours truncates the day") {
  const auto dir = work_dir();
  const auto cfg_path = dir / "hours_cfg.json";
  json synth_cfg = fast_synth_json(4);
  synth_cfg["include_signals"] = false;
  write_file(cfg_path, json{{"synth", synth_cfg}}.dump());
  const auto out = dir / "two_hours.jsonl";
  const auto r = run_cli("--config " + cfg_path.string() + " synth --hours 2 --out " +
                         out.string());
  CHECK(r.exit_code == 0);
  CHECK(line_count(slurp(out)) == 60);
}

TEST_CASE("run: missing input file exits 2 naming the path") {
  const auto r = run_cli("run --input /nonexistent/stream.jsonl");
  CHECK(r.exit_code == 2);
  const json err = json::parse(r.err);
  CHECK(err["error"]["message"].get<std::string>().find("/nonexistent/stream.jsonl") !=
        std::string::npos);
}

TEST_CASE("eval: identical files report macro F1 = 1") {
  const auto dir = work_dir();
  const auto labels = dir / "labels.txt";
  write_file(labels, "walking\nsitting\nlying\n");
  const auto r = run_cli("eval --pred " + labels.string() + " --truth " + labels.string());
  CHECK(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(report["macro"]["f1"] == 1.0);
}

TEST_CASE("eval: the three-sample example reports macro F1 = 0.6667") {
  const auto dir = work_dir();
  const auto truth = dir / "truth.txt";
  const auto pred = dir / "pred.txt";
  write_file(truth, "sitting\nsitting\nwalking\n");
  write_file(pred, "sitting\nwalking\nwalking\n");
  const auto r = run_cli("eval --pred " + pred.string() + " --truth " + truth.string());
  CHECK(r.exit_code == 0);
  const json report = json::parse(r.out);
  CHECK(std::fabs(report["macro"]["f1"].get<double>() - 0.6667) <= 1e-4);
}

TEST_CASE("eval: a label outside the vocabulary exits 2") {
  const auto dir = work_dir();
  const auto truth = dir / "truth2.txt";
  const auto pred = dir / "pred2.txt";
  write_file(truth, "sitting\n");
  write_file(pred, "floating\n");
  const auto r = run_cli("eval --pred " + pred.string() + " --truth " + truth.string());
  CHECK(r.exit_code == 2);
  const json err = json::parse(r.err);
  CHECK(err["error"]["code"] == "unknown_label");
}

TEST_CASE("unknown subcommand exits 2 with a usage error") {
  const auto r = run_cli("frobnicate");
  CHECK(r.exit_code == 2);
  const json err = json::parse(r.err);
  CHECK(err["error"]["code"] == "usage");
}

TEST_CASE("features: WAV input dumps the 120-dim vector and its dBFS") {
  const auto dir = work_dir();
  const auto wav_path = dir / "tone.wav";
  dailylog::ingest::AudioClip clip;
  clip.sample_rate_hz = 8000.0;
  for (int i = 0; i < 4000; ++i)
    clip.samples.push_back(0.25 * std::sin(2 * std::numbers::pi * 440.0 * i / 8000.0));
  dailylog::wav::write_wav_pcm16(wav_path.string(), clip);
  const auto r = run_cli("features --wav " + wav_path.string());
  CHECK(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["audio"].size() == 120);
  CHECK(j["sample_rate_hz"] == 8000.0);
  // RMS of a 0.25-amplitude sine is 0.25/sqrt(2) -> about -15.05 dBFS.
  CHECK(std::fabs(j["dbfs"].get<double>() - (-15.05)) < 0.1);
}

TEST_CASE("features: record stream dump carries names and values") {
  const auto dir = work_dir();
  dailylog::synth::SynthConfig scfg;
  scfg.seed = 9;
  scfg.imu_rate_hz = 8.0;
  scfg.include_audio = false;
  auto samples = dailylog::synth::synthesize_day(scfg);
  samples.resize(2);
  const auto records = dailylog::synth::to_records(samples);
  const auto stream_path = dir / "feat_stream.jsonl";
  write_file(stream_path,
             dailylog::ingest::serialize_records(records, dailylog::ingest::StreamFormat::jsonl));
  const auto r = run_cli("features --input " + stream_path.string() + " --window-s 120");
  CHECK(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++rows;
    const json j = json::parse(line);
    CHECK(j["imu"]["values"].size() == 26 * j["imu"]["sensors"].size());
    CHECK(j["imu_names"].size() == 26);
  }
  CHECK(rows == 2);
}
