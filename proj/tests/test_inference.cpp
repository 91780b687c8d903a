#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include <httplib.h>

#include "dailylog/inference.hpp"
#include "prompt_fixture.hpp"

using namespace dailylog;
using namespace dailylog::infer;

namespace {

CentroidModel two_label_model() {
  CentroidModel m;
  std::array<double, 26> sitting{}, standing{};
  sitting.fill(0.0);
  standing.fill(1.0);
  m.centroids["sitting"] = sitting;
  m.centroids["standing"] = standing;
  m.scale.fill(1.0);
  return m;
}

prompt::Prompt prompt_with_accel(const std::array<double, 26>& accel) {
  auto bundle = fixture::context_bundle(false);
  bundle.imu.present = {true, false, false};
  imu::ImuFeatureBlock block;
  auto flat = accel;
  std::size_t i = 0;
  auto& td = block.time_domain;
  for (double* f : {&td.mean, &td.stdev, &td.skewness, &td.kurtosis, &td.max, &td.min, &td.iqr,
                    &td.signal_entropy, &td.temporal_entropy})
    *f = flat[i++];
  for (auto& v : block.freq_domain.log_band_energy) v = flat[i++];
  block.freq_domain.spectral_entropy = flat[i++];
  block.autocorr.dominant_lag_s = flat[i++];
  block.autocorr.dominant_peak = flat[i++];
  auto& ax = block.axis;
  for (double* f : {&ax.mean_x, &ax.mean_y, &ax.mean_z, &ax.std_x, &ax.std_y, &ax.std_z,
                    &ax.corr_xy, &ax.corr_xz, &ax.corr_yz})
    *f = flat[i++];
  bundle.imu.blocks = {block};
  return prompt::build_context_prompt(bundle);
}

}  // namespace

TEST_CASE("parse_context_response: schema line extracts activity and scene") {
  const auto inf = parse_context_response(
      "Date-time: x; location information: y; activity category: Walking; scenario: park");
  CHECK(inf.activity == Activity::walking);
  CHECK(inf.scene == "park");
  CHECK(inf.parse_ok);
}

TEST_CASE("parse_context_response: free text falls back to a synonym scan") {
  const auto inf = parse_context_response("The user is probably jogging.");
  CHECK(inf.activity == Activity::jogging);
  CHECK_FALSE(inf.parse_ok);
}

TEST_CASE("parse_context_response: empty text degrades to unknown") {
  const auto inf = parse_context_response("");
  CHECK(inf.activity == Activity::unknown);
  CHECK_FALSE(inf.parse_ok);
  CHECK(inf.raw_text.empty());
}

TEST_CASE("parse_context_response: synonym variants map into the vocabulary") {
  CHECK(parse_context_response("activity category: walking upstairs; scenario: home").activity ==
        Activity::ascending_stairs);
  CHECK(parse_context_response("activity category: Running; scenario: park").activity ==
        Activity::jogging);
  CHECK(parse_context_response("activity category: cycling; scenario: road").activity ==
        Activity::biking);
  CHECK(parse_context_response("activity category: stairs; scenario: office").activity ==
        Activity::ascending_stairs);
  CHECK(parse_context_response("activity category: hovering; scenario: ?").activity ==
        Activity::unknown);
}

TEST_CASE("parse then render is identity over the full activity vocabulary") {
  for (Activity a : activity_vocabulary()) {
    const std::string line = render_schema_line("2025-01-01 00:00:00 +00:00", "Hanover, US", a,
                                                "home");
    const auto inf = parse_context_response(line);
    CHECK(inf.activity == a);
    CHECK(inf.parse_ok);
    CHECK(inf.scene == "home");
  }
}

TEST_CASE("invariant: unknown activity implies parse_ok false") {
  for (const char* text :
       {"", "gibberish", "activity category: floating; scenario: space",
        "Date-time: x; location information: y; activity category: ; scenario: z"}) {
    const auto inf = parse_context_response(text);
    if (inf.activity == Activity::unknown) CHECK_FALSE(inf.parse_ok);
  }
}

TEST_CASE("synonym table loads from the shipped data file and matches the built-in") {
  const auto from_file = SynonymTable::load(std::string(DAILYLOG_DATA_DIR) + "/synonyms.v1.json");
  CHECK(from_file.entries == SynonymTable::builtin_v1().entries);
}

TEST_CASE("mock_infer: features at a centroid name that centroid") {
  const auto model = two_label_model();
  std::array<double, 26> at_sitting{};
  at_sitting.fill(0.0);
  const auto text = mock_infer(prompt_with_accel(at_sitting), model);
  const auto inf = parse_context_response(text);
  CHECK(inf.activity == Activity::sitting);
  CHECK(inf.parse_ok);
}

TEST_CASE("mock_infer: equidistant features break ties lexicographically") {
  const auto model = two_label_model();
  std::array<double, 26> mid{};
  mid.fill(0.5);
  const auto text = mock_infer(prompt_with_accel(mid), model);
  CHECK(parse_context_response(text).activity == Activity::sitting);  // "sitting" < "standing"
}

TEST_CASE("mock_infer: malformed feature section raises FeatureParseError") {
  prompt::Prompt p;
  p.rendered = "no features at all";
  CHECK_THROWS_AS(mock_infer(p, two_label_model()), FeatureParseError);
  p.rendered = "IMU accel: [1.0, 2.0]\n";  // wrong arity
  CHECK_THROWS_AS(mock_infer(p, two_label_model()), FeatureParseError);
}

TEST_CASE("mock_infer is a pure function of prompt and model") {
  const auto model = two_label_model();
  std::array<double, 26> v{};
  v.fill(0.25);
  const auto p = prompt_with_accel(v);
  CHECK(mock_infer(p, model) == mock_infer(p, model));
}

TEST_CASE("centroid model: file schema, scale override, and validation") {
  const json j = {{"sitting", std::vector<double>(26, 0.0)},
                  {"walking", std::vector<double>(26, 2.0)}};
  const auto m = CentroidModel::from_json(j);
  CHECK(m.centroids.size() == 2);
  for (double s : m.scale) CHECK(s == 1.0);  // plain Euclidean by default
  json with_scale = j;
  with_scale["_scale"] = std::vector<double>(26, 4.0);
  const auto scaled = CentroidModel::from_json(with_scale);
  CHECK(scaled.centroids.size() == 2);
  for (double s : scaled.scale) CHECK(s == 4.0);
  CHECK_THROWS_AS(CentroidModel::from_json(json{{"only", std::vector<double>(26, 0.0)}}), Error);
  CHECK_THROWS_AS(CentroidModel::from_json(json{{"a", std::vector<double>(25, 0.0)},
                                                {"b", std::vector<double>(26, 0.0)}}),
                  Error);
}

TEST_CASE("backend config validation") {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http_chat;
  CHECK_THROWS_AS(cfg.validate(), Error);  // url missing
  cfg.url = "http://127.0.0.1:1";
  CHECK_NOTHROW(cfg.validate());
  cfg.kind = BackendConfig::Kind::mock;
  cfg.mock_model_path = "";
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("http backend: 500 twice then 200 succeeds on the third attempt") {
  httplib::Server srv;
  std::atomic<int> hits{0};
  srv.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    const int n = ++hits;
    if (n <= 2) {
      res.status = 500;
      res.set_content("boom", "text/plain");
      return;
    }
    const json reply = {{"choices", json::array({json{{"message", json{{"role", "assistant"},
                                                                       {"content", "activity category: walking; scenario: park"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();

  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http_chat;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.max_retries = 2;
  cfg.backoff_base_s = 0.01;
  const auto p = prompt_with_accel(std::array<double, 26>{});
  const std::string text = complete(p, cfg);
  CHECK(text == "activity category: walking; scenario: park");
  CHECK(hits == 3);

  // With retries exhausted the HttpStatus surfaces (counter far below the
  // success threshold keeps the server failing).
  hits = -1000000;
  try {
    complete(p, cfg);
    FAIL("expected HttpStatus");
  } catch (const HttpStatus& e) {
    CHECK(e.code() == 500);
  }

  srv.stop();
  t.join();
}

TEST_CASE("http backend: request carries model, user message and temperature 0") {
  httplib::Server srv;
  json seen;
  srv.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    const json reply = {{"choices", json::array({json{{"message", json{{"content", "ok"}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http_chat;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.model_name = "tiny-model";
  const auto p = prompt_with_accel(std::array<double, 26>{});
  CHECK(complete(p, cfg) == "ok");
  CHECK(seen["model"] == "tiny-model");
  CHECK(seen["temperature"] == 0);
  REQUIRE(seen["messages"].is_array());
  CHECK(seen["messages"][0]["role"] == "user");
  CHECK(seen["messages"][0]["content"] == p.rendered);
  srv.stop();
  t.join();
}

TEST_CASE("http backend: non-JSON body raises BadResponseShape") {
  httplib::Server srv;
  srv.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json", "text/plain");
  });
  const int port = srv.bind_to_any_port("127.0.0.1");
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http_chat;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.max_retries = 0;
  CHECK_THROWS_AS(complete(prompt_with_accel(std::array<double, 26>{}), cfg), BadResponseShape);
  srv.stop();
  t.join();
}

TEST_CASE("http backend: 404 raises HttpStatus without retries") {
  httplib::Server srv;
  std::atomic<int> hits{0};
  srv.Post("/other", [&](const httplib::Request&, httplib::Response&) { ++hits; });
  const int port = srv.bind_to_any_port("127.0.0.1");
  std::thread t([&] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http_chat;
  cfg.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  cfg.max_retries = 3;
  try {
    complete(prompt_with_accel(std::array<double, 26>{}), cfg);
    FAIL("expected HttpStatus");
  } catch (const HttpStatus& e) {
    CHECK(e.code() == 404);
  }
  srv.stop();
  t.join();
}

TEST_CASE("http backend: unreachable host raises after bounded retries") {
  BackendConfig cfg;
  cfg.kind = BackendConfig::Kind::http_chat;
  cfg.url = "http://127.0.0.1:1/v1/chat/completions";  // nothing listens on port 1
  cfg.max_retries = 1;
  cfg.timeout_s = 0.2;
  cfg.backoff_base_s = 0.01;
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(complete(prompt_with_accel(std::array<double, 26>{}), cfg), Error);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  // Bounded latency: timeout_s * (max_retries + 1) plus the backoff budget.
  CHECK(elapsed < 0.2 * 2 + 0.02 + 1.0);
}

TEST_CASE("mock backend answers summary prompts deterministically") {
  std::vector<logbook::ActivityLogEntry> entries = {
      fixture::entry_at(1700000000, Activity::sitting),
      fixture::entry_at(1700000120, Activity::sitting),
      fixture::entry_at(1700000240, Activity::walking),
  };
  const auto p = prompt::build_summary_prompt(entries, 2.0);
  Backend backend(BackendConfig{}, two_label_model());
  const std::string a = backend.complete(p);
  const std::string b = backend.complete(p);
  CHECK(a == b);
  CHECK(a.find("3 log entries") != std::string::npos);
  CHECK(a.find("sitting") != std::string::npos);
}
