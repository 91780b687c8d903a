#pragma once
// Text-generation backends: an HTTP client speaking the chat-completions JSON
// shape and a deterministic offline mock that names the nearest centroid of
// the accelerometer feature vector. Responses are parsed back into structured
// activity inferences via the Output Format line schema plus a synonym table.

#include <array>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dailylog/activity.hpp"
#include "dailylog/common.hpp"
#include "dailylog/promptgen.hpp"

namespace dailylog::infer {

using json = nlohmann::json;

class Timeout : public Error {
 public:
  using Error::Error;
};

class HttpStatus : public Error {
 public:
  HttpStatus(int code, const std::string& body)
      : Error("HTTP status " + std::to_string(code) +
              (body.empty() ? "" : ": " + body.substr(0, 200))),
        code_(code) {}
  int code() const { return code_; }

 private:
  int code_ = 0;
};

class BadResponseShape : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class FeatureParseError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Configuration

struct BackendConfig {
  enum class Kind { http_chat, mock };

  Kind kind = Kind::mock;
  std::string url;         // required iff kind == http_chat
  std::string model_name = "mock-centroid";
  double timeout_s = 30.0;
  int max_retries = 2;
  std::string mock_model_path;  // centroid model JSON, required iff kind == mock
  double backoff_base_s = 0.1;

  void validate() const {
    if (kind == Kind::http_chat && url.empty())
      throw Error("backend.url is required for the http_chat backend");
    if (kind == Kind::mock && mock_model_path.empty())
      throw Error("backend.mock_model_path is required for the mock backend");
    if (timeout_s <= 0) throw Error("backend.timeout_s must be > 0");
    if (max_retries < 0) throw Error("backend.max_retries must be >= 0");
  }
};

inline void to_json(json& j, const BackendConfig& c) {
  j = json{{"kind", c.kind == BackendConfig::Kind::http_chat ? "http_chat" : "mock"},
           {"url", c.url},
           {"model_name", c.model_name},
           {"timeout_s", c.timeout_s},
           {"max_retries", c.max_retries},
           {"mock_model_path", c.mock_model_path}};
}

inline void from_json(const json& j, BackendConfig& c) {
  const std::string kind = j.value("kind", "mock");
  if (kind == "http_chat")
    c.kind = BackendConfig::Kind::http_chat;
  else if (kind == "mock")
    c.kind = BackendConfig::Kind::mock;
  else
    throw Error("backend.kind must be \"http_chat\" or \"mock\"");
  c.url = j.value("url", "");
  c.model_name = j.value("model_name", "mock-centroid");
  c.timeout_s = j.value("timeout_s", 30.0);
  c.max_retries = j.value("max_retries", 2);
  c.mock_model_path = j.value("mock_model_path", "");
  c.backoff_base_s = j.value("backoff_base_s", 0.1);
}

// ---------------------------------------------------------------------------
// Synonym table (versioned data, not code)

struct SynonymTable {
  std::map<std::string, Activity> entries;  // normalized phrase -> activity
  std::string version = "synonyms.v1";

  // Lowercase; underscores/hyphens become spaces; runs of spaces collapse;
  // enclosing punctuation trimmed.
  static std::string normalize(std::string_view phrase) {
    std::string out;
    out.reserve(phrase.size());
    for (char ch : phrase) {
      char c = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      if (c == '_' || c == '-') c = ' ';
      if (std::isalnum(static_cast<unsigned char>(c)) || c == ' ') out.push_back(c);
    }
    std::string collapsed;
    for (char c : out) {
      if (c == ' ' && (collapsed.empty() || collapsed.back() == ' ')) continue;
      collapsed.push_back(c);
    }
    while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
    return collapsed;
  }

  static SynonymTable from_json(const json& j) {
    SynonymTable t;
    if (j.contains("version")) t.version = j["version"].get<std::string>();
    const json& table = j.contains("synonyms") ? j["synonyms"] : j;
    for (const auto& [label, list] : table.items()) {
      if (label == "version") continue;
      const auto act = activity_from_name(label);
      if (!act) throw Error("synonym table labels unknown activity \"" + label + "\"");
      for (const auto& phrase : list) t.entries[normalize(phrase.get<std::string>())] = *act;
    }
    if (t.entries.empty()) throw Error("synonym table is empty");
    return t;
  }

  static SynonymTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open synonym table: " + path);
    json j;
    in >> j;
    return from_json(j);
  }

  // Mirrors data/synonyms.v1.json.
  static const SynonymTable& builtin_v1() {
    static const SynonymTable table = from_json(json::parse(R"JSON({
      "version": "synonyms.v1",
      "synonyms": {
        "lying": ["lying", "lying down", "lie", "lie down", "laying", "laying down", "lying in bed", "reclining", "asleep", "sleeping"],
        "sitting": ["sitting", "sit", "sitting down", "seated"],
        "standing": ["standing", "stand", "standing still", "standing up"],
        "walking": ["walking", "walk", "strolling", "stroll", "on foot"],
        "ascending_stairs": ["ascending_stairs", "ascending stairs", "climbing stairs", "walking upstairs", "upstairs", "going upstairs", "stairs up", "climbing up stairs", "stairs", "stair activities", "taking the stairs"],
        "descending_stairs": ["descending_stairs", "descending stairs", "walking downstairs", "downstairs", "going downstairs", "stairs down", "climbing down stairs"],
        "jogging": ["jogging", "jog", "running", "run"],
        "biking": ["biking", "bike", "cycling", "cycle", "riding a bike", "bicycling"]
      }
    })JSON"));
    return table;
  }

  std::optional<Activity> lookup(std::string_view phrase) const {
    const auto it = entries.find(normalize(phrase));
    if (it == entries.end()) return std::nullopt;
    return it->second;
  }

  // Word-boundary scan; longer synonyms win so "walking upstairs" beats
  // "walking".
  std::optional<Activity> scan(std::string_view text) const {
    const std::string hay = " " + normalize(text) + " ";
    std::size_t best_len = 0;
    std::optional<Activity> best;
    for (const auto& [phrase, act] : entries) {
      if (phrase.size() < best_len) continue;
      const std::string needle = " " + phrase + " ";
      if (hay.find(needle) != std::string::npos && phrase.size() > best_len) {
        best_len = phrase.size();
        best = act;
      }
    }
    return best;
  }
};

// ---------------------------------------------------------------------------
// Structured inference + response parsing

struct ActivityInference {
  Activity activity = Activity::unknown;
  std::string scene;
  std::string raw_text;
  bool parse_ok = false;
};

inline std::string render_schema_line(const std::string& datetime, const std::string& location,
                                      Activity activity, const std::string& scene) {
  return "Date-time: " + datetime + "; location information: " + location +
         "; activity category: " + activity_name(activity) + "; scenario: " + scene;
}

namespace detail {

// Value of "<field>:" up to the next ';' or end of line, case-insensitive.
inline std::optional<std::string> extract_field(const std::string& text, std::string_view field) {
  const std::string needle = std::string(field) + ":";
  const std::size_t at = find_ci(text, needle);
  if (at == std::string::npos) return std::nullopt;
  std::size_t start = at + needle.size();
  std::size_t end = start;
  while (end < text.size() && text[end] != ';' && text[end] != '\n') ++end;
  return trim(text.substr(start, end - start));
}

}  // namespace detail

// Degrades to activity = unknown / parse_ok = false instead of throwing.
inline ActivityInference parse_context_response(const std::string& text,
                                                const SynonymTable& synonyms =
                                                    SynonymTable::builtin_v1()) {
  ActivityInference out;
  out.raw_text = text;
  const auto category = detail::extract_field(text, "activity category");
  const auto scenario = detail::extract_field(text, "scenario");
  if (scenario) out.scene = *scenario;
  if (category) {
    auto act = synonyms.lookup(*category);
    if (!act) act = synonyms.scan(*category);
    if (act) {
      out.activity = *act;
      out.parse_ok = true;
      return out;
    }
  }
  // No usable schema line: fall back to scanning the whole text.
  if (const auto act = synonyms.scan(text)) out.activity = *act;
  out.parse_ok = false;
  return out;
}

// ---------------------------------------------------------------------------
// Centroid model (deterministic test double)

struct CentroidModel {
  std::map<std::string, std::array<double, 26>> centroids;
  std::array<double, 26> scale{};  // per-dimension normalization

  // File schema: JSON object of {label: [26 numbers]}. Distances are plain
  // Euclidean unless an optional "_scale" entry (same 26-array shape) supplies
  // per-dimension divisors.
  static CentroidModel from_json(const json& j) {
    CentroidModel m;
    m.scale.fill(1.0);
    for (const auto& [label, arr] : j.items()) {
      if (!arr.is_array() || arr.size() != 26)
        throw Error("centroid \"" + label + "\" must be an array of 26 numbers");
      std::array<double, 26> v{};
      for (std::size_t i = 0; i < 26; ++i) v[i] = arr[i].get<double>();
      if (label == "_scale") {
        m.scale = v;
        for (double& s : m.scale)
          if (s <= 0) s = 1.0;
      } else {
        m.centroids[label] = v;
      }
    }
    if (m.centroids.size() < 2) throw Error("centroid model needs at least 2 labels");
    return m;
  }

  static CentroidModel load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open centroid model: " + path);
    json j;
    in >> j;
    return from_json(j);
  }

  json to_json() const {
    json j = json::object();
    for (const auto& [label, c] : centroids) j[label] = std::vector<double>(c.begin(), c.end());
    return j;
  }

  // Nearest centroid by normalized Euclidean distance; ties break to the
  // lexicographically smaller label (map order makes this the first hit).
  std::string nearest(const std::array<double, 26>& v) const {
    double best = HUGE_VAL;
    std::string label;
    for (const auto& [name, c] : centroids) {
      double d = 0;
      for (std::size_t i = 0; i < 26; ++i) {
        const double x = (v[i] - c[i]) / scale[i];
        d += x * x;
      }
      if (d < best) {
        best = d;
        label = name;
      }
    }
    return label;
  }
};

// ---------------------------------------------------------------------------
// Mock inference

namespace detail {

// Reads "Date-time: X | Location: Y" from the Feature Explanation line.
inline void parse_prompt_context(const std::string& rendered, std::string& datetime,
                                 std::string& location) {
  datetime = "unknown";
  location = "unknown";
  std::istringstream in(rendered);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("Date-time: ", 0) != 0) continue;
    const std::size_t sep = line.find(" | Location: ");
    if (sep == std::string::npos) continue;
    datetime = trim(line.substr(11, sep - 11));
    location = trim(line.substr(sep + 13));
    return;
  }
}

inline std::string scene_from_location(const std::string& location) {
  const std::size_t open = location.rfind('(');
  const std::size_t close = location.rfind(')');
  if (open != std::string::npos && close != std::string::npos && close > open + 1)
    return trim(location.substr(open + 1, close - open - 1));
  return "unspecified";
}

}  // namespace detail

// Deterministic narrative for summary prompts: counts the serialized entries
// embedded in the prompt and restates distribution, places and conditions.
inline std::string mock_summarize(const prompt::Prompt& p) {
  std::map<std::string, std::size_t> activities;
  std::vector<std::string> places;
  std::size_t entries = 0;
  std::istringstream in(p.rendered);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '{') continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("activity")) continue;
    ++entries;
    ++activities[j["activity"].get<std::string>()];
    if (j.contains("address")) {
      std::string place = j["address"].value("city", "");
      if (place.empty()) place = j["address"].value("street", "");
      if (!place.empty() && (places.empty() || places.back() != place)) places.push_back(place);
    }
  }
  if (entries == 0) return "No activity entries were provided for this period.";
  std::string out = "Across " + std::to_string(entries) + " log entries the user was mostly ";
  std::string top;
  std::size_t top_count = 0;
  for (const auto& [label, c] : activities)
    if (c > top_count) {
      top = label;
      top_count = c;
    }
  out += top + " (" + std::to_string(top_count) + " entries).";
  if (!places.empty()) {
    out += " Locations visited:";
    for (std::size_t i = 0; i < places.size(); ++i) out += (i ? ", " : " ") + places[i];
    out += ".";
  }
  out += " Environmental and physiological readings stayed within the recorded bands.";
  return out;
}

// Pure function of (prompt bytes, model): recovers the accelerometer
// 26-vector from the feature section and answers in the Output Format schema.
inline std::string mock_infer(const prompt::Prompt& p, const CentroidModel& m) {
  prompt::PromptFeatures feats;
  try {
    feats = prompt::parse_prompt_features(p.rendered);
  } catch (const Error& e) {
    throw FeatureParseError(e.what());
  }
  const auto it = feats.imu.find("accel");
  if (it == feats.imu.end())
    throw FeatureParseError("prompt carries no accelerometer feature vector");
  if (it->second.size() != 26)
    throw FeatureParseError("accelerometer vector must have 26 values, got " +
                            std::to_string(it->second.size()));
  std::array<double, 26> v{};
  for (std::size_t i = 0; i < 26; ++i) v[i] = it->second[i];
  const std::string label = m.nearest(v);
  std::string datetime, location;
  detail::parse_prompt_context(p.rendered, datetime, location);
  const auto act = SynonymTable::builtin_v1().lookup(label);
  return "Date-time: " + datetime + "; location information: " + location +
         "; activity category: " + (act ? activity_name(*act) : label) +
         "; scenario: " + detail::scene_from_location(location);
}

// ---------------------------------------------------------------------------
// Completion dispatch

namespace detail {

struct ParsedUrl {
  std::string host_port;  // scheme://host:port
  std::string path;
};

inline ParsedUrl parse_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw Error("backend url must start with http://");
  const std::size_t path_at = url.find('/', scheme + 3);
  ParsedUrl out;
  if (path_at == std::string::npos) {
    out.host_port = url;
    out.path = "/v1/chat/completions";
  } else {
    out.host_port = url.substr(0, path_at);
    out.path = url.substr(path_at);
  }
  return out;
}

inline std::string http_complete(const prompt::Prompt& p, const BackendConfig& cfg) {
  const ParsedUrl url = parse_url(cfg.url);
  const json body = {
      {"model", cfg.model_name},
      {"messages", json::array({json{{"role", "user"}, {"content", p.rendered}}})},
      {"temperature", 0},
  };
  const std::string payload = body.dump();
  std::string last_error;
  bool last_was_timeout = false;
  int last_status = 0;
  std::string last_body;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      const double backoff = cfg.backoff_base_s * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
    }
    httplib::Client client(url.host_port);
    const auto timeout = std::chrono::duration<double>(cfg.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::milliseconds>(timeout));
    auto res = client.Post(url.path, payload, "application/json");
    if (!res) {
      last_was_timeout = res.error() == httplib::Error::ConnectionTimeout ||
                         res.error() == httplib::Error::Read ||
                         res.error() == httplib::Error::Write;
      last_error = httplib::to_string(res.error());
      continue;  // transport error: retry
    }
    if (res->status >= 500) {
      last_status = res->status;
      last_body = res->body;
      last_error.clear();
      continue;  // server error: retry
    }
    if (res->status != 200) throw HttpStatus(res->status, res->body);
    const json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) throw BadResponseShape("response body is not JSON");
    if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty())
      throw BadResponseShape("response has no choices");
    const json& choice = reply["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string())
      throw BadResponseShape("response choice has no message content");
    return choice["message"]["content"].get<std::string>();
  }
  if (last_status != 0) throw HttpStatus(last_status, last_body);
  if (last_was_timeout) throw Timeout("backend timed out after retries: " + last_error);
  throw TransportError("backend unreachable after retries: " + last_error);
}

}  // namespace detail

namespace detail {

inline bool looks_like_context_prompt(const prompt::Prompt& p) {
  return p.rendered.find("\nIMU ") != std::string::npos ||
         p.rendered.rfind("IMU ", 0) == 0;
}

inline std::string mock_complete(const prompt::Prompt& p, const CentroidModel& m) {
  if (looks_like_context_prompt(p)) return mock_infer(p, m);
  return mock_summarize(p);
}

}  // namespace detail

// Single-shot completion. http_chat posts the chat-completions request with
// temperature 0 and returns the first choice's content, retrying transport
// and 5xx failures with exponential backoff; mock routes to mock_infer (or
// the deterministic summarizer for prompts without feature vectors).
inline std::string complete(const prompt::Prompt& p, const BackendConfig& cfg) {
  cfg.validate();
  if (cfg.kind == BackendConfig::Kind::http_chat) return detail::http_complete(p, cfg);
  return detail::mock_complete(p, CentroidModel::load(cfg.mock_model_path));
}

// Shareable backend handle. Caps concurrent in-flight requests and caches the
// mock's centroid model.
class Backend {
 public:
  explicit Backend(BackendConfig cfg, int max_in_flight = 4)
      : cfg_(std::move(cfg)), slots_(max_in_flight) {
    cfg_.validate();
    if (cfg_.kind == BackendConfig::Kind::mock)
      model_ = std::make_shared<CentroidModel>(CentroidModel::load(cfg_.mock_model_path));
  }

  // Mock backend over an in-memory model (no file needed).
  Backend(BackendConfig cfg, CentroidModel model, int max_in_flight = 4)
      : cfg_(std::move(cfg)),
        model_(std::make_shared<CentroidModel>(std::move(model))),
        slots_(max_in_flight) {
    cfg_.kind = BackendConfig::Kind::mock;
  }

  const BackendConfig& config() const { return cfg_; }

  std::string complete(const prompt::Prompt& p) {
    const Slot slot(slots_, mu_, cv_);
    if (cfg_.kind == BackendConfig::Kind::mock) return detail::mock_complete(p, *model_);
    return detail::http_complete(p, cfg_);
  }

 private:
  struct Slot {
    Slot(int& slots, std::mutex& mu, std::condition_variable& cv)
        : slots_(slots), mu_(mu), cv_(cv) {
      std::unique_lock<std::mutex> lock(mu_);
      cv_.wait(lock, [&] { return slots_ > 0; });
      --slots_;
    }
    ~Slot() {
      {
        std::lock_guard<std::mutex> lock(mu_);
        ++slots_;
      }
      cv_.notify_one();
    }
    int& slots_;
    std::mutex& mu_;
    std::condition_variable& cv_;
  };

  BackendConfig cfg_;
  std::shared_ptr<CentroidModel> model_;
  int slots_;
  std::mutex mu_;
  std::condition_variable cv_;
};

}  // namespace dailylog::infer
