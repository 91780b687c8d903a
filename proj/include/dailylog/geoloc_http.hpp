#pragma once
// HTTP reverse-geocode provider. Wire shape (see docs/formats.md):
//   request:  POST <url>  {"lat": number, "lon": number}
//   response: 200 {"street": str, "district": str, "city": str,
//                  "country": str, "place_type": str}

#include <chrono>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dailylog/geoloc.hpp"

namespace dailylog::geoloc {

class HttpGeocodeProvider : public GeocodeProvider {
 public:
  explicit HttpGeocodeProvider(std::string url, double timeout_s = 10.0)
      : url_(std::move(url)), timeout_s_(timeout_s) {}

  StructuredAddress reverse(const GeoFix& fix) override {
    const std::size_t scheme = url_.find("://");
    if (scheme == std::string::npos) throw ProviderError("geocode url must start with http://");
    const std::size_t path_at = url_.find('/', scheme + 3);
    const std::string host = path_at == std::string::npos ? url_ : url_.substr(0, path_at);
    const std::string path = path_at == std::string::npos ? "/reverse" : url_.substr(path_at);
    httplib::Client client(host);
    const auto timeout = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::duration<double>(timeout_s_));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    const json body = {{"lat", fix.lat}, {"lon", fix.lon}};
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) throw ProviderError("geocode request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw ProviderError("geocode provider returned HTTP " + std::to_string(res->status));
    const json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object())
      throw ProviderError("geocode provider returned a non-JSON body");
    StructuredAddress addr = reply.get<StructuredAddress>();
    addr.source = "provider";
    return addr;
  }

 private:
  std::string url_;
  double timeout_s_;
};

}  // namespace dailylog::geoloc
