#pragma once
// Reverse geocoding: a pluggable provider interface with an HTTP client and
// an offline gazetteer, plus beacon-based refinement and an LRU result cache.
//
// Gazetteer CSV columns: lat,lon,street,district,city,country,place_type
// (an optional header row starting with "lat" is skipped).

#include <cmath>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dailylog/common.hpp"
#include "dailylog/ingest.hpp"

namespace dailylog::geoloc {

using json = nlohmann::json;
using ingest::GeoFix;

class ProviderError : public Error {
 public:
  using Error::Error;
};

class NoCoverage : public Error {
 public:
  using Error::Error;
};

struct StructuredAddress {
  std::string street;
  std::string district;
  std::string city;
  std::string country;
  std::string place_type;
  std::string source;  // "provider" | "offline"; empty for hand-built values

  bool empty() const {
    return street.empty() && district.empty() && city.empty() && country.empty();
  }

  // "street, district, city, country (place_type)" with empty parts skipped.
  std::string display() const {
    std::string out;
    for (const std::string* part : {&street, &district, &city, &country}) {
      if (part->empty()) continue;
      if (!out.empty()) out += ", ";
      out += *part;
    }
    if (out.empty()) out = "unknown";
    if (!place_type.empty()) out += " (" + place_type + ")";
    return out;
  }

  bool operator==(const StructuredAddress& o) const = default;
};

inline void to_json(json& j, const StructuredAddress& a) {
  j = json{{"street", a.street},   {"district", a.district},
           {"city", a.city},       {"country", a.country},
           {"place_type", a.place_type}};
  if (!a.source.empty()) j["source"] = a.source;
}

inline void from_json(const json& j, StructuredAddress& a) {
  a.street = j.value("street", "");
  a.district = j.value("district", "");
  a.city = j.value("city", "");
  a.country = j.value("country", "");
  a.place_type = j.value("place_type", "");
  a.source = j.value("source", "");
}

struct BeaconInfo {
  std::string building;
  int floor = 0;
  std::string room;
};

// Keyed by Wi-Fi SSID or Bluetooth MAC; std::map keeps matches deterministic.
using BeaconMap = std::map<std::string, BeaconInfo>;

constexpr double kEarthRadiusM = 6371000.0;

inline double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  const double rad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * rad;
  const double dlon = (lon2 - lon1) * rad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) *
                       std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

inline void validate_fix(const GeoFix& fix) {
  if (fix.lat < -90.0 || fix.lat > 90.0)
    throw Error("latitude " + fmt_compact(fix.lat) + " outside [-90, 90]");
  if (fix.lon < -180.0 || fix.lon > 180.0)
    throw Error("longitude " + fmt_compact(fix.lon) + " outside [-180, 180]");
}

// ---------------------------------------------------------------------------
// Providers

class GeocodeProvider {
 public:
  virtual ~GeocodeProvider() = default;
  virtual StructuredAddress reverse(const GeoFix& fix) = 0;
};

struct GazetteerEntry {
  double lat = 0.0, lon = 0.0;
  StructuredAddress address;
};

class Gazetteer {
 public:
  Gazetteer() = default;

  static Gazetteer from_csv(std::string_view text) {
    Gazetteer g;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty()) continue;
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
      if (lineno == 1 && !cells.empty() && trim(cells[0]) == "lat") continue;
      if (cells.size() != 7)
        throw Error("gazetteer line " + std::to_string(lineno) + ": expected 7 columns, got " +
                    std::to_string(cells.size()));
      GazetteerEntry e;
      try {
        e.lat = std::stod(cells[0]);
        e.lon = std::stod(cells[1]);
      } catch (...) {
        throw Error("gazetteer line " + std::to_string(lineno) + ": bad coordinates");
      }
      e.address.street = trim(cells[2]);
      e.address.district = trim(cells[3]);
      e.address.city = trim(cells[4]);
      e.address.country = trim(cells[5]);
      e.address.place_type = trim(cells[6]);
      e.address.source = "offline";
      g.entries_.push_back(std::move(e));
    }
    return g;
  }

  const std::vector<GazetteerEntry>& entries() const { return entries_; }

  // Nearest entry within radius_m (haversine); NoCoverage beyond it.
  StructuredAddress lookup(const GeoFix& fix, double radius_m = 250.0) const {
    validate_fix(fix);
    if (entries_.empty()) throw NoCoverage("gazetteer is empty");
    double best = HUGE_VAL;
    const GazetteerEntry* hit = nullptr;
    for (const auto& e : entries_) {
      const double d = haversine_m(fix.lat, fix.lon, e.lat, e.lon);
      if (d < best) {
        best = d;
        hit = &e;
      }
    }
    if (!hit || best > radius_m)
      throw NoCoverage("no gazetteer entry within " + fmt_compact(radius_m) + " m");
    return hit->address;
  }

 private:
  std::vector<GazetteerEntry> entries_;
};

class GazetteerProvider : public GeocodeProvider {
 public:
  explicit GazetteerProvider(Gazetteer g, double radius_m = 250.0)
      : gazetteer_(std::move(g)), radius_m_(radius_m) {}

  StructuredAddress reverse(const GeoFix& fix) override {
    return gazetteer_.lookup(fix, radius_m_);
  }

  const Gazetteer& gazetteer() const { return gazetteer_; }

 private:
  Gazetteer gazetteer_;
  double radius_m_;
};

// ---------------------------------------------------------------------------
// Cached reverse geocoder with offline fallback

class ReverseGeocoder {
 public:
  ReverseGeocoder(std::shared_ptr<GeocodeProvider> provider,
                  std::shared_ptr<GeocodeProvider> fallback = nullptr,
                  std::size_t cache_capacity = 4096)
      : provider_(std::move(provider)),
        fallback_(std::move(fallback)),
        capacity_(cache_capacity) {}

  // Provider result, falling back to the offline provider on failure. Results
  // are cached by (lat, lon) rounded to 4 decimals (~11 m).
  StructuredAddress resolve(const GeoFix& fix) {
    validate_fix(fix);
    const auto key = cache_key(fix);
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (auto it = cache_.find(key); it != cache_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second.second);
        return it->second.first;
      }
    }
    StructuredAddress addr;
    try {
      if (!provider_) throw ProviderError("no geocode provider configured");
      addr = provider_->reverse(fix);
      if (addr.source.empty()) addr.source = "provider";
    } catch (const Error&) {
      if (!fallback_) throw;
      addr = fallback_->reverse(fix);  // NoCoverage propagates
      addr.source = "offline";
    }
    if (addr.empty() && addr.place_type.empty())
      throw NoCoverage("provider returned an empty address");
    std::lock_guard<std::mutex> lock(mu_);
    insert_locked(key, addr);
    return addr;
  }

  std::size_t cache_size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.size();
  }

 private:
  using Key = std::pair<long long, long long>;

  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return std::hash<long long>()(k.first * 2000003LL + k.second);
    }
  };

  static Key cache_key(const GeoFix& fix) {
    return {llround(fix.lat * 1e4), llround(fix.lon * 1e4)};
  }

  void insert_locked(const Key& key, const StructuredAddress& addr) {
    if (auto it = cache_.find(key); it != cache_.end()) {
      it->second.first = addr;
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return;
    }
    lru_.push_front(key);
    cache_[key] = {addr, lru_.begin()};
    while (cache_.size() > capacity_) {
      cache_.erase(lru_.back());
      lru_.pop_back();
    }
  }

  std::shared_ptr<GeocodeProvider> provider_;
  std::shared_ptr<GeocodeProvider> fallback_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  std::list<Key> lru_;
  std::unordered_map<Key, std::pair<StructuredAddress, std::list<Key>::iterator>, KeyHash> cache_;
};

// ---------------------------------------------------------------------------
// Beacon refinement

// Appends building/floor/room context to place_type when an observed SSID or
// MAC is known; the first match in sorted key order wins. Street, district,
// city and country are never touched.
inline StructuredAddress refine_with_beacons(StructuredAddress addr, const GeoFix& fix,
                                             const BeaconMap& beacons) {
  if (beacons.empty()) return addr;
  for (const auto& [key, info] : beacons) {
    const bool seen =
        std::find(fix.wifi_ssids.begin(), fix.wifi_ssids.end(), key) != fix.wifi_ssids.end() ||
        std::find(fix.bt_macs.begin(), fix.bt_macs.end(), key) != fix.bt_macs.end();
    if (!seen) continue;
    std::string detail;
    if (!info.building.empty()) detail = "Building " + info.building + ", ";
    detail += "floor " + std::to_string(info.floor);
    if (!info.room.empty()) detail += ", room " + info.room;
    if (addr.place_type.empty())
      addr.place_type = detail;
    else
      addr.place_type += "; " + detail;
    return addr;
  }
  return addr;
}

}  // namespace dailylog::geoloc
