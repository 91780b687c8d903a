#pragma once
// Closed activity vocabulary shared by inference, logging and evaluation.

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace dailylog {

enum class Activity {
  lying,
  sitting,
  standing,
  walking,
  ascending_stairs,
  descending_stairs,
  jogging,
  biking,
  unknown,
};

inline const char* activity_name(Activity a) {
  switch (a) {
    case Activity::lying: return "lying";
    case Activity::sitting: return "sitting";
    case Activity::standing: return "standing";
    case Activity::walking: return "walking";
    case Activity::ascending_stairs: return "ascending_stairs";
    case Activity::descending_stairs: return "descending_stairs";
    case Activity::jogging: return "jogging";
    case Activity::biking: return "biking";
    case Activity::unknown: return "unknown";
  }
  return "unknown";
}

// The eight concrete labels (excludes unknown).
inline const std::array<Activity, 8>& activity_vocabulary() {
  static const std::array<Activity, 8> vocab = {
      Activity::lying,   Activity::sitting,          Activity::standing,
      Activity::walking, Activity::ascending_stairs, Activity::descending_stairs,
      Activity::jogging, Activity::biking,
  };
  return vocab;
}

inline std::optional<Activity> activity_from_name(std::string_view name) {
  for (Activity a : activity_vocabulary())
    if (name == activity_name(a)) return a;
  if (name == "unknown") return Activity::unknown;
  return std::nullopt;
}

}  // namespace dailylog
