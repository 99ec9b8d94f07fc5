#pragma once

#include <algorithm>
#include <cstdio>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "grainfield/direction.hpp"

namespace grainfield {

enum class Layer { L1, L2, L3 };

inline std::string to_string(Layer l) {
  switch (l) {
    case Layer::L1: return "L1";
    case Layer::L2: return "L2";
    case Layer::L3: return "L3";
  }
  return "?";
}

inline Layer layer_for_elevation(double elevation_deg) {
  if (elevation_deg == 0.0) return Layer::L1;
  if (elevation_deg == 30.0) return Layer::L2;
  if (elevation_deg >= 60.0) return Layer::L3;
  throw ParameterError("elevation " + std::to_string(elevation_deg) +
                       " does not belong to any layer (0, 30, >= 60)");
}

struct Speaker {
  std::string name;
  Direction direction;
  Layer layer;
};

class SpeakerLayout {
 public:
  SpeakerLayout() = default;
  explicit SpeakerLayout(std::vector<Speaker> speakers) : speakers_(std::move(speakers)) {
    std::set<std::string> names;
    for (const auto& s : speakers_) {
      if (!names.insert(s.name).second) {
        throw ParameterError("duplicate loudspeaker name '" + s.name + "'");
      }
      if (layer_for_elevation(s.direction.elevation_deg()) != s.layer) {
        throw ParameterError("loudspeaker '" + s.name + "' has layer tag " +
                             to_string(s.layer) + " inconsistent with its elevation");
      }
    }
  }

  const std::vector<Speaker>& speakers() const noexcept { return speakers_; }
  std::size_t size() const noexcept { return speakers_.size(); }

  std::vector<Direction> directions() const {
    std::vector<Direction> out;
    for (const auto& s : speakers_) out.push_back(s.direction);
    return out;
  }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < speakers_.size(); ++i) {
      if (speakers_[i].name == name) return i;
    }
    throw ParameterError("no loudspeaker named '" + std::string(name) + "'");
  }

 private:
  std::vector<Speaker> speakers_;
};

// 25-channel hemisphere: 12 at 0 deg (30 deg spacing from 0), 8 at 30 deg
// (45 deg spacing from 22.5), 4 at 60 deg (90 deg spacing from 45), zenith.
inline SpeakerLayout builtin_layout_cube25() {
  std::vector<Speaker> s;
  int index = 1;
  auto add = [&](double az, double el) {
    char name[8];
    std::snprintf(name, sizeof name, "ch%02d", index++);
    Direction d(az, el);
    s.push_back({name, d, layer_for_elevation(d.elevation_deg())});
  };
  for (int i = 0; i < 12; ++i) add(30.0 * i, 0.0);
  for (int i = 0; i < 8; ++i) add(22.5 + 45.0 * i, 30.0);
  for (int i = 0; i < 4; ++i) add(45.0 + 90.0 * i, 60.0);
  add(0.0, 90.0);
  return SpeakerLayout(std::move(s));
}

// A named set of render targets. `labels` are loudspeaker names when the
// subset was drawn from a layout, otherwise generated direction labels.
struct DirectionSubset {
  std::string name;
  std::vector<std::string> labels;
  std::vector<Direction> directions;

  std::size_t size() const noexcept { return directions.size(); }
  bool empty() const noexcept { return directions.empty(); }
};

inline const std::vector<std::string>& subset_names() {
  static const std::vector<std::string> names = {"SP",   "QP",   "L1",     "L2",  "L3",
                                                 "L1L2", "L2L3", "L1L2L3", "ZEN", "RING360"};
  return names;
}

namespace detail {
inline DirectionSubset from_directions(std::string name, std::vector<Direction> dirs) {
  DirectionSubset out{std::move(name), {}, std::move(dirs)};
  for (const auto& d : out.directions) out.labels.push_back(direction_label(d));
  return out;
}
}  // namespace detail

// Resolves a subset name. Layer subsets (L1, L2L3, ...) take their members from
// `layout` in layout order; SP, QP, ZEN and RING360 are fixed direction sets.
inline DirectionSubset make_subset(std::string_view name, const SpeakerLayout& layout) {
  if (name == "SP") return detail::from_directions("SP", {Direction(45, 0), Direction(-45, 0)});
  if (name == "QP") {
    return detail::from_directions(
        "QP", {Direction(45, 0), Direction(-45, 0), Direction(135, 0), Direction(-135, 0)});
  }
  if (name == "ZEN") return detail::from_directions("ZEN", {Direction(0, 90)});
  if (name == "RING360") {
    std::vector<Direction> ring;
    for (int i = 0; i < 360; ++i) ring.emplace_back(static_cast<double>(i), 0.0);
    return detail::from_directions("RING360", std::move(ring));
  }
  std::set<Layer> layers;
  std::string_view rest = name;
  while (!rest.empty()) {
    if (rest.size() >= 2 && rest[0] == 'L' && rest[1] >= '1' && rest[1] <= '3') {
      const Layer l = static_cast<Layer>(rest[1] - '1');
      if (!layers.empty() && static_cast<int>(l) <= static_cast<int>(*layers.rbegin())) break;
      layers.insert(l);
      rest.remove_prefix(2);
    } else {
      break;
    }
  }
  const auto& known = subset_names();
  if (!rest.empty() || layers.empty() ||
      std::find(known.begin(), known.end(), name) == known.end()) {
    throw ParameterError("unknown direction subset '" + std::string(name) + "'");
  }
  DirectionSubset out{std::string(name), {}, {}};
  for (const auto& s : layout.speakers()) {
    if (layers.count(s.layer)) {
      out.labels.push_back(s.name);
      out.directions.push_back(s.direction);
    }
  }
  if (out.empty()) {
    throw ParameterError("subset '" + std::string(name) + "' is empty on this layout");
  }
  return out;
}

inline std::size_t nearest_direction(const SpeakerLayout& layout, const Direction& target) {
  const auto dirs = layout.directions();
  return nearest_direction(std::span<const Direction>(dirs), target);
}

inline std::size_t nearest_direction(const DirectionSubset& subset, const Direction& target) {
  return nearest_direction(std::span<const Direction>(subset.directions), target);
}

}  // namespace grainfield
