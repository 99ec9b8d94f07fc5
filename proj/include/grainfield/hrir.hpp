#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "grainfield/direction.hpp"
#include "grainfield/wav.hpp"

namespace grainfield {

struct HrirEntry {
  Direction direction;
  std::vector<double> left;
  std::vector<double> right;
};

// Measured or modelled head-related impulse responses, one pair per direction.
class HrirSet {
 public:
  HrirSet(std::vector<HrirEntry> entries, int sample_rate)
      : entries_(std::move(entries)), sample_rate_(sample_rate) {
    if (sample_rate <= 0) throw ParameterError("HRIR sample rate must be positive");
    if (entries_.empty()) throw ParameterError("HRIR set needs at least one entry");
    ir_length_ = entries_.front().left.size();
    if (ir_length_ == 0) throw ParameterError("HRIRs must not be empty");
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.left.size() != ir_length_ || e.right.size() != ir_length_) {
        throw ParameterError("HRIR entry " + std::to_string(i) + " has a different length");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (entries_[j].direction == e.direction) {
          throw ParameterError("HRIR entries " + std::to_string(j) + " and " +
                               std::to_string(i) + " share direction " +
                               direction_label(e.direction));
        }
      }
    }
  }

  const std::vector<HrirEntry>& entries() const noexcept { return entries_; }
  const HrirEntry& operator[](std::size_t i) const { return entries_.at(i); }
  std::size_t size() const noexcept { return entries_.size(); }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t ir_length() const noexcept { return ir_length_; }

  std::vector<Direction> directions() const {
    std::vector<Direction> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.direction);
    return out;
  }

 private:
  std::vector<HrirEntry> entries_;
  int sample_rate_;
  std::size_t ir_length_ = 0;
};

inline std::size_t nearest_direction(const HrirSet& set, const Direction& target) {
  const auto dirs = set.directions();
  return nearest_direction(std::span<const Direction>(dirs), target);
}

// Manifest: {"sample_rate": int, "entries": [{"az", "el", "file"}]}, file paths
// relative to the manifest, each a 2-channel WAV.
inline HrirSet load_hrir_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open HRIR manifest: " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("HRIR manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.contains("sample_rate") || !doc.contains("entries") || !doc["entries"].is_array()) {
    throw DataError("HRIR manifest needs 'sample_rate' and an 'entries' array");
  }
  const int rate = doc["sample_rate"].get<int>();
  const auto base = path.parent_path();
  std::vector<HrirEntry> entries;
  std::size_t index = 0;
  for (const auto& item : doc["entries"]) {
    const std::string where = "HRIR entry " + std::to_string(index);
    if (!item.contains("az") || !item.contains("el") || !item.contains("file")) {
      throw DataError(where + ": needs 'az', 'el' and 'file'");
    }
    const auto file = base / item["file"].get<std::string>();
    if (!std::filesystem::exists(file)) {
      throw DataError(where + ": missing WAV " + file.string());
    }
    const AudioBuffer wav = read_wav(file);
    if (wav.channels() != 2) {
      throw DataError(where + " (" + file.string() + "): expected 2 channels, found " +
                      std::to_string(wav.channels()));
    }
    if (wav.sample_rate() != rate) {
      throw DataError(where + " (" + file.string() + "): sample rate " +
                      std::to_string(wav.sample_rate()) + " differs from manifest rate " +
                      std::to_string(rate));
    }
    HrirEntry e;
    e.direction = Direction(item["az"].get<double>(), item["el"].get<double>());
    e.left.assign(wav.channel(0).begin(), wav.channel(0).end());
    e.right.assign(wav.channel(1).begin(), wav.channel(1).end());
    entries.push_back(std::move(e));
    ++index;
  }
  try {
    return HrirSet(std::move(entries), rate);
  } catch (const ParameterError& e) {
    throw DataError(std::string("HRIR manifest ") + path.string() + ": " + e.what());
  }
}

// Writes one float-32 stereo WAV per entry next to `manifest_path`.
inline void write_hrir_manifest(const HrirSet& set, const std::filesystem::path& manifest_path) {
  const auto dir = manifest_path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  nlohmann::json doc;
  doc["sample_rate"] = set.sample_rate();
  doc["entries"] = nlohmann::json::array();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& e = set[i];
    char name[32];
    std::snprintf(name, sizeof name, "hrir_%04zu.wav", i);
    std::vector<std::vector<double>> chans = {e.left, e.right};
    write_wav(BasicAudioBuffer<double>(std::move(chans), set.sample_rate()), dir / name);
    doc["entries"].push_back(
        {{"az", e.direction.azimuth_deg()}, {"el", e.direction.elevation_deg()}, {"file", name}});
  }
  std::ofstream out(manifest_path);
  if (!out) throw DataError("cannot write HRIR manifest: " + manifest_path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace grainfield
