#ifndef VSTOP_DATASET_IO_HPP
#define VSTOP_DATASET_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vstop/core.hpp"

namespace vstop {

// Interchange format: UTF-8 JSON lines, one clip per line. A frame is a
// list of positions, a position a list of [label, weight] pairs. The gap
// symbol is encoded as "#E" and a literal '#' as "##" so the two never
// collide.

namespace detail {

inline std::string encode_label(char32_t label) {
  if (label == kEpsilon) return "#E";
  if (label == U'#') return "##";
  return utf8_encode(std::u32string(1, label));
}

inline char32_t decode_label(const std::string& token) {
  if (token == "#E") return kEpsilon;
  if (token == "##") return U'#';
  const std::u32string decoded = utf8_decode(token);
  if (decoded.size() != 1) {
    throw std::invalid_argument("label token is not a single code point: '" +
                                token + "'");
  }
  return decoded.front();
}

// Weights are serialized in decimal with 9 significant digits; the tiny
// round-trip drift is absorbed by renormalization on read.
inline double round_weight(double w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", w);
  return std::strtod(buf, nullptr);
}

inline nlohmann::ordered_json clip_to_json(const ClipStream& clip) {
  nlohmann::ordered_json j;
  j["clip_id"] = clip.clip_id;
  j["field_id"] = clip.field_id;
  j["ground_truth"] = utf8_encode(clip.ground_truth);
  auto& frames = j["frames"] = nlohmann::ordered_json::array();
  for (const auto& frame : clip.frames) {
    nlohmann::ordered_json jframe = nlohmann::ordered_json::array();
    for (const auto& pos : frame.positions) {
      nlohmann::ordered_json jpos = nlohmann::ordered_json::array();
      for (const auto& [label, w] : pos.entries()) {
        jpos.push_back({encode_label(label), round_weight(w)});
      }
      jframe.push_back(std::move(jpos));
    }
    frames.push_back(std::move(jframe));
  }
  return j;
}

inline ClipStream clip_from_json(const nlohmann::json& j) {
  ClipStream clip;
  clip.clip_id = j.at("clip_id").get<std::string>();
  clip.field_id = j.at("field_id").get<std::string>();
  clip.ground_truth = utf8_decode(j.at("ground_truth").get<std::string>());
  for (const auto& jframe : j.at("frames")) {
    AlternativesMatrix frame;
    std::size_t pos_idx = 0;
    for (const auto& jpos : jframe) {
      std::vector<CharDistribution::Entry> entries;
      for (const auto& jentry : jpos) {
        entries.emplace_back(decode_label(jentry.at(0).get<std::string>()),
                             jentry.at(1).get<double>());
      }
      try {
        frame.positions.emplace_back(std::move(entries));
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("clip '" + clip.clip_id + "' position " +
                                    std::to_string(pos_idx) + ": " + e.what());
      }
      ++pos_idx;
    }
    clip.frames.push_back(std::move(frame));
  }
  if (clip.frames.empty()) {
    throw std::invalid_argument("clip '" + clip.clip_id + "': no frames");
  }
  return clip;
}

}  // namespace detail

inline std::vector<ClipStream> read_dataset(std::istream& in) {
  std::vector<ClipStream> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(detail::clip_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return out;
}

inline std::vector<ClipStream> read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  try {
    return read_dataset(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

inline void write_dataset(const std::vector<ClipStream>& records,
                          std::ostream& out) {
  for (const auto& clip : records) {
    out << detail::clip_to_json(clip).dump() << '\n';
  }
}

inline void write_dataset(const std::vector<ClipStream>& records,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write_dataset(records, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Repeats the clip's frames cyclically (or truncates) to exactly
/// `target_len` frames.
inline ClipStream loop_clip(const ClipStream& clip, std::size_t target_len) {
  if (clip.frames.empty()) {
    throw std::invalid_argument("loop_clip: clip has no frames");
  }
  if (target_len == 0) {
    throw std::invalid_argument("loop_clip: target length must be positive");
  }
  ClipStream out = clip;
  out.frames.clear();
  out.frames.reserve(target_len);
  for (std::size_t i = 0; i < target_len; ++i) {
    out.frames.push_back(clip.frames[i % clip.frames.size()]);
  }
  return out;
}

}  // namespace vstop

#endif  // VSTOP_DATASET_IO_HPP
