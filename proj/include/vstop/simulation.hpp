#ifndef VSTOP_SIMULATION_HPP
#define VSTOP_SIMULATION_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "vstop/core.hpp"

namespace vstop {

/// Recognition-noise parameters for synthetic clips. Noise is injected at
/// the recognition-result level: per-character substitution with softened
/// alternative rows, plus random insertions and deletions.
struct NoiseModel {
  double substitution_rate = 0.0;
  double insertion_rate = 0.0;
  double deletion_rate = 0.0;
  double confusion_temperature = 0.12;
  std::vector<char32_t> alphabet;
  std::uint64_t seed = 0;
  // Optional confusion hook; the default draws uniformly from the
  // alphabet minus the true character.
  std::function<char32_t(char32_t, std::mt19937_64&)> confusion;

  void validate() const {
    auto in01 = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!in01(substitution_rate) || !in01(insertion_rate) ||
        !in01(deletion_rate)) {
      throw std::invalid_argument("NoiseModel: rates must lie in [0, 1]");
    }
    if (confusion_temperature <= 0.0) {
      throw std::invalid_argument("NoiseModel: temperature must be positive");
    }
    if (alphabet.empty()) {
      throw std::invalid_argument("NoiseModel: empty alphabet");
    }
    for (char32_t c : alphabet) {
      if (c == kEpsilon) {
        throw std::invalid_argument("NoiseModel: alphabet contains epsilon");
      }
    }
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stream seed for (model seed, clip index, frame index); each frame gets
// an independent deterministic generator, so clips are reproducible
// regardless of evaluation order.
inline std::uint64_t frame_seed(std::uint64_t seed, std::uint64_t clip,
                                std::uint64_t frame) {
  return splitmix64(splitmix64(splitmix64(seed) ^ clip) ^ frame);
}

inline char32_t uniform_confusable(char32_t truth,
                                   const std::vector<char32_t>& alphabet,
                                   std::mt19937_64& rng) {
  if (alphabet.size() == 1) return alphabet.front();
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 2);
  std::size_t idx = pick(rng);
  const auto truth_pos =
      std::find(alphabet.begin(), alphabet.end(), truth) - alphabet.begin();
  if (idx >= static_cast<std::size_t>(truth_pos)) ++idx;
  if (idx >= alphabet.size()) idx = alphabet.size() - 1;
  return alphabet[idx];
}

/// Default confusion: recognizers make systematic errors, so a character
/// is usually mistaken for the same canonical look-alike (the next
/// character in the alphabet) and only sometimes for a random one.
inline char32_t default_confusable(char32_t truth,
                                   const std::vector<char32_t>& alphabet,
                                   std::mt19937_64& rng) {
  if (alphabet.size() == 1) return alphabet.front();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < 0.95) {
    const auto truth_pos =
        std::find(alphabet.begin(), alphabet.end(), truth) - alphabet.begin();
    return alphabet[(static_cast<std::size_t>(truth_pos) + 1) %
                    alphabet.size()];
  }
  return uniform_confusable(truth, alphabet, rng);
}

// Peak character gets a temperature-controlled weight close to 1 for small
// temperatures; the leftover mass is spread over up to three random
// alternates.
inline CharDistribution soften(char32_t peak, const NoiseModel& nm,
                               std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double spread = nm.confusion_temperature * unit(rng);
  const double peak_weight = 1.0 / (1.0 + spread);
  std::vector<CharDistribution::Entry> entries{{peak, peak_weight}};
  double rest = 1.0 - peak_weight;
  const std::size_t n_alt = std::min<std::size_t>(3, nm.alphabet.size());
  for (std::size_t k = 0; k < n_alt && rest > 0.0; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, nm.alphabet.size() - 1);
    const char32_t alt = nm.alphabet[pick(rng)];
    const double w = rest * unit(rng);
    if (w > 0.0) entries.emplace_back(alt, w);  // duplicates merge on construction
    rest -= w;
  }
  if (rest > 0.0) entries[0].second += rest;
  return CharDistribution(std::move(entries));
}

inline void maybe_insert(AlternativesMatrix& out, const NoiseModel& nm,
                         std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < nm.insertion_rate) {
    std::uniform_int_distribution<std::size_t> pick(0, nm.alphabet.size() - 1);
    out.positions.push_back(soften(nm.alphabet[pick(rng)], nm, rng));
  }
}

}  // namespace detail

/// One noisy per-frame recognition result for the given ground truth.
inline AlternativesMatrix simulate_frame(const std::u32string& truth,
                                         const NoiseModel& nm,
                                         std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AlternativesMatrix out;
  out.positions.reserve(truth.size());
  detail::maybe_insert(out, nm, rng);
  for (char32_t ch : truth) {
    if (unit(rng) < nm.deletion_rate) continue;
    // Both the true and the confused character produce softened rows: a
    // noisy recognizer is never fully certain. A zero substitution rate
    // means a noiseless recognizer and reproduces exact one-hot rows.
    if (nm.substitution_rate == 0.0) {
      out.positions.push_back(CharDistribution::one_hot(ch));
    } else if (unit(rng) < nm.substitution_rate) {
      const char32_t confused =
          nm.confusion ? nm.confusion(ch, rng)
                       : detail::default_confusable(ch, nm.alphabet, rng);
      out.positions.push_back(detail::soften(confused, nm, rng));
    } else {
      out.positions.push_back(detail::soften(ch, nm, rng));
    }
    detail::maybe_insert(out, nm, rng);
  }
  return out;
}

/// A whole synthetic clip; `clip_index` feeds the seed stream so distinct
/// clips draw independent noise.
inline ClipStream simulate_clip(const std::u32string& truth,
                                std::size_t n_frames, const NoiseModel& nm,
                                const std::string& clip_id = "sim",
                                std::uint64_t clip_index = 0,
                                const std::string& field_id = "field") {
  nm.validate();
  if (n_frames == 0) {
    throw std::invalid_argument("simulate_clip: n_frames must be positive");
  }
  ClipStream clip;
  clip.clip_id = clip_id;
  clip.field_id = field_id;
  clip.ground_truth = truth;
  clip.frames.reserve(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::mt19937_64 rng(detail::frame_seed(nm.seed, clip_index, f));
    clip.frames.push_back(simulate_frame(truth, nm, rng));
  }
  return clip;
}

/// Spec for a whole synthetic dataset: field texts of mixed lengths, one
/// noise level per clip drawn from `substitution_rates`.
struct DatasetSpec {
  std::size_t n_clips = 500;
  std::size_t n_frames = 30;
  std::size_t min_field_length = 4;
  std::size_t max_field_length = 15;
  std::vector<double> substitution_rates = {0.1, 0.2, 0.3};
  double insertion_rate = 0.002;
  double deletion_rate = 0.002;
  double confusion_temperature = 0.12;
  std::u32string alphabet = U"abcdefghijklmnopqrstuvwxyz0123456789";
};

/// Deterministic function of (spec, seed): per-clip draws (field text,
/// length, noise level) come from the same counter-based stream as the
/// frame noise.
inline std::vector<ClipStream> simulate_dataset(const DatasetSpec& spec,
                                                std::uint64_t seed) {
  if (spec.alphabet.empty() || spec.substitution_rates.empty() ||
      spec.min_field_length > spec.max_field_length) {
    throw std::invalid_argument("simulate_dataset: bad spec");
  }
  std::vector<ClipStream> out;
  out.reserve(spec.n_clips);
  for (std::size_t i = 0; i < spec.n_clips; ++i) {
    std::mt19937_64 rng(detail::frame_seed(seed, i, 0xC11F0000ULL));
    std::uniform_int_distribution<std::size_t> len_dist(spec.min_field_length,
                                                        spec.max_field_length);
    std::uniform_int_distribution<std::size_t> char_dist(
        0, spec.alphabet.size() - 1);
    std::uniform_int_distribution<std::size_t> rate_dist(
        0, spec.substitution_rates.size() - 1);
    std::u32string truth;
    const std::size_t len = len_dist(rng);
    for (std::size_t k = 0; k < len; ++k) {
      truth.push_back(spec.alphabet[char_dist(rng)]);
    }

    NoiseModel nm;
    nm.substitution_rate = spec.substitution_rates[rate_dist(rng)];
    nm.insertion_rate = spec.insertion_rate;
    nm.deletion_rate = spec.deletion_rate;
    nm.confusion_temperature = spec.confusion_temperature;
    nm.alphabet.assign(spec.alphabet.begin(), spec.alphabet.end());
    nm.seed = seed;
    out.push_back(simulate_clip(truth, spec.n_frames, nm,
                                "clip" + std::to_string(i), i));
  }
  return out;
}

}  // namespace vstop

#endif  // VSTOP_SIMULATION_HPP
