#ifndef VSTOP_CORE_HPP
#define VSTOP_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vstop {

/// Gap symbol: "no character at this position". A regular member of the
/// alphabet for alignment and distance purposes, skipped when reading a
/// matrix out as plain text.
inline constexpr char32_t kEpsilon = U'\0';

/// Weight-sum violations up to this bound are silently renormalized on
/// construction; anything larger is rejected.
inline constexpr double kNormalizeTolerance = 1e-6;

/// Tolerance under which a distribution is considered exactly normalized.
inline constexpr double kWeightSumTolerance = 1e-9;

/// A single character position of a recognition result: a sparse
/// distribution over class labels. Entries are kept sorted by descending
/// weight, ties broken by ascending code point, so the top entry is the
/// argmax reading.
class CharDistribution {
public:
  using Entry = std::pair<char32_t, double>;

  CharDistribution() = default;

  /// Builds a distribution from (label, weight) pairs. Duplicate labels are
  /// merged. Weights must be nonnegative and sum to 1 within
  /// kNormalizeTolerance; small deviations are renormalized away.
  explicit CharDistribution(std::vector<Entry> entries) {
    for (const auto& [label, weight] : entries) {
      if (weight < 0.0) {
        throw std::invalid_argument("CharDistribution: negative weight");
      }
    }
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    for (const auto& e : entries) {
      if (!entries_.empty() && entries_.back().first == e.first) {
        entries_.back().second += e.second;
      } else if (e.second > 0.0) {
        entries_.push_back(e);
      }
    }
    double sum = 0.0;
    for (const auto& e : entries_) sum += e.second;
    if (entries_.empty() || std::abs(sum - 1.0) > kNormalizeTolerance) {
      throw std::invalid_argument(
          "CharDistribution: weights sum to " + std::to_string(sum));
    }
    for (auto& e : entries_) e.second /= sum;
    canonicalize();
  }

  static CharDistribution one_hot(char32_t label) {
    CharDistribution d;
    d.entries_ = {{label, 1.0}};
    return d;
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  double weight_of(char32_t label) const {
    for (const auto& [l, w] : entries_) {
      if (l == label) return w;
    }
    return 0.0;
  }

  /// Label of the heaviest entry; ties already resolved by the sort order.
  char32_t top_label() const {
    if (entries_.empty()) {
      throw std::logic_error("CharDistribution: empty distribution");
    }
    return entries_.front().first;
  }

  double top_weight() const {
    if (entries_.empty()) {
      throw std::logic_error("CharDistribution: empty distribution");
    }
    return entries_.front().second;
  }

  bool operator==(const CharDistribution& other) const = default;

private:
  void canonicalize() {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });
  }

  std::vector<Entry> entries_;
};

/// A recognized string in the extended model: one distribution per
/// character position. Zero positions encode the empty-string result.
struct AlternativesMatrix {
  std::vector<CharDistribution> positions;

  std::size_t length() const { return positions.size(); }
  bool empty() const { return positions.empty(); }

  bool operator==(const AlternativesMatrix& other) const = default;
};

/// Ordered per-frame observations of one text field plus its ground truth.
struct ClipStream {
  std::string clip_id;
  std::string field_id;
  std::u32string ground_truth;
  std::vector<AlternativesMatrix> frames;
};

/// Parameters of the stopping loss: per-observation cost c and the
/// next-result-modelling regularizer delta.
struct LossParams {
  double observation_cost = 0.0;
  double delta = 0.0;
};

enum class Verdict { Stop, Continue };

/// Outcome of one policy query. `statistic` carries the value that was
/// compared against the threshold, when the policy has one.
struct StoppingDecision {
  Verdict verdict = Verdict::Continue;
  double statistic = -1.0;  // negative = not set

  bool stop() const { return verdict == Verdict::Stop; }
  bool has_statistic() const { return statistic >= 0.0; }
};

/// Top-weight reading of a matrix, skipping positions whose argmax is the
/// gap symbol.
inline std::u32string argmax_string(const AlternativesMatrix& x) {
  std::u32string out;
  for (const auto& pos : x.positions) {
    const char32_t top = pos.top_label();
    if (top != kEpsilon) out.push_back(top);
  }
  return out;
}

/// Lifts a plain string into the extended model as one-hot rows.
inline AlternativesMatrix from_plain_string(const std::u32string& s) {
  AlternativesMatrix x;
  x.positions.reserve(s.size());
  for (char32_t ch : s) x.positions.push_back(CharDistribution::one_hot(ch));
  return x;
}

inline std::string utf8_encode(const std::u32string& s) {
  std::string out;
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

inline std::u32string utf8_decode(const std::string& s) {
  std::u32string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t n = 0;
    if (b0 < 0x80) {
      cp = b0;
      n = 0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      n = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      n = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      n = 3;
    } else {
      throw std::invalid_argument("utf8_decode: invalid lead byte");
    }
    if (i + n >= s.size()) {
      throw std::invalid_argument("utf8_decode: truncated sequence");
    }
    for (std::size_t k = 1; k <= n; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        throw std::invalid_argument("utf8_decode: invalid continuation byte");
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    out.push_back(cp);
    i += n + 1;
  }
  return out;
}

}  // namespace vstop

#endif  // VSTOP_CORE_HPP
