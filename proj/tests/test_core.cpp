#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"
#include "vstop/core.hpp"

using namespace vstop;

TEST_CASE("argmax_string basics") {
  CHECK(argmax_string(AlternativesMatrix{}) == U"");
  CHECK(argmax_string(from_plain_string(U"ab")) == U"ab");
}

TEST_CASE("argmax_string breaks weight ties by ascending code point") {
  AlternativesMatrix x;
  x.positions.push_back(CharDistribution({{U'b', 0.5}, {U'a', 0.5}}));
  CHECK(argmax_string(x) == U"a");
}

TEST_CASE("argmax_string skips gap-dominated positions") {
  AlternativesMatrix x;
  x.positions.push_back(CharDistribution::one_hot(U'a'));
  x.positions.push_back(CharDistribution({{kEpsilon, 0.7}, {U'b', 0.3}}));
  x.positions.push_back(CharDistribution::one_hot(U'c'));
  CHECK(argmax_string(x) == U"ac");
}

TEST_CASE("from_plain_string lifts to one-hot rows") {
  CHECK(from_plain_string(U"").positions.empty());
  const auto x = from_plain_string(U"a");
  REQUIRE(x.length() == 1);
  CHECK(x.positions[0].top_label() == U'a');
  CHECK(x.positions[0].top_weight() == 1.0);
}

TEST_CASE("argmax of from_plain is identity") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> len(0, 12);
  std::uniform_int_distribution<int> ch('a', 'z');
  for (int rep = 0; rep < 200; ++rep) {
    std::u32string s;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) {
      s.push_back(static_cast<char32_t>(ch(rng)));
    }
    CHECK(argmax_string(from_plain_string(s)) == s);
  }
}

TEST_CASE("CharDistribution renormalizes small deviations") {
  CharDistribution d({{U'a', 0.5000004}, {U'b', 0.5000001}});
  CHECK(d.weight_of(U'a') + d.weight_of(U'b') == Catch::Approx(1.0).margin(1e-15));
}

TEST_CASE("renormalizing an already normalized distribution is the identity") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 100; ++rep) {
    const auto d = testutil::random_dist(rng, 5);
    CHECK(CharDistribution(d.entries()) == d);
  }
}

TEST_CASE("CharDistribution rejects bad input") {
  CHECK_THROWS_AS(CharDistribution({{U'a', 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(CharDistribution({{U'a', 1.1}, {U'b', 0.1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CharDistribution({{U'a', -0.1}, {U'b', 1.1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CharDistribution(std::vector<CharDistribution::Entry>{}),
                  std::invalid_argument);
}

TEST_CASE("CharDistribution merges duplicate labels") {
  CharDistribution d({{U'a', 0.3}, {U'a', 0.3}, {U'b', 0.4}});
  CHECK(d.size() == 2);
  CHECK(d.weight_of(U'a') == Catch::Approx(0.6));
  CHECK(d.top_label() == U'a');
}

TEST_CASE("utf8 round trip") {
  const std::u32string s = U"abc#éЖ中";
  CHECK(utf8_decode(utf8_encode(s)) == s);
}
