#include <doctest.h>

#include <random>
#include <string>

#include "grazing/errors.hpp"
#include "grazing/words.hpp"

using namespace grazing;

namespace {

Word random_word(std::mt19937& rng, std::size_t max_len, std::size_t min_len = 0) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> bit(0, 1);
  std::string s;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s.push_back(bit(rng) ? 'R' : 'L');
  return Word(s);
}

}  // namespace

TEST_CASE("word construction accepts only L and R") {
  CHECK(Word("RLR").str() == "RLR");
  CHECK(Word("").empty());
  CHECK_THROWS_AS(Word("RLx"), ValidationError);
  CHECK(!Word::parse("RQR").has_value());
  CHECK(Word::parse("LLRR").has_value());
}

TEST_CASE("concatenation") {
  CHECK(concat(Word("RLR"), Word("LR")).str() == "RLRLR");
  CHECK(concat(Word("RLR"), Word()).str() == "RLR");
  CHECK(concat(Word(), Word("RLR")).str() == "RLR");
  CHECK(concat(Word("RLLLR"), Word("LLLR")).str() == "RLLLRLLLR");
}

TEST_CASE("powers") {
  CHECK(power(Word("RLR"), 0).empty());
  CHECK(power(Word("RLR"), 2).str() == "RLRRLR");
  CHECK(power(Word("LR"), 3).str() == "LRLRLR");
}

TEST_CASE("single-symbol flips") {
  CHECK(flip(Word("RLR"), 2).str() == "RLL");
  CHECK(flip(Word("LR"), 0).str() == "RR");
  CHECK(flip(flip(Word("RLR"), 1), 1).str() == "RLR");
  CHECK_THROWS_AS(flip(Word("RLR"), 3), ValidationError);
  CHECK_THROWS_AS(flip(Word(), 0), ValidationError);
}

TEST_CASE("prefixes") {
  CHECK(prefix(Word("RLRLR"), 1).str() == "R");
  CHECK(prefix(Word("RLLLRLLLR"), 3).str() == "RLL");
  CHECK(prefix(Word("RLRLRLRLR"), 1).str() == "R");
  CHECK(prefix(Word("RL"), 2).str() == "RL");
  CHECK_THROWS_AS(prefix(Word("RL"), 0), ValidationError);
  CHECK_THROWS_AS(prefix(Word("RL"), 3), ValidationError);
}

TEST_CASE("pairing index for the standard word pairs") {
  PairingAlpha a = pairing_alpha(Word("RLR"), Word("LR"));
  REQUIRE(a.alpha.has_value());
  CHECK(*a.alpha == 1);

  a = pairing_alpha(Word("RLLLR"), Word("LLLR"));
  REQUIRE(a.alpha.has_value());
  CHECK(*a.alpha == 3);

  a = pairing_alpha(Word("RLRLRLR"), Word("LR"));
  REQUIRE(a.alpha.has_value());
  CHECK(*a.alpha == 1);
}

TEST_CASE("pairing index characterizes the difference set exactly") {
  std::mt19937 rng(2101);
  int with_alpha = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Word x = random_word(rng, 6, 1);
    const Word y = random_word(rng, 6, 1);
    const PairingAlpha pa = pairing_alpha(x, y);
    const Word xy = concat(x, y);
    const Word yx = concat(y, x);
    for (std::size_t alpha : pa.all) {
      CHECK(xy == flip(flip(yx, 0), alpha));
      // differs in exactly {0, alpha}
      int diffs = 0;
      for (std::size_t i = 0; i < xy.size(); ++i)
        if (xy[i] != yx[i]) ++diffs;
      CHECK(diffs == 2);
      CHECK(xy[0] != yx[0]);
      CHECK(xy[alpha] != yx[alpha]);
    }
    if (pa.alpha) {
      ++with_alpha;
      CHECK(*pa.alpha == pa.all.front());
    } else {
      CHECK(pa.all.empty());
    }
  }
  CHECK(with_alpha > 0);  // the property above was exercised
}

TEST_CASE("concatenation is associative") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Word a = random_word(rng, 12);
    const Word b = random_word(rng, 12);
    const Word c = random_word(rng, 12);
    CHECK(concat(concat(a, b), c) == concat(a, concat(b, c)));
  }
}

TEST_CASE("power satisfies its recursion") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Word w = random_word(rng, 8, 1);
    for (std::size_t k = 1; k <= 4; ++k)
      CHECK(power(w, k) == concat(power(w, k - 1), w));
  }
}

TEST_CASE("flip is an involution at every index") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const Word w = random_word(rng, 10, 1);
    for (std::size_t i = 0; i < w.size(); ++i)
      CHECK(flip(flip(w, i), i) == w);
  }
}
