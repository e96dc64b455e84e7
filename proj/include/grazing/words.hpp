#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grazing {

// Finite word over the alphabet {L, R}.  Immutable value; operations return
// new words.
class Word {
public:
  Word() = default;
  explicit Word(std::string symbols);  // throws ValidationError on other chars
  static std::optional<Word> parse(std::string_view s);

  const std::string& str() const { return s_; }
  std::size_t size() const { return s_.size(); }
  bool empty() const { return s_.empty(); }
  char operator[](std::size_t i) const { return s_[i]; }

  friend bool operator==(const Word&, const Word&) = default;

private:
  struct Unchecked {};
  Word(std::string s, Unchecked) : s_(std::move(s)) {}
  std::string s_;

  friend Word concat(const Word&, const Word&);
  friend Word power(const Word&, std::size_t);
  friend Word flip(const Word&, std::size_t);
  friend Word prefix(const Word&, std::size_t);
};

Word concat(const Word& a, const Word& b);
Word power(const Word& w, std::size_t k);
// Changes exactly the symbol at i; throws ValidationError when i >= |w|.
Word flip(const Word& w, std::size_t i);
// First alpha symbols; throws ValidationError unless 0 < alpha <= |w|.
Word prefix(const Word& w, std::size_t alpha);

// All indices alpha in {1, .., |x|+|y|-1} with xy = flip(flip(yx, 0), alpha),
// i.e. xy and yx differ exactly at positions 0 and alpha.  `alpha` is the
// smallest such index when any exists.
struct PairingAlpha {
  std::optional<std::size_t> alpha;
  std::vector<std::size_t> all;
};
PairingAlpha pairing_alpha(const Word& x, const Word& y);

}  // namespace grazing
