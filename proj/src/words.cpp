#include "grazing/words.hpp"

#include "grazing/errors.hpp"

namespace grazing {

Word::Word(std::string symbols) : s_(std::move(symbols)) {
  for (char c : s_) {
    if (c != 'L' && c != 'R') {
      throw ValidationError("word may contain only 'L' and 'R', got '" +
                            std::string(1, c) + "'");
    }
  }
}

std::optional<Word> Word::parse(std::string_view s) {
  for (char c : s) {
    if (c != 'L' && c != 'R') return std::nullopt;
  }
  return Word(std::string(s), Unchecked{});
}

Word concat(const Word& a, const Word& b) {
  return Word(a.s_ + b.s_, Word::Unchecked{});
}

Word power(const Word& w, std::size_t k) {
  std::string s;
  s.reserve(w.size() * k);
  for (std::size_t i = 0; i < k; ++i) s += w.s_;
  return Word(std::move(s), Word::Unchecked{});
}

Word flip(const Word& w, std::size_t i) {
  if (i >= w.size()) {
    throw ValidationError("flip index " + std::to_string(i) +
                          " out of range for word of length " +
                          std::to_string(w.size()));
  }
  std::string s = w.s_;
  s[i] = (s[i] == 'L') ? 'R' : 'L';
  return Word(std::move(s), Word::Unchecked{});
}

Word prefix(const Word& w, std::size_t alpha) {
  if (alpha == 0 || alpha > w.size()) {
    throw ValidationError("prefix length " + std::to_string(alpha) +
                          " out of range for word of length " +
                          std::to_string(w.size()));
  }
  return Word(w.s_.substr(0, alpha), Word::Unchecked{});
}

PairingAlpha pairing_alpha(const Word& x, const Word& y) {
  PairingAlpha out;
  const Word xy = concat(x, y);
  const Word yx = concat(y, x);
  const std::size_t n = xy.size();
  if (x.empty() || y.empty()) return out;
  // xy = flip(flip(yx, 0), alpha) means the two concatenations differ at
  // position 0, at position alpha, and nowhere else.
  if (xy[0] == yx[0]) return out;
  for (std::size_t a = 1; a < n; ++a) {
    bool match = true;
    for (std::size_t i = 1; i < n && match; ++i) {
      const bool differ = xy[i] != yx[i];
      if (differ != (i == a)) match = false;
    }
    if (match) out.all.push_back(a);
  }
  if (!out.all.empty()) out.alpha = out.all.front();
  return out;
}

}  // namespace grazing
