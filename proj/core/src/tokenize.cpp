#include "bite/tokenize.hpp"

#include <array>
#include <cstdint>

namespace bite {
namespace {

struct CodePoint {
  std::size_t offset;
  std::size_t length;
  char32_t value;
};

// Invalid bytes decode as themselves with length 1.
CodePoint decode(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) return {i, 1, b0};
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) return {i, 2, static_cast<char32_t>(((b0 & 0x1F) << 6) | c1)};
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) return {i, 3, static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2)};
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0)
      return {i, 4, static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3)};
  }
  return {i, 1, b0};
}

bool is_space(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  switch (c) {
    case 0xAB: case 0xBB: case 0xA1: case 0xBF:
    case 0x2013: case 0x2014: case 0x2018: case 0x2019: case 0x201C: case 0x201D:
    case 0x2026:
      return true;
    default:
      return false;
  }
}

void push_lower(Tokens& out, std::string_view piece) {
  std::string token(piece);
  for (char& ch : token) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  out.push_back(std::move(token));
}

void split_chunk(std::string_view chunk, Tokens& out) {
  std::vector<CodePoint> cps;
  for (std::size_t i = 0; i < chunk.size();) {
    cps.push_back(decode(chunk, i));
    i += cps.back().length;
  }
  std::size_t first = 0;
  std::size_t last = cps.size();
  while (first < last && is_punct(cps[first].value)) {
    push_lower(out, chunk.substr(cps[first].offset, cps[first].length));
    ++first;
  }
  std::size_t tail = last;
  while (tail > first && is_punct(cps[tail - 1].value)) --tail;
  if (first < tail) {
    const std::size_t begin = cps[first].offset;
    const std::size_t end = cps[tail - 1].offset + cps[tail - 1].length;
    push_lower(out, chunk.substr(begin, end - begin));
  }
  for (std::size_t k = tail; k < last; ++k) push_lower(out, chunk.substr(cps[k].offset, cps[k].length));
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t chunk_start = 0;
  bool in_chunk = false;
  for (std::size_t i = 0; i < text.size();) {
    const CodePoint cp = decode(text, i);
    if (is_space(cp.value)) {
      if (in_chunk) split_chunk(text.substr(chunk_start, i - chunk_start), out);
      in_chunk = false;
    } else if (!in_chunk) {
      in_chunk = true;
      chunk_start = i;
    }
    i += cp.length;
  }
  if (in_chunk) split_chunk(text.substr(chunk_start), out);
  return out;
}

bool is_punctuation_token(std::string_view token) {
  if (token.empty()) return false;
  for (std::size_t i = 0; i < token.size();) {
    const CodePoint cp = decode(token, i);
    if (!is_punct(cp.value)) return false;
    i += cp.length;
  }
  return true;
}

namespace {

bool attaches_left(std::string_view token) {
  static constexpr std::array<std::string_view, 8> kAttached = {".", ",", "!", "?", ";", ":", "'", "”"};
  for (std::string_view p : kAttached) {
    if (token == p) return true;
  }
  return false;
}

}  // namespace

std::string detokenize(const Tokens& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0 && !attaches_left(tokens[i])) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace bite
