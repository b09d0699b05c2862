#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bite {

using Tokens = std::vector<std::string>;

/// Lowercases ASCII letters, splits on Unicode whitespace and peels leading and
/// trailing punctuation off each chunk into single-character tokens. Apostrophes
/// and hyphens inside a word are kept.
Tokens tokenize(std::string_view text);

/// Joins tokens with single spaces, attaching . , ! ? ; : ' and the closing
/// curly quote to the preceding token.
std::string detokenize(const Tokens& tokens);

bool is_punctuation_token(std::string_view token);

}  // namespace bite
