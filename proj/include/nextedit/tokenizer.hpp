#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nextedit/core.hpp"

namespace nextedit {

enum class TokenKind { Identifier, Keyword, Number, String, Comment, Operator, Punct };

std::string_view to_string(TokenKind kind) noexcept;

/// A leaf syntax element. Tokens that cross line boundaries (block comments,
/// multi-line strings) are emitted as one piece per line so every line owns
/// the text written on it.
struct SyntaxToken {
  TokenKind kind = TokenKind::Punct;
  std::string text;
  int line = 1;    // 1-based
  int column = 0;  // 0-based byte offset within the line

  int end_column() const noexcept { return column + static_cast<int>(text.size()); }
  bool same_element(const SyntaxToken& other) const noexcept { return kind == other.kind && text == other.text; }
};

/// Language-aware lexer: keywords, comment syntax and string forms follow the
/// given language. Whitespace never produces tokens.
std::vector<SyntaxToken> tokenize(std::span<const std::string> lines, Language lang);

/// Grammar-free fallback: identifier / number / string / operator / punct.
std::vector<SyntaxToken> tokenize_lexical(std::span<const std::string> lines);

/// Token texts of a single string, lexical fallback. Used for BM25 and BLEU.
std::vector<std::string> lexical_words(std::string_view text);

bool is_keyword(std::string_view word, Language lang) noexcept;

}  // namespace nextedit
