#include "nextedit/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <unordered_set>

namespace nextedit {

std::string_view to_string(TokenKind kind) noexcept {
  switch (kind) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Number: return "number";
    case TokenKind::String: return "string";
    case TokenKind::Comment: return "comment";
    case TokenKind::Operator: return "operator";
    case TokenKind::Punct: return "punct";
  }
  return "punct";
}

namespace {

const std::unordered_set<std::string_view>& keywords(Language lang) {
  static const std::unordered_set<std::string_view> python{
      "False", "None",   "True",  "and",    "as",       "assert", "async", "await",  "break",
      "class", "continue", "def", "del",    "elif",     "else",   "except", "finally", "for",
      "from",  "global", "if",    "import", "in",       "is",     "lambda", "nonlocal", "not",
      "or",    "pass",   "raise", "return", "try",      "while",  "with",  "yield"};
  static const std::unordered_set<std::string_view> go{
      "break",  "case",   "chan",   "const", "continue", "default", "defer",  "else",  "fallthrough",
      "for",    "func",   "go",     "goto",  "if",       "import",  "interface", "map", "package",
      "range",  "return", "select", "struct", "switch",  "type",    "var",    "nil",   "true", "false"};
  static const std::unordered_set<std::string_view> java{
      "abstract", "assert",    "boolean",  "break",     "byte",    "case",      "catch",    "char",
      "class",    "const",     "continue", "default",   "do",      "double",    "else",     "enum",
      "extends",  "final",     "finally",  "float",     "for",     "goto",      "if",       "implements",
      "import",   "instanceof", "int",     "interface", "long",    "native",    "new",      "package",
      "private",  "protected", "public",   "return",    "short",   "static",    "strictfp", "super",
      "switch",   "synchronized", "this",  "throw",     "throws",  "transient", "try",      "void",
      "volatile", "while",     "true",     "false",     "null",    "var",       "record",   "yield"};
  static const std::unordered_set<std::string_view> js{
      "break",  "case",   "catch",  "class",  "const",  "continue", "debugger", "default", "delete",
      "do",     "else",   "export", "extends", "finally", "for",    "function", "if",      "import",
      "in",     "instanceof", "new", "return", "super",  "switch",  "this",     "throw",   "try",
      "typeof", "var",    "void",   "while",  "with",   "yield",   "let",      "static",  "enum",
      "await",  "async",  "null",   "true",   "false",  "of"};
  static const std::unordered_set<std::string_view> ts = [] {
    auto s = js;
    for (std::string_view w : {"interface", "type", "namespace", "declare", "abstract", "readonly", "as",
                               "implements", "private", "public", "protected", "keyof"})
      s.insert(w);
    return s;
  }();
  switch (lang) {
    case Language::Python: return python;
    case Language::Go: return go;
    case Language::Java: return java;
    case Language::JavaScript: return js;
    case Language::TypeScript: return ts;
  }
  return python;
}

// Longest first so maximal munch works by scanning in order.
constexpr std::array<std::string_view, 43> kOperators{
    ">>>=", "...", "**=", "//=", ">>=", "<<=", "===", "!==", ">>>", "&^=", ":=", "->", "=>", "==", "!=",
    "<=",   ">=",  "&&",  "||",  "++",  "--",  "+=",  "-=",  "*=",  "/=",  "%=", "&=", "|=", "^=", "<<",
    ">>",   "**",  "//",  "<-",  "::",  "?.",  "??",  "&^",  "@",   "~",   "!",  "?",  "^"};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool is_ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

class Lexer {
 public:
  Lexer(std::span<const std::string> lines, std::optional<Language> lang) : lang_(lang) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      line_starts_.push_back(src_.size());
      src_ += lines[i];
      if (i + 1 < lines.size()) src_ += '\n';
    }
  }

  std::vector<SyntaxToken> run() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '\n' || is_space(c)) {
        ++pos_;
        continue;
      }
      if (lex_comment() || lex_string() || lex_number() || lex_identifier() || lex_operator()) continue;
      emit(TokenKind::Punct, pos_, pos_ + 1);
      ++pos_;
    }
    return std::move(out_);
  }

 private:
  bool at(std::string_view s) const { return std::string_view(src_).substr(pos_, s.size()) == s; }
  bool c_like() const { return lang_ && *lang_ != Language::Python; }

  void emit(TokenKind kind, std::size_t begin, std::size_t end) {
    while (begin < end) {
      std::size_t stop = std::min(end, src_.find('\n', begin));
      if (stop > begin) {
        auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), begin);
        const auto line = static_cast<int>(it - line_starts_.begin());
        const auto col = static_cast<int>(begin - line_starts_[line - 1]);
        out_.push_back({kind, src_.substr(begin, stop - begin), line, col});
      }
      begin = stop + 1;
    }
  }

  std::size_t line_end(std::size_t from) const {
    auto nl = src_.find('\n', from);
    return nl == std::string::npos ? src_.size() : nl;
  }

  bool lex_comment() {
    if (!lang_) return false;
    if (*lang_ == Language::Python) {
      if (src_[pos_] != '#') return false;
      const auto end = line_end(pos_);
      emit(TokenKind::Comment, pos_, end);
      pos_ = end;
      return true;
    }
    if (at("//")) {
      const auto end = line_end(pos_);
      emit(TokenKind::Comment, pos_, end);
      pos_ = end;
      return true;
    }
    if (at("/*")) {
      auto close = src_.find("*/", pos_ + 2);
      const auto end = close == std::string::npos ? src_.size() : close + 2;
      emit(TokenKind::Comment, pos_, end);
      pos_ = end;
      return true;
    }
    return false;
  }

  // Consumes a quoted literal starting at `open` whose delimiter is `quote`.
  std::size_t scan_quoted(std::size_t open, std::string_view quote, bool multiline, bool escapes) const {
    std::size_t i = open + quote.size();
    while (i < src_.size()) {
      if (escapes && src_[i] == '\\' && i + 1 < src_.size()) {
        i += 2;
        continue;
      }
      if (src_[i] == '\n' && !multiline) return i;
      if (std::string_view(src_).substr(i, quote.size()) == quote) return i + quote.size();
      ++i;
    }
    return src_.size();
  }

  bool lex_string() {
    const std::size_t start = pos_;
    std::size_t q = pos_;
    if (lang_ == Language::Python && (pos_ == 0 || !is_ident_char(static_cast<unsigned char>(src_[pos_ - 1])))) {
      // String prefixes such as r, b, f, rb.
      std::size_t k = pos_;
      while (k < src_.size() && k - pos_ < 2 && std::string_view("rRbBuUfF").find(src_[k]) != std::string_view::npos) ++k;
      if (k > pos_ && k < src_.size() && (src_[k] == '\'' || src_[k] == '"')) q = k;
    }
    const char c = src_[q];
    const bool quote = c == '"' || c == '\'' || (c == '`' && lang_ && *lang_ != Language::Python && *lang_ != Language::Java);
    if (!quote) return false;
    std::size_t end;
    const std::string_view triple = c == '"' ? "\"\"\"" : "'''";
    const bool raw_prefix = q != start && std::string_view(src_).substr(start, q - start).find_first_of("rR") != std::string_view::npos;
    if ((lang_ == Language::Python || (lang_ == Language::Java && c == '"')) &&
        std::string_view(src_).substr(q, 3) == triple) {
      end = scan_quoted(q, triple, true, !raw_prefix);
    } else if (c == '`') {
      end = scan_quoted(q, "`", true, *lang_ != Language::Go);
    } else {
      end = scan_quoted(q, std::string_view(&src_[q], 1), false, !raw_prefix);
    }
    emit(TokenKind::String, start, end);
    pos_ = end;
    return true;
  }

  bool lex_number() {
    const unsigned char c = src_[pos_];
    const bool dot_digit = c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]));
    if (!std::isdigit(c) && !dot_digit) return false;
    std::size_t i = pos_ + 1;
    while (i < src_.size()) {
      const unsigned char d = src_[i];
      if (std::isalnum(d) || d == '_' || d == '.') {
        if (d == '.' && i + 1 < src_.size() && src_[i + 1] == '.') break;  // range operator
        ++i;
      } else if ((d == '+' || d == '-') && (src_[i - 1] == 'e' || src_[i - 1] == 'E' || src_[i - 1] == 'p' || src_[i - 1] == 'P') &&
                 !(src_[pos_] == '0' && i > pos_ + 1 && (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X'))) {
        ++i;
      } else {
        break;
      }
    }
    emit(TokenKind::Number, pos_, i);
    pos_ = i;
    return true;
  }

  bool lex_identifier() {
    if (!is_ident_start(static_cast<unsigned char>(src_[pos_]))) return false;
    std::size_t i = pos_ + 1;
    while (i < src_.size() && is_ident_char(static_cast<unsigned char>(src_[i]))) ++i;
    const std::string_view word(src_.data() + pos_, i - pos_);
    const bool kw = lang_ && keywords(*lang_).contains(word);
    emit(kw ? TokenKind::Keyword : TokenKind::Identifier, pos_, i);
    pos_ = i;
    return true;
  }

  bool lex_operator() {
    for (auto op : kOperators) {
      if (op == "//" && c_like()) continue;
      if (at(op)) {
        emit(TokenKind::Operator, pos_, pos_ + op.size());
        pos_ += op.size();
        return true;
      }
    }
    if (std::string_view("+-*/%=<>&|").find(src_[pos_]) != std::string_view::npos) {
      emit(TokenKind::Operator, pos_, pos_ + 1);
      ++pos_;
      return true;
    }
    return false;
  }

  std::optional<Language> lang_;
  std::string src_;
  std::vector<std::size_t> line_starts_;
  std::size_t pos_ = 0;
  std::vector<SyntaxToken> out_;
};

}  // namespace

bool is_keyword(std::string_view word, Language lang) noexcept { return keywords(lang).contains(word); }

std::vector<SyntaxToken> tokenize(std::span<const std::string> lines, Language lang) {
  return Lexer(lines, lang).run();
}

std::vector<SyntaxToken> tokenize_lexical(std::span<const std::string> lines) {
  return Lexer(lines, std::nullopt).run();
}

std::vector<std::string> lexical_words(std::string_view text) {
  std::vector<std::string> out;
  for (auto& tok : tokenize_lexical(split_lines(text))) out.push_back(std::move(tok.text));
  return out;
}

}  // namespace nextedit
