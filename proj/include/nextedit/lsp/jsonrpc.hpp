#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nextedit/serialize.hpp"

namespace nextedit::lsp {

/// `Content-Length: N\r\n\r\n` followed by the UTF-8 JSON body.
std::string frame_message(const json& message);

/// Incremental decoder for the base protocol. Bytes may arrive in arbitrary
/// chunks; complete messages come out in order.
class FrameReader {
 public:
  void feed(std::string_view bytes);
  /// Next complete message, if any. Throws MalformedEncoding on a bad header
  /// or body.
  std::optional<json> next();
  std::size_t buffered() const noexcept { return buffer_.size(); }

 private:
  std::string buffer_;
};

/// utf-16 code units <-> byte offsets within one line of UTF-8 text.
int utf16_column(std::string_view line, int byte_column);
int byte_column(std::string_view line, int utf16_column);

std::string path_to_uri(const std::string& absolute_path);
std::string uri_to_path(std::string_view uri);

}  // namespace nextedit::lsp
