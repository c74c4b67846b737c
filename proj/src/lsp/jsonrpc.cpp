#include "nextedit/lsp/jsonrpc.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace nextedit::lsp {

std::string frame_message(const json& message) {
  const std::string body = message.dump(-1, ' ', false, json::error_handler_t::replace);
  return "Content-Length: " + std::to_string(body.size()) + "\r\n\r\n" + body;
}

void FrameReader::feed(std::string_view bytes) { buffer_.append(bytes); }

std::optional<json> FrameReader::next() {
  const auto header_end = buffer_.find("\r\n\r\n");
  if (header_end == std::string::npos) return std::nullopt;
  std::optional<std::size_t> length;
  std::string_view headers(buffer_.data(), header_end);
  while (!headers.empty()) {
    auto eol = headers.find("\r\n");
    auto line = headers.substr(0, eol);
    headers = eol == std::string_view::npos ? std::string_view{} : headers.substr(eol + 2);
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw Error(ErrorCode::MalformedEncoding, "bad header line");
    std::string name(line.substr(0, colon));
    for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto value = line.substr(colon + 1);
    while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    if (name == "content-length") {
      std::size_t n = 0;
      if (std::from_chars(value.data(), value.data() + value.size(), n).ec != std::errc())
        throw Error(ErrorCode::MalformedEncoding, "bad Content-Length");
      length = n;
    }
  }
  if (!length) throw Error(ErrorCode::MalformedEncoding, "missing Content-Length");
  const std::size_t body_start = header_end + 4;
  if (buffer_.size() < body_start + *length) return std::nullopt;
  json message;
  try {
    message = json::parse(buffer_.begin() + static_cast<long>(body_start),
                          buffer_.begin() + static_cast<long>(body_start + *length));
  } catch (const json::exception& e) {
    buffer_.erase(0, body_start + *length);
    throw Error(ErrorCode::MalformedEncoding, e.what());
  }
  buffer_.erase(0, body_start + *length);
  return message;
}

namespace {

// Length of the UTF-8 sequence starting with byte `c` (1 for stray bytes).
int utf8_length(unsigned char c) {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xe) return 3;
  if ((c >> 3) == 0x1e) return 4;
  return 1;
}

}  // namespace

int utf16_column(std::string_view line, int byte_col) {
  int units = 0;
  std::size_t i = 0;
  while (i < line.size() && static_cast<int>(i) < byte_col) {
    const int len = utf8_length(static_cast<unsigned char>(line[i]));
    units += len == 4 ? 2 : 1;
    i += static_cast<std::size_t>(len);
  }
  return units + std::max(0, byte_col - static_cast<int>(line.size()));
}

int byte_column(std::string_view line, int utf16_col) {
  int units = 0;
  std::size_t i = 0;
  while (i < line.size() && units < utf16_col) {
    const int len = utf8_length(static_cast<unsigned char>(line[i]));
    units += len == 4 ? 2 : 1;
    i += static_cast<std::size_t>(len);
  }
  return static_cast<int>(std::min(i, line.size())) + std::max(0, utf16_col - units);
}

std::string path_to_uri(const std::string& absolute_path) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out = "file://";
  for (unsigned char c : absolute_path) {
    if (std::isalnum(c) || c == '/' || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xf];
    }
  }
  return out;
}

std::string uri_to_path(std::string_view uri) {
  if (uri.starts_with("file://")) uri.remove_prefix(7);
  std::string out;
  for (std::size_t i = 0; i < uri.size(); ++i) {
    if (uri[i] == '%' && i + 2 < uri.size()) {
      int v = 0;
      std::from_chars(uri.data() + i + 1, uri.data() + i + 3, v, 16);
      out += static_cast<char>(v);
      i += 2;
    } else {
      out += uri[i];
    }
  }
  return out;
}

}  // namespace nextedit::lsp
