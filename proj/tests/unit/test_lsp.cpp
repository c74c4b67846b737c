#include <set>

#include "doctest.h"
#include "nextedit/lsp/services.hpp"
#include "../support/fixtures.hpp"

using namespace nextedit;
using namespace nextedit::lsp;
namespace t = nextedit::testing;

namespace {

ServerConfig fake_config(const std::filesystem::path& root) {
  ServerConfig c;
  c.command = {"python3", std::string(NEXTEDIT_FIXTURE_DIR) + "/fake_lsp.py"};
  c.root = root;
  c.timeout_ms = 3000;
  c.settings = {{"fake", {{"flag", true}}}};
  return c;
}

std::optional<ErrorCode> code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("frames survive arbitrary chunking") {
  const json a = {{"jsonrpc", "2.0"}, {"id", 1}, {"result", "héllo ☃"}};
  const json b = {{"jsonrpc", "2.0"}, {"method", "x"}, {"params", json::array({1, 2, 3})}};
  const std::string bytes = frame_message(a) + frame_message(b);
  CHECK(frame_message(a).starts_with("Content-Length: " + std::to_string(a.dump().size()) + "\r\n\r\n"));

  FrameReader one_by_one;
  std::vector<json> got;
  for (char ch : bytes) {
    one_by_one.feed(std::string_view(&ch, 1));
    while (auto m = one_by_one.next()) got.push_back(*m);
  }
  REQUIRE(got.size() == 2);
  CHECK(got[0] == a);
  CHECK(got[1] == b);
  CHECK(one_by_one.buffered() == 0);

  FrameReader whole;
  whole.feed(bytes);
  CHECK(*whole.next() == a);
  CHECK(*whole.next() == b);
  CHECK_FALSE(whole.next());

  FrameReader bad;
  bad.feed("Content-Length: nope\r\n\r\n{}");
  CHECK(code_of([&] { bad.next(); }) == ErrorCode::MalformedEncoding);
  FrameReader bad_body;
  bad_body.feed("Content-Length: 3\r\n\r\n{x}");
  CHECK(code_of([&] { bad_body.next(); }) == ErrorCode::MalformedEncoding);
}

TEST_CASE("utf-16 columns and file uris") {
  const std::string line = "s = \"é\xF0\x9F\x98\x80\" + x";  // e-acute is 2 bytes, the emoji 4 bytes and 2 units
  const int x_byte = static_cast<int>(line.find('x'));
  CHECK(utf16_column(line, x_byte) == x_byte - 1 - 2);
  CHECK(byte_column(line, utf16_column(line, x_byte)) == x_byte);
  CHECK(utf16_column("abc", 2) == 2);
  CHECK(path_to_uri("/tmp/a b/c.py") == "file:///tmp/a%20b/c.py");
  CHECK(uri_to_path("file:///tmp/a%20b/c.py") == "/tmp/a b/c.py");
}

TEST_CASE("client against a scripted server") {
  const auto root = t::scratch_dir("fake-lsp");
  auto client = Client::start(fake_config(root));
  CHECK(client->capabilities().value("renameProvider", false));

  // The server asked for configuration during the handshake.
  const json cfg = client->request("fake/config", nullptr);
  CHECK(cfg == json::array({true, nullptr}));

  SUBCASE("large bodies arrive in pieces") {
    json big = json::object();
    for (int i = 0; i < 300; ++i) big["k" + std::to_string(i)] = std::string(i % 17, 'x') + "ü";
    CHECK(client->request("fake/echo", big) == big);
  }

  SUBCASE("responses out of order reach the right callers") {
    std::vector<std::future<json>> held;
    for (int i = 0; i < 3; ++i) held.push_back(client->request_async("fake/hold", {{"n", i}}));
    CHECK(client->request("fake/release", nullptr) == 3);
    for (int i = 0; i < 3; ++i) CHECK(held[i].get()["n"] == i);
  }

  SUBCASE("errors and timeouts") {
    CHECK(code_of([&] { client->request("fake/fail", nullptr); }) == ErrorCode::ServerError);
    CHECK(code_of([&] { client->request("fake/silent", nullptr, 200); }) == ErrorCode::Timeout);
    CHECK(client->request("fake/echo", {{"still", "alive"}})["still"] == "alive");
  }

  SUBCASE("notifications are bounded") {
    client->request("fake/notify", {{"count", Client::kNotificationCapacity + 10}});
    const auto notes = client->drain_notifications();
    CHECK(notes.size() == Client::kNotificationCapacity);
    CHECK(client->dropped_notifications() >= 10);
    CHECK(notes.back()["params"]["message"] == std::to_string(Client::kNotificationCapacity + 9));
  }

  SUBCASE("diagnostics follow the latest sync") {
    client->sync_document("m.py", "x = 1\n");
    auto d = client->diagnostics("m.py", 2000);
    REQUIRE(d);
    REQUIRE(d->size() == 1);
    CHECK((*d)[0].message == "v1");
    client->sync_document("m.py", "x = 2\n");
    d = client->diagnostics("m.py", 2000);
    REQUIRE(d);
    CHECK((*d)[0].message == "v2");
    CHECK(client->is_open("m.py"));
  }

  SUBCASE("a crash fails pending and later requests") {
    auto pending = client->request_async("fake/hold", {{"n", 0}});
    CHECK(code_of([&] { client->request("fake/crash", nullptr); }) == ErrorCode::TransportClosed);
    CHECK(code_of([&] { pending.get(); }) == ErrorCode::TransportClosed);
    CHECK_FALSE(client->alive());
    CHECK(code_of([&] { client->request("fake/echo", nullptr); }) == ErrorCode::TransportClosed);
  }

  client.reset();
  t::drop_scratch(root);
}

TEST_CASE("launch failures") {
  ServerConfig c;
  c.command = {"no-such-language-server-xyz"};
  c.root = std::filesystem::temp_directory_path();
  CHECK(code_of([&] { Client::start(c); }) == ErrorCode::LaunchFailed);
  c.command = {"python3", "-c", "import sys; sys.exit(0)"};
  CHECK(code_of([&] { Client::start(c); }) == ErrorCode::LaunchFailed);
  c.command = {};
  CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidArgument);
}

namespace {

struct RealCase {
  Language lang;
  std::string main_file, other_file;
  std::string main_text, other_text;
  Position variable;  // a local with kVarUses occurrences
  Position function;  // a function with kCalls call sites
};

constexpr int kVarUses = 5;
constexpr int kCalls = 4;

RealCase python_case() {
  return {Language::Python, "pkg/core.py", "pkg/use.py",
          "def scale(value):\n"
          "    return value * 2\n"
          "\n"
          "def total(items):\n"
          "    limit = len(items)\n"
          "    if limit > 3:\n"
          "        print(limit)\n"
          "    head = items[:limit]\n"
          "    return scale(limit) + len(head)\n"
          "\n"
          "def twice(x):\n"
          "    return scale(scale(x))\n",
          "import pkg.core as core\n"
          "\n"
          "print(core.scale(10))\n",
          {5, 4},
          {1, 4}};
}

RealCase typescript_case() {
  return {Language::TypeScript, "src/core.ts", "src/use.ts",
          "export function scale(value: number): number {\n"
          "  return value * 2;\n"
          "}\n"
          "\n"
          "export function total(items: number[]): number {\n"
          "  const limit = items.length;\n"
          "  if (limit > 3) {\n"
          "    console.log(limit);\n"
          "  }\n"
          "  const head = items.slice(0, limit);\n"
          "  return scale(limit) + head.length;\n"
          "}\n"
          "\n"
          "export function twice(x: number): number {\n"
          "  return scale(scale(x));\n"
          "}\n",
          "import * as core from \"./core\";\n"
          "\n"
          "console.log(core.scale(10));\n",
          {6, 8},
          {1, 16}};
}

void check_real_server(const RealCase& rc) {
  const auto root = t::scratch_dir(std::string(to_string(rc.lang)) + "-server");
  const auto config = default_server_config(rc.lang, root);
  if (!config) {
    MESSAGE("no language server installed for " << to_string(rc.lang));
    t::drop_scratch(root);
    return;
  }
  auto services = LspToolServices::start(*config);
  Project p(rc.lang);
  p.set_file(rc.main_file, rc.main_text);
  p.set_file(rc.other_file, rc.other_text);
  services->sync(p);

  const auto renamed = services->rename(rc.main_file, rc.variable, "bound");
  CHECK(renamed.size() == kVarUses);
  for (const auto& c : renamed) {
    CHECK(c.confidence == 1.0);
    CHECK(c.source == ToolService::Rename);
    CHECK(c.file == rc.main_file);
    REQUIRE(c.replacement);
    CHECK(c.replacement->front().find("bound") != std::string::npos);
  }

  // The declaration plus three calls here and one in the other file.
  const auto refs = services->references(rc.main_file, rc.function);
  std::set<std::pair<std::string, int>> where;
  for (const auto& r : refs) where.emplace(r.file, r.span.start);
  CHECK(where.contains({rc.main_file, rc.function.line}));
  CHECK(where.contains({rc.other_file, 3}));
  CHECK(refs.size() == kCalls + 1);

  services.reset();
  t::drop_scratch(root);
}

}  // namespace

TEST_CASE("python server: rename and references counts") { check_real_server(python_case()); }

TEST_CASE("typescript server: rename and references counts") { check_real_server(typescript_case()); }
