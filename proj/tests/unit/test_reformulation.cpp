#include <doctest.h>

#include <atomic>
#include <thread>

#include "rebol/reformulation.hpp"
#include "support/fixtures.hpp"

#include <httplib.h>
#include <json.hpp>

using namespace rebol;
using nlohmann::json;
using rebol_test::TempDir;
using rebol_test::store_from_rows;
using rebol_test::write_text;

namespace {

/// Minimal scripted chat endpoint (string-array replies).
class MockChat {
 public:
  explicit MockChat(std::vector<std::string> replies) : replies_(std::move(replies)) {
    server_.Post("/chat", [this](const httplib::Request&, httplib::Response& res) {
      std::size_t n = hits_.fetch_add(1);
      std::string reply = n < replies_.size() ? replies_[n] : replies_.back();
      json out = {{"choices", {{{"message", {{"content", reply}}}}}}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockChat() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/chat";
  }
  std::size_t hits() const { return hits_.load(); }

 private:
  httplib::Server server_;
  std::vector<std::string> replies_;
  std::atomic<std::size_t> hits_{0};
  int port_ = 0;
  std::thread thread_;
};

oracle::OracleConfig chat_config(const MockChat& mock) {
  oracle::OracleConfig config;
  config.kind = "llm-http";
  config.endpoint = mock.endpoint();
  config.model = "test-model";
  return config;
}

}  // namespace

TEST_SUITE("reformulation") {

TEST_CASE("load_reformulations reads JSONL rows") {
  TempDir dir;
  auto path = dir.file("refs.jsonl");
  write_text(path,
             R"({"query_id": "q1", "reformulations": ["alpha one", "alpha two", "alpha three", "alpha four"]})"
             "\n"
             R"({"query_id": "q2", "reformulations": ["beta"]})"
             "\n");
  auto loaded = load_reformulations(path);
  REQUIRE(loaded.sets.size() == 2);
  // four reformulations plus the query itself make five seed locations
  CHECK(loaded.sets.at("q1").size() == 4);
  CHECK(loaded.sets.at("q2").texts == std::vector<std::string>{"beta"});
}

TEST_CASE("empty reformulation strings are rejected") {
  TempDir dir;
  auto path = dir.file("refs.jsonl");
  write_text(path, R"({"query_id": "q1", "reformulations": ["ok", ""]})" "\n");
  CHECK_THROWS_AS(load_reformulations(path), Error);
}

TEST_CASE("attach joins embeddings by <query_id>#r<i> and drops query duplicates") {
  auto ref_store = store_from_rows({{1.f, 0.f}, {0.f, 1.f}, {.6f, .8f}},
                                   {"q1#r0", "q1#r1", "q1#r2"});
  ReformulationSet set;
  set.query_id = "q1";
  set.texts = {"first", "the query text", "third"};

  Warnings warnings;
  attach_reformulation_embeddings(set, "the query text", ref_store, warnings);
  CHECK(set.texts == std::vector<std::string>{"first", "third"});
  REQUIRE(set.embeddings.size() == 2);
  CHECK(set.embeddings[0][0] == 1.f);
  CHECK(set.embeddings[1][0] == doctest::Approx(0.6f));
  CHECK(warnings.count() == 1);
}

TEST_CASE("attach fails on a missing embedding id") {
  auto ref_store = store_from_rows({{1.f, 0.f}}, {"q1#r0"});
  ReformulationSet set;
  set.query_id = "q1";
  set.texts = {"first", "second"};
  Warnings warnings;
  CHECK_THROWS_WITH_AS(attach_reformulation_embeddings(set, "q", ref_store, warnings),
                       doctest::Contains("q1#r1"), Error);
}

TEST_CASE("generate_reformulations happy path") {
  MockChat mock({R"(["one", "two", "three", "four"])"});
  Warnings warnings;
  auto set = generate_reformulations(chat_config(mock), "q1", "the query", 4, warnings);
  CHECK(set.texts == std::vector<std::string>{"one", "two", "three", "four"});
  CHECK(warnings.count() == 0);
  CHECK(mock.hits() == 1);
}

TEST_CASE("extra strings are truncated with a warning") {
  MockChat mock({R"(["one", "two", "three", "four", "five"])"});
  Warnings warnings;
  auto set = generate_reformulations(chat_config(mock), "q1", "the query", 4, warnings);
  CHECK(set.texts == std::vector<std::string>{"one", "two", "three", "four"});
  CHECK(warnings.count() == 1);
}

TEST_CASE("duplicates are dropped and topped up by one retry") {
  MockChat mock({R"(["one", "one", "two"])", R"(["three"])"});
  Warnings warnings;
  auto set = generate_reformulations(chat_config(mock), "q1", "the query", 3, warnings);
  CHECK(set.texts == std::vector<std::string>{"one", "two", "three"});
  CHECK(mock.hits() == 2);
  CHECK(warnings.count() == 1);  // the duplicate
}

TEST_CASE("persistent shortfall proceeds with fewer and warns") {
  MockChat mock({R"(["one", "one"])", R"(["one"])"});
  Warnings warnings;
  auto set = generate_reformulations(chat_config(mock), "q1", "the query", 3, warnings);
  CHECK(set.texts == std::vector<std::string>{"one"});
  CHECK(warnings.count() >= 2);  // duplicates and the shortfall note
}

TEST_CASE("malformed output is retried once, then fails") {
  MockChat ok_after_retry({"no array here", R"(["one", "two"])"});
  Warnings warnings;
  auto set = generate_reformulations(chat_config(ok_after_retry), "q1", "q", 2, warnings);
  CHECK(set.texts.size() == 2);
  CHECK(ok_after_retry.hits() == 2);

  MockChat hopeless({"still no array", "and again nothing"});
  Warnings warnings2;
  CHECK_THROWS_WITH_AS(generate_reformulations(chat_config(hopeless), "q1", "q", 2, warnings2),
                       doctest::Contains("malformed"), Error);
}

TEST_CASE("the model echoing the query back is never kept") {
  MockChat mock({R"(["the query", "other"])", R"(["fresh"])"});
  Warnings warnings;
  auto set = generate_reformulations(chat_config(mock), "q1", "the query", 2, warnings);
  CHECK(set.texts == std::vector<std::string>{"other", "fresh"});
}

}  // TEST_SUITE
