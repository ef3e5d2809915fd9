#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <thread>

#include "heurevo/http_backend.hpp"
#include "heurevo/llm_backend.hpp"
#include "helpers.hpp"

using namespace heurevo;

namespace {

PromptBundle prompt_at(int round) {
  PromptBundle p;
  p.round = round;
  p.system_text = "sys";
  p.user_text = "user";
  return p;
}

/// Local chat-completions server answering with a counter or failing on
/// demand.
struct FakeServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};
  std::atomic<int> fail_first{0};
  std::string last_auth;
  std::string last_body;
  std::mutex mu;

  FakeServer() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++hits;
      {
        std::lock_guard<std::mutex> lock(mu);
        last_auth = req.get_header_value("Authorization");
        last_body = req.body;
      }
      if (n <= fail_first.load()) {
        res.status = 503;
        return;
      }
      nlohmann::json j;
      j["choices"] = {{{"message", {{"role", "assistant"}, {"content", "answer " + std::to_string(n)}}}}};
      res.set_content(j.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeServer() {
    server.stop();
    thread.join();
  }

  BackendConfig config() const {
    BackendConfig c;
    c.kind = BackendKind::Http;
    c.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    c.model = "m";
    c.timeout_seconds = 5;
    c.parallel = false;
    return c;
  }
};

}  // namespace

TEST(Replay, ReturnsCorpusVerbatim) {
  heurevo::testing::TempDir dir("replay");
  const auto path = (dir.path / "c.jsonl").string();
  {
    std::ofstream out(path);
    for (int slot = 0; slot < 4; ++slot) {
      out << nlohmann::json{{"round", 1}, {"slot", slot}, {"text", "text\n" + std::to_string(slot)}}.dump() << "\n";
    }
  }
  auto backend = ReplayBackend::from_file(path);
  EXPECT_EQ(backend.sample(prompt_at(1), 4), (std::vector<std::string>{"text\n0", "text\n1", "text\n2", "text\n3"}));
  EXPECT_THROW(backend.sample(prompt_at(1), 5), CorpusExhausted);
  EXPECT_THROW(backend.sample(prompt_at(2), 1), CorpusExhausted);
}

TEST(Replay, DuplicateKeysRejected) {
  heurevo::testing::TempDir dir("replaydup");
  const auto path = (dir.path / "c.jsonl").string();
  std::ofstream(path) << R"({"round":1,"slot":0,"text":"a"})" "\n" R"({"round":1,"slot":0,"text":"b"})" "\n";
  EXPECT_THROW(ReplayBackend::from_file(path), ConfigError);
  EXPECT_THROW(ReplayBackend::from_file((dir.path / "none.jsonl").string()), ConfigError);
}

TEST(Scripted, CannedResponses) {
  ScriptedBackend one(std::vector<std::string>{"only"});
  EXPECT_EQ(one.sample(prompt_at(1), 1), std::vector<std::string>{"only"});
  ScriptedBackend cyc(std::vector<std::string>{"a", "b"});
  EXPECT_EQ(cyc.sample(prompt_at(1), 3), (std::vector<std::string>{"a", "b", "a"}));
  ScriptedBackend fn([](const PromptBundle& p, std::size_t slot) {
    return std::to_string(p.round) + ":" + std::to_string(slot);
  });
  EXPECT_EQ(fn.sample(prompt_at(7), 2), (std::vector<std::string>{"7:0", "7:1"}));
}

TEST(Http, SuccessSendsPromptAndKey) {
  FakeServer fake;
  HttpBackend backend(fake.config(), "secret");
  const auto out = backend.sample(prompt_at(1), 2);
  EXPECT_EQ(out, (std::vector<std::string>{"answer 1", "answer 2"}));
  EXPECT_EQ(backend.attempts(), 2u);
  EXPECT_EQ(fake.last_auth, "Bearer secret");
  const auto body = nlohmann::json::parse(fake.last_body);
  EXPECT_EQ(body["model"], "m");
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "user");
}

TEST(Http, RetryBudgetExhaustedGivesEmptySlot) {
  FakeServer fake;
  fake.fail_first = 3;
  auto cfg = fake.config();
  cfg.retries = 2;
  HttpBackend backend(cfg, "k");
  EXPECT_EQ(backend.sample(prompt_at(1), 1), std::vector<std::string>{""});
  EXPECT_EQ(backend.attempts(), 3u);
  EXPECT_EQ(backend.sample(prompt_at(1), 1), std::vector<std::string>{"answer 4"});
}

TEST(Http, RecoversWithinBudget) {
  FakeServer fake;
  fake.fail_first = 2;
  HttpBackend backend(fake.config(), "k");
  EXPECT_EQ(backend.sample(prompt_at(1), 1), std::vector<std::string>{"answer 3"});
}

TEST(Http, ParallelSlots) {
  FakeServer fake;
  auto cfg = fake.config();
  cfg.parallel = true;
  HttpBackend backend(cfg, "k");
  const auto out = backend.sample(prompt_at(1), 4);
  ASSERT_EQ(out.size(), 4u);
  for (const auto& s : out) EXPECT_EQ(s.rfind("answer ", 0), 0u);
}

TEST(Http, UnreachableEndpointGivesEmptySlots) {
  BackendConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/v1";
  cfg.retries = 1;
  cfg.timeout_seconds = 1;
  cfg.parallel = false;
  HttpBackend backend(cfg, "k");
  EXPECT_EQ(backend.sample(prompt_at(1), 2), (std::vector<std::string>{"", ""}));
  EXPECT_EQ(backend.attempts(), 4u);
}

TEST(Http, ConfigErrors) {
  EXPECT_THROW(HttpBackend(BackendConfig{}, ""), ConfigError);
  BackendConfig bad;
  bad.endpoint = "localhost:8000";
  EXPECT_THROW(HttpBackend(bad, "k"), ConfigError);
  EXPECT_EQ(parse_backend("replay"), BackendKind::Replay);
  EXPECT_THROW(parse_backend("telepathy"), ConfigError);
}
