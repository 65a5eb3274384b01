#include "awaire/service.hpp"

#include <httplib.h>

#include <thread>

#include "gtest/gtest.h"

namespace {

using awaire::Json;

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    port_ = service_.bind("127.0.0.1", 0);
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { service_.listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    service_.stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Result post(const std::string& path, const Json& body) {
    return client_->Post(path, body.dump(), "application/json");
  }

  std::string create(std::size_t total = 30) {
    const Json body = {
        {"ballot_manifest", {{"total_ballots", total}, {"candidates", {"A", "B", "C"}}}},
        {"reported_winner", "A"},
        {"config", {{"alpha", 0.05}}}};
    auto res = post("/sessions", body);
    EXPECT_TRUE(res);
    EXPECT_EQ(res->status, 201);
    return Json::parse(res->body)["session_id"];
  }

  awaire::SessionStore store_;
  awaire::AuditService service_{store_};
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(ServiceTest, CreateReturnsFourOrdersForThreeCandidates) {
  const Json body = {
      {"ballot_manifest", {{"total_ballots", 100}, {"candidates", {"A", "B", "C"}}}},
      {"reported_winner", "B"}};
  auto res = post("/sessions", body);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
  const auto j = Json::parse(res->body);
  EXPECT_EQ(j["status"]["orders"].size(), 4u);
  EXPECT_EQ(j["status"]["decision"], "ongoing");
}

TEST_F(ServiceTest, ValidationErrorsAre400) {
  auto res = post("/sessions", Json{{"reported_winner", "A"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_TRUE(Json::parse(res->body).contains("error"));

  res = client_->Post("/sessions", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);

  const std::string id = create();
  res = post("/sessions/" + id + "/ballots", Json{{"ranking", {"A", "A"}}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST_F(ServiceTest, UnknownSessionIs404) {
  auto res = client_->Get("/sessions/deadbeef");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  res = post("/sessions/deadbeef/ballots", Json{{"ranking", {"A"}}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(ServiceTest, SubmitUntilCertifiedThenClosed) {
  const std::string id = create();
  std::string decision = "ongoing";
  int submitted = 0;
  while (decision == "ongoing" && submitted < 30) {
    auto res = post("/sessions/" + id + "/ballots", Json{{"ranking", {"A", "B"}}});
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    const auto j = Json::parse(res->body);
    EXPECT_EQ(j["t"], ++submitted);
    decision = j["decision"];
  }
  EXPECT_EQ(decision, "certified");
  auto res = post("/sessions/" + id + "/ballots", Json{{"ranking", {"A"}}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);

  res = client_->Get("/sessions/" + id);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(Json::parse(res->body)["decision"], "certified");

  res = client_->Get("/sessions/" + id + "/log");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/x-ndjson");
  std::size_t lines = 0;
  for (const char ch : res->body) lines += ch == '\n';
  EXPECT_GE(lines, static_cast<std::size_t>(submitted) + 2);
}

TEST_F(ServiceTest, StatusReadsAreIdempotent) {
  const std::string id = create();
  post("/sessions/" + id + "/ballots", Json{{"ranking", "B>C"}});
  const auto a = client_->Get("/sessions/" + id);
  const auto log = client_->Get("/sessions/" + id + "/log");
  const auto b = client_->Get("/sessions/" + id);
  ASSERT_TRUE(a && b && log);
  EXPECT_EQ(a->body, b->body);
  EXPECT_EQ(client_->Get("/sessions/" + id + "/log")->body, log->body);
}

TEST_F(ServiceTest, CorsPreflight) {
  auto res = client_->Options("/sessions");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
}

}  // namespace
