/*
 * Copyright 2026 The Agentry Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "agentry/chat_client.hpp"

#include <thread>

#include "agentry/error.hpp"
#include "doctest.h"
#include "httplib.h"

using namespace agentry;
using nlohmann::json;

namespace {

// Minimal chat-completions endpoint on localhost.
class FakeApi {
 public:
  FakeApi() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_body = json::parse(req.body);
      last_auth = req.get_header_value("Authorization");
      if (last_body.value("model", "") == "refuse") {
        res.status = 429;
        res.set_content(R"({"error":"rate limited"})", "application/json");
        return;
      }
      if (last_body.value("stream", false)) {
        std::string sse =
            "data: {\"choices\":[{\"delta\":{\"content\":\"Hel\"}}]}\n\n"
            "data: {\"choices\":[{\"delta\":{\"content\":\"lo\"}}]}\n\n"
            "data: {\"choices\":[{\"delta\":{\"tool_calls\":[{\"index\":0,\"id\":\"c1\",\"function\":"
            "{\"name\":\"calc\",\"arguments\":\"{\\\"x\\\":\"}}]}}]}\n\n"
            "data: {\"choices\":[{\"delta\":{\"tool_calls\":[{\"index\":0,\"function\":{\"arguments\":\"1}\"}}]},"
            "\"finish_reason\":\"tool_calls\"}]}\n\n"
            "data: {\"choices\":[],\"usage\":{\"prompt_tokens\":9,\"completion_tokens\":4}}\n\n"
            "data: [DONE]\n\n";
        res.set_content(sse, "text/event-stream");
        return;
      }
      res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"hi there"},
                           "finish_reason":"stop"}],"usage":{"prompt_tokens":5,"completion_tokens":2}})",
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeApi() {
    server_.stop();
    thread_.join();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  json last_body;
  std::string last_auth;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

CompletionRequest request(const std::string& model) {
  CompletionRequest r;
  r.messages.push_back(Message{Role::User, "hello", std::nullopt, {}});
  r.spec.model_name = model;
  return r;
}

}  // namespace

TEST_CASE("url parsing") {
  ParsedUrl u = parse_url("https://api.example.com/v1");
  CHECK(u.scheme == "https");
  CHECK(u.host == "api.example.com");
  CHECK(u.port == 443);
  CHECK(u.path == "/v1");
  ParsedUrl local = parse_url("http://127.0.0.1:8080");
  CHECK(local.port == 8080);
  CHECK(local.path == "/");
  CHECK_THROWS_AS(parse_url("ftp://x"), Error);
}

TEST_CASE("request body carries messages, tools and params") {
  CompletionRequest r = request("gpt");
  r.spec.params.stop = {"Observation:"};
  r.spec.params.seed = 3;
  r.tools.push_back(ToolDescriptor{"calculator", "Evaluates arithmetic.", true, {}, false});
  Message assistant{Role::Assistant, "", std::nullopt, {{"c1", "calculator", "{\"input\":\"1+1\"}"}}};
  r.messages.push_back(assistant);
  r.messages.push_back(Message{Role::Tool, "2", std::string("c1"), {}});
  json body = ChatCompletionsClient::build_body(r, false);
  CHECK(body["model"] == "gpt");
  CHECK(body["stop"][0] == "Observation:");
  CHECK(body["seed"] == 3);
  CHECK(body["tools"][0]["function"]["name"] == "calculator");
  CHECK(body["messages"][1]["tool_calls"][0]["id"] == "c1");
  CHECK(body["messages"][2]["tool_call_id"] == "c1");
  CHECK_FALSE(body.contains("stream"));
  CHECK(ChatCompletionsClient::build_body(r, true)["stream"] == true);
}

TEST_CASE("response parsing") {
  auto r = ChatCompletionsClient::parse_response(json::parse(R"({"choices":[{"message":{"content":null,
      "tool_calls":[{"id":"a","function":{"name":"f","arguments":"{}"}}]},"finish_reason":"tool_calls"}]})"));
  CHECK(r.finish_reason == FinishReason::ToolCalls);
  CHECK(r.tool_calls.at(0).tool_name == "f");
  CHECK_THROWS_AS(ChatCompletionsClient::parse_response(json::parse(R"({"choices":[]})")), Error);
}

TEST_CASE("blocking and streaming calls against a local endpoint") {
  FakeApi api;
  ChatCompletionsClient client({api.base(), "k-123", 5000, 0});
  CompletionResponse r = client.complete(request("gpt"));
  CHECK(r.content == "hi there");
  CHECK(r.usage.prompt_tokens == 5);
  CHECK(api.last_auth == "Bearer k-123");

  std::string streamed;
  CompletionResponse s = client.stream_complete(request("gpt"), [&](std::string_view c) { streamed += c; });
  CHECK(streamed == "Hello");
  CHECK(s.content == "Hello");
  CHECK(s.finish_reason == FinishReason::ToolCalls);
  REQUIRE(s.tool_calls.size() == 1);
  CHECK(s.tool_calls[0].arguments == "{\"x\":1}");
  CHECK(s.usage.completion_tokens == 4);
}

TEST_CASE("non-2xx is a refusal, an unreachable host a transport error") {
  FakeApi api;
  ChatCompletionsClient client({api.base(), "", 5000, 0});
  try {
    client.complete(request("refuse"));
    FAIL("expected refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BackendRefusal);
    CHECK(e.detail().find("429") != std::string::npos);
  }
  ChatCompletionsClient dead({"http://127.0.0.1:1/v1", "", 500, 0});
  try {
    dead.complete(request("gpt"));
    FAIL("expected transport error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TransportError);
  }
}

TEST_CASE("spec api_base overrides the client default") {
  FakeApi api;
  ChatCompletionsClient client({"http://127.0.0.1:1/v1", "", 5000, 0});
  CompletionRequest r = request("gpt");
  r.spec.api_base = api.base();
  CHECK(client.complete(r).content == "hi there");
}
