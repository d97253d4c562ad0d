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

#include "agentry/llm.hpp"

#include "agentry/error.hpp"
#include "agentry/scripted_backend.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace agentry;
using agentry::testing::registry_with;
using agentry::testing::TempDir;

namespace {

CompletionRequest user_request(const std::string& text, const std::string& model = "m") {
  CompletionRequest r;
  r.messages.push_back(Message{Role::User, text, std::nullopt, {}});
  r.spec.model_name = model;
  return r;
}

}  // namespace

TEST_CASE("ModelSpec validation") {
  ModelSpec ok{"gpt", {}, std::nullopt, std::nullopt, std::nullopt};
  CHECK_NOTHROW(ok.validate());
  ModelSpec bad = ok;
  bad.params.temperature = -0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ok;
  bad.params.max_tokens = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = ok;
  bad.model_name.clear();
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("cost per thousand units") {
  TokenUsage u{1000, 500, 0};
  CHECK(compute_cost(u, CostPer1k{0.5, 1.5}) == doctest::Approx(1.25));
  CHECK(compute_cost(u, std::nullopt) == 0.0);
}

TEST_CASE("glob matching") {
  CHECK(glob_match("*", "anything"));
  CHECK(glob_match("gpt-*", "gpt-4o"));
  CHECK_FALSE(glob_match("gpt-*", "claude"));
  CHECK(glob_match("a*c*e", "abcde"));
  CHECK(glob_match("exact", "exact"));
  CHECK_FALSE(glob_match("exact", "exactly"));
}

TEST_CASE("registry routes by longest matching pattern") {
  auto general = ScriptedBackend::with_texts({"general"});
  auto specific = ScriptedBackend::with_texts({"specific"});
  BackendRegistry reg;
  reg.register_backend("*", general);
  reg.register_backend("judge-*", specific);
  CHECK(reg.resolve("judge-large") == specific);
  CHECK(reg.resolve("other") == general);
  CHECK(reg.complete(user_request("x", "judge-large")).content == "specific");
  CHECK_THROWS_AS(reg.register_backend("*", general), Error);

  BackendRegistry empty;
  try {
    empty.resolve("none");
    FAIL("expected UnknownBackend");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownBackend);
  }
}

TEST_CASE("request validation") {
  BackendRegistry reg;
  reg.register_backend("*", ScriptedBackend::with_texts({"a", "b"}));
  CompletionRequest empty;
  empty.spec.model_name = "m";
  CHECK_THROWS_AS(reg.complete(empty), Error);
  CompletionRequest twice = user_request("q");
  twice.messages.push_back(Message{Role::Assistant, "a", std::nullopt, {}});
  twice.messages.push_back(Message{Role::Assistant, "b", std::nullopt, {}});
  CHECK_THROWS_AS(reg.complete(twice), Error);
}

TEST_CASE("scripted queue replays in order and reports exhaustion") {
  auto b = ScriptedBackend::with_texts({"one", "two"});
  auto reg = registry_with(b);
  CHECK(reg->complete(user_request("a")).content == "one");
  CHECK(reg->complete(user_request("b")).content == "two");
  CHECK(b->remaining() == 0);
  CHECK(b->calls() == 2);
  try {
    reg->complete(user_request("c"));
    FAIL("expected ScriptExhausted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ScriptExhausted);
  }
}

TEST_CASE("scripted usage follows the reference tokenizer") {
  auto reg = registry_with(ScriptedBackend::with_texts({"three unit reply"}));
  CompletionRequest r = user_request("four units of prompt");
  r.messages.insert(r.messages.begin(), Message{Role::System, "be brief", std::nullopt, {}});
  CompletionResponse resp = reg->complete(r);
  CHECK(resp.usage.prompt_tokens == 6);
  CHECK(resp.usage.completion_tokens == 3);
  CHECK(count_request_units(r) == 6);
}

TEST_CASE("stop sequences truncate and max_tokens limits length") {
  auto reg = registry_with(ScriptedBackend::with_texts({"Thought: x\nObservation: fake", "a b c d e"}));
  CompletionRequest r = user_request("q");
  r.spec.params.stop = {"Observation:"};
  CompletionResponse first = reg->complete(r);
  CHECK(first.content == "Thought: x\n");
  CHECK(first.finish_reason == FinishReason::Stop);
  CompletionRequest r2 = user_request("q");
  r2.spec.params.max_tokens = 3;
  CompletionResponse second = reg->complete(r2);
  CHECK(second.finish_reason == FinishReason::Length);
  CHECK(second.usage.completion_tokens == 3);
}

TEST_CASE("rules mode matches the last message and is stateless") {
  auto b = ScriptedBackend::with_rules({{"capital", ScriptedReply::text("Paris")},
                                        {".*", ScriptedReply::text("unknown")}});
  auto reg = registry_with(b);
  for (int i = 0; i < 3; ++i) {
    CHECK(reg->complete(user_request("capital of France?")).content == "Paris");
    CHECK(reg->complete(user_request("weather")).content == "unknown");
  }
}

TEST_CASE("tool calls and faults from JSON scripts") {
  auto b = ScriptedBackend::from_json(nlohmann::json::parse(R"([
    {"tool_calls": [{"name": "calculator", "arguments": {"expression": "1+1"}}]},
    {"fault": "transport"},
    {"fault": "refusal"}
  ])"));
  auto reg = registry_with(b);
  CompletionResponse r = reg->complete(user_request("q"));
  CHECK(r.finish_reason == FinishReason::ToolCalls);
  REQUIRE(r.tool_calls.size() == 1);
  CHECK(r.tool_calls[0].tool_name == "calculator");
  CHECK(r.tool_calls[0].call_id == "call_1");
  CHECK(nlohmann::json::parse(r.tool_calls[0].arguments)["expression"] == "1+1");
  try {
    reg->complete(user_request("q"));
    FAIL("expected transport error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TransportError);
  }
  try {
    reg->complete(user_request("q"));
    FAIL("expected refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BackendRefusal);
  }
}

TEST_CASE("streaming emits fixed-size chunks whose concatenation is the content") {
  auto b = ScriptedBackend::with_texts({"hello world", "hello world", ""});
  b->set_chunk_size(5);
  auto reg = registry_with(b);
  std::vector<std::string> chunks;
  CompletionResponse r = reg->stream_complete(user_request("q"), [&](std::string_view c) { chunks.emplace_back(c); });
  CHECK(chunks == std::vector<std::string>{"hello", " worl", "d"});
  CHECK(r.content == reg->complete(user_request("q")).content);
  CHECK(r.usage.completion_tokens == 2);

  chunks.clear();
  CompletionResponse empty = reg->stream_complete(user_request("q"), [&](std::string_view c) { chunks.emplace_back(c); });
  CHECK(chunks.empty());
  CHECK(empty.finish_reason == FinishReason::Stop);
}

TEST_CASE("a stream can fail midway") {
  auto b = ScriptedBackend::from_json(nlohmann::json::parse(
      R"({"queue": [{"content": "abcdef", "fail_after_chunks": 1}], "chunk_size": 2})"));
  auto reg = registry_with(b);
  int chunks = 0;
  CompletionResponse r = reg->stream_complete(user_request("q"), [&](std::string_view) { ++chunks; });
  CHECK(chunks == 1);
  CHECK(r.finish_reason == FinishReason::Error);
}

TEST_CASE("cost comes from the spec, then from the table") {
  auto reg = registry_with(ScriptedBackend::with_texts({"x y", "x y"}));
  reg->set_cost_table({{"m", CostPer1k{1000, 2000}}});
  CompletionRequest r = user_request("a b c");
  CompletionResponse from_table = reg->complete(r);
  CHECK(from_table.usage.cost == doctest::Approx(3 * 1.0 + 2 * 2.0));
  r.spec.cost_per_1k = CostPer1k{0, 1000};
  CompletionResponse from_spec = reg->complete(r);
  CHECK(from_spec.usage.cost == doctest::Approx(2.0));
}

TEST_CASE("cost table file") {
  TempDir dir;
  auto p = dir.write("costs.yaml", "gpt-4o-mini:\n  prompt: 0.15\n  completion: 0.6\n");
  auto table = load_cost_table(p.string());
  REQUIRE(table.count("gpt-4o-mini") == 1);
  CHECK(table["gpt-4o-mini"].completion == doctest::Approx(0.6));
}
