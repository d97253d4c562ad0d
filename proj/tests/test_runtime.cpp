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

#include <cstdlib>
#include <map>

#include "agentry/runtime.hpp"
#include "doctest.h"
#include "scenarios.hpp"
#include "support.hpp"

using namespace agentry;
using namespace agentry::testing;

namespace {

std::shared_ptr<AgentInstance> agent_from(const std::string& yaml, std::shared_ptr<Backend> backend,
                                          const TempDir& dir, AssemblyOptions options = scenario_assembly()) {
  auto config = parse_agent_config(yaml, dir.path(), {});
  return assemble_agent(config, registry_with(std::move(backend)), options);
}

std::string react_yaml(int max_steps = 10) {
  return "name: r\nversion: 1\ntype: react\nllm: {model_name: m}\nplugins: [calculator, mock_search]\n"
         "max_steps: " + std::to_string(max_steps) + "\n";
}

const char* kRewooYaml = "name: w\nversion: 1\ntype: rewoo\nllm: {model_name: m}\nplugins: [calculator, mock_search]\n";
const char* kOpenAIYaml = "name: o\nversion: 1\ntype: openai\nllm: {model_name: m}\nplugins: [calculator]\nmax_steps: 3\n";
const char* kVanillaYaml = "name: v\nversion: 1\ntype: vanilla\nllm: {model_name: m}\n";

std::vector<EventKind> kinds(const std::vector<AgentEvent>& events) {
  std::vector<EventKind> out;
  for (const auto& e : events) out.push_back(e.kind);
  return out;
}

void check_well_formed(const EpisodeTrace& t) {
  REQUIRE(t.events.size() >= 2);
  CHECK(t.events.back().kind == EventKind::Usage);
  auto terminal = t.events[t.events.size() - 2].kind;
  CHECK((terminal == EventKind::Final || terminal == EventKind::Error));
  CHECK((terminal == EventKind::Error) == !t.ok());
  int terminals = 0, usages = 0;
  std::map<std::string, std::string> open_calls;
  for (const auto& e : t.events) {
    terminals += e.kind == EventKind::Final || e.kind == EventKind::Error;
    usages += e.kind == EventKind::Usage;
    CHECK(e.kind != EventKind::Token);
    if (e.kind == EventKind::ToolCall) open_calls[e.call_id] = e.tool;
    if (e.kind == EventKind::ToolResult) {
      auto it = open_calls.find(e.call_id);
      REQUIRE(it != open_calls.end());
      CHECK(it->second == e.tool);
      open_calls.erase(it);
    }
  }
  CHECK(terminals == 1);
  CHECK(usages == 1);
  CHECK(t.events.back().usage == t.usage);
  TokenUsage sum = t.child_usage;
  for (const auto& u : t.call_usages) sum += u;
  CHECK(sum.prompt_tokens == t.usage.prompt_tokens);
  CHECK(sum.completion_tokens == t.usage.completion_tokens);
  CHECK(static_cast<std::int64_t>(t.call_usages.size()) == t.llm_calls);
  CHECK(t.wall_time_ms >= 0);
}

}  // namespace

TEST_CASE("template scenarios match their golden traces") {
  bool update = std::getenv("AGENTRY_UPDATE_GOLDEN") != nullptr;
  for (const auto& s : template_scenarios()) {
    CAPTURE(s.template_name);
    auto run = run_template_scenario(s);
    check_well_formed(run.trace);
    CHECK(run.trace.ok());
    std::string actual = run.trace.to_json(false).dump(2) + "\n";
    std::string file = s.template_name + ".trace.json";
    if (update) write_text_file(golden_dir() / file, actual);
    CHECK(actual == read_golden(file));
  }
}

TEST_CASE("scripted usage equals the reference tokenizer on every call") {
  for (const auto& s : template_scenarios()) {
    CAPTURE(s.template_name);
    auto run = run_template_scenario(s);
    const auto& rec = *run.recorder;
    REQUIRE(rec.requests.size() == run.trace.call_usages.size());
    for (std::size_t i = 0; i < rec.requests.size(); ++i) {
      CHECK(run.trace.call_usages[i].prompt_tokens == reference_prompt_units(rec.requests[i]));
      CHECK(run.trace.call_usages[i].completion_tokens == reference_completion_units(rec.responses[i]));
    }
  }
}

TEST_CASE("ReAct hand-executed loop") {
  TempDir dir;
  auto backend = ScriptedBackend::with_texts(
      {"Thought: compute\nAction: calculator\nAction Input: 2+2", "Thought: done\nFinal Answer: 4"});
  auto agent = agent_from(react_yaml(), backend, dir);
  auto t = agent->run("What is 2+2?");
  check_well_formed(t);
  CHECK(t.answer == "4");
  CHECK(t.llm_calls == 2);
  CHECK(t.tool_calls == 1);
  CHECK(kinds(t.events) == std::vector<EventKind>{EventKind::Thought, EventKind::ToolCall, EventKind::ToolResult,
                                                  EventKind::Thought, EventKind::Final, EventKind::Usage});
  CHECK(t.events[2].text == "4");
}

TEST_CASE("ReAct scratchpad carries observations and stop sequences cut hallucinated ones") {
  TempDir dir;
  auto recorder = std::make_shared<RecordingBackend>(ScriptedBackend::with_texts(
      {"Thought: look\nAction: mock_search\nAction Input: capital of France\nObservation: made up",
       "Thought: ok\nFinal Answer: Paris"}));
  auto agent = agent_from(react_yaml(), recorder, dir);
  auto t = agent->run("Capital of France?");
  REQUIRE(t.ok());
  CHECK(t.answer == "Paris");
  REQUIRE(recorder->requests.size() == 2);
  CHECK(recorder->responses[0].content.find("made up") == std::string::npos);
  const std::string& second = recorder->requests[1].messages.back().content;
  CHECK(second.find("Thought: look\nAction: mock_search\nAction Input: capital of France\n"
                    "Observation: Paris is the capital of France.\n") != std::string::npos);
  const auto& stop = recorder->requests[0].spec.params.stop;
  CHECK(std::find(stop.begin(), stop.end(), "Observation:") != stop.end());
}

TEST_CASE("ReAct step limit keeps the partial trace") {
  TempDir dir;
  auto backend = ScriptedBackend::with_texts({"Thought: again\nAction: calculator\nAction Input: 1+1",
                                              "Thought: again\nAction: calculator\nAction Input: 1+1"});
  auto agent = agent_from(react_yaml(1), backend, dir);
  auto t = agent->run("loop");
  check_well_formed(t);
  REQUIRE(t.error);
  CHECK(t.error->kind == ErrorKind::StepLimitExceeded);
  CHECK(t.llm_calls == 1);
  CHECK(t.tool_calls == 1);
  CHECK(kinds(t.events) == std::vector<EventKind>{EventKind::Thought, EventKind::ToolCall, EventKind::ToolResult,
                                                  EventKind::Error, EventKind::Usage});
  CHECK(t.answer.empty());
}

TEST_CASE("ReAct retries malformed output once") {
  TempDir dir;
  auto ok = agent_from(react_yaml(), ScriptedBackend::with_texts({"I think 4", "Thought: fixed\nFinal Answer: 4"}), dir);
  auto t = ok->run("2+2");
  CHECK(t.ok());
  CHECK(t.answer == "4");
  CHECK(t.llm_calls == 2);

  auto bad = agent_from(react_yaml(), ScriptedBackend::with_texts({"nope", "still nope"}), dir);
  auto t2 = bad->run("2+2");
  check_well_formed(t2);
  REQUIRE(t2.error);
  CHECK(t2.error->kind == ErrorKind::MalformedModelOutput);
  CHECK(t2.llm_calls == 2);
}

TEST_CASE("ReAct tool errors become observations") {
  TempDir dir;
  auto recorder = std::make_shared<RecordingBackend>(ScriptedBackend::with_texts(
      {"Thought: try\nAction: teleport\nAction Input: moon", "Thought: try\nAction: calculator\nAction Input: 1/0",
       "Thought: give up\nFinal Answer: unknown"}));
  auto agent = agent_from(react_yaml(), recorder, dir);
  auto t = agent->run("go");
  CHECK(t.ok());
  CHECK(t.tool_calls == 2);
  CHECK_FALSE(t.events[2].ok);
  CHECK(t.events[2].text.find("valid tools: calculator, mock_search") != std::string::npos);
  CHECK(recorder->requests[2].messages.back().content.find("Observation: Error: ") != std::string::npos);
}

TEST_CASE("ReWOO resolves evidence in order with two model calls") {
  TempDir dir;
  auto recorder = std::make_shared<RecordingBackend>(
      ScriptedBackend::with_texts({"#E1 = calculator[3*3]\n#E2 = calculator[#E1+1]", "10"}));
  auto agent = agent_from(kRewooYaml, recorder, dir);
  auto t = agent->run("Square 3 and add 1");
  check_well_formed(t);
  CHECK(t.answer == "10");
  CHECK(t.llm_calls == 2);
  CHECK(t.tool_calls == 2);
  CHECK(kinds(t.events) == std::vector<EventKind>{EventKind::PlanStep, EventKind::PlanStep, EventKind::ToolCall,
                                                  EventKind::ToolResult, EventKind::ToolCall, EventKind::ToolResult,
                                                  EventKind::Final, EventKind::Usage});
  CHECK(t.events[1].text == "#E1+1");
  CHECK(t.events[1].call_id == "#E2");
  CHECK(t.events[3].text == "9");
  CHECK(t.events[4].text == "9+1");
  CHECK(t.events[5].text == "10");
  const std::string& solver_prompt = recorder->requests[1].messages.back().content;
  CHECK(solver_prompt.find("#E1 = calculator[3*3]\nEvidence: 9\n#E2 = calculator[9+1]\nEvidence: 10\n") !=
        std::string::npos);
}

TEST_CASE("ReWOO failures") {
  TempDir dir;
  auto failing = agent_from(kRewooYaml, ScriptedBackend::with_texts({"#E1 = calculator[1/0]", "x"}), dir);
  auto t = failing->run("divide");
  check_well_formed(t);
  REQUIRE(t.error);
  CHECK(t.error->kind == ErrorKind::ToolFailure);
  CHECK(t.error->message.find("calculator") != std::string::npos);

  auto dangling = agent_from(kRewooYaml, ScriptedBackend::with_texts({"#E1 = calculator[#E2]"}), dir);
  auto t2 = dangling->run("x");
  REQUIRE(t2.error);
  CHECK(t2.error->kind == ErrorKind::PlanReferenceError);

  auto unplanned = agent_from(kRewooYaml, ScriptedBackend::with_texts({"no plan", "still none"}), dir);
  auto t3 = unplanned->run("x");
  REQUIRE(t3.error);
  CHECK(t3.error->kind == ErrorKind::MalformedModelOutput);
  CHECK(t3.llm_calls == 2);
}

TEST_CASE("OpenAI paradigm loops over tool calls") {
  TempDir dir;
  auto recorder = std::make_shared<RecordingBackend>(ScriptedBackend::with_queue(
      {ScriptedReply::calls({tool_call("calculator", R"({"expression": "2*21"})"), tool_call("nope", "{}")},
                            "Checking."),
       ScriptedReply::text("42")}));
  auto agent = agent_from(kOpenAIYaml, recorder, dir);
  auto t = agent->run("2*21?");
  check_well_formed(t);
  CHECK(t.answer == "42");
  CHECK(t.llm_calls == 2);
  CHECK(t.tool_calls == 2);
  CHECK(kinds(t.events) == std::vector<EventKind>{EventKind::Thought, EventKind::ToolCall, EventKind::ToolResult,
                                                  EventKind::ToolCall, EventKind::ToolResult, EventKind::Final,
                                                  EventKind::Usage});
  CHECK(t.events[2].text == "42");
  CHECK_FALSE(t.events[4].ok);
  const auto& second = recorder->requests[1].messages;
  REQUIRE(second.size() >= 4);
  CHECK(second[second.size() - 3].tool_calls.size() == 2);
  CHECK(second[second.size() - 2].role == Role::Tool);
  CHECK(second[second.size() - 2].content == "42");
  CHECK(second.back().content.rfind("Error: ", 0) == 0);
  CHECK_FALSE(recorder->requests[0].tools.empty());

  auto looping = agent_from(kOpenAIYaml, ScriptedBackend::with_rules({{".*", ScriptedReply::calls({tool_call("calculator", "1+1")})}}), dir);
  auto t2 = looping->run("forever");
  REQUIRE(t2.error);
  CHECK(t2.error->kind == ErrorKind::StepLimitExceeded);
  CHECK(t2.llm_calls == 3);
}

TEST_CASE("model failures end the episode with an error") {
  TempDir dir;
  ScriptedReply down;
  down.fault = ScriptedReply::Fault::Transport;
  auto t = agent_from(kVanillaYaml, ScriptedBackend::with_queue({down}), dir)->run("hi");
  check_well_formed(t);
  REQUIRE(t.error);
  CHECK(t.error->kind == ErrorKind::TransportError);
  auto t2 = agent_from(kVanillaYaml, ScriptedBackend::with_texts({}), dir)->run("hi");
  REQUIRE(t2.error);
  CHECK(t2.error->kind == ErrorKind::ScriptExhausted);
  CHECK_THROWS_AS(agent_from(kVanillaYaml, ScriptedBackend::with_texts({"x"}), dir)->run("  "), Error);
}

TEST_CASE("stream delivers tokens and the same trace as run") {
  TempDir dir;
  auto script = std::vector<std::string>{"Thought: compute\nAction: calculator\nAction Input: 2+2",
                                         "Thought: done\nFinal Answer: 4"};
  auto ran = agent_from(react_yaml(), ScriptedBackend::with_texts(script), dir)->run("2+2?");
  RecordingHandler handler;
  auto streamed = agent_from(react_yaml(), ScriptedBackend::with_texts(script), dir)->stream("2+2?", handler);
  CHECK(streamed.to_json(true) == ran.to_json(true));

  std::vector<AgentEvent> non_tokens;
  std::string tokens;
  for (const auto& e : handler.events) {
    if (e.kind == EventKind::Token) {
      tokens += e.text;
    } else {
      non_tokens.push_back(e);
    }
  }
  CHECK(non_tokens == streamed.events);
  CHECK(tokens == script[0] + script[1]);
  CHECK(handler.events.front().kind == EventKind::Token);

  RecordingHandler vh;
  auto v = agent_from(kVanillaYaml, ScriptedBackend::with_texts({"hello world"}), dir)->stream("hi", vh);
  std::string joined;
  for (const auto& e : vh.events) {
    if (e.kind == EventKind::Token) joined += e.text;
  }
  CHECK(joined == v.answer);
}

TEST_CASE("a throwing handler aborts the episode") {
  struct Thrower : OutputHandler {
    int seen = 0;
    void on_event(const AgentEvent&) override {
      ++seen;
      throw std::runtime_error("display gone");
    }
  } handler;
  TempDir dir;
  auto t = agent_from(kVanillaYaml, ScriptedBackend::with_texts({"hello"}), dir)->stream("hi", handler);
  check_well_formed(t);
  REQUIRE(t.error);
  CHECK(t.error->kind == ErrorKind::HandlerAborted);
  CHECK(t.events[t.events.size() - 2].kind == EventKind::Error);
  CHECK(handler.seen == 1);
}

TEST_CASE("chat accumulates the session and skips failed turns") {
  TempDir dir;
  auto recorder = std::make_shared<RecordingBackend>(ScriptedBackend::with_texts({"Hi Ada.", "You are Ada."}));
  auto agent = agent_from(kVanillaYaml, recorder, dir);
  Session session;
  session.autosave_path = dir / "session.jsonl";
  CHECK(agent->chat(session, "I am Ada").ok());
  CHECK(agent->chat(session, "Who am I?").answer == "You are Ada.");
  REQUIRE(session.size() == 4);
  CHECK(session.messages()[0].content == "I am Ada");
  CHECK(session.messages()[3].content == "You are Ada.");
  CHECK(recorder->requests[1].messages.size() == 3);
  CHECK(recorder->requests[1].messages[1].content == "Hi Ada.");

  auto failed = agent->chat(session, "again?");
  CHECK_FALSE(failed.ok());
  CHECK(session.size() == 4);

  auto loaded = Session::load(*session.autosave_path);
  REQUIRE(loaded.size() == 4);
  CHECK(loaded.messages() == session.messages());
  CHECK(loaded.timestamp(0) == session.timestamp(0));
  CHECK_FALSE(session.timestamp(0).empty());
  CHECK_THROWS_AS(agent->chat(session, ""), Error);
}

TEST_CASE("memory agents archive old turns and recall them") {
  TempDir dir;
  const std::string yaml =
      "name: mem\nversion: 1\ntype: openai_memory\nllm: {model_name: m}\n"
      "memory: {dimension: 64, top_k: 2, context_budget: 12}\n";
  auto recorder = std::make_shared<RecordingBackend>(ScriptedBackend::with_texts(
      {"Nice, a cat named Tom.", "Paris is lovely in spring.", "Your cat is called Tom."}));
  auto agent = agent_from(yaml, recorder, dir);
  Session session;
  CHECK(agent->chat(session, "my cat is named Tom").ok());
  CHECK(agent->chat(session, "I visited Paris last spring").ok());
  REQUIRE(agent->memory());
  CHECK(agent->memory()->size() >= 1);
  CHECK(session.archived_pairs() == agent->memory()->size());
  CHECK(session_units(session.messages()) <= 12 + 10);

  CHECK(agent->chat(session, "what is my cat named?").ok());
  const auto& msgs = recorder->requests[2].messages;
  auto block = std::find_if(msgs.begin(), msgs.end(), [](const Message& m) {
    return m.role == Role::System && m.content.find("Relevant memory") != std::string::npos;
  });
  REQUIRE(block != msgs.end());
  CHECK(block->content.find("my cat is named Tom") != std::string::npos);
  CHECK(std::count(block->content.begin(), block->content.end(), '\n') <= 2);
  CHECK(std::next(block)->role == Role::User);
}

TEST_CASE("file-backed memory lives next to the config") {
  TempDir dir;
  dir.write("agent.yaml",
            "name: mem\nversion: 1\ntype: openai_memory\nllm: {model_name: m}\n"
            "memory: {context_budget: 3, path: state/memory.jsonl}\n");
  auto config = load_agent_config(dir / "agent.yaml", {});
  auto agent = assemble_agent(config, registry_with(ScriptedBackend::with_texts({"one two", "three four"})),
                              scenario_assembly());
  Session session;
  agent->chat(session, "first turn here");
  agent->chat(session, "second turn here");
  CHECK(std::filesystem::exists(dir / "state/memory.jsonl"));

  dir.write("api.yaml", "name: mem\nversion: 1\ntype: openai_memory\nllm: {model_name: m}\nmemory: {embedder: api}\n");
  auto api = load_agent_config(dir / "api.yaml", {});
  CHECK_THROWS_AS(assemble_agent(api, registry_with(std::make_shared<EchoBackend>())), Error);
}

TEST_CASE("observations are truncated to the unit cap") {
  TempDir dir;
  dir.write("big.txt", std::string(5000, 'a') + " tail");
  auto options = scenario_assembly();
  options.tool_env.sandbox_root = dir.path();
  options.runtime.observation_max_units = 3;
  std::string words;
  for (int i = 0; i < 50; ++i) words += "w" + std::to_string(i) + " ";
  dir.write("words.txt", words);
  auto recorder = std::make_shared<RecordingBackend>(ScriptedBackend::with_texts(
      {"Thought: read\nAction: file_reader\nAction Input: words.txt", "Thought: ok\nFinal Answer: done"}));
  auto agent = agent_from("name: r\nversion: 1\ntype: react\nllm: {model_name: m}\nplugins: [file_reader]\n",
                          recorder, dir, options);
  auto t = agent->run("read it");
  REQUIRE(t.ok());
  const std::string& prompt = recorder->requests[1].messages.back().content;
  CHECK(prompt.find("Observation: w0 w1 w2") != std::string::npos);
  CHECK(prompt.find("w3 ") == std::string::npos);
}
