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

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentry/builtin_tools.hpp"
#include "agentry/config.hpp"
#include "agentry/error.hpp"
#include "agentry/llm.hpp"
#include "agentry/memory.hpp"
#include "agentry/tools.hpp"

namespace agentry {

enum class EventKind { Thought, ToolCall, ToolResult, Token, PlanStep, Final, Usage, Error };
std::string_view to_string(EventKind kind) noexcept;

struct AgentEvent {
  EventKind kind = EventKind::Thought;
  // Thought/Token/Final text, ToolCall input, ToolResult output (or error),
  // PlanStep input, Error message.
  std::string text;
  std::string tool;     // ToolCall, ToolResult, PlanStep
  std::string call_id;  // ToolCall, ToolResult; evidence id for PlanStep
  bool ok = true;       // ToolResult
  std::optional<ErrorKind> error_kind;  // Error
  TokenUsage usage;                     // Usage
  std::int64_t wall_time_ms = 0;        // Usage

  nlohmann::json to_json(bool include_timing = true) const;
  bool operator==(const AgentEvent&) const = default;
};

struct EpisodeError {
  ErrorKind kind = ErrorKind::Internal;
  std::string message;
  bool operator==(const EpisodeError&) const = default;
};

// Everything an episode produced. Token events are never stored here; they
// only reach stream handlers.
struct EpisodeTrace {
  std::vector<AgentEvent> events;
  std::string answer;
  std::int64_t steps = 0;
  std::int64_t llm_calls = 0;
  std::int64_t tool_calls = 0;
  TokenUsage usage;
  std::int64_t wall_time_ms = 0;
  std::optional<EpisodeError> error;
  // Usage of each model call this agent made itself, in order.
  std::vector<TokenUsage> call_usages;
  // Usage folded in from sub-agent tools.
  TokenUsage child_usage;

  bool ok() const { return !error.has_value(); }
  // Timing fields are omitted when include_timing is false so that traces
  // from different runs compare byte-for-byte.
  nlohmann::json to_json(bool include_timing = true) const;
};

class OutputHandler {
 public:
  virtual ~OutputHandler() = default;
  virtual void on_event(const AgentEvent& event) = 0;
};

// Collects every event, Token included.
class RecordingHandler : public OutputHandler {
 public:
  void on_event(const AgentEvent& event) override { events.push_back(event); }
  std::vector<AgentEvent> events;
};

struct ReActAction {
  std::string tool;
  std::string input;
};

struct ReActStep {
  std::string thought;
  std::optional<ReActAction> action;
  std::optional<std::string> final_answer;
};

// `Thought: ...` then either `Action: NAME` + `Action Input: ...` or
// `Final Answer: ...`. Only the first line of the action input is used.
ReActStep parse_react(std::string_view completion);

struct RewooStep {
  std::string evidence_id;  // "#E1", "#E2", ...
  std::string tool;
  std::string input;
  std::string plan;  // preceding `Plan:` prose, if any
  std::vector<int> depends_on;
};

struct RewooPlan {
  std::vector<RewooStep> steps;
};

// Lines `#Ek = tool[input]`; `Plan:` lines annotate the next step and other
// prose is ignored. Ids must run #E1..#En and may only reference earlier ids.
RewooPlan parse_rewoo_plan(std::string_view completion);

// Replaces every #Ej in `input` with its evidence. PlanReferenceError when
// an id has no evidence yet.
std::string substitute_evidence(std::string_view input,
                                const std::vector<std::string>& evidence);

// Chat transcript with per-message timestamps. Line-delimited JSON on disk.
class Session {
 public:
  void append(Role role, std::string content);
  const std::vector<Message>& messages() const { return messages_; }
  const std::string& timestamp(std::size_t i) const { return timestamps_.at(i); }
  std::size_t size() const { return messages_.size(); }
  std::size_t archived_pairs() const { return archived_pairs_; }

  // Keeps the retained messages (an ordered subsequence) with their timestamps.
  void retain(const std::vector<Message>& kept, std::size_t newly_archived);

  void save(const std::filesystem::path& path) const;
  static Session load(const std::filesystem::path& path);

  std::optional<std::filesystem::path> autosave_path;

 private:
  std::vector<Message> messages_;
  std::vector<std::string> timestamps_;
  std::size_t archived_pairs_ = 0;
};

using ClockFn = std::function<std::chrono::steady_clock::time_point()>;

struct RuntimeOptions {
  int max_steps = 10;
  int malformed_retries = 1;
  std::size_t observation_max_units = 2048;
  ToolBudget tool_budget;
  ClockFn clock;  // defaults to steady_clock::now
};

class Episode;

// An assembled agent. One episode or chat session at a time per instance;
// distinct instances may run concurrently.
class AgentInstance {
 public:
  AgentInstance(AgentConfig config, std::shared_ptr<const BackendRegistry> backends,
                ToolRegistry tools, RuntimeOptions options);
  virtual ~AgentInstance() = default;

  AgentInstance(const AgentInstance&) = delete;
  AgentInstance& operator=(const AgentInstance&) = delete;

  const AgentConfig& config() const { return config_; }
  const ToolRegistry& tools() const { return tools_; }
  const RuntimeOptions& options() const { return options_; }
  AgentType type() const { return config_.agent_type; }

  // InvalidInput for an empty instruction; every other failure is reported
  // in EpisodeTrace::error.
  EpisodeTrace run(std::string_view instruction);
  EpisodeTrace stream(std::string_view instruction, OutputHandler& handler);
  // Runs one user turn against the accumulated session. On success the
  // (user, assistant) pair is appended; failed turns leave the session as is.
  EpisodeTrace chat(Session& session, std::string_view user_text, OutputHandler* handler = nullptr);

  virtual MemoryStore* memory() { return nullptr; }

 protected:
  friend class Episode;
  virtual std::string execute(Episode& episode) = 0;
  virtual void after_turn(Session&) {}

  const BackendRegistry& backends() const { return *backends_; }

 private:
  EpisodeTrace run_episode(std::string_view instruction, const std::vector<Message>& history,
                           OutputHandler* handler, bool streaming);

  AgentConfig config_;
  std::shared_ptr<const BackendRegistry> backends_;
  ToolRegistry tools_;
  RuntimeOptions options_;
};

// Per-episode state handed to the paradigm implementations.
class Episode {
 public:
  Episode(AgentInstance& agent, std::string instruction, std::vector<Message> history,
          OutputHandler* handler, bool streaming, EpisodeTrace& trace);

  const std::string& instruction() const { return instruction_; }
  const std::vector<Message>& history() const { return history_; }
  AgentInstance& agent() { return agent_; }

  CompletionResponse call_model(const ModelSpec& spec, std::vector<Message> messages,
                                const std::vector<ToolDescriptor>& tools = {});
  ToolResult call_tool(const std::string& tool, ToolInput input);
  void emit(AgentEvent event);

  EpisodeTrace& trace() { return trace_; }

 private:
  AgentInstance& agent_;
  std::string instruction_;
  std::vector<Message> history_;
  OutputHandler* handler_;
  bool streaming_;
  EpisodeTrace& trace_;
  bool handler_failed_ = false;
  int next_call_ = 1;

  friend class AgentInstance;
};

// Concrete paradigm for `config.agent_type`. OpenAIMemory instances own a
// MemoryStore built from `config.memory` (defaults when absent).
std::shared_ptr<AgentInstance> make_agent_instance(AgentConfig config,
                                                   std::shared_ptr<const BackendRegistry> backends,
                                                   ToolRegistry tools, RuntimeOptions options);

// Exposes a child agent as a tool named after it; its usage is reported in
// the ToolResult so callers can fold it into their own totals.
Tool agent_as_tool(std::shared_ptr<AgentInstance> child);

struct AssemblyOptions {
  BuiltinToolEnv tool_env;
  RuntimeOptions runtime;
  std::size_t max_depth = 8;
  // Additional named tools resolvable from plain plugin entries.
  std::vector<Tool> extra_tools;
};

// Checks every model name and tool, then builds the instance; sub-agent
// plugins are assembled recursively and wrapped with agent_as_tool.
std::shared_ptr<AgentInstance> assemble_agent(const AgentConfig& config,
                                              std::shared_ptr<const BackendRegistry> backends,
                                              const AssemblyOptions& options = {});

}  // namespace agentry
