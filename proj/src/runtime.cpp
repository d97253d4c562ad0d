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

#include "agentry/runtime.hpp"

#include <fstream>

#include "agentry/prompt.hpp"
#include "agentry/text.hpp"

namespace agentry {

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::Thought: return "thought";
    case EventKind::ToolCall: return "tool_call";
    case EventKind::ToolResult: return "tool_result";
    case EventKind::Token: return "token";
    case EventKind::PlanStep: return "plan_step";
    case EventKind::Final: return "final";
    case EventKind::Usage: return "usage";
    case EventKind::Error: return "error";
  }
  return "error";
}

nlohmann::json AgentEvent::to_json(bool include_timing) const {
  nlohmann::json j = {{"type", to_string(kind)}};
  switch (kind) {
    case EventKind::Thought:
    case EventKind::Token:
    case EventKind::Final:
      j["text"] = text;
      break;
    case EventKind::ToolCall:
      j["call_id"] = call_id;
      j["tool"] = tool;
      j["input"] = text;
      break;
    case EventKind::ToolResult:
      j["call_id"] = call_id;
      j["tool"] = tool;
      j["ok"] = ok;
      j[ok ? "output" : "error"] = text;
      break;
    case EventKind::PlanStep:
      j["evidence_id"] = call_id;
      j["tool"] = tool;
      j["input"] = text;
      break;
    case EventKind::Usage:
      j["prompt_tokens"] = usage.prompt_tokens;
      j["completion_tokens"] = usage.completion_tokens;
      j["cost"] = usage.cost;
      if (include_timing) j["wall_time_ms"] = wall_time_ms;
      break;
    case EventKind::Error:
      j["kind"] = error_kind ? std::string(to_string(*error_kind)) : std::string("Internal");
      j["message"] = text;
      break;
  }
  return j;
}

nlohmann::json EpisodeTrace::to_json(bool include_timing) const {
  nlohmann::json events_json = nlohmann::json::array();
  for (const auto& e : events) events_json.push_back(e.to_json(include_timing));
  nlohmann::json j = {{"answer", answer},
                      {"steps", steps},
                      {"llm_calls", llm_calls},
                      {"tool_calls", tool_calls},
                      {"usage",
                       {{"prompt_tokens", usage.prompt_tokens},
                        {"completion_tokens", usage.completion_tokens},
                        {"cost", usage.cost}}},
                      {"events", events_json}};
  if (include_timing) j["wall_time_ms"] = wall_time_ms;
  if (error) j["error"] = {{"kind", to_string(error->kind)}, {"message", error->message}};
  return j;
}

// ---------------------------------------------------------------------------
// Session

void Session::append(Role role, std::string content) {
  messages_.push_back(Message{role, std::move(content), std::nullopt, {}});
  timestamps_.push_back(utc_timestamp());
}

void Session::retain(const std::vector<Message>& kept, std::size_t newly_archived) {
  std::vector<Message> msgs;
  std::vector<std::string> stamps;
  std::size_t j = 0;
  for (std::size_t i = 0; i < messages_.size() && j < kept.size(); ++i) {
    if (messages_[i] == kept[j]) {
      msgs.push_back(messages_[i]);
      stamps.push_back(timestamps_[i]);
      ++j;
    }
  }
  messages_ = std::move(msgs);
  timestamps_ = std::move(stamps);
  archived_pairs_ += newly_archived;
}

void Session::save(const std::filesystem::path& path) const {
  std::string out;
  for (std::size_t i = 0; i < messages_.size(); ++i) {
    nlohmann::json j = {{"role", to_string(messages_[i].role)},
                        {"content", messages_[i].content},
                        {"timestamp", timestamps_[i]}};
    out += j.dump() + "\n";
  }
  write_text_file(path, out);
}

Session Session::load(const std::filesystem::path& path) {
  Session s;
  if (!std::filesystem::exists(path)) return s;
  std::ifstream in(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      fail(ErrorKind::SchemaError, path.string() + ":" + std::to_string(lineno));
    }
    s.messages_.push_back(Message{role_from_string(j.value("role", "user")),
                                  j.value("content", std::string{}), std::nullopt, {}});
    s.timestamps_.push_back(j.value("timestamp", std::string{}));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Episode

Episode::Episode(AgentInstance& agent, std::string instruction, std::vector<Message> history,
                 OutputHandler* handler, bool streaming, EpisodeTrace& trace)
    : agent_(agent),
      instruction_(std::move(instruction)),
      history_(std::move(history)),
      handler_(handler),
      streaming_(streaming),
      trace_(trace) {}

void Episode::emit(AgentEvent event) {
  if (event.kind != EventKind::Token) trace_.events.push_back(event);
  if (handler_ == nullptr || handler_failed_) return;
  try {
    handler_->on_event(event);
  } catch (const std::exception& e) {
    handler_failed_ = true;
    fail(ErrorKind::HandlerAborted, e.what());
  } catch (...) {
    handler_failed_ = true;
    fail(ErrorKind::HandlerAborted, "output handler threw");
  }
}

CompletionResponse Episode::call_model(const ModelSpec& spec, std::vector<Message> messages,
                                       const std::vector<ToolDescriptor>& tools) {
  CompletionRequest request{std::move(messages), tools, spec};
  ++trace_.llm_calls;
  CompletionResponse response;
  try {
    if (streaming_) {
      response = agent_.backends().stream_complete(request, [this](std::string_view chunk) {
        emit(AgentEvent{EventKind::Token, std::string(chunk)});
      });
    } else {
      response = agent_.backends().complete(request);
    }
  } catch (...) {
    trace_.call_usages.emplace_back();
    throw;
  }
  trace_.call_usages.push_back(response.usage);
  trace_.usage += response.usage;
  if (response.finish_reason == FinishReason::Error) {
    fail(ErrorKind::TransportError,
         response.error.empty() ? std::string("model stream failed") : response.error);
  }
  return response;
}

ToolResult Episode::call_tool(const std::string& tool, ToolInput input) {
  ToolCall call{"call_" + std::to_string(next_call_++), tool, std::move(input)};
  ++trace_.tool_calls;
  emit(AgentEvent{EventKind::ToolCall, call.input.text, tool, call.call_id});
  ToolResult result;
  if (!agent_.tools().contains(tool)) {
    std::string valid;
    for (const auto& n : agent_.tools().names()) valid += (valid.empty() ? "" : ", ") + n;
    result = ToolResult::failure(call.call_id, "unknown tool '" + tool + "'; valid tools: " + valid);
  } else {
    result = agent_.tools().invoke(call, agent_.options().tool_budget);
  }
  trace_.usage += result.usage;
  trace_.child_usage += result.usage;
  AgentEvent ev{EventKind::ToolResult, result.ok ? result.output : result.error.value_or("error"),
                tool, call.call_id};
  ev.ok = result.ok;
  emit(std::move(ev));
  return result;
}

// ---------------------------------------------------------------------------
// AgentInstance

AgentInstance::AgentInstance(AgentConfig config, std::shared_ptr<const BackendRegistry> backends,
                             ToolRegistry tools, RuntimeOptions options)
    : config_(std::move(config)),
      backends_(std::move(backends)),
      tools_(std::move(tools)),
      options_(std::move(options)) {
  if (!backends_) fail(ErrorKind::AssemblyError, "no backend registry");
  if (config_.max_steps) options_.max_steps = *config_.max_steps;
  if (!options_.clock) options_.clock = [] { return std::chrono::steady_clock::now(); };
}

EpisodeTrace AgentInstance::run(std::string_view instruction) {
  if (trim(instruction).empty()) fail(ErrorKind::InvalidInput, "empty instruction");
  return run_episode(instruction, {}, nullptr, false);
}

EpisodeTrace AgentInstance::stream(std::string_view instruction, OutputHandler& handler) {
  if (trim(instruction).empty()) fail(ErrorKind::InvalidInput, "empty instruction");
  return run_episode(instruction, {}, &handler, true);
}

EpisodeTrace AgentInstance::chat(Session& session, std::string_view user_text,
                                 OutputHandler* handler) {
  if (trim(user_text).empty()) fail(ErrorKind::InvalidInput, "empty user turn");
  EpisodeTrace trace = run_episode(user_text, session.messages(), handler, handler != nullptr);
  if (trace.ok()) {
    session.append(Role::User, std::string(user_text));
    session.append(Role::Assistant, trace.answer);
    after_turn(session);
  }
  if (session.autosave_path) session.save(*session.autosave_path);
  return trace;
}

EpisodeTrace AgentInstance::run_episode(std::string_view instruction,
                                        const std::vector<Message>& history,
                                        OutputHandler* handler, bool streaming) {
  EpisodeTrace trace;
  auto start = options_.clock();
  Episode ep(*this, std::string(instruction), history, handler, streaming, trace);
  auto record_error = [&](ErrorKind kind, const std::string& message) {
    if (!trace.events.empty() && trace.events.back().kind == EventKind::Final) {
      trace.events.pop_back();
      trace.answer.clear();
    }
    trace.error = EpisodeError{kind, message};
    AgentEvent ev{EventKind::Error, message};
    ev.error_kind = kind;
    try {
      ep.emit(std::move(ev));
    } catch (const Error&) {
    }
  };
  try {
    std::string answer = execute(ep);
    trace.answer = answer;
    ep.emit(AgentEvent{EventKind::Final, std::move(answer)});
  } catch (const Error& e) {
    record_error(e.kind(), e.detail());
  } catch (const std::exception& e) {
    record_error(ErrorKind::Internal, e.what());
  }
  auto elapsed = options_.clock() - start;
  trace.wall_time_ms = std::max<std::int64_t>(
      0, std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count());
  AgentEvent usage{EventKind::Usage};
  usage.usage = trace.usage;
  usage.wall_time_ms = trace.wall_time_ms;
  try {
    ep.emit(std::move(usage));
  } catch (const Error&) {
    // Handler already failed on an earlier event; the trace is complete.
  }
  return trace;
}

namespace {

// Values for every variable the template declares; MissingBinding otherwise.
std::string render_slots(const PromptTemplate& prompt, const Bindings& candidates) {
  Bindings b;
  for (const auto& var : prompt.input_variables) {
    auto it = candidates.find(var);
    if (it == candidates.end()) fail(ErrorKind::MissingBinding, var);
    b.emplace(var, it->second);
  }
  return render(prompt, b);
}

std::vector<Message> with_user(std::vector<Message> history, std::string content) {
  history.push_back(Message{Role::User, std::move(content), std::nullopt, {}});
  return history;
}

std::string join_names(const ToolRegistry& tools) {
  std::string out;
  for (const auto& n : tools.names()) out += (out.empty() ? "" : ", ") + n;
  return out;
}

class VanillaAgent : public AgentInstance {
 public:
  using AgentInstance::AgentInstance;

 protected:
  std::string execute(Episode& ep) override {
    PromptTemplate prompt = config().prompt_template.value_or(default_template(AgentType::Vanilla));
    std::string text = render_slots(prompt, {{"instruction", ep.instruction()}});
    ++ep.trace().steps;
    return ep.call_model(config().llm, with_user(ep.history(), text)).content;
  }
};

class OpenAIAgent : public AgentInstance {
 public:
  using AgentInstance::AgentInstance;

 protected:
  std::string execute(Episode& ep) override {
    PromptTemplate prompt = config().prompt_template.value_or(default_template(type()));
    std::string text = render_slots(prompt, {{"instruction", ep.instruction()},
                                             {"tool_descriptions", tools().render_descriptions()},
                                             {"tool_names", join_names(tools())}});
    std::vector<Message> base = ep.history();
    auto descriptors = tools().descriptors();
    std::vector<Message> turn;  // assistant/tool messages of this episode
    for (int step = 0; step < options().max_steps; ++step) {
      std::vector<Message> messages = base;
      augment(ep, messages);
      messages.push_back(Message{Role::User, text, std::nullopt, {}});
      messages.insert(messages.end(), turn.begin(), turn.end());
      ++ep.trace().steps;
      CompletionResponse r = ep.call_model(config().llm, std::move(messages), descriptors);
      if (r.finish_reason != FinishReason::ToolCalls) return r.content;
      if (!trim(r.content).empty()) ep.emit(AgentEvent{EventKind::Thought, r.content});
      turn.push_back(Message{Role::Assistant, r.content, std::nullopt, r.tool_calls});
      for (const auto& call : r.tool_calls) {
        ToolInput input = ToolInput::raw(call.arguments);
        if (tools().contains(call.tool_name)) {
          input = tool_input_from_arguments(tools().get(call.tool_name).descriptor(), call.arguments);
        }
        ToolResult res = ep.call_tool(call.tool_name, std::move(input));
        std::string content = res.ok ? res.output : "Error: " + res.error.value_or("tool failed");
        turn.push_back(Message{Role::Tool, std::move(content), call.call_id, {}});
      }
    }
    fail(ErrorKind::StepLimitExceeded, "no final answer within " +
                                           std::to_string(options().max_steps) + " model calls");
  }

  // Hook for extra context ahead of the latest user turn.
  virtual void augment(Episode&, std::vector<Message>&) {}
};

class OpenAIMemoryAgent : public OpenAIAgent {
 public:
  OpenAIMemoryAgent(AgentConfig config, std::shared_ptr<const BackendRegistry> backends,
                    ToolRegistry tools, RuntimeOptions options)
      : OpenAIAgent(config, std::move(backends), std::move(tools), std::move(options)),
        store_(make_store(config)) {}

  MemoryStore* memory() override { return &store_; }

 protected:
  void augment(Episode& ep, std::vector<Message>& messages) override {
    auto recalled = store_.recall(ep.instruction(), store_.config().top_k);
    if (recalled.empty()) return;
    messages.push_back(Message{Role::System, format_recall_block(recalled), std::nullopt, {}});
  }

  void after_turn(Session& session) override {
    ArchiveOutcome out = archive_overflow(session.messages(), store_, store_.config().context_budget);
    if (out.archived_pairs > 0) session.retain(out.session, out.archived_pairs);
  }

 private:
  static MemoryStore make_store(const AgentConfig& config) {
    MemoryConfig mc = config.memory.value_or(MemoryConfig{});
    if (mc.embedder == EmbedderKind::Api) {
      fail(ErrorKind::InvalidConfig, "memory.embedder 'api' is not available in this build");
    }
    if (mc.path) {
      std::filesystem::path p(*mc.path);
      if (p.is_relative() && !config.source_path.empty()) p = config.source_path.parent_path() / p;
      return MemoryStore::open(p, mc);
    }
    return MemoryStore(mc);
  }

  MemoryStore store_;
};

constexpr const char* kReActFormatReminder =
    "Your reply did not follow the required format. Reply with 'Thought:' followed by either "
    "'Action:' and 'Action Input:' lines, or a 'Final Answer:' line.";

constexpr const char* kPlanFormatReminder =
    "Your plan did not follow the required format. Write each step as '#E<k> = tool[input]' "
    "with ids #E1, #E2, ... in order.";

class ReActAgent : public AgentInstance {
 public:
  using AgentInstance::AgentInstance;

 protected:
  std::string execute(Episode& ep) override {
    PromptTemplate prompt = config().prompt_template.value_or(default_template(AgentType::ReAct));
    ModelSpec spec = config().llm;
    if (std::find(spec.params.stop.begin(), spec.params.stop.end(), "Observation:") ==
        spec.params.stop.end()) {
      spec.params.stop.push_back("Observation:");
    }
    const int max_calls = options().max_steps;
    std::string scratchpad;
    while (true) {
      if (ep.trace().llm_calls >= max_calls) {
        fail(ErrorKind::StepLimitExceeded,
             "no final answer within " + std::to_string(max_calls) + " model calls");
      }
      std::string text = render_slots(prompt, {{"instruction", ep.instruction()},
                                               {"tool_descriptions", tools().render_descriptions()},
                                               {"tool_names", join_names(tools())},
                                               {"agent_scratchpad", scratchpad}});
      std::vector<Message> messages = with_user(ep.history(), text);
      ++ep.trace().steps;
      CompletionResponse r = ep.call_model(spec, messages);
      ReActStep step;
      int retries = options().malformed_retries;
      for (;;) {
        try {
          step = parse_react(r.content);
          break;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::MalformedModelOutput || retries-- <= 0 ||
              ep.trace().llm_calls >= max_calls) {
            throw;
          }
          messages.push_back(Message{Role::Assistant, r.content, std::nullopt, {}});
          messages.push_back(Message{Role::User, kReActFormatReminder, std::nullopt, {}});
          r = ep.call_model(spec, messages);
        }
      }
      if (!step.thought.empty()) ep.emit(AgentEvent{EventKind::Thought, step.thought});
      if (step.final_answer) return *step.final_answer;

      const ReActAction& action = *step.action;
      ToolResult res = ep.call_tool(action.tool, ToolInput::raw(action.input));
      std::string observation = res.ok ? res.output : "Error: " + res.error.value_or("tool failed");
      observation = truncate_units(observation, options().observation_max_units).text;
      scratchpad += "Thought: " + step.thought + "\nAction: " + action.tool +
                    "\nAction Input: " + action.input + "\nObservation: " + observation + "\n";
    }
  }
};

class ReWOOAgent : public AgentInstance {
 public:
  using AgentInstance::AgentInstance;

 protected:
  std::string execute(Episode& ep) override {
    PromptTemplate planner = config().prompt_template.value_or(default_template(AgentType::ReWOO));
    PromptTemplate solver = config().solver_prompt_template.value_or(default_rewoo_solver_template());

    std::string text = render_slots(planner, {{"instruction", ep.instruction()},
                                              {"tool_descriptions", tools().render_descriptions()},
                                              {"tool_names", join_names(tools())}});
    std::vector<Message> messages = with_user(ep.history(), text);
    ++ep.trace().steps;
    CompletionResponse r = ep.call_model(config().llm, messages);
    RewooPlan plan;
    int retries = options().malformed_retries;
    for (;;) {
      try {
        plan = parse_rewoo_plan(r.content);
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::MalformedModelOutput || retries-- <= 0) throw;
        messages.push_back(Message{Role::Assistant, r.content, std::nullopt, {}});
        messages.push_back(Message{Role::User, kPlanFormatReminder, std::nullopt, {}});
        r = ep.call_model(config().llm, messages);
      }
    }
    for (const auto& s : plan.steps) {
      ep.emit(AgentEvent{EventKind::PlanStep, s.input, s.tool, s.evidence_id});
    }

    std::vector<std::string> evidence;
    std::string plan_evidence;
    for (const auto& s : plan.steps) {
      ++ep.trace().steps;
      std::string input = substitute_evidence(s.input, evidence);
      ToolResult res = ep.call_tool(s.tool, ToolInput::raw(input));
      if (!res.ok) {
        fail(ErrorKind::ToolFailure, s.tool + " (" + s.evidence_id + "): " + res.error.value_or("failed"));
      }
      evidence.push_back(res.output);
      if (!s.plan.empty()) plan_evidence += "Plan: " + s.plan + "\n";
      plan_evidence += s.evidence_id + " = " + s.tool + "[" + input + "]\nEvidence: " + res.output + "\n";
    }

    std::string solve = render_slots(solver, {{"instruction", ep.instruction()},
                                              {"plan_evidence", plan_evidence}});
    ++ep.trace().steps;
    const ModelSpec& solver_spec = config().solver_llm ? *config().solver_llm : config().llm;
    return std::string(trim(ep.call_model(solver_spec, with_user(ep.history(), solve)).content));
  }
};

}  // namespace

std::shared_ptr<AgentInstance> make_agent_instance(AgentConfig config,
                                                   std::shared_ptr<const BackendRegistry> backends,
                                                   ToolRegistry tools, RuntimeOptions options) {
  switch (config.agent_type) {
    case AgentType::Vanilla:
      return std::make_shared<VanillaAgent>(std::move(config), std::move(backends), std::move(tools),
                                            std::move(options));
    case AgentType::OpenAI:
      return std::make_shared<OpenAIAgent>(std::move(config), std::move(backends), std::move(tools),
                                           std::move(options));
    case AgentType::OpenAIMemory:
      return std::make_shared<OpenAIMemoryAgent>(std::move(config), std::move(backends),
                                                 std::move(tools), std::move(options));
    case AgentType::ReAct:
      return std::make_shared<ReActAgent>(std::move(config), std::move(backends), std::move(tools),
                                          std::move(options));
    case AgentType::ReWOO:
      return std::make_shared<ReWOOAgent>(std::move(config), std::move(backends), std::move(tools),
                                          std::move(options));
  }
  fail(ErrorKind::UnknownAgentType, "unhandled agent type");
}

}  // namespace agentry
