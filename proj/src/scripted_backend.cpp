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

#include "agentry/scripted_backend.hpp"

#include <thread>

#include "agentry/error.hpp"
#include "agentry/text.hpp"

namespace agentry {

ScriptedReply scripted_reply_from_json(const nlohmann::json& j) {
  if (j.is_string()) return ScriptedReply::text(j.get<std::string>());
  if (!j.is_object()) fail(ErrorKind::InvalidConfig, "script reply must be a string or object");
  ScriptedReply reply;
  reply.content = j.value("content", std::string{});
  if (j.contains("tool_calls")) {
    for (const auto& c : j.at("tool_calls")) {
      ToolCallRequest call;
      call.call_id = c.value("id", std::string{});
      call.tool_name = c.at("name").get<std::string>();
      const auto& args = c.contains("arguments") ? c.at("arguments") : nlohmann::json::object();
      call.arguments = args.is_string() ? args.get<std::string>() : args.dump();
      reply.tool_calls.push_back(std::move(call));
    }
  }
  std::string fault = j.value("fault", std::string{});
  if (fault == "transport") {
    reply.fault = ScriptedReply::Fault::Transport;
  } else if (fault == "refusal") {
    reply.fault = ScriptedReply::Fault::Refusal;
  } else if (!fault.empty()) {
    fail(ErrorKind::InvalidConfig, "unknown script fault '" + fault + "'");
  }
  if (j.contains("fail_after_chunks")) reply.fail_after_chunks = j.at("fail_after_chunks").get<std::size_t>();
  return reply;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::with_queue(std::vector<ScriptedReply> replies) {
  auto b = std::make_shared<ScriptedBackend>();
  b->queue_.assign(std::make_move_iterator(replies.begin()), std::make_move_iterator(replies.end()));
  return b;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::with_texts(const std::vector<std::string>& texts) {
  std::vector<ScriptedReply> replies;
  for (const auto& t : texts) replies.push_back(ScriptedReply::text(t));
  return with_queue(std::move(replies));
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::with_rules(std::vector<ScriptRule> rules) {
  auto b = std::make_shared<ScriptedBackend>();
  b->rule_mode_ = true;
  for (auto& r : rules) {
    try {
      b->rules_.push_back({std::regex(r.pattern, std::regex::ECMAScript), std::move(r.reply)});
    } catch (const std::regex_error& e) {
      fail(ErrorKind::InvalidConfig, "bad script pattern '" + r.pattern + "': " + e.what());
    }
  }
  return b;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const nlohmann::json& script) {
  std::shared_ptr<ScriptedBackend> backend;
  const nlohmann::json* queue = nullptr;
  if (script.is_array()) {
    queue = &script;
  } else if (script.is_object() && script.contains("queue")) {
    queue = &script.at("queue");
  }
  if (queue != nullptr) {
    std::vector<ScriptedReply> replies;
    for (const auto& item : *queue) replies.push_back(scripted_reply_from_json(item));
    backend = with_queue(std::move(replies));
  } else if (script.is_object() && script.contains("rules")) {
    std::vector<ScriptRule> rules;
    for (const auto& r : script.at("rules")) {
      rules.push_back({r.at("match").get<std::string>(), scripted_reply_from_json(r.at("reply"))});
    }
    backend = with_rules(std::move(rules));
  } else {
    fail(ErrorKind::InvalidConfig, "script must be an array or contain 'queue' or 'rules'");
  }
  if (script.is_object()) {
    if (script.contains("chunk_size")) backend->set_chunk_size(script.at("chunk_size").get<std::size_t>());
    if (script.contains("delay_ms")) {
      backend->set_delay(std::chrono::milliseconds(script.at("delay_ms").get<long>()));
    }
  }
  return backend;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::load(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::SyntaxError, path.string() + ": " + e.what());
  }
  return from_json(j);
}

void ScriptedBackend::push(ScriptedReply reply) {
  std::lock_guard lock(mu_);
  queue_.push_back(std::move(reply));
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

ScriptedReply ScriptedBackend::next_reply(const CompletionRequest& request) {
  std::lock_guard lock(mu_);
  ++calls_;
  if (!rule_mode_) {
    if (queue_.empty()) fail(ErrorKind::ScriptExhausted, "scripted queue is empty");
    ScriptedReply r = std::move(queue_.front());
    queue_.pop_front();
    return r;
  }
  const std::string& last = request.messages.back().content;
  for (const auto& rule : rules_) {
    if (std::regex_search(last, rule.regex)) return rule.reply;
  }
  fail(ErrorKind::ScriptExhausted, "no script rule matches the last message");
}

CompletionResponse ScriptedBackend::build(const CompletionRequest& request,
                                          const ScriptedReply& reply) const {
  if (reply.fault == ScriptedReply::Fault::Transport) {
    fail(ErrorKind::TransportError, "scripted transport failure");
  }
  if (reply.fault == ScriptedReply::Fault::Refusal) {
    fail(ErrorKind::BackendRefusal, "status 400: scripted refusal");
  }
  CompletionResponse response;
  response.content = reply.content;
  for (const auto& stop : request.spec.params.stop) {
    if (stop.empty()) continue;
    std::size_t pos = response.content.find(stop);
    if (pos != std::string::npos) response.content.erase(pos);
  }
  auto max_units = static_cast<std::size_t>(std::max(1, request.spec.params.max_tokens));
  if (count_units(response.content) > max_units) {
    response.content = truncate_units(response.content, max_units, "").text;
    response.finish_reason = FinishReason::Length;
  }
  response.tool_calls = reply.tool_calls;
  for (std::size_t i = 0; i < response.tool_calls.size(); ++i) {
    if (response.tool_calls[i].call_id.empty()) {
      response.tool_calls[i].call_id = "call_" + std::to_string(i + 1);
    }
  }
  if (!response.tool_calls.empty()) response.finish_reason = FinishReason::ToolCalls;

  response.usage.prompt_tokens = count_request_units(request);
  std::int64_t completion = static_cast<std::int64_t>(count_units(response.content));
  for (const auto& call : response.tool_calls) {
    completion += static_cast<std::int64_t>(count_units(call.tool_name) + count_units(call.arguments));
  }
  response.usage.completion_tokens = completion;
  return response;
}

CompletionResponse ScriptedBackend::complete(const CompletionRequest& request) {
  ScriptedReply reply = next_reply(request);
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  return build(request, reply);
}

CompletionResponse ScriptedBackend::stream_complete(const CompletionRequest& request,
                                                    const ChunkSink& sink) {
  ScriptedReply reply = next_reply(request);
  if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
  CompletionResponse response = build(request, reply);
  const std::string& text = response.content;
  std::size_t emitted = 0;
  for (std::size_t pos = 0; pos < text.size(); pos += chunk_size_) {
    if (reply.fail_after_chunks && emitted == *reply.fail_after_chunks) {
      response.content = text.substr(0, pos);
      response.finish_reason = FinishReason::Error;
      response.error = "scripted stream failure after " + std::to_string(emitted) + " chunk(s)";
      response.tool_calls.clear();
      response.usage.completion_tokens = static_cast<std::int64_t>(count_units(response.content));
      return response;
    }
    sink(std::string_view(text).substr(pos, chunk_size_));
    ++emitted;
  }
  return response;
}

}  // namespace agentry
