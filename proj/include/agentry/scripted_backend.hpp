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
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "agentry/llm.hpp"

namespace agentry {

struct ScriptedReply {
  std::string content;
  std::vector<ToolCallRequest> tool_calls;
  enum class Fault { None, Transport, Refusal } fault = Fault::None;
  // Streaming only: emit this many chunks, then end with finish_reason=error.
  std::optional<std::size_t> fail_after_chunks;

  static ScriptedReply text(std::string content) { return {std::move(content), {}, Fault::None, {}}; }
  static ScriptedReply calls(std::vector<ToolCallRequest> calls, std::string content = {}) {
    return {std::move(content), std::move(calls), Fault::None, {}};
  }
};

struct ScriptRule {
  std::string pattern;  // ECMAScript regex, searched in the last message
  ScriptedReply reply;
};

// Deterministic stand-in model. Two modes:
//   queue    - replies popped FIFO, one per call; empty queue -> ScriptExhausted
//   patterns - first rule whose regex matches the last message content wins;
//              stateless, so safe to share between concurrent episodes.
// Usage is counted with the whitespace reference tokenizer. Stop sequences
// truncate the reply; replies longer than max_tokens units end with
// finish_reason=length.
class ScriptedBackend : public Backend {
 public:
  static std::shared_ptr<ScriptedBackend> with_queue(std::vector<ScriptedReply> replies);
  static std::shared_ptr<ScriptedBackend> with_rules(std::vector<ScriptRule> rules);
  static std::shared_ptr<ScriptedBackend> with_texts(const std::vector<std::string>& texts);
  // JSON script: an array (queue), or {"queue": [...]} / {"rules": [{match, reply}]}
  // with optional "chunk_size" and "delay_ms".
  static std::shared_ptr<ScriptedBackend> from_json(const nlohmann::json& script);
  static std::shared_ptr<ScriptedBackend> load(const std::filesystem::path& path);

  void push(ScriptedReply reply);
  void set_chunk_size(std::size_t n) { chunk_size_ = n == 0 ? 1 : n; }
  void set_delay(std::chrono::milliseconds delay) { delay_ = delay; }

  std::size_t remaining() const;
  std::size_t calls() const;

  CompletionResponse complete(const CompletionRequest& request) override;
  CompletionResponse stream_complete(const CompletionRequest& request,
                                     const ChunkSink& sink) override;

 private:
  struct CompiledRule {
    std::regex regex;
    ScriptedReply reply;
  };

  ScriptedReply next_reply(const CompletionRequest& request);
  CompletionResponse build(const CompletionRequest& request, const ScriptedReply& reply) const;

  mutable std::mutex mu_;
  bool rule_mode_ = false;
  std::deque<ScriptedReply> queue_;
  std::vector<CompiledRule> rules_;
  std::size_t chunk_size_ = 5;
  std::chrono::milliseconds delay_{0};
  std::size_t calls_ = 0;
};

ScriptedReply scripted_reply_from_json(const nlohmann::json& j);

}  // namespace agentry
