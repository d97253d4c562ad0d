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

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentry/runtime.hpp"

namespace agentry {

struct SseEvent {
  std::string event;
  std::string data;
  bool operator==(const SseEvent&) const = default;
};

// "event: <type>\ndata: <json>\n\n"
std::string format_sse(const AgentEvent& event);
std::vector<SseEvent> parse_sse(std::string_view stream);

struct ServiceOptions {
  std::filesystem::path pool;
  std::optional<std::filesystem::path> reports_dir;
  std::optional<std::filesystem::path> static_dir;  // mounted at /
  std::shared_ptr<const BackendRegistry> backends;
  AssemblyOptions assembly;
  EnvMap env = process_env();
};

// HTTP/1.1 JSON + SSE front for a pool:
//   GET  /agents
//   POST /sessions                 {"agent": name}  -> {"session_id"}
//   POST /sessions/{id}/messages   {"text": ...}    -> text/event-stream
//   GET  /sessions/{id}
//   GET  /reports, GET /reports/{name}
// One episode per session at a time (409 otherwise); sessions run concurrently.
class AgentService {
 public:
  explicit AgentService(ServiceOptions options);
  ~AgentService();
  AgentService(const AgentService&) = delete;
  AgentService& operator=(const AgentService&) = delete;

  // Binds (port 0 picks a free one) and serves on a background thread.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace agentry
