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

#include <stdlib.h>

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "agentry/llm.hpp"
#include "agentry/runtime.hpp"
#include "agentry/scripted_backend.hpp"
#include "agentry/text.hpp"

namespace agentry::testing {

inline std::filesystem::path data_dir() { return AGENTRY_TEST_DATA; }
inline std::filesystem::path golden_dir() { return AGENTRY_GOLDEN_DIR; }
inline std::filesystem::path templates_dir() { return AGENTRY_TEMPLATES_DIR; }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "agentry-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }
  std::filesystem::path write(const std::string& rel, std::string_view content) const {
    auto p = path_ / rel;
    std::filesystem::create_directories(p.parent_path());
    write_text_file(p, content);
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::shared_ptr<BackendRegistry> registry_with(std::shared_ptr<Backend> backend,
                                                      const std::string& pattern = "*") {
  auto reg = std::make_shared<BackendRegistry>();
  reg->register_backend(pattern, std::move(backend));
  return reg;
}

// Every call reads the same instant, so wall times are zero.
inline ClockFn frozen_clock() {
  auto t = std::chrono::steady_clock::time_point(std::chrono::seconds(1000));
  return [t] { return t; };
}

inline RuntimeOptions frozen_runtime() {
  RuntimeOptions o;
  o.clock = frozen_clock();
  return o;
}

inline AssemblyOptions frozen_assembly() {
  AssemblyOptions o;
  o.runtime = frozen_runtime();
  return o;
}

// Replies with the text of the last message it received.
class EchoBackend : public Backend {
 public:
  CompletionResponse complete(const CompletionRequest& request) override {
    CompletionResponse r;
    r.content = request.messages.back().content;
    r.usage.prompt_tokens = static_cast<std::int64_t>(count_units(r.content));
    r.usage.completion_tokens = r.usage.prompt_tokens;
    return r;
  }
};

// Forwards to another backend and keeps every request and response.
class RecordingBackend : public Backend {
 public:
  explicit RecordingBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}
  CompletionResponse complete(const CompletionRequest& request) override {
    auto r = inner_->complete(request);
    record(request, r);
    return r;
  }
  CompletionResponse stream_complete(const CompletionRequest& request, const ChunkSink& sink) override {
    auto r = inner_->stream_complete(request, sink);
    record(request, r);
    return r;
  }
  std::vector<CompletionRequest> requests;
  std::vector<CompletionResponse> responses;

 private:
  void record(const CompletionRequest& request, const CompletionResponse& response) {
    std::lock_guard lock(mu_);
    requests.push_back(request);
    responses.push_back(response);
  }
  std::shared_ptr<Backend> inner_;
  std::mutex mu_;
};

}  // namespace agentry::testing
