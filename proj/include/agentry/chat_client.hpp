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

#include <string>

#include "agentry/llm.hpp"

namespace agentry {

struct ChatClientOptions {
  std::string api_base = "https://api.openai.com/v1";
  std::string api_key;
  int timeout_ms = 60000;
  int retries = 1;  // extra attempts after a transport failure
};

// Chat-completions JSON protocol over HTTP(S); streaming via server-sent
// events. `ModelSpec::api_base`/`api_key` override the client defaults.
class ChatCompletionsClient : public Backend {
 public:
  explicit ChatCompletionsClient(ChatClientOptions options);
  // Reads OPENAI_BASE_URL / OPENAI_API_KEY when present.
  static ChatClientOptions options_from_env();

  CompletionResponse complete(const CompletionRequest& request) override;
  CompletionResponse stream_complete(const CompletionRequest& request,
                                     const ChunkSink& sink) override;

  static nlohmann::json build_body(const CompletionRequest& request, bool stream);
  static CompletionResponse parse_response(const nlohmann::json& body);

 private:
  ChatClientOptions options_;
};

struct ParsedUrl {
  std::string scheme;  // http or https
  std::string host;
  int port = 0;
  std::string path;  // begins with '/'
};
ParsedUrl parse_url(const std::string& url);

}  // namespace agentry
