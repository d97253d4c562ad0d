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

#include <cstdlib>

#include "agentry/error.hpp"
#include "agentry/text.hpp"
#include "httplib.h"

namespace agentry {
namespace {

using nlohmann::json;

FinishReason finish_from_string(const std::string& s) {
  if (s == "tool_calls" || s == "function_call") return FinishReason::ToolCalls;
  if (s == "length") return FinishReason::Length;
  if (s == "stop" || s.empty()) return FinishReason::Stop;
  return FinishReason::Error;
}

std::unique_ptr<httplib::Client> make_client(const ParsedUrl& url, int timeout_ms) {
  std::string origin = url.scheme + "://" + url.host + ":" + std::to_string(url.port);
  auto client = std::make_unique<httplib::Client>(origin);
  auto secs = timeout_ms / 1000;
  auto usecs = (timeout_ms % 1000) * 1000;
  client->set_connection_timeout(secs, usecs);
  client->set_read_timeout(secs, usecs);
  client->set_write_timeout(secs, usecs);
  return client;
}

}  // namespace

ParsedUrl parse_url(const std::string& url) {
  ParsedUrl out;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorKind::InvalidConfig, "bad url '" + url + "'");
  out.scheme = to_lower(url.substr(0, scheme_end));
  if (out.scheme != "http" && out.scheme != "https") {
    fail(ErrorKind::InvalidConfig, "unsupported scheme in '" + url + "'");
  }
  std::string rest = url.substr(scheme_end + 3);
  auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  out.path = slash == std::string::npos ? "/" : rest.substr(slash);
  auto colon = authority.rfind(':');
  if (colon != std::string::npos && authority.find(']') == std::string::npos) {
    out.host = authority.substr(0, colon);
    out.port = std::atoi(authority.c_str() + colon + 1);
  } else {
    out.host = authority;
    out.port = out.scheme == "https" ? 443 : 80;
  }
  if (out.host.empty() || out.port <= 0) fail(ErrorKind::InvalidConfig, "bad url '" + url + "'");
  return out;
}

ChatCompletionsClient::ChatCompletionsClient(ChatClientOptions options)
    : options_(std::move(options)) {}

ChatClientOptions ChatCompletionsClient::options_from_env() {
  ChatClientOptions o;
  if (const char* base = std::getenv("OPENAI_BASE_URL"); base && *base) o.api_base = base;
  if (const char* key = std::getenv("OPENAI_API_KEY"); key && *key) o.api_key = key;
  return o;
}

json ChatCompletionsClient::build_body(const CompletionRequest& request, bool stream) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    json jm = {{"role", to_string(m.role)}, {"content", m.content}};
    if (m.tool_result_for) jm["tool_call_id"] = *m.tool_result_for;
    if (!m.tool_calls.empty()) {
      json calls = json::array();
      for (const auto& c : m.tool_calls) {
        calls.push_back({{"id", c.call_id},
                         {"type", "function"},
                         {"function", {{"name", c.tool_name}, {"arguments", c.arguments}}}});
      }
      jm["tool_calls"] = calls;
    }
    messages.push_back(std::move(jm));
  }
  const auto& p = request.spec.params;
  json body = {{"model", request.spec.model_name},
               {"messages", messages},
               {"temperature", p.temperature},
               {"max_tokens", p.max_tokens}};
  if (!p.stop.empty()) body["stop"] = p.stop;
  if (p.seed) body["seed"] = *p.seed;
  if (!request.tools.empty()) {
    json tools = json::array();
    for (const auto& t : request.tools) {
      tools.push_back({{"type", "function"},
                       {"function",
                        {{"name", t.name},
                         {"description", t.description},
                         {"parameters", tool_parameters_schema(t)}}}});
    }
    body["tools"] = tools;
  }
  if (stream) {
    body["stream"] = true;
    body["stream_options"] = {{"include_usage", true}};
  }
  return body;
}

CompletionResponse ChatCompletionsClient::parse_response(const json& body) {
  CompletionResponse r;
  if (!body.contains("choices") || body["choices"].empty()) {
    fail(ErrorKind::BackendRefusal, "response has no choices: " + body.dump());
  }
  const json& choice = body["choices"][0];
  const json& msg = choice.value("message", json::object());
  if (msg.contains("content") && msg["content"].is_string()) r.content = msg["content"];
  if (msg.contains("tool_calls") && msg["tool_calls"].is_array()) {
    for (const auto& c : msg["tool_calls"]) {
      ToolCallRequest call;
      call.call_id = c.value("id", std::string{});
      const json& fn = c.value("function", json::object());
      call.tool_name = fn.value("name", std::string{});
      const json& args = fn.contains("arguments") ? fn["arguments"] : json("");
      call.arguments = args.is_string() ? args.get<std::string>() : args.dump();
      r.tool_calls.push_back(std::move(call));
    }
  }
  std::string finish = choice.contains("finish_reason") && choice["finish_reason"].is_string()
                           ? choice["finish_reason"].get<std::string>()
                           : std::string{};
  r.finish_reason = finish_from_string(finish);
  if (!r.tool_calls.empty()) r.finish_reason = FinishReason::ToolCalls;
  if (r.finish_reason == FinishReason::ToolCalls && r.tool_calls.empty()) {
    r.finish_reason = FinishReason::Stop;
  }
  if (body.contains("usage") && body["usage"].is_object()) {
    r.usage.prompt_tokens = body["usage"].value("prompt_tokens", 0);
    r.usage.completion_tokens = body["usage"].value("completion_tokens", 0);
  }
  return r;
}

CompletionResponse ChatCompletionsClient::complete(const CompletionRequest& request) {
  ParsedUrl url = parse_url(request.spec.api_base.value_or(options_.api_base));
  std::string key = request.spec.api_key.value_or(options_.api_key);
  std::string path = url.path;
  if (path.empty() || path.back() != '/') path += '/';
  path += "chat/completions";

  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
  std::string payload = build_body(request, false).dump();

  std::string last_error;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    auto client = make_client(url, options_.timeout_ms);
    auto res = client->Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      fail(ErrorKind::BackendRefusal, "status " + std::to_string(res->status) + ": " + res->body);
    }
    json body;
    try {
      body = json::parse(res->body);
    } catch (const json::parse_error& e) {
      fail(ErrorKind::BackendRefusal, std::string("unparsable response body: ") + e.what());
    }
    return parse_response(body);
  }
  fail(ErrorKind::TransportError, last_error);
}

CompletionResponse ChatCompletionsClient::stream_complete(const CompletionRequest& request,
                                                          const ChunkSink& sink) {
  ParsedUrl url = parse_url(request.spec.api_base.value_or(options_.api_base));
  std::string key = request.spec.api_key.value_or(options_.api_key);
  std::string path = url.path;
  if (path.empty() || path.back() != '/') path += '/';
  path += "chat/completions";

  httplib::Headers headers{{"Accept", "text/event-stream"}};
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
  std::string payload = build_body(request, true).dump();

  CompletionResponse r;
  std::map<int, ToolCallRequest> calls;
  std::string buffer;
  std::string finish;
  std::string error_body;
  int status = 0;
  bool emitted_any = false;

  auto handle_event = [&](const std::string& data) {
    if (data == "[DONE]") return;
    json ev = json::parse(data, nullptr, false);
    if (ev.is_discarded()) return;
    if (ev.contains("usage") && ev["usage"].is_object()) {
      r.usage.prompt_tokens = ev["usage"].value("prompt_tokens", 0);
      r.usage.completion_tokens = ev["usage"].value("completion_tokens", 0);
    }
    if (!ev.contains("choices") || ev["choices"].empty()) return;
    const json& choice = ev["choices"][0];
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      finish = choice["finish_reason"];
    }
    const json& delta = choice.value("delta", json::object());
    if (delta.contains("content") && delta["content"].is_string()) {
      std::string piece = delta["content"];
      if (!piece.empty()) {
        r.content += piece;
        emitted_any = true;
        sink(piece);
      }
    }
    if (delta.contains("tool_calls")) {
      for (const auto& c : delta["tool_calls"]) {
        auto& call = calls[c.value("index", 0)];
        if (c.contains("id") && c["id"].is_string()) call.call_id = c["id"];
        if (c.contains("function")) {
          const auto& fn = c["function"];
          if (fn.contains("name") && fn["name"].is_string()) call.tool_name += fn["name"].get<std::string>();
          if (fn.contains("arguments") && fn["arguments"].is_string()) {
            call.arguments += fn["arguments"].get<std::string>();
          }
        }
      }
    }
  };

  auto client = make_client(url, options_.timeout_ms);
  httplib::Request req;
  req.method = "POST";
  req.path = path;
  req.headers = headers;
  req.body = payload;
  req.set_header("Content-Type", "application/json");
  req.response_handler = [&](const httplib::Response& res) {
    status = res.status;
    return true;
  };
  req.content_receiver = [&](const char* data, std::size_t len, std::uint64_t, std::uint64_t) {
    if (status < 200 || status >= 300) {
      error_body.append(data, len);
      return true;
    }
    buffer.append(data, len);
    std::size_t sep;
    while ((sep = buffer.find("\n\n")) != std::string::npos) {
      std::string block = buffer.substr(0, sep);
      buffer.erase(0, sep + 2);
      std::string payload_data;
      for (const auto& line : split_lines(block)) {
        if (line.rfind("data:", 0) == 0) {
          if (!payload_data.empty()) payload_data += '\n';
          payload_data += std::string(trim(std::string_view(line).substr(5)));
        }
      }
      if (!payload_data.empty()) handle_event(payload_data);
    }
    return true;
  };
  httplib::Response res;
  httplib::Error err = httplib::Error::Success;
  bool ok = client->send(req, res, err);
  if (!ok && !emitted_any && status == 0) fail(ErrorKind::TransportError, httplib::to_string(err));
  if (status != 0 && (status < 200 || status >= 300)) {
    fail(ErrorKind::BackendRefusal, "status " + std::to_string(status) + ": " + error_body);
  }
  for (auto& [_, call] : calls) r.tool_calls.push_back(std::move(call));
  r.finish_reason = finish_from_string(finish);
  if (!r.tool_calls.empty()) r.finish_reason = FinishReason::ToolCalls;
  if (!ok) {
    r.finish_reason = FinishReason::Error;
    r.error = httplib::to_string(err);
  }
  return r;
}

}  // namespace agentry
