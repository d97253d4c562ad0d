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

#include "agentry/service.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <regex>
#include <thread>

#include "agentry/error.hpp"
#include "agentry/pool.hpp"
#include "agentry/text.hpp"
#include "httplib.h"

namespace fs = std::filesystem;

namespace agentry {

std::string format_sse(const AgentEvent& event) {
  return "event: " + std::string(to_string(event.kind)) + "\ndata: " + event.to_json().dump() + "\n\n";
}

std::vector<SseEvent> parse_sse(std::string_view stream) {
  std::vector<SseEvent> out;
  SseEvent cur;
  bool have = false;
  for (const auto& raw : split_lines(stream)) {
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (have) out.push_back(std::move(cur));
      cur = {};
      have = false;
      continue;
    }
    if (line.front() == ':') continue;
    std::size_t colon = line.find(':');
    std::string_view field = line.substr(0, colon);
    std::string_view value = colon == std::string_view::npos ? std::string_view{} : line.substr(colon + 1);
    if (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    if (field == "event") {
      cur.event = value;
      have = true;
    } else if (field == "data") {
      if (!cur.data.empty()) cur.data += "\n";
      cur.data += value;
      have = true;
    }
  }
  if (have) out.push_back(std::move(cur));
  return out;
}

namespace {

struct LiveSession {
  std::string id;
  std::string agent;
  std::shared_ptr<AgentInstance> instance;
  Session session;
  std::atomic<bool> in_flight{false};
  std::mutex mu;  // guards `session` reads while no episode runs
};

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

std::optional<nlohmann::json> json_body(const httplib::Request& req) {
  auto j = nlohmann::json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

// Forwards events to a chunked response; a write failure aborts the episode.
class SinkHandler : public OutputHandler {
 public:
  explicit SinkHandler(httplib::DataSink& sink) : sink_(sink) {}
  void on_event(const AgentEvent& event) override {
    std::string chunk = format_sse(event);
    if (!sink_.write(chunk.data(), chunk.size())) throw std::runtime_error("client disconnected");
  }

 private:
  httplib::DataSink& sink_;
};

}  // namespace

struct AgentService::Impl {
  ServiceOptions options;
  AgentPool pool;
  httplib::Server server;
  std::thread thread;
  std::mutex mu;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions;
  std::size_t next_session = 1;
  int bound_port = -1;

  explicit Impl(ServiceOptions opts) : options(std::move(opts)), pool(options.pool) {
    if (!options.backends) fail(ErrorKind::AssemblyError, "service needs a backend registry");
    routes();
  }

  std::shared_ptr<LiveSession> find_session(const std::string& id) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  void routes() {
    server.Get("/agents", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& e : pool.list()) {
        out.push_back({{"name", e.name},
                       {"version", e.version},
                       {"description", e.description},
                       {"target_tasks", e.target_tasks}});
      }
      send_json(res, 200, out);
    });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = json_body(req);
      if (!body || !body->contains("agent") || !(*body)["agent"].is_string()) {
        return send_error(res, 400, "expected {\"agent\": name}");
      }
      std::string name = (*body)["agent"].get<std::string>();
      std::optional<PoolEntry> entry;
      try {
        entry = pool.find(name);
      } catch (const Error&) {
      }
      if (!entry) return send_error(res, 404, "unknown agent '" + name + "'");
      std::shared_ptr<AgentInstance> instance;
      try {
        AgentConfig cfg = load_agent_config(entry->path / "agent.yaml", options.env);
        instance = assemble_agent(cfg, options.backends, options.assembly);
      } catch (const Error& e) {
        return send_error(res, 422, std::string(to_string(e.kind())) + ": " + e.detail());
      }
      auto live = std::make_shared<LiveSession>();
      live->agent = name;
      live->instance = std::move(instance);
      {
        std::lock_guard<std::mutex> lock(mu);
        live->id = "s" + std::to_string(next_session++);
        sessions[live->id] = live;
      }
      send_json(res, 201, {{"session_id", live->id}, {"agent", name}});
    });

    server.Post(R"(/sessions/([^/]+)/messages)", [this](const httplib::Request& req, httplib::Response& res) {
      auto live = find_session(req.matches[1]);
      if (!live) return send_error(res, 404, "unknown session");
      auto body = json_body(req);
      if (!body || !body->contains("text") || !(*body)["text"].is_string() ||
          trim((*body)["text"].get<std::string>()).empty()) {
        return send_error(res, 400, "expected {\"text\": non-empty string}");
      }
      bool expected = false;
      if (!live->in_flight.compare_exchange_strong(expected, true)) {
        return send_error(res, 409, "an episode is already running for this session");
      }
      std::string text = (*body)["text"].get<std::string>();
      auto released = std::make_shared<std::atomic<bool>>(false);
      auto release = [live, released] {
        if (!released->exchange(true)) live->in_flight = false;
      };
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [live, text, release](std::size_t, httplib::DataSink& sink) {
            SinkHandler handler(sink);
            {
              std::lock_guard<std::mutex> lock(live->mu);
              live->instance->chat(live->session, text, &handler);
            }
            release();
            sink.done();
            return true;
          },
          [release](bool) { release(); });
    });

    server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto live = find_session(req.matches[1]);
      if (!live) return send_error(res, 404, "unknown session");
      nlohmann::json messages = nlohmann::json::array();
      bool busy = live->in_flight;
      std::unique_lock<std::mutex> lock(live->mu, std::try_to_lock);
      if (lock.owns_lock()) {
        const auto& msgs = live->session.messages();
        for (std::size_t i = 0; i < msgs.size(); ++i) {
          messages.push_back({{"role", to_string(msgs[i].role)},
                              {"content", msgs[i].content},
                              {"timestamp", live->session.timestamp(i)}});
        }
      } else {
        busy = true;
      }
      send_json(res, 200,
                {{"session_id", live->id}, {"agent", live->agent}, {"in_flight", busy}, {"messages", messages}});
    });

    server.Get("/reports", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json out = nlohmann::json::array();
      if (options.reports_dir && fs::is_directory(*options.reports_dir)) {
        std::vector<fs::path> files;
        for (const auto& f : fs::directory_iterator(*options.reports_dir)) {
          if (f.is_regular_file() && f.path().extension() == ".json") files.push_back(f.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
          nlohmann::json entry = {{"name", f.stem().string()}};
          auto j = nlohmann::json::parse(read_text_file(f), nullptr, false);
          if (j.is_object()) {
            if (j.contains("agent")) entry["agent"] = j["agent"];
            if (j.contains("timestamp")) entry["timestamp"] = j["timestamp"];
            if (j.contains("n_tasks")) entry["n_tasks"] = j["n_tasks"];
          }
          out.push_back(std::move(entry));
        }
      }
      send_json(res, 200, out);
    });

    server.Get(R"(/reports/([A-Za-z0-9_.\-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::string name = req.matches[1];
      if (name.size() > 5 && name.compare(name.size() - 5, 5, ".json") == 0) name.resize(name.size() - 5);
      if (!options.reports_dir || name.find("..") != std::string::npos) return send_error(res, 404, "no such report");
      fs::path file = *options.reports_dir / (name + ".json");
      if (!fs::is_regular_file(file)) return send_error(res, 404, "no such report");
      res.status = 200;
      res.set_content(read_text_file(file), "application/json");
    });

    if (options.static_dir) server.set_mount_point("/", options.static_dir->string());

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string msg = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        msg = e.what();
      } catch (...) {
      }
      send_error(res, 500, msg);
    });
  }
};

AgentService::AgentService(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

AgentService::~AgentService() { stop(); }

int AgentService::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) fail(ErrorKind::TransportError, "cannot bind " + host + ":" + std::to_string(port));
  impl_->bound_port = bound;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void AgentService::run(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) fail(ErrorKind::TransportError, "cannot bind " + host + ":" + std::to_string(port));
  impl_->bound_port = bound;
  impl_->server.listen_after_bind();
}

void AgentService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int AgentService::port() const { return impl_->bound_port; }

}  // namespace agentry
