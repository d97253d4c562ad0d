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

#include "agentry/pool.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <regex>

#include <yaml-cpp/yaml.h>

#include "agentry/error.hpp"
#include "agentry/text.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace agentry {

namespace {

class PoolLock {
 public:
  explicit PoolLock(const fs::path& root) {
    fd_ = ::open((root / ".pool.lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) fail(ErrorKind::Internal, "cannot open pool lock in " + root.string());
    ::flock(fd_, LOCK_EX);
  }
  ~PoolLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  PoolLock(const PoolLock&) = delete;
  PoolLock& operator=(const PoolLock&) = delete;

 private:
  int fd_ = -1;
};

void check_name(const std::string& name) {
  static const std::regex kName("[A-Za-z_][A-Za-z0-9_\\-]*");
  if (!std::regex_match(name, kName)) fail(ErrorKind::InvalidInput, "invalid agent name '" + name + "'");
}

std::string scalar_or_empty(const YAML::Node& node, const char* key) {
  if (!node[key] || !node[key].IsScalar()) return {};
  return node[key].Scalar();
}

}  // namespace

std::string rewrite_name_field(const std::string& yaml_text, const std::string& name) {
  auto lines = split_lines(yaml_text);
  bool done = false;
  std::string out;
  for (const auto& line : lines) {
    if (!done && line.rfind("name:", 0) == 0) {
      out += "name: " + name + "\n";
      done = true;
    } else {
      out += line + "\n";
    }
  }
  if (!done) out = "name: " + name + "\n" + out;
  return out;
}

PoolEntry read_pool_entry(const fs::path& dir) {
  fs::path file = dir / "agent.yaml";
  if (!fs::exists(file)) fail(ErrorKind::NotFound, file.string());
  YAML::Node doc;
  try {
    doc = YAML::LoadFile(file.string());
  } catch (const YAML::Exception& e) {
    fail(ErrorKind::SyntaxError, file.string() + ": " + e.what());
  }
  PoolEntry e;
  e.name = scalar_or_empty(doc, "name");
  e.version = scalar_or_empty(doc, "version");
  e.description = scalar_or_empty(doc, "description");
  e.agent_type = scalar_or_empty(doc, "type");
  if (doc["target_tasks"] && doc["target_tasks"].IsSequence()) {
    for (const auto& t : doc["target_tasks"]) {
      if (t.IsScalar()) e.target_tasks.push_back(t.Scalar());
    }
  }
  e.path = dir;
  if (fs::exists(dir / "wiki.md")) e.wiki = read_text_file(dir / "wiki.md");
  return e;
}

AgentPool::AgentPool(fs::path root, std::optional<fs::path> templates_dir)
    : root_(std::move(root)), templates_dir_(std::move(templates_dir)) {
  fs::create_directories(root_);
}

std::vector<PoolEntry> AgentPool::list() const {
  std::vector<PoolEntry> out;
  for (const auto& d : fs::directory_iterator(root_)) {
    if (!d.is_directory() || !fs::exists(d.path() / "agent.yaml")) continue;
    try {
      PoolEntry e = read_pool_entry(d.path());
      e.name = d.path().filename().string();
      out.push_back(std::move(e));
    } catch (const Error&) {
      // An unreadable entry is skipped from listings; assembling it reports the error.
    }
  }
  std::sort(out.begin(), out.end(), [](const PoolEntry& a, const PoolEntry& b) { return a.name < b.name; });
  return out;
}

std::optional<PoolEntry> AgentPool::find(const std::string& name) const {
  fs::path dir = root_ / name;
  if (!fs::exists(dir / "agent.yaml")) return std::nullopt;
  PoolEntry e = read_pool_entry(dir);
  e.name = name;
  return e;
}

std::vector<std::string> AgentPool::templates() const {
  std::vector<std::string> out;
  if (templates_dir_ && fs::exists(*templates_dir_)) {
    for (const auto& d : fs::directory_iterator(*templates_dir_)) {
      if (d.is_directory() && fs::exists(d.path() / "agent.yaml")) out.push_back(d.path().filename().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<fs::path> AgentPool::template_dir(const std::string& name) const {
  if (templates_dir_ && fs::exists(*templates_dir_ / name / "agent.yaml")) return *templates_dir_ / name;
  if (fs::exists(root_ / name / "agent.yaml")) return root_ / name;
  return std::nullopt;
}

PoolEntry AgentPool::create(const std::string& name, const std::optional<std::string>& from_template) {
  if (from_template) return clone(*from_template, name);
  check_name(name);
  PoolLock lock(root_);
  fs::path dir = root_ / name;
  if (fs::exists(dir)) fail(ErrorKind::NameCollision, name + " already exists");
  fs::create_directories(dir);
  write_text_file(dir / "agent.yaml",
                  "name: " + name +
                      "\nversion: 0.1.0\ntype: vanilla\ndescription: " + name +
                      " agent\ntarget_tasks: []\nllm:\n  model_name: gpt-4o-mini\n");
  write_manifest();
  return *find(name);
}

PoolEntry AgentPool::clone(const std::string& source, const std::string& name) {
  check_name(name);
  PoolLock lock(root_);
  auto src = template_dir(source);
  if (!src) fail(ErrorKind::UnknownTemplate, source);
  fs::path dir = root_ / name;
  if (fs::exists(dir)) fail(ErrorKind::NameCollision, name + " already exists");
  fs::create_directories(dir);
  for (const char* file : kPoolEntryFiles) {
    fs::path from = *src / file;
    if (!fs::exists(from)) continue;
    std::string text = read_text_file(from);
    if (std::string_view(file) == "agent.yaml") text = rewrite_name_field(text, name);
    write_text_file(dir / file, text);
  }
  write_manifest();
  return *find(name);
}

void AgentPool::remove(const std::string& name) {
  check_name(name);
  PoolLock lock(root_);
  fs::path dir = root_ / name;
  if (!fs::exists(dir / "agent.yaml")) fail(ErrorKind::NotFound, name + " not found");
  fs::remove_all(dir);
  write_manifest();
}

void AgentPool::write_manifest() const {
  std::string out;
  for (const auto& e : list()) {
    nlohmann::json j = {{"name", e.name},
                        {"version", e.version},
                        {"path", e.name},
                        {"description", e.description}};
    out += j.dump() + "\n";
  }
  write_text_file(manifest_path(), out);
}

}  // namespace agentry
