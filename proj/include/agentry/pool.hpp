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
#include <optional>
#include <string>
#include <vector>

namespace agentry {

struct PoolEntry {
  std::string name;
  std::string version;
  std::filesystem::path path;
  std::string description;
  std::string agent_type;
  std::vector<std::string> target_tasks;
  std::string wiki;

  bool operator==(const PoolEntry&) const = default;
};

// Files copied by clone, besides agent.yaml when present.
inline constexpr const char* kPoolEntryFiles[] = {"agent.yaml", "prompt.yaml", "tool.yaml", "wiki.md"};
inline constexpr const char* kPoolManifest = "manifest.jsonl";

// Reads the attributes a pool listing needs without resolving tags.
PoolEntry read_pool_entry(const std::filesystem::path& dir);

// Local agent pool: one directory per agent under `root`, plus a manifest
// file rebuilt after every mutation. Mutations hold an exclusive file lock.
class AgentPool {
 public:
  explicit AgentPool(std::filesystem::path root,
                     std::optional<std::filesystem::path> templates_dir = std::nullopt);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path manifest_path() const { return root_ / kPoolManifest; }

  // Entries sorted by name.
  std::vector<PoolEntry> list() const;
  std::optional<PoolEntry> find(const std::string& name) const;
  std::vector<std::string> templates() const;

  // Without a template, writes a minimal vanilla agent.
  PoolEntry create(const std::string& name, const std::optional<std::string>& from_template = {});
  PoolEntry clone(const std::string& source, const std::string& name);
  void remove(const std::string& name);

  void write_manifest() const;

 private:
  std::optional<std::filesystem::path> template_dir(const std::string& name) const;

  std::filesystem::path root_;
  std::optional<std::filesystem::path> templates_dir_;
};

// Replaces the value of the first top-level `name:` key.
std::string rewrite_name_field(const std::string& yaml_text, const std::string& name);

}  // namespace agentry
