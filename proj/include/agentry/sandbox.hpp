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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace agentry {

struct SandboxLimits {
  std::chrono::milliseconds timeout{10000};
  std::size_t memory_mb = 512;
  bool allow_network = false;
  std::size_t max_output = 65536;
};

struct SandboxResult {
  int exit_code = -1;
  int term_signal = 0;
  bool timed_out = false;
  std::string output;  // stdout and stderr, interleaved
  std::int64_t duration_ms = 0;
};

struct SandboxCapabilities {
  int landlock_abi = 0;   // 0 when unavailable
  bool filesystem = false;  // writes confined to the scratch dir by the kernel
  bool network = false;     // TCP denied by the kernel
  bool net_namespace = false;
};

SandboxCapabilities sandbox_capabilities();

// Runs argv in a child process group with cwd = scratch. Writes outside
// scratch (and /dev/null) are denied; so is network unless allowed. The
// whole group is killed when the timeout expires.
SandboxResult run_sandboxed(const std::vector<std::string>& argv, const std::filesystem::path& scratch,
                            const SandboxLimits& limits);

// Fresh private directory under the system temp dir; removed on destruction.
class ScratchDir {
 public:
  ScratchDir();
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace agentry
