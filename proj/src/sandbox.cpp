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

#include "agentry/sandbox.hpp"

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/prctl.h>
#include <sys/resource.h>
#include <sys/syscall.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>

#include "agentry/error.hpp"

namespace fs = std::filesystem;

namespace agentry {

namespace {

#ifndef SYS_landlock_create_ruleset
#define SYS_landlock_create_ruleset 444
#define SYS_landlock_add_rule 445
#define SYS_landlock_restrict_self 446
#endif

constexpr std::uint32_t kCreateRulesetVersion = 1U << 0;
constexpr int kRulePathBeneath = 1;

constexpr std::uint64_t kFsWriteFile = 1ULL << 1;
constexpr std::uint64_t kFsRemoveDir = 1ULL << 4;
constexpr std::uint64_t kFsRemoveFile = 1ULL << 5;
constexpr std::uint64_t kFsMakeChar = 1ULL << 6;
constexpr std::uint64_t kFsMakeDir = 1ULL << 7;
constexpr std::uint64_t kFsMakeReg = 1ULL << 8;
constexpr std::uint64_t kFsMakeSock = 1ULL << 9;
constexpr std::uint64_t kFsMakeFifo = 1ULL << 10;
constexpr std::uint64_t kFsMakeBlock = 1ULL << 11;
constexpr std::uint64_t kFsMakeSym = 1ULL << 12;
constexpr std::uint64_t kFsRefer = 1ULL << 13;     // ABI 2
constexpr std::uint64_t kFsTruncate = 1ULL << 14;  // ABI 3
constexpr std::uint64_t kNetBindTcp = 1ULL << 0;     // ABI 4
constexpr std::uint64_t kNetConnectTcp = 1ULL << 1;  // ABI 4

struct RulesetAttr {
  std::uint64_t handled_access_fs;
  std::uint64_t handled_access_net;
};

struct __attribute__((packed)) PathBeneathAttr {
  std::uint64_t allowed_access;
  std::int32_t parent_fd;
};

int landlock_abi() {
  static int abi = [] {
    long v = ::syscall(SYS_landlock_create_ruleset, nullptr, 0, kCreateRulesetVersion);
    return v < 0 ? 0 : static_cast<int>(v);
  }();
  return abi;
}

bool probe_netns() {
  static bool ok = [] {
    pid_t pid = ::fork();
    if (pid == 0) _exit(::unshare(CLONE_NEWNET) == 0 ? 0 : 1);
    int status = 0;
    if (pid < 0 || ::waitpid(pid, &status, 0) < 0) return false;
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  }();
  return ok;
}

// Built in the parent so the child only has to call restrict_self.
int build_ruleset(const fs::path& scratch, bool deny_network, int abi) {
  std::uint64_t write_rights = kFsWriteFile | kFsRemoveDir | kFsRemoveFile | kFsMakeChar | kFsMakeDir |
                               kFsMakeReg | kFsMakeSock | kFsMakeFifo | kFsMakeBlock | kFsMakeSym;
  if (abi >= 2) write_rights |= kFsRefer;
  if (abi >= 3) write_rights |= kFsTruncate;
  RulesetAttr attr{write_rights, 0};
  std::size_t attr_size = sizeof(std::uint64_t);
  if (abi >= 4 && deny_network) {
    attr.handled_access_net = kNetBindTcp | kNetConnectTcp;
    attr_size = sizeof(RulesetAttr);
  }
  int fd = static_cast<int>(::syscall(SYS_landlock_create_ruleset, &attr, attr_size, 0));
  if (fd < 0) return -1;
  auto allow = [&](const fs::path& p, std::uint64_t rights) {
    int pfd = ::open(p.c_str(), O_PATH | O_CLOEXEC);
    if (pfd < 0) return false;
    PathBeneathAttr rule{rights, pfd};
    long rc = ::syscall(SYS_landlock_add_rule, fd, kRulePathBeneath, &rule, 0);
    ::close(pfd);
    return rc == 0;
  };
  std::uint64_t file_rights = kFsWriteFile | (abi >= 3 ? kFsTruncate : 0);
  if (!allow(scratch, write_rights) || !allow("/dev/null", file_rights)) {
    ::close(fd);
    return -1;
  }
  return fd;
}

}  // namespace

SandboxCapabilities sandbox_capabilities() {
  SandboxCapabilities c;
  c.landlock_abi = landlock_abi();
  c.filesystem = c.landlock_abi >= 1;
  c.network = c.landlock_abi >= 4;
  c.net_namespace = probe_netns();
  return c;
}

ScratchDir::ScratchDir() {
  std::string tmpl = (fs::temp_directory_path() / "agentry-sandbox-XXXXXX").string();
  if (::mkdtemp(tmpl.data()) == nullptr) fail(ErrorKind::SandboxUnavailable, "cannot create scratch dir");
  path_ = tmpl;
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

SandboxResult run_sandboxed(const std::vector<std::string>& argv, const fs::path& scratch,
                            const SandboxLimits& limits) {
  if (argv.empty()) fail(ErrorKind::InvalidInput, "empty command");
  const int abi = landlock_abi();
  const bool use_netns = !limits.allow_network && probe_netns();
  int ruleset = abi >= 1 ? build_ruleset(scratch, !limits.allow_network, abi) : -1;

  std::vector<std::string> env_store = {"PATH=/usr/local/bin:/usr/bin:/bin", "HOME=" + scratch.string(),
                                        "TMPDIR=" + scratch.string(), "PYTHONDONTWRITEBYTECODE=1",
                                        "LANG=C.UTF-8"};
  std::vector<char*> env;
  for (auto& e : env_store) env.push_back(e.data());
  env.push_back(nullptr);
  std::vector<std::string> args_store = argv;
  std::vector<char*> args;
  for (auto& a : args_store) args.push_back(a.data());
  args.push_back(nullptr);
  std::string cwd = scratch.string();

  int pipefd[2];
  if (::pipe2(pipefd, O_CLOEXEC) != 0) {
    if (ruleset >= 0) ::close(ruleset);
    fail(ErrorKind::SandboxUnavailable, std::string("pipe: ") + std::strerror(errno));
  }
  const rlim_t mem = static_cast<rlim_t>(limits.memory_mb) * 1024 * 1024;
  const rlim_t cpu = static_cast<rlim_t>(limits.timeout.count() / 1000 + 2);

  auto start = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    if (ruleset >= 0) ::close(ruleset);
    fail(ErrorKind::SandboxUnavailable, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(pipefd[1], 1);
    ::dup2(pipefd[1], 2);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, 0);
    if (::chdir(cwd.c_str()) != 0) _exit(126);
    struct rlimit rl;
    rl.rlim_cur = rl.rlim_max = mem;
    ::setrlimit(RLIMIT_AS, &rl);
    rl.rlim_cur = rl.rlim_max = cpu;
    ::setrlimit(RLIMIT_CPU, &rl);
    rl.rlim_cur = rl.rlim_max = 16 * 1024 * 1024;
    ::setrlimit(RLIMIT_FSIZE, &rl);
    rl.rlim_cur = rl.rlim_max = 0;
    ::setrlimit(RLIMIT_CORE, &rl);
    if (use_netns) ::unshare(CLONE_NEWNET);
    ::prctl(PR_SET_NO_NEW_PRIVS, 1, 0, 0, 0);
    if (ruleset >= 0 && ::syscall(SYS_landlock_restrict_self, ruleset, 0) != 0) _exit(125);
    ::execve(args[0], args.data(), env.data());
    ::execvpe(args[0], args.data(), env.data());
    _exit(127);
  }
  ::close(pipefd[1]);
  if (ruleset >= 0) ::close(ruleset);

  SandboxResult result;
  const auto deadline = start + limits.timeout;
  char buf[4096];
  bool open = true;
  while (open) {
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    int wait_ms = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count()) + 1;
    struct pollfd pfd{pipefd[0], POLLIN, 0};
    int rc = ::poll(&pfd, 1, wait_ms);
    if (rc < 0 && errno == EINTR) continue;
    if (rc <= 0) continue;
    ssize_t n = ::read(pipefd[0], buf, sizeof buf);
    if (n <= 0) {
      open = false;
    } else if (result.output.size() < limits.max_output) {
      result.output.append(buf, static_cast<std::size_t>(
                                    std::min<ssize_t>(n, static_cast<ssize_t>(limits.max_output - result.output.size()))));
    }
  }
  if (result.timed_out) ::kill(-pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  // Stray grandchildren holding the pipe open.
  ::kill(-pid, SIGKILL);
  ::close(pipefd[0]);
  result.duration_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  if (WIFSIGNALED(status)) {
    result.term_signal = WTERMSIG(status);
    if (result.term_signal == SIGXCPU) result.timed_out = true;
  }
  return result;
}

}  // namespace agentry
