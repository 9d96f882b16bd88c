#include "process.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "faultrank/common.hpp"

extern char** environ;

namespace faultrank::miner::detail {

TempFile::TempFile() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "faultrank-XXXXXX").string();
  int fd = ::mkstemp(tmpl.data());
  if (fd < 0) throw Error(std::string("mkstemp failed: ") + std::strerror(errno));
  ::close(fd);
  path_ = tmpl;
}

TempFile::~TempFile() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

void TempFile::write(const std::string& content) const {
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error("cannot write " + path_.string());
}

ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::optional<std::filesystem::path>& stdin_file) {
  int pipefd[2];
  if (::pipe(pipefd) != 0) throw Error(std::string("pipe failed: ") + std::strerror(errno));
  TempFile err_file;

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  std::string in_path = stdin_file ? stdin_file->string() : std::string("/dev/null");
  posix_spawn_file_actions_addopen(&actions, 0, in_path.c_str(), O_RDONLY, 0);
  posix_spawn_file_actions_adddup2(&actions, pipefd[1], 1);
  std::string err_path = err_file.path().string();
  posix_spawn_file_actions_addopen(&actions, 2, err_path.c_str(), O_WRONLY | O_TRUNC, 0);
  posix_spawn_file_actions_addclose(&actions, pipefd[0]);
  posix_spawn_file_actions_addclose(&actions, pipefd[1]);

  std::vector<char*> args;
  args.reserve(argv.size() + 1);
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  int rc = ::posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(pipefd[1]);
  if (rc != 0) {
    ::close(pipefd[0]);
    throw Error("cannot run " + argv[0] + ": " + std::strerror(rc));
  }

  ProcessResult result;
  char buf[1 << 16];
  for (;;) {
    ssize_t n = ::read(pipefd[0], buf, sizeof buf);
    if (n > 0) {
      result.out.append(buf, static_cast<std::size_t>(n));
    } else if (n == 0) {
      break;
    } else if (errno != EINTR) {
      break;
    }
  }
  ::close(pipefd[0]);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;

  std::ifstream err(err_file.path(), std::ios::binary);
  std::ostringstream ss;
  ss << err.rdbuf();
  result.err = ss.str();
  return result;
}

}  // namespace faultrank::miner::detail
