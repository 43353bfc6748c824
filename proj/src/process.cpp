#include "narrbench/process.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <optional>

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include "narrbench/errors.hpp"

namespace narrbench {

namespace {

constexpr std::chrono::milliseconds kExitPoll{20};
constexpr std::chrono::milliseconds kDrainGrace{200};

struct Fd {
    int fd = -1;
    Fd() = default;
    explicit Fd(int f) : fd(f) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd(std::exchange(o.fd, -1)) {}
    ~Fd() { reset(); }
    void reset() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
};

std::array<Fd, 2> make_pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw SandboxSetupFailure(std::string("pipe2: ") + std::strerror(errno));
    return {Fd(fds[0]), Fd(fds[1])};
}

void ignore_sigpipe_once() {
    static const bool done = [] {
        std::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

// Child side after fork(): only async-signal-safe calls until execve.
[[noreturn]] void exec_child(const ProcessSpec& spec, const ProcessLimits& limits, char* const* argv,
                             char* const* envp, int in_fd, int out_fd, int err_fd, int report_fd) {
    ::setpgid(0, 0);
    if (spec.isolate_network) {
        // Fails without user namespaces; the parent learns through report_fd.
        if (::unshare(CLONE_NEWUSER | CLONE_NEWNET) == 0) {
            const char ok = 'N';
            (void)!::write(report_fd, &ok, 1);
        }
    }
    ::dup2(in_fd, STDIN_FILENO);
    ::dup2(out_fd, STDOUT_FILENO);
    ::dup2(err_fd, STDERR_FILENO);
    if (!spec.working_dir.empty() && ::chdir(spec.working_dir.c_str()) != 0) ::_exit(126);

    rlimit core{0, 0};
    ::setrlimit(RLIMIT_CORE, &core);
    if (limits.memory_mb > 0) {
        const auto bytes = static_cast<rlim_t>(limits.memory_mb) * 1024 * 1024;
        rlimit as{bytes, bytes};
        ::setrlimit(RLIMIT_AS, &as);
    }
    if (limits.time_ms > 0) {
        const auto secs = static_cast<rlim_t>(limits.time_ms / 1000 + 2);
        rlimit cpu{secs, secs + 1};
        ::setrlimit(RLIMIT_CPU, &cpu);
    }
    ::execve(argv[0], argv, envp);
    const int err = errno;
    const char tag = 'E';
    (void)!::write(report_fd, &tag, 1);
    (void)!::write(report_fd, &err, sizeof err);
    ::_exit(127);
}

}  // namespace

ProcessResult run_process(const ProcessSpec& spec, const ProcessLimits& limits) {
    if (spec.argv.empty()) throw SandboxSetupFailure("empty argv");
    ignore_sigpipe_once();

    // Everything the child needs is materialized before fork().
    std::vector<std::string> argv_store = spec.argv;
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    argv.push_back(nullptr);
    std::vector<std::string> env_store = spec.env;
    std::vector<char*> envp;
    for (auto& e : env_store) envp.push_back(e.data());
    envp.push_back(nullptr);

    auto in_pipe = make_pipe();
    auto out_pipe = make_pipe();
    auto err_pipe = make_pipe();
    auto report_pipe = make_pipe();

    const auto started = std::chrono::steady_clock::now();
    const pid_t pid = ::fork();
    if (pid < 0) throw SandboxSetupFailure(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        exec_child(spec, limits, argv.data(), envp.data(), in_pipe[0].fd, out_pipe[1].fd, err_pipe[1].fd,
                   report_pipe[1].fd);
    }
    // Also set from the parent so killpg cannot race the child's setpgid.
    ::setpgid(pid, pid);

    in_pipe[0].reset();
    out_pipe[1].reset();
    err_pipe[1].reset();
    report_pipe[1].reset();

    ProcessResult result;
    for (int fd : {in_pipe[1].fd, out_pipe[0].fd, err_pipe[0].fd}) ::fcntl(fd, F_SETFL, O_NONBLOCK);

    std::size_t written = 0;
    if (spec.stdin_data.empty()) in_pipe[1].reset();

    const auto deadline = started + std::chrono::milliseconds(limits.time_ms);
    // Set once the direct child has exited: descendants still holding the
    // pipes are killed and the streams get a short grace period to drain.
    std::optional<std::chrono::steady_clock::time_point> drain_until;
    std::array<char, 65536> buf;
    while (out_pipe[0].fd >= 0 || err_pipe[0].fd >= 0) {
        const auto now = std::chrono::steady_clock::now();
        if (drain_until && now >= *drain_until) break;
        if (!drain_until && limits.time_ms > 0 && now >= deadline) {
            result.timed_out = true;
            break;
        }
        if (!drain_until) {
            siginfo_t info{};
            if (::waitid(P_PID, static_cast<id_t>(pid), &info, WEXITED | WNOHANG | WNOWAIT) == 0 && info.si_pid == pid) {
                ::kill(-pid, SIGKILL);
                drain_until = now + kDrainGrace;
            }
        }
        std::vector<pollfd> fds;
        if (in_pipe[1].fd >= 0) fds.push_back({in_pipe[1].fd, POLLOUT, 0});
        if (out_pipe[0].fd >= 0) fds.push_back({out_pipe[0].fd, POLLIN, 0});
        if (err_pipe[0].fd >= 0) fds.push_back({err_pipe[0].fd, POLLIN, 0});
        auto wait_ms = static_cast<int>(kExitPoll.count());
        if (!drain_until && limits.time_ms > 0)
            wait_ms = std::min<int>(wait_ms, static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count()) + 1);
        const int n = ::poll(fds.data(), fds.size(), wait_ms);
        if (n < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (const auto& p : fds) {
            if (!p.revents) continue;
            if (p.fd == in_pipe[1].fd) {
                if (p.revents & (POLLERR | POLLHUP)) {
                    in_pipe[1].reset();
                    continue;
                }
                const auto w = ::write(p.fd, spec.stdin_data.data() + written, spec.stdin_data.size() - written);
                if (w > 0) written += static_cast<std::size_t>(w);
                if ((w < 0 && errno != EAGAIN) || written == spec.stdin_data.size()) in_pipe[1].reset();
                continue;
            }
            auto& target = p.fd == out_pipe[0].fd ? result.stdout_data : result.stderr_data;
            auto& owner = p.fd == out_pipe[0].fd ? out_pipe[0] : err_pipe[0];
            const auto r = ::read(p.fd, buf.data(), buf.size());
            if (r > 0) {
                const auto keep = std::min<std::size_t>(static_cast<std::size_t>(r),
                                                        limits.output_cap - std::min(limits.output_cap, target.size()));
                target.append(buf.data(), keep);
            } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
                owner.reset();
            }
        }
    }

    if (result.timed_out) ::kill(-pid, SIGKILL);
    int status = 0;
    rusage usage{};
    while (::wait4(pid, &status, 0, &usage) < 0 && errno == EINTR) {
    }
    ::kill(-pid, SIGKILL);

    result.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    result.max_rss_kb = usage.ru_maxrss;
    if (WIFSIGNALED(status)) {
        result.signaled = true;
        result.term_signal = WTERMSIG(status);
    } else if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    }

    char tag = 0;
    while (::read(report_pipe[0].fd, &tag, 1) == 1) {
        if (tag == 'N') {
            result.network_isolated = true;
        } else if (tag == 'E') {
            int err = 0;
            (void)!::read(report_pipe[0].fd, &err, sizeof err);
            throw SandboxSetupFailure("execve " + spec.argv[0] + ": " + std::strerror(err));
        }
    }
    return result;
}

std::optional<std::filesystem::path> find_executable(const std::string& name) {
    auto executable = [](const std::filesystem::path& p) {
        return std::filesystem::is_regular_file(p) && ::access(p.c_str(), X_OK) == 0;
    };
    if (name.find('/') != std::string::npos) {
        const auto p = std::filesystem::absolute(name);
        if (executable(p)) return p;
        return std::nullopt;
    }
    const char* path = std::getenv("PATH");
    std::string dirs = path ? path : "/usr/local/bin:/usr/bin:/bin";
    std::size_t start = 0;
    while (start <= dirs.size()) {
        const auto end = dirs.find(':', start);
        const auto dir = dirs.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!dir.empty()) {
            const auto candidate = std::filesystem::path(dir) / name;
            if (executable(candidate)) return candidate;
        }
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return std::nullopt;
}

TempDir::TempDir(const std::string& prefix) {
    auto pattern = (std::filesystem::temp_directory_path() / (prefix + "-XXXXXX")).string();
    if (!::mkdtemp(pattern.data())) throw SandboxSetupFailure(std::string("mkdtemp: ") + std::strerror(errno));
    path_ = pattern;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

}  // namespace narrbench
