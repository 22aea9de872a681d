#include "declab/subprocess.hpp"

#include "declab/error.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace declab::subprocess {

namespace {

struct Pipe {
    int read_fd = -1;
    int write_fd = -1;

    Pipe() {
        int fds[2];
        if (pipe(fds) != 0) {
            throw tool_error("pipe() failed: " + std::string(std::strerror(errno)));
        }
        read_fd = fds[0];
        write_fd = fds[1];
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (read_fd >= 0) {
            ::close(read_fd);
            read_fd = -1;
        }
    }
    void close_write() {
        if (write_fd >= 0) {
            ::close(write_fd);
            write_fd = -1;
        }
    }
};

} // namespace

RunResult run_command(const std::vector<std::string>& argv, const RunOptions& opts) {
    if (argv.empty()) {
        throw tool_error("run_command: empty argument vector");
    }

    Pipe out_pipe;
    Pipe err_pipe;

    const pid_t pid = fork();
    if (pid < 0) {
        throw tool_error("fork() failed: " + std::string(std::strerror(errno)));
    }
    if (pid == 0) {
        // Child: own process group so a timeout kill reaps grandchildren too.
        setpgid(0, 0);
        if (opts.cwd) {
            if (chdir(opts.cwd->c_str()) != 0) {
                _exit(127);
            }
        }
        dup2(out_pipe.write_fd, STDOUT_FILENO);
        dup2(err_pipe.write_fd, STDERR_FILENO);
        out_pipe.close_read();
        out_pipe.close_write();
        err_pipe.close_read();
        err_pipe.close_write();

        std::vector<char*> args;
        args.reserve(argv.size() + 1);
        for (const auto& a : argv) {
            args.push_back(const_cast<char*>(a.c_str()));
        }
        args.push_back(nullptr);
        execvp(args[0], args.data());
        _exit(127);
    }

    out_pipe.close_write();
    err_pipe.close_write();

    RunResult result;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(opts.timeout_secs));

    struct pollfd fds[2] = {
        {out_pipe.read_fd, POLLIN, 0},
        {err_pipe.read_fd, POLLIN, 0},
    };
    bool open_fds[2] = {true, true};
    std::string* sinks[2] = {&result.out, &result.err};
    char buffer[4096];

    while (open_fds[0] || open_fds[1]) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            kill(-pid, SIGKILL);
            break;
        }
        const auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
        const int timeout_ms =
            static_cast<int>(std::min<long long>(remaining.count() + 1, 1000));

        fds[0].fd = open_fds[0] ? out_pipe.read_fd : -1;
        fds[1].fd = open_fds[1] ? err_pipe.read_fd : -1;
        const int rc = poll(fds, 2, timeout_ms);
        if (rc < 0) {
            if (errno == EINTR) continue;
            kill(-pid, SIGKILL);
            break;
        }
        for (int i = 0; i < 2; ++i) {
            if (!open_fds[i] || fds[i].revents == 0) continue;
            const ssize_t n = read(fds[i].fd, buffer, sizeof(buffer));
            if (n > 0) {
                sinks[i]->append(buffer, static_cast<std::size_t>(n));
            } else {
                open_fds[i] = false;
            }
        }
    }

    // Drain whatever arrived between the last poll and the kill.
    for (int i = 0; i < 2; ++i) {
        const int fd = i == 0 ? out_pipe.read_fd : err_pipe.read_fd;
        fcntl(fd, F_SETFL, O_NONBLOCK);
        ssize_t n;
        while ((n = read(fd, buffer, sizeof(buffer))) > 0) {
            sinks[i]->append(buffer, static_cast<std::size_t>(n));
        }
    }

    int status = 0;
    waitpid(pid, &status, 0);
    if (result.timed_out) {
        result.exit_code = -1;
    } else if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

} // namespace declab::subprocess
