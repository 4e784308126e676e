// Copyright 2026 The hqc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hqc/circuit.hpp"
#include "hqc/qasm.hpp"
#include "hqc/statevector.hpp"

namespace hqc {

using nlohmann::json;

enum class JobStatus { Queued, Running, Done, Failed };

inline const char *job_status_name(JobStatus s) {
    switch (s) {
        case JobStatus::Queued: return "queued";
        case JobStatus::Running: return "running";
        case JobStatus::Done: return "done";
        case JobStatus::Failed: return "failed";
    }
    return "unknown";
}

struct JobMode {
    enum class Kind { Exact, Shots };
    Kind kind = Kind::Exact;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    static JobMode exact() {
        return {};
    }
    static JobMode sampled(std::uint64_t shots, std::uint64_t seed) {
        return {Kind::Shots, shots, seed};
    }
};

struct JobRequest {
    std::string circuit;  // QASM text
    PauliSum observable;
    JobMode mode;
};

/// [{"coeff": 1.0, "pauli": "ZZ"}, ...], qubit 0 rightmost in each string.
inline PauliSum observable_from_json(const json &doc) {
    if (!doc.is_array()) throw std::invalid_argument("observable must be a list of {coeff, pauli} terms");
    PauliSum sum;
    for (const json &t : doc) {
        if (!t.is_object() || !t.contains("coeff") || !t.contains("pauli") || !t["coeff"].is_number() ||
            !t["pauli"].is_string()) {
            throw std::invalid_argument("observable terms need a numeric 'coeff' and a string 'pauli'");
        }
        sum.add(t["coeff"].get<double>(), t["pauli"].get<std::string>());
    }
    return sum;
}

inline json observable_to_json(const PauliSum &sum) {
    json out = json::array();
    for (const PauliTerm &t : sum.terms()) out.push_back({{"coeff", t.coefficient}, {"pauli", t.pauli.str()}});
    return out;
}

inline json request_to_json(const JobRequest &r) {
    json doc = {{"op", "submit"}, {"circuit", r.circuit}, {"observable", observable_to_json(r.observable)}};
    if (r.mode.kind == JobMode::Kind::Exact) {
        doc["mode"] = "exact";
    } else {
        doc["mode"] = "shots";
        doc["shots"] = r.mode.shots;
        doc["seed"] = r.mode.seed;
    }
    return doc;
}

inline JobRequest request_from_json(const json &doc) {
    if (!doc.contains("circuit") || !doc["circuit"].is_string()) {
        throw std::invalid_argument("submit needs a string 'circuit'");
    }
    JobRequest r;
    r.circuit = doc["circuit"].get<std::string>();
    if (doc.contains("observable")) r.observable = observable_from_json(doc["observable"]);
    const std::string mode = doc.contains("mode") && doc["mode"].is_string() ? doc["mode"].get<std::string>() : "";
    if (mode == "exact") {
        if (r.observable.empty()) throw std::invalid_argument("exact mode needs a non-empty observable");
    } else if (mode == "shots") {
        if (!doc.contains("shots") || !doc["shots"].is_number_unsigned() || doc["shots"].get<std::uint64_t>() == 0) {
            throw std::invalid_argument("shots mode needs a positive integer 'shots'");
        }
        if (doc.contains("seed") && !doc["seed"].is_number_unsigned()) {
            throw std::invalid_argument("'seed' must be a non-negative integer");
        }
        r.mode = JobMode::sampled(doc["shots"].get<std::uint64_t>(), doc.value("seed", std::uint64_t{0}));
    } else {
        throw std::invalid_argument("'mode' must be \"exact\" or \"shots\"");
    }
    return r;
}

/// Runs a request on the statevector backend. Exact mode returns
/// {"expectation": v}; shots mode returns {"counts": {bitstring: n}}.
/// Parse failures surface as qasm::QasmError, other problems as
/// std::invalid_argument.
inline json execute_request(const JobRequest &r, std::size_t max_qubits = kMaxStatevectorQubits) {
    const Circuit c = qasm::parse(r.circuit);
    if (c.n_qubits() > max_qubits) {
        throw std::invalid_argument("circuit has " + std::to_string(c.n_qubits()) + " qubits; the backend limit is " +
                                    std::to_string(max_qubits));
    }
    if (!r.observable.empty() && r.observable.n_qubits() != c.n_qubits()) {
        throw std::invalid_argument("observable width " + std::to_string(r.observable.n_qubits()) +
                                    " does not match circuit width " + std::to_string(c.n_qubits()));
    }
    const StateVector state = simulate(c);
    if (r.mode.kind == JobMode::Kind::Exact) return {{"expectation", expectation(state, r.observable)}};
    json counts = json::object();
    for (const auto &[bits, n] : sample(state, r.mode.shots, r.mode.seed)) counts[bits] = n;
    return {{"counts", counts}};
}

/// Serializes without ever throwing on invalid UTF-8 echoed from a client.
inline std::string dump_line(const json &j) {
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

namespace detail {

inline bool send_all(int fd, const std::string &data) {
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

struct AddrInfo {
    addrinfo *list = nullptr;
    ~AddrInfo() {
        if (list) freeaddrinfo(list);
    }
};

inline AddrInfo resolve(const std::string &host, std::uint16_t port, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    AddrInfo out;
    const int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), std::to_string(port).c_str(), &hints, &out.list);
    if (rc != 0) throw std::runtime_error("cannot resolve '" + host + "': " + gai_strerror(rc));
    return out;
}

}  // namespace detail

/// Splits "host:port" (the last colon separates the port).
inline std::pair<std::string, std::uint16_t> parse_address(const std::string &address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos || colon + 1 == address.size()) {
        throw std::invalid_argument("address must be host:port, got '" + address + "'");
    }
    const std::string port_text = address.substr(colon + 1);
    std::size_t used = 0;
    unsigned long port = 0;
    try {
        port = std::stoul(port_text, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used != port_text.size() || port > 65535) {
        throw std::invalid_argument("invalid port '" + port_text + "'");
    }
    return {address.substr(0, colon), static_cast<std::uint16_t>(port)};
}

struct ServerConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 picks a free port
    std::size_t workers = 2;
    std::size_t max_qubits = 20;
    std::size_t max_line = std::size_t{1} << 20;
};

/// Job server speaking newline-delimited JSON over TCP. Requests are
/// {"op": "submit"|"poll"|"fetch"|"shutdown", ...}; replies carry "ok".
/// Jobs run FIFO on a worker pool; shutdown stops new submissions and
/// returns once every queued job has finished.
class JobServer {
  public:
    explicit JobServer(ServerConfig config) : config_(std::move(config)) {
        if (config_.workers == 0) throw std::invalid_argument("server needs at least one worker");
    }
    JobServer(const JobServer &) = delete;
    JobServer &operator=(const JobServer &) = delete;
    ~JobServer() {
        request_shutdown();
        wait();
        if (listen_fd_ >= 0) ::close(listen_fd_);
    }

    /// Binds, listens and starts the worker and acceptor threads.
    void start() {
        const detail::AddrInfo addrs = detail::resolve(config_.host, config_.port, true);
        int last_errno = 0;
        for (addrinfo *a = addrs.list; a; a = a->ai_next) {
            const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
            if (fd < 0) {
                last_errno = errno;
                continue;
            }
            const int one = 1;
            setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
            if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
                listen_fd_ = fd;
                break;
            }
            last_errno = errno;
            ::close(fd);
        }
        if (listen_fd_ < 0) {
            throw std::system_error(last_errno, std::generic_category(),
                                    "cannot bind " + config_.host + ":" + std::to_string(config_.port));
        }
        sockaddr_storage bound{};
        socklen_t len = sizeof bound;
        getsockname(listen_fd_, reinterpret_cast<sockaddr *>(&bound), &len);
        port_ = ntohs(bound.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6 *>(&bound)->sin6_port
                                                  : reinterpret_cast<sockaddr_in *>(&bound)->sin_port);
        for (std::size_t i = 0; i < config_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
        acceptor_ = std::thread([this] { accept_loop(); });
    }

    std::uint16_t port() const {
        return port_;
    }

    /// Stops accepting submissions; queued jobs still run.
    void request_shutdown() {
        {
            std::lock_guard lock(mu_);
            shutting_down_ = true;
        }
        cv_.notify_all();
    }

    /// Blocks until shutdown was requested and the queue has drained, then
    /// closes every connection.
    void wait() {
        for (std::thread &t : workers_) {
            if (t.joinable()) t.join();
        }
        stopped_ = true;
        if (acceptor_.joinable()) acceptor_.join();
        std::vector<std::thread> conns;
        {
            std::lock_guard lock(conn_mu_);
            conns.swap(connections_);
        }
        for (std::thread &t : conns) {
            if (t.joinable()) t.join();
        }
    }

    /// Handles one request line. Never throws.
    json handle(const std::string &line) {
        try {
            const json req = json::parse(line);
            if (!req.is_object() || !req.contains("op") || !req["op"].is_string()) {
                return error_reply("request must be an object with a string 'op'");
            }
            const std::string op = req["op"].get<std::string>();
            if (op == "submit") return submit(req);
            if (op == "poll" || op == "fetch") {
                if (!req.contains("job_id") || !req["job_id"].is_number_unsigned()) {
                    return error_reply("'" + op + "' needs a non-negative integer 'job_id'");
                }
                const std::uint64_t id = req["job_id"].get<std::uint64_t>();
                return op == "poll" ? poll(id) : fetch(id);
            }
            if (op == "shutdown") {
                request_shutdown();
                return {{"ok", true}};
            }
            return error_reply("unknown op '" + op + "'");
        } catch (const json::exception &e) {
            return error_reply(std::string("malformed request: ") + e.what());
        } catch (const std::exception &e) {
            return error_reply(e.what());
        }
    }

  private:
    struct Job {
        JobRequest request;
        JobStatus status = JobStatus::Queued;
        json result;
        std::string error;
    };

    static json error_reply(const std::string &message) {
        return {{"ok", false}, {"error", message}};
    }

    json submit(const json &req) {
        JobRequest r = request_from_json(req);
        std::uint64_t id;
        {
            std::lock_guard lock(mu_);
            if (shutting_down_) return error_reply("server is shutting down");
            id = next_id_++;
            jobs_[id].request = std::move(r);
            queue_.push_back(id);
        }
        cv_.notify_one();
        return {{"ok", true}, {"job_id", id}};
    }

    json poll(std::uint64_t id) {
        std::lock_guard lock(mu_);
        const auto it = jobs_.find(id);
        if (it == jobs_.end()) return error_reply("unknown job");
        json out = {{"ok", true}, {"job_id", id}, {"status", job_status_name(it->second.status)}};
        if (it->second.status == JobStatus::Failed) out["error"] = it->second.error;
        return out;
    }

    json fetch(std::uint64_t id) {
        std::lock_guard lock(mu_);
        const auto it = jobs_.find(id);
        if (it == jobs_.end()) return error_reply("unknown job");
        const Job &job = it->second;
        json out = {{"job_id", id}, {"status", job_status_name(job.status)}};
        if (job.status == JobStatus::Done) {
            out["ok"] = true;
            out["result"] = job.result;
        } else {
            out["ok"] = false;
            out["error"] = job.status == JobStatus::Failed ? job.error : "job not finished";
        }
        return out;
    }

    void worker_loop() {
        for (;;) {
            std::uint64_t id;
            JobRequest request;
            {
                std::unique_lock lock(mu_);
                cv_.wait(lock, [&] { return !queue_.empty() || shutting_down_; });
                if (queue_.empty()) return;
                id = queue_.front();
                queue_.pop_front();
                Job &job = jobs_.at(id);
                job.status = JobStatus::Running;
                request = job.request;
            }
            json result;
            std::string error;
            try {
                result = execute_request(request, config_.max_qubits);
            } catch (const std::exception &e) {
                error = e.what();
            }
            std::lock_guard lock(mu_);
            Job &job = jobs_.at(id);
            job.request = {};
            if (error.empty()) {
                job.status = JobStatus::Done;
                job.result = std::move(result);
            } else {
                job.status = JobStatus::Failed;
                job.error = std::move(error);
            }
        }
    }

    void accept_loop() {
        while (!stopped_) {
            pollfd p{listen_fd_, POLLIN, 0};
            if (::poll(&p, 1, 50) <= 0) continue;
            const int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd < 0) continue;
            std::lock_guard lock(conn_mu_);
            connections_.emplace_back([this, fd] { serve_connection(fd); });
        }
    }

    void serve_connection(int fd) {
        std::string buffer;
        char chunk[4096];
        bool open = true;
        while (open && !stopped_) {
            pollfd p{fd, POLLIN, 0};
            const int ready = ::poll(&p, 1, 50);
            if (ready < 0 && errno != EINTR) break;
            if (ready <= 0) continue;
            const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
            if (n <= 0) break;
            buffer.append(chunk, static_cast<std::size_t>(n));
            std::size_t start = 0;
            for (std::size_t nl; (nl = buffer.find('\n', start)) != std::string::npos; start = nl + 1) {
                std::string line = buffer.substr(start, nl - start);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (!detail::send_all(fd, dump_line(handle(line)) + "\n")) {
                    open = false;
                    break;
                }
            }
            buffer.erase(0, start);
            if (open && buffer.size() > config_.max_line) {
                detail::send_all(fd, dump_line(error_reply("request line too long")) + "\n");
                open = false;
            }
        }
        ::close(fd);
    }

    ServerConfig config_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;

    std::mutex mu_;
    std::condition_variable cv_;
    std::map<std::uint64_t, Job> jobs_;
    std::deque<std::uint64_t> queue_;
    std::uint64_t next_id_ = 1;
    bool shutting_down_ = false;

    std::atomic<bool> stopped_{false};
    std::vector<std::thread> workers_;
    std::thread acceptor_;
    std::mutex conn_mu_;
    std::vector<std::thread> connections_;
};

/// Blocking client for JobServer; one request in flight per connection.
class JobClient {
  public:
    JobClient(const std::string &host, std::uint16_t port) {
        const detail::AddrInfo addrs = detail::resolve(host, port, false);
        int last_errno = 0;
        for (addrinfo *a = addrs.list; a; a = a->ai_next) {
            const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
            if (fd < 0) {
                last_errno = errno;
                continue;
            }
            if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
                fd_ = fd;
                return;
            }
            last_errno = errno;
            ::close(fd);
        }
        throw std::system_error(last_errno, std::generic_category(),
                                "cannot connect to " + host + ":" + std::to_string(port));
    }
    explicit JobClient(const std::string &address)
        : JobClient(parse_address(address).first, parse_address(address).second) {
    }
    JobClient(const JobClient &) = delete;
    JobClient &operator=(const JobClient &) = delete;
    ~JobClient() {
        if (fd_ >= 0) ::close(fd_);
    }

    /// Sends one raw line (a newline is appended) and returns the reply line.
    std::string send_line(const std::string &line) {
        if (!detail::send_all(fd_, line + "\n")) throw std::runtime_error("connection lost while sending");
        std::size_t nl;
        while ((nl = buffer_.find('\n')) == std::string::npos) {
            char chunk[4096];
            const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) throw std::runtime_error("connection closed by server");
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
        std::string reply = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return reply;
    }

    json request(const json &req) {
        return json::parse(send_line(dump_line(req)));
    }

    std::uint64_t submit(const JobRequest &r) {
        const json reply = request(request_to_json(r));
        if (!reply.value("ok", false)) throw std::runtime_error("submit rejected: " + reply.value("error", std::string()));
        return reply.at("job_id").get<std::uint64_t>();
    }

    json poll(std::uint64_t id) {
        return request({{"op", "poll"}, {"job_id", id}});
    }

    json fetch(std::uint64_t id) {
        return request({{"op", "fetch"}, {"job_id", id}});
    }

    /// Polls until the job is done or failed, then returns the fetch reply.
    json wait(std::uint64_t id, std::chrono::milliseconds timeout = std::chrono::seconds(60)) {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            const json p = poll(id);
            if (!p.value("ok", false)) throw std::runtime_error(p.value("error", std::string("poll failed")));
            const std::string status = p.at("status").get<std::string>();
            if (status == "done" || status == "failed") return fetch(id);
            if (std::chrono::steady_clock::now() > deadline) throw std::runtime_error("timed out waiting for job");
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
    }

    json shutdown() {
        return request({{"op", "shutdown"}});
    }

  private:
    int fd_ = -1;
    std::string buffer_;
};

}  // namespace hqc
