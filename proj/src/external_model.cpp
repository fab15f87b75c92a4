#include "fairprobe/external_model.hpp"

#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

#include <json.hpp>

#include "fairprobe/digest.hpp"
#include "fairprobe/error.hpp"

namespace fairprobe {

using nlohmann::json;

ExternalModel::ExternalModel(std::string launch_command, const InputDomain& domain)
    : command_(std::move(launch_command)), param_count_(domain.size()) {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0)
    throw TransportError(std::string("socketpair: ") + std::strerror(errno));

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw TransportError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    // Child: the socket end becomes both stdin and stdout; stderr is inherited.
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  pid_ = pid;
  fd_ = fds[0];

  try {
    json reply;
    try {
      reply = json::parse(exchange(R"({"op":"handshake"})"));
    } catch (const json::parse_error& e) {
      throw ProtocolError(std::string("handshake reply is not JSON: ") + e.what());
    }
    if (!reply.is_object() || !reply.value("ok", false))
      throw ProtocolError("handshake rejected: " + reply.dump());
    if (!reply.contains("params") || !reply["params"].is_number_unsigned())
      throw ProtocolError("handshake reply lacks integer 'params'");
    const auto params = reply["params"].get<std::size_t>();
    if (params != param_count_)
      throw ProtocolError("adapter reports " + std::to_string(params) + " parameters, domain has " +
                          std::to_string(param_count_));
    if (!reply.contains("alphabet") || !reply["alphabet"].is_array() || reply["alphabet"].empty())
      throw ProtocolError("handshake reply lacks a nonempty 'alphabet'");
    for (const auto& l : reply["alphabet"]) {
      if (!l.is_number_integer()) throw ProtocolError("alphabet entries must be integers");
      alphabet_.push_back(l.get<Label>());
    }
    std::sort(alphabet_.begin(), alphabet_.end());
    if (std::adjacent_find(alphabet_.begin(), alphabet_.end()) != alphabet_.end())
      throw ProtocolError("alphabet has duplicate labels");
    if (reply.contains("model") && reply["model"].is_string())
      description_ = reply["model"].get<std::string>();
  } catch (...) {
    shutdown();
    throw;
  }
}

ExternalModel::~ExternalModel() { shutdown(); }

void ExternalModel::shutdown() noexcept {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    // Closing the socket delivers EOF; give the adapter a moment to exit.
    for (int i = 0; i < 200; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

std::string ExternalModel::exchange(const std::string& request_line) const {
  if (fd_ < 0) throw TransportError("external model connection is closed");
  const std::string out = request_line + "\n";
  std::size_t sent = 0;
  while (sent < out.size()) {
    const auto n = ::send(fd_, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("write to adapter failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
  for (;;) {
    if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[65536];
    const auto n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("read from adapter failed: ") + std::strerror(errno));
    }
    if (n == 0) throw TransportError("adapter process closed its output (exited?)");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

Label ExternalModel::predict(const PointInput& input) const {
  return predict_batch(std::span<const PointInput>(&input, 1)).front();
}

std::vector<Label> ExternalModel::predict_batch(std::span<const PointInput> inputs) const {
  if (inputs.empty()) return {};
  json request = {{"op", "predict"}, {"rows", json::array()}};
  for (const auto& in : inputs) {
    if (in.size() != param_count_) throw ContractError("input arity does not match the domain");
    request["rows"].push_back(in.values);
  }

  std::lock_guard lock(mutex_);
  json reply;
  try {
    reply = json::parse(exchange(request.dump()));
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("predict reply is not JSON: ") + e.what());
  }
  if (!reply.is_object()) throw ProtocolError("predict reply is not an object");
  if (!reply.value("ok", false)) {
    std::string msg = reply.dump();
    if (reply.contains("error") && reply["error"].is_object())
      msg = reply["error"].value("code", std::string("?")) + ": " +
            reply["error"].value("msg", std::string());
    throw ProtocolError("adapter error " + msg);
  }
  if (!reply.contains("labels") || !reply["labels"].is_array())
    throw ProtocolError("predict reply lacks 'labels'");
  const auto& labels = reply["labels"];
  if (labels.size() != inputs.size())
    throw ProtocolError("adapter returned " + std::to_string(labels.size()) + " labels for " +
                        std::to_string(inputs.size()) + " rows");
  std::vector<Label> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    if (!l.is_number_integer()) throw ProtocolError("labels must be integers");
    const auto label = l.get<Label>();
    if (!std::binary_search(alphabet_.begin(), alphabet_.end(), label))
      throw ProtocolError("label " + std::to_string(label) + " outside declared alphabet");
    out.push_back(label);
  }
  return out;
}

std::string ExternalModel::digest() const {
  return digest_of("external\n" + command_ + "\n" + description_);
}

ModelHandle connect_external(const std::string& launch_command, const InputDomain& domain) {
  return std::make_shared<ExternalModel>(launch_command, domain);
}

}  // namespace fairprobe
