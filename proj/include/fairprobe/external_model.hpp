#pragma once

#include <mutex>
#include <string>

#include "fairprobe/models.hpp"

namespace fairprobe {

/// Classifier hosted by a child process speaking the line-delimited JSON
/// protocol on its stdin/stdout:
///
///     -> {"op":"handshake"}
///     <- {"ok":true,"params":4,"alphabet":[-1,1],"model":"..."}
///     -> {"op":"predict","rows":[[1,2,3,4],...]}
///     <- {"ok":true,"labels":[1,...]}
///     <- {"ok":false,"error":{"code":"protocol","msg":"..."}}
///
/// One request is in flight at a time; concurrent callers are serialized.
class ExternalModel final : public Model {
 public:
  /// Spawns `launch_command` through /bin/sh and performs the handshake.
  /// Throws TransportError if the child cannot be started or exits, and
  /// ProtocolError if the handshake disagrees with `domain`.
  ExternalModel(std::string launch_command, const InputDomain& domain);
  ~ExternalModel() override;

  ExternalModel(const ExternalModel&) = delete;
  ExternalModel& operator=(const ExternalModel&) = delete;

  ModelKind kind() const override { return ModelKind::external; }
  const Alphabet& alphabet() const override { return alphabet_; }
  Label predict(const PointInput& input) const override;
  std::vector<Label> predict_batch(std::span<const PointInput> inputs) const override;
  std::string digest() const override;

  const std::string& description() const { return description_; }
  const std::string& command() const { return command_; }

 private:
  std::string exchange(const std::string& request_line) const;
  void shutdown() noexcept;

  std::string command_;
  std::size_t param_count_;
  Alphabet alphabet_;
  std::string description_;
  int pid_ = -1;
  int fd_ = -1;
  mutable std::string buffer_;
  mutable std::mutex mutex_;
};

ModelHandle connect_external(const std::string& launch_command, const InputDomain& domain);

}  // namespace fairprobe
