#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <Eigen/Core>

namespace algd {

/// One named tensor staged for serialization; data is row-major float32.
struct NamedTensor {
  std::string name;
  std::vector<std::int64_t> shape;
  std::vector<float> data;
};

NamedTensor tensor_from_matrix(const std::string& name, const Eigen::MatrixXd& m);
NamedTensor tensor_from_vector(const std::string& name, const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_tensor(const NamedTensor& t);
Eigen::VectorXd vector_from_tensor(const NamedTensor& t);

struct Checkpoint {
  std::vector<NamedTensor> tensors;
  nlohmann::json metadata;

  /// Tensor by exact name; throws if absent.
  const NamedTensor& at(const std::string& name) const;
};

/// Writes dir/manifest.json (tensor names, shapes, byte offsets, plus
/// metadata) and dir/tensors.bin (concatenated little-endian float32,
/// row-major). Creates dir if needed. Round-trips bit-exactly.
void save_checkpoint(const std::string& dir, const Checkpoint& ckpt);

/// Loads a checkpoint directory written by save_checkpoint; validates
/// offsets and sizes against the blob.
Checkpoint load_checkpoint(const std::string& dir);

}  // namespace algd
