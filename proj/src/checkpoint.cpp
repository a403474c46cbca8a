#include "algd/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs are little-endian; big-endian hosts unsupported");

namespace algd {

NamedTensor tensor_from_matrix(const std::string& name, const Eigen::MatrixXd& m) {
  NamedTensor t;
  t.name = name;
  t.shape = {m.rows(), m.cols()};
  t.data.resize(static_cast<std::size_t>(m.size()));
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.data[k++] = static_cast<float>(m(r, c));
  return t;
}

NamedTensor tensor_from_vector(const std::string& name, const Eigen::VectorXd& v) {
  NamedTensor t;
  t.name = name;
  t.shape = {v.size()};
  t.data.resize(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) t.data[static_cast<std::size_t>(i)] = static_cast<float>(v(i));
  return t;
}

Eigen::MatrixXd matrix_from_tensor(const NamedTensor& t) {
  if (t.shape.size() != 2) throw std::invalid_argument("matrix_from_tensor: " + t.name + " is not 2-D");
  Eigen::MatrixXd m(t.shape[0], t.shape[1]);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = static_cast<double>(t.data[k++]);
  return m;
}

Eigen::VectorXd vector_from_tensor(const NamedTensor& t) {
  if (t.shape.size() != 1) throw std::invalid_argument("vector_from_tensor: " + t.name + " is not 1-D");
  Eigen::VectorXd v(t.shape[0]);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = static_cast<double>(t.data[static_cast<std::size_t>(i)]);
  return v;
}

const NamedTensor& Checkpoint::at(const std::string& name) const {
  for (const NamedTensor& t : tensors)
    if (t.name == name) return t;
  throw std::out_of_range("checkpoint has no tensor named " + name);
}

void save_checkpoint(const std::string& dir, const Checkpoint& ckpt) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  nlohmann::json manifest;
  manifest["format"] = "algd-checkpoint-1";
  manifest["metadata"] = ckpt.metadata.is_null() ? nlohmann::json::object() : ckpt.metadata;
  nlohmann::json tensor_list = nlohmann::json::array();

  std::ofstream blob(fs::path(dir) / "tensors.bin", std::ios::binary | std::ios::trunc);
  if (!blob) throw std::runtime_error("save_checkpoint: cannot open tensors.bin in " + dir);
  std::uint64_t offset = 0;
  for (const NamedTensor& t : ckpt.tensors) {
    std::uint64_t count = 1;
    for (std::int64_t d : t.shape) {
      if (d < 0) throw std::invalid_argument("save_checkpoint: negative dim in " + t.name);
      count *= static_cast<std::uint64_t>(d);
    }
    if (count != t.data.size())
      throw std::invalid_argument("save_checkpoint: shape/data mismatch in " + t.name);
    tensor_list.push_back({{"name", t.name},
                           {"shape", t.shape},
                           {"offset_bytes", offset},
                           {"count", count}});
    blob.write(reinterpret_cast<const char*>(t.data.data()),
               static_cast<std::streamsize>(count * sizeof(float)));
    offset += count * sizeof(float);
  }
  blob.close();
  if (!blob) throw std::runtime_error("save_checkpoint: write to tensors.bin failed");

  manifest["tensors"] = std::move(tensor_list);
  std::ofstream mf(fs::path(dir) / "manifest.json", std::ios::trunc);
  if (!mf) throw std::runtime_error("save_checkpoint: cannot open manifest.json in " + dir);
  mf << manifest.dump(2) << "\n";
  mf.close();
  if (!mf) throw std::runtime_error("save_checkpoint: write to manifest.json failed");
}

Checkpoint load_checkpoint(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw std::runtime_error("load_checkpoint: missing manifest.json in " + dir);
  nlohmann::json manifest = nlohmann::json::parse(mf);
  if (manifest.value("format", "") != "algd-checkpoint-1")
    throw std::runtime_error("load_checkpoint: unrecognized format in " + dir);

  std::ifstream blob(fs::path(dir) / "tensors.bin", std::ios::binary);
  if (!blob) throw std::runtime_error("load_checkpoint: missing tensors.bin in " + dir);
  std::vector<char> bytes((std::istreambuf_iterator<char>(blob)), std::istreambuf_iterator<char>());

  Checkpoint ckpt;
  ckpt.metadata = manifest.value("metadata", nlohmann::json::object());
  for (const auto& entry : manifest.at("tensors")) {
    NamedTensor t;
    t.name = entry.at("name").get<std::string>();
    t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
    const std::uint64_t offset = entry.at("offset_bytes").get<std::uint64_t>();
    const std::uint64_t count = entry.at("count").get<std::uint64_t>();
    if (offset + count * sizeof(float) > bytes.size())
      throw std::runtime_error("load_checkpoint: tensor " + t.name + " exceeds blob size");
    t.data.resize(count);
    std::memcpy(t.data.data(), bytes.data() + offset, count * sizeof(float));
    ckpt.tensors.push_back(std::move(t));
  }
  return ckpt;
}

}  // namespace algd
