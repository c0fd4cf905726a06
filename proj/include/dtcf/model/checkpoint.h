// Copyright (c) 2026 DTCF Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary checkpoint container, little-endian:
//
//   "DTCFCKPT"  u32 version
//   u32 n_config   { str key, str value } * n_config
//   u32 n_tensors  { str name, u8 dtype, u32 rank, i64 dims[rank], raw data } * n_tensors
//
// where str is a u32 length followed by bytes, and dtype is 1 for float32,
// 2 for float64.

#ifndef DTCF_MODEL_CHECKPOINT_H_
#define DTCF_MODEL_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dtcf/autodiff/tensor.h"
#include "dtcf/base/key_values.h"
#include "dtcf/nn/parameter.h"

namespace dtcf::model {

inline constexpr uint32_t kCheckpointVersion = 1;

enum class DType : uint8_t { kFloat32 = 1, kFloat64 = 2 };

struct StoredTensor {
  std::string name;
  DType dtype = DType::kFloat32;
  ad::Shape shape;
  std::vector<unsigned char> bytes;
};

class Checkpoint {
 public:
  KeyValues& config() { return config_; }
  const KeyValues& config() const { return config_; }
  const std::vector<StoredTensor>& tensors() const { return tensors_; }

  template <typename T>
  void Put(const std::string& name, const ad::Tensor<T>& tensor);
  template <typename T>
  void PutAll(const nn::NamedTensors<T>& tensors);

  bool Has(const std::string& name) const { return Find(name) != nullptr; }
  const StoredTensor* Find(const std::string& name) const;

  // Copies the stored values into `dst`, whose shape and dtype must match.
  // Throws DataError naming the tensor otherwise.
  template <typename T>
  void Get(const std::string& name, ad::Tensor<T>* dst) const;
  template <typename T>
  void GetAll(const nn::NamedTensors<T>& dst) const;

  void Write(const std::string& path) const;
  static Checkpoint Read(const std::string& path);

 private:
  KeyValues config_;
  std::vector<StoredTensor> tensors_;
};

}  // namespace dtcf::model

#endif  // DTCF_MODEL_CHECKPOINT_H_
