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

#include "dtcf/model/checkpoint.h"

#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

#include "dtcf/base/error.h"

namespace dtcf::model {

namespace {

constexpr char kMagic[8] = {'D', 'T', 'C', 'F', 'C', 'K', 'P', 'T'};

template <typename T>
constexpr DType DTypeOf() {
  return std::is_same_v<T, float> ? DType::kFloat32 : DType::kFloat64;
}

size_t DTypeSize(DType d) { return d == DType::kFloat32 ? 4 : 8; }

class Writer {
 public:
  template <typename V>
  void Pod(V v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(V));
  }
  void Str(const std::string& s) {
    Pod(static_cast<uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void Bytes(const std::vector<unsigned char>& b) {
    buf_.insert(buf_.end(), b.begin(), b.end());
  }
  const std::vector<unsigned char>& buffer() const { return buf_; }

 private:
  std::vector<unsigned char> buf_;
};

class Reader {
 public:
  Reader(std::vector<unsigned char> data, std::string path)
      : data_(std::move(data)), path_(std::move(path)) {}

  void set_context(std::string context) { context_ = std::move(context); }

  template <typename V>
  V Pod() {
    Need(sizeof(V));
    V v;
    std::memcpy(&v, data_.data() + pos_, sizeof(V));
    pos_ += sizeof(V);
    return v;
  }
  std::string Str() {
    const uint32_t n = Pod<uint32_t>();
    Need(n);
    std::string s(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return s;
  }
  std::vector<unsigned char> Bytes(size_t n) {
    Need(n);
    std::vector<unsigned char> b(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return b;
  }
  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  void Need(size_t n) const {
    if (data_.size() - pos_ < n) {
      throw IoError("checkpoint " + path_ + " is truncated while reading " + context_);
    }
  }

  std::vector<unsigned char> data_;
  std::string path_;
  std::string context_ = "header";
  size_t pos_ = 0;
};

}  // namespace

template <typename T>
void Checkpoint::Put(const std::string& name, const ad::Tensor<T>& tensor) {
  if (Has(name)) throw ConfigError("duplicate checkpoint tensor '" + name + "'");
  StoredTensor st;
  st.name = name;
  st.dtype = DTypeOf<T>();
  st.shape = tensor.shape();
  const auto values = tensor.data();
  const auto* p = reinterpret_cast<const unsigned char*>(values.data());
  st.bytes.assign(p, p + values.size() * sizeof(T));
  tensors_.push_back(std::move(st));
}

template <typename T>
void Checkpoint::PutAll(const nn::NamedTensors<T>& tensors) {
  for (const auto& t : tensors) Put(t.name, t.tensor);
}

const StoredTensor* Checkpoint::Find(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

template <typename T>
void Checkpoint::Get(const std::string& name, ad::Tensor<T>* dst) const {
  const StoredTensor* st = Find(name);
  if (!st) throw DataError("checkpoint has no tensor '" + name + "'");
  if (st->dtype != DTypeOf<T>()) {
    throw DataError("checkpoint tensor '" + name + "' has a different dtype");
  }
  if (st->shape != dst->shape()) {
    throw DataError("checkpoint tensor '" + name + "' has shape " +
                    ad::ShapeToString(st->shape) + ", model expects " +
                    ad::ShapeToString(dst->shape()));
  }
  auto out = dst->mutable_data();
  std::memcpy(out.data(), st->bytes.data(), st->bytes.size());
}

template <typename T>
void Checkpoint::GetAll(const nn::NamedTensors<T>& dst) const {
  for (const auto& t : dst) {
    ad::Tensor<T> handle = t.tensor;
    Get(t.name, &handle);
  }
}

void Checkpoint::Write(const std::string& path) const {
  Writer w;
  for (char c : kMagic) w.Pod(c);
  w.Pod(kCheckpointVersion);
  w.Pod(static_cast<uint32_t>(config_.size()));
  for (const auto& [key, value] : config_) {
    w.Str(key);
    w.Str(value);
  }
  w.Pod(static_cast<uint32_t>(tensors_.size()));
  for (const auto& t : tensors_) {
    w.Str(t.name);
    w.Pod(static_cast<uint8_t>(t.dtype));
    w.Pod(static_cast<uint32_t>(t.shape.size()));
    for (int64_t d : t.shape) w.Pod(d);
    w.Bytes(t.bytes);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path);
  out.write(reinterpret_cast<const char*>(w.buffer().data()),
            static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw IoError("failed writing checkpoint " + path);
}

Checkpoint Checkpoint::Read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  Reader r(std::move(data), path);
  for (char c : kMagic) {
    if (r.Pod<char>() != c) throw IoError(path + " is not a checkpoint file");
  }
  const uint32_t version = r.Pod<uint32_t>();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint " + path + " has version " + std::to_string(version) +
                  ", expected " + std::to_string(kCheckpointVersion));
  }
  Checkpoint ckpt;
  r.set_context("config");
  const uint32_t n_config = r.Pod<uint32_t>();
  for (uint32_t i = 0; i < n_config; ++i) {
    std::string key = r.Str();
    ckpt.config_[key] = r.Str();
  }
  r.set_context("tensor table");
  const uint32_t n_tensors = r.Pod<uint32_t>();
  for (uint32_t i = 0; i < n_tensors; ++i) {
    r.set_context("tensor #" + std::to_string(i));
    StoredTensor st;
    st.name = r.Str();
    r.set_context("tensor '" + st.name + "'");
    const uint8_t dtype = r.Pod<uint8_t>();
    if (dtype != 1 && dtype != 2) {
      throw IoError("checkpoint tensor '" + st.name + "' has unknown dtype");
    }
    st.dtype = static_cast<DType>(dtype);
    const uint32_t rank = r.Pod<uint32_t>();
    if (rank > 8) throw IoError("checkpoint tensor '" + st.name + "' has bad rank");
    for (uint32_t k = 0; k < rank; ++k) {
      const int64_t d = r.Pod<int64_t>();
      if (d < 0) throw IoError("checkpoint tensor '" + st.name + "' has bad shape");
      st.shape.push_back(d);
    }
    st.bytes = r.Bytes(static_cast<size_t>(ad::NumElements(st.shape)) * DTypeSize(st.dtype));
    ckpt.tensors_.push_back(std::move(st));
  }
  if (!r.AtEnd()) throw IoError("checkpoint " + path + " has trailing bytes");
  return ckpt;
}

template void Checkpoint::Put(const std::string&, const ad::Tensor<float>&);
template void Checkpoint::Put(const std::string&, const ad::Tensor<double>&);
template void Checkpoint::PutAll(const nn::NamedTensors<float>&);
template void Checkpoint::PutAll(const nn::NamedTensors<double>&);
template void Checkpoint::Get(const std::string&, ad::Tensor<float>*) const;
template void Checkpoint::Get(const std::string&, ad::Tensor<double>*) const;
template void Checkpoint::GetAll(const nn::NamedTensors<float>&) const;
template void Checkpoint::GetAll(const nn::NamedTensors<double>&) const;

}  // namespace dtcf::model
