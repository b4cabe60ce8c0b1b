#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "polyparse/autodiff.hpp"

namespace polyparse {

// Binary model container, host byte order:
//   magic "PLYPARSE", u32 format version,
//   manifest (u64 length + bytes), vocabulary (u64 length + bytes),
//   u32 tensor count, then per tensor:
//     name (u64 length + bytes), u8 precision in bytes (4 or 8),
//     u32 rank, u64 dims[rank], values in column-major order.
inline constexpr std::uint32_t kContainerVersion = 1;

struct TensorRecord {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::uint8_t precision = 4;
  std::string bytes;
};

struct Container {
  std::uint32_t version = kContainerVersion;
  std::string manifest;
  std::string vocabulary;
  std::vector<TensorRecord> tensors;
};

void write_container(std::ostream& out, const Container& container);
Container read_container(std::istream& in);

template <typename Scalar>
TensorRecord make_record(const std::string& name, const ad::Matrix<Scalar>& value);

// Converts between precisions when the record was written with another one.
template <typename Scalar>
ad::Matrix<Scalar> to_matrix(const TensorRecord& record);

// Records for every tensor of the store, in registration order.
template <typename Scalar>
std::vector<TensorRecord> store_records(const ad::ParameterStore<Scalar>& store);

// Overwrites store values by name; every store tensor must be present with a
// matching shape.
template <typename Scalar>
void load_records(ad::ParameterStore<Scalar>& store, const std::vector<TensorRecord>& records);

}  // namespace polyparse
