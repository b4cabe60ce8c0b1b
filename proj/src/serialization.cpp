#include "polyparse/serialization.hpp"

#include <cstring>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "polyparse/error.hpp"

namespace polyparse {

namespace {

constexpr char kMagic[8] = {'P', 'L', 'Y', 'P', 'A', 'R', 'S', 'E'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw Error("truncated model file");
  return value;
}

std::string get_string(std::istream& in, std::uint64_t limit = 1ULL << 34) {
  const auto n = get<std::uint64_t>(in);
  if (n > limit) throw Error("corrupt model file: oversized field");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw Error("truncated model file");
  return s;
}

}  // namespace

void write_container(std::ostream& out, const Container& container) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, container.version);
  put_string(out, container.manifest);
  put_string(out, container.vocabulary);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(container.tensors.size()));
  for (const auto& t : container.tensors) {
    put_string(out, t.name);
    put<std::uint8_t>(out, t.precision);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put<std::uint64_t>(out, d);
    out.write(t.bytes.data(), static_cast<std::streamsize>(t.bytes.size()));
  }
  if (!out) throw Error("failed writing model file");
}

Container read_container(std::istream& in) {
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("not a model file (bad magic)");
  }
  Container c;
  c.version = get<std::uint32_t>(in);
  if (c.version != kContainerVersion) {
    throw Error("unsupported model format version " + std::to_string(c.version));
  }
  c.manifest = get_string(in);
  c.vocabulary = get_string(in);
  const auto count = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord t;
    t.name = get_string(in, 1 << 16);
    t.precision = get<std::uint8_t>(in);
    if (t.precision != 4 && t.precision != 8) throw Error("unsupported tensor precision");
    const auto rank = get<std::uint32_t>(in);
    if (rank > 8) throw Error("corrupt model file: tensor rank");
    std::uint64_t values = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      t.shape.push_back(get<std::uint64_t>(in));
      values *= t.shape.back();
    }
    t.bytes.resize(values * t.precision);
    if (values && !in.read(t.bytes.data(), static_cast<std::streamsize>(t.bytes.size()))) {
      throw Error("truncated model file");
    }
    c.tensors.push_back(std::move(t));
  }
  return c;
}

template <typename Scalar>
TensorRecord make_record(const std::string& name, const ad::Matrix<Scalar>& value) {
  TensorRecord t;
  t.name = name;
  t.shape = {static_cast<std::uint64_t>(value.rows()), static_cast<std::uint64_t>(value.cols())};
  t.precision = sizeof(Scalar);
  t.bytes.assign(reinterpret_cast<const char*>(value.data()), value.size() * sizeof(Scalar));
  return t;
}

template <typename Scalar>
ad::Matrix<Scalar> to_matrix(const TensorRecord& record) {
  if (record.shape.size() != 2) throw Error("tensor '" + record.name + "' is not a matrix");
  const auto rows = static_cast<ad::Index>(record.shape[0]);
  const auto cols = static_cast<ad::Index>(record.shape[1]);
  ad::Matrix<Scalar> m(rows, cols);
  const auto n = static_cast<std::size_t>(rows * cols);
  if (record.precision == sizeof(Scalar)) {
    std::memcpy(m.data(), record.bytes.data(), n * sizeof(Scalar));
  } else if (record.precision == 4) {
    const auto* src = reinterpret_cast<const float*>(record.bytes.data());
    for (std::size_t i = 0; i < n; ++i) m.data()[i] = static_cast<Scalar>(src[i]);
  } else {
    const auto* src = reinterpret_cast<const double*>(record.bytes.data());
    for (std::size_t i = 0; i < n; ++i) m.data()[i] = static_cast<Scalar>(src[i]);
  }
  return m;
}

template <typename Scalar>
std::vector<TensorRecord> store_records(const ad::ParameterStore<Scalar>& store) {
  std::vector<TensorRecord> records;
  for (std::size_t i = 0; i < store.size(); ++i) {
    records.push_back(make_record<Scalar>(store[i].name, store[i].value));
  }
  return records;
}

template <typename Scalar>
void load_records(ad::ParameterStore<Scalar>& store, const std::vector<TensorRecord>& records) {
  std::unordered_map<std::string, const TensorRecord*> by_name;
  for (const auto& r : records) by_name[r.name] = &r;
  for (std::size_t i = 0; i < store.size(); ++i) {
    auto& p = store[i];
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw Error("model file lacks tensor '" + p.name + "'");
    auto m = to_matrix<Scalar>(*it->second);
    if (p.trainable && (m.rows() != p.value.rows() || m.cols() != p.value.cols())) {
      throw Error("tensor '" + p.name + "' has shape " + std::to_string(m.rows()) + "x" +
                  std::to_string(m.cols()) + ", model expects " + std::to_string(p.value.rows()) +
                  "x" + std::to_string(p.value.cols()));
    }
    p.value = std::move(m);
  }
}

template TensorRecord make_record<float>(const std::string&, const ad::Matrix<float>&);
template TensorRecord make_record<double>(const std::string&, const ad::Matrix<double>&);
template ad::Matrix<float> to_matrix<float>(const TensorRecord&);
template ad::Matrix<double> to_matrix<double>(const TensorRecord&);
template std::vector<TensorRecord> store_records<float>(const ad::ParameterStore<float>&);
template std::vector<TensorRecord> store_records<double>(const ad::ParameterStore<double>&);
template void load_records<float>(ad::ParameterStore<float>&, const std::vector<TensorRecord>&);
template void load_records<double>(ad::ParameterStore<double>&, const std::vector<TensorRecord>&);

}  // namespace polyparse
