#include "hstream/pipeline/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "hstream/runtime/scheduler.hpp"

namespace hstream::pipeline {

namespace {

using runtime::Column;
using runtime::HostArrays;

template <class T>
T from_little_endian(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <class T>
void to_little_endian(T v, unsigned char* p) {
  std::memcpy(p, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(p, p + sizeof(T));
}

Column empty_column(const ColumnSpec& c, std::size_t n) {
  if (c.type == frontend::ScalarType::Int) return std::vector<std::int32_t>(n);
  return std::vector<double>(n);
}

// Packs elements [begin, begin + n) of the columns as interleaved records.
std::vector<unsigned char> encode(const std::vector<ColumnSpec>& columns, const HostArrays& data, std::size_t begin,
                                  std::size_t n) {
  const std::size_t rec = record_bytes(columns);
  std::vector<unsigned char> buf(rec * n);
  std::size_t offset = 0;
  for (const auto& c : columns) {
    const Column& col = data.at(c.name);
    if (runtime::element_bytes(col) != c.element_bytes()) throw PipelineError("column '" + c.name + "' has the wrong type");
    for (std::size_t i = 0; i < n; ++i) {
      unsigned char* p = buf.data() + i * rec + offset;
      if (c.type == frontend::ScalarType::Int) {
        to_little_endian(std::get<std::vector<std::int32_t>>(col)[begin + i], p);
      } else {
        to_little_endian(std::get<std::vector<double>>(col)[begin + i], p);
      }
    }
    offset += c.element_bytes();
  }
  return buf;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::size_t column, std::size_t index) {
  return splitmix64(splitmix64(seed ^ (0xD1B54A32D192ED03ull * (column + 1))) + index);
}

}  // namespace

std::size_t record_bytes(const std::vector<ColumnSpec>& columns) {
  std::size_t n = 0;
  for (const auto& c : columns) n += c.element_bytes();
  return n;
}

// ---------------------------------------------------------------- memory

MemorySource::MemorySource(HostArrays data, std::optional<std::size_t> length)
    : MemorySource(std::make_shared<const HostArrays>(std::move(data)), length) {}

MemorySource::MemorySource(std::shared_ptr<const HostArrays> data, std::optional<std::size_t> length)
    : data_(std::move(data)) {
  if (!data_) throw PipelineError("memory source needs data");
  std::optional<std::size_t> common;
  for (const auto& [name, col] : data_->columns()) {
    const std::size_t n = runtime::column_size(col);
    if (common && *common != n) throw PipelineError("memory source columns differ in length");
    common = n;
  }
  if (common && length && *common != *length) throw PipelineError("memory source length does not match its columns");
  if (!common && !length) throw PipelineError("memory source without columns needs an explicit length");
  length_ = common ? *common : *length;
}

std::optional<Batch> MemorySource::next(std::size_t max_elements) {
  if (pos_ >= length_ || max_elements == 0) return std::nullopt;
  const std::size_t n = std::min(max_elements, length_ - pos_);
  Batch b;
  b.length = n;
  for (const auto& [name, col] : data_->columns()) {
    std::visit(
        [&](const auto& v) {
          using V = std::decay_t<decltype(v)>;
          b.arrays.set(name, V(v.begin() + pos_, v.begin() + pos_ + n));
        },
        col);
  }
  pos_ += n;
  return b;
}

// ---------------------------------------------------------------- generated

GeneratedSource::GeneratedSource(std::vector<ColumnSpec> columns, std::size_t elements, std::uint64_t seed)
    : columns_(std::move(columns)), total_(elements), seed_(seed) {}

GeneratedSource GeneratedSource::megabytes(std::vector<ColumnSpec> columns, double mb, std::uint64_t seed) {
  std::size_t widest = 8;
  if (!columns.empty()) {
    widest = 0;
    for (const auto& c : columns) widest = std::max(widest, c.element_bytes());
  }
  const std::size_t n = runtime::mb_to_elements(mb, widest);
  return GeneratedSource(std::move(columns), n, seed);
}

double GeneratedSource::double_at(std::uint64_t seed, std::size_t column, std::size_t index) {
  const std::uint64_t h = mix(seed, column, index);
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

std::int32_t GeneratedSource::int_at(std::uint64_t seed, std::size_t column, std::size_t index) {
  return static_cast<std::int32_t>(1 + mix(seed, column, index) % 65536);
}

std::optional<Batch> GeneratedSource::next(std::size_t max_elements) {
  if (pos_ >= total_ || max_elements == 0) return std::nullopt;
  const std::size_t n = std::min(max_elements, total_ - pos_);
  Batch b;
  b.length = n;
  for (std::size_t k = 0; k < columns_.size(); ++k) {
    if (columns_[k].type == frontend::ScalarType::Int) {
      std::vector<std::int32_t> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = int_at(seed_, k, pos_ + i);
      b.arrays.set(columns_[k].name, std::move(v));
    } else {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = double_at(seed_, k, pos_ + i);
      b.arrays.set(columns_[k].name, std::move(v));
    }
  }
  pos_ += n;
  return b;
}

// ---------------------------------------------------------------- files

FileSource::FileSource(const std::filesystem::path& path, std::vector<ColumnSpec> columns)
    : path_(path), columns_(std::move(columns)) {
  if (columns_.empty()) throw PipelineError("file input needs at least one input column; the kernel reads none");
  in_.open(path, std::ios::binary);
  if (!in_) throw PipelineError("cannot open input stream '" + path.string() + "'");
}

std::optional<Batch> FileSource::next(std::size_t max_elements) {
  if (max_elements == 0) return std::nullopt;
  const std::size_t rec = record_bytes(columns_);
  std::vector<unsigned char> buf(rec * max_elements);
  in_.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (in_.bad()) throw PipelineError("read failure on '" + path_.string() + "'");
  if (got % rec != 0) {
    throw PipelineError("'" + path_.string() + "' ends inside a record (" + std::to_string(got % rec) + " stray bytes)");
  }
  const std::size_t n = got / rec;
  if (n == 0) return std::nullopt;

  Batch b;
  b.length = n;
  std::size_t offset = 0;
  for (const auto& c : columns_) {
    Column col = empty_column(c, n);
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned char* p = buf.data() + i * rec + offset;
      if (c.type == frontend::ScalarType::Int) {
        std::get<std::vector<std::int32_t>>(col)[i] = from_little_endian<std::int32_t>(p);
      } else {
        std::get<std::vector<double>>(col)[i] = from_little_endian<double>(p);
      }
    }
    b.arrays.set(c.name, std::move(col));
    offset += c.element_bytes();
  }
  return b;
}

void write_stream_file(const std::filesystem::path& path, const std::vector<ColumnSpec>& columns,
                       const HostArrays& data) {
  std::size_t n = 0;
  if (!columns.empty()) n = runtime::column_size(data.at(columns.front().name));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PipelineError("cannot create '" + path.string() + "'");
  const auto buf = encode(columns, data, 0, n);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw PipelineError("write failure on '" + path.string() + "'");
}

FileSink::FileSink(const std::filesystem::path& path, std::vector<ColumnSpec> columns)
    : path_(path), columns_(std::move(columns)) {
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw PipelineError("cannot create output '" + path.string() + "'");
}

void FileSink::write(const ProcessedBatch& batch) {
  const auto buf = encode(columns_, batch.outputs, 0, batch.length);
  out_.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out_) throw PipelineError("write failure on '" + path_.string() + "'");
}

void FileSink::finish() {
  out_.flush();
  if (!out_) throw PipelineError("write failure on '" + path_.string() + "'");
  out_.close();
}

// ---------------------------------------------------------------- collect

void CollectSink::write(const ProcessedBatch& batch) {
  order_.push_back(batch.seq);
  for (const auto& [name, col] : batch.outputs.columns()) {
    if (!data_.contains(name)) {
      data_.set(name, col);
      continue;
    }
    std::visit(
        [&](auto& dst) {
          const auto& src = std::get<std::decay_t<decltype(dst)>>(col);
          dst.insert(dst.end(), src.begin(), src.end());
        },
        data_.at(name));
  }
}

}  // namespace hstream::pipeline
