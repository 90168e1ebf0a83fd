#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace hstream::runtime {

using Column = std::variant<std::vector<double>, std::vector<std::int32_t>>;

std::size_t column_size(const Column& c);
std::size_t element_bytes(const Column& c);

/// Named host arrays a kernel reads and writes. All columns that take part
/// in one execution must have the same length.
class HostArrays {
 public:
  HostArrays() = default;

  void set(const std::string& name, Column column) { columns_[name] = std::move(column); }
  bool contains(const std::string& name) const { return columns_.count(name) != 0; }

  Column& at(const std::string& name);
  const Column& at(const std::string& name) const;

  std::vector<double>& doubles(const std::string& name) { return std::get<std::vector<double>>(at(name)); }
  std::vector<std::int32_t>& ints(const std::string& name) { return std::get<std::vector<std::int32_t>>(at(name)); }
  const std::vector<double>& doubles(const std::string& name) const {
    return std::get<std::vector<double>>(at(name));
  }
  const std::vector<std::int32_t>& ints(const std::string& name) const {
    return std::get<std::vector<std::int32_t>>(at(name));
  }

  const std::map<std::string, Column>& columns() const { return columns_; }

  friend bool operator==(const HostArrays&, const HostArrays&) = default;

 private:
  std::map<std::string, Column> columns_;
};

}  // namespace hstream::runtime
