#include "hstream/runtime/host_arrays.hpp"

#include <stdexcept>

namespace hstream::runtime {

std::size_t column_size(const Column& c) {
  return std::visit([](const auto& v) { return v.size(); }, c);
}

std::size_t element_bytes(const Column& c) {
  return std::holds_alternative<std::vector<double>>(c) ? sizeof(double) : sizeof(std::int32_t);
}

Column& HostArrays::at(const std::string& name) {
  auto it = columns_.find(name);
  if (it == columns_.end()) throw std::out_of_range("no host array named '" + name + "'");
  return it->second;
}

const Column& HostArrays::at(const std::string& name) const {
  auto it = columns_.find(name);
  if (it == columns_.end()) throw std::out_of_range("no host array named '" + name + "'");
  return it->second;
}

}  // namespace hstream::runtime
