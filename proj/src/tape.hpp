#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "stunet/tensor.hpp"

namespace stunet::detail {

// One recorded value. Creation ids increase monotonically, so sorting the
// reachable nodes by descending id is a valid reverse-topological order.
struct TapeNode {
  std::uint64_t id = 0;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  bool leaf = true;
  const char* op = "leaf";
  std::vector<std::shared_ptr<TapeNode>> parents;
  BackwardFn backward;

  std::vector<double>& grad_buffer() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

std::uint64_t next_node_id();

}  // namespace stunet::detail
