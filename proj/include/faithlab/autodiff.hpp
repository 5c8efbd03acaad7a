#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "faithlab/tensor.hpp"

namespace faithlab::ad {

struct NodeId {
  std::size_t index = 0;
  bool operator==(const NodeId&) const = default;
};

enum class OpKind { kInput, kConstant, kAffine, kRelu, kMul, kSum, kSquaredNorm, kSoftmax, kPhaseImage, kSelect };

using Inputs = std::vector<std::reference_wrapper<const Tensor>>;

// A straight-line program over a fixed set of differentiable primitives.
// Input leaves are bound at evaluation time, in declaration order; constants
// are owned by the program. The last node added is the output unless
// set_output() says otherwise.
class Program {
 public:
  NodeId input(std::string name, Shape shape);
  NodeId constant(Tensor value, std::string name = {});

  // y = x W + b with W of shape [n, m]; x may have any shape holding n values.
  NodeId affine(NodeId x, NodeId weight, NodeId bias);
  NodeId relu(NodeId x);
  NodeId mul(NodeId a, NodeId b);
  NodeId sum(NodeId x);
  NodeId squared_norm(NodeId x);
  NodeId softmax(NodeId x);
  // Real image irfft2(magnitude * exp(i * phase)) over the Hermitian
  // parameterization of hermitian_from_polar; phase has shape [H, W/2+1] and
  // only free bins carry a phase.
  NodeId phase_image(NodeId phase, std::size_t height, std::size_t width, std::vector<double> magnitude);
  NodeId select(NodeId x, std::size_t component);

  void set_output(NodeId node);
  NodeId output() const;

  const std::vector<NodeId>& inputs() const { return inputs_; }
  NodeId find_input(const std::string& name) const;
  const Shape& shape_of(NodeId node) const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    OpKind kind;
    std::vector<std::size_t> args;
    Shape shape;
    std::string name;
    std::size_t payload = 0;  // constant slot, selected component, or magnitude slot
    bool depends_on_input = false;
  };

  NodeId push(Node node);
  const Node& node(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<Tensor> constants_;
  std::vector<std::vector<double>> magnitudes_;
  std::vector<std::size_t> image_dims_;  // (height, width) pairs per phase_image
  std::vector<NodeId> inputs_;
  std::optional<NodeId> output_;

  friend class Tape;
};

Tensor evaluate(const Program& program, const Inputs& inputs);

// Reverse-mode gradient of a scalar output (or of output[component]) with
// respect to one input leaf.
Tensor gradient(const Program& program, const Inputs& inputs, NodeId wrt,
                std::optional<std::size_t> component = std::nullopt);

// Vector-Jacobian product: gradients of <cotangent, output> for every input
// leaf, in declaration order.
std::vector<Tensor> vjp(const Program& program, const Inputs& inputs, const Tensor& cotangent);

// (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate of the named leaf.
Tensor central_difference_gradient(const Program& program, const Inputs& inputs, NodeId wrt, double step,
                                   std::optional<std::size_t> component = std::nullopt);

// max_i |a_i - b_i| / max(max_i |b_i|, floor)
double relative_error(std::span<const double> value, std::span<const double> reference, double floor = 1e-12);

}  // namespace faithlab::ad
