#include "faithlab/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "faithlab/fft.hpp"

namespace faithlab::ad {

NodeId Program::push(Node node) {
  for (auto arg : node.args) {
    if (nodes_[arg].depends_on_input) node.depends_on_input = true;
  }
  nodes_.push_back(std::move(node));
  return NodeId{nodes_.size() - 1};
}

const Program::Node& Program::node(NodeId id) const {
  if (id.index >= nodes_.size()) throw std::out_of_range("program node id out of range");
  return nodes_[id.index];
}

NodeId Program::input(std::string name, Shape shape) {
  (void)shape_size(shape);
  Node n{OpKind::kInput, {}, std::move(shape), std::move(name)};
  n.depends_on_input = true;
  n.payload = inputs_.size();
  const auto id = push(std::move(n));
  inputs_.push_back(id);
  return id;
}

NodeId Program::constant(Tensor value, std::string name) {
  Node n{OpKind::kConstant, {}, value.shape(), std::move(name)};
  n.payload = constants_.size();
  constants_.push_back(std::move(value));
  return push(std::move(n));
}

NodeId Program::affine(NodeId x, NodeId weight, NodeId bias) {
  const auto& ws = node(weight).shape;
  const auto& bs = node(bias).shape;
  if (ws.size() != 2) throw std::invalid_argument("affine: weight must be 2-D, got " + shape_to_string(ws));
  if (shape_size(node(x).shape) != ws[0]) {
    throw std::invalid_argument("affine: input of shape " + shape_to_string(node(x).shape) +
                                " does not match weight rows " + std::to_string(ws[0]));
  }
  if (shape_size(bs) != ws[1]) throw std::invalid_argument("affine: bias length does not match weight cols");
  return push(Node{OpKind::kAffine, {x.index, weight.index, bias.index}, Shape{ws[1]}});
}

NodeId Program::relu(NodeId x) { return push(Node{OpKind::kRelu, {x.index}, node(x).shape}); }

NodeId Program::mul(NodeId a, NodeId b) {
  if (node(a).shape != node(b).shape) {
    throw std::invalid_argument("mul: shape mismatch " + shape_to_string(node(a).shape) + " vs " +
                                shape_to_string(node(b).shape));
  }
  return push(Node{OpKind::kMul, {a.index, b.index}, node(a).shape});
}

NodeId Program::sum(NodeId x) { return push(Node{OpKind::kSum, {x.index}, Shape{1}}); }

NodeId Program::squared_norm(NodeId x) { return push(Node{OpKind::kSquaredNorm, {x.index}, Shape{1}}); }

NodeId Program::softmax(NodeId x) { return push(Node{OpKind::kSoftmax, {x.index}, node(x).shape}); }

NodeId Program::phase_image(NodeId phase, std::size_t height, std::size_t width, std::vector<double> magnitude) {
  const std::size_t half = width / 2 + 1;
  if (shape_size(node(phase).shape) != height * half) {
    throw std::invalid_argument("phase_image: phase holds " + std::to_string(shape_size(node(phase).shape)) +
                                " values, half-plane layout needs " + std::to_string(height * half));
  }
  if (magnitude.size() != height * half) throw std::invalid_argument("phase_image: magnitude layout mismatch");
  Node n{OpKind::kPhaseImage, {phase.index}, Shape{height, width}};
  n.payload = magnitudes_.size();
  magnitudes_.push_back(std::move(magnitude));
  image_dims_.push_back(height);
  image_dims_.push_back(width);
  return push(std::move(n));
}

NodeId Program::select(NodeId x, std::size_t component) {
  if (component >= shape_size(node(x).shape)) throw std::out_of_range("select: component out of range");
  Node n{OpKind::kSelect, {x.index}, Shape{1}};
  n.payload = component;
  return push(std::move(n));
}

void Program::set_output(NodeId id) {
  (void)node(id);
  output_ = id;
}

NodeId Program::output() const {
  if (nodes_.empty()) throw std::logic_error("program has no nodes");
  return output_.value_or(NodeId{nodes_.size() - 1});
}

NodeId Program::find_input(const std::string& name) const {
  for (auto id : inputs_) {
    if (nodes_[id.index].name == name) return id;
  }
  throw std::invalid_argument("program has no input leaf named '" + name + "'");
}

const Shape& Program::shape_of(NodeId id) const { return node(id).shape; }

// Forward values for one evaluation, plus the reverse sweep.
class Tape {
 public:
  Tape(const Program& program, const Inputs& inputs) : program_(program), values_(program.nodes_.size()) {
    if (inputs.size() != program.inputs_.size()) {
      throw std::invalid_argument("program expects " + std::to_string(program.inputs_.size()) + " inputs, got " +
                                  std::to_string(inputs.size()));
    }
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const auto& leaf = program.nodes_[program.inputs_[k].index];
      const Tensor& bound = inputs[k].get();
      if (bound.shape() != leaf.shape) {
        throw std::invalid_argument("input leaf '" + leaf.name + "' expects shape " + shape_to_string(leaf.shape) +
                                    ", got " + shape_to_string(bound.shape()));
      }
    }
    inputs_ = &inputs;
    forward();
  }

  const Tensor& value(std::size_t i) const {
    const auto& n = program_.nodes_[i];
    if (n.kind == OpKind::kInput) return (*inputs_)[n.payload].get();
    if (n.kind == OpKind::kConstant) return program_.constants_[n.payload];
    return values_[i];
  }

  // Adjoints for every node reachable backward from `root`, seeded with `seed`.
  std::vector<Tensor> backward(std::size_t root, const Tensor& seed) const {
    std::vector<Tensor> adjoint(program_.nodes_.size());
    adjoint[root] = seed;
    for (std::size_t i = root + 1; i-- > 0;) {
      if (adjoint[i].empty()) continue;
      const auto& n = program_.nodes_[i];
      const Tensor& g = adjoint[i];
      auto accumulate = [&](std::size_t target, const Tensor& contribution) {
        if (!program_.nodes_[target].depends_on_input) return;
        if (adjoint[target].empty()) {
          adjoint[target] = contribution.reshaped(program_.nodes_[target].shape);
        } else {
          auto& acc = adjoint[target];
          for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += contribution[k];
        }
      };
      switch (n.kind) {
        case OpKind::kInput:
        case OpKind::kConstant:
          break;
        case OpKind::kAffine: {
          const Tensor& x = value(n.args[0]);
          const Tensor& w = value(n.args[1]);
          const std::size_t rows = w.shape()[0];
          const std::size_t cols = w.shape()[1];
          if (program_.nodes_[n.args[0]].depends_on_input) {
            Tensor gx({rows});
            for (std::size_t r = 0; r < rows; ++r) {
              double acc = 0.0;
              for (std::size_t c = 0; c < cols; ++c) acc += w[r * cols + c] * g[c];
              gx[r] = acc;
            }
            accumulate(n.args[0], gx);
          }
          if (program_.nodes_[n.args[1]].depends_on_input) {
            Tensor gw({rows, cols});
            for (std::size_t r = 0; r < rows; ++r) {
              for (std::size_t c = 0; c < cols; ++c) gw[r * cols + c] = x[r] * g[c];
            }
            accumulate(n.args[1], gw);
          }
          accumulate(n.args[2], g);
          break;
        }
        case OpKind::kRelu: {
          const Tensor& x = value(n.args[0]);
          Tensor gx(x.shape());
          for (std::size_t k = 0; k < x.size(); ++k) gx[k] = x[k] > 0.0 ? g[k] : 0.0;
          accumulate(n.args[0], gx);
          break;
        }
        case OpKind::kMul: {
          const Tensor& a = value(n.args[0]);
          const Tensor& b = value(n.args[1]);
          Tensor ga(a.shape());
          Tensor gb(b.shape());
          for (std::size_t k = 0; k < a.size(); ++k) {
            ga[k] = g[k] * b[k];
            gb[k] = g[k] * a[k];
          }
          accumulate(n.args[0], ga);
          accumulate(n.args[1], gb);
          break;
        }
        case OpKind::kSum: {
          accumulate(n.args[0], Tensor(program_.nodes_[n.args[0]].shape, g[0]));
          break;
        }
        case OpKind::kSquaredNorm: {
          const Tensor& x = value(n.args[0]);
          Tensor gx(x.shape());
          for (std::size_t k = 0; k < x.size(); ++k) gx[k] = 2.0 * x[k] * g[0];
          accumulate(n.args[0], gx);
          break;
        }
        case OpKind::kSoftmax: {
          const Tensor& s = values_[i];
          double inner = 0.0;
          for (std::size_t k = 0; k < s.size(); ++k) inner += g[k] * s[k];
          Tensor gx(s.shape());
          for (std::size_t k = 0; k < s.size(); ++k) gx[k] = s[k] * (g[k] - inner);
          accumulate(n.args[0], gx);
          break;
        }
        case OpKind::kPhaseImage: {
          const Tensor& phase = value(n.args[0]);
          const auto& magnitude = program_.magnitudes_[n.payload];
          const std::size_t height = program_.image_dims_[2 * n.payload];
          const std::size_t width = program_.image_dims_[2 * n.payload + 1];
          const Spectrum adj = irfft2_adjoint(g);
          const auto roles = half_plane_roles(height, width);
          Tensor gphase(phase.shape());
          for (std::size_t k = 0; k < phase.size(); ++k) {
            if (roles[k] != BinRole::kFree) continue;
            const double c = std::cos(phase[k]);
            const double s = std::sin(phase[k]);
            gphase[k] = magnitude[k] * (adj[k].imag() * c - adj[k].real() * s);
          }
          // A mirror bin holds conj(r e^{i phi}) of its source.
          for (std::size_t k = 0; k < phase.size(); ++k) {
            if (roles[k] != BinRole::kMirror) continue;
            const std::size_t src = mirror_source(k, height, width);
            const double c = std::cos(phase[src]);
            const double s = std::sin(phase[src]);
            gphase[src] -= magnitude[src] * (adj[k].real() * s + adj[k].imag() * c);
          }
          accumulate(n.args[0], gphase);
          break;
        }
        case OpKind::kSelect: {
          Tensor gx(program_.nodes_[n.args[0]].shape);
          gx[n.payload] = g[0];
          accumulate(n.args[0], gx);
          break;
        }
      }
    }
    return adjoint;
  }

 private:
  void forward() {
    for (std::size_t i = 0; i < program_.nodes_.size(); ++i) {
      const auto& n = program_.nodes_[i];
      switch (n.kind) {
        case OpKind::kInput:
        case OpKind::kConstant:
          break;
        case OpKind::kAffine: {
          Tensor out(n.shape);
          affine_forward(value(n.args[0]).values(), value(n.args[1]).values(), value(n.args[2]).values(),
                         out.values());
          values_[i] = std::move(out);
          break;
        }
        case OpKind::kRelu: {
          Tensor out = value(n.args[0]);
          for (auto& v : out.data()) v = v > 0.0 ? v : 0.0;
          values_[i] = std::move(out);
          break;
        }
        case OpKind::kMul: {
          Tensor out = value(n.args[0]);
          const Tensor& b = value(n.args[1]);
          for (std::size_t k = 0; k < out.size(); ++k) out[k] *= b[k];
          values_[i] = std::move(out);
          break;
        }
        case OpKind::kSum: {
          double acc = 0.0;
          for (double v : value(n.args[0]).values()) acc += v;
          values_[i] = Tensor({1}, acc);
          break;
        }
        case OpKind::kSquaredNorm:
          values_[i] = Tensor({1}, squared_norm(value(n.args[0]).values()));
          break;
        case OpKind::kSoftmax: {
          Tensor out = value(n.args[0]);
          const double peak = *std::max_element(out.data().begin(), out.data().end());
          double total = 0.0;
          for (auto& v : out.data()) {
            v = std::exp(v - peak);
            total += v;
          }
          for (auto& v : out.data()) v /= total;
          values_[i] = std::move(out);
          break;
        }
        case OpKind::kPhaseImage: {
          const std::size_t height = program_.image_dims_[2 * n.payload];
          const std::size_t width = program_.image_dims_[2 * n.payload + 1];
          values_[i] = irfft2(hermitian_from_polar(height, width, program_.magnitudes_[n.payload],
                                                   value(n.args[0]).values()));
          break;
        }
        case OpKind::kSelect:
          values_[i] = Tensor({1}, value(n.args[0])[n.payload]);
          break;
      }
    }
  }

  const Program& program_;
  const Inputs* inputs_ = nullptr;
  std::vector<Tensor> values_;
};

namespace {

void require_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) throw std::domain_error(std::string(what) + " produced a non-finite value");
}

std::size_t leaf_slot(const Program& program, NodeId wrt) {
  const auto& leaves = program.inputs();
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    if (leaves[k] == wrt) return k;
  }
  throw std::invalid_argument("gradient target is not an input leaf");
}

}  // namespace

Tensor evaluate(const Program& program, const Inputs& inputs) {
  Tape tape(program, inputs);
  Tensor out = tape.value(program.output().index);
  require_finite(out, "evaluate");
  return out;
}

Tensor gradient(const Program& program, const Inputs& inputs, NodeId wrt, std::optional<std::size_t> component) {
  const std::size_t slot = leaf_slot(program, wrt);
  Tape tape(program, inputs);
  const auto root = program.output().index;
  const std::size_t out_size = tape.value(root).size();
  Tensor seed(program.shape_of(program.output()));
  if (component) {
    if (*component >= out_size) throw std::out_of_range("gradient: selected component out of range");
    seed[*component] = 1.0;
  } else if (out_size != 1) {
    throw std::invalid_argument("gradient: program output has " + std::to_string(out_size) +
                                " components; select one");
  } else {
    seed[0] = 1.0;
  }
  auto adjoint = tape.backward(root, seed);
  Tensor out = adjoint[program.inputs()[slot].index];
  if (out.empty()) out = Tensor(program.shape_of(wrt), 0.0);
  require_finite(out, "gradient");
  return out;
}

std::vector<Tensor> vjp(const Program& program, const Inputs& inputs, const Tensor& cotangent) {
  Tape tape(program, inputs);
  const auto root = program.output().index;
  if (cotangent.size() != tape.value(root).size()) throw std::invalid_argument("vjp: cotangent size mismatch");
  auto adjoint = tape.backward(root, cotangent.reshaped(program.shape_of(program.output())));
  std::vector<Tensor> out;
  out.reserve(program.inputs().size());
  for (auto leaf : program.inputs()) {
    Tensor g = adjoint[leaf.index];
    if (g.empty()) g = Tensor(program.shape_of(leaf), 0.0);
    out.push_back(std::move(g));
  }
  return out;
}

Tensor central_difference_gradient(const Program& program, const Inputs& inputs, NodeId wrt, double step,
                                   std::optional<std::size_t> component) {
  if (!(step > 0.0)) throw std::invalid_argument("central_difference_gradient: step must be positive");
  const std::size_t slot = leaf_slot(program, wrt);
  Tensor probe = inputs[slot].get();
  Inputs bound = inputs;
  bound[slot] = std::cref(probe);
  auto scalar = [&]() {
    const Tensor out = evaluate(program, bound);
    if (component) return out[*component];
    if (out.size() != 1) throw std::invalid_argument("central_difference_gradient: non-scalar output");
    return out[0];
  };
  Tensor grad(probe.shape());
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double original = probe[k];
    probe[k] = original + step;
    const double plus = scalar();
    probe[k] = original - step;
    const double minus = scalar();
    probe[k] = original;
    grad[k] = (plus - minus) / (2.0 * step);
  }
  return grad;
}

double relative_error(std::span<const double> value, std::span<const double> reference, double floor) {
  double scale = floor;
  for (double v : reference) scale = std::max(scale, std::abs(v));
  return max_abs_diff(value, reference) / scale;
}

}  // namespace faithlab::ad
