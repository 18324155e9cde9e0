#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bvqa {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

/// Raised for any extent/rank disagreement between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

struct TensorImpl;
using ImplPtr = std::shared_ptr<TensorImpl>;

// One node of the autodiff tape. Leaves have no backward function.
struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until something is accumulated
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<ImplPtr> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(const TensorImpl&)> backward;

  bool is_leaf() const { return !backward; }
  // Returns the gradient buffer, allocating zeros on first use.
  std::vector<double>& grad_buffer();
};

}  // namespace detail

/// Global switch for tape recording on the current thread.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool on);
};

/// Disables tape recording for the lifetime of the guard.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Dense row-major double tensor with optional reverse-mode gradient tracking.
///
/// A Tensor is a handle: copies share storage and gradient. Values are
/// immutable after construction except through mutable_data(), which is
/// reserved for optimizer updates and requires exclusive access.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  std::span<double> mutable_data() const;
  double operator[](std::size_t flat_index) const { return data()[flat_index]; }
  double item() const;

  bool requires_grad() const;
  void set_requires_grad(bool on) const;
  bool has_grad() const;
  /// Accumulated gradient; empty when nothing has been accumulated yet.
  std::span<const double> grad() const;
  void zero_grad() const;

  /// Reverse-mode sweep from this scalar. Leaf gradients accumulate across
  /// calls; intermediate gradients are released after the sweep.
  void backward() const;

  /// Copy of the values with no tape history.
  Tensor detach() const;

  const detail::ImplPtr& impl() const { return impl_; }
  explicit Tensor(detail::ImplPtr impl) : impl_(std::move(impl)) {}

 private:
  const detail::TensorImpl& checked() const;
  detail::ImplPtr impl_;
};

/// Builds an op result. The backward closure is attached only when tape
/// recording is on and at least one parent tracks gradients.
Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                   std::vector<Tensor> parents,
                   std::function<void(const detail::TensorImpl&)> backward);

/// Gradient buffer of a parent for use inside backward closures, or nullptr
/// when that parent does not track gradients.
std::vector<double>* grad_sink(const Tensor& parent);

}  // namespace bvqa
