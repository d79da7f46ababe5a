#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kslice/count.hpp"
#include "kslice/numeric.hpp"

namespace kslice {

enum class KernelKind { metropolis, hdx, modified, glauber, induced, swap, custom };

std::string_view kernel_kind_name(KernelKind kind);

struct KernelEntry {
  std::uint32_t col;
  double p;
};

using ExactRow = std::vector<std::pair<std::uint32_t, Rational>>;

/// Row-stochastic sparse transition matrix tagged with its stationary law.
/// Kernels built from exact rows keep the rationals alongside the doubles;
/// construction verifies stochasticity, detailed balance and stationarity
/// exactly and throws std::logic_error on any violation.
class Kernel {
 public:
  /// Rows need not be sorted or merged; the diagonal is whatever the rows say.
  static Kernel from_exact(KernelKind kind, std::vector<Mask> labels, std::vector<ExactRow> rows,
                           std::vector<Rational> stationary);

  /// Floating-point kernel; checks rows and balance to `tol`.
  static Kernel from_dense(const Eigen::MatrixXd& p, std::vector<double> stationary,
                           KernelKind kind = KernelKind::custom, double tol = 1e-12);

  std::size_t size() const { return stationary_.size(); }
  std::size_t nonzeros() const { return entries_.size(); }
  KernelKind kind() const { return kind_; }

  std::span<const KernelEntry> row(std::size_t i) const {
    return {entries_.data() + row_ptr_[i], entries_.data() + row_ptr_[i + 1]};
  }
  /// P(i, j), zero when absent.
  double at(std::size_t i, std::size_t j) const;

  const std::vector<double>& stationary() const { return stationary_; }
  /// State labels (vertex masks) when the kernel lives on sets; may be empty.
  const std::vector<Mask>& labels() const { return labels_; }

  bool has_exact() const { return !exact_.empty(); }
  /// Rationals parallel to row(i).
  std::span<const Rational> exact_row(std::size_t i) const {
    return {exact_.data() + row_ptr_[i], exact_.data() + row_ptr_[i + 1]};
  }
  const std::vector<Rational>& exact_stationary() const { return exact_stationary_; }

  Eigen::MatrixXd dense() const;
  /// (P f)(x) = sum_y P(x, y) f(y).
  std::vector<double> apply(std::span<const double> f) const;
  /// (nu P)(y) = sum_x nu(x) P(x, y).
  std::vector<double> apply_left(std::span<const double> nu) const;

 private:
  KernelKind kind_ = KernelKind::custom;
  std::vector<Mask> labels_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<KernelEntry> entries_;
  std::vector<double> stationary_;
  std::vector<Rational> exact_;
  std::vector<Rational> exact_stationary_;
};

struct KernelCheck {
  double max_row_error = 0;      ///< max |sum_y P(x, y) - 1|
  double max_balance_error = 0;  ///< max |pi(x) P(x, y) - pi(y) P(y, x)|
  double max_stationarity_error = 0;
  bool exact_checked = false;
  bool exact_ok = false;  ///< rows, balance and stationarity hold as rationals
};

/// Recomputes every invariant from the stored entries.
KernelCheck check_kernel(const Kernel& kernel);

enum class WalkVariant { metropolis, hdx, modified };

std::string_view variant_name(WalkVariant v);
WalkVariant parse_variant(std::string_view name);
KernelKind kernel_kind(WalkVariant v);

constexpr std::size_t kDefaultKernelStateCap = 10000;

/// Exact transition law of one down-up step on I_k(G) with uniform stationary law.
Kernel build_kernel(const SliceSpace& space, WalkVariant variant,
                    std::size_t max_states = kDefaultKernelStateCap);

/// Heat-bath Glauber dynamics for the hard-core model on all independent sets
/// of g (n <= 30) at rational activity.
Kernel build_glauber_kernel(const Graph& g, const Rational& lambda,
                            std::size_t max_states = kDefaultKernelStateCap);

}  // namespace kslice
