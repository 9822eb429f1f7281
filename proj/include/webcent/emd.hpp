#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "webcent/metrics.hpp"

namespace webcent::emd {

// Non-negative bucket masses, at least one of them positive.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  explicit DiscreteDistribution(std::vector<double> masses);

  const std::vector<double>& masses() const { return masses_; }
  std::size_t size() const { return masses_.size(); }
  double total() const;
  // True when every mass is an integer (to within 1e-9).
  bool integral() const;

 private:
  std::vector<double> masses_;
};

// d(i, j) >= 0 between bucket i of the source and bucket j of the target.
class GroundDistance {
 public:
  using Fn = std::function<double(std::size_t, std::size_t)>;

  explicit GroundDistance(Fn fn) : fn_(std::move(fn)) {}

  static GroundDistance constant(double value);
  static GroundDistance from_matrix(std::vector<std::vector<double>> matrix);

  double operator()(std::size_t i, std::size_t j) const { return fn_(i, j); }
  // d'(i, j) = d(j, i).
  GroundDistance transposed() const;

 private:
  Fn fn_;
};

struct Flow {
  std::size_t from = 0;
  std::size_t to = 0;
  double amount = 0.0;
};

struct FlowPlan {
  std::vector<Flow> flows;  // only positive flows, ordered by (from, to)
  double total_work = 0.0;  // sum of amount * d(from, to)
};

struct TransportOptions {
  // Refuse instances with more than this many source x target cells.
  std::size_t max_cells = 250'000;
  // Costs are rounded onto an integer lattice with this resolution.
  double cost_scale = 1e9;
  // Non-integral masses are rounded onto a lattice with this resolution.
  double mass_scale = 1e6;
};

// C unit buckets: every website on its own provider.
DiscreteDistribution decentralized_reference(std::uint64_t sites);

// Exact minimum-work transportation plan from `source` to `target`. Masses
// must balance to within 1e-9; throws InvalidArgument("unbalanced problem")
// otherwise and ("instance too large for exact oracle") above max_cells.
// Integral masses are solved exactly; other masses on the mass lattice.
FlowPlan solve_transport(const DiscreteDistribution& source, const DiscreteDistribution& target,
                         const GroundDistance& distance, const TransportOptions& options = {});

// Fast path for costs that depend on the source bucket only. Any feasible
// plan is then optimal, so buckets are filled greedily in index order.
FlowPlan solve_transport_row_constant(const DiscreteDistribution& source,
                                      const DiscreteDistribution& target,
                                      std::span<const double> row_cost);

// Normalized minimal work to flatten `dist` into the decentralized reference
// with d(i, j) = (a_i - 1) / C. Solved with the generic transportation solver.
double emd_centralization(const ProviderDistribution& dist, const TransportOptions& options = {});

// Normalized minimal work between two distributions after scaling both to
// unit mass.
double emd_between(const DiscreteDistribution& a, const DiscreteDistribution& b,
                   const GroundDistance& distance, const TransportOptions& options = {});

}  // namespace webcent::emd
