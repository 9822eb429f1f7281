#include "webcent/emd.hpp"

#include <cmath>

#include "webcent/error.hpp"

namespace webcent::emd {

double emd_centralization(const ProviderDistribution& dist, const TransportOptions& options) {
  if (dist.empty()) throw InvalidArgument("empty distribution");
  const double total = static_cast<double>(dist.total());

  std::vector<double> observed;
  observed.reserve(dist.providers());
  for (const auto& [provider, count] : dist.counts()) observed.push_back(static_cast<double>(count));

  // Height difference between a provider's pile and a unit reference bucket,
  // normalized by the number of sites.
  const GroundDistance distance([&observed, total](std::size_t i, std::size_t) {
    return (observed[i] - 1.0) / total;
  });
  const FlowPlan plan = solve_transport(DiscreteDistribution(observed),
                                        decentralized_reference(dist.total()), distance, options);
  return plan.total_work / total;
}

double emd_between(const DiscreteDistribution& a, const DiscreteDistribution& b,
                   const GroundDistance& distance, const TransportOptions& options) {
  const double ta = a.total();
  const double tb = b.total();

  // Integral inputs stay integral by cross-scaling each side with the other's
  // total; both sides then carry ta * tb.
  if (a.integral() && b.integral() && ta * tb <= 1e15) {
    std::vector<double> sa, sb;
    for (double m : a.masses()) sa.push_back(std::round(m) * tb);
    for (double m : b.masses()) sb.push_back(std::round(m) * ta);
    const FlowPlan plan = solve_transport(DiscreteDistribution(std::move(sa)),
                                          DiscreteDistribution(std::move(sb)), distance, options);
    return plan.total_work / (ta * tb);
  }

  std::vector<double> na, nb;
  for (double m : a.masses()) na.push_back(m / ta);
  for (double m : b.masses()) nb.push_back(m / tb);
  return solve_transport(DiscreteDistribution(std::move(na)), DiscreteDistribution(std::move(nb)),
                         distance, options)
      .total_work;
}

}  // namespace webcent::emd
