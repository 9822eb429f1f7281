#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace webcent::classify {

struct ProviderFeatures {
  std::string provider;
  double usage = 0.0;              // U, sum of per-country percentages
  double endemicity_ratio = 0.0;   // E_R in [0, 1]
  double max_country_usage = 0.0;  // peak per-country percentage
};

enum class ProviderClass { XL_GP, L_GP, L_GP_R, M_GP, S_GP, L_RP, S_RP, XS_RP };

inline constexpr std::array<ProviderClass, 8> kAllClasses = {
    ProviderClass::XL_GP, ProviderClass::L_GP, ProviderClass::L_GP_R, ProviderClass::M_GP,
    ProviderClass::S_GP,  ProviderClass::L_RP, ProviderClass::S_RP,   ProviderClass::XS_RP};

std::string_view to_string(ProviderClass cls);
std::optional<ProviderClass> parse_class(std::string_view name);

struct LongTailThresholds {
  double min_peak_percent = 0.1;  // must reach this share in some country
  double min_usage = 10.0;        // and this much total usage
};

bool is_long_tail(const ProviderFeatures& f, const LongTailThresholds& t);

struct LongTailSplit {
  std::vector<ProviderFeatures> kept;
  std::vector<ProviderFeatures> long_tail;
};

LongTailSplit filter_long_tail(std::span<const ProviderFeatures> features,
                               const LongTailThresholds& thresholds = {});

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

struct PcaResult {
  std::vector<Point2> points;           // projections, mean-centered
  std::array<double, 2> variances{};    // eigenvalues, descending
  std::array<Point2, 2> axes{};         // unit eigenvectors matching variances
};

// Projects points onto the principal axes of their sample covariance. Throws
// InvalidArgument with fewer than two points or when all points coincide.
PcaResult pca2(std::span<const Point2> points);

// Per-dimension (v - min) / (max - min). A dimension with zero range maps to
// 0.5. Throws InvalidArgument with fewer than two points.
std::vector<Point2> minmax_scale(std::span<const Point2> points);

struct AffinityParams {
  std::optional<double> preference;  // default: median off-diagonal similarity
  double damping = 0.9;
  int max_iter = 1000;
  int convergence_iter = 50;
};

struct ClusterResult {
  std::vector<std::size_t> labels;     // exemplar index for every point
  std::vector<std::size_t> exemplars;  // ascending point indices
  int iterations_run = 0;
  bool converged = false;
};

// Exemplar clustering by responsibility/availability message passing over
// similarities s(i, k) = -|x_i - x_k|^2. Deterministic for identical input.
ClusterResult affinity_propagation(std::span<const Point2> points, const AffinityParams& params = {});

enum class FeatureOrder { PcaThenScale, ScaleThenPca, ScaleOnly };

std::string_view to_string(FeatureOrder order);

// Thresholds mapping a cluster exemplar's (U, E_R) to a provider class.
struct ClassRules {
  LongTailThresholds long_tail;
  double regional_split = 0.5;          // E_R above this is regional
  double global_regional_floor = 0.35;  // large global with E_R above this is L_GP_R
  double xl_quantile = 0.99;            // usage quantiles of kept providers
  double l_quantile = 0.95;
  double m_quantile = 0.85;
  double s_quantile = 0.60;
  FeatureOrder order = FeatureOrder::PcaThenScale;
  AffinityParams affinity;

  // Throws InvalidArgument naming the offending keys when the thresholds
  // leave a region uncovered or make two classes overlap.
  void validate() const;

  // key = value lines; '#' starts a comment. Unknown keys are errors.
  static ClassRules parse(std::istream& in);
  static ClassRules load(const std::string& path);
};

struct ProviderClustering {
  std::vector<std::string> providers;           // clustered providers, sorted
  std::map<std::string, std::string> exemplar;  // provider -> its exemplar
  int iterations_run = 0;
  bool converged = true;
};

// Long-tail filter, feature transform, and affinity propagation over the kept
// providers. Providers are sorted by key first so input order is irrelevant.
ProviderClustering cluster_providers(std::span<const ProviderFeatures> features,
                                     const ClassRules& rules);

// Labels every cluster from its exemplar's features; providers outside the
// clustering must be long-tail and become XS_RP. The result covers every
// provider in `features`.
std::map<std::string, ProviderClass> assign_classes(const ProviderClustering& clusters,
                                                    std::span<const ProviderFeatures> features,
                                                    const ClassRules& rules);

// Linear-interpolation quantile of unsorted values; q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace webcent::classify
