#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>

#include "webcent/classify.hpp"
#include "webcent/error.hpp"

namespace webcent::classify {

namespace {

class Matrix {
 public:
  Matrix(std::size_t n, double fill) : n_(n), data_(n * n, fill) {}
  double& operator()(std::size_t i, std::size_t k) { return data_[i * n_ + k]; }
  double operator()(std::size_t i, std::size_t k) const { return data_[i * n_ + k]; }

 private:
  std::size_t n_;
  std::vector<double> data_;
};

double squared_distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double median(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return lower + (upper - lower) / 2.0;
}

// Index of the exemplar most similar to point i; ties go to the lower index.
std::size_t nearest_exemplar(const Matrix& s, std::size_t i, const std::vector<std::size_t>& exemplars) {
  std::size_t best = exemplars.front();
  for (std::size_t e : exemplars) {
    if (s(i, e) > s(i, best)) best = e;
  }
  return best;
}

// Final labelling: assign to nearest exemplar, re-centre each cluster on the
// member with the highest total similarity, then assign again.
ClusterResult finish(const Matrix& s, std::size_t n, std::vector<std::size_t> exemplars,
                     int iterations, bool converged) {
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = nearest_exemplar(s, i, exemplars);
  for (std::size_t e : exemplars) label[e] = e;

  std::vector<std::size_t> refined;
  for (std::size_t e : exemplars) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (label[i] == e) members.push_back(i);
    }
    std::size_t best = members.front();
    double best_sum = -std::numeric_limits<double>::infinity();
    for (std::size_t candidate : members) {
      double sum = 0.0;
      for (std::size_t i : members) {
        if (i != candidate) sum += s(i, candidate);
      }
      if (sum > best_sum) {
        best_sum = sum;
        best = candidate;
      }
    }
    refined.push_back(best);
  }
  std::sort(refined.begin(), refined.end());
  refined.erase(std::unique(refined.begin(), refined.end()), refined.end());

  ClusterResult result;
  result.exemplars = refined;
  result.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.labels[i] = nearest_exemplar(s, i, refined);
  for (std::size_t e : refined) result.labels[e] = e;
  result.iterations_run = iterations;
  result.converged = converged;
  return result;
}

}  // namespace

ClusterResult affinity_propagation(std::span<const Point2> points, const AffinityParams& params) {
  const std::size_t n = points.size();
  if (n < 2) throw InvalidArgument("affinity_propagation: need at least two points");
  if (!(params.damping >= 0.5 && params.damping < 1.0)) {
    throw InvalidArgument("affinity_propagation: damping must be in [0.5, 1)");
  }
  if (params.max_iter < 1 || params.convergence_iter < 1) {
    throw InvalidArgument("affinity_propagation: iteration counts must be positive");
  }

  Matrix similarity(n, 0.0);
  std::vector<double> off_diagonal;
  off_diagonal.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (i == k) continue;
      similarity(i, k) = -squared_distance(points[i], points[k]);
      off_diagonal.push_back(similarity(i, k));
    }
  }
  const double preference = params.preference.value_or(median(off_diagonal));
  for (std::size_t i = 0; i < n; ++i) similarity(i, i) = preference;

  // Degenerate input: message passing cannot break the symmetry, so decide
  // directly. A preference no better than joining someone else yields a
  // single cluster.
  const auto [lo, hi] = std::minmax_element(off_diagonal.begin(), off_diagonal.end());
  if (*lo == *hi) {
    std::vector<std::size_t> exemplars;
    if (preference <= *lo) {
      exemplars.push_back(0);
    } else {
      for (std::size_t i = 0; i < n; ++i) exemplars.push_back(i);
    }
    return finish(similarity, n, exemplars, 0, true);
  }

  // Tiny fixed-seed jitter breaks ties between equally good exemplars.
  Matrix s = similarity;
  std::mt19937_64 rng(0);
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  constexpr double kTiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
      s(i, k) += (kEps * s(i, k) + kTiny * 100.0) * unit;
    }
  }

  Matrix r(n, 0.0);
  Matrix a(n, 0.0);
  const double damping = params.damping;
  const auto window = static_cast<std::size_t>(params.convergence_iter);
  std::vector<std::vector<std::uint8_t>> history(window, std::vector<std::uint8_t>(n, 0));
  std::vector<double> column(n);

  int it = 0;
  bool stable = false;
  for (; it < params.max_iter; ++it) {
    // Responsibilities.
    for (std::size_t i = 0; i < n; ++i) {
      double first = -std::numeric_limits<double>::infinity();
      double second = first;
      std::size_t arg = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const double v = a(i, k) + s(i, k);
        if (v > first) {
          second = first;
          first = v;
          arg = k;
        } else if (v > second) {
          second = v;
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double fresh = s(i, k) - (k == arg ? second : first);
        r(i, k) = damping * r(i, k) + (1.0 - damping) * fresh;
      }
    }

    // Availabilities.
    for (std::size_t k = 0; k < n; ++k) {
      double positive_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        column[i] = i == k ? r(k, k) : std::max(r(i, k), 0.0);
        positive_sum += column[i];
      }
      for (std::size_t i = 0; i < n; ++i) {
        double fresh = positive_sum - column[i];
        if (i != k) fresh = std::min(fresh, 0.0);
        a(i, k) = damping * a(i, k) + (1.0 - damping) * fresh;
      }
    }

    auto& slot = history[static_cast<std::size_t>(it) % window];
    std::size_t exemplar_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      slot[i] = (a(i, i) + r(i, i)) > 0.0 ? 1 : 0;
      exemplar_count += slot[i];
    }
    if (static_cast<std::size_t>(it) + 1 >= window && exemplar_count > 0) {
      bool unchanged = true;
      for (std::size_t i = 0; i < n && unchanged; ++i) {
        for (std::size_t w = 1; w < window; ++w) {
          if (history[w][i] != history[0][i]) {
            unchanged = false;
            break;
          }
        }
      }
      if (unchanged) {
        stable = true;
        ++it;
        break;
      }
    }
  }

  std::vector<std::size_t> exemplars;
  for (std::size_t i = 0; i < n; ++i) {
    if (a(i, i) + r(i, i) > 0.0) exemplars.push_back(i);
  }
  if (exemplars.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (a(i, i) + r(i, i) > a(best, best) + r(best, best)) best = i;
    }
    exemplars.push_back(best);
    stable = false;
  }
  return finish(similarity, n, exemplars, it, stable);
}

}  // namespace webcent::classify
