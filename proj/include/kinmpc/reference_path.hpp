#pragma once

#include <cstddef>
#include <vector>

namespace kinmpc {

struct PathSample
{
  double t{0};
  double x{0};
  double y{0};
};

/// Time-indexed reference samples, one per control interval.
struct ReferencePath
{
  std::vector<PathSample> samples;
  double Ts{0};               ///< sampling interval the samples were generated for [s]
  double spacing{0};          ///< nominal distance between consecutive samples [m]
  double initial_heading{0};  ///< path tangent at the first sample [rad]

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  const PathSample & operator[](std::size_t k) const { return samples[k]; }

  /// Sample k, or the last sample when k runs past the end.
  const PathSample & clamped(std::size_t k) const
  {
    return samples[k < samples.size() ? k : samples.size() - 1];
  }

  /// Throws std::invalid_argument unless non-empty, finite, with strictly increasing t.
  void validate() const;
};

}  // namespace kinmpc
