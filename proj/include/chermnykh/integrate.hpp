#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "chermnykh/model.hpp"

namespace chermnykh {

struct IntegrateOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  /// Output stride in time. Zero records every accepted step.
  double sample_interval = 0.0;
  /// Integration stops once either primary is closer than this.
  double guard = 1e-6;
  std::size_t max_steps = 5'000'000;
};

enum class TrajectoryStatus { Completed, SingularityEncountered, StepUnderflow };
std::string_view to_string(TrajectoryStatus s) noexcept;

struct TrajectorySample {
  double t = 0.0;
  VelocityState state;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double jacobi_drift = 0.0;  // max |C(t) - C(0)| over every accepted step
  StepStats steps;
  TrajectoryStatus status = TrajectoryStatus::Completed;
  std::optional<double> event_time;  // set when the run terminated early
};

/// Propagates the planar equations of motion with the Dormand-Prince 8(5,3) pair.
/// Sample times are hit exactly by shortening the step that would cross them.
Trajectory integrate_orbit(const VelocityState& start, double t_end, const SystemParams& p,
                           const IntegrateOptions& opts = {});

struct DriftReport {
  double max_drift = 0.0;
  std::vector<double> series;  // C(t_i) - C(t_0)
};

DriftReport drift_report(const Trajectory& traj, const SystemParams& p);

}  // namespace chermnykh
