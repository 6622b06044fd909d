#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "chermnykh/model.hpp"

namespace chermnykh::testing {

inline ModelInputs classical(double mu) {
  ModelInputs in;
  in.mu = mu;
  return in;
}

inline SystemParams classical_system(double mu) { return build_system(classical(mu)); }

/// Central-difference gradient of Omega, independent of the analytic partials.
inline Gradient fd_gradient(double x, double y, const SystemParams& p, double h = 1e-6) {
  return {(effective_potential(x + h, y, p) - effective_potential(x - h, y, p)) / (2 * h),
          (effective_potential(x, y + h, p) - effective_potential(x, y - h, p)) / (2 * h)};
}

/// Central differences of the analytic gradient.
inline Hessian fd_hessian(double x, double y, const SystemParams& p, double h = 1e-5) {
  const Gradient xp = potential_gradient(x + h, y, p);
  const Gradient xm = potential_gradient(x - h, y, p);
  const Gradient yp = potential_gradient(x, y + h, p);
  const Gradient ym = potential_gradient(x, y - h, p);
  return {(xp.x - xm.x) / (2 * h), 0.25 * ((xp.y - xm.y) + (yp.x - ym.x)) / h, (yp.y - ym.y) / (2 * h)};
}

inline double rel_err(double a, double b, double floor = 1.0) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

/// Per-test scratch directory, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("chermnykh_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace chermnykh::testing
