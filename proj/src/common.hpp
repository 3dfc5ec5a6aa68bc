#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ebem {

using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

inline constexpr double PI = 3.14159265358979323846;

// +90 degree rotation; maps the outward normal to the tangent.
inline Vector2d rot90(const Vector2d& v) { return Vector2d(-v[1], v[0]); }

struct Material {
  double rho = 1.0;
  double cP = 1.0;
  double cS = 0.5;
  double mu() const { return rho * cS * cS; }
  double lambda() const { return rho * (cP * cP - 2.0 * cS * cS); }
  void validate() const {
    if (!(cP > cS && cS > 0.0)) throw std::invalid_argument("material: need cP > cS > 0");
    if (!(rho > 0.0)) throw std::invalid_argument("material: need rho > 0");
  }
};

struct TimeGrid {
  double T = 1.0;
  int nSteps = 1;
  double dt() const { return T / nSteps; }
  double t(int l) const { return T * l / nSteps; }
  void validate() const {
    if (nSteps < 1) throw std::invalid_argument("time grid: need nSteps >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("time grid: need T > 0");
  }
};

// Error categories, mirrored by the public C header.
namespace errc {
inline constexpr int ok = 0;
inline constexpr int config = 1;
inline constexpr int geometry = 2;
inline constexpr int assembly = 3;
inline constexpr int factorization = 4;
inline constexpr int uzawa = 5;
inline constexpr int io = 6;
inline constexpr int internal = 7;
}  // namespace errc

struct EbemError : std::runtime_error {
  int category;  // matches ebem.h error codes
  EbemError(int cat, const std::string& msg) : std::runtime_error(msg), category(cat) {}
};

}  // namespace ebem
