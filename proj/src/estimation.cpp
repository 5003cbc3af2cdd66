#include "quadsim/estimation.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "quadsim/key_value.hpp"

namespace quadsim {

double electrical_reaction_torque(double V, double I, double w) {
  if (!(w > 0.0)) throw std::domain_error("reaction torque undefined at zero speed");
  return V * I / w;
}

PendulumMoi moi_from_pendulum(double M, double g, double r, double T) {
  if (!(M > 0 && g > 0 && r > 0 && T > 0)) {
    throw std::invalid_argument("pendulum inputs must be positive");
  }
  double J_pivot = M * g * r * (T / (2.0 * M_PI)) * (T / (2.0 * M_PI));
  double J_com = J_pivot - M * r * r;
  if (!(J_com > 0.0)) {
    throw std::domain_error("period too short: implied COM inertia is non-positive");
  }
  return {J_pivot, J_com};
}

double period_from_swings(const std::vector<std::vector<double>>& trials) {
  if (trials.empty()) throw std::invalid_argument("no trials");
  double sum = 0.0;
  for (const auto& stamps : trials) {
    if (stamps.size() < 2) throw std::invalid_argument("trial needs >= 2 timestamps");
    for (size_t i = 1; i < stamps.size(); ++i) {
      if (!(stamps[i] > stamps[i - 1])) {
        throw std::invalid_argument("swing timestamps must be strictly increasing");
      }
    }
    sum += (stamps.back() - stamps.front()) / static_cast<double>(stamps.size() - 1);
  }
  return sum / static_cast<double>(trials.size());
}

double average_propeller_moi(const std::vector<double>& per_unit_moi) {
  if (per_unit_moi.empty()) throw std::invalid_argument("no propeller MOI values");
  return std::accumulate(per_unit_moi.begin(), per_unit_moi.end(), 0.0) /
         static_cast<double>(per_unit_moi.size());
}

namespace {

// Simple linear regression y = a x + b. Throws on a rank-deficient design
// (fewer than two distinct abscissae).
std::pair<double, double> linear_fit(const std::vector<double>& x,
                                     const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(x.size());
  bool distinct = false;
  for (size_t i = 1; i < x.size(); ++i) {
    if (x[i] != x[0]) distinct = true;
  }
  if (n < 2 || !distinct) throw std::invalid_argument("rank-deficient fit design");
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = x[i];
    A(i, 1) = 1.0;
    b(i) = y[i];
  }
  Eigen::Vector2d sol = A.colPivHouseholderQr().solve(b);
  return {sol(0), sol(1)};
}

}  // namespace

ThrustPwmFit fit_thrust_pwm(const std::vector<BenchSample>& samples) {
  std::vector<double> P, sqrt_f;
  for (const auto& s : samples) {
    if (s.f > 0.0) {
      P.push_back(s.P);
      sqrt_f.push_back(std::sqrt(s.f));
    }
  }
  if (P.size() < 3) throw std::invalid_argument("fit_thrust_pwm needs >= 3 usable samples");
  auto [a, b] = linear_fit(P, sqrt_f);
  if (!(a > 0.0)) throw std::runtime_error("fit_thrust_pwm: non-positive fitted slope");
  ThrustPwmFit fit;
  fit.h1 = a * a;
  fit.h2 = -b / a;
  double sum_sq = 0.0;
  for (size_t i = 0; i < P.size(); ++i) {
    double d = P[i] - fit.h2;
    double pred = d > 0.0 ? fit.h1 * d * d : 0.0;
    double res = sqrt_f[i] * sqrt_f[i] - pred;
    sum_sq += res * res;
    fit.residuals.max_abs = std::max(fit.residuals.max_abs, std::abs(res));
  }
  fit.residuals.rms = std::sqrt(sum_sq / static_cast<double>(P.size()));
  return fit;
}

double fit_thrust_omega(const std::vector<BenchSample>& samples) {
  double num = 0.0, den = 0.0;
  int usable = 0;
  for (const auto& s : samples) {
    if (s.w > 0.0) {
      double w2 = s.w * s.w;
      num += w2 * s.f;
      den += w2 * w2;
      ++usable;
    }
  }
  if (usable < 1 || den == 0.0) throw std::invalid_argument("fit_thrust_omega: no usable samples");
  return num / den;
}

TorqueThrustFit fit_torque_thrust(const std::vector<BenchSample>& samples) {
  std::vector<double> f, tau;
  for (const auto& s : samples) {
    if (s.w > 0.0 && s.f > 0.0) {
      f.push_back(s.f);
      tau.push_back(electrical_reaction_torque(s.V, s.I, s.w));
    }
  }
  if (f.size() < 2) throw std::invalid_argument("fit_torque_thrust needs >= 2 usable samples");
  auto [g1, g2] = linear_fit(f, tau);
  return {g1, g2};
}

DragFit fit_drag_coefficients(const std::vector<YawSteadyState>& points) {
  std::vector<double> r2, tau;
  for (const auto& pt : points) {
    if (pt.r_ss != 0.0) {
      r2.push_back(pt.r_ss * pt.r_ss);
      tau.push_back(std::abs(pt.tau_applied));
    }
  }
  if (r2.size() < 2) throw std::invalid_argument("fit_drag_coefficients needs >= 2 points");
  auto [gamma1, gamma2] = linear_fit(r2, tau);
  DragFit fit{gamma1, gamma2, false};
  if (fit.gamma2 < 0.0) {
    fit.gamma2 = 0.0;
    fit.gamma2_clamped = true;
  }
  return fit;
}

LoopTiming average_loop_time(double t0, double T1, double T2) {
  if (!(t0 > 0 && T1 > 0 && T2 >= 0)) {
    throw std::invalid_argument("timing inputs must be positive");
  }
  if (T1 + T2 >= t0) throw std::domain_error("interrupt starvation: T1 + T2 >= t0");
  double period = (t0 * T1 + (T1 + T2) * (T1 + T2)) / (t0 + T1 + T2);
  return {period, 1.0 / period};
}

namespace {

std::vector<std::vector<double>> read_csv(const std::string& path,
                                          const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
  if (trim(line) != expected_header) {
    throw std::runtime_error("CSV header mismatch in " + path + ": expected '" +
                             expected_header + "', got '" + trim(line) + "'");
  }
  std::vector<std::vector<double>> rows;
  size_t ncols = split_csv_row(expected_header).size();
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_csv_row(line);
    if (fields.size() != ncols) {
      throw std::runtime_error(path + " line " + std::to_string(lineno) +
                               ": expected " + std::to_string(ncols) + " columns");
    }
    std::vector<double> row;
    for (const auto& fstr : fields) row.push_back(std::stod(fstr));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<BenchSample> load_bench_csv(const std::string& path) {
  std::vector<BenchSample> out;
  for (const auto& row : read_csv(path, "P,f,w,V,I")) {
    out.push_back({row[0], row[1], row[2], row[3], row[4]});
  }
  return out;
}

std::vector<YawSteadyState> load_yaw_csv(const std::string& path) {
  std::vector<YawSteadyState> out;
  for (const auto& row : read_csv(path, "tau,r")) {
    out.push_back({row[0], row[1]});
  }
  return out;
}

}  // namespace quadsim
