#include "awgent/analysis.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include "awgent/entangled_state.hpp"
#include "awgent/errors.hpp"

namespace awgent {

AxisBinning::AxisBinning(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw Error(ErrorCode::parameter, "axis binning needs at least one bin");
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (!(edges_[k] > edges_[k - 1])) throw Error(ErrorCode::parameter, "bin edges must increase");
  }
  if (std::abs(edges_.back() - edges_.front() - kTwoPi) > 1e-9) {
    throw Error(ErrorCode::parameter, "bin edges must span exactly one period");
  }
}

AxisBinning AxisBinning::from_retrieval(const RetrievalSpec& spec) {
  const double half = 0.5 * spec.coarse_bin;
  const double fine_span = kPi - spec.coarse_bin;
  if (!(spec.fine_bin > 0.0) || !(fine_span > 0.0)) {
    throw Error(ErrorCode::parameter, "bin sizes must satisfy 0 < fine and coarse < 180 deg");
  }
  const int n_fine = std::max(1, static_cast<int>(std::lround(fine_span / spec.fine_bin)));
  std::vector<double> edges;
  for (int half_period = 0; half_period < 2; ++half_period) {
    const double start = -half + half_period * kPi;
    edges.push_back(start);
    for (int k = 0; k < n_fine; ++k) {
      edges.push_back(start + spec.coarse_bin + fine_span * (k + 0.0) / n_fine);
    }
  }
  edges.push_back(-half + kTwoPi);
  return AxisBinning(std::move(edges));
}

AxisBinning AxisBinning::uniform(int count) {
  if (count < 1) throw Error(ErrorCode::parameter, "bin count must be >= 1");
  std::vector<double> edges(static_cast<std::size_t>(count) + 1);
  for (int k = 0; k <= count; ++k) edges[k] = kTwoPi * k / count;
  return AxisBinning(std::move(edges));
}

int AxisBinning::index_of(double phi) const {
  const double x = edges_.front() + wrap_phase(phi - edges_.front());
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
  const int k = static_cast<int>(it - edges_.begin()) - 1;
  return std::clamp(k, 0, size() - 1);
}

double AxisBinning::center(int k) const { return wrap_phase(0.5 * (edges_[k] + edges_[k + 1])); }

CoincidenceMap::CoincidenceMap(AxisBinning axis_A, AxisBinning axis_B, double gate_rate)
    : axis_A_(std::move(axis_A)), axis_B_(std::move(axis_B)), gate_rate_(gate_rate) {
  if (!(gate_rate_ > 0.0)) throw Error(ErrorCode::parameter, "gate rate must be positive");
  bins_.resize(static_cast<std::size_t>(axis_A_.size() * axis_B_.size()));
  for (int i = 0; i < axis_A_.size(); ++i) {
    for (int j = 0; j < axis_B_.size(); ++j) init_bin(i, j, 0.0);
  }
}

void CoincidenceMap::init_bin(int i, int j, double exposure_gates) {
  auto& b = at(i, j);
  b = CoincidenceBin{};
  b.exposure_gates = exposure_gates;
  b.phi_A = axis_A_.center(i);
  b.phi_B = axis_B_.center(j);
  b.sigma_phi_A = axis_A_.width(i) / std::sqrt(12.0);
  b.sigma_phi_B = axis_B_.width(j) / std::sqrt(12.0);
  b.mean_cos = std::cos(b.phi_A + b.phi_B);
  b.mean_sin = std::sin(b.phi_A + b.phi_B);
}

double CoincidenceMap::rate(int i, int j) const {
  const double t = exposure_seconds(i, j);
  return t > 0.0 ? at(i, j).counts / t : 0.0;
}

double CoincidenceMap::rate_sigma(int i, int j) const {
  const double t = exposure_seconds(i, j);
  return t > 0.0 ? at(i, j).sigma_count / t : 0.0;
}

std::int64_t CoincidenceMap::populated_bins() const {
  return std::count_if(bins_.begin(), bins_.end(),
                       [](const CoincidenceBin& b) { return b.exposure_gates > 0.0; });
}

double CoincidenceMap::total_counts() const {
  double s = 0.0;
  for (const auto& b : bins_) s += b.counts;
  return s;
}

CoincidenceMap bin_records(const RunResult& run, const AxisBinning& axis_A, const AxisBinning& axis_B) {
  if (!(run.gate_rate > 0.0) || run.gates_per_record <= 0) {
    throw Error(ErrorCode::config, "records lack gate rate / gates per record metadata");
  }
  CoincidenceMap map(axis_A, axis_B, run.gate_rate);
  const auto gates = static_cast<double>(run.gates_per_record);
  const int nB = axis_B.size();
  std::vector<double> offset_A(static_cast<std::size_t>(axis_A.size() * nB), 0.0);
  std::vector<double> offset_B(offset_A.size(), 0.0);
  std::vector<double> sum_cos(offset_A.size(), 0.0);
  std::vector<double> sum_sin(offset_A.size(), 0.0);
  for (const auto& r : run.records) {
    if (r.discarded) continue;
    const int i = axis_A.index_of(r.phi_A_est);
    const int j = axis_B.index_of(r.phi_B_est);
    auto& bin = map.at(i, j);
    bin.counts += static_cast<double>(r.coincidences);
    bin.accidentals += r.accidental_estimate;
    bin.exposure_gates += gates;
    bin.records += 1;
    const auto k = static_cast<std::size_t>(i * nB + j);
    offset_A[k] += phase_difference(r.phi_A_est, axis_A.center(i));
    offset_B[k] += phase_difference(r.phi_B_est, axis_B.center(j));
    sum_cos[k] += std::cos(r.phi_A_est + r.phi_B_est);
    sum_sin[k] += std::sin(r.phi_A_est + r.phi_B_est);
  }
  if (map.populated_bins() == 0) {
    throw Error(ErrorCode::no_data, "coincidence map is empty after discarding records");
  }
  for (int i = 0; i < axis_A.size(); ++i) {
    for (int j = 0; j < nB; ++j) {
      auto& bin = map.at(i, j);
      bin.raw_counts = bin.counts;
      bin.sigma_count = std::max(std::sqrt(bin.counts), 1.0);
      if (bin.records > 0) {
        const auto k = static_cast<std::size_t>(i * nB + j);
        const auto n = static_cast<double>(bin.records);
        bin.phi_A = wrap_phase(axis_A.center(i) + offset_A[k] / n);
        bin.phi_B = wrap_phase(axis_B.center(j) + offset_B[k] / n);
        bin.mean_cos = sum_cos[k] / n;
        bin.mean_sin = sum_sin[k] / n;
      }
    }
  }
  return map;
}

CoincidenceMap bin_records(const RunResult& run, const RetrievalSpec& spec) {
  const auto axis = AxisBinning::from_retrieval(spec);
  return bin_records(run, axis, axis);
}

CoincidenceMap subtract_accidentals(const CoincidenceMap& map) {
  CoincidenceMap out = map;
  for (int i = 0; i < out.axis_A().size(); ++i) {
    for (int j = 0; j < out.axis_B().size(); ++j) {
      auto& b = out.at(i, j);
      if (map.accidentals_subtracted()) continue;
      b.counts = std::max(0.0, b.raw_counts - b.accidentals);
      b.sigma_count = std::max(std::sqrt(b.raw_counts + b.accidentals), 1.0);
    }
  }
  out.set_accidentals_subtracted(true);
  return out;
}

namespace {

struct FitPoint {
  double psi;
  double cos_psi;
  double sin_psi;
  double y;            // rate
  double t;            // exposure seconds
  double data_var;     // count variance from the map (counts^2)
  double phase_var;    // sigma_A^2 + sigma_B^2
  double accidentals;  // counts
};

std::vector<FitPoint> points_from(const CoincidenceMap& map, int row) {
  std::vector<FitPoint> pts;
  const int i0 = row < 0 ? 0 : row;
  const int i1 = row < 0 ? map.axis_A().size() : row + 1;
  for (int i = i0; i < i1; ++i) {
    for (int j = 0; j < map.axis_B().size(); ++j) {
      if (!map.populated(i, j)) continue;
      const auto& b = map.at(i, j);
      const double t = map.exposure_seconds(i, j);
      pts.push_back({b.phi_A + b.phi_B, b.mean_cos, b.mean_sin, b.counts / t, t, b.sigma_count * b.sigma_count,
                     b.sigma_phi_A * b.sigma_phi_A + b.sigma_phi_B * b.sigma_phi_B, b.accidentals});
    }
  }
  return pts;
}

FitResult fit_points(const std::vector<FitPoint>& pts, bool subtracted, const FitOptions& opt) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd J(n, 3);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    J(k, 0) = 1.0;
    J(k, 1) = pts[k].cos_psi;
    J(k, 2) = pts[k].sin_psi;
    y(k) = pts[k].y;
  }
  auto weights = [&](const Eigen::Vector3d* p) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& q = pts[k];
      double count_var = q.data_var;
      double slope = 0.0;
      if (p != nullptr) {
        const double model = J.row(k).dot(*p);
        slope = -(*p)(1) * J(k, 2) + (*p)(2) * J(k, 1);
        if (opt.model_variance) {
          count_var = subtracted ? std::max(model * q.t + q.accidentals, 1.0) + q.accidentals
                                 : std::max(model * q.t, 1.0);
        }
      }
      w(k) = 1.0 / (count_var / (q.t * q.t) + slope * slope * q.phase_var);
    }
  };
  auto solve = [&]() -> Eigen::Vector3d {
    const Eigen::VectorXd sw = w.cwiseSqrt();
    const Eigen::MatrixXd A = sw.asDiagonal() * J;
    const Eigen::VectorXd rhs = sw.cwiseProduct(y);
    return A.colPivHouseholderQr().solve(rhs);
  };

  weights(nullptr);
  Eigen::Vector3d p = solve();
  int iterations = 1;
  bool converged = false;
  Eigen::Vector3d prev_step = Eigen::Vector3d::Zero();
  while (iterations < opt.max_iterations) {
    weights(&p);
    Eigen::Vector3d next = solve();
    ++iterations;
    const Eigen::Vector3d step = next - p;
    const double change = step.cwiseAbs().maxCoeff();
    if (change <= opt.tolerance * std::max(next.cwiseAbs().maxCoeff(), 1e-300)) {
      p = next;
      converged = true;
      break;
    }
    // Aitken extrapolation of the linearly converging reweighting map.
    const double denom = prev_step.squaredNorm();
    if (denom > 0.0) {
      const double r = step.dot(prev_step) / denom;
      if (std::abs(r) < 0.9) next += (r / (1.0 - r)) * step;
    }
    prev_step = step;
    p = next;
  }
  const double a = p(0), b = p(1), c = p(2);
  if (!converged) {
    throw Error(ErrorCode::fit,
                fmt::format("fringe fit did not converge in {} iterations (last iterate c0={:.6g}, "
                            "v={:.6g}, delta_phi={:.4f} deg)",
                            iterations, a, a != 0.0 ? std::hypot(b, c) / a : 0.0,
                            rad_to_deg(wrap_phase(std::atan2(c, -b)))));
  }

  const Eigen::MatrixXd JW = w.asDiagonal() * J;
  const Eigen::Matrix3d cov = (J.transpose() * JW).inverse();
  const Eigen::VectorXd resid = y - J * p;

  FitResult fit;
  fit.iterations = iterations;
  fit.accidentals_subtracted = subtracted;
  fit.chi2 = resid.cwiseProduct(resid).dot(w);
  fit.dof = static_cast<int>(n) - 3;
  const double r = std::hypot(b, c);
  fit.c0 = a;
  fit.c0_sigma = std::sqrt(std::max(cov(0, 0), 0.0));
  fit.v = a != 0.0 ? r / a : 0.0;
  fit.delta_phi = wrap_phase(std::atan2(c, -b));
  if (a != 0.0 && r > 0.0) {
    const Eigen::Vector3d gv(-r / (a * a), b / (a * r), c / (a * r));
    const Eigen::Vector3d gd(0.0, c / (r * r), -b / (r * r));
    fit.v_sigma = std::sqrt(std::max(gv.dot(cov * gv), 0.0));
    fit.delta_phi_sigma = std::sqrt(std::max(gd.dot(cov * gd), 0.0));
  }
  fit.v_out_of_range = !(fit.v >= 0.0 && fit.v <= 1.05);
  return fit;
}

}  // namespace

FitResult fit_fringe(const CoincidenceMap& map, const FitOptions& options) {
  const auto pts = points_from(map, -1);
  std::vector<double> psi;
  psi.reserve(pts.size());
  for (const auto& q : pts) psi.push_back(wrap_phase(q.psi));
  if (pts.size() < 4 || max_circular_gap(psi) > 0.5 * kPi) {
    throw Error(ErrorCode::insufficient_data,
                "coincidence map does not span a full period of phi_A + phi_B");
  }
  return fit_points(pts, map.accidentals_subtracted(), options);
}

SliceResult slice_fringe(const CoincidenceMap& map, double phi_A_deg, const FitOptions& options) {
  SliceResult out;
  out.row = map.axis_A().index_of(deg_to_rad(phi_A_deg));
  out.phi_A = map.axis_A().center(out.row);
  const auto pts = points_from(map, out.row);
  out.bins_used = static_cast<int>(pts.size());
  if (pts.size() < 6) {
    throw Error(ErrorCode::insufficient_data,
                fmt::format("slice at phi_A = {} deg has {} populated bins (need 6)", phi_A_deg,
                            pts.size()));
  }
  std::vector<double> psi;
  for (const auto& q : pts) psi.push_back(wrap_phase(q.psi));
  if (max_circular_gap(psi) >= kPi) {
    throw Error(ErrorCode::insufficient_data,
                fmt::format("slice at phi_A = {} deg does not constrain a sinusoid", phi_A_deg));
  }
  out.fit = fit_points(pts, map.accidentals_subtracted(), options);
  return out;
}

ChshResult chsh_scan(const CoincidenceMap& map, double min_counts) {
  const int nA = map.axis_A().size(), nB = map.axis_B().size();
  std::vector<int> conjA(nA), conjB(nB);
  for (int i = 0; i < nA; ++i) conjA[i] = map.axis_A().conjugate(i);
  for (int j = 0; j < nB; ++j) conjB[j] = map.axis_B().conjugate(j);

  auto available = [&](int i, int j) {
    return map.populated(i, j) && map.at(i, j).raw_counts >= min_counts;
  };
  std::vector<double> E(static_cast<std::size_t>(nA * nB), 0.0);
  std::vector<char> ok(E.size(), 0);
  std::vector<std::string> missing;
  for (int i = 0; i < nA; ++i) {
    for (int j = 0; j < nB; ++j) {
      if (!available(i, j)) continue;
      const int ci = conjA[i], cj = conjB[j];
      const bool all = available(ci, cj) && available(i, cj) && available(ci, j);
      const double pp = map.rate(i, j), mm = map.rate(ci, cj), pm = map.rate(i, cj),
                   mp = map.rate(ci, j);
      const double sum = pp + mm + pm + mp;
      if (all && sum > 0.0) {
        E[static_cast<std::size_t>(i * nB + j)] = (pp + mm - pm - mp) / sum;
        ok[static_cast<std::size_t>(i * nB + j)] = 1;
      } else if (missing.size() < 8) {
        missing.push_back(fmt::format("({:.1f},{:.1f})", rad_to_deg(map.axis_A().center(i)),
                                      rad_to_deg(map.axis_B().center(j))));
      }
    }
  }

  double best = -1.0;
  std::array<int, 4> arg{-1, -1, -1, -1};
  for (int a = 0; a < nA; ++a) {
    const double* Ea = &E[static_cast<std::size_t>(a * nB)];
    const char* oa = &ok[static_cast<std::size_t>(a * nB)];
    for (int ap = 0; ap < nA; ++ap) {
      const double* Eap = &E[static_cast<std::size_t>(ap * nB)];
      const char* oap = &ok[static_cast<std::size_t>(ap * nB)];
      for (int b = 0; b < nB; ++b) {
        if (!oa[b] || !oap[b]) continue;
        const double s1 = Ea[b] + Eap[b];
        for (int bp = 0; bp < nB; ++bp) {
          if (!oa[bp] || !oap[bp]) continue;
          const double s = std::abs(s1 - Ea[bp] + Eap[bp]);
          if (s > best) {
            best = s;
            arg = {a, ap, b, bp};
          }
        }
      }
    }
  }
  if (best < 0.0) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : " ") + m;
    throw Error(ErrorCode::coverage,
                fmt::format("no complete CHSH setting: conjugate bins missing for settings {}",
                            list.empty() ? "(map empty)" : list));
  }

  // Error propagation through the (up to) 16 bins involved.
  std::unordered_map<int, double> grad;
  auto add_E = [&](int i, int j, double sign) {
    const int ci = conjA[i], cj = conjB[j];
    const double e = E[static_cast<std::size_t>(i * nB + j)];
    const double sum = map.rate(i, j) + map.rate(ci, cj) + map.rate(i, cj) + map.rate(ci, j);
    grad[i * nB + j] += sign * (1.0 - e) / sum;
    grad[ci * nB + cj] += sign * (1.0 - e) / sum;
    grad[i * nB + cj] += sign * (-1.0 - e) / sum;
    grad[ci * nB + j] += sign * (-1.0 - e) / sum;
  };
  const auto [a, ap, b, bp] = arg;
  add_E(a, b, 1.0);
  add_E(a, bp, -1.0);
  add_E(ap, b, 1.0);
  add_E(ap, bp, 1.0);
  double var = 0.0;
  for (const auto& [k, g] : grad) {
    const double s = map.rate_sigma(k / nB, k % nB);
    var += g * g * s * s;
  }

  ChshResult out;
  out.s = best;
  out.s_sigma = std::sqrt(var);
  out.bins = arg;
  out.settings = {map.axis_A().center(a), map.axis_A().center(ap), map.axis_B().center(b),
                  map.axis_B().center(bp)};
  out.accidentals_subtracted = map.accidentals_subtracted();
  return out;
}

BellFlags bell_flags(const ChshResult& chsh, const FitResult& fit) {
  return {std::abs(chsh.s) - 2.0 > 2.0 * chsh.s_sigma, fit.v > 1.0 / std::sqrt(2.0)};
}

void write_map_csv(std::ostream& os, const CoincidenceMap& map) {
  os << "phi_a_deg,phi_b_deg,rate_hz,sigma\n";
  for (int i = 0; i < map.axis_A().size(); ++i) {
    for (int j = 0; j < map.axis_B().size(); ++j) {
      if (!map.populated(i, j)) continue;
      fmt::print(os, "{:.4f},{:.4f},{:.9g},{:.9g}\n", rad_to_deg(map.axis_A().center(i)),
                 rad_to_deg(map.axis_B().center(j)), map.rate(i, j), map.rate_sigma(i, j));
    }
  }
}

}  // namespace awgent
