#include "s3kf/association.hpp"

#include <algorithm>
#include <cmath>

#include "s3kf/errors.hpp"

namespace s3kf {

AngularBox angular_box(const UnitBearing& center, double aspect, double box_h_px,
                       double img_h) {
  const double gain = angular_gain(img_h);
  AngularBox box;
  box.center = center;
  box.height = box_h_px / gain;
  box.width = aspect * box_h_px / gain;
  return box;
}

double spherical_iou(const AngularBox& a, const AngularBox& b) {
  const Eigen::Vector3d mid_raw = a.center.vec() + b.center.vec();
  if (mid_raw.norm() < 1e-9) {
    return 0.0;  // antipodal centers
  }
  const UnitBearing mid(mid_raw);
  const TangentBasis basis = make_tangent_basis(mid);

  TangentCoords ca, cb;
  try {
    ca = log_map(mid, basis, a.center);
    cb = log_map(mid, basis, b.center);
  } catch (const AntipodalError&) {
    return 0.0;
  }

  const double ix = std::min(ca.x() + 0.5 * a.width, cb.x() + 0.5 * b.width) -
                    std::max(ca.x() - 0.5 * a.width, cb.x() - 0.5 * b.width);
  const double iy = std::min(ca.y() + 0.5 * a.height, cb.y() + 0.5 * b.height) -
                    std::max(ca.y() - 0.5 * a.height, cb.y() - 0.5 * b.height);
  if (ix <= 0.0 || iy <= 0.0) {
    return 0.0;
  }
  const double inter = ix * iy;
  const double uni = a.width * a.height + b.width * b.height - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

CostMatrix build_cost_matrix(const std::vector<TrackHypothesis>& tracks,
                             const std::vector<CameraDetection>& detections,
                             const AssociationConfig& cfg,
                             const MeasurementConfig& mcfg) {
  const auto nt = static_cast<Eigen::Index>(tracks.size());
  const auto nd = static_cast<Eigen::Index>(detections.size());
  CostMatrix cm;
  cm.cost = Eigen::MatrixXd::Constant(nt, nd, std::numeric_limits<double>::infinity());
  cm.feasible.setConstant(nt, nd, false);

  for (Eigen::Index i = 0; i < nt; ++i) {
    const TrackHypothesis& trk = tracks[static_cast<size_t>(i)];
    const UnitBearing trk_bearing = trk.bearing();
    const AngularBox trk_box =
        angular_box(trk_bearing, trk.aspect(), trk.box_h(), mcfg.img_h);
    for (Eigen::Index j = 0; j < nd; ++j) {
      const CameraDetection& det = detections[static_cast<size_t>(j)];
      MeasurementPacket pkt;
      try {
        pkt = image_measurement(det, trk, mcfg);
      } catch (const Error&) {
        continue;  // antipodal or degenerate box: leave infeasible
      }
      const double d2 = mahalanobis_sq(pkt, trk);
      if (d2 > cfg.chi2_img) {
        continue;
      }
      const AngularBox det_box =
          angular_box(det.bearing, det.aspect_det, det.box_h_det, mcfg.img_h);
      const double iou = spherical_iou(trk_box, det_box);
      const double depth_gap = std::abs(trk.depth() - pkt.z[3]);
      cm.cost(i, j) = cfg.lambda_maha * d2 / cfg.chi2_img +
                      cfg.lambda_iou * (1.0 - iou) +
                      cfg.lambda_depth * depth_gap / cfg.sigma_d_gate;
      cm.feasible(i, j) = true;
    }
  }
  return cm;
}

namespace {

// Cost in a lexicographically ordered group: `penalty` counts dummy edges
// (unmatched rows/columns), `value` accumulates real cost. Keeping the two
// parts separate makes "maximize matches, then minimize cost" exact without
// big-M float contamination.
struct LexCost {
  int64_t penalty = 0;
  double value = 0.0;

  LexCost operator+(const LexCost& o) const { return {penalty + o.penalty, value + o.value}; }
  LexCost operator-(const LexCost& o) const { return {penalty - o.penalty, value - o.value}; }
  bool operator<(const LexCost& o) const {
    if (penalty != o.penalty) return penalty < o.penalty;
    return value < o.value;
  }
};

// Large enough to dominate any real matching (penalties are O(n)), small
// enough that sums of several sentinels stay far from int64 overflow.
constexpr LexCost kLexInf{int64_t{1} << 30, 0.0};

// Kuhn-Munkres on a square matrix over the ordered group above
// (shortest-augmenting-path formulation with dual potentials).
std::vector<int> munkres(const std::vector<std::vector<LexCost>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<LexCost> u(n + 1), v(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<LexCost> minv(n + 1, kLexInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      LexCost delta = kLexInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const LexCost cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] = u[p[j]] + delta;
          v[j] = v[j] - delta;
        } else {
          minv[j] = minv[j] - delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j]) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

std::vector<std::pair<int, int>> solve_assignment(const CostMatrix& cm) {
  const int nt = static_cast<int>(cm.rows());
  const int nd = static_cast<int>(cm.cols());
  if (nt == 0 || nd == 0) {
    return {};
  }

  // Square (nt+nd) matrix: real pairs top-left, per-row and per-column dummy
  // slots (penalty 1) on the diagonals of the off blocks, free dummy-dummy
  // pairing bottom-right.
  const int n = nt + nd;
  std::vector<std::vector<LexCost>> cost(n, std::vector<LexCost>(n, kLexInf));
  for (int i = 0; i < nt; ++i) {
    for (int j = 0; j < nd; ++j) {
      if (cm.feasible(i, j)) cost[i][j] = {0, cm.cost(i, j)};
    }
    cost[i][nd + i] = {1, 0.0};
  }
  for (int j = 0; j < nd; ++j) {
    cost[nt + j][j] = {1, 0.0};
  }
  for (int i = nt; i < n; ++i) {
    for (int j = nd; j < n; ++j) {
      cost[i][j] = {0, 0.0};
    }
  }

  std::vector<int> row_to_col = munkres(cost);

  // Canonicalize equal-cost optima toward the lexicographically smallest
  // (row, column) pairing: swap any row pair whose exchange keeps the total
  // exactly equal but lowers the earlier row's column.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < nt; ++i) {
      for (int k = i + 1; k < n; ++k) {
        const int ji = row_to_col[i];
        const int jk = row_to_col[k];
        if (jk >= ji) continue;
        const LexCost before = cost[i][ji] + cost[k][jk];
        const LexCost swapped = cost[i][jk] + cost[k][ji];
        if (swapped.penalty == before.penalty && swapped.value == before.value) {
          row_to_col[i] = jk;
          row_to_col[k] = ji;
          changed = true;
        }
      }
    }
  }

  std::vector<std::pair<int, int>> matches;
  for (int i = 0; i < nt; ++i) {
    const int j = row_to_col[i];
    if (j >= 0 && j < nd && cm.feasible(i, j)) {
      matches.emplace_back(i, j);
    }
  }
  return matches;
}

}  // namespace s3kf
