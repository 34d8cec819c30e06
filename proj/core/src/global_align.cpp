#include "mvid/global_align.hpp"

#include <cmath>
#include <vector>

namespace mvid {

AffineAlignment fit_affine(std::span<const double> z, std::span<const double> y) {
  if (z.size() != y.size()) fail(ErrorCode::kShapeMismatch, "fit_affine input sizes differ");
  if (z.empty()) fail(ErrorCode::kEmptySparse, "no sparse points to fit against");

  const double n = static_cast<double>(z.size());
  double sz = 0.0, sy = 0.0, szz = 0.0, szy = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    sz += z[i];
    sy += y[i];
    szz += z[i] * z[i];
    szy += z[i] * y[i];
  }

  AffineAlignment out;
  out.n_points = z.size();

  // The normal-equation determinant n*Szz - Sz^2 equals n * sum((z - mean)^2);
  // the centered form is evaluated instead to avoid cancellation.
  const double mz = sz / n;
  const double my = sy / n;
  double czz = 0.0, czy = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    czz += (z[i] - mz) * (z[i] - mz);
    czy += (z[i] - mz) * (y[i] - my);
  }
  const double det = n * czz;
  if (z.size() >= 2 && det > 0.0 && det >= kDeterminantEpsilon * n * szz) {
    out.scale = czy / czz;
    out.shift = my - out.scale * mz;
    return out;
  }

  if (szz == 0.0) fail(ErrorCode::kAllZeroPrediction, "prediction is zero at every sparse point");
  out.scale = szy / szz;
  out.shift = 0.0;
  out.degenerate = true;
  return out;
}

AffineAlignment fit_global(const InverseDepthMap& pred, std::span<const SparsePoint> sparse) {
  if (sparse.empty()) fail(ErrorCode::kEmptySparse, "no sparse points to fit against");
  validate_sparse(sparse, pred.width(), pred.height());
  std::vector<double> z, y;
  z.reserve(sparse.size());
  y.reserve(sparse.size());
  for (const auto& p : sparse) {
    z.push_back(pred(p.u, p.v));
    y.push_back(1.0 / p.depth);
  }
  return fit_affine(z, y);
}

InverseDepthMap apply_global(const InverseDepthMap& pred, const AffineAlignment& alignment,
                             const ClampProfile& profile) {
  InverseDepthMap out(pred.width(), pred.height());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    out[i] = clamp_inverse(alignment.scale * pred[i] + alignment.shift, profile);
  }
  return out;
}

}  // namespace mvid
