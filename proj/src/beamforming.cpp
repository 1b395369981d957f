#include "clustersim/beamforming.hpp"

#include <cmath>

#include "clustersim/errors.hpp"

namespace clustersim::beamforming {
namespace {

// Gram condition 1e12 corresponds to a condition of 1e6 on G itself.
constexpr double kMaxCondition = 1e6;

void fix_phase(CVector& f) {
  const double scale = f.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double a = std::abs(f(i));
    if (a > 1e-14 * scale) {
      f *= std::conj(f(i)) / a;
      f(i) = a;
      return;
    }
  }
}

}  // namespace

Beamformer zf_null_beamformer(const CVector& h_dir, const CMatrix& G) {
  const Eigen::Index n_t = h_dir.size();
  if (G.cols() > 0 && G.rows() != n_t) throw DomainError("zf_null_beamformer: dimension mismatch");
  if (G.cols() >= n_t) throw DomainError("zf_null_beamformer: need fewer nulled users than antennas");

  CVector f = h_dir;
  if (G.cols() > 0) {
    Eigen::ColPivHouseholderQR<CMatrix> qr(G);
    const auto& R = qr.matrixR();
    const double top = std::abs(R(0, 0));
    const double bottom = std::abs(R(G.cols() - 1, G.cols() - 1));
    if (!(bottom > 0) || top / bottom > kMaxCondition) {
      throw RankDeficient("zf_null_beamformer: interference directions nearly collinear");
    }
    const CMatrix Q = qr.householderQ() * CMatrix::Identity(n_t, G.cols());
    // Two passes keep the residual inner products at rounding level.
    for (int pass = 0; pass < 2; ++pass) f -= Q * (Q.adjoint() * f);
  }
  const double nf = f.norm();
  if (!(nf > 1e-14 * std::max(1.0, h_dir.norm()))) {
    throw ZeroVector("zf_null_beamformer: desired direction lies in the nulled span");
  }
  f /= nf;
  fix_phase(f);
  return {f};
}

Beamformer mrt_beamformer(const CVector& h) {
  const double nh = h.norm();
  if (!(nh > 0)) throw ZeroVector("mrt_beamformer: zero channel");
  return {h / nh};
}

}  // namespace clustersim::beamforming
