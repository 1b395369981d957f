#pragma once

#include "clustersim/channel.hpp"

namespace clustersim::beamforming {

using channel::CMatrix;
using channel::CVector;

struct Beamformer {
  CVector f;
};

/// Unit vector in the null space of G^* closest to h_dir. G holds one column per
/// nulled user and may have zero columns. The first nonzero entry of f is real positive.
/// Throws RankDeficient when G is numerically singular (Gram condition above 1e12),
/// ZeroVector when h_dir has no component in the null space.
Beamformer zf_null_beamformer(const CVector& h_dir, const CMatrix& G);

/// f = h/|h|. Throws ZeroVector for h = 0.
Beamformer mrt_beamformer(const CVector& h);

}  // namespace clustersim::beamforming
