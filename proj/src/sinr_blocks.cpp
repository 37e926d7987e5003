#include "fddisac/sinr_blocks.hpp"

#include <string>

namespace fddisac {

void Dims::validate() const {
  if (n_antennas < 1) throw InvalidArgument("dims.n_antennas must be >= 1");
  if (n_users < 1) throw InvalidArgument("dims.n_users must be >= 1");
  if (n_radar < 0) throw InvalidArgument("dims.n_radar must be >= 0");
}

SinrBlocks build_sinr_blocks(const std::vector<CVec>& channels,
                             const std::vector<RVec>& ecm_diag,
                             double sigma_sq_over_p, const Dims& dims, bool use_ecm) {
  dims.validate();
  const int n_users = dims.n_users;
  const int n_ant = dims.n_antennas;
  if (static_cast<int>(channels.size()) != n_users)
    throw InvalidArgument("build_sinr_blocks: expected one channel per user");
  if (use_ecm && static_cast<int>(ecm_diag.size()) != n_users)
    throw InvalidArgument("build_sinr_blocks: expected one ECM per user");
  if (!(sigma_sq_over_p > 0.0))
    throw InvalidArgument("build_sinr_blocks: sigma^2/P must be > 0");

  SinrBlocks out;
  out.dims = dims;
  out.noise_floor = sigma_sq_over_p;
  const int n_blocks = dims.n_blocks();
  for (int k = 0; k < n_users; ++k) {
    const CVec& h = channels[k];
    if (h.size() != n_ant)
      throw InvalidArgument("build_sinr_blocks: channel " + std::to_string(k) +
                            " has wrong length");
    CMat sigma = CMat::Zero(n_ant, n_ant);
    if (use_ecm) {
      if (ecm_diag[k].size() != n_ant)
        throw InvalidArgument("build_sinr_blocks: ECM " + std::to_string(k) +
                              " has wrong length");
      sigma.diagonal() = ecm_diag[k].cast<cd>();
    }
    const CMat outer = h * h.adjoint();
    const CMat full = outer + sigma;

    BlockDiagonal uc(n_blocks, n_ant);
    for (int b = 0; b < n_blocks; ++b) uc.block(b) = full;
    uc.add_identity(sigma_sq_over_p);
    BlockDiagonal vc = uc;
    vc.block(dims.common_block()) -= outer;

    BlockDiagonal up = uc;
    up.block(dims.common_block()) = sigma;
    up.block(dims.common_block()).diagonal().array() += sigma_sq_over_p;
    BlockDiagonal vp = up;
    vp.block(dims.private_block(k)) -= outer;

    out.u_common.push_back(std::move(uc));
    out.v_common.push_back(std::move(vc));
    out.u_private.push_back(std::move(up));
    out.v_private.push_back(std::move(vp));
  }
  return out;
}

}  // namespace fddisac
