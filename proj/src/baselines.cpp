#include "fddisac/baselines.hpp"

#include <cmath>

namespace fddisac {

namespace {

CMat stack_channels(const std::vector<CVec>& channels, const Dims& dims) {
  dims.validate();
  if (static_cast<int>(channels.size()) != dims.n_users)
    throw InvalidArgument("baseline: expected one channel per user");
  CMat h(dims.n_antennas, dims.n_users);
  for (int k = 0; k < dims.n_users; ++k) {
    if (channels[k].size() != dims.n_antennas)
      throw InvalidArgument("baseline: channel length mismatch");
    h.col(k) = channels[k];
  }
  return h;
}

CVec place_private(const CMat& w, const Dims& dims) {
  CVec p = CVec::Zero(dims.dim());
  for (int k = 0; k < dims.n_users; ++k) {
    const double n = w.col(k).norm();
    if (n > 0.0)
      p.segment(static_cast<Eigen::Index>(dims.private_block(k)) * dims.n_antennas,
                dims.n_antennas) = w.col(k) / n;
  }
  const double total = p.norm();
  return total > 0.0 ? CVec(p / total) : p;
}

}  // namespace

CVec mrt_precoder(const std::vector<CVec>& channels, const Dims& dims) {
  return place_private(stack_channels(channels, dims), dims);
}

CVec rzf_precoder(const std::vector<CVec>& channels, const Dims& dims,
                  double sigma_sq_over_p) {
  if (!(sigma_sq_over_p >= 0.0)) throw InvalidArgument("rzf: sigma^2/P must be >= 0");
  const CMat h = stack_channels(channels, dims);
  CMat gram = h.adjoint() * h;
  gram.diagonal().array() += dims.n_users * sigma_sq_over_p;
  const CMat w = h * gram.ldlt().solve(CMat::Identity(dims.n_users, dims.n_users));
  return place_private(w, dims);
}

}  // namespace fddisac
