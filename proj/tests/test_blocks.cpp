#include <doctest.h>

#include <cmath>

#include "fddisac/sinr_blocks.hpp"

using namespace fddisac;

namespace {

CVec random_vec(Rng& rng, int n) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.complex_normal(1.0);
  return v;
}

struct Instance {
  Dims dims;
  std::vector<CVec> h;
  std::vector<RVec> ecm;
  double floor = 0.0;
  CVec p;
};

Instance random_instance(Rng& rng, Dims dims) {
  Instance in;
  in.dims = dims;
  for (int k = 0; k < dims.n_users; ++k) {
    in.h.push_back(random_vec(rng, dims.n_antennas));
    RVec e(dims.n_antennas);
    for (int n = 0; n < dims.n_antennas; ++n) e(n) = rng.uniform(0.0, 0.3);
    in.ecm.push_back(e);
  }
  in.floor = rng.uniform(1e-3, 0.5);
  in.p = random_vec(rng, dims.dim());
  in.p /= in.p.norm();
  return in;
}

}  // namespace

TEST_CASE("block-diagonal operations agree with the dense matrix") {
  Rng rng(1);
  BlockDiagonal m(3, 4);
  for (int b = 0; b < 3; ++b) {
    CMat a(4, 4);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.complex_normal(1.0);
    m.block(b) = a * a.adjoint() + CMat::Identity(4, 4);
  }
  const CMat d = m.dense();
  const CVec p = random_vec(rng, 12);
  CHECK(std::abs(m.quad(p) - std::real(p.dot(d * p))) < 1e-10);
  CHECK((m.apply(p) - d * p).norm() < 1e-10);
  CHECK((d * m.solve(p) - p).norm() < 1e-10);

  BlockDiagonal sum = m;
  CMat extra = CMat::Identity(4, 4) * cd{2.0, 0.0};
  sum.add_scaled(m, 0.5).add_identity(0.25).add_to_all(extra, 0.1);
  CHECK((sum.dense() - (1.5 * d + 0.45 * CMat::Identity(12, 12))).norm() < 1e-10);
  CHECK((BlockDiagonal::identity(3, 4, 2.0).dense() - 2.0 * CMat::Identity(12, 12)).norm() ==
        0.0);
}

TEST_CASE("U - V structure of the SINR matrices") {
  Rng rng(2);
  const Instance in = random_instance(rng, Dims{4, 3, 2});
  const SinrBlocks sb = build_sinr_blocks(in.h, in.ecm, in.floor, in.dims, true);
  for (int k = 0; k < in.dims.n_users; ++k) {
    const CMat outer = in.h[k] * in.h[k].adjoint();
    for (int b = 0; b < in.dims.n_blocks(); ++b) {
      const CMat dc = sb.u_common[k].block(b) - sb.v_common[k].block(b);
      const CMat dp = sb.u_private[k].block(b) - sb.v_private[k].block(b);
      CHECK((dc - (b == 0 ? outer : CMat::Zero(4, 4))).norm() < 1e-12);
      CHECK((dp - (b == in.dims.private_block(k) ? outer : CMat::Zero(4, 4))).norm() < 1e-12);
    }
    for (const auto* m : {&sb.u_common[k], &sb.v_common[k], &sb.u_private[k], &sb.v_private[k]}) {
      const CMat d = m->dense();
      CHECK((d - d.adjoint()).norm() < 1e-10);
      CHECK(Eigen::SelfAdjointEigenSolver<CMat>(d).eigenvalues().minCoeff() > -1e-10);
    }
  }
}

TEST_CASE("single user without radar or ECM") {
  Rng rng(3);
  const Dims dims{4, 1, 0};
  const CVec h = random_vec(rng, 4);
  const SinrBlocks sb = build_sinr_blocks({h}, {}, 0.1, dims, false);
  const CMat diff = sb.u_common[0].dense() - sb.v_common[0].dense();
  CMat want = CMat::Zero(8, 8);
  want.topLeftCorner(4, 4) = h * h.adjoint();
  CHECK((diff - want).norm() < 1e-12);
}

TEST_CASE("quadratic-form SINRs equal direct scalar evaluation") {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const Dims dims{rng.uniform_int(1, 5), rng.uniform_int(1, 4), rng.uniform_int(0, 3)};
    const Instance in = random_instance(rng, dims);
    const SinrBlocks sb = build_sinr_blocks(in.h, in.ecm, in.floor, dims, true);
    const int n = dims.n_antennas;
    auto col = [&](int b) { return in.p.segment(b * n, n); };
    for (int k = 0; k < dims.n_users; ++k) {
      const CVec& h = in.h[k];
      double error_leak = 0.0;
      for (int b = 0; b < dims.n_blocks(); ++b)
        error_leak += (col(b).cwiseAbs2().array() * in.ecm[k].array()).sum();
      double mui_all = 0.0;
      for (int b = 1; b < dims.n_blocks(); ++b) mui_all += std::norm(h.dot(col(b)));
      const double sig_c = std::norm(h.dot(col(0)));
      const double sig_k = std::norm(h.dot(col(dims.private_block(k))));
      const double sinr_c = sig_c / (mui_all + error_leak + in.floor);
      const double sinr_k = sig_k / (mui_all - sig_k + error_leak + in.floor);
      CHECK(std::abs(sb.common_ratio(k, in.p) - (1.0 + sinr_c)) <= 1e-10 * (1.0 + sinr_c));
      CHECK(std::abs(sb.private_ratio(k, in.p) - (1.0 + sinr_k)) <= 1e-10 * (1.0 + sinr_k));
    }
  }
}

TEST_CASE("ECM switch removes the error terms") {
  Rng rng(5);
  const Instance in = random_instance(rng, Dims{4, 2, 1});
  const SinrBlocks with = build_sinr_blocks(in.h, in.ecm, in.floor, in.dims, true);
  const SinrBlocks without = build_sinr_blocks(in.h, in.ecm, in.floor, in.dims, false);
  for (int k = 0; k < 2; ++k) {
    CHECK(without.private_ratio(k, in.p) >= with.private_ratio(k, in.p));
    CHECK(without.common_ratio(k, in.p) >= with.common_ratio(k, in.p));
    CHECK(std::abs(without.v_private[k].quad(in.p) -
                   (with.v_private[k].quad(in.p) -
                    [&] {
                      double leak = 0.0;
                      for (int b = 0; b < in.dims.n_blocks(); ++b)
                        leak += (in.p.segment(b * 4, 4).cwiseAbs2().array() * in.ecm[k].array())
                                    .sum();
                      return leak;
                    }())) < 1e-10);
  }
}

TEST_CASE("bad inputs are rejected") {
  const Dims dims{4, 2, 1};
  CHECK_THROWS_AS(build_sinr_blocks({CVec::Ones(4)}, {}, 0.1, dims, false), InvalidArgument);
  CHECK_THROWS_AS(build_sinr_blocks({CVec::Ones(4), CVec::Ones(3)}, {}, 0.1, dims, false),
                  InvalidArgument);
  CHECK_THROWS_AS(build_sinr_blocks({CVec::Ones(4), CVec::Ones(4)}, {}, 0.0, dims, false),
                  InvalidArgument);
  CHECK_THROWS_AS((Dims{0, 1, 0}.validate()), InvalidArgument);
}
