#include "fddisac/block_diag.hpp"

namespace fddisac {

BlockDiagonal::BlockDiagonal(int n_blocks, int block_size) : block_size_(block_size) {
  if (n_blocks < 1 || block_size < 1)
    throw InvalidArgument("BlockDiagonal: sizes must be >= 1");
  blocks_.assign(n_blocks, CMat::Zero(block_size, block_size));
}

BlockDiagonal BlockDiagonal::identity(int n_blocks, int block_size, double scale) {
  BlockDiagonal out(n_blocks, block_size);
  out.add_identity(scale);
  return out;
}

double BlockDiagonal::quad(const CVec& p) const {
  if (p.size() != dim()) throw InvalidArgument("BlockDiagonal::quad: size mismatch");
  double acc = 0.0;
  for (int b = 0; b < n_blocks(); ++b) {
    const auto seg = p.segment(static_cast<Eigen::Index>(b) * block_size_, block_size_);
    acc += std::real(seg.dot(blocks_[b] * seg));
  }
  return acc;
}

CVec BlockDiagonal::apply(const CVec& p) const {
  if (p.size() != dim()) throw InvalidArgument("BlockDiagonal::apply: size mismatch");
  CVec out(dim());
  for (int b = 0; b < n_blocks(); ++b) {
    const Eigen::Index off = static_cast<Eigen::Index>(b) * block_size_;
    out.segment(off, block_size_) = blocks_[b] * p.segment(off, block_size_);
  }
  return out;
}

BlockDiagonal& BlockDiagonal::add_scaled(const BlockDiagonal& other, double c) {
  if (other.n_blocks() != n_blocks() || other.block_size_ != block_size_)
    throw InvalidArgument("BlockDiagonal::add_scaled: shape mismatch");
  for (int b = 0; b < n_blocks(); ++b) blocks_[b] += c * other.blocks_[b];
  return *this;
}

BlockDiagonal& BlockDiagonal::add_identity(double c) {
  for (auto& blk : blocks_) blk.diagonal().array() += c;
  return *this;
}

BlockDiagonal& BlockDiagonal::add_to_all(const CMat& m, double c) {
  if (m.rows() != block_size_ || m.cols() != block_size_)
    throw InvalidArgument("BlockDiagonal::add_to_all: block shape mismatch");
  for (auto& blk : blocks_) blk += c * m;
  return *this;
}

CVec BlockDiagonal::solve(const CVec& rhs) const {
  if (rhs.size() != dim()) throw InvalidArgument("BlockDiagonal::solve: size mismatch");
  CVec out(dim());
  for (int b = 0; b < n_blocks(); ++b) {
    const Eigen::Index off = static_cast<Eigen::Index>(b) * block_size_;
    Eigen::LLT<CMat> llt(blocks_[b]);
    if (llt.info() == Eigen::Success) {
      out.segment(off, block_size_) = llt.solve(rhs.segment(off, block_size_));
    } else {
      out.segment(off, block_size_) = blocks_[b].ldlt().solve(rhs.segment(off, block_size_));
    }
  }
  return out;
}

CMat BlockDiagonal::dense() const {
  CMat out = CMat::Zero(dim(), dim());
  for (int b = 0; b < n_blocks(); ++b) {
    const Eigen::Index off = static_cast<Eigen::Index>(b) * block_size_;
    out.block(off, off, block_size_, block_size_) = blocks_[b];
  }
  return out;
}

}  // namespace fddisac
