#include "bdf/lattice.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace bdf {

namespace {

constexpr double kEdgeTol = 1e-9;

struct IVec3Less {
  bool operator()(const IVec3& a, const IVec3& b) const {
    if (a[0] != b[0]) return a[0] < b[0];
    if (a[1] != b[1]) return a[1] < b[1];
    return a[2] < b[2];
  }
};

}  // namespace

MomentumLattice::MomentumLattice(double box_length, double cutoff, int spinor_dim,
                                 std::size_t max_total_dim)
    : box_length_(box_length), cutoff_(cutoff), spinor_dim_(spinor_dim),
      max_total_dim_(max_total_dim) {
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw ConfigError("box length must be positive");
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw ConfigError("cutoff must be positive");
  if (spinor_dim != 2 && spinor_dim != 4) throw ConfigError("spinor_dim must be 2 or 4");

  const double radius = cutoff * box_length / (2.0 * kPi);
  const double r2 = radius * radius * (1.0 + kEdgeTol) + kEdgeTol;
  const int n = static_cast<int>(std::floor(radius + kEdgeTol));
  const std::size_t est = static_cast<std::size_t>(4.2 * radius * radius * radius + 1);
  if (est * spinor_dim > 4 * max_total_dim_) {
    std::ostringstream os;
    os << "lattice (L=" << box_length << ", cutoff=" << cutoff << ") exceeds total_dim cap "
       << max_total_dim_;
    throw ConfigError(os.str());
  }

  for (int x = -n; x <= n; ++x)
    for (int y = -n; y <= n; ++y)
      for (int z = -n; z <= n; ++z)
        if (double(x * x + y * y + z * z) <= r2) modes_.emplace_back(x, y, z);

  if (modes_.empty()) throw ConfigError("lattice has no modes");
  if (modes_.size() * spinor_dim > max_total_dim_) {
    std::ostringstream os;
    os << "total_dim " << modes_.size() * spinor_dim << " exceeds cap " << max_total_dim_;
    throw ConfigError(os.str());
  }

  for (const auto& m : modes_) max_index_ = std::max(max_index_, m.cwiseAbs().maxCoeff());
  const long side = 2 * max_index_ + 1;
  lookup_.assign(side * side * side, -1);
  for (std::size_t i = 0; i < modes_.size(); ++i) lookup_[cube_offset(modes_[i])] = int(i);

  negated_.resize(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) negated_[i] = *find(-modes_[i]);

  shifts_.push_back({IVec3::Zero(), {}, {}});
  for (std::size_t a = 0; a < modes_.size(); ++a) {
    shifts_[0].src.push_back(Index(a));
    shifts_[0].dst.push_back(Index(a));
  }
  std::map<IVec3, Shift, IVec3Less> rest;
  for (std::size_t a = 0; a < modes_.size(); ++a)
    for (std::size_t b = 0; b < modes_.size(); ++b) {
      if (a == b) continue;
      IVec3 d = modes_[b] - modes_[a];
      auto& s = rest[d];
      s.d = d;
      s.src.push_back(Index(a));
      s.dst.push_back(Index(b));
    }
  for (auto& [d, s] : rest) shifts_.push_back(std::move(s));

  const long dside = 4 * max_index_ + 1;
  shift_lookup_.assign(dside * dside * dside, -1);
  for (std::size_t i = 0; i < shifts_.size(); ++i) {
    const IVec3 o = shifts_[i].d.array() + 2 * max_index_;
    shift_lookup_[(o[0] * dside + o[1]) * dside + o[2]] = int(i);
  }
}

std::optional<std::size_t> MomentumLattice::shift_index(const IVec3& d) const {
  if (d.cwiseAbs().maxCoeff() > 2 * max_index_) return std::nullopt;
  const long dside = 4 * max_index_ + 1;
  const IVec3 o = d.array() + 2 * max_index_;
  const int v = shift_lookup_[(o[0] * dside + o[1]) * dside + o[2]];
  if (v < 0) return std::nullopt;
  return std::size_t(v);
}

double MomentumLattice::spacing() const { return 2.0 * kPi / box_length_; }

RVec3 MomentumLattice::momentum(std::size_t mode) const { return momentum_of(modes_[mode]); }

RVec3 MomentumLattice::momentum_of(const IVec3& z) const { return spacing() * z.cast<double>(); }

long MomentumLattice::cube_offset(const IVec3& z) const {
  const long side = 2 * max_index_ + 1;
  return ((z[0] + max_index_) * side + (z[1] + max_index_)) * side + (z[2] + max_index_);
}

std::optional<std::size_t> MomentumLattice::find(const IVec3& z) const {
  if (z.cwiseAbs().maxCoeff() > max_index_) return std::nullopt;
  const int v = lookup_[cube_offset(z)];
  if (v < 0) return std::nullopt;
  return std::size_t(v);
}

MomentumLattice MomentumLattice::with_spinor_dim(int spinor_dim) const {
  return MomentumLattice(box_length_, cutoff_, spinor_dim, max_total_dim_);
}

bool MomentumLattice::same_modes(const MomentumLattice& other) const {
  return modes_ == other.modes_;
}

Mat4 alpha_dot(const RVec3& v) {
  static const auto alg = DiracAlgebra<double>::standard();
  Mat4 m = Mat4::Zero();
  for (int k = 0; k < 3; ++k) m += v[k] * alg.alpha[k];
  return m;
}

double madelung_constant(double box_length) {
  static const double unit = [] {
    const double eta = std::sqrt(kPi);
    const int n = 5;
    double real = 0.0, recip = 0.0;
    for (int x = -n; x <= n; ++x)
      for (int y = -n; y <= n; ++y)
        for (int z = -n; z <= n; ++z) {
          if (x == 0 && y == 0 && z == 0) continue;
          const double r = std::sqrt(double(x * x + y * y + z * z));
          real += std::erfc(eta * r) / r;
          const double k2 = 4.0 * kPi * kPi * r * r;
          recip += 4.0 * kPi * std::exp(-k2 / (4.0 * eta * eta)) / k2;
        }
    const double psi = real + recip - 2.0 * eta / std::sqrt(kPi) - kPi / (eta * eta);
    return -psi;
  }();
  return unit / box_length;
}

CoulombKernel::CoulombKernel(const MomentumLattice& lattice, ZeroModeRule rule)
    : box_length_(lattice.box_length()), volume_(lattice.volume()), zero_mode_(0.0), rule_(rule) {
  if (rule == ZeroModeRule::Madelung) zero_mode_ = madelung_constant(box_length_) * volume_;
}

double CoulombKernel::operator()(const IVec3& d) const {
  if (d.isZero()) return zero_mode_;
  const double g = 2.0 * kPi / box_length_;
  return 4.0 * kPi / (g * g * double(d.squaredNorm()));
}

std::vector<Mat> convolve_kernel(const std::vector<Mat>& field, const CoulombKernel& kernel,
                                 const MomentumLattice& lattice) {
  if (field.size() != lattice.size())
    throw std::invalid_argument("convolve_kernel: field size does not match lattice");
  const Index s = field.empty() ? 0 : field[0].rows();
  std::vector<Mat> out(lattice.size(), Mat::Zero(s, s));
  for (std::size_t p = 0; p < lattice.size(); ++p)
    for (std::size_t q = 0; q < lattice.size(); ++q) {
      if (field[q].rows() != s || field[q].cols() != s)
        throw std::invalid_argument("convolve_kernel: block dimension mismatch");
      const double w = kernel.weight(lattice.index(p) - lattice.index(q));
      if (w != 0.0) out[p] += w * field[q];
    }
  return out;
}

Mat exchange_operator(const Mat& Q, const CoulombKernel& kernel, const MomentumLattice& lattice) {
  const Index n = lattice.total_dim();
  if (Q.rows() != n || Q.cols() != n)
    throw std::invalid_argument("exchange_operator: dimension mismatch");
  const int s = lattice.spinor_dim();
  Mat K = Mat::Zero(n, n);
  std::vector<Index> I, J;
  for (const auto& sh : lattice.shifts()) {
    const double w = kernel.weight(sh.d);
    if (w == 0.0) continue;
    I.resize(sh.src.size() * s);
    J.resize(sh.dst.size() * s);
    for (std::size_t a = 0; a < sh.src.size(); ++a)
      for (int sp = 0; sp < s; ++sp) {
        I[a * s + sp] = sh.src[a] * s + sp;
        J[a * s + sp] = sh.dst[a] * s + sp;
      }
    K(J, J) += w * Q(I, I);
  }
  return K;
}

Mat block_diagonal(const std::vector<Mat>& blocks) {
  Index n = 0;
  for (const auto& b : blocks) n += b.rows();
  Mat m = Mat::Zero(n, n);
  Index off = 0;
  for (const auto& b : blocks) {
    m.block(off, off, b.rows(), b.cols()) = b;
    off += b.rows();
  }
  return m;
}

Mat block_diagonal(const std::vector<Mat4>& blocks) {
  Mat m = Mat::Zero(4 * Index(blocks.size()), 4 * Index(blocks.size()));
  for (std::size_t i = 0; i < blocks.size(); ++i) m.block<4, 4>(4 * i, 4 * i) = blocks[i];
  return m;
}

std::vector<Mat> diagonal_blocks(const Mat& m, const MomentumLattice& lattice) {
  const int s = lattice.spinor_dim();
  std::vector<Mat> out(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) out[i] = m.block(i * s, i * s, s, s);
  return out;
}

}  // namespace bdf
