#include "lattice.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dioph {

namespace {

constexpr std::size_t kMaxDim = 8;
constexpr double kUnimodularTol = 1e-6;
constexpr double kTieTol = 1e-9;

void require_invertible(const Mat& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InvalidArgument(std::string(what) + ": matrix must be square");
  if (!m.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entries");
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec s = svd.singularValues();
  if (!(s[s.size() - 1] > 0.0) || s[0] / s[s.size() - 1] > 1e13)
    throw InvalidArgument(std::string(what) + ": singular or near-singular matrix");
}

long long checked_add(long long a, long long b) {
  long long r;
  if (__builtin_add_overflow(a, b, &r)) throw BudgetExceeded("integer coefficient overflow during reduction");
  return r;
}

long long checked_mul(long long a, long long b) {
  long long r;
  if (__builtin_mul_overflow(a, b, &r)) throw BudgetExceeded("integer coefficient overflow during reduction");
  return r;
}

// Basis under unimodular column operations, tracking B = B0 * T and T^{-1}.
struct WorkingBasis {
  Mat B;
  IMat T;
  IMat Tinv;

  explicit WorkingBasis(const Mat& b0)
      : B(b0), T(IMat::Identity(b0.cols(), b0.cols())), Tinv(IMat::Identity(b0.cols(), b0.cols())) {}

  int dim() const { return static_cast<int>(B.cols()); }

  // col[target] -= r * col[src]
  void col_sub(int target, int src, long long r) {
    if (r == 0) return;
    B.col(target) -= static_cast<double>(r) * B.col(src);
    for (int i = 0; i < dim(); ++i) {
      T(i, target) = checked_add(T(i, target), -checked_mul(r, T(i, src)));
      Tinv(src, i) = checked_add(Tinv(src, i), checked_mul(r, Tinv(target, i)));
    }
  }

  void swap(int a, int b) {
    if (a == b) return;
    B.col(a).swap(B.col(b));
    T.col(a).swap(T.col(b));
    Tinv.row(a).swap(Tinv.row(b));
  }
};

struct GramSchmidt {
  Mat mu;
  Vec norm2;
};

GramSchmidt gram_schmidt(const Mat& B) {
  const int k = static_cast<int>(B.cols());
  GramSchmidt gs{Mat::Zero(k, k), Vec::Zero(k)};
  Mat star = B;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < i; ++j) {
      gs.mu(i, j) = B.col(i).dot(star.col(j)) / gs.norm2[j];
      star.col(i) -= gs.mu(i, j) * star.col(j);
    }
    gs.norm2[i] = star.col(i).squaredNorm();
    gs.mu(i, i) = 1.0;
  }
  return gs;
}

void size_reduce(WorkingBasis& w, int kappa) {
  for (int pass = 0; pass < 4; ++pass) {
    GramSchmidt gs = gram_schmidt(w.B);
    bool changed = false;
    for (int j = kappa - 1; j >= 0; --j) {
      const double mu = gs.mu(kappa, j);
      if (std::abs(mu) <= 0.5 + 1e-12) continue;
      const double r = std::round(mu);
      if (std::abs(r) > 9e15) throw BudgetExceeded("size reduction coefficient out of range");
      const long long ri = static_cast<long long>(r);
      w.col_sub(kappa, j, ri);
      for (int l = 0; l < j; ++l) gs.mu(kappa, l) -= r * gs.mu(j, l);
      gs.mu(kappa, j) -= r;
      changed = true;
    }
    if (!changed) return;
  }
}

// LLL on columns [lo, hi). Size reduction uses every earlier column; swaps
// stay inside the block so the span of [0, lo) is preserved.
void lll_block(WorkingBasis& w, int lo, int hi, double delta = 0.99) {
  if (hi - lo < 1) return;
  size_reduce(w, lo);
  int kappa = lo + 1;
  std::uint64_t steps = 0;
  while (kappa < hi) {
    if (++steps > 1'000'000) throw BudgetExceeded("LLL did not converge within its step budget");
    size_reduce(w, kappa);
    const GramSchmidt gs = gram_schmidt(w.B);
    const double m = gs.mu(kappa, kappa - 1);
    if (gs.norm2[kappa] >= (delta - m * m) * gs.norm2[kappa - 1]) {
      ++kappa;
    } else {
      w.swap(kappa, kappa - 1);
      kappa = std::max(kappa - 1, lo + 1);
    }
  }
}

// Integer row echelon of the chosen coefficient columns; every row operation
// on C is mirrored as the inverse column operation on the basis so that
// B * C is unchanged. Afterwards the first `cols` basis columns span the
// primitive sublattice containing the chosen vectors.
void split_basis(WorkingBasis& w, IMat C) {
  const int k = w.dim();
  const int cols = static_cast<int>(C.cols());
  for (int p = 0; p < cols; ++p) {
    for (;;) {
      int piv = -1;
      for (int r = p; r < k; ++r) {
        if (C(r, p) != 0 && (piv < 0 || std::llabs(C(r, p)) < std::llabs(C(piv, p)))) piv = r;
      }
      if (piv < 0) throw InvalidArgument("successive minima: witness vectors became dependent");
      if (piv != p) {
        C.row(piv).swap(C.row(p));
        w.swap(piv, p);
      }
      bool done = true;
      for (int r = p + 1; r < k; ++r) {
        if (C(r, p) == 0) continue;
        const long long q = C(r, p) / C(p, p);
        if (q != 0) {
          // row r -= q row p  <=>  col p += q col r
          for (int c = 0; c < cols; ++c) C(r, c) = checked_add(C(r, c), -checked_mul(q, C(p, c)));
          w.col_sub(p, r, -q);
        }
        if (C(r, p) != 0) done = false;
      }
      if (done) break;
    }
  }
}

IVec sign_normalised(IVec c) {
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c[i] != 0) {
      if (c[i] < 0) c = -c;
      break;
    }
  }
  return c;
}

bool lex_less(const IVec& a, const IVec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

// Shortest vector B c with some c_l != 0 for l >= split.
class Enumerator {
 public:
  Enumerator(const WorkingBasis& w, int split, const EnumerationBudget& budget)
      : w_(w), k_(w.dim()), split_(split), max_nodes_(budget.max_nodes), c_(IVec::Zero(w.dim())) {
    Eigen::HouseholderQR<Mat> qr(w.B);
    R_ = qr.matrixQR().triangularView<Eigen::Upper>();
    best2_ = std::numeric_limits<double>::infinity();
    for (int j = split_; j < k_; ++j) best2_ = std::min(best2_, w.B.col(j).squaredNorm());
    best2_ *= 1.0 + 1e-6;
  }

  void run() {
    recurse(k_ - 1, 0.0);
    if (!found_) throw InvalidArgument("successive minima: enumeration found no candidate");
  }

  double best2() const { return best2_; }
  const IVec& best_orig() const { return best_orig_; }
  std::uint64_t nodes() const { return nodes_; }

 private:
  double prune_bound() const { return best2_ * (1.0 + 2.0 * kTieTol) + 1e-300; }

  void recurse(int j, double partial) {
    if (++nodes_ > max_nodes_) {
      std::ostringstream os;
      os << "successive minima enumeration exceeded " << max_nodes_ << " nodes";
      throw BudgetExceeded(os.str());
    }
    if (j < 0) {
      leaf(partial);
      return;
    }
    if (j == split_ - 1) {
      bool any = false;
      for (int l = split_; l < k_; ++l) any = any || c_[l] != 0;
      if (!any) return;
    }
    double s = 0.0;
    for (int l = j + 1; l < k_; ++l) s += R_(j, l) * static_cast<double>(c_[l]);
    const double rjj = R_(j, j);
    const double center = -s / rjj;
    const double r2 = rjj * rjj;
    const long long c0 = std::llround(center);
    for (long long c = c0;; ++c) {
      const double y = static_cast<double>(c) - center;
      const double p = partial + r2 * y * y;
      if (p > prune_bound()) break;
      c_[j] = c;
      recurse(j - 1, p);
    }
    for (long long c = c0 - 1;; --c) {
      const double y = static_cast<double>(c) - center;
      const double p = partial + r2 * y * y;
      if (p > prune_bound()) break;
      c_[j] = c;
      recurse(j - 1, p);
    }
    c_[j] = 0;
  }

  void leaf(double norm2) {
    bool any = false;
    for (int l = split_; l < k_; ++l) any = any || c_[l] != 0;
    if (!any) return;
    // Recompute exactly from the basis; the QR partial sums drift slightly.
    const Vec v = w_.B * c_.cast<double>();
    norm2 = v.squaredNorm();
    const IVec orig = sign_normalised(w_.T * c_);
    if (!found_ || norm2 < best2_ * (1.0 - 2.0 * kTieTol)) {
      if (!found_ || norm2 < best2_) best2_ = norm2;
      best_orig_ = orig;
      best_exact2_ = norm2;
      found_ = true;
      return;
    }
    if (norm2 <= best_exact2_ * (1.0 + 2.0 * kTieTol)) {
      if (lex_less(orig, best_orig_)) {
        best_orig_ = orig;
        best_exact2_ = std::min(best_exact2_, norm2);
      }
      best2_ = std::min(best2_, norm2);
    }
  }

  const WorkingBasis& w_;
  int k_;
  int split_;
  std::uint64_t max_nodes_;
  Mat R_;
  IVec c_;
  double best2_;
  double best_exact2_ = std::numeric_limits<double>::infinity();
  IVec best_orig_;
  bool found_ = false;
  std::uint64_t nodes_ = 0;
};

}  // namespace

// -- LatticeBasis ---------------------------------------------------------------

LatticeBasis::LatticeBasis(Mat cols, NoCheck) : cols_(std::move(cols)) {
  require_invertible(cols_, "lattice basis");
}

LatticeBasis::LatticeBasis(Mat cols) : LatticeBasis(std::move(cols), NoCheck{}) {
  const double det = cols_.determinant();
  if (std::abs(std::abs(det) - 1.0) > kUnimodularTol) {
    std::ostringstream os;
    os << "lattice basis must be unimodular, |det| = " << std::abs(det);
    throw InvalidArgument(os.str());
  }
}

LatticeBasis LatticeBasis::any_covolume(Mat cols) { return LatticeBasis(std::move(cols), NoCheck{}); }

// -- Operations -------------------------------------------------------------------

Reduction lll_reduce(const Mat& basis) {
  require_invertible(basis, "lll_reduce");
  WorkingBasis w(basis);
  lll_block(w, 0, w.dim());
  return {w.B, w.T};
}

double orthogonality_defect(const Mat& basis) {
  double prod = 1.0;
  for (Eigen::Index j = 0; j < basis.cols(); ++j) prod *= basis.col(j).norm();
  return prod / std::abs(basis.determinant());
}

MinimaReport successive_minima(const LatticeBasis& basis, const EnumerationBudget& budget,
                               std::size_t count) {
  const std::size_t k = basis.dim();
  const std::size_t wanted = count == 0 ? k : std::min(count, k);
  if (k > kMaxDim) throw InvalidArgument("successive minima limited to dimension <= 8");
  WorkingBasis w(basis.cols());
  lll_block(w, 0, static_cast<int>(k));

  MinimaReport rep;
  for (std::size_t i = 0; i < wanted; ++i) {
    if (i > 0) {
      IMat C(k, i);
      for (std::size_t p = 0; p < i; ++p) C.col(p) = w.Tinv * rep.coefficients[p];
      split_basis(w, C);
      lll_block(w, 0, static_cast<int>(i));
      lll_block(w, static_cast<int>(i), static_cast<int>(k));
    }
    Enumerator e(w, static_cast<int>(i), budget);
    e.run();
    rep.nodes += e.nodes();
    const IVec coef = e.best_orig();
    const Vec v = basis.cols() * coef.cast<double>();
    rep.coefficients.push_back(coef);
    rep.witnesses.push_back(v);
    rep.values.push_back(v.norm());
  }
  // Rounding can leave equal minima a few ulps out of order.
  for (std::size_t i = 1; i < wanted; ++i) rep.values[i] = std::max(rep.values[i], rep.values[i - 1]);
  rep.certified = true;
  return rep;
}

LatticeBasis polar_basis(const LatticeBasis& basis) {
  require_invertible(basis.cols(), "polar_basis");
  return LatticeBasis::any_covolume(basis.cols().transpose().inverse());
}

Mat reverse_involution(std::size_t k) {
  if (k == 0) throw InvalidArgument("reverse_involution: k must be >= 1");
  Mat s = Mat::Zero(k, k);
  for (std::size_t i = 0; i < k; ++i) s(i, k - 1 - i) = 1.0;
  return s;
}

Mat dual_element(const Mat& g) {
  require_invertible(g, "dual_element");
  const Mat s = reverse_involution(static_cast<std::size_t>(g.rows()));
  return s * g.transpose().inverse() * s;
}

double mahler_constant(std::size_t k) {
  double f = 1.0;
  for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return f * f;
}

std::vector<double> mahler_gap(const LatticeBasis& basis, const EnumerationBudget& budget) {
  const MinimaReport a = successive_minima(basis, budget);
  const MinimaReport b = successive_minima(polar_basis(basis), budget);
  const std::size_t k = basis.dim();
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = a.values[i] * b.values[k - 1 - i];
  return out;
}

nlohmann::ordered_json to_json(const MinimaReport& report) {
  nlohmann::ordered_json j;
  j["values"] = report.values;
  nlohmann::ordered_json w = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.witnesses.size(); ++i) {
    nlohmann::ordered_json row;
    row["vector"] = std::vector<double>(report.witnesses[i].data(),
                                        report.witnesses[i].data() + report.witnesses[i].size());
    row["coefficients"] = std::vector<long long>(report.coefficients[i].data(),
                                                 report.coefficients[i].data() + report.coefficients[i].size());
    w.push_back(row);
  }
  j["witnesses"] = w;
  j["certified"] = report.certified;
  j["nodes"] = report.nodes;
  return j;
}

Mat random_unimodular(std::size_t k, std::mt19937_64& rng, double max_condition) {
  if (k == 0) throw InvalidArgument("random_unimodular: k must be positive");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto kk = static_cast<Eigen::Index>(k);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Mat a(kk, kk);
    for (Eigen::Index j = 0; j < kk; ++j)
      for (Eigen::Index i = 0; i < kk; ++i) a(i, j) = gauss(rng);
    const double det = a.determinant();
    if (std::abs(det) < 1e-6) continue;
    a *= std::pow(std::abs(det), -1.0 / static_cast<double>(k));
    if (det < 0) a.col(0) *= -1.0;
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& sv = svd.singularValues();
    if (sv(0) / sv(kk - 1) <= max_condition) return a;
  }
  throw InvalidArgument("random_unimodular: condition bound too tight");
}

}  // namespace dioph
