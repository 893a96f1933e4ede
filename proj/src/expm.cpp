#include "lqs/expm.hpp"

#include <cmath>

namespace lqs {

namespace {

template <class Mat>
Mat expm_pade13(const Mat& A0) {
  using Scalar = typename Mat::Scalar;
  const Eigen::Index n = A0.rows();
  if (A0.cols() != n) throw DimensionError("expm: matrix must be square");
  if (n == 0) return A0;

  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = A0.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  const Mat A = A0 / static_cast<Scalar>(std::ldexp(1.0, s));

  const Mat I = Mat::Identity(n, n);
  const Mat A2 = A * A, A4 = A2 * A2, A6 = A4 * A2;
  const Mat U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 +
                     b[1] * I);
  const Mat V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  Mat R = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < s; ++i) R = (R * R).eval();
  return R;
}

}  // namespace

CMat expm(const CMat& A) { return expm_pade13(A); }
RMat expm(const RMat& A) { return expm_pade13(A); }

}  // namespace lqs
