#include "nld/matrix_exponential.hpp"

#include <cmath>

#include <Eigen/LU>

#include "nld/errors.hpp"

namespace nld {

namespace {

constexpr double theta13 = 5.371920351148152;

constexpr double pade13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                             1187353796428800.0,  129060195264000.0,   10559470521600.0,
                             670442572800.0,      33522128640.0,       1323241920.0,
                             40840800.0,          960960.0,            16380.0,
                             182.0,               1.0};

double one_norm(const Eigen::MatrixXd& A) { return A.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  require(A.rows() == A.cols(), ErrorKind::invalid_argument, "expm needs a square matrix");
  require(A.allFinite(), ErrorKind::invalid_argument, "expm needs finite entries");
  const auto n = A.rows();
  const double norm = one_norm(A);
  int squarings = 0;
  if (norm > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  const Eigen::MatrixXd S = A / std::ldexp(1.0, squarings);

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd S2 = S * S;
  const Eigen::MatrixXd S4 = S2 * S2;
  const Eigen::MatrixXd S6 = S4 * S2;
  const double* b = pade13;
  const Eigen::MatrixXd U =
      S * (S6 * (b[13] * S6 + b[11] * S4 + b[9] * S2) + b[7] * S6 + b[5] * S4 + b[3] * S2 + b[1] * I);
  const Eigen::MatrixXd V =
      S6 * (b[12] * S6 + b[10] * S4 + b[8] * S2) + b[6] * S6 + b[4] * S4 + b[2] * S2 + b[0] * I;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(V - U);
  Eigen::MatrixXd R = lu.solve(V + U);
  for (int k = 0; k < squarings; ++k) R = (R * R).eval();
  require(R.allFinite(), ErrorKind::numerical_failure, "matrix exponential overflowed");
  return R;
}

}  // namespace nld
