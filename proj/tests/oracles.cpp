#include "oracles.hpp"

#include <lapacke.h>

#include <stdexcept>

namespace oracles {

EigenPair lowest_eigenpair(std::vector<double> h, std::size_t n, bool want_vector) {
  const auto ln = static_cast<lapack_int>(n);
  std::vector<double> w(n), z(want_vector ? n : 1);
  std::vector<lapack_int> isuppz(2);
  lapack_int m = 0;
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_ROW_MAJOR, want_vector ? 'V' : 'N', 'I', 'U', ln, h.data(), ln, 0.0, 0.0, 1, 1,
      0.0, &m, w.data(), z.data(), 1, isuppz.data());
  if (info != 0 || m < 1) throw std::runtime_error("dsyevr failed");
  EigenPair out;
  out.value = w[0];
  if (want_vector) out.vector = std::move(z);
  return out;
}

}  // namespace oracles
