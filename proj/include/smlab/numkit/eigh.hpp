#pragma once

#include <functional>
#include <vector>

#include "smlab/numkit/complex_matrix.hpp"

namespace smlab::numkit {

struct EighOptions {
  double hermitian_tol = 1e-12;
  int max_sweeps = 100;
};

struct EighResult {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // column k pairs with eigenvalues[k]
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot entry and then applies
/// a real Givens rotation, so the accumulated eigenvector matrix stays unitary
/// to round-off. Throws NonHermitianError when max|M - M^dagger| exceeds
/// `hermitian_tol`, and ConvergenceError after `max_sweeps` sweeps.
EighResult hermitian_eigh(const ComplexMatrix& m, const EighOptions& opts = {});

/// Q f(Lambda) Q^dagger for a previously computed decomposition.
ComplexMatrix spectral_function(const EighResult& eig,
                                const std::function<Complex(double)>& f);

/// exp(coeff * H) for Hermitian H; unitary whenever coeff is imaginary.
ComplexMatrix hermitian_exp(const ComplexMatrix& h, Complex coeff);

}  // namespace smlab::numkit
