#pragma once

#include <cstddef>
#include <string_view>

#include "smlab/numkit/complex_matrix.hpp"
#include "smlab/numkit/rng.hpp"

namespace smlab::numkit {

enum class HaarMethod { gram_schmidt, column_wise };

HaarMethod parse_haar_method(std::string_view name);
std::string_view to_string(HaarMethod m);

struct QrResult {
  ComplexMatrix q;
  ComplexMatrix r;
};

/// Modified Gram-Schmidt QR with one re-orthogonalization pass.
/// Throws NumericalError on a rank-deficient column.
QrResult qr_gram_schmidt(const ComplexMatrix& a);

/// n x n matrix of i.i.d. complex standard normals (Ginibre ensemble).
ComplexMatrix ginibre(std::size_t n, RngStream& rng);

/// Haar-distributed unitary.
///
/// gram_schmidt: QR of a Ginibre matrix, then column k is multiplied by
/// conj(R_kk)/|R_kk| so the result does not depend on the QR phase
/// convention. column_wise: first column uniform on the unit sphere, each
/// further column drawn from the orthogonal complement of the previous ones.
ComplexMatrix haar_unitary(std::size_t n, RngStream& rng, HaarMethod method);

}  // namespace smlab::numkit
