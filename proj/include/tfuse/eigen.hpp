#pragma once

#include <stdexcept>
#include <vector>

#include "tfuse/tensor.hpp"

namespace tfuse {

class EigenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SymmetricEigen {
    std::vector<double> values;  // ascending
    Tensor vectors;              // column j is the eigenvector for values[j]
    std::size_t rotations = 0;
};

// Cyclic Jacobi eigensolver for small dense symmetric matrices. Eigenvector
// signs are fixed so the entry of largest magnitude is positive (lowest
// index on ties). Throws EigenError on asymmetric input or when the
// rotation budget of 100 n^2 is exhausted.
SymmetricEigen symmetric_eig(const Tensor& m, double tol = 1e-10);

}  // namespace tfuse
