#pragma once

#include <span>

#include "loopsurro/matrix.hpp"

// Dense kernels behind the network. Every kernel has a plain serial reference
// and an OpenMP version. Both accumulate each output element in the same order,
// so their results are bit-identical; tests and the benchmark rely on that.
namespace loopsurro::kernels {

enum class Exec { Serial, Parallel };

// Process-wide default used by the network code. Parallel unless changed.
void set_default_exec(Exec exec);
Exec default_exec();

// z = w * x + b, with b broadcast over columns. z is resized.
void affine(const Matrix& w, std::span<const double> b, const Matrix& x, Matrix& z,
            Exec exec = default_exec());

// dw = dz * x^T and db = row sums of dz. Outputs are overwritten.
void weight_grad(const Matrix& dz, const Matrix& x, Matrix& dw, std::span<double> db,
                 Exec exec = default_exec());

// dx = w^T * dz. dx is resized.
void input_grad(const Matrix& w, const Matrix& dz, Matrix& dx, Exec exec = default_exec());

void relu_inplace(Matrix& z);
// grad(i, j) = 0 wherever pre(i, j) <= 0.
void relu_mask(const Matrix& pre, Matrix& grad);

}  // namespace loopsurro::kernels
