#pragma once

#include "loopsurro/matrix.hpp"
#include "loopsurro/problems.hpp"

// Batched losses over column samples and their gradients w.r.t. the
// predictions. Every gradient already carries the 1/n batch factor.
namespace loopsurro {

// (1 / 2n) sum_i ||f(x_i, yhat_i)||^2. DivergedError names the first sample
// with a non-finite residual.
double residual_loss(const ResidualSystem& system, const Matrix& x, const Matrix& yhat);
// Column i: J(x_i, yhat_i)^T f(x_i, yhat_i) / n.
Matrix residual_loss_gradient(const ResidualSystem& system, const Matrix& x, const Matrix& yhat);
double residual_loss_and_gradient(const ResidualSystem& system, const Matrix& x,
                                  const Matrix& yhat, Matrix& grad);

// (1 / 2n) sum_i ||yhat_i - y_i||^2. A single-column y is broadcast.
double mse_loss(const Matrix& yhat, const Matrix& y);
Matrix mse_loss_gradient(const Matrix& yhat, const Matrix& y);

// lambda * residual + (1 - lambda) * mse. y may be null only when lambda == 1.
double semi_supervised_loss(const ResidualSystem& system, const Matrix& x, const Matrix& yhat,
                            const Matrix* y, double lambda);
Matrix semi_supervised_loss_gradient(const ResidualSystem& system, const Matrix& x,
                                     const Matrix& yhat, const Matrix* y, double lambda);
double semi_supervised_loss_and_gradient(const ResidualSystem& system, const Matrix& x,
                                         const Matrix& yhat, const Matrix* y, double lambda,
                                         Matrix& grad);

}  // namespace loopsurro
