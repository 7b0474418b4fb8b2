#include "nmfem/random.hpp"

#include <cmath>

#include "nmfem/errors.hpp"
#include "nmfem/likelihood.hpp"

namespace nmfem {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// log of a Gamma(shape, 1) draw. For shape < 1 uses
// Gamma(a) = Gamma(a + 1) * U^(1/a), evaluated in log space.
double log_gamma_draw(Rng& rng, double shape) {
  if (shape >= 1.0) {
    std::gamma_distribution<double> gamma(shape, 1.0);
    double g = 0.0;
    while (g <= 0.0) g = gamma(rng);
    return std::log(g);
  }
  std::gamma_distribution<double> gamma(shape + 1.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double g = 0.0;
  while (g <= 0.0) g = gamma(rng);
  double u = 0.0;
  while (u <= 0.0) u = unif(rng);
  return std::log(g) + std::log(u) / shape;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index) {
  return splitmix64(splitmix64(root ^ fnv1a(stream)) + splitmix64(index));
}

Vector sample_dirichlet(Rng& rng, Eigen::Index dim, double alpha) {
  if (dim < 1 || !(alpha > 0.0)) throw InvalidArgument("Dirichlet needs dim >= 1 and alpha > 0");
  Eigen::RowVectorXd logs(dim);
  for (Eigen::Index j = 0; j < dim; ++j) logs[j] = log_gamma_draw(rng, alpha);
  const double norm = log_sum_exp(logs);
  Vector out = (logs.array() - norm).exp().transpose();
  out /= out.sum();
  return out;
}

Matrix sample_dirichlet_columns(Rng& rng, Eigen::Index rows, Eigen::Index cols, double alpha) {
  Matrix out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) out.col(c) = sample_dirichlet(rng, rows, alpha);
  return out;
}

}  // namespace nmfem
