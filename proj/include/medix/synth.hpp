#pragma once
// Synthetic worlds: the 2-D Gaussian-mixture setup, Huber-mixture wild-set
// assembly, and raw gradient-matrix simulators for bound verification.
// All sampling runs on the Philox engine in rng.hpp, so every generator is
// bit-reproducible per (spec, seed).

#include <cstdint>
#include <vector>

#include "medix/dataset.hpp"
#include "medix/matrix.hpp"

namespace medix {

struct MixtureSpec {
  std::vector<Vec> class_means;
  double cov_scale = 0.25;  // isotropic covariance multiplier
  Vec ood_mean;
  double ood_cov_scale = 0.25;
  std::size_t n_per_class = 200;
  std::size_t n_ood = 600;
  std::uint64_t seed = 0;
};

// Three InD Gaussians at [-2,0], [2,0], [0,2*sqrt(3)] with 0.25*I covariance
// and OOD at [20, 2*sqrt(3)]; counts give pi = 0.5.
MixtureSpec default_mixture_spec(std::uint64_t seed = 0);

struct GaussianWorld {
  LabeledDataset train;  // n_per_class per class
  WildSet wild;          // n_per_class per class (fresh draws) + n_ood, shuffled
};

// The train split and the wild InD rows are disjoint draws.
GaussianWorld gaussian_world(const MixtureSpec& spec);

// Huber mixture: floor((1-pi)*m) InD rows and the rest OOD, sampled from the
// pools without replacement and shuffled. Carries origin, pseudo labels and
// gradients when the pools have them.
WildSet make_wild(const WildSet& ind_pool, const WildSet& ood_pool, double pi,
                  std::size_t m, std::uint64_t seed);

enum class Tail { gaussian, student_t };

struct GradientWorld {
  GradientMatrix gradients;  // InD rows first, then OOD
  std::vector<Origin> origin;
  Vec mu_out;  // realized OOD mean, ||mu_out - mu_in|| = Delta*sqrt(d)
};

// InD rows iid around mu_in, per-coordinate standard deviation exactly sigma;
// OOD rows shifted by Delta*sqrt(d) along a random unit direction. Student-t
// draws are scaled by sqrt((nu-2)/nu) so their sd is also sigma, which makes
// the per-coordinate fourth moment 3*(nu-2)/(nu-4)*sigma^4 analytically.
GradientWorld simulate_gradient_world(const Vec& mu_in, double sigma, double Delta,
                                      double pi, std::size_t m, std::size_t d, Tail tail,
                                      unsigned nu, std::uint64_t seed);

// InD/OOD row counts used by every Huber-mixture assembler here.
inline std::size_t split_m_in(double pi, std::size_t m) {
  return static_cast<std::size_t>((1.0 - pi) * static_cast<double>(m) + 1e-9);
}

}  // namespace medix
