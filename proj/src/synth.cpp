#include "medix/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "medix/rng.hpp"

namespace medix {

MixtureSpec default_mixture_spec(std::uint64_t seed) {
  const double h = 2.0 * std::sqrt(3.0);
  MixtureSpec spec;
  spec.class_means = {{-2.0, 0.0}, {2.0, 0.0}, {0.0, h}};
  spec.ood_mean = {20.0, h};
  spec.seed = seed;
  return spec;
}

namespace {

void sample_gaussian_rows(Matrix& out, std::size_t first_row, std::size_t n,
                          const Vec& mean, double cov_scale, rng::Philox& rng) {
  const double sd = std::sqrt(cov_scale);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < mean.size(); ++j)
      out(first_row + i, j) = mean[j] + sd * rng.normal();
}

template <typename SwapFn>
void shuffle_n(std::size_t n, rng::Philox& rng, SwapFn&& swap_rows) {
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.below(i);
    if (j != i - 1) swap_rows(i - 1, j);
  }
}

}  // namespace

GaussianWorld gaussian_world(const MixtureSpec& spec) {
  if (spec.class_means.empty()) throw std::invalid_argument("no class means");
  const std::size_t p = spec.class_means[0].size();
  for (const Vec& mu : spec.class_means)
    if (mu.size() != p) throw std::invalid_argument("class mean dimension mismatch");
  if (spec.ood_mean.size() != p) throw std::invalid_argument("OOD mean dimension mismatch");
  if (spec.n_per_class < 1 || spec.n_ood < 1) throw std::invalid_argument("counts must be >= 1");
  if (spec.cov_scale < 0.0 || spec.ood_cov_scale < 0.0)
    throw std::invalid_argument("covariance scale must be non-negative");

  const std::size_t K = spec.class_means.size();
  const std::size_t n_train = K * spec.n_per_class;
  const std::size_t m_wild = K * spec.n_per_class + spec.n_ood;
  rng::Philox rng(spec.seed, /*stream=*/0x776f726c64ULL);  // "world"

  GaussianWorld world;
  world.train.features = Matrix(n_train, p);
  world.train.labels.resize(n_train);
  world.train.num_classes = static_cast<int>(K);
  world.wild.features = Matrix(m_wild, p);
  world.wild.origin.assign(m_wild, Origin::ind);

  // Per class: n_per_class fresh draws for train, then n_per_class for wild,
  // keeping the splits disjoint by construction.
  std::size_t wrow = 0;
  for (std::size_t c = 0; c < K; ++c) {
    sample_gaussian_rows(world.train.features, c * spec.n_per_class, spec.n_per_class,
                         spec.class_means[c], spec.cov_scale, rng);
    std::fill_n(world.train.labels.begin() + c * spec.n_per_class, spec.n_per_class,
                static_cast<int>(c));
    sample_gaussian_rows(world.wild.features, wrow, spec.n_per_class,
                         spec.class_means[c], spec.cov_scale, rng);
    wrow += spec.n_per_class;
  }
  sample_gaussian_rows(world.wild.features, wrow, spec.n_ood, spec.ood_mean,
                       spec.ood_cov_scale, rng);
  std::fill(world.wild.origin.begin() + wrow, world.wild.origin.end(), Origin::ood);

  shuffle_n(m_wild, rng, [&](std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < p; ++j)
      std::swap(world.wild.features(a, j), world.wild.features(b, j));
    std::swap(world.wild.origin[a], world.wild.origin[b]);
  });
  return world;
}

WildSet make_wild(const WildSet& ind_pool, const WildSet& ood_pool, double pi,
                  std::size_t m, std::uint64_t seed) {
  if (!(pi > 0.0 && pi <= 1.0)) throw std::invalid_argument("pi outside (0,1]");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (ind_pool.features.cols != ood_pool.features.cols)
    throw std::invalid_argument("pool feature dimension mismatch");
  const std::size_t m_in = split_m_in(pi, m);
  const std::size_t m_out = m - m_in;
  if (m_in > ind_pool.size() || m_out > ood_pool.size())
    throw std::invalid_argument("insufficient pool");

  const bool with_pseudo = !ind_pool.pseudo_labels.empty() && !ood_pool.pseudo_labels.empty();
  const bool with_grads = !ind_pool.gradients.empty() && !ood_pool.gradients.empty();
  if (with_grads && ind_pool.gradients.cols != ood_pool.gradients.cols)
    throw std::invalid_argument("pool gradient dimension mismatch");

  rng::Philox rng(seed, /*stream=*/0x77696c64ULL);  // "wild"
  const auto pick = [&](std::size_t pool_size, std::size_t count) {
    std::vector<std::uint32_t> ids(pool_size);
    std::iota(ids.begin(), ids.end(), 0u);
    for (std::size_t i = 0; i < count; ++i)  // partial Fisher-Yates
      std::swap(ids[i], ids[i + rng.below(pool_size - i)]);
    ids.resize(count);
    return ids;
  };
  const auto ind_ids = pick(ind_pool.size(), m_in);
  const auto ood_ids = pick(ood_pool.size(), m_out);

  WildSet wild;
  wild.features = Matrix(m, ind_pool.features.cols);
  wild.origin.resize(m);
  if (with_pseudo) wild.pseudo_labels.resize(m);
  if (with_grads) wild.gradients = Matrix(m, ind_pool.gradients.cols);

  const auto put = [&](std::size_t row, const WildSet& pool, std::size_t src, Origin o) {
    std::copy(pool.features.row(src).begin(), pool.features.row(src).end(),
              wild.features.row(row).begin());
    wild.origin[row] = o;
    if (with_pseudo) wild.pseudo_labels[row] = pool.pseudo_labels[src];
    if (with_grads)
      std::copy(pool.gradients.row(src).begin(), pool.gradients.row(src).end(),
                wild.gradients.row(row).begin());
  };
  for (std::size_t i = 0; i < m_in; ++i) put(i, ind_pool, ind_ids[i], Origin::ind);
  for (std::size_t i = 0; i < m_out; ++i) put(m_in + i, ood_pool, ood_ids[i], Origin::ood);

  shuffle_n(m, rng, [&](std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < wild.features.cols; ++j)
      std::swap(wild.features(a, j), wild.features(b, j));
    std::swap(wild.origin[a], wild.origin[b]);
    if (with_pseudo) std::swap(wild.pseudo_labels[a], wild.pseudo_labels[b]);
    if (with_grads)
      for (std::size_t j = 0; j < wild.gradients.cols; ++j)
        std::swap(wild.gradients(a, j), wild.gradients(b, j));
  });
  return wild;
}

GradientWorld simulate_gradient_world(const Vec& mu_in, double sigma, double Delta,
                                      double pi, std::size_t m, std::size_t d, Tail tail,
                                      unsigned nu, std::uint64_t seed) {
  if (mu_in.size() != d) throw std::invalid_argument("mu_in dimension mismatch");
  if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  if (Delta < 0.0) throw std::invalid_argument("Delta must be non-negative");
  if (!(pi >= 0.0 && pi <= 1.0)) throw std::invalid_argument("pi outside [0,1]");
  if (m < 1 || d < 1) throw std::invalid_argument("m and d must be >= 1");
  if (tail == Tail::student_t && nu <= 4)
    throw std::invalid_argument("fourth moment unbounded");

  rng::Philox rng(seed, /*stream=*/0x67726164ULL);  // "grad"
  const std::size_t m_in = split_m_in(pi, m);
  const std::size_t m_out = m - m_in;

  // Random unit direction, scaled so the mean gap is exactly Delta*sqrt(d).
  Vec u(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& v : u) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
  } while (norm == 0.0);
  GradientWorld world;
  world.mu_out = mu_in;
  const double gap = Delta * std::sqrt(static_cast<double>(d));
  for (std::size_t j = 0; j < d; ++j) world.mu_out[j] += gap * u[j] / norm;

  // Student-t scaled to unit variance, then by sigma.
  const double t_scale =
      tail == Tail::student_t
          ? std::sqrt((static_cast<double>(nu) - 2.0) / static_cast<double>(nu))
          : 1.0;
  const auto noise = [&]() {
    return tail == Tail::gaussian ? sigma * rng.normal()
                                  : sigma * t_scale * rng.student_t(nu);
  };

  world.gradients = GradientMatrix(m, d);
  world.origin.assign(m, Origin::ind);
  for (std::size_t i = 0; i < m_in; ++i)
    for (std::size_t j = 0; j < d; ++j) world.gradients(i, j) = mu_in[j] + noise();
  for (std::size_t i = m_in; i < m; ++i) {
    world.origin[i] = Origin::ood;
    for (std::size_t j = 0; j < d; ++j) world.gradients(i, j) = world.mu_out[j] + noise();
  }
  (void)m_out;
  return world;
}

}  // namespace medix
