#include "medix/bounds.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "medix/io.hpp"
#include "medix/parallel.hpp"

namespace medix {

namespace {

struct SplitSizes {
  std::size_t m_in = 0;
  std::size_t m_out = 0;
};

// sigma = 0 is the point-mass limit: legal for the statement-form inlier
// bound and the simulators; forms that divide by sigma check positivity
// themselves.
SplitSizes validate_common(const BoundInputs& in) {
  if (in.sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  if (!(in.pi > 0.0 && in.pi < 1.0)) throw std::invalid_argument("pi outside (0,1)");
  if (!(in.delta > 0.0 && in.delta < 1.0))
    throw std::invalid_argument("delta outside (0,1)");
  if (in.m < 1 || in.d < 1) throw std::invalid_argument("m and d must be positive");
  SplitSizes s;
  s.m_in = split_m_in(in.pi, in.m);
  s.m_out = in.m - s.m_in;
  if (s.m_in < 1 || s.m_out < 1)
    throw std::invalid_argument("split leaves an empty side");
  return s;
}

double resolve_eps(const BoundInputs& in, std::size_t m_in) {
  if (in.eps_dev < 0.0) throw std::invalid_argument("eps_dev must be non-negative");
  return in.eps_dev == 0.0 ? default_epsilon(in.sigma, in.d, m_in) : in.eps_dev;
}

BoundValue flag(double value) { return BoundValue{value, value > 1.0}; }

double sampling_term(double delta, std::size_t n) {
  return std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

}  // namespace

double default_epsilon(double sigma, std::size_t d, std::size_t m_in) {
  if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  if (d < 1 || m_in < 1) throw std::invalid_argument("d and m_in must be positive");
  return sigma * std::sqrt(2.0 * std::log(2.0 * static_cast<double>(d) *
                                          static_cast<double>(m_in)));
}

BoundValue inlier_bound(const BoundInputs& in) {
  const SplitSizes s = validate_common(in);
  const double m_in = static_cast<double>(s.m_in);
  return flag(1.0 / m_in + 2.0 * sampling_term(in.delta, s.m_in) +
              in.pi / (2.0 * (1.0 - in.pi)));
}

BoundValue inlier_bound_proof_form(const BoundInputs& in) {
  const SplitSizes s = validate_common(in);
  if (in.sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  const double eps = resolve_eps(in, s.m_in);
  const double eta = 2.0 * static_cast<double>(in.d) *
                         std::exp(-eps * eps / (2.0 * in.sigma * in.sigma)) +
                     sampling_term(in.delta, s.m_in);
  return flag(2.0 * eta + in.pi / (2.0 * (1.0 - in.pi)));
}

BoundValue outlier_bound(const BoundInputs& in) {
  const SplitSizes s = validate_common(in);
  if (in.sigma_out <= 0.0) throw std::invalid_argument("sigma_out must be positive");
  if (in.Delta <= 0.0) throw std::invalid_argument("Delta must be positive");
  const double eps = resolve_eps(in, s.m_in);
  if (eps >= in.Delta) throw std::invalid_argument("separation violated");
  const double gap = in.Delta - eps;
  return flag(2.0 * static_cast<double>(in.d) *
                  std::exp(-gap * gap / (2.0 * in.sigma_out * in.sigma_out)) +
              sampling_term(in.delta, s.m_out) + (1.0 - in.pi) / (2.0 * in.pi));
}

BoundValue inlier_bound_heavy_tail(const BoundInputs& in) {
  const SplitSizes s = validate_common(in);
  const double eps = resolve_eps(in, s.m_in);
  if (eps <= in.sigma) throw std::invalid_argument("tolerance below noise level");
  const double var = in.sigma * in.sigma;
  if (in.mu4 < var * var) throw std::invalid_argument("mu4 below sigma^4");
  const double spread = eps * eps - var;
  const double moment =
      (in.mu4 - var * var) / (static_cast<double>(in.d) * spread * spread);
  return flag(2.0 * (moment + sampling_term(in.delta, s.m_in)) +
              in.pi / (2.0 * (1.0 - in.pi)));
}

double estimate_sigma(const Matrix& gradients) {
  validate_gradients(gradients);
  if (gradients.rows < 2) throw std::invalid_argument("need at least two rows");
  const std::size_t m = gradients.rows, d = gradients.cols;
  double worst = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += gradients(i, j);
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double dev = gradients(i, j) - mean;
      ss += dev * dev;
    }
    worst = std::max(worst, ss / static_cast<double>(m - 1));
  }
  return std::sqrt(worst);
}

const char* bound_kind_name(BoundKind k) {
  switch (k) {
    case BoundKind::inlier: return "inlier";
    case BoundKind::inlier_heavy_tail: return "inlier-heavy-tail";
    case BoundKind::outlier: return "outlier";
  }
  return "?";
}

BoundKind parse_bound_kind(const std::string& name) {
  if (name == "inlier") return BoundKind::inlier;
  if (name == "inlier-heavy-tail") return BoundKind::inlier_heavy_tail;
  if (name == "outlier") return BoundKind::outlier;
  throw std::invalid_argument("unknown bound kind: " + name);
}

FilterConfig coverage_policy(const CoverageScenario& scn) {
  if (scn.m < 2) throw std::invalid_argument("m must be at least 2");
  if (scn.sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
  if (scn.pi <= 0.0 || scn.pi >= 1.0) throw std::invalid_argument("pi outside (0,1)");
  const double dm = static_cast<double>(scn.m);
  const double noise_floor =
      std::sqrt(std::acos(-1.0) / 2.0) * scn.sigma * std::sqrt(2.0 * std::log(dm)) / dm;
  const auto budget =
      static_cast<std::size_t>(std::ceil(1.15 * scn.pi * dm));
  FilterConfig cfg;
  cfg.eps_stop = 1e-3 * noise_floor;
  cfg.k = std::max<std::size_t>(1, scn.m / 50);
  cfg.T = (budget + cfg.k - 1) / cfg.k;
  return cfg;
}

CoverageResult monte_carlo_coverage(const CoverageScenario& scn, BoundKind kind,
                                    std::size_t trials, std::uint64_t seed,
                                    unsigned threads) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  BoundInputs in;
  in.sigma = scn.sigma;
  in.sigma_out = scn.sigma;
  in.mu4 = scn.tail == Tail::gaussian
               ? 3.0 * std::pow(scn.sigma, 4)
               : 3.0 * (static_cast<double>(scn.nu) - 2.0) /
                     (static_cast<double>(scn.nu) - 4.0) * std::pow(scn.sigma, 4);
  in.pi = scn.pi;
  in.m = scn.m;
  in.d = scn.d;
  in.delta = scn.delta;
  in.Delta = scn.Delta;
  in.eps_dev = scn.eps_dev;

  CoverageResult res;
  switch (kind) {
    case BoundKind::inlier: res.bound = inlier_bound(in); break;
    case BoundKind::inlier_heavy_tail: res.bound = inlier_bound_heavy_tail(in); break;
    case BoundKind::outlier: res.bound = outlier_bound(in); break;
  }
  const double cap = std::min(1.0, res.bound.value);

  res.records.assign(trials, TrialRecord{});
  const Vec mu_in(scn.d, 0.0);
  parallel_chunks(trials, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      const GradientWorld world =
          simulate_gradient_world(mu_in, scn.sigma, scn.Delta, scn.pi, scn.m, scn.d,
                                  scn.tail, scn.nu, seed + t);
      const FilterResult fr = medix_filter(world.gradients, mu_in, scn.policy);

      std::size_t m_in = 0, m_out = 0, flagged_in = 0, surviving_out = 0;
      for (Origin o : world.origin) (o == Origin::ind ? m_in : m_out)++;
      for (std::uint32_t id : fr.outlier_ids)
        flagged_in += (world.origin[id] == Origin::ind);
      for (std::uint32_t id : fr.survivor_ids)
        surviving_out += (world.origin[id] == Origin::ood);

      TrialRecord& rec = res.records[t];
      rec.trial = t;
      rec.err_in = static_cast<double>(flagged_in) / static_cast<double>(m_in);
      rec.err_out = static_cast<double>(surviving_out) / static_cast<double>(m_out);
      rec.bound = res.bound.value;
      const double checked = kind == BoundKind::outlier ? rec.err_out : rec.err_in;
      rec.within = checked <= cap;
    }
  });

  std::size_t hits = 0;
  for (const TrialRecord& rec : res.records) hits += rec.within;
  res.coverage = static_cast<double>(hits) / static_cast<double>(trials);
  return res;
}

void write_coverage_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << "trial,err_in,err_out,bound,within\n";
  for (const TrialRecord& rec : records)
    f << rec.trial << ',' << format_double(rec.err_in) << ','
      << format_double(rec.err_out) << ',' << format_double(rec.bound) << ','
      << (rec.within ? 1 : 0) << '\n';
}

}  // namespace medix
