#include "limper/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "limper/errors.hpp"
#include "limper/parallel.hpp"
#include "limper/transfer.hpp"

namespace limper {

std::vector<double> chebyshev_nodes(double lo, double hi, int count) {
  std::vector<double> out;
  if (count <= 0) return out;
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (int i = count - 1; i >= 0; --i) {
    out.push_back(mid + half * std::cos((2.0 * i + 1.0) * std::numbers::pi / (2.0 * count)));
  }
  return out;
}

std::vector<double> sample_energies(const std::vector<Band>& bands, int nodes, bool with_edges) {
  std::vector<double> out;
  for (const Band& b : bands) {
    if (with_edges) out.push_back(b.alpha);
    const std::vector<double> inner = chebyshev_nodes(b.alpha, b.beta, nodes);
    out.insert(out.end(), inner.begin(), inner.end());
    if (with_edges) out.push_back(b.beta);
  }
  return out;
}

SampledSup sampled_sup(const std::vector<Band>& bands, bool with_edges,
                       const std::function<double(double)>& f, const SamplingPolicy& policy) {
  SampledSup best;
  int nodes = std::max(policy.nodes_per_band, 1);
  bool first = true;
  while (true) {
    const std::vector<double> energies = sample_energies(bands, nodes, with_edges);
    std::vector<double> values(energies.size());
    parallel_for(energies.size(), policy.threads, [&](std::size_t i) { values[i] = f(energies[i]); });
    SampledSup cur;
    cur.sup = -std::numeric_limits<double>::infinity();
    cur.samples = static_cast<std::int64_t>(energies.size());
    cur.nodes_per_band = nodes;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] > cur.sup) {
        cur.sup = values[i];
        cur.argmax = energies[i];
      }
    }
    if (energies.empty()) {
      cur.sup = 0.0;
      cur.converged = true;
      return cur;
    }
    if (!first && std::fabs(cur.sup - best.sup) < policy.convergence) {
      cur.converged = true;
      if (best.sup > cur.sup) {
        cur.sup = best.sup;
        cur.argmax = best.argmax;
      }
      return cur;
    }
    if (!first && best.sup > cur.sup) {
      cur.sup = best.sup;
      cur.argmax = best.argmax;
    }
    best = cur;
    first = false;
    if (nodes * 2 > policy.max_nodes_per_band) return best;
    nodes *= 2;
  }
}

double period_growth(double energy, const PotentialRecipe& recipe) {
  return monodromy(energy, recipe).log_norm() / static_cast<double>(recipe.period());
}

double smallness_target(std::int64_t l, std::int64_t k) {
  double t = 0.0;
  for (std::int64_t s = l + 1; s <= k + 1; ++s) t += std::ldexp(1.0, -static_cast<int>(s));
  return t;
}

SmallnessMargin certify_smallness(const PotentialRecipe& recipe, const std::vector<Band>& sample_bands,
                                  bool with_edges, std::int64_t l, std::int64_t k,
                                  const SamplingPolicy& policy) {
  SmallnessMargin row;
  row.l = l;
  row.target = smallness_target(l, k);
  const SampledSup s = sampled_sup(
      sample_bands, with_edges, [&](double e) { return period_growth(e, recipe); }, policy);
  row.sup = s.sup;
  row.argmax = s.argmax;
  row.samples = s.samples;
  row.converged = s.converged;
  row.pass = !sample_bands.empty() && row.sup <= row.target + kSmallnessTolerance;
  return row;
}

GrowthLength min_growth_length(const PotentialRecipe& recipe, double mu, const std::vector<Band>& bands,
                               const SamplingPolicy& policy, int max_exponent) {
  if (!(mu > 0.0)) throw InvalidArgument("min_growth_length needs mu > 0");
  const std::vector<double> energies = sample_energies(bands, policy.nodes_per_band, true);
  if (energies.empty()) throw InvalidArgument("min_growth_length needs at least one band");
  max_exponent = std::min(max_exponent, 61);

  GrowthLength out;
  std::vector<double> values(energies.size());
  auto level = [&](int i) {
    if (static_cast<std::size_t>(i) < out.transcript.size()) return out.transcript[static_cast<std::size_t>(i)];
    const std::int64_t n = std::int64_t{1} << i;
    parallel_for(energies.size(), policy.threads, [&](std::size_t j) {
      values[j] = fast_transfer(energies[j], recipe, n).log_norm() / static_cast<double>(n);
    });
    const double worst = *std::max_element(values.begin(), values.end());
    out.transcript.push_back(worst);
    return worst;
  };

  int found = -1;
  for (int i = 0; i <= max_exponent; ++i) {
    if (level(i) > 0.5 * mu) continue;
    bool holds = true;
    for (int extra = 1; extra <= 2 && i + extra <= max_exponent; ++extra) {
      if (level(i + extra) > 0.5 * mu) {
        holds = false;
        break;
      }
    }
    if (holds) {
      found = i;
      break;
    }
  }
  if (found < 0) {
    const double best = *std::min_element(out.transcript.begin(), out.transcript.end());
    throw StageFailure("growth bound mu/2 = " + std::to_string(0.5 * mu) +
                       " not reached up to length 2^" + std::to_string(max_exponent) +
                       "; best sampled value " + std::to_string(best));
  }
  out.doubling_exponent = found;
  out.achieved = out.transcript[static_cast<std::size_t>(found)];
  const std::int64_t block = std::int64_t{1} << found;

  double need = 0.0;  // max over r of (2 log||A_r|| / mu - r)
  if (static_cast<double>(block) * static_cast<double>(energies.size()) <= 16777216.0) {
    out.exact_remainder = true;
    std::vector<double> worst(energies.size(), 0.0);
    parallel_for(energies.size(), policy.threads, [&](std::size_t j) {
      ScaledMatrix2 a;
      double w = 0.0;
      for (std::int64_t r = 1; r < block; ++r) {
        a = step_matrix(energies[j], recipe(r - 1)) * a;
        w = std::max(w, 2.0 * a.log_norm() / mu - static_cast<double>(r));
      }
      worst[j] = w;
    });
    need = *std::max_element(worst.begin(), worst.end());
  } else {
    // ||T(E, v)|| <= 2 + |E| + |v|, so log||A_r|| <= r c.
    double emax = 0.0;
    for (double e : energies) emax = std::max(emax, std::fabs(e));
    const double c = std::log(2.0 + emax + recipe.sup_norm());
    need = (2.0 * c / mu - 1.0) * static_cast<double>(block);
  }
  out.remainder_factor = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(need / static_cast<double>(block))));
  if (static_cast<double>(out.remainder_factor) * static_cast<double>(block) > 4.0e18) {
    throw PeriodOverflow("growth length exceeds the 63-bit range");
  }
  out.length = out.remainder_factor * block;
  return out;
}

}  // namespace limper
