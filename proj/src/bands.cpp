#include "limper/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "limper/errors.hpp"
#include "limper/transfer.hpp"

namespace limper {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> jacobi_eigenvalues(const std::vector<double>& v, double wrap) {
  const auto p = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    h(i, i) = v[static_cast<std::size_t>(i)];
    if (i + 1 < p) h(i, i + 1) = h(i + 1, i) = 1.0;
  }
  if (p == 1) {
    h(0, 0) += 2.0 * wrap;
  } else {
    h(0, p - 1) += wrap;
    h(p - 1, 0) += wrap;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

// Bisection between a point where `pred` holds and one where it does not;
// returns the last point found on the `holds` side.
template <class Pred>
double bisect(double holds, double fails, Pred pred) {
  for (int it = 0; it < 200; ++it) {
    const double mid = holds + 0.5 * (fails - holds);
    if (mid == holds || mid == fails) break;
    if (std::fabs(fails - holds) <= 1e-15 * std::max(1.0, std::fabs(holds))) break;
    if (pred(mid)) {
      holds = mid;
    } else {
      fails = mid;
    }
  }
  return holds;
}

struct Probe {
  double e;
  BandPosition pos;
};

class LocalSearch {
 public:
  LocalSearch(const PotentialRecipe& recipe, const LocalBandOptions& options)
      : recipe_(recipe), options_(options) {}

  BandList run(double lo, double hi) {
    const int cells = std::max(1, options_.initial_cells);
    Probe left = probe(lo);
    for (int i = 1; i <= cells && !full(); ++i) {
      const double e = i == cells ? hi : lo + (hi - lo) * i / cells;
      Probe right = probe(e);
      explore(left, right);
      left = right;
    }
    return std::move(out_);
  }

 private:
  Probe probe(double e) {
    ++out_.evaluations;
    return {e, band_position(e, recipe_)};
  }

  bool inside(double e) {
    ++out_.evaluations;
    return in_spectrum(e, recipe_);
  }

  void emit(double a, double b) {
    if (!(a < b)) return;
    if (!out_.bands.empty() && out_.bands.back().beta >= a) {
      out_.bands.back().beta = std::max(out_.bands.back().beta, b);
      return;
    }
    out_.bands.push_back({a, b});
  }

  bool full() const {
    return options_.max_bands > 0 && static_cast<std::int64_t>(out_.bands.size()) >= options_.max_bands;
  }

  void explore(const Probe& a, const Probe& b) {
    if (full()) return;
    if (a.pos.label == b.pos.label) {
      // Both ends sit between the same two left edges, so the spectrum in
      // [a, b] is one piece of a single band.
      auto in = [this](double e) { return inside(e); };
      if (a.pos.in_spectrum && b.pos.in_spectrum) {
        emit(a.e, b.e);
      } else if (a.pos.in_spectrum) {
        emit(a.e, bisect(a.e, b.e, in));
      } else if (b.pos.in_spectrum) {
        emit(bisect(b.e, a.e, in), b.e);
      }
      return;
    }
    const bool budget = out_.evaluations < options_.max_evaluations;
    if (!budget) out_.budget_exhausted = true;
    if (!budget) {
      out_.unresolved += std::llabs(b.pos.label - a.pos.label);
      return;
    }
    if (b.e - a.e <= options_.resolution_floor) {
      // One left edge with the spectrum resuming at b is a located edge; the
      // band continues from b.  Between two spectral points it is touching
      // bands.  Anything else hides whole bands and is left unresolved.
      const std::int64_t jump = std::llabs(b.pos.label - a.pos.label);
      if (jump == 1 && b.pos.in_spectrum) {
        if (a.pos.in_spectrum) emit(a.e, b.e);
      } else {
        out_.unresolved += jump;
      }
      return;
    }
    const Probe mid = probe(a.e + 0.5 * (b.e - a.e));
    explore(a, mid);
    explore(mid, b);
  }

  const PotentialRecipe& recipe_;
  LocalBandOptions options_;
  BandList out_;
};

// Orientation-corrected band phase in [0, pi] of an energy inside a band
// whose left edge has trace sign `left_sign`.
double band_phase(double energy, const PotentialRecipe& recipe, int left_sign) {
  const double tr = discriminant(energy, recipe).value();
  return std::acos(std::clamp(0.5 * left_sign * tr, -1.0, 1.0));
}

}  // namespace

std::vector<Band> raw_bands(const PotentialRecipe& recipe, std::int64_t cap) {
  const std::int64_t p = recipe.period();
  if (p > cap) {
    throw PeriodTooLarge("period " + std::to_string(p) + " exceeds the eigensolver cap " +
                         std::to_string(cap) + "; use local_bands");
  }
  const std::vector<double> v = recipe.values(0, p);
  std::vector<double> edges = jacobi_eigenvalues(v, 1.0);
  const std::vector<double> anti = jacobi_eigenvalues(v, -1.0);
  edges.insert(edges.end(), anti.begin(), anti.end());
  std::sort(edges.begin(), edges.end());
  std::vector<Band> bands;
  for (std::size_t j = 0; j + 1 < edges.size(); j += 2) bands.push_back({edges[j], edges[j + 1]});
  return bands;
}

BandList band_edges_exact(const PotentialRecipe& recipe, std::int64_t cap) {
  BandList out;
  for (const Band& b : raw_bands(recipe, cap)) {
    if (!out.bands.empty() && out.bands.back().beta >= b.alpha) {
      out.bands.back().beta = std::max(out.bands.back().beta, b.beta);
    } else {
      out.bands.push_back(b);
    }
  }
  return out;
}

BandList local_bands(const PotentialRecipe& recipe, double lo, double hi,
                     const LocalBandOptions& options) {
  if (!(lo < hi)) throw InvalidArgument("local_bands window must satisfy lo < hi");
  return LocalSearch(recipe, options).run(lo, hi);
}

bool in_spectrum(double energy, const PotentialRecipe& recipe) {
  return trace_in_spectrum(discriminant(energy, recipe));
}

double dist_to_spectrum(double energy, const PotentialRecipe& recipe, double search_radius) {
  if (!(search_radius > 0.0)) throw InvalidArgument("search radius must be positive");
  const BandPosition here = band_position(energy, recipe);
  if (here.in_spectrum) return 0.0;
  auto in_gap = [&](double e) {
    const BandPosition pos = band_position(e, recipe);
    return !pos.in_spectrum && pos.label == here.label;
  };
  double best = std::numeric_limits<double>::infinity();
  if (here.label > 0) {
    const double far = energy - search_radius;
    if (!in_gap(far)) best = energy - bisect(energy, far, in_gap);
  }
  if (here.label < recipe.period()) {
    const double far = energy + search_radius;
    if (!in_gap(far)) best = std::min(best, bisect(energy, far, in_gap) - energy);
  }
  // The bisection stops on the gap side of each edge.
  return best;
}

double spectrum_infimum(const PotentialRecipe& recipe) {
  const double hi = recipe.min_value();
  const double lo = hi - 3.0;
  auto above = [&](double e) { return band_position(e, recipe).label >= 1; };
  return bisect(hi, lo, above);
}

double spectrum_measure(const BandList& bands) {
  double total = 0.0;
  for (const Band& b : bands.bands) total += b.width();
  return total;
}

double ids(double energy, const PotentialRecipe& recipe) {
  const std::vector<Band> bands = raw_bands(recipe);
  const double p = static_cast<double>(bands.size());
  std::size_t j = 0;
  while (j < bands.size() && bands[j].alpha <= energy) ++j;
  if (j == 0) return 0.0;
  const Band& b = bands[j - 1];
  if (energy >= b.beta) return static_cast<double>(j) / p;
  const int sign = discriminant(b.alpha, recipe).sign;
  const double phase = band_phase(energy, recipe, sign == 0 ? 1 : sign);
  return (static_cast<double>(j - 1) + phase / kPi) / p;
}

double thouless_lyapunov(double energy, const PotentialRecipe& recipe) {
  const std::vector<Band> bands = raw_bands(recipe);
  double total = 0.0;
  for (const Band& b : bands) {
    const int left_sign = discriminant(b.alpha, recipe).sign >= 0 ? 1 : -1;
    // Energy of band b at phase theta.
    auto energy_at = [&](double theta) {
      if (theta <= 0.0) return b.alpha;
      if (theta >= kPi) return b.beta;
      auto g = [&](double t) { return band_phase(t, recipe, left_sign) - theta; };
      boost::math::tools::eps_tolerance<double> tol(50);
      std::uintmax_t iters = 200;
      const double ga = g(b.alpha), gb = g(b.beta);
      if (ga >= 0.0) return b.alpha;
      if (gb <= 0.0) return b.beta;
      const auto r = boost::math::tools::toms748_solve(g, b.alpha, b.beta, ga, gb, tol, iters);
      return 0.5 * (r.first + r.second);
    };
    auto integrand = [&](double theta) {
      const double d = std::fabs(energy_at(theta) - energy);
      return d > 0.0 ? std::log(d) : -745.0;
    };
    double piece = 0.0;
    if (b.alpha < energy && energy < b.beta) {
      const double split = band_phase(energy, recipe, left_sign);
      boost::math::quadrature::tanh_sinh<double> ts;
      if (split > 0.0) piece += ts.integrate(integrand, 0.0, split);
      if (split < kPi) piece += ts.integrate(integrand, split, kPi);
    } else if (energy == b.alpha || energy == b.beta) {
      boost::math::quadrature::tanh_sinh<double> ts;
      piece = ts.integrate(integrand, 0.0, kPi);
    } else {
      piece = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, kPi,
                                                                             15, 1e-12);
    }
    total += piece;
  }
  return total / (kPi * static_cast<double>(bands.size()));
}

std::vector<double> truncated_eigenvalues(const PotentialRecipe& recipe, std::int64_t size) {
  if (size < 1 || size > 8192) throw InvalidArgument("truncation size must be in [1, 8192]");
  const std::vector<double> v = recipe.values(0, size);
  Eigen::VectorXd diag(size);
  Eigen::VectorXd sub(size - 1);
  for (std::int64_t i = 0; i < size; ++i) diag(i) = v[static_cast<std::size_t>(i)];
  sub.setOnes();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = solver.eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace limper
