#include "limper/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "limper/errors.hpp"

namespace limper {

namespace {

constexpr std::int64_t kMaxPeriod = std::int64_t{1} << 62;

std::int64_t checked_mul(std::int64_t x, std::int64_t y) {
  if (x != 0 && y > kMaxPeriod / x) {
    throw PeriodOverflow("period exceeds 2^62: " + std::to_string(x) + " * " +
                         std::to_string(y));
  }
  return x * y;
}

std::int64_t floor_mod(std::int64_t n, std::int64_t p) {
  std::int64_t r = n % p;
  return r < 0 ? r + p : r;
}

}  // namespace

PotentialRecipe::PotentialRecipe() : PotentialRecipe(std::vector<StepRun>{{0.0, 1}}) {}

PotentialRecipe::PotentialRecipe(std::vector<StepRun> base) : base_(std::move(base)) {
  if (base_.empty()) throw InvalidArgument("potential base must have at least one run");
  for (const StepRun& run : base_) {
    if (run.length < 1) throw InvalidArgument("run length must be positive");
    if (!std::isfinite(run.value)) throw InvalidArgument("potential values must be finite");
  }
  rebuild();
}

PotentialRecipe PotentialRecipe::constant(double c) { return PotentialRecipe({{c, 1}}); }

PotentialRecipe PotentialRecipe::from_values(const std::vector<double>& values) {
  std::vector<StepRun> runs;
  runs.reserve(values.size());
  for (double v : values) runs.push_back({v, 1});
  return PotentialRecipe(std::move(runs));
}

void PotentialRecipe::rebuild() {
  run_starts_.clear();
  std::int64_t p = 0;
  for (const StepRun& run : base_) {
    run_starts_.push_back(p);
    p += run.length;
    if (p > kMaxPeriod) throw PeriodOverflow("base period exceeds 2^62");
  }
  periods_.assign(1, p);
  for (const StageOverlay& ov : overlays_) {
    if (ov.refinement < 1 || ov.copies < 1) {
      throw InvalidArgument("overlay refinement and copies must be positive");
    }
    const std::int64_t blocks = ov.copies + static_cast<std::int64_t>(ov.shifts.size());
    periods_.push_back(checked_mul(checked_mul(periods_.back(), ov.refinement), blocks));
  }
}

PotentialRecipe PotentialRecipe::with_overlay(const StageOverlay& overlay) const {
  PotentialRecipe out = *this;
  out.overlays_.push_back(overlay);
  out.rebuild();
  return out;
}

PotentialRecipe PotentialRecipe::truncated(std::size_t levels) const {
  PotentialRecipe out = *this;
  out.overlays_.resize(std::min(levels, overlays_.size()));
  out.rebuild();
  return out;
}

PotentialRecipe PotentialRecipe::without_trailing_repeats() const {
  std::size_t keep = overlays_.size();
  while (keep > 0 && overlays_[keep - 1].shifts.empty()) --keep;
  return truncated(keep);
}

PotentialRecipe PotentialRecipe::shifted(double c) const {
  PotentialRecipe out = *this;
  for (StepRun& run : out.base_) run.value += c;
  return out;
}

double PotentialRecipe::base_value(std::int64_t r) const {
  auto it = std::upper_bound(run_starts_.begin(), run_starts_.end(), r);
  return base_[static_cast<std::size_t>(it - run_starts_.begin()) - 1].value;
}

double PotentialRecipe::operator()(std::int64_t n) const {
  std::int64_t r = floor_mod(n, period());
  double shift = 0.0;
  for (std::size_t t = overlays_.size(); t-- > 0;) {
    const StageOverlay& ov = overlays_[t];
    const std::int64_t block_len = periods_[t] * ov.refinement;
    const std::int64_t block = r / block_len;
    if (block >= ov.copies) shift += ov.shifts[static_cast<std::size_t>(block - ov.copies)];
    r %= periods_[t];
  }
  return base_value(r) + shift;
}

std::vector<double> PotentialRecipe::values(std::int64_t start, std::int64_t count) const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  for (std::int64_t i = 0; i < count; ++i) out.push_back((*this)(start + i));
  return out;
}

double PotentialRecipe::max_value() const {
  double m = base_.front().value;
  for (const StepRun& run : base_) m = std::max(m, run.value);
  for (const StageOverlay& ov : overlays_) {
    double top = 0.0;
    for (double s : ov.shifts) top = std::max(top, s);
    m += top;
  }
  return m;
}

double PotentialRecipe::min_value() const {
  double m = base_.front().value;
  for (const StepRun& run : base_) m = std::min(m, run.value);
  for (const StageOverlay& ov : overlays_) {
    double low = 0.0;
    for (double s : ov.shifts) low = std::min(low, s);
    m += low;
  }
  return m;
}

double PotentialRecipe::sup_norm() const {
  return std::max(std::fabs(max_value()), std::fabs(min_value()));
}

double eval_potential(const PotentialRecipe& recipe, std::int64_t n) { return recipe(n); }

PotentialRecipe parse_inline_potential(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw FormatError("not a number in potential list: '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw FormatError("trailing characters in potential list: '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw FormatError("empty potential list");
  return PotentialRecipe::from_values(values);
}

}  // namespace limper
