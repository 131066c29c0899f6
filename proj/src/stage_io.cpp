#include "limper/stage_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "limper/errors.hpp"

namespace limper {

using nlohmann::json;

namespace {

std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double unhex(const json& j) {
  if (!j.is_string()) throw FormatError("expected a hexfloat string, got " + j.dump());
  const std::string s = j.get<std::string>();
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw FormatError("bad number: " + s);
  return x;
}

const json& at(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing field: ") + key);
  return *it;
}

std::int64_t int_at(const json& j, const char* key) {
  const json& v = at(j, key);
  if (!v.is_number_integer()) throw FormatError(std::string("field ") + key + " is not an integer");
  return v.get<std::int64_t>();
}

bool bool_at(const json& j, const char* key) {
  const json& v = at(j, key);
  if (!v.is_boolean()) throw FormatError(std::string("field ") + key + " is not a boolean");
  return v.get<bool>();
}

double real_at(const json& j, const char* key) { return unhex(at(j, key)); }

std::string string_at(const json& j, const char* key) {
  const json& v = at(j, key);
  if (!v.is_string()) throw FormatError(std::string("field ") + key + " is not a string");
  return v.get<std::string>();
}

json reals(const std::vector<double>& xs) {
  json out = json::array();
  for (double x : xs) out.push_back(hex(x));
  return out;
}

std::vector<double> reals_at(const json& j, const char* key) {
  std::vector<double> out;
  for (const json& x : at(j, key)) out.push_back(unhex(x));
  return out;
}

template <class T, class F>
std::vector<T> list_at(const json& j, const char* key, F decode) {
  const json& arr = at(j, key);
  if (!arr.is_array()) throw FormatError(std::string("field ") + key + " is not a list");
  std::vector<T> out;
  for (const json& x : arr) out.push_back(decode(x));
  return out;
}

template <class T, class F>
json list(const std::vector<T>& xs, F encode) {
  json out = json::array();
  for (const T& x : xs) out.push_back(encode(x));
  return out;
}

// Recipes

json encode(const PotentialRecipe& r) {
  json base = json::array();
  for (const StepRun& run : r.base()) base.push_back({{"value", hex(run.value)}, {"length", run.length}});
  json overlays = json::array();
  for (const StageOverlay& o : r.overlays()) {
    overlays.push_back({{"refinement", o.refinement}, {"copies", o.copies}, {"shifts", reals(o.shifts)}});
  }
  return {{"base", base}, {"overlays", overlays}};
}

PotentialRecipe decode_recipe(const json& j) {
  std::vector<StepRun> base = list_at<StepRun>(j, "base", [](const json& x) {
    return StepRun{real_at(x, "value"), int_at(x, "length")};
  });
  if (base.empty()) throw FormatError("recipe without base runs");
  for (const StepRun& run : base) {
    if (run.length < 1) throw FormatError("recipe run with length < 1");
  }
  PotentialRecipe r(base);
  for (const json& o : at(j, "overlays")) {
    StageOverlay ov{int_at(o, "refinement"), int_at(o, "copies"), reals_at(o, "shifts")};
    try {
      r = r.with_overlay(ov);
    } catch (const Error& e) {
      throw FormatError(std::string("bad overlay: ") + e.what());
    }
  }
  return r;
}

// Shared pieces

json encode(const Band& b) { return {hex(b.alpha), hex(b.beta)}; }
Band decode_band(const json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("band must be a pair");
  return {unhex(j[0]), unhex(j[1])};
}

json encode(const OpenInterval& i) { return {hex(i.lo), hex(i.hi)}; }
OpenInterval decode_interval(const json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("interval must be a pair");
  return {unhex(j[0]), unhex(j[1])};
}

json encode(const LogValue& v) { return {{"sign", v.sign}, {"log_abs", hex(v.log_abs)}}; }
LogValue decode_log(const json& j) {
  LogValue v;
  v.sign = static_cast<int>(int_at(j, "sign"));
  v.log_abs = real_at(j, "log_abs");
  return v;
}

json encode(const SmallnessMargin& m) {
  return {{"l", m.l},           {"sup", hex(m.sup)},     {"target", hex(m.target)},
          {"argmax", hex(m.argmax)}, {"samples", m.samples}, {"converged", m.converged},
          {"pass", m.pass}};
}
SmallnessMargin decode_margin(const json& j) {
  SmallnessMargin m;
  m.l = int_at(j, "l");
  m.sup = real_at(j, "sup");
  m.target = real_at(j, "target");
  m.argmax = real_at(j, "argmax");
  m.samples = int_at(j, "samples");
  m.converged = bool_at(j, "converged");
  m.pass = bool_at(j, "pass");
  return m;
}

json encode(const GrowthLength& g) {
  return {{"length", g.length},
          {"doubling_exponent", g.doubling_exponent},
          {"remainder_factor", g.remainder_factor},
          {"exact_remainder", g.exact_remainder},
          {"achieved", hex(g.achieved)},
          {"transcript", reals(g.transcript)}};
}
GrowthLength decode_growth(const json& j) {
  GrowthLength g;
  g.length = int_at(j, "length");
  g.doubling_exponent = static_cast<int>(int_at(j, "doubling_exponent"));
  g.remainder_factor = int_at(j, "remainder_factor");
  g.exact_remainder = bool_at(j, "exact_remainder");
  g.achieved = real_at(j, "achieved");
  g.transcript = reals_at(j, "transcript");
  return g;
}

json encode(const IntervalFamily& f) {
  return {{"stage", f.stage},
          {"intervals", list(f.intervals, [](const OpenInterval& i) { return encode(i); })},
          {"links", list(f.links, [](const ParentLink& l) { return json{l.parent, l.shift_index}; })}};
}
IntervalFamily decode_family(const json& j) {
  IntervalFamily f;
  f.stage = int_at(j, "stage");
  f.intervals = list_at<OpenInterval>(j, "intervals", decode_interval);
  f.links = list_at<ParentLink>(j, "links", [](const json& x) {
    if (!x.is_array() || x.size() != 2) throw FormatError("link must be a pair");
    return ParentLink{x[0].get<std::int64_t>(), x[1].get<std::int64_t>()};
  });
  return f;
}

std::vector<std::string> strings_at(const json& j, const char* key) {
  return list_at<std::string>(j, key, [](const json& x) {
    if (!x.is_string()) throw FormatError("expected a string");
    return x.get<std::string>();
  });
}

// Construction A

json encode(const TrialResidual& t) {
  return {{"interval", t.interval},   {"j", t.j},
          {"energy", hex(t.energy)},  {"residual", hex(t.residual)},
          {"bound", hex(t.bound)},    {"norm", hex(t.norm)},
          {"nonzero_sites", t.nonzero_sites}, {"sites_checked", t.sites_checked},
          {"exhaustive", t.exhaustive}, {"pass", t.pass}};
}
TrialResidual decode_residual(const json& j) {
  TrialResidual t;
  t.interval = int_at(j, "interval");
  t.j = int_at(j, "j");
  t.energy = real_at(j, "energy");
  t.residual = real_at(j, "residual");
  t.bound = real_at(j, "bound");
  t.norm = real_at(j, "norm");
  t.nonzero_sites = int_at(j, "nonzero_sites");
  t.sites_checked = int_at(j, "sites_checked");
  t.exhaustive = bool_at(j, "exhaustive");
  t.pass = bool_at(j, "pass");
  return t;
}

json encode(const WindowSearch& w) {
  return {{"interval", w.interval}, {"j", w.j},
          {"window", encode(w.window)}, {"found", w.found},
          {"band", encode(w.band)}, {"center_distance", hex(w.center_distance)},
          {"unresolved", w.unresolved}, {"evaluations", w.evaluations}};
}
WindowSearch decode_search(const json& j) {
  WindowSearch w;
  w.interval = int_at(j, "interval");
  w.j = int_at(j, "j");
  w.window = decode_interval(at(j, "window"));
  w.found = bool_at(j, "found");
  w.band = decode_interval(at(j, "band"));
  w.center_distance = real_at(j, "center_distance");
  w.unresolved = int_at(j, "unresolved");
  w.evaluations = int_at(j, "evaluations");
  return w;
}

json encode(const VerificationReportA& r) {
  return {{"property_i", r.property_i},
          {"sup_change", hex(r.sup_change)},
          {"sup_change_bound", hex(r.sup_change_bound)},
          {"property_ii", r.property_ii},
          {"prefix_checks", r.prefix_checks},
          {"density", r.density},
          {"nesting", r.nesting},
          {"smallness", list(r.smallness, [](const SmallnessMargin& m) { return encode(m); })},
          {"residuals", list(r.residuals, [](const TrialResidual& t) { return encode(t); })},
          {"searches", list(r.searches, [](const WindowSearch& w) { return encode(w); })},
          {"longer_lengths", reals(r.longer_lengths)},
          {"membership_failures", r.membership_failures},
          {"note", r.note}};
}
VerificationReportA decode_report_a(const json& j) {
  VerificationReportA r;
  r.property_i = bool_at(j, "property_i");
  r.sup_change = real_at(j, "sup_change");
  r.sup_change_bound = real_at(j, "sup_change_bound");
  r.property_ii = bool_at(j, "property_ii");
  r.prefix_checks = int_at(j, "prefix_checks");
  r.density = bool_at(j, "density");
  r.nesting = bool_at(j, "nesting");
  r.smallness = list_at<SmallnessMargin>(j, "smallness", decode_margin);
  r.residuals = list_at<TrialResidual>(j, "residuals", decode_residual);
  r.searches = list_at<WindowSearch>(j, "searches", decode_search);
  r.longer_lengths = reals_at(j, "longer_lengths");
  r.membership_failures = int_at(j, "membership_failures");
  r.note = string_at(j, "note");
  return r;
}

json encode(const StageRecordA& s) {
  return {{"k", s.k},
          {"recipe", encode(s.recipe)},
          {"period", s.period},
          {"sigma", encode(s.sigma)},
          {"m0", s.m0},
          {"m", s.m},
          {"multiplier", s.multiplier},
          {"delta", hex(s.delta)},
          {"growth", encode(s.growth)},
          {"report", encode(s.report)}};
}
StageRecordA decode_stage_a(const json& j) {
  StageRecordA s;
  s.k = int_at(j, "k");
  s.recipe = decode_recipe(at(j, "recipe"));
  s.period = int_at(j, "period");
  s.sigma = decode_family(at(j, "sigma"));
  s.m0 = int_at(j, "m0");
  s.m = int_at(j, "m");
  s.multiplier = int_at(j, "multiplier");
  s.delta = real_at(j, "delta");
  s.growth = decode_growth(at(j, "growth"));
  s.report = decode_report_a(at(j, "report"));
  return s;
}

// Construction B

json encode(const HyperbolicSplitting& s) {
  return {{"v", {hex(s.v[0]), hex(s.v[1])}},
          {"u", {hex(s.u[0]), hex(s.u[1])}},
          {"v_perp", {hex(s.v_perp[0]), hex(s.v_perp[1])}},
          {"a", hex(s.a)},
          {"b", hex(s.b)},
          {"log_rate", hex(s.log_rate)},
          {"sign", s.sign},
          {"residual_v", hex(s.residual_v)},
          {"residual_u", hex(s.residual_u)}};
}
std::array<double, 2> pair_at(const json& j, const char* key) {
  const std::vector<double> v = reals_at(j, key);
  if (v.size() != 2) throw FormatError(std::string("field ") + key + " must hold two numbers");
  return {v[0], v[1]};
}
HyperbolicSplitting decode_split(const json& j) {
  HyperbolicSplitting s;
  s.v = pair_at(j, "v");
  s.u = pair_at(j, "u");
  s.v_perp = pair_at(j, "v_perp");
  s.a = real_at(j, "a");
  s.b = real_at(j, "b");
  s.log_rate = real_at(j, "log_rate");
  s.sign = static_cast<int>(int_at(j, "sign"));
  s.residual_v = real_at(j, "residual_v");
  s.residual_u = real_at(j, "residual_u");
  return s;
}

json encode(const HChoice& c) {
  return {{"h", c.h},
          {"q", {encode(c.q[0]), encode(c.q[1])}},
          {"trace_lowered", encode(c.trace_lowered)},
          {"identity_residual", hex(c.identity_residual)},
          {"identity_ok", c.identity_ok},
          {"split", encode(c.split)}};
}
HChoice decode_choice(const json& j) {
  HChoice c;
  c.h = static_cast<int>(int_at(j, "h"));
  const json& q = at(j, "q");
  if (!q.is_array() || q.size() != 2) throw FormatError("q must hold two values");
  c.q = {decode_log(q[0]), decode_log(q[1])};
  c.trace_lowered = decode_log(at(j, "trace_lowered"));
  c.identity_residual = real_at(j, "identity_residual");
  c.identity_ok = bool_at(j, "identity_ok");
  c.split = decode_split(at(j, "split"));
  return c;
}

json encode(const VerificationReportB& r) {
  return {{"prefix_ok", r.prefix_ok},
          {"sup_change", hex(r.sup_change)},
          {"sup_change_bound", hex(r.sup_change_bound)},
          {"change_ok", r.change_ok},
          {"e_k", hex(r.e_k)},
          {"bracket_lo", hex(r.bracket_lo)},
          {"bracket_hi", hex(r.bracket_hi)},
          {"bracket_ok", r.bracket_ok},
          {"step_bracket_ok", r.step_bracket_ok},
          {"trial_energy", hex(r.trial_energy)},
          {"bottom_distance", hex(r.bottom_distance)},
          {"bottom_distance_ok", r.bottom_distance_ok},
          {"l0", hex(r.l0)},
          {"l0_target", hex(r.l0_target)},
          {"l0_asymptotic", hex(r.l0_asymptotic)},
          {"l0_trace_bound", hex(r.l0_trace_bound)},
          {"l0_ok", r.l0_ok},
          {"smallness", list(r.smallness, [](const SmallnessMargin& m) { return encode(m); })},
          {"identity_ok", r.identity_ok},
          {"transcript", r.transcript}};
}
VerificationReportB decode_report_b(const json& j) {
  VerificationReportB r;
  r.prefix_ok = bool_at(j, "prefix_ok");
  r.sup_change = real_at(j, "sup_change");
  r.sup_change_bound = real_at(j, "sup_change_bound");
  r.change_ok = bool_at(j, "change_ok");
  r.e_k = real_at(j, "e_k");
  r.bracket_lo = real_at(j, "bracket_lo");
  r.bracket_hi = real_at(j, "bracket_hi");
  r.bracket_ok = bool_at(j, "bracket_ok");
  r.step_bracket_ok = bool_at(j, "step_bracket_ok");
  r.trial_energy = real_at(j, "trial_energy");
  r.bottom_distance = real_at(j, "bottom_distance");
  r.bottom_distance_ok = bool_at(j, "bottom_distance_ok");
  r.l0 = real_at(j, "l0");
  r.l0_target = real_at(j, "l0_target");
  r.l0_asymptotic = real_at(j, "l0_asymptotic");
  r.l0_trace_bound = real_at(j, "l0_trace_bound");
  r.l0_ok = bool_at(j, "l0_ok");
  r.smallness = list_at<SmallnessMargin>(j, "smallness", decode_margin);
  r.identity_ok = bool_at(j, "identity_ok");
  r.transcript = strings_at(j, "transcript");
  return r;
}

json encode(const StageRecordB& s) {
  return {{"k", s.k},
          {"recipe", encode(s.recipe)},
          {"period", s.period},
          {"e_k", hex(s.e_k)},
          {"gamma", hex(s.gamma)},
          {"m0", s.m0},
          {"m", s.m},
          {"h", s.h},
          {"multiplier", s.multiplier},
          {"delta", hex(s.delta)},
          {"choice", encode(s.choice)},
          {"growth", encode(s.growth)},
          {"spectral_samples", list(s.spectral_samples, [](const Band& b) { return encode(b); })},
          {"report", encode(s.report)}};
}
StageRecordB decode_stage_b(const json& j) {
  StageRecordB s;
  s.k = int_at(j, "k");
  s.recipe = decode_recipe(at(j, "recipe"));
  s.period = int_at(j, "period");
  s.e_k = real_at(j, "e_k");
  s.gamma = real_at(j, "gamma");
  s.m0 = int_at(j, "m0");
  s.m = int_at(j, "m");
  s.h = static_cast<int>(int_at(j, "h"));
  s.multiplier = int_at(j, "multiplier");
  s.delta = real_at(j, "delta");
  s.choice = decode_choice(at(j, "choice"));
  s.growth = decode_growth(at(j, "growth"));
  s.spectral_samples = list_at<Band>(j, "spectral_samples", decode_band);
  s.report = decode_report_b(at(j, "report"));
  return s;
}

json body_of(const StageFile& f) {
  json body = {{"schema", f.schema},
               {"construction", std::string(1, f.construction)},
               {"stage", f.stage()},
               {"config", config_text(f.config)}};
  if (f.construction == 'A') {
    body["history"] = list(f.history_a, [](const StageRecordA& s) { return encode(s); });
  } else {
    body["history"] = list(f.history_b, [](const StageRecordB& s) { return encode(s); });
    body["original"] = f.original ? encode(*f.original) : json(nullptr);
  }
  return body;
}

std::string digest_hex(std::uint64_t d) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(d));
  return buf;
}

}  // namespace

std::int64_t StageFile::stage() const {
  const std::size_t n = construction == 'A' ? history_a.size() : history_b.size();
  return static_cast<std::int64_t>(n) - 1;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string stage_file_text(const StageFile& file) {
  if (file.construction != 'A' && file.construction != 'B') throw InvalidArgument("construction must be A or B");
  const json body = body_of(file);
  const std::string canonical = body.dump();
  json doc = {{"body", body}, {"digest", digest_hex(fnv1a64(canonical))}};
  return doc.dump(1) + "\n";
}

LoadedStageFile parse_stage_file(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("stage file is not valid JSON: ") + e.what());
  }
  try {
    LoadedStageFile out;
    const json& body = at(doc, "body");
    out.stored_digest = string_at(doc, "digest");
    out.computed_digest = digest_hex(fnv1a64(body.dump()));
    StageFile& f = out.file;
    f.schema = static_cast<int>(int_at(body, "schema"));
    if (f.schema != kStageSchemaVersion) {
      throw FormatError("unsupported schema version " + std::to_string(f.schema));
    }
    const std::string tag = string_at(body, "construction");
    if (tag != "A" && tag != "B") throw FormatError("unknown construction tag " + tag);
    f.construction = tag[0];
    f.config = parse_config(string_at(body, "config"));
    if (f.construction == 'A') {
      f.history_a = list_at<StageRecordA>(body, "history", decode_stage_a);
    } else {
      f.history_b = list_at<StageRecordB>(body, "history", decode_stage_b);
      const json& orig = at(body, "original");
      if (!orig.is_null()) f.original = decode_recipe(orig);
    }
    if (f.stage() < 0) throw FormatError("stage file without stages");
    if (int_at(body, "stage") != f.stage()) throw FormatError("stage index does not match the history length");
    return out;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed stage file: ") + e.what());
  }
}

void save_stage_file(const StageFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path);
  out << stage_file_text(file);
  if (!out) throw FormatError("write failed: " + path);
}

LoadedStageFile load_stage_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_stage_file(ss.str());
}

std::string recipe_text(const PotentialRecipe& recipe) { return encode(recipe).dump(1) + "\n"; }

PotentialRecipe parse_recipe_text(const std::string& text) {
  try {
    return decode_recipe(json::parse(text));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed recipe: ") + e.what());
  }
}

}  // namespace limper
