#include "limper/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <CLI11.hpp>

#include "limper/bands.hpp"
#include "limper/construct_discontinuity.hpp"
#include "limper/construct_generic.hpp"
#include "limper/errors.hpp"
#include "limper/parallel.hpp"
#include "limper/stage_io.hpp"
#include "limper/transfer.hpp"
#include "limper/verify.hpp"

namespace limper {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::string cleaned = text;
  for (char& ch : cleaned) {
    if (ch == ',' || ch == ';' || ch == '\n' || ch == '\r' || ch == '\t') ch = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size() || !std::isfinite(x)) throw FormatError(what + ": bad number '" + tok + "'");
    out.push_back(x);
  }
  return out;
}

bool looks_inline(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789+-.eE, ") == std::string::npos;
}

// CSV cells use the shortest round-trip decimal form.
std::string cell(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

class CsvSink {
 public:
  CsvSink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw FormatError("cannot write " + path);
    }
    out_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

std::vector<double> parse_tuple(const std::string& text, std::size_t n, const std::string& flag) {
  const std::vector<double> v = parse_numbers(text, flag);
  if (v.size() != n) throw InvalidArgument(flag + " expects " + std::to_string(n) + " comma-separated values");
  return v;
}

struct Grid {
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t n = 0;

  double at(std::int64_t i) const {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
};

Grid parse_grid(const std::string& text) {
  const std::vector<double> v = parse_tuple(text, 3, "--grid");
  Grid g{v[0], v[1], static_cast<std::int64_t>(v[2])};
  if (static_cast<double>(g.n) != v[2] || g.n < 1) throw InvalidArgument("--grid needs a point count n >= 1");
  if (!(g.lo <= g.hi)) throw InvalidArgument("--grid needs a <= b");
  return g;
}

void write_summary_a(std::ostream& os, const ConstructionResultA& r) {
  os << "construction A\n";
  for (const StageRecordA& s : r.stages) {
    os << "stage " << s.k << ": period " << s.period << ", intervals " << s.sigma.intervals.size() << ", m0 " << s.m0
       << ", m " << s.m << ", delta " << s.delta << ", " << (s.report.ok() ? "all checks pass" : "CHECKS FAIL")
       << "\n";
    for (const SmallnessMargin& row : s.report.smallness) {
      os << "  smallness l=" << row.l << ": sup " << row.sup << " target " << row.target << " "
         << (row.pass ? "pass" : "FAIL") << "\n";
    }
  }
  if (!r.completed) {
    const StageRecordA& f = r.failed_stage;
    os << "FAILED: " << r.failure << "\n";
    os << "failed stage " << f.k << ": m0 " << f.m0 << ", m " << f.m << ", delta " << f.delta << "\n";
    std::int64_t found = 0;
    for (const WindowSearch& w : f.report.searches) found += w.found ? 1 : 0;
    os << "  windows with a resolvable band: " << found << " of " << f.report.searches.size() << "\n";
    double worst = 0.0;
    for (const TrialResidual& t : f.report.residuals) worst = std::max(worst, t.residual / t.bound);
    if (!f.report.residuals.empty()) os << "  worst trial residual / bound: " << worst << "\n";
    if (!f.report.note.empty()) os << "  note: " << f.report.note << "\n";
  } else {
    os << "completed: all stages certified\n";
  }
}

void write_summary_b(std::ostream& os, const ConstructionResultB& r) {
  os << "construction B\n";
  for (const StageRecordB& s : r.stages) {
    os << "stage " << s.k << ": period " << s.period << ", E_k " << s.e_k << ", m0 " << s.m0 << ", m " << s.m
       << ", h " << s.h << ", L(0) " << s.report.l0 << " target " << s.report.l0_target << ", "
       << (s.report.ok() ? "all checks pass" : "CHECKS FAIL") << "\n";
    for (const SmallnessMargin& row : s.report.smallness) {
      os << "  smallness l=" << row.l << ": sup " << row.sup << " target " << row.target << " "
         << (row.pass ? "pass" : "FAIL") << "\n";
    }
  }
  if (!r.completed) {
    os << "FAILED: " << r.failure << "\n";
    for (const std::string& line : r.failed_stage.report.transcript) os << "  " << line << "\n";
    return;
  }
  const DiscontinuityReport& d = r.report;
  os << "gamma " << d.gamma << ", E_0 " << d.e0 << "\n";
  os << "L(0, V^K) " << d.l0 << " (target " << d.l0_target << ", 1.25 gamma " << 1.25 * d.gamma << ")\n";
  os << "min growth near the spectral bottom " << d.bottom_min << " at E = " << d.bottom_energy << "\n";
  os << "||V^K - V^0|| " << d.telescoped << " bound " << d.telescoped_bound << "\n";
  os << (d.ok() ? "completed: all stages certified\n" : "completed with failing report checks\n");
}

void write_discontinuity_csv(const std::string& path, const DiscontinuityReport& d, std::int64_t K) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path);
  os << "quantity,stage,value,bound,pass\n";
  os << "gamma,0," << cell(d.gamma) << ",,\n";
  os << "E0,0," << cell(d.e0) << ",,\n";
  os << "L0," << K << "," << cell(d.l0) << "," << cell(d.l0_target) << "," << (d.l0_ok ? 1 : 0) << "\n";
  os << "L0_vs_1.25gamma," << K << "," << cell(d.l0) << "," << cell(1.25 * d.gamma) << ","
     << (d.l0 >= 1.25 * d.gamma ? 1 : 0) << "\n";
  const double bottom_bound = std::ldexp(1.0, -static_cast<int>(K)) + 1e-3;
  os << "bottom_min_growth," << K << "," << cell(d.bottom_min) << "," << cell(bottom_bound) << ","
     << (d.bottom_min <= bottom_bound ? 1 : 0) << "\n";
  os << "bottom_energy," << K << "," << cell(d.bottom_energy) << ",,\n";
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    const SmallnessMargin& row = d.rows[i];
    os << "smallness_sup," << row.l << "," << cell(row.sup) << "," << cell(row.target) << "," << (row.pass ? 1 : 0)
       << "\n";
    os << "smallness_min," << row.l << "," << cell(d.row_minima[i]) << ",,\n";
  }
  os << "telescoped_change," << K << "," << cell(d.telescoped) << "," << cell(d.telescoped_bound) << ","
     << (d.telescoped_ok ? 1 : 0) << "\n";
  os << "monotone_below_zero," << K << "," << (d.monotone_below_zero ? 1 : 0) << ",,"
     << (d.monotone_below_zero ? 1 : 0) << "\n";
  os << "offset_to_original," << K << "," << cell(d.offset) << ",,\n";
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path);
  os << "E,L,in_spectrum\n";
  for (const SweepRow& r : rows) os << cell(r.energy) << "," << cell(r.lyapunov) << "," << (r.in_spectrum ? 1 : 0) << "\n";
}

std::string stage_path(const std::string& outdir, char construction, std::int64_t k) {
  return (fs::path(outdir) / (std::string("stage_") + static_cast<char>(std::tolower(construction)) + "_" +
                              std::to_string(k) + ".json"))
      .string();
}

// Stage files for stages 0..n-1 of a history.
template <class Record>
void save_history(const std::string& outdir, const StageFile& base, const std::vector<Record>& history,
                  std::vector<Record> StageFile::*field, std::ostream& out) {
  for (std::size_t k = 0; k < history.size(); ++k) {
    StageFile f = base;
    f.*field = std::vector<Record>(history.begin(), history.begin() + static_cast<std::ptrdiff_t>(k) + 1);
    const std::string path = stage_path(outdir, base.construction, static_cast<std::int64_t>(k));
    save_stage_file(f, path);
    out << "wrote " << path << "\n";
  }
}

struct SpectrumArgs {
  std::string potential;
  std::string window;
  std::string out;
  std::string ids_grid;
  std::string ids_out;
};

int cmd_spectrum(const SpectrumArgs& a, std::ostream& out) {
  const PotentialRecipe recipe = load_potential(a.potential).without_trailing_repeats();
  BandList bands;
  if (a.window.empty()) {
    bands = band_edges_exact(recipe);
  } else {
    const std::vector<double> w = parse_tuple(a.window, 2, "--window");
    if (!(w[0] < w[1])) throw InvalidArgument("--window needs a < b");
    bands = local_bands(recipe, w[0], w[1]);
  }
  {
    CsvSink sink(a.out, out);
    std::ostream& os = sink.stream();
    os << "band_index,alpha,beta\n";
    for (std::size_t i = 0; i < bands.bands.size(); ++i) {
      os << i << "," << cell(bands.bands[i].alpha) << "," << cell(bands.bands[i].beta) << "\n";
    }
  }
  if (bands.unresolved > 0) {
    out << "# " << bands.unresolved << " bands narrower than the resolution floor were not listed\n";
  }
  if (!a.ids_grid.empty()) {
    const Grid g = parse_grid(a.ids_grid);
    CsvSink sink(a.ids_out, out);
    std::ostream& os = sink.stream();
    os << "E,ids\n";
    for (std::int64_t i = 0; i < g.n; ++i) os << cell(g.at(i)) << "," << cell(ids(g.at(i), recipe)) << "\n";
  }
  return kExitOk;
}

struct SweepArgs {
  std::string stage;
  std::string potential;
  std::string grid;
  std::string length = "period";
  int threads = 0;
  std::string out;
};

int cmd_lyapunov_sweep(const SweepArgs& a, std::ostream& out) {
  if (a.stage.empty() == a.potential.empty()) throw InvalidArgument("give exactly one of --stage and --potential");
  PotentialRecipe recipe;
  if (!a.stage.empty()) {
    const LoadedStageFile f = load_stage_file(a.stage);
    recipe = f.file.construction == 'A' ? f.file.history_a.back().recipe : f.file.history_b.back().recipe;
  } else {
    recipe = load_potential(a.potential);
  }
  const Grid g = parse_grid(a.grid);
  std::int64_t length = 0;
  if (a.length != "period") {
    std::size_t used = 0;
    try {
      length = std::stoll(a.length, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != a.length.size() || length < 1) throw InvalidArgument("--length must be a positive integer or 'period'");
  }
  const bool exact = length == 0 || length == recipe.period();
  std::vector<SweepRow> rows(static_cast<std::size_t>(g.n));
  parallel_for(rows.size(), resolve_threads(a.threads), [&](std::size_t i) {
    const double e = g.at(static_cast<std::int64_t>(i));
    const Discriminant d = discriminant(e, recipe);
    const double L = exact ? lyapunov_from_trace(d, recipe.period()) : finite_lyapunov(e, recipe, length);
    rows[i] = {e, L, trace_in_spectrum(d)};
  });
  CsvSink sink(a.out, out);
  std::ostream& os = sink.stream();
  os << "E,L,in_spectrum\n";
  for (const SweepRow& r : rows) os << cell(r.energy) << "," << cell(r.lyapunov) << "," << (r.in_spectrum ? 1 : 0) << "\n";
  return kExitOk;
}

struct ConstructArgs {
  std::string construction = "a";
  std::int64_t stages = -1;
  std::string config;
  std::string resume;
  std::string outdir = ".";
  std::string potential = "0";
  int threads = -1;
};

int cmd_construct(const ConstructArgs& a, std::ostream& out) {
  const std::string which = a.construction == "A" ? "a" : a.construction == "B" ? "b" : a.construction;
  if (which != "a" && which != "b") throw InvalidArgument("--construction must be a or b");
  ConstructionConfig config;
  StageFile base;
  base.construction = which == "a" ? 'A' : 'B';
  if (!a.resume.empty()) {
    const LoadedStageFile loaded = load_stage_file(a.resume);
    if (!loaded.digest_ok()) throw FormatError("digest mismatch in " + a.resume + "; run verify for details");
    if (loaded.file.construction != base.construction) throw InvalidArgument("resume file belongs to the other construction");
    base = loaded.file;
    config = base.config;
  }
  if (!a.config.empty()) config = load_config(a.config);
  if (a.stages >= 0) config.stages = a.stages;
  if (a.threads >= 0) config.threads = a.threads;
  base.config = config;
  fs::create_directories(a.outdir);

  bool ok = false;
  std::ofstream summary((fs::path(a.outdir) / "summary.txt").string(), std::ios::binary);
  if (!summary) throw FormatError("cannot write summary in " + a.outdir);
  if (base.construction == 'A') {
    const ConstructionResultA r = run_construction_a(config, base.history_a);
    save_history(a.outdir, base, r.stages, &StageFile::history_a, out);
    write_summary_a(summary, r);
    write_summary_a(out, r);
    ok = r.completed;
    for (const StageRecordA& s : r.stages) ok = ok && s.report.ok();
  } else {
    if (!base.original) base.original = load_potential(a.potential);
    const ConstructionResultB r = run_construction_b(*base.original, config, base.history_b);
    save_history(a.outdir, base, r.stages, &StageFile::history_b, out);
    write_summary_b(summary, r);
    write_summary_b(out, r);
    ok = r.completed && r.report.ok();
    for (const StageRecordB& s : r.stages) ok = ok && s.report.ok();
    if (r.completed) {
      const std::int64_t K = static_cast<std::int64_t>(r.stages.size()) - 1;
      write_discontinuity_csv((fs::path(a.outdir) / "discontinuity.csv").string(), r.report, K);
      write_sweep_csv((fs::path(a.outdir) / "lyapunov_sweep.csv").string(), r.report.sweep);
      out << "wrote " << (fs::path(a.outdir) / "discontinuity.csv").string() << "\n";
    }
  }
  return ok ? kExitOk : kExitVerification;
}

int cmd_verify(const std::string& path, int threads, std::ostream& out) {
  const LoadedStageFile loaded = load_stage_file(path);
  const std::vector<PropertyCheck> checks = verify_stage_file(loaded, resolve_threads(threads));
  for (const PropertyCheck& c : checks) {
    out << (c.pass ? "PASS " : "FAIL ");
    if (c.stage >= 0) {
      out << "stage " << c.stage << " ";
    } else {
      out << "file ";
    }
    out << c.property << ": " << c.detail << "\n";
  }
  const bool ok = all_pass(checks);
  out << (ok ? "verified\n" : "verification failed\n");
  return ok ? kExitOk : kExitVerification;
}

}  // namespace

PotentialRecipe load_potential(const std::string& source) {
  std::error_code ec;
  if (fs::is_regular_file(source, ec)) {
    const std::string text = read_file(source);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      if (text.find("\"body\"") != std::string::npos) {
        const LoadedStageFile f = parse_stage_file(text);
        return f.file.construction == 'A' ? f.file.history_a.back().recipe : f.file.history_b.back().recipe;
      }
      return parse_recipe_text(text);
    }
    const std::vector<double> values = parse_numbers(text, source);
    if (values.empty()) throw FormatError(source + " holds no potential values");
    return PotentialRecipe::from_values(values);
  }
  if (looks_inline(source)) return parse_inline_potential(source);
  throw FormatError("no such potential file: " + source);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lyapunov exponents and spectra of periodic Schroedinger operators on Z", "limper"};
  app.require_subcommand(1);
  int threads = 0;

  SpectrumArgs spectrum_args;
  CLI::App* spectrum = app.add_subcommand("spectrum", "Bands (and optionally the IDS) of a periodic potential");
  spectrum->add_option("--potential", spectrum_args.potential, "stage file, recipe file, number file or inline list")->required();
  spectrum->add_option("--window", spectrum_args.window, "a,b: search bands inside [a,b] instead of the exact route");
  spectrum->add_option("--out", spectrum_args.out, "CSV path (default stdout)");
  spectrum->add_option("--ids", spectrum_args.ids_grid, "a,b,n: also tabulate the integrated density of states");
  spectrum->add_option("--ids-out", spectrum_args.ids_out, "CSV path for the IDS table");

  SweepArgs sweep;
  CLI::App* lyap = app.add_subcommand("lyapunov-sweep", "Lyapunov exponent on an energy grid");
  lyap->add_option("--stage", sweep.stage, "stage file");
  lyap->add_option("--potential", sweep.potential, "potential source as for spectrum");
  lyap->add_option("--grid", sweep.grid, "a,b,n")->required();
  lyap->add_option("--length", sweep.length, "N or 'period'");
  lyap->add_option("--threads", sweep.threads, "worker threads (LIMPER_THREADS overrides)");
  lyap->add_option("--out", sweep.out, "CSV path (default stdout)");

  ConstructArgs con;
  CLI::App* construct = app.add_subcommand("construct", "Run a staged construction");
  construct->add_option("--construction", con.construction, "a or b");
  construct->add_option("--stages", con.stages, "number of stages K");
  construct->add_option("--config", con.config, "key=value config file");
  construct->add_option("--resume", con.resume, "continue from a stage file");
  construct->add_option("--outdir", con.outdir, "output directory");
  construct->add_option("--potential", con.potential, "construction b: starting potential");
  construct->add_option("--threads", con.threads, "worker threads (LIMPER_THREADS overrides)");

  std::string verify_path;
  CLI::App* verify = app.add_subcommand("verify", "Re-check every property recorded in a stage file");
  verify->add_option("stagefile", verify_path, "stage file")->required();
  verify->add_option("--threads", threads, "worker threads (LIMPER_THREADS overrides)");

  std::vector<std::string> rest(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*spectrum) return cmd_spectrum(spectrum_args, out);
    if (*lyap) return cmd_lyapunov_sweep(sweep, out);
    if (*construct) return cmd_construct(con, out);
    if (*verify) return cmd_verify(verify_path, threads, out);
  } catch (const StageFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitVerification;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace limper
