#include "fermi/cli.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fermi/bounds.hpp"
#include "fermi/covariance.hpp"
#include "fermi/fock.hpp"
#include "fermi/grassmann.hpp"
#include "fermi/parallel.hpp"

namespace fermi {

namespace {

using nlohmann::json;

const std::vector<std::string> kSuites = {"covariance", "detbound", "grassmann", "taylor", "theorem", "all"};
const std::vector<std::string> kTables = {"covariance_decay", "envelope", "taylor", "hconv"};

// Thrown for a failed check that stops a suite early (smallness refusal).
struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

CheckRow upper(const std::string& suite, const std::string& q, double computed, double bound) {
  return {suite, q, computed, bound, computed <= bound};
}

CheckRow info(const std::string& suite, const std::string& q, double computed) {
  return {suite, q, computed, std::nullopt, std::isfinite(computed)};
}

CorrelationQuery origin_query(int d, int m_hat) {
  CorrelationQuery q;
  q.m_hat = m_hat;
  q.X.assign(m_hat, std::vector<int>(d, 0));
  q.Y = q.X;
  q.Xi = m_hat == 2 ? std::vector<int>{Up, Down} : std::vector<int>(m_hat, Up);
  q.Phi = q.Xi;
  return q;
}

// Query for the Taylor suites: the Hubbard observable for an on-site model, else a density.
CorrelationQuery default_query(const ModelFile& m) {
  return onsite_hubbard_coupling(m.interaction) ? origin_query(m.spec.d, 2) : origin_query(m.spec.d, 1);
}

std::vector<CheckRow> covariance_suite(const ModelFile& m, const RunConfig& cfg) {
  const std::string s = "covariance";
  std::vector<CheckRow> rows;
  const TimeGrid grid = time_grid(m.params.beta, cfg.half_steps);
  const Covariance c(m.spec, m.params);
  rows.push_back(upper(s, "fourier_consistency", check_fourier_consistency(m.spec, m.params), 1e-10));
  rows.push_back(upper(s, "det_identity_rel_error", det_identity_check(c, grid).relative_error, cfg.tol));
  const Covariance shifted(m.spec, m.params, {Shift{cplx(0, 0.1), 0}});
  rows.push_back(upper(s, "det_identity_rel_error_shift_0.1i", det_identity_check(shifted, grid).relative_error,
                       cfg.tol));
  const auto ms = matsubara_check(c, grid);
  rows.push_back(upper(s, "matsubara_offdiagonal", ms.max_offdiagonal, 1e-9));
  rows.push_back(upper(s, "matsubara_diagonal_deviation", ms.max_diagonal_deviation, 1e-9));
  for (int q = 0; q < m.spec.d; ++q)
    rows.push_back(upper(s, "u1_shift_identity_axis" + std::to_string(q), u1_shift_identity_check(c, grid, q), 1e-11));
  const int other = m.spec.site_count() > 1 ? 1 : 0;
  const double r1 = contour_radius(1, m.params, m.spec.d, RadiusConvention::PiOver2Beta);
  const auto cr = contour_formula_check(c, 0, 1, r1, 256, 32, {other, Up, 0.3 * m.params.beta}, {0, Up, 0.0});
  rows.push_back(upper(s, "contour_formula_n1", cr.deviation, 1e-6));
  const auto dec = decay_envelope_check(c, grid);
  rows.push_back(upper(s, "decay_ratio_chord", dec.worst_ratio_chord, 1.0));
  rows.push_back(upper(s, "decay_ratio_reduced", dec.worst_ratio_reduced, 1.0));
  const auto l1 = l1_bound_check(c, grid);
  rows.push_back(upper(s, "l1_sum", l1.lhs, l1.rhs));
  rows.push_back(upper(s, "l1_integral_D", covariance_l1_D(c, grid),
                       4.0 * m.params.beta * l1_geometric_factor(m.params, m.spec.d)));
  return rows;
}

std::vector<CheckRow> detbound_suite(const ModelFile& m, const RunConfig& cfg) {
  const std::string s = "detbound";
  std::vector<CheckRow> rows;
  const Covariance c(m.spec, m.params);
  const double r = shift_radius_pi_over_2beta(m.params, m.spec.d);
  const Covariance shifted(m.spec, m.params, {Shift{cplx(0, r), 0}});
  for (int n : {1, 2, 4}) {
    rows.push_back(upper(s, "det_ratio_n" + std::to_string(n), det_bound_sample(c, n, 4, cfg.trials, cfg.seed), 1.0));
    rows.push_back(upper(s, "det_ratio_n" + std::to_string(n) + "_max_shift",
                         det_bound_sample(shifted, n, 4, cfg.trials, cfg.seed + 1), 1.0));
  }
  return rows;
}

std::vector<CheckRow> grassmann_suite(const ModelFile& m, const RunConfig& cfg) {
  const std::string s = "grassmann";
  std::vector<CheckRow> rows;

  // Wick against Berezin on random well-conditioned 6x6 matrices.
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    CMatrix G = CMatrix::Identity(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) G(i, j) += 0.3 * cplx(g(rng), g(rng));
    std::uniform_int_distribution<int> pick(0, 5), deg(0, 3);
    const int k = deg(rng);
    std::vector<Gen> word;
    for (int j = 0; j < k; ++j) {
      word.push_back({true, pick(rng)});
      word.push_back({false, pick(rng)});
    }
    std::shuffle(word.begin(), word.end(), rng);
    const cplx b = berezin_gaussian(GrassmannPolynomial::monomial(6, word), G);
    worst = std::max(worst, std::abs(b - integrate_monomial(word, G)));
  }
  rows.push_back(upper(s, "wick_vs_berezin", worst, 1e-12));

  const GrassmannIndexSpace space(m.spec, time_grid(m.params.beta, cfg.half_steps));
  const FiniteInteraction fu = restrict_interaction(m.interaction, m.spec);
  const PartitionResult dp = discrete_partition(space, m.params, fu);
  const cplx pe = partition_via_exponential(space, m.params, fu, 1.0);
  rows.push_back(info(s, "discrete_partition", dp.value.real()));
  rows.push_back(upper(s, "partition_equivalence", std::abs(dp.value - pe), 1e-10 * std::max(1.0, std::abs(pe))));

  const CorrelationQuery q = origin_query(m.spec.d, 1);
  const auto gc = correlation_via_grassmann(m.spec, m.params, m.interaction, q, {cfg.half_steps});
  const FockSpace fs = FockSpace::for_lattice(m.spec);
  const cplx exact = correlation(fs, m.spec, m.params, m.interaction, q);
  rows.push_back(info(s, "grassmann_correlation", gc[0].value.real()));
  rows.push_back(info(s, "fock_correlation", exact.real()));
  rows.push_back(info(s, "correlation_error_at_h", std::abs(gc[0].value - exact)));
  return rows;
}

std::vector<CheckRow> taylor_suite(const ModelFile& m, const RunConfig& cfg) {
  const std::string s = "taylor";
  std::vector<CheckRow> rows;
  const auto rep = verify_taylor_bounds(m.spec, m.params, time_grid(m.params.beta, cfg.half_steps), m.interaction,
                                        default_query(m), cfg.m_max);
  rows.push_back(info(s, "D", rep.D));
  for (const auto& r : rep.rows) {
    const std::string k = std::to_string(r.m);
    rows.push_back(upper(s, "b_" + k, r.b_abs, r.b_bound));
    if (r.c_bound) {
      rows.push_back(upper(s, "c_" + k + "_pinned", *r.c_pinned_abs, *r.c_bound));
      rows.push_back(upper(s, "c_" + k + "_full_lattice", *r.c_full_abs, *r.c_bound));
    }
  }
  return rows;
}

std::vector<CorrelationQuery> envelope_queries(const ModelFile& m, bool hubbard) {
  std::vector<CorrelationQuery> out;
  const int d = m.spec.d;
  const int reach = std::min(2, m.spec.L - 1);
  auto at = [d](int v) {
    std::vector<int> x(d, 0);
    x[0] = v;
    return x;
  };
  if (hubbard) {
    for (int x2 = 0; x2 <= reach; ++x2)
      for (int y1 = 0; y1 <= reach; ++y1)
        for (int y2 = 0; y2 <= reach; ++y2) {
          CorrelationQuery q = origin_query(d, 2);
          q.X = {at(0), at(x2)};
          q.Y = {at(y1), at(y2)};
          out.push_back(q);
        }
  } else {
    for (int y = 0; y < m.spec.L; ++y) {
      CorrelationQuery q = origin_query(d, 1);
      q.Y = {at(y)};
      out.push_back(q);
    }
  }
  return out;
}

std::vector<CheckRow> theorem_suite(const ModelFile& m, const RunConfig&) {
  const std::string s = "theorem";
  const bool hubbard = onsite_hubbard_coupling(m.interaction).has_value();
  const auto variant = hubbard ? EnvelopeVariant::Hubbard : EnvelopeVariant::General;
  std::vector<CheckRow> rows;
  std::vector<EnvelopeReport> reps;
  try {
    reps = verify_theorem_envelope(m.spec, m.params, m.interaction, envelope_queries(m, hubbard), variant);
  } catch (const SmallnessViolation& e) {
    throw CheckFailure(std::string("theorem suite refused: ") + e.what());
  }
  for (const auto& r : reps) {
    std::ostringstream name;
    name << "correlation";
    for (const auto& x : r.query.X) name << "_x" << x[0];
    for (const auto& y : r.query.Y) name << "_y" << y[0];
    rows.push_back({s, name.str(), r.computed, r.envelope, r.pass});
    rows.push_back(info(s, name.str() + "_euclidean_envelope", r.envelope_euclidean));
  }
  return rows;
}

void write_rows(std::ostream& os, const std::vector<CheckRow>& rows, const std::string& format) {
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      json o{{"suite", r.suite}, {"quantity", r.quantity}, {"computed", r.computed}, {"pass", r.pass}};
      if (r.bound) {
        o["bound"] = *r.bound;
        o["ratio"] = *r.bound > 0 ? r.computed / *r.bound : 0.0;
      } else {
        o["bound"] = nullptr;
        o["ratio"] = nullptr;
      }
      arr.push_back(o);
    }
    os << arr.dump(2) << "\n";
    return;
  }
  os << "suite,quantity,computed,bound,ratio,pass\n";
  for (const auto& r : rows) {
    os << r.suite << "," << r.quantity << "," << fmt(r.computed) << ",";
    if (r.bound) os << fmt(*r.bound) << "," << fmt(*r.bound > 0 ? r.computed / *r.bound : 0.0);
    else os << ",";
    os << "," << (r.pass ? "true" : "false") << "\n";
  }
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_table(std::ostream& os, const Table& t, const std::string& format) {
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : t.rows) {
      json o = json::object();
      for (std::size_t j = 0; j < t.columns.size(); ++j) o[t.columns[j]] = std::isnan(r[j]) ? json(nullptr) : json(r[j]);
      arr.push_back(o);
    }
    os << arr.dump(2) << "\n";
    return;
  }
  for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
  os << "\n";
  for (const auto& r : t.rows) {
    // NaN marks a cell with nothing to report and is written as an empty field.
    for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << (std::isnan(r[j]) ? "" : fmt(r[j]));
    os << "\n";
  }
}

Table make_table(const std::string& kind, const ModelFile& m, const RunConfig& cfg, int max_sep) {
  Table t;
  const int d = m.spec.d;
  auto along = [d](int v) {
    std::vector<int> x(d, 0);
    x[0] = v;
    return x;
  };
  if (kind == "covariance_decay") {
    const Covariance c(m.spec, m.params);
    const TimeGrid grid = time_grid(m.params.beta, cfg.half_steps);
    t.columns = {"distance", "abs_C", "envelope_chord", "envelope_reduced"};
    for (int dist = 0; dist <= m.spec.L; ++dist) {
      const int site = site_index(m.spec, along(dist));
      double v = 0.0;
      for (int j = -grid.steps() + 1; j < grid.steps(); ++j)
        v = std::max(v, std::abs(c.value(site, Up, 0, Up, grid.point(j))));
      t.rows.push_back({double(dist), v, decay_envelope_chord(m.params, m.spec, along(dist)),
                        decay_envelope_reduced(m.params, m.spec, along(dist))});
    }
  } else if (kind == "envelope") {
    const bool hubbard = onsite_hubbard_coupling(m.interaction).has_value();
    const auto variant = hubbard ? EnvelopeVariant::Hubbard : EnvelopeVariant::General;
    // The exact correlation column is left empty when the Fock space is too large to diagonalize.
    std::optional<FockSpace> fs;
    std::optional<ThermalState> state;
    try {
      fs.emplace(FockSpace::for_lattice(m.spec));
      state.emplace(build_hamiltonian(*fs, m.spec, m.params, m.interaction), m.params.beta);
    } catch (const std::length_error&) {
      state.reset();
    }
    t.columns = {"separation", "exponent", "envelope", "abs_correlation"};
    for (int sep = 0; sep <= max_sep; ++sep) {
      CorrelationQuery q = origin_query(d, hubbard ? 2 : 1);
      q.X[0] = along(sep);
      t.rows.push_back({double(sep), envelope_exponent(q, m.spec, DistanceMode::ChordL),
                        theorem_envelope(q, m.params, m.spec, variant, DistanceMode::ChordL),
                        state ? std::abs(state->average(correlation_operator(*fs, m.spec, q))) : std::nan("")});
    }
  } else if (kind == "taylor") {
    const auto rep = verify_taylor_bounds(m.spec, m.params, time_grid(m.params.beta, cfg.half_steps),
                                          m.interaction, default_query(m), cfg.m_max);
    t.columns = {"m", "abs_b", "prop41_bound", "abs_c_pinned", "abs_c_full", "prop42_bound"};
    const double nan = std::nan("");
    for (const auto& r : rep.rows)
      t.rows.push_back({double(r.m), r.b_abs, r.b_bound, r.c_pinned_abs.value_or(nan), r.c_full_abs.value_or(nan),
                        r.c_bound.value_or(nan)});
  } else {
    const CorrelationQuery q = origin_query(d, 1);
    const FockSpace fs = FockSpace::for_lattice(m.spec);
    const cplx exact = correlation(fs, m.spec, m.params, m.interaction, q);
    std::vector<int> hs;
    for (int k = 1; k <= cfg.half_steps; k *= 2) hs.push_back(k);
    t.columns = {"beta_h", "grassmann", "fock", "abs_error"};
    for (const auto& g : correlation_via_grassmann(m.spec, m.params, m.interaction, q, hs))
      t.rows.push_back({2.0 * g.half_steps, g.value.real(), exact.real(), std::abs(g.value - exact)});
  }
  return t;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--model", cfg.model_path, "Model JSON file (default: free model with the defaults below)");
  sub->add_option("--L", cfg.L, "Override the side length L")->check(CLI::PositiveNumber);
  sub->add_option("--d", cfg.d, "Override the dimension d")->check(CLI::PositiveNumber);
  sub->add_option("--beta", cfg.beta, "Override the inverse temperature")->check(CLI::PositiveNumber);
}

void add_run(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--half-steps", cfg.half_steps, "Time grid has beta*h = 2*half_steps points")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--m-max", cfg.m_max, "Taylor truncation order")->check(CLI::NonNegativeNumber)->capture_default_str();
  sub->add_option("--trials", cfg.trials, "Random trials per determinant scan")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--seed", cfg.seed, "RNG seed")->capture_default_str();
  sub->add_option("--tol", cfg.tol, "Tolerance for identity checks")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--out", cfg.out_path, "Write the report here instead of stdout");
  sub->add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  sub->add_option("--threads", cfg.threads, "Worker threads (default: FERMI_THREADS or all cores)");
}

int emit(const RunConfig& cfg, std::ostream& out, std::ostream& err, const std::function<void(std::ostream&)>& f) {
  if (cfg.out_path.empty()) {
    f(out);
    return 0;
  }
  std::ofstream file(cfg.out_path, std::ios::binary);
  if (!file) {
    err << "error: cannot write '" << cfg.out_path << "'\n";
    return 2;
  }
  f(file);
  return 0;
}

int cmd_model_validate(const RunConfig& cfg, std::ostream& out) {
  const ModelFile m = resolve_model(cfg);
  validate(m.params, m.spec.d);
  out << "model: d=" << m.spec.d << " L=" << m.spec.L << " t=" << m.params.t << " t_prime=" << m.params.t_prime
      << " mu=" << m.params.mu << " beta=" << m.params.beta << "\n";
  out << "hermiticity: ok\n";
  for (const auto& [l, table] : m.interaction.orders())
    out << "order " << l << ": " << table.size() << " coefficients, norm " << fmt(interaction_norm(m.interaction, l))
        << "\n";
  const auto gen = check_smallness(m.interaction, m.params, m.spec.d, SmallnessVariant::General, 0.5);
  out << "smallness (general, R=0.5): lhs " << fmt(gen.lhs) << " rhs " << fmt(gen.rhs) << " "
      << (gen.satisfied ? "satisfied" : "not satisfied") << "\n";
  if (m.interaction.empty() || onsite_hubbard_coupling(m.interaction)) {
    const auto hub = check_smallness(m.interaction, m.params, m.spec.d, SmallnessVariant::Hubbard);
    out << "smallness (hubbard): lhs " << fmt(hub.lhs) << " rhs " << fmt(hub.rhs) << " "
        << (hub.satisfied ? "satisfied" : "not satisfied") << "\n";
  }
  return 0;
}

}  // namespace

ModelFile resolve_model(const RunConfig& cfg) {
  ModelFile m = cfg.model_path.empty() ? parse_model_json("{}") : load_model_file(cfg.model_path);
  if (cfg.d && *cfg.d != m.spec.d) {
    if (!m.interaction.empty()) throw ModelParseError("--d cannot change the dimension of a model with interaction");
    m.spec.d = *cfg.d;
    m.interaction = InteractionCoefficients(m.spec.d);
  }
  if (cfg.L) m.spec.L = *cfg.L;
  if (cfg.beta) m.params.beta = *cfg.beta;
  return m;
}

std::vector<CheckRow> run_suite(const std::string& suite, const ModelFile& model, const RunConfig& cfg) {
  if (suite == "all") {
    std::vector<CheckRow> rows;
    for (const auto& s : kSuites) {
      if (s == "all") continue;
      auto part = run_suite(s, model, cfg);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
  }
  if (suite == "covariance") return covariance_suite(model, cfg);
  if (suite == "detbound") return detbound_suite(model, cfg);
  if (suite == "grassmann") return grassmann_suite(model, cfg);
  if (suite == "taylor") return taylor_suite(model, cfg);
  if (suite == "theorem") return theorem_suite(model, cfg);
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{
      "Finite-lattice Hubbard-type model verifier.\n"
      "Defaults: d=1, L=4, t=1, t_prime=0, mu=0.2, beta=1, no interaction; all overridable via the model\n"
      "file or --L/--d/--beta.  Thread count: --threads or the FERMI_THREADS environment variable.",
      "fermi_cli"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string suite = "all", kind = "covariance_decay";
  int max_sep = 3;

  auto* mv = app.add_subcommand("model-validate", "Load a model file and report hermiticity, norms, smallness");
  add_common(mv, cfg);
  auto* vf = app.add_subcommand("verify", "Run a verification suite; exit 0 iff every check passes");
  add_common(vf, cfg);
  add_run(vf, cfg);
  vf->add_option("--suite", suite, "Suite to run")->check(CLI::IsMember(kSuites))->capture_default_str();
  auto* tb = app.add_subcommand("table", "Emit plot data as CSV or JSON");
  add_common(tb, cfg);
  add_run(tb, cfg);
  tb->add_option("--kind", kind, "Table to emit")->check(CLI::IsMember(kTables))->capture_default_str();
  tb->add_option("--max-sep", max_sep, "Largest separation for the envelope table")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (cfg.threads) set_thread_count(cfg.threads);

  try {
    if (mv->parsed()) return cmd_model_validate(cfg, out);
    const ModelFile m = resolve_model(cfg);
    if (vf->parsed()) {
      std::vector<CheckRow> rows;
      try {
        rows = run_suite(suite, m, cfg);
      } catch (const CheckFailure& e) {
        err << e.what() << "\n";
        return 1;
      }
      const int io = emit(cfg, out, err, [&](std::ostream& os) { write_rows(os, rows, cfg.format); });
      if (io) return io;
      int failed = 0;
      for (const auto& r : rows)
        if (!r.pass) {
          ++failed;
          err << "FAIL " << r.suite << "/" << r.quantity << ": computed " << fmt(r.computed);
          if (r.bound) err << " bound " << fmt(*r.bound) << " margin " << fmt(*r.bound - r.computed);
          err << "\n";
        }
      err << rows.size() << " checks, " << failed << " failed\n";
      return failed ? 1 : 0;
    }
    const Table t = make_table(kind, m, cfg, max_sep);
    return emit(cfg, out, err, [&](std::ostream& os) { write_table(os, t, cfg.format); });
  } catch (const ModelParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const ModelInvariantError& e) {
    err << "invariant violation: " << e.what() << "\n";
    return 1;
  } catch (const std::length_error& e) {
    err << "infeasible size: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fermi
