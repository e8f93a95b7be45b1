#ifndef FLUCTLIM_EXPERIMENT_HPP
#define FLUCTLIM_EXPERIMENT_HPP

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fluctlim/common.hpp"
#include "fluctlim/convergence.hpp"
#include "fluctlim/dynamics.hpp"
#include "fluctlim/moments.hpp"
#include "fluctlim/qubit_space.hpp"
#include "fluctlim/states.hpp"

namespace fluctlim {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error("config_error", what) {}
};

namespace detail {

inline std::string fnv1a64_hex(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char byte : text) {
    hash ^= byte;
    hash *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// The CSV schema is comma-separated with no quoting; free-text fields are
// sanitised instead.
inline std::string csv_text(std::string text) {
  for (char& ch : text)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return text;
}

inline Complex parse_complex(const nlohmann::json& j, const std::string& who) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(who + ": complex values are [re, im] number pairs");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

}  // namespace detail

struct ExperimentTolerances {
  double slope_tol = 0.1;
  std::optional<double> abs_tol;
};

struct ExperimentConfig {
  std::string kind;  // moments | dynamics | bounds | decompose
  std::string state_preset;
  std::vector<MatrixElement> state_elements;
  double lambda = 1.0;
  std::vector<long> qubit_counts;
  std::optional<Observable> observable;
  std::optional<QuadraticHamiltonian> hamiltonian;
  std::vector<double> times;
  ExperimentTolerances tolerances;
  std::string output;
  int dmax = default_dmax;
  std::vector<std::string> suites;  // bounds kind
  int random_states = 0;            // decompose kind, 0 = product state
};

namespace detail {

inline std::vector<long> parse_qubit_counts(const nlohmann::json& j) {
  std::vector<long> out;
  if (j.is_array()) {
    for (const auto& entry : j) {
      if (!entry.is_number_integer())
        throw ConfigError("M: entries must be integers");
      out.push_back(entry.get<long>());
    }
    return out;
  }
  if (j.is_object()) {
    if (!j.contains("from") || !j.contains("to"))
      throw ConfigError("M: range form needs 'from' and 'to'");
    const long from = j.at("from").get<long>();
    const long to = j.at("to").get<long>();
    if (from < 1 || to < from) throw ConfigError("M: empty or invalid range");
    if (j.contains("factor")) {
      const long factor = j.at("factor").get<long>();
      if (factor < 2) throw ConfigError("M: factor must be at least 2");
      for (long m = from; m <= to; m *= factor) out.push_back(m);
      return out;
    }
    const long step = j.contains("step") ? j.at("step").get<long>() : 1;
    if (step < 1) throw ConfigError("M: step must be positive");
    for (long m = from; m <= to; m += step) out.push_back(m);
    return out;
  }
  throw ConfigError("M: expected a list or a {from, to, step|factor} range");
}

inline Observable parse_observable(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("terms"))
    throw ConfigError("observable: expected {alphabet, terms: [...]}");
  const std::string alphabet =
      j.contains("alphabet") ? j.at("alphabet").get<std::string>() : "ladder";
  Observable obs;
  if (alphabet == "ladder")
    obs.alphabet = Observable::Alphabet::ladder;
  else if (alphabet == "canonical")
    obs.alphabet = Observable::Alphabet::canonical;
  else
    throw ConfigError("observable: alphabet must be 'ladder' or 'canonical'");
  if (!j.at("terms").is_array() || j.at("terms").empty())
    throw ConfigError("observable: terms must be a nonempty list");
  for (const auto& term : j.at("terms")) {
    if (!term.is_object() || !term.contains("word"))
      throw ConfigError("observable: each term needs a 'word'");
    const Complex coeff =
        term.contains("coeff")
            ? parse_complex(term.at("coeff"), "observable coeff")
            : Complex(1.0, 0.0);
    const std::string word = term.at("word").get<std::string>();
    try {
      if (obs.alphabet == Observable::Alphabet::ladder)
        obs.ladder.terms.push_back({coeff, parse_ladder_word(word)});
      else
        obs.canonical.terms.push_back({coeff, parse_canonical_word(word)});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("observable: ") + e.what());
    }
  }
  return obs;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be an object");

  ExperimentConfig cfg;
  if (!j.contains("kind")) throw ConfigError("missing field 'kind'");
  cfg.kind = j.at("kind").get<std::string>();
  const bool wants_state = cfg.kind == "moments" || cfg.kind == "dynamics" ||
                           cfg.kind == "decompose";
  if (cfg.kind != "moments" && cfg.kind != "dynamics" &&
      cfg.kind != "bounds" && cfg.kind != "decompose")
    throw ConfigError(
        "kind must be moments, dynamics, bounds, or decompose");

  if (wants_state) {
    if (!j.contains("lambda")) throw ConfigError("missing field 'lambda'");
    cfg.lambda = j.at("lambda").get<double>();
    if (!j.contains("M")) throw ConfigError("missing field 'M'");
    cfg.qubit_counts = detail::parse_qubit_counts(j.at("M"));
  }

  if (cfg.kind == "moments" || cfg.kind == "dynamics") {
    if (!(cfg.lambda > 0.0 && cfg.lambda <= 1.0))
      throw ConfigError(
          "lambda must lie in (0, 1] for moment and dynamics experiments");
    if (!j.contains("state")) throw ConfigError("missing field 'state'");
    if (!j.contains("observable"))
      throw ConfigError("missing field 'observable'");
    cfg.observable = detail::parse_observable(j.at("observable"));
  }

  if (wants_state && j.contains("state")) {
    const auto& state = j.at("state");
    if (state.is_string()) {
      cfg.state_preset = state.get<std::string>();
    } else if (state.is_object() && state.contains("elements")) {
      for (const auto& entry : state.at("elements")) {
        if (!entry.is_object() || !entry.contains("n") ||
            !entry.contains("m") || !entry.contains("value"))
          throw ConfigError("state elements: need n, m, value");
        MatrixElement element;
        element.n = entry.at("n").get<int>();
        element.m = entry.at("m").get<int>();
        element.value =
            detail::parse_complex(entry.at("value"), "state element");
        cfg.state_elements.push_back(element);
      }
      if (cfg.state_elements.empty())
        throw ConfigError("state elements: empty list");
    } else {
      throw ConfigError("state: expected a preset string or {elements: []}");
    }
  }

  if (cfg.kind == "dynamics") {
    if (!j.contains("hamiltonian"))
      throw ConfigError("missing field 'hamiltonian'");
    const auto& h = j.at("hamiltonian");
    if (!h.is_array() || h.size() != 4)
      throw ConfigError("hamiltonian: expected 4 coefficients c0..c3");
    QuadraticHamiltonian c;
    c.c0 = detail::parse_complex(h[0], "hamiltonian c0");
    const Complex c1 = detail::parse_complex(h[1], "hamiltonian c1");
    const Complex c2 = detail::parse_complex(h[2], "hamiltonian c2");
    if (c1.imag() != 0.0 || c2.imag() != 0.0)
      throw ConfigError("hamiltonian: c1 and c2 must be real");
    c.c1 = c1.real();
    c.c2 = c2.real();
    c.c3 = detail::parse_complex(h[3], "hamiltonian c3");
    try {
      validate_quadratic(c);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("hamiltonian: ") + e.what());
    }
    cfg.hamiltonian = c;
    if (!j.contains("t")) throw ConfigError("missing field 't'");
    const auto& times = j.at("t");
    if (times.is_number()) {
      cfg.times.push_back(times.get<double>());
    } else if (times.is_array() && !times.empty()) {
      for (const auto& entry : times) cfg.times.push_back(entry.get<double>());
    } else {
      throw ConfigError("t: expected a number or a nonempty list");
    }
  }

  if (cfg.kind == "decompose") {
    if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
      throw ConfigError("lambda must lie in [0, 1] for decompose");
    for (long m : cfg.qubit_counts)
      if (m < 1 || m > 10)
        throw ConfigError("decompose supports 1 <= M <= 10");
    if (cfg.state_preset == "product") {
      cfg.random_states = 0;
    } else if (cfg.state_preset.rfind("random:", 0) == 0) {
      cfg.random_states = std::atoi(cfg.state_preset.c_str() + 7);
      if (cfg.random_states < 1)
        throw ConfigError("decompose state: random:<count> needs count >= 1");
    } else {
      throw ConfigError(
          "decompose state must be 'product' or 'random:<count>'");
    }
  }

  if (cfg.kind == "bounds") {
    cfg.suites = {"beta_bound",  "hermite_growth",
                  "csek_bound",  "tail_decay",
                  "uniform_operator_bound", "strong_convergence"};
    if (j.contains("suites")) {
      const std::vector<std::string> known = cfg.suites;
      cfg.suites.clear();
      for (const auto& entry : j.at("suites")) {
        const std::string name = entry.get<std::string>();
        if (std::find(known.begin(), known.end(), name) == known.end())
          throw ConfigError("unknown bound suite '" + name + "'");
        cfg.suites.push_back(name);
      }
      if (cfg.suites.empty()) throw ConfigError("suites: empty list");
    }
  }

  if (j.contains("tolerances")) {
    const auto& tols = j.at("tolerances");
    if (tols.contains("slope_tol"))
      cfg.tolerances.slope_tol = tols.at("slope_tol").get<double>();
    if (tols.contains("abs_tol"))
      cfg.tolerances.abs_tol = tols.at("abs_tol").get<double>();
  }
  if (j.contains("output")) cfg.output = j.at("output").get<std::string>();

  cfg.dmax = default_dmax;
  if (const char* env = std::getenv("FLUCTLIM_DMAX")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) cfg.dmax = parsed;
  }
  if (j.contains("d_max")) {
    cfg.dmax = j.at("d_max").get<int>();
    if (cfg.dmax < 8) throw ConfigError("d_max: too small to be useful");
  }
  return cfg;
}

struct RunOptions {
  std::string output;  // overrides the config's output field
  bool force = false;
  int threads = 1;
  std::uint64_t seed = 1;
};

namespace detail {

struct CsvRow {
  std::string observable;
  std::string lambda, t, qubits, two_j;
  std::string re_finite, im_finite, re_limit, im_limit, abs_error;
  std::string status = "ok";
};

inline void append_sweep_rows(const ConvergenceReport& report,
                              std::vector<CsvRow>& rows) {
  for (const ReportRow& row : report.rows) {
    CsvRow out;
    out.observable = csv_text(report.observable);
    out.lambda = format_double(report.lambda);
    if (report.t) out.t = format_double(*report.t);
    out.qubits = std::to_string(row.qubits);
    out.status = row.status;
    if (row.status == "ok") {
      out.two_j = std::to_string(row.two_j);
      out.re_finite = format_double(row.finite.real());
      out.im_finite = format_double(row.finite.imag());
      out.re_limit = format_double(report.limit.real());
      out.im_limit = format_double(report.limit.imag());
      out.abs_error = format_double(row.abs_error);
    }
    rows.push_back(std::move(out));
  }
}

inline void append_bound_rows(const BoundReport& report,
                              std::vector<CsvRow>& rows) {
  for (const BoundCheck& check : report.checks) {
    CsvRow out;
    out.observable = csv_text(report.name + ": " + check.label);
    out.re_finite = format_double(check.lhs);
    out.re_limit = format_double(check.rhs);
    out.abs_error = format_double(std::abs(check.lhs - check.rhs));
    out.status = check.slack() >= tol::slack ? "ok" : "violated";
    rows.push_back(std::move(out));
  }
}

// Exit severity: numerical failure dominates a tolerance failure.
inline void raise_exit(int& code, int next) {
  if (next > code) code = next;
}

inline int classify_sweep(const ConvergenceReport& report) {
  bool numeric = false;
  long valid = 0;
  for (const ReportRow& row : report.rows) {
    if (row.status == "ok")
      ++valid;
    else if (row.status != "projection_annihilates")
      numeric = true;
  }
  if (valid < 4) numeric = true;  // projection failures exhausted the rows
  if (numeric) return 3;
  return report.pass ? 0 : 2;
}

inline TruncatedOperator resolve_state(const ExperimentConfig& cfg) {
  if (!cfg.state_preset.empty()) return make_state_preset(cfg.state_preset);
  return make_state_elements(cfg.state_elements);
}

}  // namespace detail

// Executes the config at `config_path`, writes <output>/results.csv and
// <output>/manifest.json (when at least one row was produced), prints one
// summary line per report, and returns the process exit code:
//   0 pass, 1 config error, 2 tolerance failure, 3 numerical failure.
inline int run_experiment(const std::string& config_path,
                          const RunOptions& options, std::ostream& out,
                          std::ostream& err) {
  std::string raw;
  {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      err << "error: cannot read config '" << config_path << "'\n";
      return 1;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    raw = buffer.str();
  }

  ExperimentConfig cfg;
  try {
    cfg = parse_experiment_config(raw);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  const std::string out_dir =
      options.output.empty() ? cfg.output : options.output;
  if (out_dir.empty()) {
    err << "error: no output directory (set config 'output' or --output)\n";
    return 1;
  }
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    err << "error: cannot create output directory '" << out_dir << "'\n";
    return 1;
  }
  if (!options.force && !fs::is_empty(out_dir, ec)) {
    err << "error: output directory '" << out_dir
        << "' is not empty (use --force to override)\n";
    return 1;
  }

  const int threads = std::max(1, options.threads);
  const auto started = std::chrono::steady_clock::now();
  std::vector<detail::CsvRow> rows;
  nlohmann::json reports = nlohmann::json::array();
  std::vector<std::string> summary_lines;
  int exit_code = 0;

  auto note_report = [&](const std::string& name, bool pass,
                         const std::string& failure,
                         const std::string& extra) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["pass"] = pass;
    if (!failure.empty()) entry["failure"] = failure;
    reports.push_back(entry);
    std::string line = pass ? "[PASS] " : "[FAIL] ";
    line += name;
    if (!extra.empty()) line += " | " + extra;
    if (!failure.empty()) line += " | " + failure;
    summary_lines.push_back(line);
  };

  auto sweep_extra = [](const ConvergenceReport& report) {
    std::string extra = "rows=" + std::to_string(report.rows.size());
    if (report.fit) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), " slope=%.4f", report.fit->slope);
      extra += buf;
    }
    return extra;
  };

  try {
    if (cfg.kind == "moments" || cfg.kind == "dynamics") {
      const TruncatedOperator rho = detail::resolve_state(cfg);
      SweepOptions sweep_options;
      sweep_options.slope_tol = cfg.tolerances.slope_tol;
      sweep_options.abs_tol = cfg.tolerances.abs_tol;
      sweep_options.threads = threads;
      sweep_options.dmax = cfg.dmax;
      if (cfg.kind == "moments") {
        ConvergenceReport report =
            sweep(rho, cfg.lambda, *cfg.observable, std::nullopt,
                  std::nullopt, cfg.qubit_counts, sweep_options);
        detail::append_sweep_rows(report, rows);
        detail::raise_exit(exit_code, detail::classify_sweep(report));
        note_report("moments " + report.observable, report.pass,
                    report.failure, sweep_extra(report));
      } else {
        for (double t : cfg.times) {
          ConvergenceReport report =
              sweep(rho, cfg.lambda, *cfg.observable, cfg.hamiltonian, t,
                    cfg.qubit_counts, sweep_options);
          if (report.beyond_t0)
            err << "warning: t=" << t
                << " exceeds the safe horizon t0; results may degrade\n";
          detail::append_sweep_rows(report, rows);
          detail::raise_exit(exit_code, detail::classify_sweep(report));
          note_report("dynamics t=" + detail::format_double(t) + " " +
                          report.observable,
                      report.pass, report.failure, sweep_extra(report));
        }
      }
    } else if (cfg.kind == "bounds") {
      for (const std::string& suite : cfg.suites) {
        BoundReport report;
        if (suite == "beta_bound")
          report = verify_beta_bound();
        else if (suite == "hermite_growth")
          report = verify_hermite_growth();
        else if (suite == "csek_bound")
          report = verify_csek();
        else if (suite == "tail_decay")
          report = verify_tail_decay();
        else if (suite == "uniform_operator_bound")
          report = verify_uniform_operator_bound();
        else if (suite == "strong_convergence")
          report = verify_strong_convergence();
        else
          throw ConfigError("unknown bound suite '" + suite + "'");
        detail::append_bound_rows(report, rows);
        if (!report.pass()) detail::raise_exit(exit_code, 2);
        char extra[80];
        std::snprintf(extra, sizeof(extra), "checks=%zu worst_slack=%.3e",
                      report.checks.size(), report.worst_slack());
        note_report(report.name, report.pass(), "", extra);
      }
    } else {  // decompose
      struct Task {
        long qubits;
        int state_index;  // -1 selects the product state
      };
      std::vector<Task> tasks;
      for (long m : cfg.qubit_counts) {
        if (cfg.random_states == 0) {
          tasks.push_back({m, -1});
        } else {
          for (int s = 0; s < cfg.random_states; ++s) tasks.push_back({m, s});
        }
      }
      const std::vector<OperatorWord> words = default_short_words(2);
      const double word_tol = cfg.tolerances.abs_tol.value_or(1e-9);
      std::vector<std::vector<detail::CsvRow>> slots(tasks.size());
      parallel_for(
          static_cast<long>(tasks.size()), threads, [&](long index) {
            const Task task = tasks[static_cast<std::size_t>(index)];
            const int m = static_cast<int>(task.qubits);
            auto& slot = slots[static_cast<std::size_t>(index)];
            try {
              TruncatedOperator rho_full;
              PermInvariantState state{0, {}};
              if (task.state_index < 0) {
                const int dim = qubit_dim(m);
                const double p = 0.5 * (1.0 + cfg.lambda);
                rho_full = TruncatedOperator::Zero(dim, dim);
                for (int idx = 0; idx < dim; ++idx) {
                  double value = 1.0;
                  for (int site = 0; site < m; ++site)
                    value *= site_bit(idx, site) ? 1.0 - p : p;
                  rho_full(idx, idx) = value;
                }
                state = product_state(cfg.lambda, m);
              } else {
                rho_full = random_symmetrized_state(
                    m, options.seed +
                           static_cast<std::uint64_t>(task.state_index));
                state = brute_force_decompose(rho_full, m);
              }
              const TruncatedOperator f1 =
                  fluctuation_operator_full(pauli(1), cfg.lambda, m);
              const TruncatedOperator f2 =
                  fluctuation_operator_full(pauli(2), cfg.lambda, m);
              const TruncatedOperator lower =
                  0.5 * (f1 + Complex(0.0, 1.0) * f2);
              const TruncatedOperator raise = lower.adjoint();
              for (const OperatorWord& word : words) {
                const Complex full_value =
                    (rho_full * word_matrix(word, lower, raise)).trace();
                Observable obs;
                obs.ladder.terms.push_back({Complex(1.0, 0.0), word});
                const Complex block_value = expectation_finite(state, obs);
                detail::CsvRow row;
                std::string name = detail::word_label(word);
                if (task.state_index >= 0)
                  name += " [random " + std::to_string(task.state_index) + "]";
                row.observable = detail::csv_text(name);
                row.lambda = detail::format_double(cfg.lambda);
                row.qubits = std::to_string(task.qubits);
                row.re_finite = detail::format_double(block_value.real());
                row.im_finite = detail::format_double(block_value.imag());
                row.re_limit = detail::format_double(full_value.real());
                row.im_limit = detail::format_double(full_value.imag());
                const double diff = std::abs(block_value - full_value);
                row.abs_error = detail::format_double(diff);
                row.status = diff <= word_tol ? "ok" : "violated";
                slot.push_back(std::move(row));
              }
            } catch (const Error& e) {
              detail::CsvRow row;
              row.observable = "decompose";
              row.lambda = detail::format_double(cfg.lambda);
              row.qubits = std::to_string(task.qubits);
              row.status = e.code();
              slot.push_back(std::move(row));
            }
          });
      bool all_ok = true;
      bool numeric = false;
      for (const auto& slot : slots) {
        for (const detail::CsvRow& row : slot) {
          if (row.status == "violated")
            all_ok = false;
          else if (row.status != "ok")
            numeric = true;
          rows.push_back(row);
        }
      }
      if (numeric)
        detail::raise_exit(exit_code, 3);
      else if (!all_ok)
        detail::raise_exit(exit_code, 2);
      note_report("decompose", all_ok && !numeric,
                  all_ok && !numeric ? "" : "block/full mismatch",
                  "rows=" + std::to_string(rows.size()));
    }
  } catch (const Error& e) {
    err << "error [" << e.code() << "]: " << e.what() << "\n";
    detail::raise_exit(exit_code, 3);
    nlohmann::json entry;
    entry["name"] = cfg.kind;
    entry["pass"] = false;
    entry["failure"] = e.code() + std::string(": ") + e.what();
    reports.push_back(entry);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();

  if (!rows.empty()) {
    const fs::path csv_path = fs::path(out_dir) / "results.csv";
    std::ofstream csv(csv_path, std::ios::binary);
    csv << "kind,observable,lambda,t,M,two_j,re_finite,im_finite,re_limit,"
           "im_limit,abs_error,status\n";
    for (const detail::CsvRow& row : rows) {
      csv << cfg.kind << ',' << row.observable << ',' << row.lambda << ','
          << row.t << ',' << row.qubits << ',' << row.two_j << ','
          << row.re_finite << ',' << row.im_finite << ',' << row.re_limit
          << ',' << row.im_limit << ',' << row.abs_error << ',' << row.status
          << '\n';
    }
    if (!csv.good()) {
      err << "error: failed writing " << csv_path.string() << "\n";
      return 1;
    }

    nlohmann::json manifest;
    manifest["version"] = version_string;
    manifest["config"] = raw;
    manifest["config_hash"] = "fnv1a64:" + detail::fnv1a64_hex(raw);
    manifest["wall_time_ms"] = elapsed;
    nlohmann::json statuses = nlohmann::json::array();
    for (const detail::CsvRow& row : rows) statuses.push_back(row.status);
    manifest["row_status"] = statuses;
    manifest["summary"] = {{"pass", exit_code == 0},
                           {"exit_code", exit_code},
                           {"reports", reports}};
    const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
    std::ofstream mf(manifest_path, std::ios::binary);
    mf << manifest.dump(2) << "\n";
    if (!mf.good()) {
      err << "error: failed writing " << manifest_path.string() << "\n";
      return 1;
    }
  }

  for (const std::string& line : summary_lines) out << line << "\n";
  return exit_code;
}

}  // namespace fluctlim

#endif
