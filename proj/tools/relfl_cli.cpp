// relfl: batch tables and verification sweeps.
//
//   relfl table-phi   pushforward Phi(w^(i,j)), closed form vs brute force
//   relfl verify-fl   fundamental-lemma reports over a grid of stable classes
//   relfl verify-ro   relative orbital integrals vs orbital integrals of Phi
//
// Exit codes: 0 all verified, 1 mathematical mismatch, 2 configuration or precision error.

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "relfl/closed_forms.hpp"
#include "relfl/version.hpp"

using namespace relfl;
using nlohmann::json;

namespace {

struct RunConfig {
  std::vector<int> qs{3};
  int precision = 16;
  int max_ij = 3;
  int max_n = 3;
  std::uint64_t window_cap = 50'000'000;
  std::string out = "-";
  std::string format = "json";
  int jobs = 1;
  std::uint64_t seed = 1;
  bool timings = false;

  void validate() const {
    if (qs.empty()) throw InvalidParams("--q needs at least one prime");
    for (int q : qs) {
      if (!is_odd_prime(q)) throw InvalidParams("--q entries must be odd primes, got " + std::to_string(q));
    }
    if (precision < 1) throw InvalidParams("--precision must be positive");
    if (max_ij < 0 || max_n < 0) throw InvalidParams("parameter ranges must be non-negative");
    if (jobs < 1) throw InvalidParams("--jobs must be positive");
    if (window_cap < 1) throw InvalidParams("--window-cap must be positive");
  }

  BruteForceOptions brute_options() const {
    BruteForceOptions o;
    o.count.node_cap = window_cap;
    return o;
  }

  json to_json(const std::string& command) const {
    return {{"command", command},   {"q", qs},           {"precision", precision}, {"max_ij", max_ij},
            {"max_n", max_n},       {"window_cap", window_cap}, {"format", format}, {"jobs", jobs},
            {"seed", seed},         {"timings", timings}};
  }
};

// Runs f(i) for i in [0, n) on up to `jobs` threads; rethrows the failure with the lowest index.
template <typename F>
void parallel_for(std::size_t n, int jobs, F f) {
  std::atomic<std::size_t> next{0};
  std::mutex m;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_field(fields[i]);
  }
  return line + "\n";
}

std::string provenance_comment(const RunConfig& cfg, const std::string& command) {
  return "# relfl " + std::string(kVersion) + " " + cfg.to_json(command).dump() + "\n";
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty() || cfg.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw InvalidParams("cannot open output file " + cfg.out);
  f << text;
  if (!f) throw InvalidParams("cannot write output file " + cfg.out);
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

// table-phi ------------------------------------------------------------------

struct PhiRow {
  int q, i, j;
  QPoly closed;
  std::int64_t brute = 0;
  bool certified = false;
  bool equal() const { return certified && closed.evaluate(q) == brute; }
};

int cmd_table_phi(const RunConfig& cfg) {
  std::vector<PhiRow> rows;
  std::vector<int> sorted_q = cfg.qs;
  std::sort(sorted_q.begin(), sorted_q.end());
  sorted_q.erase(std::unique(sorted_q.begin(), sorted_q.end()), sorted_q.end());
  for (int q : sorted_q) {
    for (int i = 0; i <= cfg.max_ij; ++i) {
      for (int j = 0; j <= cfg.max_ij; ++j) rows.push_back({q, i, j, phi_closed(i, j)});
    }
  }
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t idx) {
    PhiRow& r = rows[idx];
    const FieldConfig field(r.q, cfg.precision);
    try {
      const IntegralResult res =
          pushforward_at(HermitianElement(orbit_representative({r.i, r.j}, field)), field, cfg.brute_options());
      r.brute = res.value;
      r.certified = res.certified;
    } catch (const InsufficientPrecision& e) {
      throw InsufficientPrecision("cell q=" + std::to_string(r.q) + " (i,j)=(" + std::to_string(r.i) + "," +
                                  std::to_string(r.j) + "): " + e.what());
    }
  });

  bool all_equal = true;
  for (const auto& r : rows) all_equal = all_equal && r.equal();
  std::string text;
  if (cfg.format == "csv") {
    text = provenance_comment(cfg, "table-phi") + csv_row({"i", "j", "q", "closed", "brute", "equal"});
    for (const auto& r : rows) {
      text += csv_row({std::to_string(r.i), std::to_string(r.j), std::to_string(r.q), r.closed.to_string(),
                       std::to_string(r.brute), bool_text(r.equal())});
    }
  } else {
    json out = {{"tool", "relfl"}, {"version", kVersion}, {"config", cfg.to_json("table-phi")}};
    json& list = out["rows"] = json::array();
    for (const auto& r : rows) {
      list.push_back({{"i", r.i},
                      {"j", r.j},
                      {"q", r.q},
                      {"closed", r.closed.to_string()},
                      {"closed_value", r.closed.evaluate(r.q)},
                      {"brute", r.brute},
                      {"certified", r.certified},
                      {"equal", r.equal()}});
    }
    out["summary"] = {{"rows", rows.size()}, {"all_equal", all_equal}};
    text = out.dump(2) + "\n";
  }
  emit(cfg, text);
  return all_equal ? 0 : 1;
}

// verify-fl ------------------------------------------------------------------

struct FlRow {
  int q;
  std::string label;
  StableClassParams params;
  std::optional<FlReport> report;
};

int cmd_verify_fl(const RunConfig& cfg) {
  std::vector<FlRow> rows;
  std::vector<int> sorted_q = cfg.qs;
  std::sort(sorted_q.begin(), sorted_q.end());
  sorted_q.erase(std::unique(sorted_q.begin(), sorted_q.end()), sorted_q.end());
  for (int q : sorted_q) {
    const FieldConfig field(q, cfg.precision);
    for (auto& g : stable_class_grid(field, cfg.max_n, cfg.seed)) rows.push_back({q, g.label, g.params, {}});
  }
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t idx) {
    FlRow& r = rows[idx];
    const FieldConfig field(r.q, cfg.precision);
    try {
      r.report = fl_verify(r.params, field, cfg.brute_options(), cfg.timings);
    } catch (const Error& e) {
      throw InvalidParams("point q=" + std::to_string(r.q) + " " + r.label + ": " + e.what());
    }
  });

  std::size_t passed = 0, vanishing = 0;
  for (const auto& r : rows) {
    passed += r.report->passed() ? 1 : 0;
    vanishing += r.report->lhs.is_zero() ? 1 : 0;
  }
  std::string text;
  if (cfg.format == "csv") {
    text = provenance_comment(cfg, "verify-fl") +
           csv_row({"q", "label", "n1", "n2", "n", "v_plus", "v_minus", "case", "lhs", "delta_plus", "orb_plus",
                    "orb_minus", "rhs_closed", "rhs_brute", "passed"});
    for (const auto& r : rows) {
      const FlReport& f = *r.report;
      const json j = f.to_json();
      text += csv_row({std::to_string(r.q), r.label, f.n1 == kInfinity ? "inf" : std::to_string(f.n1),
                       std::to_string(f.n2), std::to_string(f.n), std::to_string(f.v_plus), std::to_string(f.v_minus),
                       std::to_string(f.orbit_case), f.lhs.to_string(), f.delta_plus.to_string(),
                       std::to_string(f.orb_plus_brute), std::to_string(f.orb_minus_brute), f.rhs_closed.to_string(),
                       j["relative"]["brute"].get<std::string>(), bool_text(f.passed())});
    }
  } else {
    json out = {{"tool", "relfl"}, {"version", kVersion}, {"config", cfg.to_json("verify-fl")}};
    json& list = out["reports"] = json::array();
    for (const auto& r : rows) {
      json j = r.report->to_json();
      j["label"] = r.label;
      list.push_back(std::move(j));
    }
    out["summary"] = {{"points", rows.size()}, {"passed", passed}, {"vanishing", vanishing}};
    text = out.dump(2) + "\n";
  }
  emit(cfg, text);
  return passed == rows.size() ? 0 : 1;
}

// verify-ro ------------------------------------------------------------------

struct RoRow {
  std::string label;
  int sign;
  StableClassParams params;
  int n = 0;
  bool has_fiber = false;
  std::int64_t ro = 0;
  std::int64_t orb = 0;
  bool certified = false;
  bool equal() const { return certified && ro == orb; }
};

int cmd_verify_ro(const RunConfig& cfg) {
  std::vector<RoRow> rows;
  std::vector<int> sorted_q = cfg.qs;
  std::sort(sorted_q.begin(), sorted_q.end());
  sorted_q.erase(std::unique(sorted_q.begin(), sorted_q.end()), sorted_q.end());
  for (int q : sorted_q) {
    const FieldConfig field(q, cfg.precision);
    for (auto& g : stable_class_grid(field, cfg.max_n, cfg.seed)) {
      for (int sign : {1, -1}) {
        const StableClassParams p = sign == 1 ? g.params : companion_delta(g.params);
        const int n = p.det_valuation();
        if (n > 2) continue;
        rows.push_back({"q=" + std::to_string(q) + "," + g.label, sign, p, n});
      }
    }
  }
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t idx) {
    RoRow& r = rows[idx];
    const FieldConfig field(r.params.a().field().q(), cfg.precision);
    const HermitianElement d = build_delta(r.params);
    try {
      const IntegralResult orb = orb_bruteforce(d, IndicatorSpec::phi_n(r.n), field, cfg.brute_options());
      r.orb = orb.value;
      const auto x = contraction_section(d, field);
      r.has_fiber = x.has_value();
      if (x) {
        const IntegralResult ro = ro_bruteforce(*x, field, cfg.brute_options());
        r.ro = ro.value;
        r.certified = ro.certified && orb.certified;
      } else {
        r.certified = orb.certified;
      }
    } catch (const WindowTooLarge& e) {
      throw WindowTooLarge("point " + r.label + ": " + e.what() +
                           "; raise --window-cap or lower --max-n (the double sum grows quickly)");
    }
  });

  bool all_equal = true;
  for (const auto& r : rows) all_equal = all_equal && r.equal();
  std::string text;
  if (cfg.format == "csv") {
    text = provenance_comment(cfg, "verify-ro") +
           csv_row({"label", "sign", "val_det", "fiber", "ro", "orb", "equal"});
    for (const auto& r : rows) {
      text += csv_row({r.label, std::to_string(r.sign), std::to_string(r.n), r.has_fiber ? "section" : "empty",
                       std::to_string(r.ro), std::to_string(r.orb), bool_text(r.equal())});
    }
  } else {
    json out = {{"tool", "relfl"}, {"version", kVersion}, {"config", cfg.to_json("verify-ro")}};
    json& list = out["rows"] = json::array();
    for (const auto& r : rows) {
      list.push_back({{"label", r.label},
                      {"sign", r.sign},
                      {"params", r.params.to_string()},
                      {"val_det", r.n},
                      {"fiber", r.has_fiber ? "section" : "empty"},
                      {"ro", r.ro},
                      {"orb", r.orb},
                      {"certified", r.certified},
                      {"equal", r.equal()}});
    }
    out["summary"] = {{"rows", rows.size()}, {"all_equal", all_equal}};
    text = out.dump(2) + "\n";
  }
  emit(cfg, text);
  return all_equal ? 0 : 1;
}

void add_common(CLI::App* sub, RunConfig& cfg, bool ij, bool n) {
  sub->add_option("--q", cfg.qs, "Residue field sizes (odd primes)")->delimiter(',')->envname("RELFL_Q");
  sub->add_option("--precision", cfg.precision, "Relative precision N of field elements")->envname("RELFL_PRECISION");
  if (ij) sub->add_option("--max-ij", cfg.max_ij, "Largest orbit index i, j")->envname("RELFL_MAX_IJ");
  if (n) sub->add_option("--max-n", cfg.max_n, "Largest valuation n1, n2")->envname("RELFL_MAX_N");
  sub->add_option("--window-cap", cfg.window_cap, "Node cap per counting sum")->envname("RELFL_WINDOW_CAP");
  sub->add_option("--out", cfg.out, "Output path, - for stdout")->envname("RELFL_OUT");
  sub->add_option("--format", cfg.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->envname("RELFL_FORMAT");
  sub->add_option("--jobs", cfg.jobs, "Worker threads")->envname("RELFL_JOBS");
  sub->add_option("--seed", cfg.seed, "Seed for sampled units")->envname("RELFL_SEED");
  sub->add_flag("--timings", cfg.timings, "Record wall-clock times (reports are then not reproducible)")
      ->envname("RELFL_TIMINGS");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact orbital-integral tables and fundamental-lemma checks on Herm(V_2)"};
  app.set_version_flag("--version", std::string("relfl ") + kVersion);
  app.require_subcommand(1);

  RunConfig table_cfg, fl_cfg, ro_cfg;
  fl_cfg.qs = {3, 5};
  ro_cfg.max_n = 1;
  auto* table = app.add_subcommand("table-phi", "Tabulate Phi(w^(i,j)): closed form vs brute force");
  add_common(table, table_cfg, true, false);
  auto* fl = app.add_subcommand("verify-fl", "Sweep stable classes and verify the fundamental lemma");
  add_common(fl, fl_cfg, false, true);
  auto* ro = app.add_subcommand("verify-ro", "Compare relative orbital integrals with Orb(r(x), Phi), val det <= 2");
  add_common(ro, ro_cfg, false, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (table->parsed()) {
      table_cfg.validate();
      return cmd_table_phi(table_cfg);
    }
    if (fl->parsed()) {
      fl_cfg.validate();
      return cmd_verify_fl(fl_cfg);
    }
    ro_cfg.validate();
    return cmd_verify_ro(ro_cfg);
  } catch (const std::exception& e) {
    std::cerr << "relfl: error: " << e.what() << "\n";
    return 2;
  }
}
