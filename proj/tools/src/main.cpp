#include "varan_app/analyze.hpp"
#include "varan_app/suites.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

namespace {

using namespace varan;
using namespace varan::app;

enum Exit { kOk = 0, kCriterion = 1, kConfig = 2, kNumerical = 3 };

struct Flags {
  std::string config;
  std::string func;
  std::vector<std::string> params;
  std::string anchor;
  std::string subgrad;
  std::optional<double> lambda;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string suite;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "INI run config");
  cmd->add_option("--func", f.func, "corpus function name");
  cmd->add_option("--param", f.params, "function parameter k=v (repeatable)");
  cmd->add_option("--anchor", f.anchor, "anchor point x̄, comma separated");
  cmd->add_option("--subgrad", f.subgrad, "subgradient v̄ at the anchor, comma separated");
  cmd->add_option("--lambda", f.lambda, "envelope parameter");
  cmd->add_option("--epsilon", f.epsilon, "attentive localization radius");
  cmd->add_option("--delta", f.delta, "tilt ball radius");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "seed for randomized sweeps");
  cmd->add_option("--suite", f.suite, "acceptance, properties or corpus-sweep");
}

RunConfig build_config(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (!f.func.empty()) {
    if (f.func != cfg.function) {
      cfg.params.clear();
      cfg.anchor.clear();
      cfg.subgrad.clear();
    }
    cfg.function = f.func;
  }
  for (const auto& kv : f.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::config, "--param: expected k=v, got " + kv);
    apply_setting(cfg, "params." + kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!f.anchor.empty()) cfg.anchor = parse_list(f.anchor, "--anchor");
  if (!f.subgrad.empty()) cfg.subgrad = parse_list(f.subgrad, "--subgrad");
  if (!f.anchor.empty() && f.subgrad.empty()) cfg.subgrad.assign(cfg.anchor.size(), 0.0);
  if (f.lambda) cfg.lambda = *f.lambda;
  if (f.epsilon) cfg.epsilon = *f.epsilon;
  if (f.delta) cfg.delta = *f.delta;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (!f.suite.empty()) cfg.suite = f.suite;
  validate(cfg);
  return cfg;
}

int cmd_analyze(const RunConfig& cfg) {
  const AnalyzeOutput out = analyze(cfg);
  write_outputs(cfg, out);
  const Json& r = out.report;
  std::cout << "function " << cfg.function << "  status " << r["status"].get<std::string>()
            << "\n";
  if (r.contains("modulus")) {
    const Json& m = r["modulus"];
    for (const char* k : {"s_direct", "mu", "cnv", "kappa"}) {
      std::cout << "  " << k << " = " << m[k].dump() << "\n";
    }
    for (const auto& rel : m["relationships"]) {
      std::cout << "  [" << (rel["pass"].get<bool>() ? "PASS" : "FAIL") << "] "
                << rel["name"].get<std::string>() << "\n";
    }
  }
  for (const auto& e : r["errors"]) {
    std::cout << "  error in " << e["component"].get<std::string>() << ": "
              << e["message"].get<std::string>() << "\n";
  }
  std::cout << "wrote " << cfg.out_dir << "/report.json\n";
  for (const auto& e : r["errors"]) {
    if (e["code"] == to_string(ErrorCode::anchor_infeasible)) return kConfig;
  }
  if (r["status"] != "ok") return kNumerical;
  return out.all_pass ? kOk : kCriterion;
}

int cmd_bundle(const RunConfig& cfg) {
  const FunctionHandle f = corpus_get(cfg.function, cfg.params);
  const QuadraticBundle b = quad_bundle(f, resolve_anchor(f, cfg), cfg.bundle());
  std::cout << dump(to_json(b));
  return kOk;
}

int cmd_tilt(const RunConfig& cfg) {
  const FunctionHandle f = corpus_get(cfg.function, cfg.params);
  const SubgradientPair a = resolve_anchor(f, cfg);
  std::cout << dump(to_json(tilt_check(f, a.x, cfg.tilt_check_config().tilt)));
  return kOk;
}

int cmd_cnv(const RunConfig& cfg) {
  const FunctionHandle f = corpus_get(cfg.function, cfg.params);
  const CnvEstimate c = cnv_estimate(f, resolve_anchor(f, cfg), cfg.modulus_check().cnv);
  Json j;
  j["function"] = f.name();
  j["cnv"] = number(c.value);
  j["low_confidence"] = c.low_confidence;
  Json stages = Json::array();
  for (std::size_t i = 0; i < c.stages.size(); ++i) {
    stages.push_back({{"beta", number(c.betas[i])}, {"min", number(c.stages[i])}});
  }
  j["stages"] = stages;
  j["pairs"] = c.pairs;
  std::cout << dump(j);
  return kOk;
}

int cmd_suite(const RunConfig& cfg) {
  SuiteOptions opt;
  opt.seed = cfg.seed;
  opt.on_row = [](const CriterionRow& r) {
    SuiteReport one;
    one.rows.push_back(r);
    std::cout << one.table() << std::flush;
  };
  const SuiteReport rep = run_suite(cfg.suite, opt);
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(ErrorCode::config, "output.dir: " + ec.message());
  const std::string path = cfg.out_dir + "/suite_" + cfg.suite + ".json";
  write_file(path, dump(rep.to_json()));
  std::cout << (rep.all_pass() ? "all passed" : "FAILURES") << "; wrote " << path << "\n";
  return rep.all_pass() ? kOk : kCriterion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Second-order variational analysis of extended-real functions"};
  app.require_subcommand(1);
  Flags flags;
  struct Verb {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const std::vector<Verb> verbs = {
      {"analyze", "full report for one function and anchor", cmd_analyze},
      {"bundle", "quadratic bundle at the anchor as JSON", cmd_bundle},
      {"tilt", "tilt-stability check at the anchor point", cmd_tilt},
      {"cnv", "cnv modulus estimate at the anchor", cmd_cnv},
      {"suite", "run a test battery", cmd_suite},
  };
  std::vector<std::pair<CLI::App*, const Verb*>> cmds;
  for (const auto& v : verbs) {
    CLI::App* c = app.add_subcommand(v.name, v.help);
    add_common(c, flags);
    cmds.emplace_back(c, &v);
  }
  app.add_subcommand("corpus-list", "list corpus functions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (app.got_subcommand("corpus-list")) {
      std::cout << corpus_catalog();
      return kOk;
    }
    for (const auto& [cmd, verb] : cmds) {
      if (cmd->parsed()) return verb->run(build_config(flags));
    }
  } catch (const Error& e) {
    std::cerr << "varan: " << to_string(e.code()) << ": " << e.what() << "\n";
    const bool config = e.code() == ErrorCode::config || e.code() == ErrorCode::registry ||
                        e.code() == ErrorCode::anchor_infeasible;
    return config ? kConfig : kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "varan: " << e.what() << "\n";
    return kNumerical;
  }
  return kConfig;
}
