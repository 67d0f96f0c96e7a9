#include "varan_app/analyze.hpp"

#include "varan/grids.hpp"

#include <cstdio>
#include <filesystem>

namespace varan::app {
namespace {

std::string g17(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string vec_field(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += " ";
    s += g17(v[i]);
  }
  return s;
}

Json error_entry(const std::string& component, ErrorCode code, const std::string& what) {
  Json e;
  e["component"] = component;
  e["code"] = to_string(code);
  e["message"] = what;
  return e;
}

/// Runs fn; on a library error records it and returns false.
template <class Fn>
bool guarded(const std::string& component, Json& errors, Fn&& fn) {
  try {
    fn();
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config || e.code() == ErrorCode::registry) throw;
    errors.push_back(error_entry(component, e.code(), e.what()));
  }
  return false;
}

}  // namespace

SubgradientPair resolve_anchor(const FunctionHandle& f, const RunConfig& cfg) {
  if (cfg.anchor.empty()) return f.meta().anchors.front();
  const Vec x = Eigen::Map<const Vec>(cfg.anchor.data(), static_cast<Eigen::Index>(cfg.anchor.size()));
  const Vec v = Eigen::Map<const Vec>(cfg.subgrad.data(), static_cast<Eigen::Index>(cfg.subgrad.size()));
  return make_pair(f, x, v);
}

AnalyzeOutput analyze(const RunConfig& cfg) {
  validate(cfg);
  const FunctionHandle f = corpus_get(cfg.function, cfg.params);
  AnalyzeOutput out;
  Json errors = Json::array();

  Json& r = out.report;
  r["schema"] = "varan.report/1";
  r["timestamp"] = utc_timestamp();
  r["status"] = "ok";
  Json echo = Json::object();
  for (const auto& [k, v] : cfg.echo()) echo[k] = v;
  r["config"] = echo;
  Json fn;
  fn["name"] = f.name();
  fn["dim"] = f.dim();
  Json params = Json::object();
  for (const auto& [k, v] : f.meta().params) params[k] = number(v);
  fn["params"] = params;
  fn["prox_level"] = number(f.meta().prox_level);
  fn["declared_s"] = f.meta().s ? number(*f.meta().s) : Json(nullptr);
  fn["declared_kappa"] = f.meta().kappa ? number(*f.meta().kappa) : Json(nullptr);
  r["function"] = fn;

  SubgradientPair anchor;
  if (!guarded("anchor", errors, [&] { anchor = resolve_anchor(f, cfg); })) {
    r["status"] = "error";
    r["errors"] = errors;
    out.bundle_csv = "index,status,n,rank,A,basis\n";
    out.d2_csv = "pair,shell,source,x,v,w,value,low_confidence\n";
    out.epi = Json::object();
    return out;
  }
  r["anchor"] = to_json(anchor);

  const Vec zbar = anchor.x + cfg.lambda * anchor.v;
  guarded("prox", errors, [&] {
    Json p = to_json(prox(f, cfg.lambda, zbar, cfg.prox()));
    p["z"] = to_json(zbar);
    p["lambda"] = number(cfg.lambda);
    r["prox"] = p;
  });

  std::optional<ModulusReport> modulus;
  guarded("modulus", errors, [&] { modulus = modulus_crosscheck(f, anchor, cfg.modulus_check()); });

  const bool critical = anchor.v.norm() == 0.0;
  std::optional<ModulusReport> tilt_report;
  if (critical && modulus && modulus->bundle) {
    guarded("tilt", errors, [&] {
      tilt_report = tilt_crosscheck(f, anchor.x, *modulus->bundle, cfg.tilt_check_config());
    });
  }
  if (modulus) {
    if (tilt_report) {
      modulus->kappa = tilt_report->kappa;
      modulus->tilt_stable = tilt_report->tilt_stable;
      for (auto& rel : tilt_report->relationships) modulus->relationships.push_back(rel);
      for (const auto& [k, v] : tilt_report->config) modulus->config["tilt." + k] = v;
    }
    r["modulus"] = to_json(*modulus);
    r["bundle"] = to_json(*modulus->bundle);
    out.bundle_csv = bundle_csv(*modulus->bundle);
    out.all_pass = modulus->all_pass();
  } else {
    out.bundle_csv = "index,status,n,rank,A,basis\n";
  }

  // d^2 at the anchor and at the final-shell bundle samples.
  std::string rows = "pair,shell,source,x,v,w,value,low_confidence\n";
  const auto sphere = sphere_grid(f.dim(), cfg.sphere_count);
  auto add_rows = [&](const std::string& id, int shell, const std::string& source,
                      const SubgradientPair& p) {
    for (const Vec& w : sphere) {
      const D2Estimate e = d2(f, p.x, p.v, w, cfg.d2());
      rows += id + "," + std::to_string(shell) + "," + source + "," + vec_field(p.x) + "," +
            vec_field(p.v) + "," + vec_field(w) + "," + g17(e.value.as_double()) + "," +
            (e.low_confidence ? "1" : "0") + "\n";
    }
  };
  guarded("d2_samples", errors, [&] {
    add_rows("anchor", -1, "anchor", anchor);
    if (modulus && modulus->bundle) {
      const auto& samples = modulus->bundle->samples;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].shell != cfg.shells - 1) continue;
        add_rows(std::to_string(i), samples[i].shell, samples[i].source, samples[i].pair);
      }
    }
  });
  out.d2_csv = rows;

  out.epi = Json::object();
  if (cfg.epi_probe) {
    guarded("epi_probe", errors, [&] {
      const TwiceEpiProbe probe =
          twice_epi_diff_probe(f, anchor.x, anchor.v, sphere, EpiConfig{}, cfg.d2());
      out.epi["function"] = f.name();
      out.epi["anchor"] = to_json(anchor);
      out.epi["probe"] = to_json(probe);
      r["epi_differentiable"] = probe.epi_differentiable;
    });
  }

  if (!errors.empty()) {
    r["status"] = "error";
    out.all_pass = false;
  }
  r["errors"] = errors;
  return out;
}

void write_outputs(const RunConfig& cfg, const AnalyzeOutput& out) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(ErrorCode::config, "output.dir: " + ec.message());
  const fs::path dir(cfg.out_dir);
  write_file((dir / "report.json").string(), dump(out.report));
  write_file((dir / "bundle_members.csv").string(), out.bundle_csv);
  write_file((dir / "d2_samples.csv").string(), out.d2_csv);
  write_file((dir / "epi_certificates.json").string(), dump(out.epi));
}

}  // namespace varan::app
