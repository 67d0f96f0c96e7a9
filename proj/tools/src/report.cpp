#include "varan_app/report.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace varan::app {
namespace {

std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void emit(const Json& j, std::string& out, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close_pad(2 * depth, ' ');
  switch (j.type()) {
    case Json::value_t::number_float:
      out += g17(j.get<double>());
      break;
    case Json::value_t::array:
      if (j.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        out += pad;
        emit(j[i], out, depth + 1);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += close_pad + "]";
      break;
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      std::size_t i = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++i) {
        out += pad + Json(it.key()).dump() + ": ";
        emit(it.value(), out, depth + 1);
        out += i + 1 < j.size() ? ",\n" : "\n";
      }
      out += close_pad + "}";
      break;
    }
    default:
      out += j.dump();
  }
}

Json row_major(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) a.push_back(number(m(i, k)));
  }
  return a;
}

Json member_json(const QuadMember& m) {
  Json j = to_json(m.form);
  j["count"] = m.count;
  j["shells"] = m.shells;
  j["max_residual"] = number(m.max_residual);
  Json gaps = Json::array();
  for (double g : m.f_gaps) gaps.push_back(number(g));
  j["f_gaps"] = gaps;
  return j;
}

Json witness_json(const EpiWitness& w) {
  Json j;
  j["x"] = to_json(w.x);
  j["limit"] = number(w.limit);
  j["sampled"] = number(w.sampled);
  Json seq = Json::array();
  for (const Vec& s : w.sequence) seq.push_back(to_json(s));
  j["sequence"] = seq;
  return j;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw Error(ErrorCode::config, "bad number in csv: '" + s + "'");
  return v;
}

}  // namespace

Json number(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json number(const ExtendedReal& x) { return number(x.as_double()); }

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

Json to_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
  return a;
}

Json to_json(const SubgradientPair& p) {
  Json j;
  j["x"] = to_json(p.x);
  j["v"] = to_json(p.v);
  j["fx"] = number(p.fx);
  return j;
}

Json to_json(const GQF& q) {
  Json j;
  j["dim"] = q.dim();
  j["rank"] = q.rank();
  j["A"] = to_json(q.A());
  j["basis"] = to_json(q.basis());
  j["min_on_sphere"] = number(q.min_on_sphere());
  return j;
}

Json to_json(const Relationship& r) {
  Json j;
  j["name"] = r.name;
  j["kind"] = r.kind;
  j["lhs"] = number(r.lhs);
  j["rhs"] = number(r.rhs);
  j["tolerance"] = number(r.tolerance);
  j["pass"] = r.pass;
  j["note"] = r.note;
  return j;
}

Json to_json(const QuadraticBundle& b) {
  Json j;
  j["anchor"] = to_json(b.anchor);
  j["lambda"] = number(b.lambda);
  j["variant"] = to_string(b.variant);
  Json radii = Json::array();
  for (double r : b.radii) radii.push_back(number(r));
  j["radii"] = radii;
  Json members = Json::array();
  for (const auto& m : b.members) members.push_back(member_json(m));
  j["members"] = members;
  Json unstable = Json::array();
  for (const auto& m : b.unstable) unstable.push_back(member_json(m));
  j["unstable"] = unstable;
  j["samples"] = b.samples.size();
  j["rejected_gate"] = b.rejected_gate;
  j["rejected_attentive"] = b.rejected_attentive;
  j["rejected_fit"] = b.rejected_fit;
  j["skipped"] = b.skipped;
  return j;
}

Json to_json(const ModulusReport& r) {
  Json j;
  j["function"] = r.function;
  j["anchor"] = to_json(r.anchor);
  j["s_direct"] = r.s_direct ? number(*r.s_direct) : Json(nullptr);
  j["mu"] = r.mu ? number(*r.mu) : Json(nullptr);
  j["cnv"] = r.cnv ? number(*r.cnv) : Json(nullptr);
  j["cnv_low_confidence"] = r.cnv_low_confidence;
  j["kappa"] = r.kappa ? number(*r.kappa) : Json(nullptr);
  j["tilt_stable"] = r.tilt_stable ? Json(*r.tilt_stable) : Json(nullptr);
  Json rel = Json::array();
  for (const auto& x : r.relationships) rel.push_back(to_json(x));
  j["relationships"] = rel;
  Json cfg = Json::object();
  for (const auto& [k, v] : r.config) cfg[k] = number(v);
  j["config"] = cfg;
  j["all_pass"] = r.all_pass();
  return j;
}

Json to_json(const ProxResult& p) {
  Json j;
  Json mins = Json::array();
  for (const Vec& m : p.minimizers) mins.push_back(to_json(m));
  j["minimizers"] = mins;
  j["value"] = number(p.value);
  j["single_valued"] = p.single_valued();
  const ProxCertificate& c = p.certificate;
  j["certificate"] = {{"grid_points", c.grid_points},    {"halfwidth", number(c.halfwidth)},
                      {"grid_step", number(c.grid_step)}, {"refine_halvings", c.refine_halvings},
                      {"starts", c.starts},               {"expansions", c.expansions},
                      {"dedup_radius", number(c.dedup_radius)}};
  return j;
}

Json to_json(const EpiCertificate& c) {
  Json j;
  j["schedule"] = c.schedule;
  j["liminf_ok"] = c.liminf_ok;
  j["limsup_ok"] = c.limsup_ok;
  j["worst_liminf_gap"] = number(c.worst_liminf_gap);
  j["worst_limsup_gap"] = number(c.worst_limsup_gap);
  j["liminf_witness"] = witness_json(c.liminf_witness);
  j["limsup_witness"] = witness_json(c.limsup_witness);
  j["points"] = c.points;
  return j;
}

Json to_json(const TwiceEpiProbe& p) {
  Json j;
  j["epi_differentiable"] = p.epi_differentiable;
  j["inconclusive"] = p.inconclusive;
  j["certificate"] = to_json(p.certificate);
  Json fit;
  fit["ok"] = p.fit.ok;
  fit["reason"] = p.fit.reason;
  fit["residual"] = number(p.fit.residual);
  fit["finite"] = p.fit.finite;
  fit["form"] = p.fit.ok ? to_json(p.fit.form) : Json(nullptr);
  j["fit"] = fit;
  return j;
}

Json to_json(const TiltResult& t) {
  Json j;
  j["stable"] = t.stable;
  j["kappa_hat"] = number(t.kappa_hat);
  j["delta"] = number(t.delta);
  j["halvings"] = t.halvings;
  j["reason"] = t.reason;
  j["witness"] = to_json(t.witness);
  return j;
}

std::string dump(const Json& j) {
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

double read_number(const Json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  if (j.is_null()) return std::nan("");
  return j.get<double>();
}

Json without_timestamp(Json j) {
  if (j.is_object()) {
    j.erase("timestamp");
    for (auto& [k, v] : j.items()) v = without_timestamp(v);
  } else if (j.is_array()) {
    for (auto& v : j) v = without_timestamp(v);
  }
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::config, "output: cannot write " + path);
  os << content;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::config, "input: cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string bundle_csv(const QuadraticBundle& b) {
  std::string out = "index,status,n,rank,A,basis\n";
  int index = 0;
  auto row = [&](const QuadMember& m, const char* status) {
    auto join = [](const Json& a) {
      std::string s;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += " ";
        s += g17(read_number(a[i]));
      }
      return s;
    };
    out += std::to_string(index++) + "," + status + "," + std::to_string(m.form.dim()) + "," +
           std::to_string(m.form.rank()) + "," + join(row_major(m.form.A())) + "," +
           join(row_major(m.form.basis())) + "\n";
  };
  for (const auto& m : b.members) row(m, "stable");
  for (const auto& m : b.unstable) row(m, "unstable");
  return out;
}

std::vector<CsvMember> parse_bundle_csv(const std::string& text) {
  std::vector<CsvMember> out;
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);
  if (line != "index,status,n,rank,A,basis") {
    throw Error(ErrorCode::config, "bundle csv: unexpected header '" + line + "'");
  }
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() < 5) throw Error(ErrorCode::config, "bundle csv: short row '" + line + "'");
    CsvMember m;
    m.index = std::stoi(cols[0]);
    m.status = cols[1];
    const int n = std::stoi(cols[2]);
    const int rank = std::stoi(cols[3]);
    const auto a = split(cols[4], ' ');
    const auto q = cols.size() > 5 ? split(cols[5], ' ') : std::vector<std::string>{};
    if (static_cast<int>(a.size()) != n * n || static_cast<int>(q.size()) != n * rank) {
      throw Error(ErrorCode::config, "bundle csv: size mismatch in row " + cols[0]);
    }
    Mat A(n, n);
    Mat Q(n, rank);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) A(i, k) = parse_double(a[i * n + k]);
      for (int k = 0; k < rank; ++k) Q(i, k) = parse_double(q[i * rank + k]);
    }
    m.form = GQF::from_canonical(std::move(A), std::move(Q));
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace varan::app
