#pragma once

#include "varan/epi.hpp"
#include "varan/moreau.hpp"
#include "varan/stability.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace varan::app {

using Json = nlohmann::ordered_json;

/// Finite doubles stay numbers; +inf and -inf become the strings "inf" and
/// "-inf", NaN becomes null.
Json number(double x);
Json number(const ExtendedReal& x);
Json to_json(const Vec& v);
/// Array of rows.
Json to_json(const Mat& m);
Json to_json(const SubgradientPair& p);
Json to_json(const GQF& q);
Json to_json(const Relationship& r);
Json to_json(const QuadraticBundle& b);
Json to_json(const ModulusReport& r);
Json to_json(const ProxResult& p);
Json to_json(const EpiCertificate& c);
Json to_json(const TwiceEpiProbe& p);
Json to_json(const TiltResult& t);

/// Serializer with every double printed as %.17g. Key order is insertion
/// order, so equal inputs give equal bytes.
std::string dump(const Json& j);

/// Reads "inf"/"-inf" strings back as doubles.
double read_number(const Json& j);

/// Removes every "timestamp" member (recursively).
Json without_timestamp(Json j);

/// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

struct CsvMember {
  int index = 0;
  /// "stable" or "unstable".
  std::string status;
  GQF form;
};

/// One row per member: index, status, n, rank, then A (n*n, row-major) and
/// the basis (n*rank, row-major), all as %.17g.
std::string bundle_csv(const QuadraticBundle& b);
std::vector<CsvMember> parse_bundle_csv(const std::string& text);

}  // namespace varan::app
