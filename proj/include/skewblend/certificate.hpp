#ifndef SKEWBLEND_CERTIFICATE_HPP
#define SKEWBLEND_CERTIFICATE_HPP

#include <string>

#include <json.hpp>

#include "skewblend/cycles.hpp"

namespace skewblend {

using Json = nlohmann::ordered_json;

inline constexpr int kCertificateSchemaVersion = 1;

// All certificates share the envelope: schema version, kind, seed, timestamp
// and a full system echo; replaying from the echo reproduces the slacks.
Json json_of(const SkewSystem& sys);
SkewSystem system_of_json(const Json& j);

Json json_of(const Region& r);
Region region_of_json(const Json& j);

Json json_of(const ConstantsReport& r);
Json json_of(const InequalityCheck& q);
Json json_of(const CoveringCertificate& cert);
CoveringCertificate covering_of_json(const Json& j);
Json json_of(const ConleyMoserCertificate& cert);
Json json_of(const ConeCertificate& cert);
Json json_of(const RefinementTrace& tr);
Json json_of(const TransitionWitness& w);
Json json_of(const CycleCertificate& cert);
Json json_of(const TangentDirectionReport& rep);
Json json_of(const TangencyCertificate& cert);
TangencyCertificate tangency_of_json(const Json& j);
Json json_of(const ProbeReport& rep);

// Wraps a payload in the envelope and writes it; timestamp is the only
// non-reproducible field.
void write_certificate(const std::string& path, const std::string& kind, const Json& payload,
                       unsigned long long seed);
Json read_certificate(const std::string& path, const std::string& expected_kind = "");

// CSV of (n, vector id, norm, bound C lambda^|n|), n ascending then id.
void emit_decay_csv(const TangentDirectionReport& rep, const std::string& path);

}  // namespace skewblend

#endif
