#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>
#include <openssl/evp.h>

#include "pca.hpp"
#include "rng.hpp"
#include "scue.hpp"

namespace sddmon {

inline constexpr int kScopeModelVersion = 1;

/// Everything the runtime monitor needs, persisted as JSON.
///
/// The reference features are stored after PCA, either embedded or as the
/// path of the raw reference CSV plus its SHA-256 digest.
struct ScopeModel {
  int format_version = kScopeModelVersion;
  PcaModel pca;
  FeatureMatrix reference;  // post-PCA
  std::optional<std::string> reference_path;
  std::optional<std::string> reference_sha256;
  std::map<DistanceKind, Scue> scues;
  std::size_t window = 50;
  RngSeed created_with_seed{};
  EsParams es{};
};

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::kIoError, "sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i)
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Writes `content` next to `path` and renames it into place, so readers
/// never observe a partial file.
inline void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIoError, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot move output into '" + path + "'");
  }
}

// --- JSON mapping -----------------------------------------------------------

inline nlohmann::json to_json(const Scue& s) {
  return {{"kind", to_tag(s.kind)},       {"form", to_tag(s.form)},
          {"coeffs", s.coeffs},           {"sdd_min", s.sdd_min},
          {"sdd_max", s.sdd_max},         {"fit_rmse", s.fit_rmse},
          {"fit_r2", s.fit_r2}};
}

inline Scue scue_from_json(const nlohmann::json& j) {
  Scue s;
  s.kind = kind_from_tag(j.at("kind").get<std::string>());
  s.form = form_from_tag(j.at("form").get<std::string>());
  const auto coeffs = j.at("coeffs").get<std::vector<double>>();
  if (coeffs.size() != 3)
    throw Error(ErrorCode::kParseError, "scue: expected 3 coefficients, got " +
                                            std::to_string(coeffs.size()));
  std::copy(coeffs.begin(), coeffs.end(), s.coeffs.begin());
  s.sdd_min = j.at("sdd_min").get<double>();
  s.sdd_max = j.at("sdd_max").get<double>();
  s.fit_rmse = j.at("fit_rmse").get<double>();
  s.fit_r2 = j.at("fit_r2").get<double>();
  if (!(s.sdd_min < s.sdd_max))
    throw Error(ErrorCode::kParseError, "scue: sdd_min must be below sdd_max");
  return s;
}

inline nlohmann::json to_json(const PcaModel& p) {
  return {{"mean", p.mean},
          {"scale", p.scale},
          {"components", p.components},
          {"explained_ratio", p.explained_ratio},
          {"target", p.target},
          {"standardize", p.standardize}};
}

inline PcaModel pca_from_json(const nlohmann::json& j) {
  PcaModel p;
  p.mean = j.at("mean").get<std::vector<double>>();
  p.scale = j.at("scale").get<std::vector<double>>();
  p.components = j.at("components").get<std::vector<std::vector<double>>>();
  p.explained_ratio = j.at("explained_ratio").get<std::vector<double>>();
  p.target = j.at("target").get<double>();
  p.standardize = j.at("standardize").get<bool>();
  if (p.scale.size() != p.mean.size() || p.components.empty() ||
      p.explained_ratio.size() != p.components.size())
    throw Error(ErrorCode::kParseError, "pca: inconsistent dimensions");
  for (const auto& c : p.components)
    if (c.size() != p.mean.size())
      throw Error(ErrorCode::kParseError, "pca: component length != input dimension");
  return p;
}

inline nlohmann::json to_json(const ScopeModel& m) {
  nlohmann::json j;
  j["format_version"] = m.format_version;
  j["pca"] = to_json(m.pca);
  if (m.reference_path) {
    j["reference"] = {{"path", *m.reference_path}, {"sha256", m.reference_sha256.value_or("")}};
  } else {
    j["reference"] = {{"rows", m.reference.rows()},
                      {"cols", m.reference.cols()},
                      {"data", std::vector<double>(m.reference.data().begin(),
                                                   m.reference.data().end())}};
  }
  auto scues = nlohmann::json::array();
  for (const auto& [kind, s] : m.scues) scues.push_back(to_json(s));
  j["scues"] = scues;
  j["window"] = m.window;
  j["created_with_seed"] = m.created_with_seed.value;
  j["es_t"] = m.es.t;
  return j;
}

/// Parses and validates a ScopeModel. Path references are resolved relative
/// to `base_dir`, digest-checked and projected through the stored PCA.
inline ScopeModel scope_model_from_json(const nlohmann::json& j,
                                        const std::filesystem::path& base_dir = {}) {
  ScopeModel m;
  if (!j.contains("format_version") || !j["format_version"].is_number_integer())
    throw Error(ErrorCode::kVersionMismatch, "scope model has no integer format_version");
  m.format_version = j["format_version"].get<int>();
  if (m.format_version != kScopeModelVersion)
    throw Error(ErrorCode::kVersionMismatch,
                "scope model format_version " + std::to_string(m.format_version) +
                    " is not supported (this build reads version " +
                    std::to_string(kScopeModelVersion) + ")");
  m.pca = pca_from_json(j.at("pca"));
  const auto& ref = j.at("reference");
  if (ref.contains("path")) {
    m.reference_path = ref.at("path").get<std::string>();
    m.reference_sha256 = ref.at("sha256").get<std::string>();
    std::filesystem::path p(*m.reference_path);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    const auto bytes = read_file(p.string());
    if (sha256_hex(bytes) != *m.reference_sha256)
      throw Error(ErrorCode::kParseError,
                  "reference file '" + p.string() + "' does not match the recorded sha256");
    std::istringstream in(bytes);
    m.reference = pca_transform(m.pca, read_feature_csv(in, p.string()));
  } else {
    const auto rows = ref.at("rows").get<std::size_t>();
    const auto cols = ref.at("cols").get<std::size_t>();
    m.reference = FeatureMatrix(rows, cols, ref.at("data").get<std::vector<double>>());
  }
  if (m.reference.cols() != m.pca.output_dim() || m.reference.rows() == 0)
    throw Error(ErrorCode::kDimensionMismatch, "reference does not match the PCA output dimension");
  for (const auto& s : j.at("scues")) {
    auto scue = scue_from_json(s);
    if (!m.scues.emplace(scue.kind, scue).second)
      throw Error(ErrorCode::kParseError,
                  "duplicate estimator for kind " + std::string(to_tag(scue.kind)));
  }
  m.window = j.at("window").get<std::size_t>();
  if (m.window == 0) throw Error(ErrorCode::kParseError, "window must be >= 1");
  m.created_with_seed.value = j.at("created_with_seed").get<std::uint64_t>();
  if (j.contains("es_t")) m.es.t = j["es_t"].get<std::vector<double>>();
  m.es.validate();
  return m;
}

inline std::string dump_scope_model(const ScopeModel& m) { return to_json(m).dump(2) + "\n"; }

inline void save_scope_model(const ScopeModel& m, const std::string& path) {
  write_file_atomic(path, dump_scope_model(m));
}

inline ScopeModel load_scope_model(const std::string& path) {
  const auto text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
  try {
    return scope_model_from_json(j, std::filesystem::path(path).parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
}

}  // namespace sddmon
