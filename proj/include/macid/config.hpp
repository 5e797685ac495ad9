#pragma once

#include "macid/pipeline.hpp"

#include <json.hpp>

#include <fstream>
#include <string>

namespace macid {

/// Parses "text" or "records".
inline auto parse_output_format(std::string_view s) -> OutputFormat {
  if (s == "text")
    return OutputFormat::Text;
  if (s == "records")
    return OutputFormat::Records;
  throw input_error("unknown output format '" + std::string(s) +
                    "' (expected text or records)");
}

inline auto parse_threshold(std::string_view s) -> MacDistance {
  try {
    const auto v = parse_hex(s);
    if (v > MacAddress::max_value)
      throw input_error("threshold exceeds 48 bits");
    return MacDistance{v};
  } catch (const std::invalid_argument& e) {
    throw input_error("threshold '" + std::string(s) + "': " + e.what());
  }
}

inline void check_settings(const RunConfig& cfg) {
  if (cfg.buckets == 0 || cfg.buckets > (std::size_t{1} << 24))
    throw input_error("buckets must be between 1 and 16777216");
  if (cfg.vuln.min_product_overlap == 0)
    throw input_error("min_product_overlap must be at least 1");
}

/// Applies a JSON configuration object on top of `cfg`. Keys mirror the
/// command-line flags with underscores: pcap, iface, device_db, blacklist,
/// truth, cve, registry_mal, registry_mam, registry_mas, threshold (hex
/// string), format, buckets, include_replies, vuln_fallback,
/// min_product_overlap, blacklist_truth. Unknown keys are rejected.
inline void apply_config(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object())
    throw input_error("configuration must be a JSON object");
  auto text = [&](const std::string& key, const nlohmann::json& v) {
    if (!v.is_string())
      throw input_error("config key '" + key + "' must be a string");
    return v.get<std::string>();
  };
  auto flag = [&](const std::string& key, const nlohmann::json& v) {
    if (!v.is_boolean())
      throw input_error("config key '" + key + "' must be a boolean");
    return v.get<bool>();
  };
  auto count = [&](const std::string& key, const nlohmann::json& v) {
    if (!v.is_number_unsigned())
      throw input_error("config key '" + key +
                        "' must be a non-negative integer");
    return v.get<std::size_t>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "pcap")
      cfg.pcap = text(key, v);
    else if (key == "iface")
      cfg.iface = text(key, v);
    else if (key == "device_db")
      cfg.device_db = text(key, v);
    else if (key == "blacklist")
      cfg.blacklist = text(key, v);
    else if (key == "truth")
      cfg.truth = text(key, v);
    else if (key == "cve")
      cfg.cve = text(key, v);
    else if (key == "registry_mal")
      cfg.registry_mal = text(key, v);
    else if (key == "registry_mam")
      cfg.registry_mam = text(key, v);
    else if (key == "registry_mas")
      cfg.registry_mas = text(key, v);
    else if (key == "threshold")
      cfg.threshold = parse_threshold(text(key, v));
    else if (key == "format")
      cfg.format = parse_output_format(text(key, v));
    else if (key == "buckets")
      cfg.buckets = count(key, v);
    else if (key == "include_replies")
      cfg.policy.include_replies = flag(key, v);
    else if (key == "vuln_fallback")
      cfg.vuln.vendor_fallback = flag(key, v);
    else if (key == "min_product_overlap")
      cfg.vuln.min_product_overlap = count(key, v);
    else if (key == "blacklist_truth")
      cfg.blacklist_truth = flag(key, v);
    else
      throw input_error("unknown config key '" + key + "'");
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in{path};
  if (!in)
    throw input_error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw input_error("config file '" + path + "': " + e.what());
  }
  apply_config(cfg, j);
}

} // namespace macid
