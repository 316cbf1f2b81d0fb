#pragma once

#include <span>
#include <string>
#include <string_view>

#include "mechsql/params.hpp"

namespace mechsql {

/// Parse the plain-text config format:
///
///     # comment
///     model = physical          (or: rates; default physical)
///     m = 50 pg
///     omega_m = 100 kHz         (Hz-type units are converted to rad/s)
///
/// One `key = value [unit]` per line. Unknown keys, duplicate keys, bad
/// numbers and unknown units raise ConfigError naming the line.
/// `overrides` are `key=value [unit]` strings applied after the file.
ModelConfig parse_config(std::string_view text, std::span<const std::string> overrides = {});

ModelConfig load_config_file(const std::string& path, std::span<const std::string> overrides = {});

/// Canonical `key = value unit` lines (12 significant digits), used for
/// echoing the effective config and for hashing it.
std::string format_config(const ModelConfig& config);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const ModelConfig& config);
std::string text_hash(std::string_view text);

/// The shipped default parameter set (same content as data/default.cfg).
std::string_view default_config_text();
ModelConfig default_config();

/// Dimensionless toy set used for Monte Carlo verification.
std::string_view toy_config_text();

} // namespace mechsql
