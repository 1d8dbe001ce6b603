// Copyright 2026 The ppc-lidar Authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value run configuration shared by every subcommand.

#ifndef PPC_TOOLS_SETTINGS_HPP_
#define PPC_TOOLS_SETTINGS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ppc::cli {

struct KeySpec {
    const char* name;
    const char* default_value;
    const char* help;
};

// Every key the tool understands, with its default.
const std::vector<KeySpec>& known_keys();
const KeySpec& key_spec(std::string_view name);

class Settings {
  public:
    Settings();

    // Lines are `key = value`; `#` starts a comment. Unknown keys and
    // malformed lines throw ValidationError; unreadable files IoError.
    void load_file(const std::filesystem::path& path);
    void set(std::string_view key, std::string value);

    const std::string& get(std::string_view key) const;
    double get_double(std::string_view key) const;
    std::int64_t get_int(std::string_view key) const;
    std::uint64_t get_u64(std::string_view key) const;
    bool get_bool(std::string_view key) const;
    // "none" and "auto" map to nullopt.
    std::optional<double> get_optional_double(std::string_view key) const;
    // Comma separated list; whitespace around items is ignored.
    std::vector<std::string> get_list(std::string_view key) const;

    // Resolved configuration; loading it back reproduces the run.
    std::string dump(std::string_view command) const;
    void write(const std::filesystem::path& path, std::string_view command) const;

  private:
    std::map<std::string, std::string, std::less<>> values_;
};

double parse_double(std::string_view key, std::string_view text);
std::int64_t parse_int(std::string_view key, std::string_view text);

}  // namespace ppc::cli

#endif  // PPC_TOOLS_SETTINGS_HPP_
