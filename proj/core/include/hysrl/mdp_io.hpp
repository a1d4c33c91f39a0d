#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hysrl/mdp.hpp"

namespace hysrl {

/// Malformed or unreadable document.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
JSON document {"S","A","H","kernel":[[[...]]],"reward":[[...]],"rho":[...]}
with kernel nesting s -> a -> s'. An optional "generator" object records how
the MDP was produced; pass it pre-serialized.
*/
std::string mdp_to_json(const TabularMDP& mdp, std::string_view generator_json = {});
TabularMDP mdp_from_json(std::string_view text);
/// The serialized "generator" object, or an empty string when absent.
std::string generator_from_json(std::string_view text);

TabularMDP load_mdp(const std::filesystem::path& path);
void save_mdp(const std::filesystem::path& path, const TabularMDP& mdp,
              std::string_view generator_json = {});

/// Stable 64-bit FNV-1a hash of the canonical JSON form, as 16 hex digits.
std::string fingerprint(const TabularMDP& mdp);

/// Deterministic JSON policy: {"H","S","A","actions":[[...]]} (h -> s) or
/// {"H","S","A","probs":[[[...]]]} (h -> s -> a).
std::string policy_to_json(const Policy& pi);
Policy policy_from_json(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace hysrl
