#pragma once

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sepmix/environment.hpp"
#include "sepmix/law.hpp"

namespace sepmix {

struct RunConfig {
    std::optional<LawSpec> law;
    std::string kind;
    nlohmann::json experiment;  // parameters without "kind"
    std::uint64_t seed = 0;
    std::optional<std::string> output;
    std::optional<std::string> format;
    nlohmann::json raw;

    const LawSpec& law_spec() const { return *law; }
    // explicit omega if given, else sampled from the law with `seed`
    Environment environment() const;
    std::string config_hash() const;

    template <class T>
    T get(const char* key, T fallback) const {
        return experiment.contains(key) ? experiment.at(key).get<T>() : fallback;
    }
    bool has(const char* key) const { return experiment.contains(key); }
};

RunConfig parse_config(std::string_view text);
LawSpec parse_law(const nlohmann::json& j, const std::string& path);

}  // namespace sepmix
