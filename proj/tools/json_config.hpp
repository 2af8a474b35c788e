// Copyright 2026 The ucp-lns Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <istream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace ucplns::cli {

// Reads option values from a JSON object. Top-level keys are global options;
// an object value keyed by a subcommand name holds that subcommand's options.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_configurable() && !opt->get_lnames().empty()) {
        const auto& name = opt->get_lnames()[0];
        if (opt->count() > 0) {
          const auto& res = opt->results();
          j[name] = res.size() == 1 ? nlohmann::json(res[0]) : nlohmann::json(res);
        } else if (default_also && !opt->get_default_str().empty()) {
          j[name] = opt->get_default_str();
        }
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      nlohmann::json inner = nlohmann::json::parse(to_config(sub, default_also, false, ""));
      if (!inner.empty()) j[sub->get_name()] = inner;
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config: top level must be an object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void collect(const nlohmann::json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        collect(value, next, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

}  // namespace ucplns::cli
