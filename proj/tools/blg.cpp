// Copyright 2026 The blg Authors.
//
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

#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "blg/cli.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string backend;
  std::optional<std::uint64_t> shots;
  std::string tables;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "INI configuration file")->required();
  sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--backend", f.backend, "ideal or noisy")->check(CLI::IsMember({"ideal", "noisy"}));
  sub->add_option("--shots", f.shots, "shots per circuit");
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("blg"));
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Band-crossing classification for bilayer graphene via character checks"};
  app.require_subcommand(1);
  Flags f;
  const std::vector<std::string> verbs{"bands", "salc-verify", "charcheck", "noise-sweep", "classify", "report"};
  for (const auto& v : verbs) add_common(app.add_subcommand(v), f);
  app.get_subcommand("salc-verify")->add_option("--tables", f.tables, "character/SALC table file to verify");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : blg::cli::kConfigError;
  }

  try {
    auto c = blg::cli::load_config(f.config);
    if (f.seed) c.seed = f.seed;
    if (!f.out.empty()) c.out_dir = f.out;
    if (!f.backend.empty()) c.backend = f.backend;
    if (f.shots) c.shots = *f.shots;
    if (!f.tables.empty()) c.tables_path = f.tables;
    blg::cli::validate(c);
    if (c.seed) spdlog::info("seed {}", *c.seed);

    const std::string verb = app.get_subcommands().front()->get_name();
    if (verb == "bands") return blg::cli::cmd_bands(c);
    if (verb == "salc-verify") return blg::cli::cmd_salc_verify(c, std::cout);
    if (verb == "charcheck") return blg::cli::cmd_charcheck(c, std::cout);
    if (verb == "noise-sweep") return blg::cli::cmd_noise_sweep(c, std::cout);
    if (verb == "classify") return blg::cli::cmd_classify(c, std::cout);
    return blg::cli::cmd_report(c, std::cout);
  } catch (const blg::Error& e) {
    spdlog::error("{}", e.what());
    return e.kind() == blg::ErrorKind::invalid_config || e.kind() == blg::ErrorKind::unknown_label ? blg::cli::kConfigError
                                                                                                   : blg::cli::kFailure;
  }
}
