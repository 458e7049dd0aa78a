// Copyright (C) 2026 The rag4re Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>

#include "support.hpp"

using namespace rag4re;
using namespace rag4re::testing;

namespace {

int run_cli(const std::string& args, const std::filesystem::path& capture) {
    const std::string cmd = std::string("\"") + RAG4RE_CLI_PATH + "\" -q " + args + " > \"" + capture.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("CLI exit codes and subcommands") {
    TempDir tmp;
    auto set = make_synthetic(10, 6);
    auto cfg = write_workspace(tmp.path(), set);
    const auto good = write_config(tmp.path(), cfg).string();
    const auto log = tmp / "log.txt";

    CHECK(run_cli("index --config " + good, log) == 0);
    CHECK(read_file(log).find("10 entries") != std::string::npos);
    CHECK(run_cli("run --config " + good + " --variant rag", log) == 0);
    CHECK(read_file(log).find("F1(%)") != std::string::npos);

    CHECK(run_cli("score --pred " + (tmp / "out" / "rag" / "predictions.jsonl").string() + " --gold " +
                      (tmp / "test.json").string() + " --mode all-labels",
                  log) == 0);
    CHECK(read_file(log).find("all-labels") != std::string::npos);

    CHECK(run_cli("compare --a " + (tmp / "out" / "rag").string() + " --b " + (tmp / "out" / "rag").string(), log) == 0);
    CHECK(run_cli("refine-audit --inventory tacred", log) == 0);
    auto table = Json::parse(read_file(log));
    CHECK(table.contains("unique"));

    CHECK(run_cli("normalize --in " + (tmp / "test.json").string() + " --out " + (tmp / "t.jsonl").string() +
                      " --inventory tacred",
                  log) == 0);
    CHECK(std::filesystem::exists(tmp / "t.jsonl"));

    auto bad = cfg;
    bad["k"] = 0;
    CHECK(run_cli("run --config " + write_config(tmp.path(), bad, "bad.json").string(), log) == 2);

    auto down = cfg;
    down["output_dir"] = "out-down";
    down["generation"] = {{"kind", "http-chat"}, {"endpoint", "http://127.0.0.1:1/v1/chat/completions"},
                          {"model", "m"}, {"retries", 1}, {"backoff_ms", 1}};
    CHECK(run_cli("run --config " + write_config(tmp.path(), down, "down.json").string() + " --variant simple", log) ==
          3);

    CHECK(run_cli("frobnicate", log) != 0);
}
