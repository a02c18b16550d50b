/*
 * Copyright (c) 2026, The knnpr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "knnpr/cli.hpp"
#include "knnpr/embeddings.hpp"
#include "knnpr/report.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = knnpr::cli::dispatch(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::string without_duration(const std::string& s) {
    static const std::regex duration("\"duration_seconds\": [^,\\n}]*");
    return std::regex_replace(s, duration, "\"duration_seconds\": 0");
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("knnpr_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
        std::mt19937_64 rng(1);
        knnpr::write_embeddings(knnpr::oracle::random_set(300, 4, rng), path("real.epr"));
        knnpr::write_embeddings(knnpr::oracle::random_set(250, 4, rng, 1.3), path("gen.epr"));
        knnpr::write_embeddings(knnpr::EmbeddingSet(4, 1, {0, 1, 2, 3}), path("line_real.epr"));
        knnpr::write_embeddings(knnpr::EmbeddingSet(2, 1, {0.5f, 10.0f}), path("line_gen.epr"));
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, ComputeJsonReport) {
    const auto r = run({"compute", "--real", path("line_real.epr"), "--gen", path("line_gen.epr"), "--k", "1"});
    ASSERT_EQ(r.code, knnpr::cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("\"precision\": 0.500000"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("\"recall\": 1.00000"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("\"sha256:"), std::string::npos);
    EXPECT_NE(r.out.find("\"command\": \"compute\""), std::string::npos);
}

TEST_F(Cli, CsvOutputWritesManifestSidecar) {
    const auto r = run({"compute", "--real", path("real.epr"), "--gen", path("gen.epr"), "--format", "csv", "--out",
                        path("pr.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(slurp(path("pr.csv")).rfind("precision,recall", 0), 0u) << slurp(path("pr.csv"));
    EXPECT_NE(slurp(path("pr.csv.manifest.json")).find("\"version\""), std::string::npos);
}

TEST_F(Cli, RealismCsvUsesInfToken) {
    const auto r = run({"realism", "--real", path("line_real.epr"), "--queries", path("line_real.epr"), "--k", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("index,value\n", 0), 0u) << r.out;
    EXPECT_NE(r.out.find("0,inf\n"), std::string::npos) << r.out;
}

TEST_F(Cli, TruncateSweepCsvHasOneRowPerGridValue) {
    const auto r = run({"synth", "truncate", "--strategy", "D", "--n", "400", "--dim", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 6) << r.out;
    EXPECT_EQ(r.out.rfind("parameter,precision,recall,frechet\n0.200000,", 0), 0u) << r.out;
}

TEST_F(Cli, ParetoAndConvert) {
    std::ofstream(path("pts.csv")) << "id,precision,recall\na,0.9,0.2\nb,0.8,0.4\nc,0.7,0.3\n";
    const auto p = run({"pareto", "--in", path("pts.csv"), "--format", "csv"});
    ASSERT_EQ(p.code, 0) << p.err;
    EXPECT_NE(p.out.find("a,0.900000,0.200000"), std::string::npos) << p.out;
    EXPECT_EQ(p.out.find("c,"), std::string::npos) << p.out;

    ASSERT_EQ(run({"convert", "--in", path("real.epr"), "--out", path("real.csv")}).code, 0);
    ASSERT_EQ(run({"convert", "--in", path("real.csv"), "--out", path("back.epr")}).code, 0);
    EXPECT_EQ(slurp(path("real.epr")), slurp(path("back.epr")));
    EXPECT_TRUE(fs::exists(path("back.epr.manifest.json")));
}

TEST_F(Cli, ErrorsMapToExitCodes) {
    const auto missing = run({"compute", "--real", path("nope.epr"), "--gen", path("gen.epr")});
    EXPECT_EQ(missing.code, knnpr::cli::kExitIo);
    EXPECT_NE(missing.err.find("nope.epr"), std::string::npos) << missing.err;

    EXPECT_EQ(run({"frobnicate"}).code, knnpr::cli::kExitValidation);
    EXPECT_EQ(run({"compute", "--real", path("real.epr")}).code, knnpr::cli::kExitValidation);
    EXPECT_EQ(run({"compute", "--real", path("real.epr"), "--gen", path("gen.epr"), "--k", "0"}).code,
              knnpr::cli::kExitValidation);

    std::ofstream(path("bad.epr")) << "XXXXXXXXXXXXXXXXXXXX";
    const auto bad = run({"compute", "--real", path("bad.epr"), "--gen", path("gen.epr")});
    EXPECT_EQ(bad.code, knnpr::cli::kExitValidation);
    EXPECT_NE(bad.err.find("bad.epr"), std::string::npos) << bad.err;
}

TEST_F(Cli, ConfigFileSuppliesDefaultsAndFlagsWin) {
    std::ofstream(path("run.conf")) << "# defaults\nk = 1\nformat = csv\n";
    const auto a = run({"compute", "--config", path("run.conf"), "--real", path("line_real.epr"), "--gen",
                        path("line_gen.epr")});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out.rfind("precision,recall", 0), 0u) << a.out;
    EXPECT_NE(a.out.find("0.500000,1.00000"), std::string::npos) << a.out;

    const auto b = run({"compute", "--config", path("run.conf"), "--format", "json", "--real", path("line_real.epr"),
                        "--gen", path("line_gen.epr")});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(b.out.front(), '{');

    EXPECT_EQ(run({"compute", "--config", path("absent.conf")}).code, knnpr::cli::kExitIo);
}

TEST_F(Cli, ByteStableAcrossRunsAndThreadCounts) {
    std::ofstream(path("pts.csv")) << "id,precision,recall,aux\na,0.9,0.2,3\nb,0.8,0.4,1\n";
    knnpr::write_embeddings(knnpr::EmbeddingSet(2, 4, {0, 0, 0, 0, 1, 1, 1, 1}), path("ends.epr"));
    const std::vector<std::vector<std::string>> commands{
        {"compute", "--real", path("real.epr"), "--gen", path("gen.epr"), "--query-block", "64"},
        {"realism", "--real", path("real.epr"), "--queries", path("gen.epr")},
        {"interp", "--real", path("real.epr"), "--endpoints", path("ends.epr"), "--steps", "7"},
        {"synth", "modes", "--gen-modes", "3", "--n", "500"},
        {"synth", "truncate", "--strategy", "G", "--n", "300", "--dim", "3", "--grid", "0,0.5"},
        {"synth", "truncate", "--strategy", "E", "--latent", "mapped", "--n", "300", "--dim", "3"},
        {"pareto", "--in", path("pts.csv")},
    };
    for (const auto& cmd : commands) {
        std::vector<std::string> reference;
        for (const char* threads : {"1", "1", "3"}) {
            std::vector<std::string> args{"--threads", threads};
            args.insert(args.end(), cmd.begin(), cmd.end());
            const auto r = run(args);
            ASSERT_EQ(r.code, 0) << cmd[0] << ": " << r.err;
            reference.push_back(without_duration(r.out));
        }
        EXPECT_EQ(reference[0], reference[1]) << cmd[0];
        EXPECT_EQ(reference[0], reference[2]) << cmd[0];
    }
}
