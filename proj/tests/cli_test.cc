/* Copyright 2026 The bertperf Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include <gtest/gtest.h>

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result Invoke(const std::string& args) {
  const std::string cmd = std::string(BERTPERF_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Config(const char* name) {
  return std::string(BERTPERF_CONFIG_DIR) + "/" + name;
}

TEST(CliTest, Analyze) {
  const Result json = Invoke("analyze --config " + Config("bert_large_phase1.json"));
  EXPECT_EQ(json.code, 0);
  EXPECT_NE(json.out.find("\"LambUpdate\""), std::string::npos);
  const Result csv = Invoke("analyze --config " + Config("bert_large_phase1.json") +
                         " --precision mixed --format csv");
  EXPECT_EQ(csv.code, 0);
  EXPECT_EQ(csv.out.rfind("batch_size,", 0), 0u);
  EXPECT_NE(csv.out.find(",mixed,"), std::string::npos);
}

TEST(CliTest, Sweep) {
  const Result r = Invoke("sweep --config " + Config("bert_large_phase1.json") +
                       " --axis batch_size --values 4,32");
  EXPECT_EQ(r.code, 0);
  int lines = 0;
  for (char c : r.out) lines += c == '\n';
  EXPECT_EQ(lines, 3);
}

TEST(CliTest, Whatif) {
  for (const char* t : {"fuse-linear", "fuse-elementwise", "microbatch:4"}) {
    const Result r = Invoke("whatif --config " + Config("bert_large_phase1.json") +
                         " --transform " + t);
    EXPECT_EQ(r.code, 0) << t;
    EXPECT_NE(r.out.find("\"delta\""), std::string::npos) << t;
  }
  EXPECT_EQ(Invoke("whatif --config " + Config("bert_large_phase1.json") +
                " --transform microbatch:3").code, 2);
  EXPECT_EQ(Invoke("whatif --config " + Config("bert_large_phase1.json") +
                " --transform unroll").code, 2);
}

TEST(CliTest, LambVerify) {
  const Result r = Invoke("lamb-verify --trials 50 --seed 3");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("PASS", 0), 0u);
}

TEST(CliTest, DumpGraph) {
  const Result r = Invoke("dump-graph --config " + Config("bert_base_phase1.json"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("{\"id\":0,", 0), 0u);
}

TEST(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(Invoke("analyze --config /nonexistent.json").code, 2);
  EXPECT_EQ(Invoke("analyze --config " + Config("bert_large_phase1.json") +
                " --precision fp8").code, 2);
  EXPECT_EQ(Invoke("sweep --config " + Config("bert_large_phase1.json") +
                " --axis vocab --values 1").code, 2);
  EXPECT_EQ(Invoke("bogus").code, 2);
  EXPECT_EQ(Invoke("").code, 2);
}

}  // namespace
