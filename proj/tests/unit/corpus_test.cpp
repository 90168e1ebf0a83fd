#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "hstream/frontend/frontend.hpp"

using namespace hstream::frontend;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<fs::path> programs_in(const std::string& sub) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(fs::path(HSTREAM_PROGRAMS_DIR) / sub)) {
    if (e.path().string().ends_with(".hs.c")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Corpus, InvalidProgramsReportExactlyTheExpectedCode) {
  const auto files = programs_in("invalid");
  ASSERT_GE(files.size(), 12u);
  const std::regex expect_re(R"(//\s*expect:\s*([A-Z_]+))");
  for (const auto& f : files) {
    const std::string src = read_file(f);
    std::smatch m;
    ASSERT_TRUE(std::regex_search(src, m, expect_re)) << f;
    const CheckResult r = compile_source(src);
    std::set<std::string> got;
    for (const auto& d : r.errors) got.insert(d.code);
    EXPECT_EQ(got, (std::set<std::string>{m[1]})) << f.filename() << ": "
                                                    << (r.errors.empty() ? "no errors" : format_diagnostic(f.filename().string(), r.errors[0]));
  }
}

TEST(Corpus, ValidProgramsHaveNoErrors) {
  const auto files = programs_in("valid");
  ASSERT_EQ(files.size(), 6u);
  for (const auto& f : files) {
    const CheckResult r = compile_source(read_file(f));
    EXPECT_TRUE(r.ok()) << f << ": " << (r.errors.empty() ? "" : format_diagnostic(f.string(), r.errors[0]));
    EXPECT_EQ(r.kernels.size(), 1u) << f;
  }
}

TEST(Corpus, ExamplePrograms) {
  const CheckResult stream = compile_source(read_file(fs::path(HSTREAM_PROGRAMS_DIR) / "stream/stream.hs.c"));
  ASSERT_TRUE(stream.ok());
  std::vector<std::string> names;
  for (const auto& k : stream.kernels) names.push_back(k.name);
  EXPECT_EQ(names, (std::vector<std::string>{"Init", "Warmup", "Copy", "Scale", "Add", "Triad", "Fill", "Daxpy"}));

  const CheckResult triad = compile_source(read_file(fs::path(HSTREAM_PROGRAMS_DIR) / "triad/triad.hs.c"));
  ASSERT_TRUE(triad.ok());
  ASSERT_EQ(triad.kernels.size(), 1u);
  EXPECT_EQ(triad.kernels[0].name, "Triad");
}
