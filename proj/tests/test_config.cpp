#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "glassbox/config.hpp"
#include "glassbox/error.hpp"

using namespace glassbox;

TEST_CASE("config defaults") {
  RunConfig c;
  CHECK(c.practice == 1000);
  CHECK(c.test_count() == 100);
  CHECK(c.rounds == 4);
  CHECK(c.practice_candidates == 2000);
  CHECK(c.eval_candidates == 20000);
  CHECK(c.size_cap == 20);
  CHECK(c.epsilon == 0.05);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config parsing") {
  RunConfig c = parse_config(R"(
# comment
[run]
domain = "strings"   # trailing comment
output = "out/#1"
seed = 7
rounds = 2

[problems]
practice = 220
test = 20

[search]
practice_mode = "enumerate"
epsilon = 0.1
)");
  CHECK(c.domain == "strings");
  CHECK(c.output == "out/#1");
  CHECK(c.seed == 7);
  CHECK(c.rounds == 2);
  CHECK(c.practice == 220);
  CHECK(c.test_count() == 20);
  CHECK(c.practice_mode == "enumerate");
  CHECK(c.epsilon == 0.1);
  CHECK(c.eval_candidates == 20000);
}

TEST_CASE("config round-trips through its normalized text") {
  RunConfig c;
  c.domain = "roots";
  c.output = "a \"quoted\" dir";
  c.seed = 123456789012345ULL;
  c.epsilon = 0.07;
  c.learning_rate = 1.0 / 3.0;
  c.l2 = 0;
  c.report_wall_time = true;
  std::string text = config_to_text(c);
  RunConfig back = parse_config(text);
  CHECK(config_to_text(back) == text);
  CHECK(back.output == c.output);
  CHECK(back.seed == c.seed);
  CHECK(back.learning_rate == c.learning_rate);
  CHECK(back.report_wall_time);
  // normalizing a hand-written file is idempotent
  std::string once = config_to_text(parse_config("[run]\ndomain = \"sums\"\n[model]\nl2 = 1e-3\n"));
  CHECK(config_to_text(parse_config(once)) == once);
}

TEST_CASE("config errors name the line") {
  auto message = [](const char* text) {
    try {
      parse_config(text, "x.toml");
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[run]\nseeds = 1\n").find("x.toml:2") != std::string::npos);
  CHECK(message("[nope]\n").find("unknown section") != std::string::npos);
  CHECK(message("[run]\nseed = abc\n").find("expected a number") != std::string::npos);
  CHECK(message("[run]\ndomain = strings\n").find("quoted") != std::string::npos);
  CHECK(message("[run]\nchallenges = yes\n").find("true or false") != std::string::npos);
  CHECK(message("[run\n").find("unterminated") != std::string::npos);
  CHECK(message("[run]\nseed\n").find("key = value") != std::string::npos);
  CHECK(message("[problems]\npractice = 100\ntest = 100\n").find("test") != std::string::npos);
  CHECK(message("[search]\npractice_mode = \"guess\"\n").find("practice_mode") != std::string::npos);
  CHECK(message("[search]\nepsilon = 1.5\n").find("epsilon") != std::string::npos);
  CHECK(message("[model]\nlearning_rate = 0\n").find("learning_rate") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/glassbox.toml"), Error);
}

TEST_CASE("shipped presets parse") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(GLASSBOX_DATA_DIR).parent_path() / "configs";
  int found = 0;
  for (const char* name : {"strings", "number_theory", "roots", "sums", "all"}) {
    fs::path p = dir / (std::string(name) + ".toml");
    REQUIRE(fs::exists(p));
    RunConfig c = load_config(p.string());
    CHECK(c.domain == name);
    ++found;
  }
  CHECK(found == 5);
}
