#include "glassbox/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "glassbox/error.hpp"

namespace glassbox {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// One config key: how to read it from text and write it back.
struct Field {
  const char* section;
  const char* key;
  std::function<void(RunConfig&, std::string_view, const std::function<void(const std::string&)>&)> read;
  std::function<std::string(const RunConfig&)> write;
};

template <class T>
T parse_number(std::string_view v, const std::function<void(const std::string&)>& fail) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) fail("expected a number, got '" + std::string(v) + "'");
  return out;
}

std::string parse_string(std::string_view v, const std::function<void(const std::string&)>& fail) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') fail("expected a quoted string");
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '\\' && i + 2 < v.size()) ++i;
    out += v[i];
  }
  return out;
}

bool parse_bool(std::string_view v, const std::function<void(const std::string&)>& fail) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail("expected true or false");
  return false;
}

#define GB_STR(sec, name)                                                                      \
  Field {                                                                                      \
    sec, #name, [](RunConfig& c, std::string_view v, const auto& f) { c.name = parse_string(v, f); }, \
        [](const RunConfig& c) { return quote(c.name); }                                      \
  }
#define GB_NUM(sec, name, T)                                                                   \
  Field {                                                                                      \
    sec, #name, [](RunConfig& c, std::string_view v, const auto& f) { c.name = parse_number<T>(v, f); }, \
        [](const RunConfig& c) { return std::to_string(c.name); }                             \
  }
#define GB_DBL(sec, name)                                                                      \
  Field {                                                                                      \
    sec, #name, [](RunConfig& c, std::string_view v, const auto& f) { c.name = parse_number<double>(v, f); }, \
        [](const RunConfig& c) { return format_double(c.name); }                              \
  }
#define GB_BOOL(sec, name)                                                                     \
  Field {                                                                                      \
    sec, #name, [](RunConfig& c, std::string_view v, const auto& f) { c.name = parse_bool(v, f); }, \
        [](const RunConfig& c) { return std::string(c.name ? "true" : "false"); }             \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      GB_STR("run", domain),
      GB_STR("run", output),
      GB_STR("run", data_dir),
      GB_NUM("run", seed, std::uint64_t),
      GB_NUM("run", workers, int),
      GB_NUM("run", rounds, int),
      GB_NUM("run", epochs, int),
      GB_BOOL("run", challenges),
      GB_BOOL("run", report_wall_time),
      GB_NUM("problems", practice, int),
      GB_NUM("problems", test, int),
      GB_NUM("problems", problem_size_cap, int),
      GB_STR("search", practice_mode),
      GB_NUM("search", practice_candidates, int),
      GB_NUM("search", eval_candidates, int),
      GB_NUM("search", size_cap, int),
      GB_DBL("search", epsilon),
      GB_NUM("budget", max_steps, int),
      GB_NUM("budget", max_recursion, int),
      GB_DBL("model", learning_rate),
      GB_DBL("model", l2),
      GB_NUM("model", train_epochs, int),
      GB_NUM("model", batch_size, int),
  };
  return all;
}

#undef GB_STR
#undef GB_NUM
#undef GB_DBL
#undef GB_BOOL

// Strips a trailing comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && quoted) {
      ++i;
    } else if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

}  // namespace

void RunConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw Error(std::string("config: ") + name + " must be positive");
  };
  if (domain.empty()) throw Error("config: domain is empty");
  if (output.empty()) throw Error("config: output is empty");
  if (workers < 0) throw Error("config: workers must be non-negative");
  if (rounds < 0) throw Error("config: rounds must be non-negative");
  positive(epochs, "epochs");
  if (practice < 10) throw Error("config: practice must be at least 10");
  if (test < 0 || test_count() >= practice) throw Error("config: test must be below practice");
  positive(problem_size_cap, "problem_size_cap");
  if (practice_mode != "sample" && practice_mode != "enumerate") {
    throw Error("config: practice_mode must be sample or enumerate");
  }
  positive(practice_candidates, "practice_candidates");
  positive(eval_candidates, "eval_candidates");
  positive(size_cap, "size_cap");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error("config: epsilon must lie in [0, 1]");
  positive(max_steps, "max_steps");
  positive(max_recursion, "max_recursion");
  if (!(learning_rate > 0.0)) throw Error("config: learning_rate must be positive");
  if (!(l2 >= 0.0)) throw Error("config: l2 must be non-negative");
  positive(train_epochs, "train_epochs");
  positive(batch_size, "batch_size");
}

RunConfig parse_config(std::string_view text, std::string_view origin) {
  RunConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(strip_comment(text.substr(pos, nl - pos)));
    pos = nl + 1;
    ++line_no;
    auto fail = [&](const std::string& msg) {
      throw Error(std::string(origin) + ":" + std::to_string(line_no) + ": " + msg);
    };
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const auto& f : fields()) known = known || section == f.section;
      if (!known) fail("unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    std::string_view key = trim(line.substr(0, eq));
    std::string_view value = trim(line.substr(eq + 1));
    const Field* match = nullptr;
    for (const auto& f : fields()) {
      if (section == f.section && key == f.key) match = &f;
    }
    if (!match) fail("unknown key '" + std::string(key) + "' in [" + section + "]");
    match->read(cfg, value, fail);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::string config_to_text(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) out += "\n";
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.write(cfg) + "\n";
  }
  return out;
}

}  // namespace glassbox
