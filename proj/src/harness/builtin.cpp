#include "uuv/harness.hpp"

#include <array>

namespace uuv {

namespace {

struct Builtin {
  std::string_view name;
  std::string_view text;
};

// Motor levels and durations are back-solved from the target geometry at the
// default vehicle parameters.
constexpr std::array kBuiltins = {
    Builtin{"line", R"(name = line
duration = 12
seed = 1
start.x = 0.5
start.y = 2.0574
start.psi = 0

# The ground station repeats the trigger; the vehicle ignores it while the
# sequence runs.
seq 1 at 0 set_motors 50 50
seq 1 at 5.6 set_motors 0 0
at 1.0 start_sequence 1
at 1.5 start_sequence 1
at 2.0 start_sequence 1
)"},
    Builtin{"circle", R"(name = circle
duration = 40
seed = 2
start.x = 2.0574
start.y = 0.25
start.psi = 0

seq 1 at 0 set_motors 27 18
seq 1 at 36 set_motors 0 0
at 1.0 start_sequence 1
at 1.5 start_sequence 1
)"},
    Builtin{"zigzag", R"(name = zigzag
duration = 16
seed = 3
start.x = 0.6
start.y = 2.0574
start.psi = 0

seq 1 at 0 set_motors 26 14
seq 1 at 1.25 set_motors 14 26
seq 1 at 3.75 set_motors 26 14
seq 1 at 6.25 set_motors 14 26
seq 1 at 8.75 set_motors 26 14
seq 1 at 10 set_motors 0 0
at 1.0 start_sequence 1
at 1.5 start_sequence 1
)"},
    Builtin{"pump_test", R"(name = pump_test
duration = 90
seed = 4
start.x = 2.0574
start.y = 2.0574

seq 1 at 0 pump intake 3000
seq 1 at 20 pump expel 6000
seq 1 at 32 pump intake 6000
seq 1 at 44 pump expel 6000
seq 1 at 56 pump intake 6000
seq 1 at 68 pump expel 6000
at 1.0 start_sequence 1
at 1.5 start_sequence 1
at 10 set_motors 0 0
at 20 set_motors 0 0
at 30 set_motors 0 0
at 40 set_motors 0 0
at 50 set_motors 0 0
at 60 set_motors 0 0
at 70 set_motors 0 0
at 80 set_motors 0 0
)"},
};

}  // namespace

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> out;
  for (const auto& b : kBuiltins) out.emplace_back(b.name);
  return out;
}

std::string_view builtin_scenario_text(std::string_view name) {
  for (const auto& b : kBuiltins) {
    if (b.name == name) return b.text;
  }
  return {};
}

}  // namespace uuv
