// Copyright 2026 The desync-sim Authors
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

#include <sstream>
#include <string>

#include "doctest.h"

#include "desync/config_io.hpp"
#include "desync/engine.hpp"
#include "desync/errors.hpp"
#include "desync/svg.hpp"
#include "desync/trace_io.hpp"

using namespace desync;

namespace {

Trace sample_trace() {
  SimConfig c = load_config(std::string(DESYNC_CONFIG_DIR) + "/chain_short_delay.yaml",
                            {{"workload.steps", "12"}});
  return run(c);
}

std::string exported(const Trace& t, TraceFormat format) {
  std::ostringstream out;
  export_trace(t, format, out);
  return out.str();
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

}  // namespace

TEST_SUITE("trace_io") {

TEST_CASE("export, import, export is byte-identical") {
  const Trace t = sample_trace();
  for (auto format : {TraceFormat::kJsonl, TraceFormat::kCsv}) {
    const std::string first = exported(t, format);
    std::istringstream in(first);
    const Trace back = import_trace(in);
    CHECK(back.process_count() == t.process_count());
    CHECK(back.rank_domain == t.rank_domain);
    CHECK(exported(back, format) == first);
  }
}

TEST_CASE("import rejects malformed input") {
  const std::string good = exported(sample_trace(), TraceFormat::kJsonl);
  std::istringstream broken(good.substr(0, good.find('\n') + 1) + "{\"rank\": 0, oops\n");
  CHECK_THROWS_AS((void)import_trace(broken), TraceError);
  std::istringstream empty("");
  CHECK_THROWS_AS((void)import_trace(empty), TraceError);
  CHECK_THROWS_AS((void)interval_kind_from_string("sleeping"), TraceError);
}

TEST_CASE("timeline rendering is deterministic") {
  const Trace t = sample_trace();
  TimelineOptions opts;
  opts.wavefront_step = 11;
  const std::string a = render_timeline(t, opts);
  CHECK(a == render_timeline(t, opts));
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(count_of(a, "#0b2a6f") == 1);
  // Four domains give three separators.
  CHECK(count_of(a, "class=\"domain\"") == 3);
}

}  // TEST_SUITE
