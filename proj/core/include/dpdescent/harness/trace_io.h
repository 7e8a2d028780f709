// Copyright 2026 The dpdescent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Trace CSV format. One header line, then one row per TraceRecord in field
// order. Reals use 17 significant digits, absent optional fields are empty
// and privacy_valid is 0 or 1.

#ifndef DPDESCENT_HARNESS_TRACE_IO_H_
#define DPDESCENT_HARNESS_TRACE_IO_H_

#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpdescent/diagnostics.h"

namespace dpdescent::harness {

extern const char* const kTraceHeader;

// Shortest decimal form that round-trips: printf "%.17g".
std::string FormatReal(double value);

std::string FormatTraceRow(const TraceRecord& row);

// Writes the header on open and each row as it arrives.
class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path);
  void Append(const TraceRecord& row);
  void Close();

 private:
  std::string path_;
  std::ofstream out_;
};

// Throws std::runtime_error on a missing file, wrong header or bad field.
std::vector<TraceRecord> ReadTrace(const std::string& path);
std::vector<TraceRecord> ParseTrace(std::istream& in, const std::string& name);

}  // namespace dpdescent::harness

#endif  // DPDESCENT_HARNESS_TRACE_IO_H_
