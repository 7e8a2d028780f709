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

#include "dpdescent/harness/trace_io.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace dpdescent::harness {

const char* const kTraceHeader =
    "t,alpha_t,f_gap,grad_norm,eta_hat,phi_hat,phi_mu_hat,energy,best_phi,"
    "sum_alpha,rate_product,privacy_valid,momentum_grad_norm";

namespace {

constexpr int kColumns = 13;

std::string FormatOptional(const std::optional<double>& v) {
  return v.has_value() ? FormatReal(*v) : std::string();
}

std::vector<std::string> SplitFields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

class FieldParser {
 public:
  FieldParser(const std::string& name, std::size_t line)
      : where_(name + ":" + std::to_string(line)) {}

  double Real(const std::string& s) const {
    if (s == "nan" || s == "-nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
      throw std::runtime_error(where_ + ": bad number '" + s + "'");
    }
    return v;
  }

  std::optional<double> Optional(const std::string& s) const {
    if (s.empty()) return std::nullopt;
    return Real(s);
  }

  std::int64_t Integer(const std::string& s) const {
    std::int64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
      throw std::runtime_error(where_ + ": bad integer '" + s + "'");
    }
    return v;
  }

  bool Flag(const std::string& s) const {
    if (s == "1") return true;
    if (s == "0") return false;
    throw std::runtime_error(where_ + ": bad flag '" + s + "'");
  }

  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

}  // namespace

std::string FormatReal(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string FormatTraceRow(const TraceRecord& r) {
  std::string s;
  s.reserve(256);
  s += std::to_string(r.t);
  for (const std::string& f :
       {FormatReal(r.alpha_t), FormatReal(r.f_gap), FormatReal(r.grad_norm),
        FormatReal(r.eta_hat), FormatReal(r.phi_hat),
        FormatOptional(r.phi_mu_hat), FormatOptional(r.energy),
        FormatReal(r.best_phi), FormatReal(r.sum_alpha),
        FormatReal(r.rate_product), std::string(r.privacy_valid ? "1" : "0"),
        FormatOptional(r.momentum_grad_norm)}) {
    s += ',';
    s += f;
  }
  return s;
}

TraceWriter::TraceWriter(const std::string& path)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw std::runtime_error("cannot open trace file: " + path);
  out_ << kTraceHeader << '\n';
}

void TraceWriter::Append(const TraceRecord& row) {
  out_ << FormatTraceRow(row) << '\n';
}

void TraceWriter::Close() {
  out_.close();
  if (out_.fail()) throw std::runtime_error("failed writing " + path_);
}

std::vector<TraceRecord> ParseTrace(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw std::runtime_error(name + ": missing or unexpected trace header");
  }
  std::vector<TraceRecord> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const FieldParser p(name, number);
    const std::vector<std::string> f = SplitFields(line);
    if (static_cast<int>(f.size()) != kColumns) {
      throw std::runtime_error(p.where() + ": expected " +
                               std::to_string(kColumns) + " fields");
    }
    TraceRecord r;
    r.t = p.Integer(f[0]);
    r.alpha_t = p.Real(f[1]);
    r.f_gap = p.Real(f[2]);
    r.grad_norm = p.Real(f[3]);
    r.eta_hat = p.Real(f[4]);
    r.phi_hat = p.Real(f[5]);
    r.phi_mu_hat = p.Optional(f[6]);
    r.energy = p.Optional(f[7]);
    r.best_phi = p.Real(f[8]);
    r.sum_alpha = p.Real(f[9]);
    r.rate_product = p.Real(f[10]);
    r.privacy_valid = p.Flag(f[11]);
    r.momentum_grad_norm = p.Optional(f[12]);
    if (r.t != static_cast<std::int64_t>(rows.size()) + 1) {
      throw std::runtime_error(p.where() + ": rows out of order");
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<TraceRecord> ReadTrace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read trace file: " + path);
  return ParseTrace(in, path);
}

}  // namespace dpdescent::harness
