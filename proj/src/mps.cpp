// Copyright 2026 The ucp-lns Authors.
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
#include "ucplns/mps.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace ucplns {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_num(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    if (s == "inf" || s == "Inf" || s == "1e30" || s == "Infinity") return kInf;
    if (s == "-inf" || s == "-Inf" || s == "-1e30" || s == "-Infinity") return -kInf;
    throw Error(ErrorCode::kMalformedInput, "bad number '" + std::string(s) + "' in MPS");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string export_mps(const MipProblem& m, std::string_view name) {
  std::ostringstream os;
  os << "NAME          " << name << "\n";
  os << "ROWS\n N  OBJ\n";
  std::vector<std::string> rows(m.num_constraints());
  for (int i = 0; i < m.num_constraints(); ++i) {
    rows[i] = m.constraint_name(i);
    const char* s = "L";
    if (m.constraint(i).sense == Sense::kEqual) s = "E";
    if (m.constraint(i).sense == Sense::kGreaterEqual) s = "G";
    os << " " << s << "  " << rows[i] << "\n";
  }
  // Column-major view of the rows.
  std::vector<std::vector<std::pair<int, double>>> cols(m.num_variables());
  for (int i = 0; i < m.num_constraints(); ++i) {
    const Constraint& c = m.constraint(i);
    for (std::size_t k = 0; k < c.index.size(); ++k) cols[c.index[k]].emplace_back(i, c.coef[k]);
  }
  os << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (int j = 0; j < m.num_variables(); ++j) {
    const Variable& v = m.variable(j);
    const bool is_int = v.type == VarType::kBinary;
    if (is_int != in_int) {
      os << "    MARKER" << marker++ << "  'MARKER'  " << (is_int ? "'INTORG'" : "'INTEND'")
         << "\n";
      in_int = is_int;
    }
    const std::string cname = m.variable_name(j);
    if (v.cost != 0.0 || cols[j].empty()) os << "    " << cname << "  OBJ  " << num(v.cost) << "\n";
    for (auto [i, a] : cols[j]) os << "    " << cname << "  " << rows[i] << "  " << num(a) << "\n";
  }
  if (in_int) os << "    MARKER" << marker++ << "  'MARKER'  'INTEND'\n";
  os << "RHS\n";
  if (m.objective_offset() != 0.0) os << "    RHS  OBJ  " << num(-m.objective_offset()) << "\n";
  for (int i = 0; i < m.num_constraints(); ++i) {
    if (m.constraint(i).rhs != 0.0) os << "    RHS  " << rows[i] << "  " << num(m.constraint(i).rhs) << "\n";
  }
  os << "BOUNDS\n";
  for (int j = 0; j < m.num_variables(); ++j) {
    const Variable& v = m.variable(j);
    const std::string cname = m.variable_name(j);
    if (v.type == VarType::kBinary && v.lower == 0.0 && v.upper == 1.0) {
      os << " BV BND  " << cname << "\n";
    } else if (v.lower == v.upper) {
      os << " FX BND  " << cname << "  " << num(v.lower) << "\n";
    } else {
      if (v.lower == -kInf && v.upper == kInf) {
        os << " FR BND  " << cname << "\n";
        continue;
      }
      if (v.lower == -kInf) os << " MI BND  " << cname << "\n";
      else if (v.lower != 0.0) os << " LO BND  " << cname << "  " << num(v.lower) << "\n";
      if (v.upper != kInf) os << " UP BND  " << cname << "  " << num(v.upper) << "\n";
    }
  }
  os << "ENDATA\n";
  return os.str();
}

MipProblem import_mps(std::string_view text) {
  enum class Section { kNone, kRows, kColumns, kRhs, kRanges, kBounds, kDone };
  Section sec = Section::kNone;
  std::string obj_row;
  std::unordered_map<std::string, int> row_of, col_of;
  std::vector<Constraint> rows;
  std::vector<std::string> row_names;
  std::vector<Variable> cols;
  double offset = 0.0;
  bool in_int = false;
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kMalformedInput, "MPS: " + msg); };

  std::size_t pos = 0;
  while (pos <= text.size() && sec != Section::kDone) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty() || line[0] == '*') continue;
    auto tok = split(line);
    if (tok.empty()) continue;
    if (line[0] != ' ' && line[0] != '\t') {
      if (tok[0] == "NAME") continue;
      if (tok[0] == "ROWS") sec = Section::kRows;
      else if (tok[0] == "COLUMNS") sec = Section::kColumns;
      else if (tok[0] == "RHS") sec = Section::kRhs;
      else if (tok[0] == "RANGES") sec = Section::kRanges;
      else if (tok[0] == "BOUNDS") sec = Section::kBounds;
      else if (tok[0] == "ENDATA") sec = Section::kDone;
      else fail("unknown section " + std::string(tok[0]));
      continue;
    }
    switch (sec) {
      case Section::kRows: {
        if (tok.size() != 2) fail("bad ROWS line");
        std::string rname(tok[1]);
        if (tok[0] == "N") {
          if (obj_row.empty()) obj_row = rname;
          continue;
        }
        Constraint c;
        if (tok[0] == "L") c.sense = Sense::kLessEqual;
        else if (tok[0] == "E") c.sense = Sense::kEqual;
        else if (tok[0] == "G") c.sense = Sense::kGreaterEqual;
        else fail("bad row type");
        row_of[rname] = static_cast<int>(rows.size());
        rows.push_back(std::move(c));
        row_names.push_back(rname);
        break;
      }
      case Section::kColumns: {
        if (tok.size() >= 3 && tok[1] == "'MARKER'") {
          if (tok[2] == "'INTORG'") in_int = true;
          else if (tok[2] == "'INTEND'") in_int = false;
          continue;
        }
        if (tok.size() != 3 && tok.size() != 5) fail("bad COLUMNS line");
        std::string cname(tok[0]);
        auto it = col_of.find(cname);
        int j;
        if (it == col_of.end()) {
          j = static_cast<int>(cols.size());
          col_of.emplace(cname, j);
          Variable v;
          v.name = cname;
          if (in_int) {
            v.type = VarType::kBinary;
            v.upper = 1.0;
          }
          cols.push_back(std::move(v));
        } else {
          j = it->second;
        }
        for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
          std::string rname(tok[k]);
          const double a = parse_num(tok[k + 1]);
          if (rname == obj_row) {
            cols[j].cost = a;
            continue;
          }
          auto r = row_of.find(rname);
          if (r == row_of.end()) fail("unknown row " + rname);
          rows[r->second].index.push_back(j);
          rows[r->second].coef.push_back(a);
        }
        break;
      }
      case Section::kRhs: {
        for (std::size_t k = tok.size() % 2 == 0 ? 0 : 1; k + 1 < tok.size(); k += 2) {
          std::string rname(tok[k]);
          const double b = parse_num(tok[k + 1]);
          if (rname == obj_row) {
            offset = -b;
            continue;
          }
          auto r = row_of.find(rname);
          if (r == row_of.end()) fail("unknown row " + rname);
          rows[r->second].rhs = b;
        }
        break;
      }
      case Section::kRanges:
        fail("RANGES are not supported");
        break;
      case Section::kBounds: {
        if (tok.size() < 3) fail("bad BOUNDS line");
        auto it = col_of.find(std::string(tok[2]));
        if (it == col_of.end()) fail("unknown column " + std::string(tok[2]));
        Variable& v = cols[it->second];
        const std::string_view kind = tok[0];
        auto value = [&]() {
          if (tok.size() < 4) fail("bound without value");
          return parse_num(tok[3]);
        };
        if (kind == "BV") {
          v.type = VarType::kBinary;
          v.lower = 0.0;
          v.upper = 1.0;
        } else if (kind == "FX") {
          v.lower = v.upper = value();
        } else if (kind == "LO") {
          v.lower = value();
        } else if (kind == "UP") {
          v.upper = value();
        } else if (kind == "MI") {
          v.lower = -kInf;
        } else if (kind == "PL") {
          v.upper = kInf;
        } else if (kind == "FR") {
          v.lower = -kInf;
          v.upper = kInf;
        } else {
          fail("unsupported bound type " + std::string(kind));
        }
        break;
      }
      default:
        fail("data outside a section");
    }
  }
  if (sec != Section::kDone) fail("missing ENDATA");

  MipProblem m;
  for (Variable& v : cols) {
    if (auto tag = parse_var_name(v.name)) {
      v.tag = *tag;
      v.name.clear();
    }
    m.add_variable(std::move(v));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (auto tag = parse_con_name(row_names[i])) {
      rows[i].tag = *tag;
    } else {
      rows[i].name = row_names[i];
    }
    m.add_constraint(std::move(rows[i]));
  }
  m.set_objective_offset(offset);
  return m;
}

MipSolution solve_external(const MipProblem& m, const std::string& command,
                           const std::string& workdir) {
  namespace fs = std::filesystem;
  fs::create_directories(workdir);
  const std::string mps_path = (fs::path(workdir) / "model.mps").string();
  const std::string sol_path = (fs::path(workdir) / "model.sol").string();
  {
    std::ofstream out(mps_path);
    if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + mps_path);
    out << export_mps(m);
  }
  std::error_code ec;
  fs::remove(sol_path, ec);
  std::string cmd = command;
  for (auto [key, val] : {std::pair<std::string, std::string>{"{mps}", mps_path}, {"{sol}", sol_path}}) {
    for (std::size_t p = cmd.find(key); p != std::string::npos; p = cmd.find(key, p + val.size())) {
      cmd.replace(p, key.size(), val);
    }
  }
  const auto start = std::chrono::steady_clock::now();
  const int rc = std::system(cmd.c_str());
  MipSolution sol;
  sol.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ifstream in(sol_path);
  if (rc != 0 || !in) {
    sol.status = SolveStatus::kInfeasible;
    return sol;
  }
  std::unordered_map<std::string, int> col;
  for (int j = 0; j < m.num_variables(); ++j) col.emplace(m.variable_name(j), j);
  sol.values.assign(m.num_variables(), std::nan(""));
  std::string line;
  while (std::getline(in, line)) {
    auto tok = split(line);
    if (tok.size() < 2) continue;
    auto it = col.find(std::string(tok[0]));
    if (it == col.end()) continue;
    sol.values[it->second] = parse_num(tok[1]);
  }
  for (int j = 0; j < m.num_variables(); ++j) {
    if (std::isnan(sol.values[j])) {
      throw Error(ErrorCode::kIncompleteSolution, "no value for " + m.variable_name(j));
    }
  }
  sol.objective = m.objective_value(sol.values);
  sol.status = m.max_violation(sol.values) <= 1e-6 ? SolveStatus::kFeasible : SolveStatus::kInfeasible;
  return sol;
}

}  // namespace ucplns
