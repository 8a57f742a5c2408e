// Copyright 2026 The qstab Authors
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

#include "qstab/catalog.h"

#include <string>

#include "qstab/errors.h"

namespace qstab {
namespace {

using pauli::I2;
using pauli::X;
using pauli::Y;
using pauli::Z;

DensityMatrix BellTarget() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(1, 1) = m(1, 2) = m(2, 1) = m(2, 2) = 0.5;
  return DensityMatrix::FromMatrix(m);
}

DensityMatrix GhzTarget() {
  ComplexMatrix m = ComplexMatrix::Zero(8, 8);
  m(0, 0) = m(0, 7) = m(7, 0) = m(7, 7) = 0.5;
  return DensityMatrix::FromMatrix(m);
}

DensityMatrix BasisState(int dim, int index) {
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(index, index) = 1.0;
  return DensityMatrix::FromMatrix(m);
}

SystemCatalogEntry Bell2q() {
  SystemSpec s;
  s.name = "bell2q";
  s.h0 = ComplexMatrix::Zero(4, 4);
  s.controls = {Kron(Y(), I2()), Kron(I2(), Y())};
  s.observable = Kron(Z(), I2()) + Kron(I2(), Z());
  s.dt = 0.001;
  s.action_low = {-1.0, -1.0};
  s.action_high = {1.0, 1.0};
  return {s, BellTarget(), "bell", 20.0};
}

SystemCatalogEntry Ghz3q() {
  SystemSpec s;
  s.name = "ghz3q";
  const double h0[] = {1, -1, -1, 1, 1, -1, -1, 1};
  s.h0 = MakeDiagonal(h0);
  s.controls = {Kron(Kron(I2(), I2()), X()) + Kron(Kron(X(), X()), I2()),
                Kron(Kron(X(), I2()), I2()) + Kron(I2(), Kron(X(), X()))};
  s.observable = 2.0 * Kron(Kron(Z(), Z()), I2()) + Kron(I2(), Kron(Z(), Z()));
  s.dt = 0.001;
  s.action_low = {-1.0, -1.0};
  s.action_high = {1.0, 1.0};
  return {s, GhzTarget(), "ghz", 40.0};
}

}  // namespace

std::vector<std::string> CatalogSystemNames() { return {"bell2q", "ghz3q"}; }

SystemCatalogEntry CatalogEntry(std::string_view system_name) {
  if (system_name == "bell2q") return Bell2q();
  if (system_name == "ghz3q") return Ghz3q();
  throw ContractViolation("unknown system '" + std::string(system_name) +
                          "' (known: bell2q, ghz3q)");
}

DensityMatrix CatalogState(std::string_view state_name) {
  if (state_name == "bell") return BellTarget();
  if (state_name == "ghz") return GhzTarget();
  if (state_name == "ghz_rho01") return BasisState(8, 1);
  if (state_name == "ghz_rho02") return BasisState(8, 0);
  if (state_name == "mixed4") return DensityMatrix::MaximallyMixed(4);
  if (state_name == "mixed8") return DensityMatrix::MaximallyMixed(8);
  throw ContractViolation("unknown state '" + std::string(state_name) + "'");
}

nlohmann::json MatrixToJson(const ComplexMatrix& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json rr = nlohmann::json::array(), ir = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ir.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ir));
  }
  return {{"re", re}, {"im", im}};
}

ComplexMatrix MatrixFromJson(const nlohmann::json& j) {
  const auto fail = [](const std::string& why) -> ComplexMatrix {
    throw ContractViolation("matrix: " + why);
  };
  if (!j.is_object() || !j.contains("re")) return fail("expected {re, im}");
  const nlohmann::json& re = j.at("re");
  const nlohmann::json im =
      j.contains("im") ? j.at("im") : nlohmann::json::array();
  if (!re.is_array() || re.empty()) return fail("'re' must be a matrix");
  const auto n = static_cast<Eigen::Index>(re.size());
  if (!im.empty() && static_cast<Eigen::Index>(im.size()) != n) {
    return fail("'re' and 'im' shapes differ");
  }
  ComplexMatrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const nlohmann::json& rr = re[r];
    if (!rr.is_array() || static_cast<Eigen::Index>(rr.size()) != n) {
      return fail("matrix must be square");
    }
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!rr[c].is_number()) return fail("entries must be numbers");
      double imag = 0.0;
      if (!im.empty()) {
        const nlohmann::json& ir = im[r];
        if (!ir.is_array() || static_cast<Eigen::Index>(ir.size()) != n ||
            !ir[c].is_number()) {
          return fail("'re' and 'im' shapes differ");
        }
        imag = ir[c].get<double>();
      }
      m(r, c) = Complex(rr[c].get<double>(), imag);
    }
  }
  return m;
}

nlohmann::json ToJson(const SystemSpec& s) {
  nlohmann::json controls = nlohmann::json::array();
  for (const ComplexMatrix& h : s.controls) controls.push_back(MatrixToJson(h));
  return {{"name", s.name},
          {"dim", s.dim()},
          {"h0", MatrixToJson(s.h0)},
          {"controls", controls},
          {"observable", MatrixToJson(s.observable)},
          {"kappa_c", s.kappa_c},
          {"eta_c", s.eta_c},
          {"dt", s.dt},
          {"action_low", s.action_low},
          {"action_high", s.action_high}};
}

SystemSpec SystemSpecFromJson(const nlohmann::json& j) {
  SystemSpec s;
  try {
    s.name = j.value("name", std::string("inline"));
    s.h0 = MatrixFromJson(j.at("h0"));
    for (const nlohmann::json& h : j.at("controls")) {
      s.controls.push_back(MatrixFromJson(h));
    }
    s.observable = MatrixFromJson(j.at("observable"));
    s.kappa_c = j.value("kappa_c", s.kappa_c);
    s.eta_c = j.value("eta_c", s.eta_c);
    s.dt = j.value("dt", s.dt);
    s.action_low = j.at("action_low").get<std::vector<double>>();
    s.action_high = j.at("action_high").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("system: ") + e.what());
  }
  s.Validate();
  return s;
}

}  // namespace qstab
