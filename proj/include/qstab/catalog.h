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

#ifndef QSTAB_CATALOG_H_
#define QSTAB_CATALOG_H_

// Built-in control problems:
//   bell2q: two qubits, sigma_y drives on each qubit, collective sigma_z
//           measurement, symmetric Bell target, dt = 0.001, T = 20.
//   ghz3q:  three qubits, diagonal H0, zz-correlation measurement, GHZ
//           target, dt = 0.001, T = 40.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qstab/qmat.h"
#include "qstab/sme.h"

namespace qstab {

struct SystemCatalogEntry {
  SystemSpec system;
  DensityMatrix target;
  std::string target_name;
  double max_time;  // training horizon T
};

std::vector<std::string> CatalogSystemNames();
// Throws ContractViolation for unknown names.
SystemCatalogEntry CatalogEntry(std::string_view system_name);

// Named states: "bell", "ghz", "ghz_rho01" (diag[0,1,0,...,0]) and
// "ghz_rho02" (diag[1,0,...,0]), "mixed4", "mixed8".
DensityMatrix CatalogState(std::string_view state_name);

// {"re": [[...]], "im": [[...]]}, row-major.
nlohmann::json MatrixToJson(const ComplexMatrix& m);
// Throws ContractViolation on malformed or non-square input.
ComplexMatrix MatrixFromJson(const nlohmann::json& j);

nlohmann::json ToJson(const SystemSpec& system);
// Inverse of ToJson; validates the result.
SystemSpec SystemSpecFromJson(const nlohmann::json& j);

}  // namespace qstab

#endif  // QSTAB_CATALOG_H_
