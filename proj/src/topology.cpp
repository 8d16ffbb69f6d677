// Copyright 2026 The PMM Twin Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include "pmm/topology.hpp"

#include <algorithm>

#include "pmm/error.hpp"

namespace pmm::topology {

std::string to_string(const QubitId& q) {
  return "r" + std::to_string(q.cell_row) + "c" + std::to_string(q.cell_col) +
         (q.orientation == Orientation::Horizontal ? "H" : "V") + std::to_string(q.index);
}

std::string to_string(DacRole role) {
  switch (role) {
    case DacRole::QubitFlux: return "qubit-flux";
    case DacRole::CcjjMinor1: return "ccjj-minor-1";
    case DacRole::CcjjMinor2: return "ccjj-minor-2";
    case DacRole::LTuner: return "l-tuner";
    case DacRole::IpCompensator: return "ip-compensator";
    case DacRole::Coupler: return "coupler";
    case DacRole::Breakout: return "breakout";
  }
  return "unknown";
}

int UnitCellGrid::tree_count() const {
  return static_cast<int>((dacs.size() + kDacsPerTree - 1) / kDacsPerTree);
}

int UnitCellGrid::qubit_index(const QubitId& q) const {
  const int orient = q.orientation == Orientation::Horizontal ? 0 : 4;
  return (q.cell_row * cols + q.cell_col) * kQubitsPerCell + orient + q.index;
}

bool UnitCellGrid::has_edge(int i, int j) const { return coupler_index(i, j).has_value(); }

std::optional<int> UnitCellGrid::coupler_index(int i, int j) const {
  if (i > j) std::swap(i, j);
  const Edge e{i, j};
  auto it = std::lower_bound(couplers.begin(), couplers.end(), e);
  if (it == couplers.end() || *it != e) return std::nullopt;
  return static_cast<int>(it - couplers.begin());
}

std::vector<int> UnitCellGrid::qubit_dacs(int qubit) const {
  std::vector<int> out;
  out.reserve(kDacsPerQubit);
  for (int r = 0; r < kDacsPerQubit; ++r) out.push_back(qubit * kDacsPerQubit + r);
  return out;
}

int UnitCellGrid::coupler_dac(int coupler) const {
  return static_cast<int>(qubits.size()) * kDacsPerQubit + coupler;
}

UnitCellGrid build_grid(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorCode::InvalidArgument, "grid dimensions must be positive");
  }
  UnitCellGrid g;
  g.rows = rows;
  g.cols = cols;

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      for (auto o : {Orientation::Horizontal, Orientation::Vertical}) {
        for (int k = 0; k < 4; ++k) g.qubits.push_back({r, c, o, k});
      }
    }
  }

  auto idx = [&](int r, int c, Orientation o, int k) { return g.qubit_index({r, c, o, k}); };

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      // Complete bipartite K_{4,4} inside the cell.
      for (int h = 0; h < 4; ++h) {
        for (int v = 0; v < 4; ++v) {
          g.couplers.push_back({idx(r, c, Orientation::Horizontal, h),
                                idx(r, c, Orientation::Vertical, v)});
        }
      }
      // Inter-cell couplers: 8 per cell with both a right and a lower
      // neighbour, giving 8(m-1)(n-1) in total.
      if (r + 1 < rows && c + 1 < cols) {
        for (int k = 0; k < 4; ++k) {
          g.couplers.push_back({idx(r, c, Orientation::Horizontal, k),
                                idx(r, c + 1, Orientation::Horizontal, k)});
          g.couplers.push_back({idx(r, c, Orientation::Vertical, k),
                                idx(r + 1, c, Orientation::Vertical, k)});
        }
      }
    }
  }
  for (auto& e : g.couplers) {
    if (e.i > e.j) std::swap(e.i, e.j);
  }
  std::sort(g.couplers.begin(), g.couplers.end());

  // The standalone cell has one unused boundary coupler per qubit.
  if (rows == 1 && cols == 1) {
    for (int q = 0; q < kQubitsPerCell; ++q) g.breakout_qubits.push_back(q);
  }

  constexpr DacRole kQubitRoles[kDacsPerQubit] = {DacRole::QubitFlux, DacRole::CcjjMinor1,
                                                  DacRole::CcjjMinor2, DacRole::LTuner,
                                                  DacRole::IpCompensator};
  auto push = [&](DeviceRef dev, DacRole role) {
    const int id = static_cast<int>(g.dacs.size());
    g.dacs.push_back({id, dev, role, id / kDacsPerTree, id % kDacsPerTree});
  };
  for (int q = 0; q < static_cast<int>(g.qubits.size()); ++q) {
    for (auto role : kQubitRoles) push({DeviceKind::Qubit, q}, role);
  }
  for (int c = 0; c < static_cast<int>(g.couplers.size()); ++c) {
    push({DeviceKind::Coupler, c}, DacRole::Coupler);
  }
  for (int b = 0; b < static_cast<int>(g.breakout_qubits.size()); ++b) {
    push({DeviceKind::BreakoutSquid, b}, DacRole::Breakout);
  }
  return g;
}

PartsCount parts_count(const UnitCellGrid& grid) {
  PartsCount p;
  p.qubits = static_cast<long>(grid.qubits.size());
  p.couplers = static_cast<long>(grid.couplers.size());
  p.dacs = kDacsPerQubit * p.qubits + p.couplers;
  p.junctions = static_cast<long>(kJunctionsPerCell) * grid.cell_count();
  return p;
}

PartsCount parts_count(int rows, int cols) {
  if (rows < 1 || cols < 1) {
    throw Error(ErrorCode::InvalidArgument, "grid dimensions must be positive");
  }
  const long cells = static_cast<long>(rows) * cols;
  PartsCount p;
  p.qubits = kQubitsPerCell * cells;
  p.couplers = 16 * cells + 8L * (rows - 1) * (cols - 1);
  p.dacs = kDacsPerQubit * p.qubits + p.couplers;
  p.junctions = kJunctionsPerCell * cells;
  return p;
}

}  // namespace pmm::topology
