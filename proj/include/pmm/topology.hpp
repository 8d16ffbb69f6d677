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

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pmm::topology {

enum class Orientation : std::uint8_t { Horizontal, Vertical };

// Qubits are ordered by (cell_row, cell_col, orientation, index); the linear
// index used everywhere else is the position in that order.
struct QubitId {
  int cell_row = 0;
  int cell_col = 0;
  Orientation orientation = Orientation::Horizontal;
  int index = 0;

  auto operator<=>(const QubitId&) const = default;
};

std::string to_string(const QubitId& q);

struct Edge {
  int i = 0;
  int j = 0;

  auto operator<=>(const Edge&) const = default;
};

enum class DacRole : std::uint8_t {
  QubitFlux,
  CcjjMinor1,
  CcjjMinor2,
  LTuner,
  IpCompensator,
  Coupler,
  Breakout,  // boundary coupler wired as a dc-SQUID on the standalone cell
};

std::string to_string(DacRole role);

enum class DeviceKind : std::uint8_t { Qubit, Coupler, BreakoutSquid };

struct DeviceRef {
  DeviceKind kind = DeviceKind::Qubit;
  int index = 0;  // qubit index, coupler index into `couplers`, or breakout index

  auto operator<=>(const DeviceRef&) const = default;
};

inline constexpr int kDacsPerTree = 32;
inline constexpr int kTreeDepth = 6;
inline constexpr int kDacsPerQubit = 5;
inline constexpr int kQubitsPerCell = 8;
inline constexpr int kJunctionsPerCell = 1500;

struct DacAssignment {
  int id = 0;
  DeviceRef device;
  DacRole role = DacRole::QubitFlux;
  int tree = 0;  // address tree serving this DAC
  int slot = 0;  // DAC position within the tree, 0..31
};

struct UnitCellGrid {
  int rows = 1;
  int cols = 1;
  std::vector<QubitId> qubits;
  std::vector<Edge> couplers;        // allowed edge set E, i < j
  std::vector<int> breakout_qubits;  // qubit attached to each breakout SQUID
  std::vector<DacAssignment> dacs;

  int cell_count() const { return rows * cols; }
  int tree_count() const;
  int qubit_index(const QubitId& q) const;
  bool has_edge(int i, int j) const;
  std::optional<int> coupler_index(int i, int j) const;

  // The five DACs of a qubit, in role order.
  std::vector<int> qubit_dacs(int qubit) const;
  int coupler_dac(int coupler) const;
};

UnitCellGrid build_grid(int rows, int cols);

struct PartsCount {
  long qubits = 0;
  long couplers = 0;
  long dacs = 0;
  long junctions = 0;

  bool operator==(const PartsCount&) const = default;
};

PartsCount parts_count(const UnitCellGrid& grid);

// Closed-form counts for an m x n tiling, matching build_grid without
// materializing the graph.
PartsCount parts_count(int rows, int cols);

}  // namespace pmm::topology
