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

// Physical constants and SI unit literals. Everything inside the library is
// SI unless a name says otherwise; fluxes are usually carried in units of the
// flux quantum, which the names spell out (`_phi0`).

namespace pmm {

inline constexpr double kFluxQuantum = 2.067833848e-15;  // Wb
inline constexpr double kBoltzmann = 1.380649e-23;       // J/K
inline constexpr double kPi = 3.14159265358979323846;

namespace units {

constexpr double operator""_ohm(long double v) { return static_cast<double>(v); }
constexpr double operator""_MOhm(long double v) { return static_cast<double>(v) * 1e6; }
constexpr double operator""_nH(long double v) { return static_cast<double>(v) * 1e-9; }
constexpr double operator""_pH(long double v) { return static_cast<double>(v) * 1e-12; }
constexpr double operator""_fF(long double v) { return static_cast<double>(v) * 1e-15; }
constexpr double operator""_uA(long double v) { return static_cast<double>(v) * 1e-6; }
constexpr double operator""_mK(long double v) { return static_cast<double>(v) * 1e-3; }
constexpr double operator""_GHz(long double v) { return static_cast<double>(v) * 1e9; }
constexpr double operator""_MHz(long double v) { return static_cast<double>(v) * 1e6; }
constexpr double operator""_mPhi0(long double v) { return static_cast<double>(v) * 1e-3; }

}  // namespace units
}  // namespace pmm
