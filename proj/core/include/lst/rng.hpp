/* Copyright 2026 The LS-Transducer Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#ifndef LST_RNG_HPP_
#define LST_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace lst {

using Rng = std::mt19937_64;

// Derives an independent generator for a named subsystem ("data", "init",
// "shuffle", ...) from a single run seed, so each stream is reproducible on
// its own.
Rng make_stream(std::uint64_t seed, std::string_view name);

}  // namespace lst

#endif  // LST_RNG_HPP_
