#pragma once

#include <filesystem>

#include "roughhedge/market.hpp"

namespace roughhedge {

// Binary path cache. Layout (little-endian):
//   magic "RHPATHS\0", u32 version, u32 source, u64 n_paths, u64 n_steps,
//   u32 n_fields, then per field a u32 name length and the name,
//   then the grid and each field's array in order, each as u64 count + doubles.
// The payoff array may be empty.
void write_paths(const PathSet& paths, const std::filesystem::path& file);
PathSet read_paths(const std::filesystem::path& file);

// One row per (path, step): path_id,step,t,S,V,FV.
void write_paths_csv(const PathSet& paths, const std::filesystem::path& file);

}  // namespace roughhedge
