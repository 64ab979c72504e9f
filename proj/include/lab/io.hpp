#pragma once

// File formats: open sets as cell-list JSON, grid functions and symbols as a
// one-line JSON header followed by raw little-endian complex doubles, atoms
// as a JSON manifest with sidecar piece files.

#include <filesystem>
#include <string>

#include "lab/atoms.hpp"
#include "lab/dyadic.hpp"
#include "lab/hankel.hpp"
#include "lab/spectral.hpp"

namespace lab::io {

std::string open_set_to_json(const dyadic::GridOpenSet& set);
dyadic::GridOpenSet open_set_from_json(const std::string& text);
void save_open_set(const dyadic::GridOpenSet& set, const std::filesystem::path& path);
dyadic::GridOpenSet load_open_set(const std::filesystem::path& path);

void save_grid_function(const spectral::GridFunction& f,
                        const std::filesystem::path& path,
                        bool spectral_domain = false);
spectral::GridFunction load_grid_function(const std::filesystem::path& path);

void save_symbol(const hankel::AnalyticSymbol& phi, const std::filesystem::path& path);
hankel::AnalyticSymbol load_symbol(const std::filesystem::path& path);

// Manifest {omega, q, delta, scale, pieces:[{rect, direction, data}]} with the
// open set and piece samples in sidecar files next to the manifest.
void save_atom(const atoms::Atom& atom, const std::filesystem::path& manifest);
atoms::Atom load_atom(const std::filesystem::path& manifest);

}  // namespace lab::io
