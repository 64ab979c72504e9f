#include "lab/io.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian");

namespace lab::io {

using nlohmann::json;

std::string open_set_to_json(const dyadic::GridOpenSet& set) {
  json j;
  j["L"] = set.L();
  j["K"] = set.K();
  auto cells = json::array();
  for (const auto& [row, col] : set.cells()) cells.push_back({row, col});
  j["cells"] = std::move(cells);
  return j.dump();
}

dyadic::GridOpenSet open_set_from_json(const std::string& text) {
  const json j = json::parse(text);
  std::vector<std::pair<int, int>> cells;
  for (const auto& c : j.at("cells"))
    cells.emplace_back(c.at(0).get<int>(), c.at(1).get<int>());
  return dyadic::GridOpenSet::from_cells(j.at("L").get<int>(), j.at("K").get<int>(),
                                         cells);
}

void save_open_set(const dyadic::GridOpenSet& set, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << open_set_to_json(set) << '\n';
}

dyadic::GridOpenSet load_open_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return open_set_from_json(text);
}

namespace {

void write_header_and_data(const std::filesystem::path& path, const json& header,
                           const std::complex<double>* data, std::size_t count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(std::complex<double>)));
}

json read_header(std::ifstream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("missing header in " + path.string());
  return json::parse(line);
}

std::vector<std::complex<double>> read_data(std::ifstream& in, std::size_t count,
                                            const std::filesystem::path& path) {
  std::vector<std::complex<double>> data(count);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(count * sizeof(std::complex<double>)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(std::complex<double>))
    throw std::runtime_error("truncated data in " + path.string());
  return data;
}

}  // namespace

void save_grid_function(const spectral::GridFunction& f,
                        const std::filesystem::path& path, bool spectral_domain) {
  json header;
  header["L"] = f.L();
  header["Kp"] = f.Kp();
  header["layout"] = "row-major";
  header["domain"] = spectral_domain ? "spectral" : "spatial";
  if (spectral_domain) {
    const auto coeffs = f.spectrum();
    write_header_and_data(path, header, coeffs.data(), coeffs.size());
  } else {
    write_header_and_data(path, header, f.samples().data(), f.samples().size());
  }
}

spectral::GridFunction load_grid_function(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const json header = read_header(in, path);
  const int L = header.at("L").get<int>();
  const int Kp = header.at("Kp").get<int>();
  if (header.at("layout").get<std::string>() != "row-major")
    throw std::runtime_error("unsupported layout in " + path.string());
  const int M = 1 << (L + Kp);
  auto data = read_data(in, static_cast<std::size_t>(M) * M, path);
  if (header.at("domain").get<std::string>() == "spectral")
    return spectral::GridFunction::from_spectrum(L, Kp, std::move(data));
  return spectral::GridFunction(L, Kp, std::move(data));
}

void save_symbol(const hankel::AnalyticSymbol& phi, const std::filesystem::path& path) {
  json header;
  header["N"] = phi.N;
  header["zero_axis_excluded"] = phi.zero_axis_excluded;
  write_header_and_data(path, header, phi.coeffs.data(), phi.coeffs.size());
}

hankel::AnalyticSymbol load_symbol(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const json header = read_header(in, path);
  hankel::AnalyticSymbol phi(header.at("N").get<int>(),
                             header.at("zero_axis_excluded").get<bool>());
  const std::size_t count = phi.coeffs.size();
  phi.coeffs = read_data(in, count, path);
  return phi;
}

namespace {

json rect_to_json(const dyadic::DyadicRectangle& r) {
  return {{"I", {{"m", r.first.m}, {"n", r.first.n}}},
          {"J", {{"m", r.second.m}, {"n", r.second.n}}}};
}

dyadic::DyadicRectangle rect_from_json(const json& j) {
  return {{j.at("I").at("m").get<std::int64_t>(), j.at("I").at("n").get<int>()},
          {j.at("J").at("m").get<std::int64_t>(), j.at("J").at("n").get<int>()}};
}

}  // namespace

void save_atom(const atoms::Atom& atom, const std::filesystem::path& manifest) {
  const auto dir = manifest.parent_path();
  const std::string stem = manifest.stem().string();
  const std::string omega_name = stem + "-omega.json";
  save_open_set(atom.omega, dir / omega_name);

  json j;
  j["omega"] = omega_name;
  j["q"] = atom.q;
  j["delta"] = atom.delta;
  j["scale"] = atom.scale;
  auto pieces = json::array();
  for (std::size_t k = 0; k < atom.pieces.size(); ++k) {
    const auto& piece = atom.pieces[k];
    char name[64];
    std::snprintf(name, sizeof name, "%s-piece%03zu.bin", stem.c_str(), k);
    save_grid_function(piece.values, dir / name);
    pieces.push_back({{"rect", rect_to_json(piece.rect)},
                      {"direction", piece.direction},
                      {"data", name}});
  }
  j["pieces"] = std::move(pieces);
  std::ofstream out(manifest);
  if (!out) throw std::runtime_error("cannot write " + manifest.string());
  out << j.dump(2) << '\n';
}

atoms::Atom load_atom(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot read " + manifest.string());
  const json j = json::parse(in);
  const auto dir = manifest.parent_path();

  atoms::Atom atom{load_open_set(dir / j.at("omega").get<std::string>()),
                   {},
                   j.at("q").get<double>(),
                   j.at("delta").get<double>(),
                   j.at("scale").get<double>(),
                   spectral::GridFunction(0, 1)};
  bool first = true;
  for (const auto& pj : j.at("pieces")) {
    atoms::AtomPiece piece{rect_from_json(pj.at("rect")),
                           load_grid_function(dir / pj.at("data").get<std::string>()),
                           pj.at("direction").get<int>()};
    if (first) {
      atom.total = piece.values;
      first = false;
    } else {
      atom.total += piece.values;
    }
    atom.pieces.push_back(std::move(piece));
  }
  if (atom.pieces.empty())
    atom.total = spectral::GridFunction(atom.omega.L(), atom.omega.K() + 1);
  return atom;
}

}  // namespace lab::io
