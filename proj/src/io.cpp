#include "fraclab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

namespace fraclab::io {

std::string format(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

void write_csv(std::ostream& os, const RadialFunction& u) {
  os << "r,value\n";
  for (std::size_t i = 0; i < u.size(); ++i) os << format(u.grid()[i]) << ',' << format(u.value(i)) << '\n';
}

void write_csv(std::ostream& os, const ExtensionField& U) {
  if (!U.grid) throw DomainError("write_csv: empty field");
  os << "r,t,value\n";
  const auto& rg = U.grid->radial();
  const auto t = U.grid->t_nodes();
  for (std::size_t i = 0; i < rg.size(); ++i)
    for (std::size_t j = 0; j <= t.size(); ++j)
      os << format(rg[i]) << ',' << format(j == 0 ? 0.0 : t[j - 1]) << ',' << format(U.at(i, j)) << '\n';
}

void write_csv(std::ostream& os, const EigenResult& res) {
  if (!res.mesh || res.psi1.size() != res.mesh->size()) throw DomainError("write_csv: eigen result without mesh");
  std::vector<std::pair<double, double>> rows;
  for (std::size_t j = 0; j < res.psi1.size(); ++j) rows.emplace_back(res.mesh->phi(j), res.psi1[j]);
  std::sort(rows.begin(), rows.end());
  os << "phi,value\n";
  for (const auto& [p, v] : rows) os << format(p) << ',' << format(v) << '\n';
}

void write_csv(std::ostream& os, const std::vector<PohozaevReport>& rows) {
  os << "r,lhs_hardy,lhs_power,sphere_gradient,sphere_normal,boundary_hardy,boundary_power,sphere_mixed,"
        "residual,relative_residual\n";
  for (const auto& p : rows) {
    for (double v : {p.r, p.lhs_hardy, p.lhs_power, p.sphere_gradient, p.sphere_normal, p.boundary_hardy,
                     p.boundary_power, p.sphere_mixed, p.residual})
      os << format(v) << ',';
    os << format(p.relative_residual) << '\n';
  }
}

RadialFunction read_radial_csv(std::istream& is, int n, double s) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("r,value", 0) != 0) throw DomainError("read_radial_csv: missing header");
  std::vector<double> r, v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DomainError("read_radial_csv: malformed row '" + line + "'");
    double a = 0.0, b = 0.0;
    const char* end = line.data() + line.size();
    const auto ra = std::from_chars(line.data(), line.data() + comma, a);
    const auto rb = std::from_chars(line.data() + comma + 1, end, b);
    if (ra.ec != std::errc() || rb.ec != std::errc()) throw DomainError("read_radial_csv: malformed row '" + line + "'");
    r.push_back(a);
    v.push_back(b);
  }
  auto grid = std::make_shared<const RadialGrid>(n, s, std::move(r));
  return RadialFunction(std::move(grid), std::move(v));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("write_file: cannot open " + tmp.string());
    f << text;
    if (!f) throw std::runtime_error("write_file: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

constexpr char magic[8] = {'F', 'R', 'L', 'B', 'F', 'R', 'M', '1'};

template <class T>
void put(std::ostream& os, const T& x) {
  os.write(reinterpret_cast<const char*>(&x), sizeof x);
}

template <class T>
bool get(std::istream& is, T& x) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&x), sizeof x));
}

void put_array(std::ostream& os, const double* p, std::size_t count) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(count * sizeof(double)));
}

bool get_array(std::istream& is, double* p, std::size_t count) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(count * sizeof(double))));
}

}  // namespace

void save_forms(const std::filesystem::path& path, const QuadraticFormAssembly& forms) {
  if (!forms.grid) throw DomainError("save_forms: assembly without grid");
  std::ostringstream os(std::ios::binary);
  os.write(magic, sizeof magic);
  put(os, static_cast<std::int32_t>(forms.grid->dim()));
  put(os, forms.grid->order());
  put(os, forms.grid->hash());
  const auto M = static_cast<std::uint64_t>(forms.size());
  put(os, M);
  put(os, forms.ghost_radius);
  put(os, forms.assembly_tolerance);
  put_array(os, forms.gagliardo.data(), M * M);
  put_array(os, forms.hardy.data(), M);
  put_array(os, forms.mass.data(), M);
  write_file(path, os.str());
}

FormsPtr load_forms(const std::filesystem::path& path, const GridPtr& grid) {
  if (!grid) throw DomainError("load_forms: null grid");
  std::ifstream is(path, std::ios::binary);
  if (!is) return nullptr;
  char m[sizeof magic];
  std::int32_t n = 0;
  double s = 0.0;
  std::uint64_t h = 0, M = 0;
  if (!is.read(m, sizeof m) || std::memcmp(m, magic, sizeof m) != 0) return nullptr;
  if (!get(is, n) || !get(is, s) || !get(is, h) || !get(is, M)) return nullptr;
  if (n != grid->dim() || s != grid->order() || h != grid->hash() || M != grid->size()) return nullptr;
  auto out = std::make_shared<QuadraticFormAssembly>();
  out->grid = grid;
  const auto k = static_cast<Eigen::Index>(M);
  out->gagliardo.resize(k, k);
  out->hardy.resize(k);
  out->mass.resize(k);
  if (!get(is, out->ghost_radius) || !get(is, out->assembly_tolerance) ||
      !get_array(is, out->gagliardo.data(), M * M) || !get_array(is, out->hardy.data(), M) ||
      !get_array(is, out->mass.data(), M))
    return nullptr;
  return out;
}

FormsPtr cached_forms(const GridPtr& grid, const std::filesystem::path& dir) {
  if (!grid) throw DomainError("cached_forms: null grid");
  std::ostringstream name;
  name << "forms_" << std::hex << grid->hash() << ".bin";
  const auto path = dir / name.str();
  if (auto f = load_forms(path, grid)) return f;
  auto f = assemble_forms(grid);
  save_forms(path, *f);
  return f;
}

}  // namespace fraclab::io
