#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fraclab/extension.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/pohozaev.hpp"
#include "fraclab/radial.hpp"
#include "fraclab/sphere_eig.hpp"

namespace fraclab::io {

/// Shortest round-trip decimal form, so equal doubles give equal text.
std::string format(double x);

/// Header `r,value`, one row per node.
void write_csv(std::ostream& os, const RadialFunction& u);
/// Header `r,t,value`, the trace row t = 0 first for every radius.
void write_csv(std::ostream& os, const ExtensionField& U);
/// Header `phi,value` with φ measured from the boundary, increasing.
void write_csv(std::ostream& os, const EigenResult& res);
/// One row per radius with the seven terms, residual and relative residual.
void write_csv(std::ostream& os, const std::vector<PohozaevReport>& rows);

/// Reads a `r,value` CSV onto a fresh RadialGrid in dimension n, order s.
RadialFunction read_radial_csv(std::istream& is, int n, double s);

/// Writes `os` to `path` through a temporary file and a rename.
void write_file(const std::filesystem::path& path, const std::string& text);

/// Binary sidecar for an assembly, keyed by (n, s, grid hash). Loading
/// returns null when the file is absent or was written for another key.
void save_forms(const std::filesystem::path& path, const QuadraticFormAssembly& forms);
FormsPtr load_forms(const std::filesystem::path& path, const GridPtr& grid);

/// `forms_<hash>.bin` in dir: loaded when present, else assembled and saved.
FormsPtr cached_forms(const GridPtr& grid, const std::filesystem::path& dir);

}  // namespace fraclab::io
