#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ebem {

namespace {

Vector2d outward_normal(const Vector2d& a, const Vector2d& b) {
  Vector2d t = (b - a).normalized();
  return Vector2d(t[1], -t[0]);
}

// Number of elements covering a piece whose length must be an integer
// multiple of h; presets align region endpoints with element boundaries.
int exact_count(double pieceLen, double h, const char* what) {
  double q = pieceLen / h;
  int n = static_cast<int>(std::lround(q));
  if (n < 0 || std::abs(q - n) > 1e-9 * std::max(1.0, q))
    throw EbemError(errc::geometry, std::string("mesh preset: h does not divide ") + what);
  return n;
}

}  // namespace

std::string region_name(Region r) {
  switch (r) {
    case Region::Dirichlet: return "Dirichlet";
    case Region::Neumann: return "Neumann";
    case Region::Contact: return "Contact";
  }
  throw EbemError(errc::internal, "region_name: bad tag");
}

Region region_from_name(const std::string& name) {
  if (name == "Dirichlet") return Region::Dirichlet;
  if (name == "Neumann") return Region::Neumann;
  if (name == "Contact") return Region::Contact;
  throw EbemError(errc::config, "unknown region tag: " + name);
}

double BoundaryMesh::totalLength() const {
  double s = 0.0;
  for (const auto& e : elements) s += e.len;
  return s;
}

std::vector<int> BoundaryMesh::elementsTagged(Region r) const {
  std::vector<int> out;
  for (int i = 0; i < nElements(); ++i)
    if (elements[i].tag == r) out.push_back(i);
  return out;
}

bool BoundaryMesh::hasContact() const {
  for (const auto& e : elements)
    if (e.tag == Region::Contact) return true;
  return false;
}

void BoundaryMesh::finalize() {
  hMax = 0.0;
  for (auto& e : elements) {
    if (e.a < 0 || e.b < 0 || e.a >= nVertices() || e.b >= nVertices() || e.a == e.b)
      throw EbemError(errc::geometry, "mesh: element endpoint index out of range");
    const Vector2d a = vertices[e.a], b = vertices[e.b];
    e.len = (b - a).norm();
    if (!(e.len > 0.0)) throw EbemError(errc::geometry, "mesh: degenerate element");
    e.normal = outward_normal(a, b);
    hMax = std::max(hMax, e.len);
  }
}

void BoundaryMesh::validate() const {
  if (elements.empty()) throw EbemError(errc::geometry, "mesh: no elements");
  double maxLen = 0.0;
  for (const auto& e : elements) {
    if (e.a < 0 || e.b < 0 || e.a >= nVertices() || e.b >= nVertices())
      throw EbemError(errc::geometry, "mesh: element endpoint index out of range");
    const Vector2d d = vertices[e.b] - vertices[e.a];
    if (!(e.len > 0.0) || std::abs(e.len - d.norm()) > 1e-12 * e.len)
      throw EbemError(errc::geometry, "mesh: stored element length is stale");
    if (std::abs(e.normal.norm() - 1.0) > 1e-12)
      throw EbemError(errc::geometry, "mesh: element normal is not unit");
    if (std::abs(e.normal.dot(d)) > 1e-12 * e.len)
      throw EbemError(errc::geometry, "mesh: element normal is not orthogonal");
    if ((d - e.len * rot90(e.normal)).norm() > 1e-12 * e.len)
      throw EbemError(errc::geometry, "mesh: element orientation disagrees with normal");
    maxLen = std::max(maxLen, e.len);
  }
  if (std::abs(hMax - maxLen) > 1e-12 * maxLen)
    throw EbemError(errc::geometry, "mesh: stored hMax is stale");
}

BoundaryMesh build_preset_mesh(MeshPreset preset, double h, const PresetParams& params) {
  if (!(h > 0.0)) throw EbemError(errc::geometry, "mesh preset: need h > 0");
  BoundaryMesh m;
  switch (preset) {
    case MeshPreset::Square: {
      const int n = std::max(1, static_cast<int>(std::ceil(1.0 / h - 1e-9)));
      const Vector2d corners[4] = {{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
      for (int s = 0; s < 4; ++s)
        for (int k = 0; k < n; ++k) {
          const double beta = static_cast<double>(k) / n;
          m.vertices.push_back(corners[s] + beta * (corners[(s + 1) % 4] - corners[s]));
        }
      const int total = 4 * n;
      for (int i = 0; i < total; ++i) {
        MeshElement e;
        e.a = i;
        e.b = (i + 1) % total;
        const int side = i / n;  // 0 bottom, 1 right, 2 top, 3 left
        e.tag = (params.contactBottomLeft && (side == 0 || side == 3)) ? Region::Contact
                                                                       : Region::Neumann;
        m.elements.push_back(e);
      }
      break;
    }
    case MeshPreset::Slit: {
      const double lo = params.contactLo, hi = params.contactHi;
      if (!(lo < hi) || lo < -0.5 || hi > 0.5)
        throw EbemError(errc::geometry, "slit preset: contact interval must sit inside [-0.5,0.5]");
      const int nl = exact_count(lo + 0.5, h, "the left Dirichlet piece");
      const int nc = exact_count(hi - lo, h, "the contact interval");
      const int nr = exact_count(0.5 - hi, h, "the right Dirichlet piece");
      if (nc == 0) throw EbemError(errc::geometry, "slit preset: h leaves no contact elements");
      const int total = nl + nc + nr;
      for (int k = 0; k <= total; ++k) m.vertices.push_back(Vector2d(-0.5 + h * k, 0.0));
      for (int i = 0; i < total; ++i) {
        MeshElement e;
        e.a = i;
        e.b = i + 1;
        e.tag = (i >= nl && i < nl + nc) ? Region::Contact : Region::Dirichlet;
        m.elements.push_back(e);
      }
      break;
    }
    case MeshPreset::Circle: {
      if (!(params.radius > 0.0)) throw EbemError(errc::geometry, "circle preset: need radius > 0");
      const int n =
          std::max(3, static_cast<int>(std::ceil(2.0 * PI * params.radius / h - 1e-9)));
      for (int k = 0; k < n; ++k) {
        const double th = -0.5 * PI + 2.0 * PI * k / n;
        m.vertices.push_back(params.center +
                             params.radius * Vector2d(std::cos(th), std::sin(th)));
      }
      for (int k = 0; k < n; ++k) {
        MeshElement e;
        e.a = k;
        e.b = (k + 1) % n;
        e.tag = Region::Contact;
        m.elements.push_back(e);
      }
      break;
    }
  }
  m.finalize();
  m.validate();
  return m;
}

DofLayout build_dof_layout(const BoundaryMesh& mesh, const TimeGrid& grid) {
  grid.validate();
  mesh.validate();
  const int nV = mesh.nVertices(), nE = mesh.nElements();
  std::vector<char> onSigma(nV, 0), onDirichlet(nV, 0);
  for (const auto& e : mesh.elements) {
    std::vector<char>& flag = (e.tag == Region::Dirichlet) ? onDirichlet : onSigma;
    flag[e.a] = flag[e.b] = 1;
  }
  DofLayout L;
  L.nPsi = 2 * nE;
  L.uDofOfVertex.assign(nV, -1);
  for (int v = 0; v < nV; ++v)
    if (onSigma[v] && !onDirichlet[v]) {
      L.uDofOfVertex[v] = L.nU++;
      L.uNodeOfDof.push_back(v);
    }
  L.contactElems = mesh.elementsTagged(Region::Contact);
  L.nLambda = static_cast<int>(L.contactElems.size());
  for (int l = 0; l < grid.nSteps; ++l)
    for (int j = 0; j < L.nLambda; ++j) {
      L.normalIdx.push_back(l * 2 * L.nLambda + j);
      L.tangentIdx.push_back(l * 2 * L.nLambda + L.nLambda + j);
    }
  return L;
}

void write_mesh_csv(const BoundaryMesh& mesh, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw EbemError(errc::io, "cannot open for writing: " + path);
  std::fprintf(f, "vertices,%d\n", mesh.nVertices());
  for (const auto& v : mesh.vertices) std::fprintf(f, "%.17g,%.17g\n", v[0], v[1]);
  std::fprintf(f, "elements,%d\n", mesh.nElements());
  for (const auto& e : mesh.elements)
    std::fprintf(f, "%d,%d,%s\n", e.a, e.b, region_name(e.tag).c_str());
  std::fclose(f);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

std::string next_line(std::ifstream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw EbemError(errc::io, "unexpected end of mesh file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

int section_count(const std::string& line, const char* section, const std::string& path) {
  const auto fields = split_csv(line);
  if (fields.size() != 2 || fields[0] != section)
    throw EbemError(errc::io, "mesh file: expected '" + std::string(section) + ",N' in " + path);
  return std::stoi(fields[1]);
}

}  // namespace

BoundaryMesh read_mesh_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EbemError(errc::io, "cannot open mesh file: " + path);
  BoundaryMesh m;
  const int nV = section_count(next_line(in, path), "vertices", path);
  for (int i = 0; i < nV; ++i) {
    const auto fields = split_csv(next_line(in, path));
    if (fields.size() != 2) throw EbemError(errc::io, "mesh file: bad vertex row in " + path);
    m.vertices.push_back(Vector2d(std::stod(fields[0]), std::stod(fields[1])));
  }
  const int nE = section_count(next_line(in, path), "elements", path);
  for (int i = 0; i < nE; ++i) {
    const auto fields = split_csv(next_line(in, path));
    if (fields.size() != 3) throw EbemError(errc::io, "mesh file: bad element row in " + path);
    MeshElement e;
    e.a = std::stoi(fields[0]);
    e.b = std::stoi(fields[1]);
    e.tag = region_from_name(fields[2]);
    m.elements.push_back(e);
  }
  m.finalize();
  m.validate();
  return m;
}

}  // namespace ebem
