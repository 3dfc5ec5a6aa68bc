#pragma once

#include <string>

#include "common.hpp"
#include "quadrature.hpp"

namespace ebem {

enum class Region { Dirichlet, Neumann, Contact };

std::string region_name(Region r);
Region region_from_name(const std::string& name);

struct MeshElement {
  int a = 0, b = 0;  // vertex indices, oriented so that tangent == rot90(normal)
  double len = 0.0;
  Region tag = Region::Neumann;
  Vector2d normal{0.0, 0.0};  // unit outward
};

struct BoundaryMesh {
  std::vector<Vector2d> vertices;
  std::vector<MeshElement> elements;
  double hMax = 0.0;

  int nVertices() const { return static_cast<int>(vertices.size()); }
  int nElements() const { return static_cast<int>(elements.size()); }
  Seg seg(int e) const {
    const MeshElement& el = elements[e];
    return Seg{vertices[el.a], vertices[el.b]};
  }
  double totalLength() const;
  std::vector<int> elementsTagged(Region r) const;
  bool hasContact() const;

  // Recompute lengths, normals and hMax from vertices and connectivity.
  void finalize();
  void validate() const;
};

enum class MeshPreset { Square, Slit, Circle };

struct PresetParams {
  double radius = 0.2;              // circle
  Vector2d center{0.0, 0.0};        // circle
  double contactLo = -0.2;          // slit contact interval
  double contactHi = 0.2;
  bool contactBottomLeft = false;   // square: tag bottom and left sides Contact
};

// Square: closed polygon around [-0.5,0.5]^2, counterclockwise from the
// bottom-left corner, Neumann everywhere unless contactBottomLeft is set.
// Slit: open mesh of [-0.5,0.5]x{0} oriented left to right (body above, so the
// outward normal is (0,-1)); Contact on [contactLo, contactHi], Dirichlet on
// the rest; h must divide all three pieces exactly.
// Circle: inscribed polygon with uniform angular spacing starting at the
// bottom point, all elements Contact.
BoundaryMesh build_preset_mesh(MeshPreset preset, double h, const PresetParams& params = {});

struct DofLayout {
  int nPsi = 0;     // element-wise linear discontinuous scalar functions on the whole boundary
  int nU = 0;       // continuous hats on the non-Dirichlet part, zero at Dirichlet interfaces
  int nLambda = 0;  // piecewise constants on the contact part
  std::vector<int> uNodeOfDof;    // size nU, mesh vertex index per hat
  std::vector<int> uDofOfVertex;  // size nVertices, -1 where no hat lives
  std::vector<int> contactElems;  // size nLambda, mesh element index per multiplier
  // Partition of the length nSteps*2*nLambda multiplier vector: per time block,
  // the first nLambda entries are normal components, the rest tangential ones.
  std::vector<int> normalIdx;
  std::vector<int> tangentIdx;
};

DofLayout build_dof_layout(const BoundaryMesh& mesh, const TimeGrid& grid);

// Plain-text CSV with a vertex table and an element table (endpoint indices
// plus region tag); normals and lengths are recomputed on import.
void write_mesh_csv(const BoundaryMesh& mesh, const std::string& path);
BoundaryMesh read_mesh_csv(const std::string& path);

}  // namespace ebem
