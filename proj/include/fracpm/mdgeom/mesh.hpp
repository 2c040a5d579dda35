#pragma once

#include "fracpm/common.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fracpm::mdgeom
{

/// Ambient dimension of the assembled problem.
inline constexpr int kAmbientDim = 2;

enum class FaceKind
{
  Interior,          ///< shared by two cells of the same subdomain
  ExternalBoundary,  ///< lies on the outer boundary of the domain
  InternalBoundary,  ///< coupled to a lower-dimensional neighbor through a mortar cell
  ImmersedTip        ///< fracture tip inside the domain (zero fluid flux)
};

struct Face
{
  Vec2 center;
  double measure = 0.0;
  /// Unit normal; points from cells[0] to cells[1] for interior faces, outward otherwise.
  Vec2 normal;
  std::array<Index, 2> cells{ -1, -1 };
  FaceKind kind = FaceKind::Interior;
  std::string tag;
  Index interface = -1;
  Index mortar = -1;
};

struct Subdomain
{
  Index id = 0;
  int dim = 2;

  std::vector<Vec2> cell_centers;
  /// Area (d=2), length (d=1) or 1 (d=0).
  std::vector<double> cell_measures;
  std::vector<Face> faces;
  /// Faces bounding each cell (empty for d=0).
  std::vector<std::vector<Index>> cell_faces;

  /// d=2: geometric node ids of each triangle (counter-clockwise); d=1: segment end nodes; d=0: the node.
  std::vector<std::vector<Index>> cell_nodes;

  /// d=1 only. Fixed at construction: the outward normal of the j-side matrix face.
  std::vector<Vec2> cell_normals;
  std::vector<Vec2> cell_tangents;
  /// User-facing fracture id (d=1) or the geometric node id (d=0).
  Index label = -1;

  Index num_cells() const { return static_cast< Index >( cell_measures.size() ); }
  double total_measure() const;
};

enum class Side
{
  J,
  K,
  None
};

struct MortarCell
{
  Index higher_face = -1;
  Index lower_cell = -1;
  double measure = 0.0;
};

struct Interface
{
  Index id = 0;
  Index higher = -1;
  Index lower = -1;
  Side side = Side::None;
  /// Matrix-fracture interfaces store mortar cell m next to fracture cell m.
  std::vector<MortarCell> cells;

  Index num_cells() const { return static_cast< Index >( cells.size() ); }
};

/// Conforming P1 mechanics layout: geometric nodes duplicated across fracture facets,
/// plus one quadratic edge bubble on every matrix face that touches a fracture.
struct MechanicsLayout
{
  /// Geometric node of each displacement node.
  std::vector<Index> node_origin;
  /// Displacement node of each triangle vertex.
  std::vector<std::array<Index, 3>> cell_nodes;
  /// Bubble index of each internal-boundary matrix face, -1 elsewhere.
  std::vector<Index> face_bubble;
  /// Matrix face of each bubble.
  std::vector<Index> bubble_face;

  Index num_nodes() const { return static_cast< Index >( node_origin.size() ); }
  Index num_bubbles() const { return static_cast< Index >( bubble_face.size() ); }
};

struct FractureFacet
{
  std::array<Index, 2> nodes{ -1, -1 };
  Index fracture_id = 0;
};

/// Raw input shared by the structured builder and the JSON loader.
struct MeshPrimitives
{
  std::vector<Vec2> nodes;
  std::vector<std::array<Index, 3>> cells_2d;
  std::vector<FractureFacet> fracture_facets;
  /// Keyed by index into the sorted unique edge list (see edge_list()).
  std::map<Index, std::string> boundary_tags;
};

/// Unique edges of a triangulation sorted by (min node, max node); defines face indices
/// used by boundary tags.
std::vector<std::array<Index, 2>> edge_list( std::span<std::array<Index, 3> const> cells );

/**
 * Mixed-dimensional mesh: the matrix (d=2), fractures (d=1), intersections (d=0) and the
 * interfaces connecting subdomains one dimension apart. Immutable after construction.
 *
 * Subdomain order: matrix, fractures sorted by fracture id, intersection points sorted by
 * node id. Each fracture owns two interfaces (J then K), followed by one interface per
 * (fracture, intersection) pair.
 */
class MdMesh
{
public:
  static MdMesh from_primitives( MeshPrimitives primitives );

  std::span<Subdomain const> subdomains() const { return m_subdomains; }
  std::span<Interface const> interfaces() const { return m_interfaces; }
  Subdomain const & subdomain( Index i ) const { return m_subdomains.at( static_cast< std::size_t >( i ) ); }
  Interface const & interface( Index i ) const { return m_interfaces.at( static_cast< std::size_t >( i ) ); }
  Subdomain const & matrix() const { return m_subdomains.front(); }

  std::span<Vec2 const> nodes() const { return m_primitives.nodes; }
  MeshPrimitives const & primitives() const { return m_primitives; }
  MechanicsLayout const & mechanics() const { return m_mechanics; }

  Index num_fractures() const { return m_num_fractures; }
  Index num_intersections() const { return static_cast< Index >( m_subdomains.size() ) - 1 - m_num_fractures; }
  /// Subdomain index of the k-th fracture.
  Index fracture_subdomain( Index k ) const { return 1 + k; }
  /// Interfaces (J, K) of the k-th fracture.
  std::array<Index, 2> fracture_interfaces( Index k ) const { return { 2 * k, 2 * k + 1 }; }
  /// Subdomain index of the fracture carrying the given user id.
  std::optional<Index> find_fracture( Index fracture_id ) const;
  /// Interfaces whose lower neighbor is subdomain i.
  std::vector<Index> interfaces_below( Index i ) const;
  /// Interfaces whose higher neighbor is subdomain i.
  std::vector<Index> interfaces_above( Index i ) const;

  Index total_cells() const;

private:
  MeshPrimitives m_primitives;
  std::vector<Subdomain> m_subdomains;
  std::vector<Interface> m_interfaces;
  MechanicsLayout m_mechanics;
  Index m_num_fractures = 0;
};

/// Rectangle [0, width] x [0, height].
struct Rectangle
{
  double width = 1.0;
  double height = 1.0;
};

struct FractureSegment
{
  Vec2 start;
  Vec2 end;
};

using FractureNetwork = std::vector<FractureSegment>;

struct BuildOptions
{
  /// Jitter interior nodes (away from fractures and the boundary) by up to 10% of h.
  std::optional<unsigned long> jitter_seed;
};

/**
 * Structured mesh: each h-by-h lattice square is split into four triangles around its
 * center. Fractures must follow lattice lines or the 45-degree square diagonals.
 * Boundary faces are tagged "bottom", "right", "top", "left".
 * Snapping messages are appended to `warnings` when given.
 */
MdMesh build_structured_mesh( Rectangle const & domain,
                              FractureNetwork const & fractures,
                              double h,
                              std::vector<std::string> * warnings = nullptr,
                              BuildOptions const & options = {} );

MdMesh load_mesh( std::string const & path );
MdMesh parse_mesh_json( std::string const & text );
std::string mesh_to_json( MdMesh const & mesh );
void save_mesh( MdMesh const & mesh, std::string const & path );

} // namespace fracpm::mdgeom
