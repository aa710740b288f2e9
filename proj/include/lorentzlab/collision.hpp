#pragma once

#include <optional>
#include <variant>

#include "lorentzlab/geometry.hpp"
#include "lorentzlab/scatterer_table.hpp"

namespace lorentzlab::lorentz {

// A resolved collision: flight time (= length, speed is 1), contact point,
// outward unit normal at the contact, and the identity of the scatterer hit.
struct CollisionEvent {
  double time = 0.0;
  Vec2 point;
  Vec2 normal;
  DiskId disk_id;
};

// No scatterer within the search horizon.
struct FreeFlight {
  double max_flight = 0.0;
};

using NextCollision = std::variant<CollisionEvent, FreeFlight>;

// First collision of the ray position + t*direction, t in (0, max_flight],
// against the table's effective scatterers.  Visits lattice cells in the
// order the ray crosses them, padding the search by the largest scatterer
// radius so disks protruding from neighbouring cells are never skipped.
//
// `exclude` suppresses one scatterer, used to re-launch from a contact point
// that lies on that scatterer's boundary.  The position must otherwise be
// outside every scatterer; a position strictly inside one throws
// GeometryError (corrupted state).  Near-tangent contacts count as misses.
NextCollision next_collision(Vec2 position, Vec2 direction, const ScattererTable& table,
                             double max_flight,
                             std::optional<DiskId> exclude = std::nullopt);

}  // namespace lorentzlab::lorentz
