use std::collections::{BTreeMap, HashSet};

use super::{Vehicle, VehicleId};
use crate::road_network::NodeId;
use crate::routing::Path;

/// Outcome of registering a vehicle with the [`RouteDatabase`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Registration {
    /// No stored route matched; the vehicle's route is now a master route.
    Master,
    /// The vehicle should plan against this master's route.
    Member { master: VehicleId },
}

/// Registry of active master routes, one per vehicle.
///
/// Two routes match when they share at least one junction.
#[derive(Debug, Clone, Default)]
pub struct RouteDatabase {
    routes: BTreeMap<VehicleId, (Path, HashSet<NodeId>)>,
}

impl RouteDatabase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    pub fn route(&self, id: VehicleId) -> Option<&Path> {
        self.routes.get(&id).map(|(p, _)| p)
    }

    /// Lowest-id master whose route shares a junction with `route`.
    pub fn find_match(&self, route: &Path) -> Option<VehicleId> {
        self.routes
            .iter()
            .find(|(_, (_, nodes))| route.vertices.iter().any(|v| nodes.contains(v)))
            .map(|(id, _)| *id)
    }

    /// Looks up a matching master route; if none exists the vehicle becomes a
    /// master and its individual estimate is stored.
    pub fn register_route(&mut self, vehicle: &Vehicle) -> Registration {
        if self.routes.contains_key(&vehicle.id) {
            return Registration::Master;
        }
        if let Some(master) = self.find_match(&vehicle.estimate) {
            return Registration::Member { master };
        }
        let nodes = vehicle.estimate.vertices.iter().copied().collect();
        self.routes
            .insert(vehicle.id, (vehicle.estimate.clone(), nodes));
        Registration::Master
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::DrivingProfile;
    use crate::road_network::Edge;

    fn vehicle(id: u32, nodes: &[u32]) -> Vehicle {
        let vertices: Vec<NodeId> = nodes.iter().map(|&n| NodeId(n)).collect();
        let edges = vertices
            .windows(2)
            .map(|w| Edge {
                from: w[0],
                to: w[1],
                distance: 1.0,
            })
            .collect();
        Vehicle {
            id: VehicleId(id),
            origin: vertices[0],
            destination: *vertices.last().unwrap(),
            profile: DrivingProfile::default(),
            estimate: Path {
                vertices,
                edges,
                total_cost: 0.0,
            },
        }
    }

    #[test]
    fn empty_database_makes_a_master() {
        let mut db = RouteDatabase::new();
        assert_eq!(db.register_route(&vehicle(1, &[0, 1, 2])), Registration::Master);
        assert_eq!(db.len(), 1);
    }

    #[test]
    fn shared_destination_makes_a_member() {
        let mut db = RouteDatabase::new();
        db.register_route(&vehicle(1, &[0, 1, 2]));
        assert_eq!(
            db.register_route(&vehicle(2, &[5, 6, 2])),
            Registration::Member {
                master: VehicleId(1)
            }
        );
        assert_eq!(db.len(), 1);
    }

    #[test]
    fn disjoint_query_becomes_a_new_master() {
        let mut db = RouteDatabase::new();
        db.register_route(&vehicle(1, &[0, 1]));
        db.register_route(&vehicle(2, &[2, 3]));
        assert_eq!(db.register_route(&vehicle(3, &[4, 5])), Registration::Master);
        assert_eq!(db.len(), 3);
    }
}
