use crate::error::Result;
use crate::geo::{manhattan_distance, miller_project, PlanarCoord};
use crate::scenario::Scenario;

/// Planar positions of everything in a scenario, projected once.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub destination: PlanarCoord,
    pub lots: Vec<PlanarCoord>,
    pub entries: Vec<PlanarCoord>,
}

impl Layout {
    pub fn new(s: &Scenario) -> Result<Self> {
        let project = |p: crate::scenario::LatLon| p.to_geo().map(miller_project);
        Ok(Self {
            destination: project(s.destination)?,
            lots: s
                .lots
                .iter()
                .map(|l| project(l.position()))
                .collect::<Result<_>>()?,
            entries: s
                .entries
                .iter()
                .map(|e| project(e.position()))
                .collect::<Result<_>>()?,
        })
    }

    /// Manhattan distance from lot `lot` to the destination.
    pub fn walk_distance(&self, lot: usize) -> f64 {
        manhattan_distance(self.lots[lot], self.destination)
    }
}
