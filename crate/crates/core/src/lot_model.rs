//! Per-lot occupancy during a run and the in-lot search-time model.

use crate::scenario::{KinematicParams, ParkingLot};

/// Mutable occupancy of one lot. Floors fill lowest index first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LotState {
    pub lot: usize,
    pub per_floor_occupied: Vec<u32>,
    /// Spots held for vehicles that have not arrived yet.
    pub reserved: u32,
    pub failed_search_count: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    Admitted { floor: usize },
    Full,
}

impl LotState {
    pub fn empty(lot_index: usize, lot: &ParkingLot) -> Self {
        Self {
            lot: lot_index,
            per_floor_occupied: vec![0; lot.floor_capacities.len()],
            reserved: 0,
            failed_search_count: 0,
        }
    }

    pub fn occupied(&self) -> u32 {
        self.per_floor_occupied.iter().sum()
    }

    /// Spots neither taken nor held.
    pub fn available(&self, lot: &ParkingLot) -> u32 {
        lot.capacity.saturating_sub(self.occupied() + self.reserved)
    }

    /// Holds a spot. Returns false when none is available.
    pub fn reserve(&mut self, lot: &ParkingLot) -> bool {
        if self.available(lot) == 0 {
            return false;
        }
        self.reserved += 1;
        true
    }

    /// Turns a held spot into an occupied one.
    pub fn admit_reserved(&mut self, lot: &ParkingLot) -> usize {
        assert!(self.reserved > 0, "no reservation held at lot {}", lot.id);
        self.reserved -= 1;
        self.fill_lowest_floor(lot)
            .expect("a held reservation always has a free floor")
    }

    fn fill_lowest_floor(&mut self, lot: &ParkingLot) -> Option<usize> {
        let floor = self
            .per_floor_occupied
            .iter()
            .zip(&lot.floor_capacities)
            .position(|(&occ, &cap)| occ < cap)?;
        self.per_floor_occupied[floor] += 1;
        Some(floor)
    }
}

/// Fraction of the lot that is occupied, in `[0, 1]`.
pub fn occupancy(state: &LotState, lot: &ParkingLot) -> f64 {
    f64::from(state.occupied()) / f64::from(lot.capacity)
}

/// Occupancy of the topmost floor.
pub fn top_floor_occupancy(state: &LotState, lot: &ParkingLot) -> f64 {
    match (state.per_floor_occupied.last(), lot.floor_capacities.last()) {
        (Some(&occ), Some(&cap)) if cap > 0 => f64::from(occ) / f64::from(cap),
        _ => 0.0,
    }
}

/// In-lot search time, seconds, given whole-lot and top-floor occupancies.
///
/// Cruise and walk terms scale with `W * VolLot * O`; each extra floor adds a
/// ramp climb weighted by the top floor's load plus one U-turn.
pub fn search_time_at(
    lot: &ParkingLot,
    kin: &KinematicParams,
    occupancy: f64,
    top_floor_occupancy: f64,
) -> f64 {
    let vol = f64::from(lot.capacity);
    let aisle = kin.spot_width * vol * occupancy;
    let first_floor =
        aisle / (2.0 * kin.cruise_speed) + aisle / (2.0 * kin.walk_speed) + kin.stop_time;
    let extra_floors = f64::from(lot.floors.saturating_sub(1));
    if extra_floors == 0.0 {
        return first_floor;
    }
    let top_cap = f64::from(lot.top_floor_capacity());
    let per_floor =
        lot.ramp_length / kin.ramp_speed * top_cap * top_floor_occupancy + kin.turn_time;
    first_floor + extra_floors * per_floor
}

pub fn search_time(lot: &ParkingLot, state: &LotState, kin: &KinematicParams) -> f64 {
    search_time_at(
        lot,
        kin,
        occupancy(state, lot),
        top_floor_occupancy(state, lot),
    )
}

/// Parks one vehicle on the lowest floor with room, or records a failed search.
///
/// Spots held through [`LotState::reserve`] count as taken.
pub fn try_admit(state: &mut LotState, lot: &ParkingLot) -> Admission {
    if state.available(lot) > 0 {
        if let Some(floor) = state.fill_lowest_floor(lot) {
            return Admission::Admitted { floor };
        }
    }
    state.failed_search_count += 1;
    Admission::Full
}

pub fn is_full(state: &LotState, lot: &ParkingLot) -> bool {
    state.occupied() >= lot.capacity
}
