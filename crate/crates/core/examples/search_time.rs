//! How long it takes to find a spot inside a lot as it fills up.
//!
//!     cargo run --example search_time

use event_parking::lot_model::{search_time, try_admit, Admission, LotState};
use event_parking::scenario::{KinematicParams, ParkingLot};

fn main() {
    let kin = KinematicParams::default();
    let garage = ParkingLot {
        id: "garage".into(),
        lat: 37.8700,
        lon: -122.2550,
        capacity: 120,
        floors: 3,
        floor_capacities: vec![40, 40, 40],
        ramp_length: 30.0,
    };

    let mut state = LotState::empty(0, &garage);
    println!("parked  floors        search_s");
    for n in 0..=garage.capacity {
        if n % 20 == 0 {
            println!(
                "{n:>6}  {:<12}  {:>8.1}",
                format!("{:?}", state.per_floor_occupied),
                search_time(&garage, &state, &kin)
            );
        }
        if n < garage.capacity {
            try_admit(&mut state, &garage);
        }
    }
    assert_eq!(try_admit(&mut state, &garage), Admission::Full);
    println!(
        "one more car finds it full; failed searches = {}",
        state.failed_search_count
    );
}
