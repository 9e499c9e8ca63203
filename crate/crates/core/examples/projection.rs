//! Projects the stadium and a few nearby points onto the plane and prints
//! Manhattan distances between them.
//!
//!     cargo run --example projection

use event_parking::geo::{manhattan_distance, miller_project, miller_unproject, travel_time};
use event_parking::scenario::LatLon;

fn main() -> event_parking::Result<()> {
    let stadium = miller_project(LatLon::MEMORIAL_STADIUM.to_geo()?);
    println!(
        "stadium      x = {:.3} m, y = {:.3} m",
        stadium.x, stadium.y
    );

    let places = [
        ("campus gate", LatLon::new(37.8695, -122.2592)),
        ("downtown", LatLon::new(37.8703, -122.2680)),
        ("north side", LatLon::new(37.8760, -122.2590)),
    ];
    for (name, p) in places {
        let q = miller_project(p.to_geo()?);
        let d = manhattan_distance(stadium, q);
        println!(
            "{name:<12} {d:>8.1} m  walk {:>5.1} min  drive {:>4.1} min",
            travel_time(d, 1.2)? / 60.0,
            travel_time(d, 2.78)? / 60.0
        );
    }

    let back = miller_unproject(stadium)?;
    println!(
        "round trip   lat {:.12} deg, lon {:.12} deg",
        back.lat().to_degrees(),
        back.lon().to_degrees()
    );
    Ok(())
}
