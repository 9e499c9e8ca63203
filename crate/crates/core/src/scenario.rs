//! World description: lots, entry streets, destination, kinematics and demand.
//!
//! Scenarios are stored as TOML documents. Angles in the document are degrees;
//! every time is in seconds and every length in meters. A [`Scenario`] keeps the
//! document values verbatim, so `load_scenario(save_scenario(s)) == s` holds
//! exactly; radians are produced on demand through [`LatLon::to_geo`].

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::geo::GeoCoord;
use crate::stochastic::{seeded_rng, ArrivalParams, PatienceParams, TimeWindow};
use crate::strategies::StrategyMix;

/// Latitude/longitude pair in degrees, as written in scenario documents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    /// California Memorial Stadium, Berkeley.
    pub const MEMORIAL_STADIUM: LatLon = LatLon::new(37.8712, -122.2506);

    pub fn to_geo(self) -> Result<GeoCoord> {
        GeoCoord::from_degrees(self.lat, self.lon)
    }
}

/// Axis-aligned study area in degrees. Bounds are inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl Region {
    /// Rectangle of roughly 1.8 km by 1.8 km centred on the stadium.
    pub const BERKELEY: Region = Region {
        min_lat: 37.8632,
        min_lon: -122.2606,
        max_lat: 37.8792,
        max_lon: -122.2406,
    };

    pub fn contains(&self, p: LatLon) -> bool {
        (self.min_lat..=self.max_lat).contains(&p.lat)
            && (self.min_lon..=self.max_lon).contains(&p.lon)
    }

    pub fn center(&self) -> LatLon {
        LatLon::new(
            0.5 * (self.min_lat + self.max_lat),
            0.5 * (self.min_lon + self.max_lon),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicParams {
    /// Width of one parking spot, m.
    #[serde(rename = "W")]
    pub spot_width: f64,
    /// Cruising speed, also used for every drive leg, m/s.
    #[serde(rename = "v_c")]
    pub cruise_speed: f64,
    #[serde(rename = "v_w")]
    pub walk_speed: f64,
    /// Speed on ramps between floors, m/s.
    #[serde(rename = "v_ud")]
    pub ramp_speed: f64,
    /// Time to complete the parking manoeuvre, s.
    #[serde(rename = "t_stop")]
    pub stop_time: f64,
    /// U-turn time between ramps, s.
    #[serde(rename = "t_turn")]
    pub turn_time: f64,
}

impl Default for KinematicParams {
    fn default() -> Self {
        Self {
            spot_width: 2.5,
            cruise_speed: 2.78,
            walk_speed: 1.2,
            ramp_speed: 2.78,
            stop_time: 30.0,
            turn_time: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParkingLot {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
    pub capacity: u32,
    pub floors: u32,
    pub floor_capacities: Vec<u32>,
    pub ramp_length: f64,
}

impl ParkingLot {
    pub fn position(&self) -> LatLon {
        LatLon::new(self.lat, self.lon)
    }

    pub fn top_floor_capacity(&self) -> u32 {
        self.floor_capacities.last().copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryPoint {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
}

impl EntryPoint {
    pub fn position(&self) -> LatLon {
        LatLon::new(self.lat, self.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub destination: LatLon,
    pub region: Region,
    pub kinematics: KinematicParams,
    pub arrival: ArrivalParams,
    pub patience: PatienceParams,
    /// Radius around the destination that strategy group 2 avoids, m.
    pub exclusion_radius: f64,
    pub time_window: TimeWindow,
    #[serde(rename = "demand_K")]
    pub demand: usize,
    /// Lets demand exceed total capacity.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_overflow: bool,
    /// Strategy mix used when none is supplied explicitly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix: Option<StrategyMix>,
    pub lots: Vec<ParkingLot>,
    pub entries: Vec<EntryPoint>,
}

impl Scenario {
    pub fn total_capacity(&self) -> usize {
        self.lots.iter().map(|l| l.capacity as usize).sum()
    }

    pub fn capacities(&self) -> Vec<usize> {
        self.lots.iter().map(|l| l.capacity as usize).collect()
    }

    pub fn lot_index(&self, id: &str) -> Option<usize> {
        self.lots.iter().position(|l| l.id == id)
    }

    pub fn effective_mix(&self) -> StrategyMix {
        self.mix.clone().unwrap_or_default()
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(source: &str) -> Result<Scenario> {
    let scenario: Scenario = toml::from_str(source).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|span| line_col(source, span.start))
            .unwrap_or((0, 0));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let violations = validate_scenario(&scenario);
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(Error::Validation(violations))
    }
}

pub fn load_scenario_file(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_scenario(&text)
}

pub fn save_scenario(s: &Scenario) -> String {
    toml::to_string_pretty(s).expect("scenario serializes to TOML")
}

pub fn save_scenario_file(s: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, save_scenario(s)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let before = &source[..offset.min(source.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Every broken invariant of `s`; empty iff the scenario is valid.
pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |ok: bool, field: &str, rule: &str| {
        if !ok {
            out.push(Violation::new(field, rule));
        }
    };

    let positive = |x: f64| x.is_finite() && x > 0.0;
    let k = &s.kinematics;
    check(positive(k.spot_width), "kinematics.W", "must be > 0");
    check(positive(k.cruise_speed), "kinematics.v_c", "must be > 0");
    check(positive(k.walk_speed), "kinematics.v_w", "must be > 0");
    check(positive(k.ramp_speed), "kinematics.v_ud", "must be > 0");
    check(positive(k.stop_time), "kinematics.t_stop", "must be > 0");
    check(positive(k.turn_time), "kinematics.t_turn", "must be > 0");

    check(
        positive(s.arrival.lambda_segment),
        "arrival.lambda_segment",
        "must be > 0",
    );
    check(
        s.arrival.noise_sigma.is_finite() && s.arrival.noise_sigma >= 0.0,
        "arrival.noise_sigma",
        "must be >= 0",
    );
    check(positive(s.patience.shape), "patience.shape", "must be > 0");
    check(positive(s.patience.scale), "patience.scale", "must be > 0");
    check(
        s.exclusion_radius.is_finite() && s.exclusion_radius >= 0.0,
        "exclusion_radius",
        "must be >= 0",
    );

    let w = &s.time_window;
    if !(w.start.is_finite() && w.end.is_finite() && w.end > w.start) {
        check(false, "time_window", "end must be after start");
    } else if !positive(w.segment) {
        check(false, "time_window.segment", "must be > 0");
    } else {
        let ratio = (w.end - w.start) / w.segment;
        check(
            (ratio - ratio.round()).abs() < 1e-9 && ratio.round() >= 1.0,
            "time_window.segment",
            "must divide end - start",
        );
    }

    let r = &s.region;
    let region_ok = r.min_lat < r.max_lat
        && r.min_lon < r.max_lon
        && r.min_lat > -90.0
        && r.max_lat < 90.0
        && r.min_lon >= -180.0
        && r.max_lon < 180.0;
    check(
        region_ok,
        "region",
        "bounds must satisfy -90 < min_lat < max_lat < 90 and -180 <= min_lon < max_lon < 180",
    );
    check(
        s.destination.to_geo().is_ok(),
        "destination",
        "latitude/longitude out of range",
    );

    check(!s.lots.is_empty(), "lots", "at least one lot is required");
    check(
        !s.entries.is_empty(),
        "entries",
        "at least one entry point is required",
    );
    check(s.demand >= 1, "demand_K", "must be >= 1");
    let capacity = s.total_capacity();
    check(
        s.allow_overflow || s.demand <= capacity,
        "demand_K",
        &format!(
            "demand {} exceeds total capacity {capacity} and allow_overflow is off",
            s.demand
        ),
    );

    let mut seen = HashSet::new();
    for lot in &s.lots {
        let f = |name: &str| format!("lots[{}].{name}", lot.id);
        check(seen.insert(lot.id.as_str()), &f("id"), "duplicate lot id");
        check(lot.capacity >= 1, &f("capacity"), "must be >= 1");
        check(lot.floors >= 1, &f("floors"), "must be >= 1");
        check(
            lot.floor_capacities.len() == lot.floors as usize,
            &f("floor_capacities"),
            "length must equal floors",
        );
        check(
            lot.floor_capacities.iter().all(|&c| c >= 1),
            &f("floor_capacities"),
            "every floor needs capacity >= 1",
        );
        check(
            lot.floor_capacities.iter().map(|&c| c as u64).sum::<u64>() == lot.capacity as u64,
            &f("floor_capacities"),
            "must sum to capacity",
        );
        check(
            lot.ramp_length.is_finite() && lot.ramp_length >= 0.0,
            &f("ramp_length"),
            "must be >= 0",
        );
        check(
            region_ok && r.contains(lot.position()),
            &f("location"),
            "outside region",
        );
    }

    let mut seen = HashSet::new();
    for e in &s.entries {
        let f = |name: &str| format!("entries[{}].{name}", e.id);
        check(seen.insert(e.id.as_str()), &f("id"), "duplicate entry id");
        check(
            region_ok && r.contains(e.position()),
            &f("location"),
            "outside region",
        );
    }

    if let Some(mix) = &s.mix {
        if let Err(e) = mix.validate() {
            check(false, "mix", &e.to_string());
        }
    }
    out
}

/// Knobs for [`synth_scenario`] that are not part of the lot layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthOverrides {
    pub destination: Option<LatLon>,
    pub kinematics: KinematicParams,
    pub arrival: ArrivalParams,
    pub patience: PatienceParams,
    pub exclusion_radius: f64,
    pub time_window: TimeWindow,
    /// Defaults to the total capacity.
    pub demand: Option<usize>,
    pub mix: Option<StrategyMix>,
}

impl Default for SynthOverrides {
    fn default() -> Self {
        Self {
            destination: None,
            kinematics: KinematicParams::default(),
            arrival: ArrivalParams::default(),
            patience: PatienceParams::default(),
            exclusion_radius: 300.0,
            time_window: TimeWindow::default(),
            demand: None,
            mix: None,
        }
    }
}

/// Generates a synthetic scenario with `n_lots` lots whose capacities sum to
/// `total_capacity`, and `n_entries` entries on the region boundary.
///
/// Deterministic in `seed`. The destination defaults to the region centre.
pub fn synth_scenario(
    seed: u64,
    n_lots: usize,
    total_capacity: usize,
    n_entries: usize,
    region: Region,
    overrides: SynthOverrides,
) -> Result<Scenario> {
    if n_lots == 0 {
        return Err(Error::InvalidArgument("n_lots must be >= 1".into()));
    }
    if n_entries == 0 {
        return Err(Error::InvalidArgument("n_entries must be >= 1".into()));
    }
    if total_capacity < n_lots {
        return Err(Error::InvalidArgument(format!(
            "cannot split {total_capacity} spaces over {n_lots} lots with at least one space each"
        )));
    }
    if total_capacity > u32::MAX as usize {
        return Err(Error::InvalidArgument("total_capacity too large".into()));
    }
    if !(region.min_lat < region.max_lat && region.min_lon < region.max_lon) {
        return Err(Error::InvalidArgument("region bounds are empty".into()));
    }

    let mut rng = seeded_rng(seed, 0);

    // uniform composition of total_capacity into n_lots positive parts
    let mut cuts: Vec<usize> = sample_indices(&mut rng, total_capacity - 1, n_lots - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(total_capacity);
    let mut prev = 0;
    let capacities: Vec<u32> = cuts
        .iter()
        .map(|&c| {
            let cap = (c - prev) as u32;
            prev = c;
            cap
        })
        .collect();

    let lat_span = region.max_lat - region.min_lat;
    let lon_span = region.max_lon - region.min_lon;
    let lots = capacities
        .iter()
        .enumerate()
        .map(|(i, &capacity)| {
            let lat = region.min_lat + rng.random::<f64>() * lat_span;
            let lon = region.min_lon + rng.random::<f64>() * lon_span;
            let floors = rng.random_range(1..=3u32).min(capacity);
            let ramp_length = if floors > 1 {
                rng.random_range(20.0..40.0)
            } else {
                0.0
            };
            ParkingLot {
                id: format!("L{:02}", i + 1),
                lat,
                lon,
                capacity,
                floors,
                floor_capacities: split_evenly(capacity, floors),
                ramp_length,
            }
        })
        .collect();

    let entries = (0..n_entries)
        .map(|i| {
            let t: f64 = rng.random();
            let (lat, lon) = match rng.random_range(0..4u8) {
                0 => (region.min_lat, region.min_lon + t * lon_span),
                1 => (region.max_lat, region.min_lon + t * lon_span),
                2 => (region.min_lat + t * lat_span, region.min_lon),
                _ => (region.min_lat + t * lat_span, region.max_lon),
            };
            EntryPoint {
                id: format!("E{:02}", i + 1),
                lat,
                lon,
            }
        })
        .collect();

    Ok(Scenario {
        destination: overrides.destination.unwrap_or_else(|| region.center()),
        region,
        kinematics: overrides.kinematics,
        arrival: overrides.arrival,
        patience: overrides.patience,
        exclusion_radius: overrides.exclusion_radius,
        time_window: overrides.time_window,
        demand: overrides.demand.unwrap_or(total_capacity),
        allow_overflow: overrides.demand.is_some_and(|d| d > total_capacity),
        mix: overrides.mix,
        lots,
        entries,
    })
}

/// Splits `capacity` into `floors` near-equal parts, larger parts first.
fn split_evenly(capacity: u32, floors: u32) -> Vec<u32> {
    let base = capacity / floors;
    let extra = capacity % floors;
    (0..floors).map(|f| base + u32::from(f < extra)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
demand_K = 1
exclusion_radius = 300.0

[destination]
lat = 37.87
lon = -122.25

[region]
min_lat = 37.86
min_lon = -122.26
max_lat = 37.88
max_lon = -122.24

[kinematics]
W = 2.5
v_c = 2.78
v_w = 1.2
v_ud = 2.78
t_stop = 30.0
t_turn = 10.0

[arrival]
lambda_segment = 6.0
noise_sigma = 120.0

[patience]
shape = 2.0
scale = 300.0

[time_window]
start = 36000.0
end = 43200.0
segment = 600.0

[[lots]]
id = "A"
lat = 37.87
lon = -122.25
capacity = 10
floors = 2
floor_capacities = [5, 5]
ramp_length = 30.0

[[entries]]
id = "E1"
lat = 37.86
lon = -122.25
"#;

    #[test]
    fn minimal_document_loads() {
        let s = load_scenario(MINIMAL).unwrap();
        assert_eq!(s.lots.len(), 1);
        assert_eq!(s.entries.len(), 1);
        assert_eq!(s.demand, 1);
        assert!(!s.allow_overflow);
        assert!(s.mix.is_none());
    }

    #[test]
    fn bad_floor_sum_names_the_lot() {
        let doc = MINIMAL.replace("floor_capacities = [5, 5]", "floor_capacities = [5, 4]");
        match load_scenario(&doc) {
            Err(Error::Validation(v)) => {
                assert_eq!(v.len(), 1);
                assert!(v[0].field.contains("lots[A]"), "{}", v[0]);
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn parse_error_carries_line() {
        let doc = MINIMAL.replace("capacity = 10", "capacity = \"ten\"");
        match load_scenario(&doc) {
            Err(Error::Parse { line, .. }) => {
                let expected = doc.lines().position(|l| l.contains("\"ten\"")).unwrap() + 1;
                assert_eq!(line, expected);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn overflow_requires_flag() {
        let mut s = load_scenario(MINIMAL).unwrap();
        s.demand = 11;
        let v = validate_scenario(&s);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "demand_K");
        s.allow_overflow = true;
        assert!(validate_scenario(&s).is_empty());
    }

    #[test]
    fn lot_outside_region_is_named() {
        let mut s = load_scenario(MINIMAL).unwrap();
        s.lots[0].lat = 38.5;
        let v = validate_scenario(&s);
        assert_eq!(v.len(), 1);
        assert!(v[0].field.contains("lots[A]"));
    }

    #[test]
    fn every_violation_is_reported() {
        let mut s = load_scenario(MINIMAL).unwrap();
        s.kinematics.walk_speed = 0.0;
        s.patience.scale = -1.0;
        s.time_window.segment = 700.0;
        s.entries.push(s.entries[0].clone());
        assert_eq!(validate_scenario(&s).len(), 4);
    }

    #[test]
    fn save_then_load_is_identity() {
        let s = synth_scenario(5, 6, 77, 3, Region::BERKELEY, SynthOverrides::default()).unwrap();
        let back = load_scenario(&save_scenario(&s)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn synth_is_deterministic_and_exact() {
        let a =
            synth_scenario(1, 21, 3992, 12, Region::BERKELEY, SynthOverrides::default()).unwrap();
        let b =
            synth_scenario(1, 21, 3992, 12, Region::BERKELEY, SynthOverrides::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total_capacity(), 3992);
        assert_eq!(a.demand, 3992);
        assert_eq!(a.entries.len(), 12);
        let r = a.region;
        for e in &a.entries {
            let on_edge = e.lat == r.min_lat
                || e.lat == r.max_lat
                || e.lon == r.min_lon
                || e.lon == r.max_lon;
            assert!(on_edge, "{e:?}");
        }
    }

    #[test]
    fn synth_rejects_impossible_partitions() {
        assert!(synth_scenario(1, 5, 4, 1, Region::BERKELEY, SynthOverrides::default()).is_err());
        assert!(synth_scenario(1, 0, 4, 1, Region::BERKELEY, SynthOverrides::default()).is_err());
        assert!(synth_scenario(1, 2, 4, 0, Region::BERKELEY, SynthOverrides::default()).is_err());
    }

    #[test]
    fn synth_desk_scale_validates() {
        let s = synth_scenario(2, 4, 40, 2, Region::BERKELEY, SynthOverrides::default()).unwrap();
        assert!(validate_scenario(&s).is_empty());
        assert_eq!(s.lots.len(), 4);
    }

    #[test]
    fn split_evenly_sums() {
        assert_eq!(split_evenly(10, 3), vec![4, 3, 3]);
        assert_eq!(split_evenly(1, 1), vec![1]);
    }
}
