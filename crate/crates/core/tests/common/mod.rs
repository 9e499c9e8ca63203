//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use event_parking::lot_model::LotState;
use event_parking::scenario::{load_scenario_file, Scenario};
use event_parking::simulator::{Census, EventKind, EventRecord, SimObserver};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub fn fixture(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name);
    load_scenario_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn desk() -> Scenario {
    fixture("berkeley_desk.toml")
}

pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `|approx - reference| / |reference|`, evaluated exactly.
pub fn rel_err(approx: f64, reference: &BigRational) -> f64 {
    let diff = (exact(approx) - reference).abs();
    if reference.is_zero() {
        return diff.to_f64().unwrap();
    }
    (diff / reference.abs()).to_f64().unwrap()
}

/// Fixed-point reals with 60 decimal digits.
pub struct Fixed {
    scale: BigInt,
}

impl Default for Fixed {
    fn default() -> Self {
        Self {
            scale: BigInt::from(10).pow(60),
        }
    }
}

impl Fixed {
    pub fn encode(&self, q: &BigRational) -> BigInt {
        (q * BigRational::from_integer(self.scale.clone()))
            .floor()
            .to_integer()
    }

    pub fn decode(&self, v: &BigInt) -> BigRational {
        BigRational::new(v.clone(), self.scale.clone())
    }

    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b / &self.scale
    }

    /// `atan(1/n)` by its alternating series.
    fn atan_inv(&self, n: i64) -> BigInt {
        let n = BigInt::from(n);
        let n2 = &n * &n;
        let mut power = &self.scale / &n;
        let mut sum = BigInt::zero();
        let mut k = 0i64;
        while !power.is_zero() {
            let term = &power / BigInt::from(2 * k + 1);
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
            power /= &n2;
            k += 1;
        }
        sum
    }

    /// Machin's formula.
    pub fn pi(&self) -> BigInt {
        BigInt::from(16) * self.atan_inv(5) - BigInt::from(4) * self.atan_inv(239)
    }

    pub fn sin(&self, a: &BigInt) -> BigInt {
        let a2 = self.mul(a, a);
        let mut term = a.clone();
        let mut sum = BigInt::zero();
        let mut k = 1i64;
        while !term.is_zero() {
            sum += &term;
            term = -self.mul(&term, &a2) / BigInt::from((2 * k) * (2 * k + 1));
            k += 1;
        }
        sum
    }

    /// `atanh(s)` for `|s| < 1`.
    pub fn atanh(&self, s: &BigInt) -> BigInt {
        let s2 = self.mul(s, s);
        let mut power = s.clone();
        let mut sum = BigInt::zero();
        let mut k = 0i64;
        while !power.is_zero() {
            sum += &power / BigInt::from(2 * k + 1);
            power = self.mul(&power, &s2);
            k += 1;
        }
        sum
    }
}

/// Reference projection. Uses `ln(tan(pi/4 + a/2)) = atanh(sin a)` with
/// `a = 0.8 * lat` instead of evaluating `tan` and `ln` directly.
pub fn miller_reference(lat: f64, lon: f64) -> (BigRational, BigRational) {
    let f = Fixed::default();
    let pi = f.decode(&f.pi());
    let r = BigRational::from_integer(BigInt::from(6_381_372));
    let a = f.encode(&(ratio(4, 5) * exact(lat)));
    let y_prime = ratio(5, 4) * f.decode(&f.atanh(&f.sin(&a)));
    let circumference = BigRational::from_integer(BigInt::from(2)) * &pi * &r;
    let x =
        &circumference / BigInt::from(2) + &circumference / (&pi * BigInt::from(2)) * exact(lon);
    let y = &circumference / BigInt::from(4) - &circumference / ratio(46, 5) * y_prime;
    (x, y)
}

/// Exact search time from the parameters' binary values.
#[allow(clippy::too_many_arguments)]
pub fn search_time_reference(
    w: f64,
    capacity: u32,
    occupancy: f64,
    v_c: f64,
    v_w: f64,
    t_stop: f64,
    floors: u32,
    ramp: f64,
    v_ud: f64,
    top_capacity: u32,
    top_occupancy: f64,
    t_turn: f64,
) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    let aisle = exact(w) * BigRational::from_integer(BigInt::from(capacity)) * exact(occupancy);
    let base = &aisle / (&two * exact(v_c)) + &aisle / (&two * exact(v_w)) + exact(t_stop);
    let climb = exact(ramp) / exact(v_ud)
        * BigRational::from_integer(BigInt::from(top_capacity))
        * exact(top_occupancy)
        + exact(t_turn);
    base + BigRational::from_integer(BigInt::from(floors - 1)) * climb
}

/// Mean of a Poisson(lambda) law restricted to `0..n`, by direct summation.
pub fn truncated_poisson_mean(lambda: f64, n: usize) -> f64 {
    let mut weight = (-lambda).exp();
    let (mut mass, mut first) = (0.0, 0.0);
    for k in 0..n {
        mass += weight;
        first += k as f64 * weight;
        weight *= lambda / (k + 1) as f64;
    }
    first / mass
}

/// Rerouting per vehicle rebuilt from the event log alone: every leg that
/// ends at a `full` event counts, plus the overhead lost there.
pub fn replay_rerouting(events: &[EventRecord], n_vehicles: usize, overhead: f64) -> Vec<f64> {
    let mut last: Vec<Option<(EventKind, f64)>> = vec![None; n_vehicles];
    let mut leg_start = vec![0.0; n_vehicles];
    let mut total = vec![0.0; n_vehicles];
    for e in events {
        let v = e.vehicle;
        match e.kind {
            EventKind::ArriveLot => {
                leg_start[v] = match last[v] {
                    Some((EventKind::Full, t)) => t + overhead,
                    Some((_, t)) => t,
                    None => panic!("vehicle {v} reached a lot before entering"),
                };
            }
            EventKind::Full => total[v] += e.time - leg_start[v] + overhead,
            _ => {}
        }
        last[v] = Some((e.kind, e.time));
    }
    total
}

/// Checks conservation and capacity after every event.
pub struct Audit {
    pub demand: usize,
    pub capacities: Vec<u32>,
    pub events: usize,
    pub violations: Vec<String>,
}

impl Audit {
    pub fn new(s: &Scenario) -> Self {
        Self {
            demand: s.demand,
            capacities: s.lots.iter().map(|l| l.capacity).collect(),
            events: 0,
            violations: Vec::new(),
        }
    }
}

impl SimObserver for Audit {
    fn on_event(&mut self, event: &EventRecord, census: &Census, states: &[LotState]) {
        self.events += 1;
        if census.total() != self.demand {
            self.violations.push(format!(
                "t={} census {census:?} sums to {}",
                event.time,
                census.total()
            ));
        }
        for (st, &cap) in states.iter().zip(&self.capacities) {
            if st.occupied() + st.reserved > cap {
                self.violations.push(format!(
                    "t={} lot {} holds {} of {cap}",
                    event.time,
                    st.lot,
                    st.occupied()
                ));
            }
        }
    }
}
