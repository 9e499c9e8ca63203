//! Driver decision rules: each maps the current position and lot states to a
//! preference order over all lots.
//!
//! Four guided groups plus two simplified baselines:
//!
//! | label | rule |
//! |-------|------|
//! | `G1`  | nearest lot by drive distance from the current position |
//! | `G2`  | as `G1`, but lots within the exclusion radius of the destination go last |
//! | `G3`  | shortest walk from lot to destination |
//! | `G4`  | least drive + in-lot search + walk time |
//! | `NG`  | nearest lot, no availability information (unguided baseline) |
//! | `MC`  | weighted score over drive distance, walk distance and fullness |
//!
//! Guided rules see live availability and never pick a lot that is already
//! full or fully held. `NG` only learns a lot is full by driving there.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geo::{manhattan_distance, PlanarCoord};
use crate::layout::Layout;
use crate::lot_model::{search_time, LotState};
use crate::scenario::Scenario;
use crate::stochastic::{
    actual_arrival, sample_arrival_noise, sample_expected_arrival, sample_patience, seeded_rng,
};

/// Weights of the multi-criteria baseline. Nonnegative, summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriteriaWeights {
    pub drive: f64,
    pub walk: f64,
    pub fullness: f64,
}

impl Default for CriteriaWeights {
    fn default() -> Self {
        Self {
            drive: 0.5,
            walk: 0.25,
            fullness: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StrategyKind {
    NearestFromEntry,
    NearestAvoidingCore,
    MinWalk,
    MinTotal,
    NoGuidanceNearest,
    MultiCriteria(CriteriaWeights),
}

impl StrategyKind {
    pub const GROUPS: [StrategyKind; 4] = [
        StrategyKind::NearestFromEntry,
        StrategyKind::NearestAvoidingCore,
        StrategyKind::MinWalk,
        StrategyKind::MinTotal,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            StrategyKind::NearestFromEntry => "G1",
            StrategyKind::NearestAvoidingCore => "G2",
            StrategyKind::MinWalk => "G3",
            StrategyKind::MinTotal => "G4",
            StrategyKind::NoGuidanceNearest => "NG",
            StrategyKind::MultiCriteria(_) => "MC",
        }
    }

    fn canonical_rank(&self) -> u8 {
        match self {
            StrategyKind::NearestFromEntry => 0,
            StrategyKind::NearestAvoidingCore => 1,
            StrategyKind::MinWalk => 2,
            StrategyKind::MinTotal => 3,
            StrategyKind::NoGuidanceNearest => 4,
            StrategyKind::MultiCriteria(_) => 5,
        }
    }

    /// Whether the driver sees live lot availability.
    pub fn is_guided(&self) -> bool {
        !matches!(self, StrategyKind::NoGuidanceNearest)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "G1" => StrategyKind::NearestFromEntry,
            "G2" => StrategyKind::NearestAvoidingCore,
            "G3" => StrategyKind::MinWalk,
            "G4" => StrategyKind::MinTotal,
            "NG" | "NEAREST" => StrategyKind::NoGuidanceNearest,
            "MC" | "MULTICRITERIA" => StrategyKind::MultiCriteria(CriteriaWeights::default()),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown strategy label {other:?} (expected G1..G4, NG or MC)"
                )))
            }
        })
    }
}

/// Population shares of each strategy.
///
/// In documents and on the command line a mix is written by label, e.g.
/// `G1=0.25,G2=0.25,G3=0.25,G4=0.25`. `MC` always carries default weights there.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyMix {
    entries: Vec<(StrategyKind, f64)>,
}

impl StrategyMix {
    pub fn new(mut entries: Vec<(StrategyKind, f64)>) -> Result<Self> {
        entries.sort_by_key(|(k, _)| k.canonical_rank());
        let mix = Self { entries };
        mix.validate()?;
        Ok(mix)
    }

    pub fn single(kind: StrategyKind) -> Self {
        Self {
            entries: vec![(kind, 1.0)],
        }
    }

    pub fn entries(&self) -> &[(StrategyKind, f64)] {
        &self.entries
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::InvalidArgument("strategy mix is empty".into()));
        }
        for w in self.entries.windows(2) {
            if w[0].0.canonical_rank() == w[1].0.canonical_rank() {
                return Err(Error::InvalidArgument(format!(
                    "strategy {} appears twice in the mix",
                    w[0].0
                )));
            }
        }
        for (kind, w) in &self.entries {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "weight of {kind} must be nonnegative, got {w}"
                )));
            }
            if let StrategyKind::MultiCriteria(c) = kind {
                let parts = [c.drive, c.walk, c.fullness];
                if parts.iter().any(|p| !(p.is_finite() && *p >= 0.0))
                    || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9
                {
                    return Err(Error::InvalidArgument(
                        "multi-criteria weights must be nonnegative and sum to 1".into(),
                    ));
                }
            }
        }
        let total: f64 = self.entries.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "strategy weights must sum to 1, got {total}"
            )));
        }
        Ok(())
    }

    pub fn all_guided(&self) -> bool {
        self.entries.iter().all(|(k, w)| k.is_guided() || *w == 0.0)
    }
}

impl Default for StrategyMix {
    /// Equal quarters over the four groups.
    fn default() -> Self {
        Self {
            entries: StrategyKind::GROUPS.iter().map(|&k| (k, 0.25)).collect(),
        }
    }
}

impl FromStr for StrategyMix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .filter(|part| !part.trim().is_empty())
            .map(|part| {
                let (label, weight) = part.split_once('=').ok_or_else(|| {
                    Error::InvalidArgument(format!("mix entry {part:?} is not LABEL=WEIGHT"))
                })?;
                let weight: f64 = weight.trim().parse().map_err(|_| {
                    Error::InvalidArgument(format!("bad weight in mix entry {part:?}"))
                })?;
                Ok((label.parse()?, weight))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

impl fmt::Display for StrategyMix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(k, w)| format!("{k}={w}"))
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for StrategyMix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (k, w) in &self.entries {
            map.serialize_entry(k.label(), w)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for StrategyMix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct MixVisitor;

        impl<'de> Visitor<'de> for MixVisitor {
            type Value = StrategyMix;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a table of strategy label = weight")
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut entries = Vec::new();
                while let Some((label, weight)) = map.next_entry::<String, f64>()? {
                    entries.push((label.parse().map_err(de::Error::custom)?, weight));
                }
                StrategyMix::new(entries).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_map(MixVisitor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vehicle {
    pub id: usize,
    /// Index into the scenario's entry points.
    pub entry: usize,
    pub strategy: StrategyKind,
    pub expected_arrival: f64,
    pub noise: f64,
    pub actual_arrival: f64,
    /// Maximum cumulative search time before leaving, seconds.
    pub patience: f64,
}

/// Stream of the generator that drives vehicle attributes.
const ATTRIBUTE_STREAM: u64 = 1;
/// Stream used for strategy labels, kept apart so that every method compared
/// under one seed sees the same entries, arrivals and patiences.
const STRATEGY_STREAM: u64 = 2;

/// Draws the `demand` vehicles of one run: random entry street, arrival time
/// and patience, then a strategy from `mix`.
pub fn generate_vehicles(s: &Scenario, mix: &StrategyMix, seed: u64) -> Result<Vec<Vehicle>> {
    let mut rng = seeded_rng(seed, ATTRIBUTE_STREAM);
    let mut vehicles: Vec<Vehicle> = (0..s.demand)
        .map(|id| {
            let entry = rng.random_range(0..s.entries.len());
            let expected_arrival = sample_expected_arrival(&mut rng, &s.arrival, &s.time_window);
            let noise = sample_arrival_noise(&mut rng, &s.arrival);
            let patience = sample_patience(&mut rng, &s.patience);
            Vehicle {
                id,
                entry,
                strategy: StrategyKind::NearestFromEntry,
                expected_arrival,
                noise,
                actual_arrival: actual_arrival(expected_arrival, noise, &s.time_window),
                patience,
            }
        })
        .collect();
    let mut rng = seeded_rng(seed, STRATEGY_STREAM);
    assign_strategy_mix(&mut vehicles, mix, &mut rng)?;
    Ok(vehicles)
}

/// Labels each vehicle independently with a strategy drawn from `mix`.
pub fn assign_strategy_mix<R: Rng + ?Sized>(
    vehicles: &mut [Vehicle],
    mix: &StrategyMix,
    rng: &mut R,
) -> Result<()> {
    mix.validate()?;
    let dist = WeightedIndex::new(mix.entries.iter().map(|(_, w)| *w))
        .map_err(|e| Error::InvalidArgument(format!("strategy mix: {e}")))?;
    for v in vehicles {
        v.strategy = mix.entries[dist.sample(rng)].0;
    }
    Ok(())
}

/// All lot indices ordered by preference under `kind`. Ties go to the
/// smaller lot id.
pub fn rank_lots(
    kind: StrategyKind,
    position: PlanarCoord,
    s: &Scenario,
    layout: &Layout,
    states: &[LotState],
) -> Vec<usize> {
    let n = s.lots.len();
    let drive: Vec<f64> = layout
        .lots
        .iter()
        .map(|&p| manhattan_distance(position, p))
        .collect();
    let walk: Vec<f64> = (0..n).map(|i| layout.walk_distance(i)).collect();

    // (primary, secondary) sort keys; primary only used for G2's demotion
    let keys: Vec<(f64, f64)> = match kind {
        StrategyKind::NearestFromEntry | StrategyKind::NoGuidanceNearest => {
            drive.iter().map(|&d| (0.0, d)).collect()
        }
        StrategyKind::NearestAvoidingCore => (0..n)
            .map(|i| {
                let demoted = walk[i] < s.exclusion_radius;
                (if demoted { 1.0 } else { 0.0 }, drive[i])
            })
            .collect(),
        StrategyKind::MinWalk => walk.iter().map(|&w| (0.0, w)).collect(),
        StrategyKind::MinTotal => {
            let k = &s.kinematics;
            (0..n)
                .map(|i| {
                    let total = drive[i] / k.cruise_speed
                        + search_time(&s.lots[i], &states[i], k)
                        + walk[i] / k.walk_speed;
                    (0.0, total)
                })
                .collect()
        }
        StrategyKind::MultiCriteria(w) => {
            let max_drive = drive.iter().cloned().fold(0.0, f64::max);
            let max_walk = walk.iter().cloned().fold(0.0, f64::max);
            let norm = |x: f64, max: f64| if max > 0.0 { x / max } else { 0.0 };
            (0..n)
                .map(|i| {
                    let lot = &s.lots[i];
                    let fullness = f64::from(states[i].occupied()) / f64::from(lot.capacity);
                    let score = w.drive * norm(drive[i], max_drive)
                        + w.walk * norm(walk[i], max_walk)
                        + w.fullness * fullness;
                    (0.0, score)
                })
                .collect()
        }
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        keys[a]
            .0
            .total_cmp(&keys[b].0)
            .then(keys[a].1.total_cmp(&keys[b].1))
            .then_with(|| s.lots[a].id.cmp(&s.lots[b].id))
            .then(a.cmp(&b))
    });
    order
}

/// Most preferred lot that has not been tried yet and, for guided drivers,
/// still has a free unheld spot.
pub fn next_choice(
    kind: StrategyKind,
    visited: &[bool],
    position: PlanarCoord,
    s: &Scenario,
    layout: &Layout,
    states: &[LotState],
) -> Option<usize> {
    rank_lots(kind, position, s, layout, states)
        .into_iter()
        .find(|&i| !visited[i] && (!kind.is_guided() || states[i].available(&s.lots[i]) > 0))
}
