//! Seeded samplers for arrival times and driver patience.
//!
//! Expected arrivals follow a Poisson law over the segment index of the
//! arrival window, truncated to the window, with a uniform offset inside the
//! segment. Arrival noise is Gaussian. Patience is a Gamma-distributed
//! threshold on cumulative search time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

/// Generator used everywhere a run needs randomness.
pub type SimRng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalParams {
    /// Poisson mean, in segment units.
    pub lambda_segment: f64,
    /// Standard deviation of arrival noise, seconds.
    pub noise_sigma: f64,
}

impl Default for ArrivalParams {
    fn default() -> Self {
        Self {
            lambda_segment: 6.0,
            noise_sigma: 120.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatienceParams {
    pub shape: f64,
    /// Seconds.
    pub scale: f64,
}

impl Default for PatienceParams {
    fn default() -> Self {
        Self {
            shape: 2.0,
            scale: 300.0,
        }
    }
}

/// Arrival window `[start, end)` cut into segments of `segment` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
    pub segment: f64,
}

impl TimeWindow {
    pub fn n_segments(&self) -> usize {
        ((self.end - self.start) / self.segment).round().max(0.0) as usize
    }
}

impl Default for TimeWindow {
    /// 10:00 to 12:00 in seconds after midnight, ten-minute segments.
    fn default() -> Self {
        Self {
            start: 36_000.0,
            end: 43_200.0,
            segment: 600.0,
        }
    }
}

/// Poisson(λ) probabilities over `0..n`, renormalized to sum to one.
///
/// Computed in log space so that large rates do not underflow.
pub fn truncated_poisson_pmf(lambda: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    if lambda <= 0.0 {
        let mut pmf = vec![0.0; n];
        pmf[0] = 1.0;
        return pmf;
    }
    let ln_lambda = lambda.ln();
    let mut log_p = Vec::with_capacity(n);
    let mut ln_fact = 0.0;
    for s in 0..n {
        if s > 0 {
            ln_fact += (s as f64).ln();
        }
        log_p.push(s as f64 * ln_lambda - ln_fact);
    }
    let max = log_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_p.iter().map(|lp| (lp - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Segment index drawn from the truncated Poisson law.
pub fn sample_segment<R: Rng + ?Sized>(rng: &mut R, lambda: f64, n_segments: usize) -> usize {
    let pmf = truncated_poisson_pmf(lambda, n_segments);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (s, p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return s;
        }
    }
    // rounding left `acc` a hair under one; fall back to the last positive cell
    pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Expected arrival time `ET`, seconds.
pub fn sample_expected_arrival<R: Rng + ?Sized>(
    rng: &mut R,
    p: &ArrivalParams,
    window: &TimeWindow,
) -> f64 {
    let s = sample_segment(rng, p.lambda_segment, window.n_segments().max(1));
    let u: f64 = rng.random();
    window.start + (s as f64 + u) * window.segment
}

/// Arrival noise `NS`, seconds.
pub fn sample_arrival_noise<R: Rng + ?Sized>(rng: &mut R, p: &ArrivalParams) -> f64 {
    if p.noise_sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, p.noise_sigma)
        .expect("noise_sigma validated nonnegative")
        .sample(rng)
}

/// `AT = ET + NS`, never earlier than the window opening.
pub fn actual_arrival(expected: f64, noise: f64, window: &TimeWindow) -> f64 {
    (expected + noise).max(window.start)
}

pub fn sample_patience<R: Rng + ?Sized>(rng: &mut R, p: &PatienceParams) -> f64 {
    let g = Gamma::new(p.shape, p.scale).expect("patience parameters validated positive");
    loop {
        let x: f64 = g.sample(rng);
        // tiny shapes can underflow to zero; patience must stay positive
        if x > 0.0 {
            return x;
        }
    }
}

pub fn should_abandon(elapsed_search: f64, patience: f64) -> bool {
    elapsed_search > patience
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_sums_to_one_and_stays_in_range() {
        for &lambda in &[1e-12, 0.5, 6.0, 40.0, 2000.0] {
            let pmf = truncated_poisson_pmf(lambda, 12);
            assert_eq!(pmf.len(), 12);
            let total: f64 = pmf.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "lambda {lambda}");
        }
    }

    #[test]
    fn vanishing_rate_puts_everything_in_segment_zero() {
        let mut rng = seeded_rng(3, 0);
        let w = TimeWindow::default();
        let p = ArrivalParams {
            lambda_segment: 1e-12,
            noise_sigma: 0.0,
        };
        for _ in 0..1000 {
            let et = sample_expected_arrival(&mut rng, &p, &w);
            assert!(et >= w.start && et < w.start + w.segment);
        }
    }

    #[test]
    fn segments_never_leave_the_window() {
        let mut rng = seeded_rng(9, 0);
        for &lambda in &[0.1, 6.0, 11.0, 50.0] {
            for _ in 0..2000 {
                assert!(sample_segment(&mut rng, lambda, 12) < 12);
            }
        }
    }

    #[test]
    fn peak_sits_near_the_window_middle() {
        let mut rng = seeded_rng(11, 0);
        let w = TimeWindow::default();
        let p = ArrivalParams::default();
        let mut counts = [0usize; 12];
        for _ in 0..20_000 {
            let et = sample_expected_arrival(&mut rng, &p, &w);
            counts[((et - w.start) / w.segment) as usize] += 1;
        }
        let mode = (0..12).max_by_key(|&i| counts[i]).unwrap();
        // Poisson(6) has twin modes at 5 and 6, i.e. around 11:00
        assert!(mode == 5 || mode == 6, "mode {mode}");
    }

    #[test]
    fn zero_sigma_gives_exact_zero_noise() {
        let mut rng = seeded_rng(1, 0);
        let p = ArrivalParams {
            lambda_segment: 6.0,
            noise_sigma: 0.0,
        };
        assert_eq!(sample_arrival_noise(&mut rng, &p), 0.0);
    }

    #[test]
    fn actual_arrival_is_clamped() {
        let w = TimeWindow {
            start: 0.0,
            end: 600.0,
            segment: 60.0,
        };
        assert_eq!(actual_arrival(600.0, 0.0, &w), 600.0);
        assert_eq!(actual_arrival(600.0, -30.0, &w), 570.0);
        assert_eq!(actual_arrival(10.0, -50.0, &w), 0.0);
    }

    #[test]
    fn abandonment_threshold() {
        assert!(!should_abandon(0.0, 1.0));
        assert!(should_abandon(601.0, 600.0));
        assert!(!should_abandon(600.0, 600.0));
    }

    #[test]
    fn identical_seeds_give_identical_streams() {
        let draw = |seed| {
            let mut rng = seeded_rng(seed, 2);
            let a = ArrivalParams::default();
            let p = PatienceParams::default();
            let w = TimeWindow::default();
            (0..100)
                .map(|_| {
                    (
                        sample_expected_arrival(&mut rng, &a, &w).to_bits(),
                        sample_arrival_noise(&mut rng, &a).to_bits(),
                        sample_patience(&mut rng, &p).to_bits(),
                    )
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(17), draw(17));
        assert_ne!(draw(17), draw(18));
    }
}
