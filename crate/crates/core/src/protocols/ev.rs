use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EfficiencyReport;
use crate::error::{IfmError, Result};
use crate::optics::mzi::{BRIGHT, DARK};
use crate::optics::{build_mzi, measure, run_circuit, OutcomeDistribution};

/// One photon through a matched interferometer with first reflectivity `r`.
/// `D2` (the dark port) is the informative outcome.
pub fn ev_single_shot(r: f64, object: Option<Complex64>) -> Result<OutcomeDistribution> {
    let ifm = build_mzi(r, None, object)?;
    let run = run_circuit(&ifm.circuit, &ifm.input())?;
    measure(&run.final_state, ifm.circuit.detectors().expect("mzi declares detectors"))
}

/// Maps a single-shot distribution onto success (`D2`), explosion and
/// inconclusive (`D1` plus anything unread).
pub fn ev_report(dist: &OutcomeDistribution) -> Result<EfficiencyReport> {
    let dark = dist.get(DARK).unwrap_or(0.0);
    let bright = dist.get(BRIGHT).unwrap_or(0.0);
    EfficiencyReport::new(dark, dist.explosion_prob, bright + dist.residual_prob)
}

fn check_open_unit(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(IfmError::InvalidParameter(format!(
            "reflectivity {r} must lie in (0, 1)"
        )))
    }
}

/// Repeats the bomb test until it is conclusive: a `D1` click sends the
/// photon through again, so success and explosion are each weighted by the
/// geometric series over inconclusive rounds.
pub fn ev_iterated(r: f64) -> Result<EfficiencyReport> {
    check_open_unit(r)?;
    let single = ev_report(&ev_single_shot(r, Some(Complex64::new(0.0, 0.0)))?)?;
    let conclusive = single.p_success + single.p_explosion;
    EfficiencyReport::new(single.p_success / conclusive, single.p_explosion / conclusive, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub trials: u64,
    pub successes: u64,
    pub explosions: u64,
    /// Photons sent, summed over all trials.
    pub shots: u64,
}

impl MonteCarloEstimate {
    pub fn p_success(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error of [`Self::p_success`].
    pub fn std_error(&self) -> f64 {
        let p = self.p_success();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn mean_shots(&self) -> f64 {
        self.shots as f64 / self.trials as f64
    }
}

/// Samples the iterated bomb test photon by photon.
pub fn ev_iterated_monte_carlo(r: f64, trials: u64, seed: u64) -> Result<MonteCarloEstimate> {
    check_open_unit(r)?;
    if trials == 0 {
        return Err(IfmError::InvalidParameter("trials must be positive".into()));
    }
    let dist = ev_single_shot(r, Some(Complex64::new(0.0, 0.0)))?;
    let p_dark = dist.get(DARK).unwrap_or(0.0);
    let p_boom = dist.explosion_prob;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut est = MonteCarloEstimate {
        trials,
        successes: 0,
        explosions: 0,
        shots: 0,
    };
    for _ in 0..trials {
        loop {
            est.shots += 1;
            let u: f64 = rng.random();
            if u < p_dark {
                est.successes += 1;
                break;
            }
            if u < p_dark + p_boom {
                est.explosions += 1;
                break;
            }
        }
    }
    Ok(est)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    /// `(R, η)` in grid order.
    pub points: Vec<(f64, f64)>,
    /// Grid point with the highest efficiency.
    pub best: Option<(f64, f64)>,
    /// Whether η decreases as R increases across the grid.
    pub monotone_decreasing: bool,
}

pub fn efficiency_frontier(grid: &[f64]) -> Result<Frontier> {
    let points = grid
        .iter()
        .map(|&r| {
            let eta = ev_iterated(r)?.efficiency().expect("iterated runs are conclusive");
            Ok((r, eta))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = points
        .iter()
        .copied()
        .fold(None, |acc: Option<(f64, f64)>, p| match acc {
            Some(b) if b.1 >= p.1 => Some(b),
            _ => Some(p),
        });
    let mut sorted = points.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone_decreasing = sorted.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(Frontier {
        points,
        best,
        monotone_decreasing,
    })
}
