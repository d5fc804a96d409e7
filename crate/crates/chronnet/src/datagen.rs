//! Artificial spatiotemporal data: the probability-grid event generator.
//!
//! A scenario is a sequence of periods over ticks `1..=T`. Each period draws
//! events either from a per-cell probability matrix (events land on cell
//! centers) or from a 2D Gaussian in continuous coordinates (events are
//! binned later by whatever grid the analysis uses). The default mode emits
//! exactly one event per tick by categorical sampling, so generated sets
//! never contain parallel events; an optional Bernoulli mode draws every
//! cell independently per tick to exercise the parallel-event rule.
//!
//! All randomness is a pure function of the scenario seed.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{Event, EventSet};
use crate::grid::{CellId, GridSpec};

/// Per-cell event likelihood over a rectangular generator grid, row-major
/// with the same cell ordering as [`GridSpec::Rect`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityGrid {
    nx: u32,
    ny: u32,
    weights: Vec<f64>,
}

impl ProbabilityGrid {
    pub fn new(nx: u32, ny: u32, weights: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || weights.len() != (nx * ny) as usize {
            return Err(Error::InvalidParameter(format!(
                "probability grid shape {nx}x{ny} does not match {} weights",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "probability weights must be finite and non-negative".into(),
            ));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidParameter(
                "probability weights must not all be zero".into(),
            ));
        }
        Ok(ProbabilityGrid { nx, ny, weights })
    }

    pub fn uniform(nx: u32, ny: u32) -> Result<Self> {
        ProbabilityGrid::new(nx, ny, vec![1.0; (nx * ny) as usize])
    }

    pub fn shape(&self) -> (u32, u32) {
        (self.nx, self.ny)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights normalized to probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }
}

/// Where one period draws its events from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum PeriodSource {
    /// Categorical over grid cells; events land on cell centers.
    Cells { grid: ProbabilityGrid },
    /// Isotropic Gaussian in continuous data coordinates (samples outside
    /// the bounding box are redrawn).
    Gaussian { cx: f64, cy: f64, sigma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Period {
    #[serde(flatten)]
    pub source: PeriodSource,
    pub duration: u64,
}

/// Event emission mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SampleMode {
    /// Exactly one event per tick (no parallel events).
    Categorical,
    /// Independent per-cell draws each tick, scaled so a tick emits
    /// `expected_per_tick` events on average; ticks may hold several
    /// parallel events or none.
    Bernoulli { expected_per_tick: f64 },
}

/// A reproducible generator run: period schedule, geometry, seed, and mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    /// Generator geometry; must be rectangular for `Cells` periods and
    /// supplies the bounding box for Gaussian periods.
    pub grid: GridSpec,
    pub periods: Vec<Period>,
    pub seed: u64,
    pub mode: SampleMode,
}

impl ScenarioSpec {
    pub fn total_ticks(&self) -> u64 {
        self.periods.iter().map(|p| p.duration).sum()
    }

    fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.periods.is_empty() {
            return Err(Error::InvalidParameter(
                "scenario needs at least one period".into(),
            ));
        }
        for p in &self.periods {
            if p.duration < 1 {
                return Err(Error::InvalidParameter(
                    "period durations must be >= 1".into(),
                ));
            }
            match &p.source {
                PeriodSource::Cells { grid } => {
                    let (nx, ny) = grid.shape();
                    match self.grid {
                        GridSpec::Rect { nx: gx, ny: gy, .. } if gx == nx && gy == ny => {}
                        _ => {
                            return Err(Error::InvalidParameter(format!(
                                "probability grid {nx}x{ny} does not match the scenario grid"
                            )))
                        }
                    }
                }
                PeriodSource::Gaussian { cx, cy, sigma } => {
                    if !self.grid.bbox().contains(*cx, *cy) {
                        return Err(Error::InvalidParameter(format!(
                            "gaussian center ({cx}, {cy}) outside the scenario bounding box"
                        )));
                    }
                    if !(sigma.is_finite() && *sigma > 0.0) {
                        return Err(Error::InvalidParameter("gaussian sigma must be > 0".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Period index active at tick `t` (1-based).
    pub fn period_of_tick(&self, t: u64) -> usize {
        let mut upto = 0;
        for (i, p) in self.periods.iter().enumerate() {
            upto += p.duration;
            if t <= upto {
                return i;
            }
        }
        self.periods.len() - 1
    }

    /// First tick of every period after the first: the ground-truth regime
    /// boundaries.
    pub fn boundaries(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut upto = 0;
        for p in &self.periods[..self.periods.len() - 1] {
            upto += p.duration;
            out.push(upto + 1);
        }
        out
    }

    /// Ground-truth period index per event, by timestamp.
    pub fn truth_labels(&self, es: &EventSet) -> Vec<usize> {
        es.events()
            .iter()
            .map(|e| self.period_of_tick(e.t as u64))
            .collect()
    }
}

enum PreparedSource {
    Cells {
        dist: WeightedIndex<f64>,
        centers: Vec<(f64, f64)>,
    },
    Gaussian {
        cx: f64,
        cy: f64,
        sigma: f64,
    },
    BernoulliCells {
        probs: Vec<f64>,
        centers: Vec<(f64, f64)>,
    },
}

/// Runs the generator. Categorical mode emits one event per tick at `t = 1,
/// 2, ..., T`; reruns with the same spec are identical.
pub fn generate_events(spec: &ScenarioSpec) -> Result<EventSet> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let centers: Vec<(f64, f64)> = match spec.grid {
        GridSpec::Rect { nx, ny, .. } => (0..nx * ny)
            .map(|i| spec.grid.cell_center(CellId(i)))
            .collect::<Result<_>>()?,
        GridSpec::Hex { .. } => Vec::new(),
    };

    let mut prepared = Vec::with_capacity(spec.periods.len());
    for p in &spec.periods {
        let src = match (&p.source, spec.mode) {
            (PeriodSource::Cells { grid }, SampleMode::Categorical) => {
                let dist = WeightedIndex::new(grid.weights().iter().copied()).map_err(|e| {
                    Error::InvalidParameter(format!("bad probability weights: {e}"))
                })?;
                PreparedSource::Cells {
                    dist,
                    centers: centers.clone(),
                }
            }
            (PeriodSource::Cells { grid }, SampleMode::Bernoulli { expected_per_tick }) => {
                if !expected_per_tick.is_finite() || expected_per_tick <= 0.0 {
                    return Err(Error::InvalidParameter(
                        "expected events per tick must be > 0".into(),
                    ));
                }
                let probs = grid
                    .probabilities()
                    .into_iter()
                    .map(|p| (p * expected_per_tick).min(1.0))
                    .collect();
                PreparedSource::BernoulliCells {
                    probs,
                    centers: centers.clone(),
                }
            }
            (PeriodSource::Gaussian { cx, cy, sigma }, SampleMode::Categorical) => {
                PreparedSource::Gaussian {
                    cx: *cx,
                    cy: *cy,
                    sigma: *sigma,
                }
            }
            (PeriodSource::Gaussian { .. }, SampleMode::Bernoulli { .. }) => {
                return Err(Error::InvalidParameter(
                    "bernoulli mode requires cell-probability periods".into(),
                ));
            }
        };
        prepared.push(src);
    }

    let bbox = *spec.grid.bbox();
    let mut events = Vec::new();
    let mut t = 0u64;
    for (period, src) in spec.periods.iter().zip(&prepared) {
        for _ in 0..period.duration {
            t += 1;
            match src {
                PreparedSource::Cells { dist, centers } => {
                    let cell = dist.sample(&mut rng);
                    let (x, y) = centers[cell];
                    events.push(Event::new(t as f64, x, y));
                }
                PreparedSource::Gaussian { cx, cy, sigma } => {
                    let nx = Normal::new(*cx, *sigma).expect("validated sigma");
                    let ny = Normal::new(*cy, *sigma).expect("validated sigma");
                    let (x, y) = loop {
                        let x = nx.sample(&mut rng);
                        let y = ny.sample(&mut rng);
                        if bbox.contains(x, y) {
                            break (x, y);
                        }
                    };
                    events.push(Event::new(t as f64, x, y));
                }
                PreparedSource::BernoulliCells { probs, centers } => {
                    for (i, &p) in probs.iter().enumerate() {
                        if rng.random::<f64>() < p {
                            let (x, y) = centers[i];
                            events.push(Event::new(t as f64, x, y));
                        }
                    }
                }
            }
        }
    }
    Ok(EventSet::new(events))
}
