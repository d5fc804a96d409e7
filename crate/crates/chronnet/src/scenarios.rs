//! Named generator scenarios with documented default parameters.
//!
//! Each scenario bundles a data source (probability-grid process or chaotic
//! trajectory), the grid used to build its chronnet, and a suggested prune
//! threshold. Defaults are overridable by name (`t`, `nx`, `alpha`, ...);
//! unknown keys are rejected so typos fail loudly.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datagen::{
    generate_events, Period, PeriodSource, ProbabilityGrid, SampleMode, ScenarioSpec,
};
use crate::error::{Error, Result};
use crate::events::EventSet;
use crate::grid::{BBox, GridSpec};
use crate::ode::{sample_trajectory, Axis, OdeSpec, OdeSystem};

/// Catalog entry: name, one-line description, and the default parameters.
#[derive(Debug, Clone)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub defaults: &'static [(&'static str, f64)],
}

const UNIFORM_DEFAULTS: &[(&str, f64)] = &[("nx", 13.0), ("ny", 13.0), ("t", 10_000.0)];
const POWERLAW_DEFAULTS: &[(&str, f64)] =
    &[("nx", 20.0), ("ny", 20.0), ("t", 300_000.0), ("alpha", 3.0)];
const EXPONENTIAL_DEFAULTS: &[(&str, f64)] = &[("nx", 10.0), ("ny", 10.0), ("t", 10_000.0)];
const TWO_CLUSTER_DEFAULTS: &[(&str, f64)] = &[
    ("nx", 10.0),
    ("ny", 10.0),
    ("t", 1_000_000.0),
    ("alternations", 40.0),
    ("sigma", 100.0),
    ("extent", 3000.0),
];
const FOUR_PERIOD_DEFAULTS: &[(&str, f64)] = &[
    ("nx", 10.0),
    ("ny", 10.0),
    ("t", 12_000.0),
    ("block", 3.0),
    ("outlier_mass", 0.002),
];
const THREE_REGION_DEFAULTS: &[(&str, f64)] = &[
    ("nx", 10.0),
    ("ny", 10.0),
    ("periods", 9.0),
    ("period_len", 1000.0),
    ("sigma", 1.5),
    ("extent", 30.0),
];
const LORENZ_DEFAULTS: &[(&str, f64)] = &[
    ("sigma", 10.0),
    ("beta", 8.0 / 3.0),
    ("rho", 28.0),
    ("t", 200.0),
    ("dt", 0.055),
    ("nx", 15.0),
    ("ny", 15.0),
    ("perturb", 0.5),
];
const ROSSLER_DEFAULTS: &[(&str, f64)] = &[
    ("a", 0.2),
    ("b", 0.2),
    ("c", 5.7),
    ("t", 1000.0),
    ("dt", 0.02),
    ("nx", 30.0),
    ("ny", 30.0),
    ("perturb", 0.5),
];

/// All built-in scenarios.
pub fn builtin_scenarios() -> Vec<ScenarioInfo> {
    vec![
        ScenarioInfo {
            name: "uniform",
            description: "single period, uniform cell probabilities",
            defaults: UNIFORM_DEFAULTS,
        },
        ScenarioInfo {
            name: "powerlaw",
            description: "single period, heavy-tailed cell probabilities (Pareto weights)",
            defaults: POWERLAW_DEFAULTS,
        },
        ScenarioInfo {
            name: "exponential",
            description: "single period, exponentially distributed cell probabilities",
            defaults: EXPONENTIAL_DEFAULTS,
        },
        ScenarioInfo {
            name: "two-cluster",
            description: "two Gaussian clusters alternating in time",
            defaults: TWO_CLUSTER_DEFAULTS,
        },
        ScenarioInfo {
            name: "four-period",
            description: "four block regions active in consecutive intervals, sparse outliers",
            defaults: FOUR_PERIOD_DEFAULTS,
        },
        ScenarioInfo {
            name: "three-region",
            description: "three Gaussian regions cycling in time",
            defaults: THREE_REGION_DEFAULTS,
        },
        ScenarioInfo {
            name: "lorenz",
            description: "Lorenz trajectory sampled on (x, y), seed-perturbed initial state",
            defaults: LORENZ_DEFAULTS,
        },
        ScenarioInfo {
            name: "rossler",
            description: "Rossler trajectory sampled on (x, z), seed-perturbed initial state",
            defaults: ROSSLER_DEFAULTS,
        },
    ]
}

/// Underlying data source of an instantiated scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Prob(ScenarioSpec),
    Ode(OdeSpec),
}

/// A fully instantiated scenario, ready to generate and analyze.
#[derive(Debug, Clone)]
pub struct ScenarioInstance {
    pub name: String,
    pub generator: Generator,
    /// Grid for chronnet construction; trajectory scenarios derive it from
    /// the generated data instead.
    grid: Option<GridSpec>,
    grid_shape: (u32, u32),
    /// Prune threshold the scenario is normally analyzed with.
    pub suggested_tau: u64,
}

impl ScenarioInstance {
    pub fn generate(&self) -> Result<EventSet> {
        match &self.generator {
            Generator::Prob(spec) => generate_events(spec),
            Generator::Ode(spec) => sample_trajectory(spec),
        }
    }

    /// Grid used to build this scenario's chronnet. Probability scenarios
    /// reuse their generator grid; trajectory scenarios bin the observed
    /// bounding box into the configured shape.
    pub fn analysis_grid(&self, es: &EventSet) -> Result<GridSpec> {
        match &self.grid {
            Some(g) => Ok(g.clone()),
            None => {
                let (xmin, xmax, ymin, ymax) = es
                    .bounding_box()
                    .ok_or_else(|| Error::EmptyInput("no events to derive a grid from".into()))?;
                GridSpec::rect(
                    BBox::new(xmin, xmax, ymin, ymax),
                    self.grid_shape.0,
                    self.grid_shape.1,
                )
            }
        }
    }

    /// Ground-truth period label per event, when the scenario has periods.
    pub fn truth(&self, es: &EventSet) -> Option<Vec<usize>> {
        match &self.generator {
            Generator::Prob(spec) if spec.periods.len() > 1 => Some(spec.truth_labels(es)),
            _ => None,
        }
    }

    /// Ground-truth regime boundaries (first tick of each later period).
    pub fn boundaries(&self) -> Option<Vec<u64>> {
        match &self.generator {
            Generator::Prob(spec) if spec.periods.len() > 1 => Some(spec.boundaries()),
            _ => None,
        }
    }
}

struct Params(BTreeMap<String, f64>);

impl Params {
    fn new(defaults: &[(&str, f64)], overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut map: BTreeMap<String, f64> =
            defaults.iter().map(|&(k, v)| (k.to_string(), v)).collect();
        for (k, v) in overrides {
            if !map.contains_key(k) {
                return Err(Error::InvalidParameter(format!(
                    "unknown scenario parameter `{k}` (known: {})",
                    map.keys().cloned().collect::<Vec<_>>().join(", ")
                )));
            }
            map.insert(k.clone(), *v);
        }
        Ok(Params(map))
    }

    fn get(&self, key: &str) -> f64 {
        self.0[key]
    }

    fn get_count(&self, key: &str) -> Result<u64> {
        let v = self.get(key);
        if v.fract() == 0.0 && v >= 1.0 && v <= u64::MAX as f64 {
            Ok(v as u64)
        } else {
            Err(Error::InvalidParameter(format!(
                "parameter `{key}` must be a positive integer, got {v}"
            )))
        }
    }

    fn get_u32(&self, key: &str) -> Result<u32> {
        let v = self.get_count(key)?;
        u32::try_from(v)
            .map_err(|_| Error::InvalidParameter(format!("parameter `{key}` too large")))
    }
}

/// Unit-cell rectangular grid of the given shape.
fn unit_grid(nx: u32, ny: u32) -> Result<GridSpec> {
    GridSpec::rect(BBox::new(0.0, f64::from(nx), 0.0, f64::from(ny)), nx, ny)
}

fn split_seed(seed: u64) -> (u64, u64) {
    let mut root = ChaCha8Rng::seed_from_u64(seed);
    (root.random(), root.random())
}

/// Instantiates a named scenario with a seed and parameter overrides.
pub fn build_scenario(
    name: &str,
    seed: u64,
    overrides: &BTreeMap<String, f64>,
) -> Result<ScenarioInstance> {
    match name {
        "uniform" => {
            let p = Params::new(UNIFORM_DEFAULTS, overrides)?;
            let (nx, ny) = (p.get_u32("nx")?, p.get_u32("ny")?);
            let grid = unit_grid(nx, ny)?;
            let spec = ScenarioSpec {
                grid: grid.clone(),
                periods: vec![Period {
                    source: PeriodSource::Cells {
                        grid: ProbabilityGrid::uniform(nx, ny)?,
                    },
                    duration: p.get_count("t")?,
                }],
                seed,
                mode: SampleMode::Categorical,
            };
            Ok(ScenarioInstance {
                name: name.into(),
                generator: Generator::Prob(spec),
                grid: Some(grid),
                grid_shape: (nx, ny),
                suggested_tau: 0,
            })
        }
        "powerlaw" | "exponential" => {
            let defaults = if name == "powerlaw" {
                POWERLAW_DEFAULTS
            } else {
                EXPONENTIAL_DEFAULTS
            };
            let p = Params::new(defaults, overrides)?;
            let (nx, ny) = (p.get_u32("nx")?, p.get_u32("ny")?);
            let grid = unit_grid(nx, ny)?;
            let (weight_seed, event_seed) = split_seed(seed);
            let mut wrng = ChaCha8Rng::seed_from_u64(weight_seed);
            let weights: Vec<f64> = (0..nx * ny)
                .map(|_| {
                    let u: f64 = wrng.random();
                    if name == "powerlaw" {
                        // Pareto-distributed weight with density exponent alpha.
                        (1.0 - u).powf(-1.0 / (p.get("alpha") - 1.0))
                    } else {
                        -(1.0 - u).ln()
                    }
                })
                .collect();
            let spec = ScenarioSpec {
                grid: grid.clone(),
                periods: vec![Period {
                    source: PeriodSource::Cells {
                        grid: ProbabilityGrid::new(nx, ny, weights)?,
                    },
                    duration: p.get_count("t")?,
                }],
                seed: event_seed,
                mode: SampleMode::Categorical,
            };
            Ok(ScenarioInstance {
                name: name.into(),
                generator: Generator::Prob(spec),
                grid: Some(grid),
                grid_shape: (nx, ny),
                suggested_tau: if name == "powerlaw" { 1 } else { 0 },
            })
        }
        "two-cluster" => {
            let p = Params::new(TWO_CLUSTER_DEFAULTS, overrides)?;
            let (nx, ny) = (p.get_u32("nx")?, p.get_u32("ny")?);
            let extent = p.get("extent");
            let grid = GridSpec::rect(BBox::new(0.0, extent, 0.0, extent), nx, ny)?;
            let alternations = p.get_count("alternations")?;
            let t = p.get_count("t")?;
            let sigma = p.get("sigma");
            let centers = [
                (extent * 0.25, extent * 0.25),
                (extent * 0.75, extent * 0.75),
            ];
            let base = t / alternations;
            let periods: Vec<Period> = (0..alternations)
                .map(|k| {
                    let (cx, cy) = centers[(k % 2) as usize];
                    // Spread remainder ticks over the first periods.
                    let duration = base + u64::from(k < t % alternations);
                    Period {
                        source: PeriodSource::Gaussian { cx, cy, sigma },
                        duration,
                    }
                })
                .collect();
            let spec = ScenarioSpec {
                grid: grid.clone(),
                periods,
                seed,
                mode: SampleMode::Categorical,
            };
            Ok(ScenarioInstance {
                name: name.into(),
                generator: Generator::Prob(spec),
                grid: Some(grid),
                grid_shape: (nx, ny),
                suggested_tau: 1,
            })
        }
        "four-period" => {
            let p = Params::new(FOUR_PERIOD_DEFAULTS, overrides)?;
            let (nx, ny) = (p.get_u32("nx")?, p.get_u32("ny")?);
            let grid = unit_grid(nx, ny)?;
            let t = p.get_count("t")?;
            let block = p.get_u32("block")?;
            if 2 * block > nx || 2 * block > ny {
                return Err(Error::InvalidParameter(
                    "blocks overlap; shrink `block`".into(),
                ));
            }
            let outlier_mass = p.get("outlier_mass");
            // Corner blocks, visited counter-clockwise.
            let corners = [
                (0, 0),
                (nx - block, 0),
                (nx - block, ny - block),
                (0, ny - block),
            ];
            // Staggered durations: the greedy negative-gain merges pair the
            // two smallest communities first, so with ascending durations
            // whose largest stays below the sum of the two smallest, the
            // two-community cut lands on {1,2} vs {3,4}.
            let quarters = [0.19, 0.24, 0.27, 0.30];
            let mut durations: Vec<u64> = quarters
                .iter()
                .map(|f| (f * t as f64).floor() as u64)
                .collect();
            let assigned: u64 = durations.iter().sum();
            durations[1] += t - assigned;
            let in_any_block = |i: u32, j: u32| {
                corners
                    .iter()
                    .any(|&(cx, cy)| i >= cx && i < cx + block && j >= cy && j < cy + block)
            };
            let n_bg = (nx * ny - 4 * block * block) as f64;
            let periods = corners
                .iter()
                .zip(durations)
                .map(|(&(cx, cy), duration)| {
                    let weights: Vec<f64> = (0..ny)
                        .flat_map(|j| (0..nx).map(move |i| (i, j)))
                        .map(|(i, j)| {
                            let active = i >= cx && i < cx + block && j >= cy && j < cy + block;
                            if active {
                                (1.0 - outlier_mass) / f64::from(block * block)
                            } else if in_any_block(i, j) {
                                0.0
                            } else {
                                outlier_mass / n_bg
                            }
                        })
                        .collect();
                    Ok(Period {
                        source: PeriodSource::Cells {
                            grid: ProbabilityGrid::new(nx, ny, weights)?,
                        },
                        duration,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let spec = ScenarioSpec {
                grid: grid.clone(),
                periods,
                seed,
                mode: SampleMode::Categorical,
            };
            Ok(ScenarioInstance {
                name: name.into(),
                generator: Generator::Prob(spec),
                grid: Some(grid),
                grid_shape: (nx, ny),
                suggested_tau: 0,
            })
        }
        "three-region" => {
            let p = Params::new(THREE_REGION_DEFAULTS, overrides)?;
            let (nx, ny) = (p.get_u32("nx")?, p.get_u32("ny")?);
            let extent = p.get("extent");
            let grid = GridSpec::rect(BBox::new(0.0, extent, 0.0, extent), nx, ny)?;
            let sigma = p.get("sigma");
            let centers = [
                (extent * 0.25, extent * 0.25),
                (extent * 0.75, extent * 0.25),
                (extent * 0.50, extent * 0.75),
            ];
            let period_len = p.get_count("period_len")?;
            let periods: Vec<Period> = (0..p.get_count("periods")?)
                .map(|k| {
                    let (cx, cy) = centers[(k % 3) as usize];
                    Period {
                        source: PeriodSource::Gaussian { cx, cy, sigma },
                        duration: period_len,
                    }
                })
                .collect();
            let spec = ScenarioSpec {
                grid: grid.clone(),
                periods,
                seed,
                mode: SampleMode::Categorical,
            };
            Ok(ScenarioInstance {
                name: name.into(),
                generator: Generator::Prob(spec),
                grid: Some(grid),
                grid_shape: (nx, ny),
                suggested_tau: 0,
            })
        }
        "lorenz" | "rossler" => {
            let defaults = if name == "lorenz" {
                LORENZ_DEFAULTS
            } else {
                ROSSLER_DEFAULTS
            };
            let p = Params::new(defaults, overrides)?;
            let dt = p.get("dt");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let perturb = p.get("perturb");
            let mut initial = [1.0, 1.0, 1.0];
            for v in &mut initial {
                *v += rng.random_range(-perturb..=perturb);
            }
            let (system, projection) = if name == "lorenz" {
                (
                    OdeSystem::Lorenz {
                        sigma: p.get("sigma"),
                        beta: p.get("beta"),
                        rho: p.get("rho"),
                    },
                    (Axis::X, Axis::Y),
                )
            } else {
                (
                    OdeSystem::Rossler {
                        a: p.get("a"),
                        b: p.get("b"),
                        c: p.get("c"),
                    },
                    (Axis::X, Axis::Z),
                )
            };
            let spec = OdeSpec {
                system,
                initial,
                total_time: p.get("t"),
                sample_dt: dt,
                step: dt / 10.0,
                projection,
            };
            Ok(ScenarioInstance {
                name: name.into(),
                generator: Generator::Ode(spec),
                grid: None,
                grid_shape: (p.get_u32("nx")?, p.get_u32("ny")?),
                suggested_tau: if name == "lorenz" { 15 } else { 0 },
            })
        }
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}
