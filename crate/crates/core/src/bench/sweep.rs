//! Resumable parallel sweeps and growth-shape fits.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envs::{EnvSpec, Instance};
use crate::error::{configuration, LabError, Result};
use crate::irl::{run, Algorithm, RunConfig, RunTranscript, StopReason};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopSpec {
    pub rounds: usize,
    pub eps_threshold: Option<f64>,
    pub gap_threshold: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub envs: Vec<EnvSpec>,
    /// One full run config per algorithm cell; `stop` overrides its stop
    /// fields.
    pub algorithms: Vec<RunConfig>,
    pub seeds: Vec<u64>,
    pub stop: StopSpec,
    /// Gap threshold for interactions-to-threshold.
    pub threshold: f64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.envs.is_empty() {
            return Err(configuration("sweep.envs: empty environment grid"));
        }
        if self.algorithms.is_empty() {
            return Err(configuration("sweep.algorithms: empty algorithm grid"));
        }
        if self.seeds.is_empty() {
            return Err(configuration("sweep.seeds: empty seed list"));
        }
        let distinct: HashSet<_> = self.seeds.iter().collect();
        if distinct.len() != self.seeds.len() {
            return Err(configuration("sweep.seeds: seeds must be distinct"));
        }
        for a in &self.algorithms {
            self.cell_config(a).validate()?;
        }
        Ok(())
    }

    fn cell_config(&self, base: &RunConfig) -> RunConfig {
        RunConfig {
            rounds: self.stop.rounds,
            eps_threshold: self.stop.eps_threshold,
            gap_threshold: self.stop.gap_threshold,
            ..base.clone()
        }
    }

    pub fn transcript_dir(&self) -> PathBuf {
        self.output_dir.join("transcripts")
    }
}

/// File name of one cell's transcript.
pub fn cell_file_name(algorithm: Algorithm, env: &EnvSpec, seed: u64) -> String {
    format!("{}__{}__s{seed}.json", algorithm.name(), env.label())
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellOutcome {
    pub env: EnvSpec,
    pub seed: u64,
    pub transcript: RunTranscript,
    /// Interactions when the gap threshold was first met.
    pub interactions_to_threshold: Option<u64>,
    /// Whether the transcript was read back from an earlier sweep.
    pub reused: bool,
}

impl CellOutcome {
    pub fn algorithm(&self) -> Algorithm {
        self.transcript.algorithm
    }

    /// Threshold never met, or the interaction budget ran out.
    pub fn censored(&self) -> bool {
        self.interactions_to_threshold.is_none() || self.transcript.stop_reason == StopReason::Budget
    }
}

/// Interactions until the gap threshold: the first qualifying iterate for
/// stationary algorithms, the whole run for sequence outputs.
pub fn interactions_to_threshold(t: &RunTranscript, threshold: f64) -> Option<u64> {
    if t.output.is_some() {
        (t.returned().gap <= threshold).then_some(t.total_interactions)
    } else {
        t.interactions_to_gap(threshold)
    }
}

fn run_cell(
    spec: &SweepSpec,
    inst: &Instance,
    cfg: &RunConfig,
    seed: u64,
) -> Result<CellOutcome> {
    let path = spec
        .transcript_dir()
        .join(cell_file_name(cfg.algorithm, &inst.spec, seed));
    let (transcript, reused) = match std::fs::read_to_string(&path) {
        Ok(text) => match RunTranscript::from_json(&text) {
            Ok(t) if t.config == *cfg && t.seed == seed && t.env == inst.spec => (t, true),
            _ => (run(inst, cfg, seed)?, false),
        },
        Err(_) => (run(inst, cfg, seed)?, false),
    };
    if !reused {
        write_atomic(&path, transcript.to_json()?.as_bytes())?;
    }
    Ok(CellOutcome {
        env: inst.spec.clone(),
        seed,
        interactions_to_threshold: interactions_to_threshold(&transcript, spec.threshold),
        transcript,
        reused,
    })
}

/// Runs every `(env, algorithm, seed)` cell on a bounded worker pool.
/// Cells whose transcript already exists with the same config are read
/// back instead of rerun.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CellOutcome>> {
    spec.validate()?;
    let instances = spec
        .envs
        .iter()
        .map(EnvSpec::build)
        .collect::<Result<Vec<_>>>()?;
    let mut cells = Vec::new();
    for inst in &instances {
        for base in &spec.algorithms {
            for &seed in &spec.seeds {
                cells.push((inst, spec.cell_config(base), seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| configuration(format!("sweep.workers: {e}")))?;
    let outcomes: Vec<Result<CellOutcome>> = pool.install(|| {
        cells
            .par_iter()
            .map(|(inst, cfg, seed)| run_cell(spec, inst, cfg, *seed))
            .collect()
    });
    outcomes.into_iter().collect()
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Median interactions-to-threshold per `(algorithm, horizon)`, skipping
/// censored cells with a warning.
pub fn median_interactions(outcomes: &[CellOutcome]) -> BTreeMap<(Algorithm, usize), f64> {
    let mut groups: BTreeMap<(Algorithm, usize), Vec<f64>> = BTreeMap::new();
    for o in outcomes {
        let key = (o.algorithm(), o.env.horizon());
        match o.interactions_to_threshold {
            Some(y) if !o.censored() => groups.entry(key).or_default().push(y as f64),
            _ => {
                log::warn!(
                    "censored cell excluded: {} on {} seed {}",
                    o.algorithm().name(),
                    o.env.label(),
                    o.seed
                );
                groups.entry(key).or_default();
            }
        }
    }
    groups
        .into_iter()
        .filter_map(|(k, mut v)| median(&mut v).map(|m| (k, m)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GrowthModel {
    /// `y ~ c b^x`.
    Exponential { base: f64 },
    /// `y ~ c x^d`.
    Polynomial { degree: f64 },
}

/// Least-squares fits of `ln y` against `x` (exponential) and `ln x`
/// (polynomial); the better one is `model`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub model: GrowthModel,
    /// R^2 of the chosen model in log space.
    pub fit_quality: f64,
    pub exponential_r2: f64,
    pub polynomial_r2: f64,
    pub base: f64,
    pub degree: f64,
}

/// Slope and R^2 of the least-squares line through `(u, v)`.
fn line_fit(u: &[f64], v: &[f64]) -> (f64, f64) {
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let mv = v.iter().sum::<f64>() / n;
    let suv: f64 = u.iter().zip(v).map(|(a, b)| (a - mu) * (b - mv)).sum();
    let suu: f64 = u.iter().map(|a| (a - mu) * (a - mu)).sum();
    let svv: f64 = v.iter().map(|b| (b - mv) * (b - mv)).sum();
    let slope = suv / suu;
    let r2 = if svv == 0.0 { 1.0 } else { suv * suv / (suu * svv) };
    (slope, r2)
}

impl GrowthFit {
    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() || x.len() < 2 {
            return Err(configuration("growth fit needs at least two points"));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) || x[0] <= 0.0 {
            return Err(configuration("growth fit: x must be positive and strictly increasing"));
        }
        if y.iter().any(|v| !(*v > 0.0)) {
            return Err(configuration("growth fit: y must be positive"));
        }
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let (b, exponential_r2) = line_fit(x, &ly);
        let (degree, polynomial_r2) = line_fit(&lx, &ly);
        let base = b.exp();
        let (model, fit_quality) = if exponential_r2 >= polynomial_r2 {
            (GrowthModel::Exponential { base }, exponential_r2)
        } else {
            (GrowthModel::Polynomial { degree }, polynomial_r2)
        };
        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            model,
            fit_quality,
            exponential_r2,
            polynomial_r2,
            base,
            degree,
        })
    }

    /// `y(x_{k+1}) / y(x_k)`.
    pub fn successive_ratios(&self) -> Vec<f64> {
        self.y.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Slope of `ln y` against `ln x`.
    pub fn loglog_slope(&self) -> f64 {
        self.degree
    }
}

/// Growth fit per algorithm over the horizons of the sweep.
pub fn growth_fits(outcomes: &[CellOutcome]) -> Result<BTreeMap<Algorithm, GrowthFit>> {
    let medians = median_interactions(outcomes);
    let mut per_algo: BTreeMap<Algorithm, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for ((a, t), y) in medians {
        let e = per_algo.entry(a).or_default();
        e.0.push(t as f64);
        e.1.push(y);
    }
    let mut out = BTreeMap::new();
    for (a, (x, y)) in per_algo {
        match GrowthFit::fit(&x, &y) {
            Ok(fit) => {
                out.insert(a, fit);
            }
            Err(LabError::Configuration(msg)) => log::warn!("{}: no growth fit ({msg})", a.name()),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

impl PartialOrd for Algorithm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Algorithm {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let idx = |a: &Algorithm| Algorithm::ALL.iter().position(|b| b == a);
        idx(self).cmp(&idx(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_data_prefers_exponential() {
        let x = [2.0, 3.0, 4.0, 5.0, 6.0];
        let y: Vec<f64> = x.iter().map(|t: &f64| 3.0 * 2f64.powf(*t)).collect();
        let fit = GrowthFit::fit(&x, &y).unwrap();
        assert!(matches!(fit.model, GrowthModel::Exponential { base } if (base - 2.0).abs() < 1e-9));
        assert!(fit.successive_ratios().iter().all(|r| (r - 2.0).abs() < 1e-9));
    }

    #[test]
    fn polynomial_data_prefers_polynomial() {
        let x = [2.0, 3.0, 4.0, 5.0, 6.0];
        let y: Vec<f64> = x.iter().map(|t: &f64| 5.0 * t.powi(3)).collect();
        let fit = GrowthFit::fit(&x, &y).unwrap();
        assert!(matches!(fit.model, GrowthModel::Polynomial { .. }));
        assert!((fit.loglog_slope() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn bad_inputs_rejected() {
        assert!(GrowthFit::fit(&[1.0], &[1.0]).is_err());
        assert!(GrowthFit::fit(&[2.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(GrowthFit::fit(&[1.0, 2.0], &[0.0, 2.0]).is_err());
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    fn spec(dir: &Path) -> SweepSpec {
        SweepSpec {
            envs: vec![EnvSpec::ForkedTree, EnvSpec::Cliff { horizon: 3 }],
            algorithms: vec![
                RunConfig::for_algorithm(Algorithm::NrmmBr),
                RunConfig::for_algorithm(Algorithm::Mmdp),
            ],
            seeds: vec![0, 1],
            stop: StopSpec {
                rounds: 5,
                eps_threshold: None,
                gap_threshold: None,
            },
            threshold: 0.5,
            output_dir: dir.to_path_buf(),
            workers: 2,
        }
    }

    #[test]
    fn sweeps_resume_byte_identically() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(dir.path());
        let first = run_sweep(&s).unwrap();
        assert_eq!(first.len(), 8);
        assert!(first.iter().all(|o| !o.reused));
        let name = cell_file_name(Algorithm::NrmmBr, &EnvSpec::ForkedTree, 0);
        let path = s.transcript_dir().join(name);
        let before = std::fs::read(&path).unwrap();
        let second = run_sweep(&s).unwrap();
        assert!(second.iter().all(|o| o.reused));
        assert_eq!(std::fs::read(&path).unwrap(), before);
    }

    #[test]
    fn duplicate_seeds_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = spec(dir.path());
        s.seeds = vec![1, 1];
        assert!(s.validate().is_err());
    }
}
