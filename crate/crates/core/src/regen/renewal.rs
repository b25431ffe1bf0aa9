use serde::{Deserialize, Serialize};

use super::{execute_run, RunParameters, RunRecord};
use crate::contact::Configuration;
use crate::dual::{log4, sample_nu};
use crate::error::{Error, Result};
use crate::harris::{sample_harris, LatticeWindow};
use crate::rng::split_seed;
use crate::walker::{DynamicWalk, RateTable};

const START_TAG: u64 = 0x7374;
const SEGMENT_TAG: u64 = 0x736567;
const PIECE_TAG: u64 = 0x7063;
const AUX_TAG: u64 = 0x617578;
const SUBSTITUTE_TAG: u64 = 0x737562;

/// Parameters of the renewal construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalParameters {
    pub run: RunParameters,
    pub lambda: f64,
    /// Time walked before the regeneration search starts; `2^n` by default.
    pub segment_base: f64,
    /// Good-index bound on the segment length.
    pub length_bound: f64,
    /// Good-index bound on the walker clock count over a segment.
    pub clock_bound: f64,
    /// Runs allowed per segment before giving up.
    pub max_runs: usize,
    /// Fresh segments tried when replacing a bad index.
    pub substitute_budget: usize,
}

impl RenewalParameters {
    /// Literal defaults: base `2^n`, length bound `2^n + n^8 e^{M' ln(n)^4}`,
    /// clock bound `2 n^2 2^n`.
    pub fn new(run: RunParameters, lambda: f64, mprime: f64) -> Self {
        let n = run.n as f64;
        let base = 2f64.powi(run.n as i32);
        Self {
            lambda,
            segment_base: base,
            length_bound: base + n.powi(8) * (mprime * log4(run.n)).exp(),
            clock_bound: 2.0 * n * n * base,
            max_runs: 10_000,
            substitute_budget: 1_000,
            run,
        }
    }
}

/// One segment: walk for `segment_base`, then runs until one completes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentOutcome {
    pub length: f64,
    /// Walker displacement over the segment.
    pub z: i64,
    pub clock_count: usize,
    pub runs: usize,
    pub disaster: bool,
    pub good: bool,
    /// Replacement environment, relative to the walker.
    pub next_environment: Configuration,
    pub records: Vec<RunRecord>,
}

/// Runs one segment from `start_env`, given relative to the walker. Each
/// piece uses its own Harris system centred on the walker, seeded from
/// `split_seed(seed, PIECE_TAG, k)`.
pub fn run_segment(
    start_env: &Configuration,
    params: &RenewalParameters,
    tables: &RateTable,
    seed: u64,
) -> Result<SegmentOutcome> {
    let run = &params.run;
    let (lambda, mprime) = (params.lambda, tables.mprime());
    let base = params.segment_base;
    let mut clock_count = 0;
    let mut env = start_env.clone();
    let mut x = 0;
    if base > 0.0 {
        let window = LatticeWindow::centered(0, run.harris_radius(lambda, mprime, base));
        let h = sample_harris(window, base, lambda, mprime, split_seed(seed, PIECE_TAG, 0))?;
        let mut walk = DynamicWalk::new(&h, &env.rewindowed(window), 0, tables, 0.0, None)?;
        walk.advance_to(base)?;
        clock_count += h.clock_count(0.0, base);
        env = walk.environment();
        x = walk.position();
    }
    let radius = run.harris_radius(lambda, mprime, run.run_length);
    let mut records = Vec::new();
    for k in 0..params.max_runs {
        let window = LatticeWindow::centered(x, radius);
        let h = sample_harris(window, run.run_length, lambda, mprime, split_seed(seed, PIECE_TAG, k as u64 + 1))?;
        let out = execute_run(&h, 0.0, &env, x, tables, run, split_seed(seed, AUX_TAG, 0), k as u64)?;
        clock_count += h.clock_count(0.0, run.run_length);
        env = out.environment;
        x = out.position;
        let record = out.record;
        if let Some(xi) = &record.xi_prime {
            let length = base + (k + 1) as f64 * run.run_length;
            let good = length <= params.length_bound && (clock_count as f64) < params.clock_bound;
            let next_environment = xi.shifted(-x);
            let disaster = record.disaster;
            records.push(record);
            return Ok(SegmentOutcome {
                length,
                z: x,
                clock_count,
                runs: k + 1,
                disaster,
                good,
                next_environment,
                records,
            });
        }
        records.push(record);
    }
    Err(Error::HorizonExhausted { attempts: params.max_runs })
}

/// One renewal index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalStep {
    pub index: usize,
    /// Start time of the segment.
    pub beta: f64,
    pub length: f64,
    pub z: i64,
    pub good: bool,
    pub clock_count: usize,
    pub runs: usize,
    pub disaster: bool,
    /// Increment from an independent good segment, drawn when `good` is false.
    pub substitute: Option<i64>,
    pub substitute_attempts: usize,
}

impl RenewalStep {
    /// `z` for good indices, otherwise the substitute.
    pub fn increment(&self) -> Option<i64> {
        if self.good {
            Some(self.z)
        } else {
            self.substitute
        }
    }
}

fn nu_start(params: &RenewalParameters, seed: u64) -> Result<Configuration> {
    Ok(sample_nu(&params.run.nu, params.lambda, split_seed(seed, START_TAG, 0))?.config)
}

/// `count` consecutive segments started from a `nu` sample. Each segment
/// installs the previous one's replacement configuration around the walker.
/// Bad indices get an increment from fresh `nu`-started segments that are
/// good, while the chain itself carries on from the bad segment.
pub fn build_renewal_sequence(
    master: u64,
    count: usize,
    params: &RenewalParameters,
    tables: &RateTable,
) -> Result<Vec<RenewalStep>> {
    if count == 0 {
        return Err(Error::InvalidArgument("renewal sequence needs count >= 1".into()));
    }
    params.run.validate(tables.mprime())?;
    let mut env = nu_start(params, master)?;
    let mut beta = 0.0;
    let mut steps = Vec::with_capacity(count);
    for i in 0..count {
        let seg = run_segment(&env, params, tables, split_seed(master, SEGMENT_TAG, i as u64))?;
        let mut step = RenewalStep {
            index: i,
            beta,
            length: seg.length,
            z: seg.z,
            good: seg.good,
            clock_count: seg.clock_count,
            runs: seg.runs,
            disaster: seg.disaster,
            substitute: None,
            substitute_attempts: 0,
        };
        if !seg.good {
            let sub_seed = split_seed(master, SUBSTITUTE_TAG, i as u64);
            for j in 0..params.substitute_budget {
                let s = split_seed(sub_seed, 0, j as u64);
                let fresh = run_segment(&nu_start(params, s)?, params, tables, split_seed(s, SEGMENT_TAG, 0))?;
                step.substitute_attempts = j + 1;
                if fresh.good {
                    step.substitute = Some(fresh.z);
                    break;
                }
            }
        }
        beta += seg.length;
        env = seg.next_environment;
        steps.push(step);
    }
    Ok(steps)
}
