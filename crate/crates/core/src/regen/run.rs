use serde::{Deserialize, Serialize};

use super::{stage1, stage2, stage3, stage4, stage5, RunParameters, RunRecord, REPLACEMENT_TAG, RUN_TAG};
use crate::contact::Configuration;
use crate::dual::sample_nu;
use crate::error::{Error, Result};
use crate::harris::HarrisSystem;
use crate::rng::split_seed;
use crate::walker::{DynamicWalk, RateTable, WalkPath};

/// A run's record plus the state it hands to the next run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    /// True configuration at the end of the run.
    pub environment: Configuration,
    pub position: i64,
    pub path: WalkPath,
}

/// Runs the walk from `(x, env)` at time `t` on `h` through one run and
/// evaluates its stages. Auxiliary randomness comes from
/// `split_seed(aux_seed, RUN_TAG, index)`.
#[allow(clippy::too_many_arguments)]
pub fn execute_run(
    h: &HarrisSystem,
    t: f64,
    env: &Configuration,
    x: i64,
    tables: &RateTable,
    params: &RunParameters,
    aux_seed: u64,
    index: u64,
) -> Result<RunOutcome> {
    params.validate(tables.mprime())?;
    let (t0, t1) = (t + params.burn_in(), t + params.run_length);
    if t1 > h.horizon() {
        return Err(Error::HorizonExhausted { attempts: index as usize });
    }
    let seed = split_seed(aux_seed, RUN_TAG, index);
    let mut walk = DynamicWalk::new(h, &env.rewindowed(h.window()), x, tables, t, None)?;
    params.check_reach(h, x)?;
    let mut stages = [false; 5];
    let mut aborted_at: Option<u8> = None;

    let start_env = walk.environment();
    stages[0] = stage1(&start_env, x, params);
    if !stages[0] {
        aborted_at = Some(1);
    }
    walk.advance_to(t0)?;
    let burn_env = walk.environment();
    let burn_x = walk.position();
    if aborted_at.is_none() {
        stages[1] = stage2(h, t, params);
        if !stages[1] {
            aborted_at = Some(2);
        }
    }
    if aborted_at.is_none() {
        params.check_reach(h, burn_x)?;
        stages[2] = stage3(&burn_env, burn_x, params);
        if !stages[2] {
            aborted_at = Some(3);
        }
    }
    walk.advance_to(t1)?;
    let end_x = walk.position();
    let mut xi_prime = None;
    let (mut p_hat, mut uniform) = (None, None);
    if aborted_at.is_none() {
        params.check_reach(h, end_x)?;
        let (ok, xi) = stage4(h, t, end_x, params);
        stages[3] = ok;
        if ok {
            let s5 = stage5(h, t, end_x, &burn_env, &xi, params, seed)?;
            stages[4] = s5.passed;
            p_hat = Some(s5.p_hat);
            uniform = Some(s5.uniform);
            if s5.passed {
                xi_prime = Some(xi);
            } else {
                aborted_at = Some(5);
            }
        } else {
            aborted_at = Some(4);
        }
    }
    let success = aborted_at.is_none();
    if aborted_at == Some(1) {
        let replacement = sample_nu(&params.nu, h.lambda(), split_seed(seed, REPLACEMENT_TAG, 0))?;
        xi_prime = Some(replacement.config.shifted(end_x));
    }
    let environment = walk.environment();
    let disaster = xi_prime
        .as_ref()
        .is_some_and(|xi| !xi.agrees_on(&environment.clone().with_outside(false), params.nu.inner_window(end_x)));
    let complete = xi_prime.is_some();
    let record = RunRecord {
        index,
        seed,
        start: t,
        end: t1,
        start_position: x,
        end_position: end_x,
        stages,
        aborted_at,
        success,
        disaster,
        sigma: complete.then_some(t1),
        xi_prime,
        p_hat,
        uniform,
    };
    Ok(RunOutcome {
        record,
        environment,
        position: end_x,
        path: walk.into_path(),
    })
}

/// Result of [`find_sigma`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaSearch {
    pub sigma: f64,
    pub records: Vec<RunRecord>,
    pub position: i64,
    /// True configuration at `sigma`.
    pub environment: Configuration,
    /// Replacement configuration installed at `sigma`.
    pub xi_prime: Configuration,
    pub path: WalkPath,
}

/// Back-to-back runs on `h` from `t_start` until one completes.
pub fn find_sigma(
    h: &HarrisSystem,
    env: &Configuration,
    x0: i64,
    t_start: f64,
    tables: &RateTable,
    params: &RunParameters,
    aux_seed: u64,
) -> Result<SigmaSearch> {
    let mut env = env.clone();
    let mut x = x0;
    let mut path = WalkPath::new(x0, t_start);
    let mut records = Vec::new();
    for k in 0.. {
        let t = t_start + k as f64 * params.run_length;
        if t + params.run_length > h.horizon() {
            return Err(Error::HorizonExhausted { attempts: k });
        }
        let mut out = execute_run(h, t, &env, x, tables, params, aux_seed, k as u64)?;
        // Keep sigma on the exact grid t_start + k L.
        out.record.end = t_start + (k + 1) as f64 * params.run_length;
        if out.record.sigma.is_some() {
            out.record.sigma = Some(out.record.end);
        }
        path.jumps.extend_from_slice(&out.path.jumps);
        path.end_time = out.path.end_time;
        let done = out.record.sigma;
        let xi_prime = out.record.xi_prime.clone();
        records.push(out.record);
        env = out.environment;
        x = out.position;
        if let (Some(sigma), Some(xi_prime)) = (done, xi_prime) {
            return Ok(SigmaSearch {
                sigma,
                records,
                position: x,
                environment: env,
                xi_prime,
                path,
            });
        }
    }
    unreachable!("the loop returns or errors")
}
