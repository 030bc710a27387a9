//! Cartesian sweeps over named config parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{RunConfig, SweepSpec};
use super::optimize::{optimize_point, AxisValue, SweepRow};
use crate::error::{domain, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepResult {
    pub schema_version: u32,
    pub config: RunConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn diagnostic_failures(&self) -> usize {
        self.rows.iter().filter(|r| r.diagnostic_failure).count()
    }
}

/// Grid points with the first axis varying slowest.
pub fn grid_points(spec: &SweepSpec) -> Vec<Vec<AxisValue>> {
    let mut out: Vec<Vec<AxisValue>> = vec![Vec::new()];
    for axis in &spec.axes {
        let pts = axis.points();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                pts.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(AxisValue {
                        name: axis.name.clone(),
                        value: v,
                    });
                    p
                })
            })
            .collect();
    }
    out
}

/// Per-point seed, so thermal sampling does not depend on scheduling.
fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Evaluates every grid point (the reference grid if the config names
/// none). `jobs` sizes the worker pool; `None` uses all cores. Rows come
/// back in grid order whatever the pool size.
pub fn run_sweep(cfg: &RunConfig, jobs: Option<usize>) -> Result<SweepResult> {
    cfg.validate()?;
    let spec = cfg.sweep.clone().unwrap_or_else(SweepSpec::reference_grid);
    let points = grid_points(&spec);
    let eval = |(i, inputs): (usize, &Vec<AxisValue>)| -> SweepRow {
        let mut c = cfg.clone();
        for a in inputs {
            // names were validated, so this only fails on a bad value
            match c.with_param(&a.name, a.value) {
                Ok(next) => c = next,
                Err(e) => {
                    let mut row = optimize_point(cfg, inputs.clone(), 0);
                    row.error = Some(e.to_string());
                    return row;
                }
            }
        }
        if let Err(e) = c.validate() {
            let mut row = optimize_point(&c, inputs.clone(), 0);
            row.error = Some(e.to_string());
            return row;
        }
        optimize_point(&c, inputs.clone(), point_seed(cfg.seed, i))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| domain("worker pool", e.to_string()))?;
    let rows = pool.install(|| points.par_iter().enumerate().map(eval).collect());
    Ok(SweepResult {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::config::Axis;

    #[test]
    fn product_order_first_axis_slowest() {
        let spec = SweepSpec {
            axes: vec![
                Axis::list("z_ohm", vec![1.0, 2.0]),
                Axis::list("q", vec![10.0, 20.0, 30.0]),
            ],
        };
        let pts = grid_points(&spec);
        assert_eq!(pts.len(), 6);
        let flat: Vec<(f64, f64)> = pts.iter().map(|p| (p[0].value, p[1].value)).collect();
        assert_eq!(flat[0], (1.0, 10.0));
        assert_eq!(flat[1], (1.0, 20.0));
        assert_eq!(flat[3], (2.0, 10.0));
    }

    #[test]
    fn single_point_matches_optimize_point() {
        let cfg = RunConfig {
            sweep: Some(SweepSpec {
                axes: vec![Axis::list("q", vec![20_000.0])],
            }),
            ..RunConfig::default()
        };
        let res = run_sweep(&cfg, Some(1)).unwrap();
        assert_eq!(res.rows.len(), 1);
        let direct = optimize_point(&RunConfig::default(), res.rows[0].inputs.clone(), 0);
        assert_eq!(res.rows[0], direct);
    }

    #[test]
    fn pool_size_does_not_change_rows() {
        let cfg = RunConfig::default();
        let a = run_sweep(&cfg, Some(1)).unwrap();
        let b = run_sweep(&cfg, Some(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 32);
    }

    #[test]
    fn bad_point_does_not_stop_sweep() {
        let cfg = RunConfig {
            sweep: Some(SweepSpec {
                axes: vec![Axis::list("beta", vec![0.5, 1.0, 0.67])],
            }),
            ..RunConfig::default()
        };
        let res = run_sweep(&cfg, Some(2)).unwrap();
        assert_eq!(res.rows.len(), 3);
        assert!(res.rows[0].error.is_none());
        assert!(res.rows[1].error.is_some());
        assert!(res.rows[2].error.is_none());
    }
}
