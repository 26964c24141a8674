//! A constructive witness: interval stages on `[0, 1)` whose integrals approach `∫ φ`.
//!
//! The carrier is cut into `M = max(16 H, 1024)` equal cells with exact
//! integrals `c_i`. With `T = H - 2` transitions inside the prefix:
//!
//! - the `T` cells with the smallest `|c_i|` are held back and born one per
//!   stage at `2, ..., H - 1`, largest first; every other cell is alive at stage 1;
//! - at each transition `k -> k + 1` exactly one cell alive at `k` dies, chosen
//!   greedily so that the running sum of dead integrals stays closest to 0.
//!
//! Each stage is the union of its live cells, so
//! `∫_{E_k} φ = I - dead_k - unborn_k` at every stage, and both correction
//! terms are sums of the smallest cell integrals available.
//!
//! Every cell lives over a contiguous run of stages, one cell leaves and one
//! arrives at each transition, and most cells stay alive throughout, so
//! conditions 1-3 hold by construction.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Integrand, LebesgueModel, MeasureError};
use crate::axioms::AxiomReport;
use crate::intervals::{IntervalSet, RealEvolution};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `I = ∫_{[0,1)} φ`.
    pub total: f64,
    pub tolerance: f64,
    pub horizon: u64,
    pub cells: usize,
    /// `∫_{E_k} φ` for `k < horizon`, by exact integration of the stage.
    pub integrals: Vec<f64>,
    /// Integral over cells dead by stage `k`.
    pub dead: Vec<f64>,
    /// Integral over cells not yet born at stage `k`.
    pub unborn: Vec<f64>,
    /// `max_k |∫_{E_k} φ + dead_k + unborn_k - I|`.
    pub telescoping_error: f64,
    /// Smallest `K` with `|∫_{E_k} φ - I| <= tolerance` for all `K <= k < horizon`.
    pub first_within: Option<u64>,
    /// `sup_{K <= k < horizon} |∫_{E_k} φ - I|`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sup_error_after: Option<f64>,
    pub sup_error: f64,
    pub axioms: AxiomReport<IntervalSet>,
}

#[derive(Clone, Debug)]
pub struct ConvergentConstruction {
    pub model: LebesgueModel,
    pub report: ConvergenceReport,
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

#[derive(Clone, Copy)]
struct Cell {
    birth: u64,
    death: u64,
}

fn cell_bounds(i: usize, m: usize) -> [f64; 2] {
    [i as f64 / m as f64, (i + 1) as f64 / m as f64]
}

/// Builds the schedule and measures it against `tolerance` up to `horizon`.
pub fn construct_convergent_evolution(
    phi: &Integrand,
    tolerance: f64,
    horizon: u64,
) -> Result<ConvergentConstruction, MeasureError> {
    if !(tolerance > 0.0) {
        return Err(MeasureError::BadParameter(alloc::format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    if horizon < 3 {
        return Err(MeasureError::BadParameter(alloc::format!(
            "horizon must be at least 3, got {horizon}"
        )));
    }
    let carrier = IntervalSet::interval(0.0, 1.0);
    let total = phi.integrate(&carrier)?;
    if !total.is_finite() {
        return Err(MeasureError::CatalogUnsupported(alloc::format!(
            "integral over the carrier is {total}"
        )));
    }

    let m = (16 * horizon as usize).max(1024);
    let values: Vec<f64> = (0..m)
        .map(|i| {
            let [lo, hi] = cell_bounds(i, m);
            phi.integrate_interval(lo, hi)
        })
        .collect::<Result<_, _>>()?;

    let transitions = (horizon - 2) as usize;
    let mut by_size: Vec<usize> = (0..m).collect();
    by_size.sort_by(|&a, &b| {
        libm::fabs(values[a])
            .total_cmp(&libm::fabs(values[b]))
            .then(a.cmp(&b))
    });
    let mut cells = alloc::vec![Cell { birth: 1, death: u64::MAX }; m];
    let mut births: Vec<Vec<usize>> = alloc::vec![Vec::new(); horizon as usize + 1];
    for (rank, &i) in by_size[..transitions].iter().enumerate() {
        // the largest held-back cell is born first
        let stage = (transitions - rank) as u64 + 1;
        cells[i].birth = stage;
        births[stage as usize].push(i);
    }

    let mut alive: BTreeSet<Key> = (0..m)
        .filter(|&i| cells[i].birth == 1)
        .map(|i| Key(values[i], i))
        .collect();
    let mut dead = 0.0;
    for k in 1..=transitions as u64 {
        let target = -dead;
        let below = alive.range(..Key(target, 0)).next_back().copied();
        let above = alive.range(Key(target, 0)..).next().copied();
        let pick = match (below, above) {
            (Some(b), Some(a)) => {
                let (db, da) = (libm::fabs(dead + b.0), libm::fabs(dead + a.0));
                let rank = |x: Key| (libm::fabs(x.0), x.1);
                match db.total_cmp(&da) {
                    Ordering::Less => b,
                    Ordering::Greater => a,
                    Ordering::Equal => {
                        let (rb, ra) = (rank(b), rank(a));
                        if rb.0.total_cmp(&ra.0).then(rb.1.cmp(&ra.1)) == Ordering::Greater {
                            a
                        } else {
                            b
                        }
                    }
                }
            }
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => unreachable!("most cells are alive at every stage"),
        };
        alive.remove(&pick);
        cells[pick.1].death = k + 1;
        dead += pick.0;
        for &i in &births[k as usize + 1] {
            alive.insert(Key(values[i], i));
        }
    }

    let schedule = cells.clone();
    let stages = RealEvolution::from_fn(carrier.clone(), move |k| {
        let mut parts: Vec<[f64; 2]> = Vec::new();
        for (i, c) in schedule.iter().enumerate() {
            if c.birth <= k && k < c.death {
                let [lo, hi] = cell_bounds(i, m);
                match parts.last_mut() {
                    Some(last) if last[1] == lo => last[1] = hi,
                    _ => parts.push([lo, hi]),
                }
            }
        }
        IntervalSet::from_parts(parts)
    });

    let mut integrals = Vec::new();
    let mut dead_trace = Vec::new();
    let mut unborn_trace = Vec::new();
    let mut telescoping_error = 0.0f64;
    let mut dying = alloc::vec![0.0; horizon as usize + 1];
    for (i, c) in cells.iter().enumerate() {
        if c.death <= horizon {
            dying[c.death as usize] += values[i];
        }
    }
    let (mut d, mut u) = (
        0.0,
        by_size[..transitions]
            .iter()
            .map(|&i| values[i])
            .sum::<f64>(),
    );
    for k in 1..horizon {
        let integral = phi.integrate(&stages.stage(k))?;
        d += dying[k as usize];
        u -= births[k as usize].iter().map(|&i| values[i]).sum::<f64>();
        telescoping_error = telescoping_error.max(libm::fabs(integral + d + u - total));
        integrals.push(integral);
        dead_trace.push(d);
        unborn_trace.push(u);
    }

    let errors: Vec<f64> = integrals.iter().map(|v| libm::fabs(v - total)).collect();
    let within = errors.iter().rev().take_while(|e| **e <= tolerance).count() as u64;
    let first_within = (within > 0).then(|| horizon - within);
    let sup_error_after = first_within.map(|k| {
        errors[(k - 1) as usize..]
            .iter()
            .fold(0.0f64, |a, b| a.max(*b))
    });
    let sup_error = errors.iter().fold(0.0f64, |a, b| a.max(*b));

    if first_within.is_none() && total != 0.0 {
        let single_sign = values.iter().all(|v| *v >= 0.0) || values.iter().all(|v| *v <= 0.0);
        if single_sign {
            return Err(MeasureError::SignObstruction { total });
        }
    }

    let axioms = stages.check_axioms(horizon);
    let report = ConvergenceReport {
        total,
        tolerance,
        horizon,
        cells: m,
        integrals,
        dead: dead_trace,
        unborn: unborn_trace,
        telescoping_error,
        first_within,
        sup_error_after,
        sup_error,
        axioms,
    };
    Ok(ConvergentConstruction {
        model: LebesgueModel::new(carrier, stages)?,
        report,
    })
}
