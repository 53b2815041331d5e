//! The four condition sweeps: unit count and grid impedance, each from a
//! part-load and a full-load starting point.

use crate::error::Result;
use crate::stability::Pole;
use crate::system::System;
use crate::tuner::{tune_ksso, TuneReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    UnitsCommon,
    GridCommon,
    UnitsExtreme,
    GridExtreme,
}

impl Sweep {
    pub const ALL: [Sweep; 4] = [Sweep::UnitsCommon, Sweep::GridCommon, Sweep::UnitsExtreme, Sweep::GridExtreme];

    pub fn as_str(self) -> &'static str {
        match self {
            Sweep::UnitsCommon => "units_common",
            Sweep::GridCommon => "grid_common",
            Sweep::UnitsExtreme => "units_extreme",
            Sweep::GridExtreme => "grid_extreme",
        }
    }
}

/// Reference values of one row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub dp_before: Pole,
    pub dp_after: Pole,
    pub k_sso: f64,
    pub dp_retuned: Pole,
}

/// A condition change and what it should produce.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub sweep: Sweep,
    pub label: String,
    pub before: System,
    pub after: System,
    pub expected: Expected,
}

/// Computed counterpart of [`Expected`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub sweep: Sweep,
    pub label: String,
    pub dp_before: Pole,
    pub dp_after: Pole,
    pub k_sso: f64,
    pub dp_retuned: Pole,
    pub tune: TuneReport,
    pub expected: Expected,
}

fn p(sigma: f64, omega: f64) -> Pole {
    Pole::new(sigma, omega)
}

fn e(b: Pole, a: Pole, k: f64, r: Pole) -> Expected {
    Expected { dp_before: b, dp_after: a, k_sso: k, dp_retuned: r }
}

/// The twelve reference cases built on `base` (plant, grid and controller
/// settings are taken from it; unit count, load and grid scale are set per row).
pub fn cases(base: &System) -> Vec<Case> {
    let part = base.clone();
    let full = base.with_i1(base.plant.imax);
    let mut out = Vec::with_capacity(12);
    let nominal = p(-4.87, 461.1);

    let units = [
        (4, e(nominal, p(-14.38, 456.02), 0.0, p(-4.87, 461.1))),
        (8, e(nominal, p(4.99, 468.44), 0.042, p(-22.67, 481.49))),
        (9, e(nominal, p(12.03, 470.72), 0.078, p(-36.15, 541.19))),
    ];
    for (n, ex) in units {
        let before = part.with_n(6);
        out.push(Case { sweep: Sweep::UnitsCommon, label: format!("6->{n}"), after: before.with_n(n), before, expected: ex });
    }

    let grid = [
        (1.3, e(nominal, p(3.45, 468.36), 0.036, p(-20.39, 478.71))),
        (1.35, e(nominal, p(5.39, 469.28), 0.042, p(-22.88, 483.15))),
        (1.4, e(nominal, p(7.42, 470.14), 0.048, p(-26.47, 489.22))),
    ];
    for (k, ex) in grid {
        let before = part.with_n(6);
        out.push(Case {
            sweep: Sweep::GridCommon,
            label: format!("ZL->{k}ZL"),
            after: before.with_grid_scale(k),
            before,
            expected: ex,
        });
    }

    let single = p(-20.56, 448.62);
    let extreme_units = [
        (7, e(single, p(8.38, 468.01), 0.024, p(-5.10, 474.09))),
        (8, e(single, p(16.53, 470.54), 0.042, p(-4.98, 486.63))),
        (9, e(single, p(25.409, 471.92), 0.078, p(-5.28, 527.96))),
    ];
    for (n, ex) in extreme_units {
        let before = full.with_n(1);
        out.push(Case { sweep: Sweep::UnitsExtreme, label: format!("1->{n}"), after: before.with_n(n), before, expected: ex });
    }

    let strong = p(-18.8, 450.1);
    let extreme_grid = [
        (1.3, e(strong, p(14.61, 470.73), 0.036, p(-4.89, 484.17))),
        (1.35, e(strong, p(17.17, 471.48), 0.042, p(-5.26, 489.56))),
        (1.4, e(strong, p(19.79, 472.12), 0.048, p(-5.28, 496.16))),
    ];
    for (k, ex) in extreme_grid {
        let before = full.with_n(6).with_grid_scale(0.3);
        let after = full.with_n(6).with_grid_scale(k);
        out.push(Case { sweep: Sweep::GridExtreme, label: format!("0.3ZL->{k}ZL"), before, after, expected: ex });
    }
    out
}

/// Dominant poles before and after the change, the gain tuned for the new
/// condition, and the dominant pole of the new condition with that gain.
pub fn reproduce(case: &Case) -> Result<Row> {
    let dp_before = case.before.dominant()?;
    let dp_after = case.after.dominant()?;
    let tune = tune_ksso(&case.after)?;
    let dp_retuned = case.after.with_ksso(tune.k_sso).dominant()?;
    Ok(Row {
        sweep: case.sweep,
        label: case.label.clone(),
        dp_before,
        dp_after,
        k_sso: tune.k_sso,
        dp_retuned,
        tune,
        expected: case.expected,
    })
}

/// All rows, evaluated in parallel; order follows [`cases`].
pub fn reproduce_all(base: &System) -> Result<Vec<Row>> {
    cases(base).par_iter().map(reproduce).collect()
}
