//! Built-in environments and their stable string identifiers.
//!
//! Identifiers look like function calls: `grid2d_L(3)`, `interval41(5)`,
//! `interval41_drift(3,0.3)`, `grid2d_two_regions(1,2)`,
//! `grid2d_moved_region(band,3)`.

use crate::env::{Absorption, Cell, DriftOrder, Goal, GridSpec};
use crate::error::{Error, Result};

pub const GRID_SIZE: usize = 10;
pub const INTERVAL_LEN: usize = 41;
/// First cell of the drift zone in `interval41_drift`.
pub const DRIFT_ZONE_START: usize = 32;

/// The L-shaped wall: corner at (8,8), arms down to (8,3) and left to (3,8).
/// The gaps below and left of the arms are the two ways to the goal; the
/// lower one runs through the heated quadrant.
pub fn l_obstacle() -> Vec<Cell> {
    let mut cells: Vec<Cell> = (3..=8).map(|y| Cell::new(8, y)).collect();
    cells.extend((3..8).map(|x| Cell::new(x, 8)));
    cells
}

fn grid2d(heated: &[(std::ops::RangeInclusive<i32>, std::ops::RangeInclusive<i32>, u32)]) -> GridSpec {
    let n = GRID_SIZE * GRID_SIZE;
    let mut temperature = vec![0u32; n];
    for (xs, ys, t) in heated {
        for y in ys.clone() {
            for x in xs.clone() {
                temperature[y as usize * GRID_SIZE + x as usize] = *t;
            }
        }
    }
    let obstacles = l_obstacle();
    for o in &obstacles {
        temperature[o.y as usize * GRID_SIZE + o.x as usize] = 0;
    }
    GridSpec {
        dims: 2,
        extent: vec![GRID_SIZE, GRID_SIZE],
        obstacles,
        temperature,
        drift: vec![0.0; n],
        start: Cell::new(0, 0),
        goal: Goal::Cell(Cell::new(GRID_SIZE as i32 - 1, GRID_SIZE as i32 - 1)),
        r_tick: -1,
        r_target: 100,
        absorption: Absorption::FirstCrossing,
        drift_order: DriftOrder::AfterAction,
    }
}

/// 10x10 world, heated lower-right quadrant at temperature `t`.
pub fn grid2d_l(t: u32) -> GridSpec {
    grid2d(&[(5..=9, 0..=4, t)])
}

/// Lower-right quadrant at `t_lower`, its mirror image (upper-left) at `t_upper`.
/// Each route class then crosses exactly one heated region.
pub fn grid2d_two_regions(t_lower: u32, t_upper: u32) -> GridSpec {
    grid2d(&[(5..=9, 0..=4, t_lower), (0..=4, 5..=9, t_upper)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionPlacement {
    /// Upper-left quadrant, on the other route.
    Mirrored,
    /// 3x3 block in front of the lower gap.
    Corner,
    /// Horizontal band every heated-route path must cross.
    Band,
}

impl RegionPlacement {
    pub const ALL: [RegionPlacement; 3] = [RegionPlacement::Mirrored, RegionPlacement::Corner, RegionPlacement::Band];

    pub fn name(self) -> &'static str {
        match self {
            RegionPlacement::Mirrored => "mirrored",
            RegionPlacement::Corner => "corner",
            RegionPlacement::Band => "band",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

pub fn grid2d_moved_region(placement: RegionPlacement, t: u32) -> GridSpec {
    match placement {
        RegionPlacement::Mirrored => grid2d(&[(0..=4, 5..=9, t)]),
        RegionPlacement::Corner => grid2d(&[(5..=7, 0..=2, t)]),
        RegionPlacement::Band => grid2d(&[(6..=9, 2..=3, t)]),
    }
}

/// Interval of `len` cells, start at the center, cells right of the center at
/// temperature `t`, drift `p` on cells `drift_from..len`.
pub fn interval(len: usize, t: u32, p: f64, drift_from: usize) -> GridSpec {
    let center = len / 2;
    let temperature = (0..len).map(|i| if i > center { t } else { 0 }).collect();
    let drift = (0..len).map(|i| if i >= drift_from { p } else { 0.0 }).collect();
    GridSpec {
        dims: 1,
        extent: vec![len],
        obstacles: vec![],
        temperature,
        drift,
        start: Cell::at(center as i32),
        goal: Goal::IntervalEnds,
        r_tick: -1,
        r_target: 0,
        absorption: Absorption::FirstCrossing,
        drift_order: DriftOrder::AfterAction,
    }
}

/// 41-cell interval; `p > 0` adds drift in the outer right zone.
pub fn interval41(t: u32, p: f64) -> GridSpec {
    interval(INTERVAL_LEN, t, p, DRIFT_ZONE_START)
}

pub fn interval41_drift(t: u32, p: f64) -> GridSpec {
    interval41(t, p)
}

/// Interval of `2 * zeta + 1` cells at uniform temperature `w`, final-position
/// absorption: the setting of the survival-probability bounds.
pub fn uniform_interval(zeta: usize, w: u32) -> GridSpec {
    let len = 2 * zeta + 1;
    let mut spec = interval(len, w, 0.0, len);
    spec.temperature = vec![w; len];
    spec.absorption = Absorption::FinalPosition;
    spec
}

/// Names accepted by [`lookup`], with placeholder arguments.
pub fn catalog_names() -> Vec<&'static str> {
    vec![
        "grid2d_L(T)",
        "grid2d_two_regions(T1,T2)",
        "grid2d_moved_region(mirrored|corner|band,T)",
        "interval41(T)",
        "interval41_drift(T,p)",
        "uniform_interval(zeta,w)",
    ]
}

/// Resolves a catalog identifier to a spec.
pub fn lookup(name: &str) -> Result<GridSpec> {
    let unknown = || Error::UnknownCatalogEntry(name.to_string());
    let name = name.trim();
    let (head, args) = match name.find('(') {
        Some(i) if name.ends_with(')') => {
            let inner = &name[i + 1..name.len() - 1];
            let args: Vec<&str> = inner.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
            (&name[..i], args)
        }
        Some(_) => return Err(unknown()),
        None => (name, vec![]),
    };
    let uint = |i: usize| -> Result<u32> { args.get(i).and_then(|a| a.parse().ok()).ok_or_else(unknown) };
    let float = |i: usize| -> Result<f64> { args.get(i).and_then(|a| a.parse().ok()).ok_or_else(unknown) };
    let arity = |n: usize| if args.len() == n { Ok(()) } else { Err(unknown()) };
    match head {
        "grid2d_L" => {
            arity(1)?;
            Ok(grid2d_l(uint(0)?))
        }
        "grid2d_two_regions" => {
            arity(2)?;
            Ok(grid2d_two_regions(uint(0)?, uint(1)?))
        }
        "grid2d_moved_region" => {
            arity(2)?;
            let placement = RegionPlacement::parse(args[0]).ok_or_else(unknown)?;
            Ok(grid2d_moved_region(placement, uint(1)?))
        }
        "interval41" => {
            arity(1)?;
            Ok(interval41(uint(0)?, 0.0))
        }
        "interval41_drift" => {
            arity(2)?;
            let p = float(1)?;
            if !(0.0..=1.0).contains(&p) {
                return Err(unknown());
            }
            Ok(interval41_drift(uint(0)?, p))
        }
        "uniform_interval" => {
            arity(2)?;
            let zeta = uint(0)? as usize;
            if zeta == 0 {
                return Err(unknown());
            }
            Ok(uniform_interval(zeta, uint(1)?))
        }
        _ => Err(unknown()),
    }
}
