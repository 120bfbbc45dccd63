//! Service area, wall layout and regular AP grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular single-floor service area with equally spaced walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceArea {
    /// x extent in meters.
    pub lx: f64,
    /// y extent in meters.
    pub ly: f64,
    /// Number of vertical walls (lines of constant x).
    pub wx: usize,
    /// Number of horizontal walls (lines of constant y).
    pub wy: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

/// Wall coordinates, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Walls {
    pub vertical: Vec<f64>,
    pub horizontal: Vec<f64>,
}

impl ServiceArea {
    pub fn new(lx: f64, ly: f64, wx: usize, wy: usize) -> Result<Self> {
        let area = ServiceArea { lx, ly, wx, wy };
        area.validate()?;
        Ok(area)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lx.is_finite() && self.lx > 0.0) || !(self.ly.is_finite() && self.ly > 0.0) {
            return Err(Error::invalid(format!(
                "service area must have positive extents, got {} x {}",
                self.lx, self.ly
            )));
        }
        Ok(())
    }

    /// Area in km^2.
    pub fn area_km2(&self) -> f64 {
        self.lx * self.ly * 1e-6
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0.0..=self.lx).contains(&p.x) && (0.0..=self.ly).contains(&p.y)
    }

    /// Number of rooms the walls partition the area into.
    pub fn rooms(&self) -> usize {
        (self.wx + 1) * (self.wy + 1)
    }

    pub fn walls(&self) -> Walls {
        let (vertical, horizontal) = wall_positions(self);
        Walls { vertical, horizontal }
    }
}

/// Vertical wall x-coordinates `lx*a/(wx+1)` and horizontal wall
/// y-coordinates `ly*b/(wy+1)`. Every wall spans the full area.
pub fn wall_positions(area: &ServiceArea) -> (Vec<f64>, Vec<f64>) {
    let xs = (1..=area.wx)
        .map(|a| area.lx * a as f64 / (area.wx + 1) as f64)
        .collect();
    let ys = (1..=area.wy)
        .map(|b| area.ly * b as f64 / (area.wy + 1) as f64)
        .collect();
    (xs, ys)
}

fn strictly_between(sorted: &[f64], a: f64, b: f64) -> usize {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let start = sorted.partition_point(|&w| w <= lo);
    let end = sorted.partition_point(|&w| w < hi);
    end.saturating_sub(start)
}

impl Walls {
    /// Walls whose coordinate lies strictly between the endpoints' coordinates.
    pub fn crossings(&self, p: &Point, q: &Point) -> usize {
        strictly_between(&self.vertical, p.x, q.x) + strictly_between(&self.horizontal, p.y, q.y)
    }

    pub fn locate(&self, p: &Point) -> RoomCoord {
        RoomCoord {
            x_lt: self.vertical.partition_point(|&w| w < p.x) as u32,
            x_le: self.vertical.partition_point(|&w| w <= p.x) as u32,
            y_lt: self.horizontal.partition_point(|&w| w < p.y) as u32,
            y_le: self.horizontal.partition_point(|&w| w <= p.y) as u32,
            x: p.x,
            y: p.y,
        }
    }
}

/// A point's position relative to the walls: counts of wall coordinates
/// below (`lt`) and at-or-below (`le`) it on each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomCoord {
    x_lt: u32,
    x_le: u32,
    y_lt: u32,
    y_le: u32,
    x: f64,
    y: f64,
}

impl RoomCoord {
    /// Same count as [`Walls::crossings`] for the two located points.
    pub fn crossings(&self, other: &RoomCoord) -> usize {
        fn axis(a: f64, a_lt: u32, a_le: u32, b: f64, b_lt: u32, b_le: u32) -> u32 {
            if a < b {
                b_lt.saturating_sub(a_le)
            } else {
                a_lt.saturating_sub(b_le)
            }
        }
        (axis(self.x, self.x_lt, self.x_le, other.x, other.x_lt, other.x_le)
            + axis(self.y, self.y_lt, self.y_le, other.y, other.y_lt, other.y_le)) as usize
    }
}

/// Number of walls intersecting the segment `p`-`q`.
///
/// A point lying exactly on a wall does not cross it.
pub fn wall_crossings(area: &ServiceArea, p: &Point, q: &Point) -> usize {
    area.walls().crossings(p, q)
}

/// Regular AP deployment on an `nx` x `ny` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub area: ServiceArea,
    /// Row-major: index `b * nx + a` for column `a` and row `b`.
    pub ap_positions: Vec<Point>,
    pub nx: usize,
    pub ny: usize,
    pub walls: Walls,
}

impl Layout {
    pub fn ap_count(&self) -> usize {
        self.ap_positions.len()
    }

    /// AP density in APs/km^2.
    pub fn density(&self) -> f64 {
        self.ap_count() as f64 / self.area.area_km2()
    }
}

/// Places `nx * ny` APs at the centers of a regular grid of cells.
pub fn place_aps(area: &ServiceArea, nx: usize, ny: usize) -> Result<Layout> {
    area.validate()?;
    if nx == 0 || ny == 0 {
        return Err(Error::invalid(format!("AP grid must be at least 1x1, got {nx}x{ny}")));
    }
    let sx = area.lx / nx as f64;
    let sy = area.ly / ny as f64;
    let mut ap_positions = Vec::with_capacity(nx * ny);
    for b in 0..ny {
        for a in 0..nx {
            ap_positions.push(Point::new(sx * (0.5 + a as f64), sy * (0.5 + b as f64)));
        }
    }
    Ok(Layout {
        area: *area,
        ap_positions,
        nx,
        ny,
        walls: area.walls(),
    })
}

/// Square-ish grid shapes `(nx, ny)` with `|nx - ny| <= 1`, ordered by AP
/// count, up to and including `max_aps` APs: 1x1, 2x1, 2x2, 3x2, 3x3, ...
pub fn grid_ladder(max_aps: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut n = 1usize;
    loop {
        let (nx, ny) = (n, n - 1);
        if ny >= 1 {
            if nx * ny > max_aps {
                break;
            }
            out.push((nx, ny));
        }
        if n * n > max_aps {
            break;
        }
        out.push((n, n));
        n += 1;
    }
    out
}
