use serde::{Deserialize, Serialize};

use crate::model::GridGeometry;

/// Tolerance, in units of one block, within which a coordinate counts as a
/// midpoint tie or as already lying on a street.
const TIE_EPS: f64 = 1e-9;

/// Street intersection addressed by block indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StreetPoint {
    pub ix: i64,
    pub iy: i64,
}

impl StreetPoint {
    pub fn x(&self, grid: &GridGeometry) -> f64 {
        self.ix as f64 * grid.l_x
    }

    pub fn y(&self, grid: &GridGeometry) -> f64 {
        self.iy as f64 * grid.l_y
    }

    pub fn coords(&self, grid: &GridGeometry) -> (f64, f64) {
        (self.x(grid), self.y(grid))
    }
}

/// Rounds `v / step` to the nearest integer; exact midpoints go to `tie`.
fn round_with_tie(v: f64, step: f64, tie: impl Fn(f64) -> f64) -> i64 {
    let u = v / step;
    let lo = u.floor();
    let frac = u - lo;
    if (frac - 0.5).abs() < TIE_EPS {
        tie(lo) as i64
    } else {
        u.round() as i64
    }
}

/// Largest block index along the route.
pub fn max_ix(grid: &GridGeometry) -> i64 {
    (grid.gl_x / grid.l_x + TIE_EPS).floor() as i64
}

/// Nearest street intersection to a demand point.
///
/// Midpoint ties go backward in `x` and toward the axis in `y`; `x` is
/// clamped to the route extent.
pub fn snap_to_streets(point: (f64, f64), grid: &GridGeometry) -> StreetPoint {
    let (x, y) = point;
    let ix = round_with_tie(x, grid.l_x, |lo| lo).clamp(0, max_ix(grid));
    let iy = if y >= 0.0 {
        round_with_tie(y, grid.l_y, |lo| lo)
    } else {
        -round_with_tie(-y, grid.l_y, |lo| lo)
    };
    StreetPoint { ix, iy }
}

/// Whether a coordinate pair already lies on an intersection.
pub fn on_lattice(point: (f64, f64), grid: &GridGeometry) -> bool {
    let near = |v: f64, step: f64| {
        let u = v / step;
        (u - u.round()).abs() < 1e-6
    };
    near(point.0, grid.l_x) && near(point.1, grid.l_y)
}
