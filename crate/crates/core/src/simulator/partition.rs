use serde::{Deserialize, Serialize};

use super::SimError;
use crate::model::{ExpressLeg, GridGeometry, Request, ServiceConfig};

/// One y-band of a parallel-route split. Each band has its own route, run
/// at `n_p` times the base headway so the fleet is unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub index: usize,
    pub y_lo: f64,
    pub y_hi: f64,
    pub requests: Vec<Request>,
}

/// Band holding offset `y` when `[-g, g]` is cut into `n_p` equal bands.
///
/// A point on a band edge belongs to the band whose centre is nearer the
/// axis; on an exact tie, the lower band.
pub fn band_of(y: f64, g: f64, n_p: usize) -> usize {
    if n_p <= 1 {
        return 0;
    }
    let width = 2.0 * g / n_p as f64;
    let u = (y + g) / width;
    let idx = u.floor();
    let last = (n_p - 1) as f64;
    if (u - idx).abs() < 1e-12 && idx > 0.0 && idx <= last {
        let centre = |b: f64| (-g + (b + 0.5) * width).abs();
        let below = idx - 1.0;
        return if centre(below) <= centre(idx) { below as usize } else { idx as usize };
    }
    idx.clamp(0.0, last) as usize
}

/// Splits requests into `n_p` equal-width bands across the catchment.
pub fn partition_parallel(requests: &[Request], grid: &GridGeometry, n_p: usize) -> Vec<Band> {
    let n_p = n_p.max(1);
    let g = grid.gl_y.max();
    let width = 2.0 * g / n_p as f64;
    let mut bands: Vec<Band> = (0..n_p)
        .map(|index| Band {
            index,
            y_lo: -g + index as f64 * width,
            y_hi: -g + (index + 1) as f64 * width,
            requests: Vec::new(),
        })
        .collect();
    for r in requests {
        bands[band_of(r.y, g, n_p)].requests.push(*r);
    }
    bands
}

/// One zone of a zonal-express split. Its buses serve `[x_lo, x_hi]` locally
/// and then run nonstop to the end of the suburb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub index: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub express: Option<ExpressLeg>,
    pub requests: Vec<Request>,
}

/// Zone holding chainage `x`; a point on a zone edge stays upstream.
pub fn zone_of(x: f64, gl_x: f64, n: usize) -> usize {
    let u = x / (gl_x / n as f64);
    (u.ceil() - 1.0).clamp(0.0, (n - 1) as f64) as usize
}

/// Splits the route into `n` equal zones, each with its express leg.
pub fn partition_zonal(
    requests: &[Request],
    grid: &GridGeometry,
    svc: &ServiceConfig,
    n: usize,
) -> Result<Vec<Zone>, SimError> {
    let n = n.max(1);
    let v_h = match svc.v_h {
        Some(v) => v,
        None if n > 1 => return Err(SimError::MissingHighwaySpeed),
        None => svc.v_d,
    };
    let length = grid.gl_x / n as f64;
    let mut zones: Vec<Zone> = (0..n)
        .map(|index| {
            let x_lo = index as f64 * length;
            let x_hi = if index + 1 == n { grid.gl_x } else { (index + 1) as f64 * length };
            let rest = grid.gl_x - x_hi;
            Zone {
                index,
                x_lo,
                x_hi,
                express: (rest > 0.0).then_some(ExpressLeg { length: rest, speed: v_h }),
                requests: Vec::new(),
            }
        })
        .collect();
    for r in requests {
        zones[zone_of(r.x, grid.gl_x, n)].requests.push(*r);
    }
    Ok(zones)
}
