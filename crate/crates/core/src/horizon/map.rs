//! Piecewise-linear state-to-horizon maps fitted by segmented least squares.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::hpop::SystemState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    /// `None` means the piece extends to infinity.
    pub hi: Option<f64>,
    pub theta0: f64,
    pub theta1: f64,
    pub r2: f64,
    pub points: usize,
}

impl Piece {
    pub fn contains(&self, phi: f64) -> bool {
        phi >= self.lo && self.hi.is_none_or(|h| phi < h)
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.theta0 + self.theta1 * phi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonMap {
    pub basis: String,
    pub pieces: Vec<Piece>,
    pub r2_avg: f64,
}

pub const BASIS: &str = "phi0 = 1, phi1 = sum_h r_h s_h";

impl HorizonMap {
    /// Single piece `θ0 + θ1 φ1` over `[0, ∞)`.
    pub fn linear(theta0: f64, theta1: f64) -> Self {
        HorizonMap::from_pieces(vec![(0.0, None, theta0, theta1)])
    }

    /// Builds a map from `(lo, hi, θ0, θ1)` tuples with unit R².
    pub fn from_pieces(pieces: Vec<(f64, Option<f64>, f64, f64)>) -> Self {
        HorizonMap {
            basis: BASIS.into(),
            pieces: pieces
                .into_iter()
                .map(|(lo, hi, theta0, theta1)| Piece {
                    lo,
                    hi,
                    theta0,
                    theta1,
                    r2: 1.0,
                    points: 0,
                })
                .collect(),
            r2_avg: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.pieces;
        if p.is_empty() {
            return Err(Error::Config("horizon map has no pieces".into()));
        }
        if p[0].lo != 0.0 {
            return Err(Error::Config("first piece must start at 0".into()));
        }
        for w in p.windows(2) {
            if w[0].hi != Some(w[1].lo) || !(w[1].lo > w[0].lo) {
                return Err(Error::Config("pieces must be contiguous and ascending".into()));
            }
        }
        if p.last().unwrap().hi.is_some() {
            return Err(Error::Config("last piece must extend to infinity".into()));
        }
        Ok(())
    }

    pub fn piece_for(&self, phi: f64) -> &Piece {
        self.pieces.iter().find(|p| p.contains(phi)).unwrap_or(&self.pieces[0])
    }

    pub fn predict_phi(&self, phi: f64) -> f64 {
        self.piece_for(phi).eval(phi)
    }

    pub fn predict(&self, s: &SystemState) -> f64 {
        self.predict_phi(s.phi1)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let map: HorizonMap = serde_json::from_str(&text).map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        map.validate().map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        Ok(map)
    }
}

/// Least-squares line through `(x, y)`; vertical data gets slope zero.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let sse = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    (intercept, slope, sse)
}

fn r_squared(y: &[f64], sse: f64) -> f64 {
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sst <= 1e-24 * (1.0 + my * my) * n {
        1.0
    } else {
        1.0 - sse / sst
    }
}

/// Minimal total SSE with at most `max_pieces` contiguous segments of at
/// least two points each, cut only between distinct abscissae. Returns the
/// segment start indices into the sorted data, or `None` if no admissible
/// segmentation exists.
pub fn segment(x: &[f64], y: &[f64], max_pieces: usize) -> Option<(Vec<usize>, f64)> {
    let n = x.len();
    let cost = |i: usize, j: usize| line_fit(&x[i..j], &y[i..j]).2;
    let admissible_cut = |i: usize| i >= 2 && i + 2 <= n && x[i - 1] < x[i];
    // best[k][j]: min SSE of first j points in k+1 pieces.
    let mut best = vec![vec![f64::INFINITY; n + 1]; max_pieces];
    let mut from = vec![vec![0usize; n + 1]; max_pieces];
    for j in 2..=n {
        best[0][j] = cost(0, j);
    }
    for k in 1..max_pieces {
        for j in 2..=n {
            for i in 2..=j.saturating_sub(2) {
                if !admissible_cut(i) || !best[k - 1][i].is_finite() {
                    continue;
                }
                let c = best[k - 1][i] + cost(i, j);
                if c < best[k][j] {
                    best[k][j] = c;
                    from[k][j] = i;
                }
            }
        }
    }
    if n < 2 {
        return None;
    }
    let scale: f64 = 1.0 + y.iter().map(|v| v * v).sum::<f64>();
    let mut chosen = 0;
    for k in 1..max_pieces {
        if best[k][n] < best[chosen][n] - 1e-12 * scale {
            chosen = k;
        }
    }
    let mut starts = Vec::new();
    let mut j = n;
    let mut k = chosen;
    loop {
        if k == 0 {
            starts.push(0);
            break;
        }
        let i = from[k][j];
        starts.push(i);
        j = i;
        k -= 1;
    }
    starts.reverse();
    Some((starts, best[chosen][n]))
}

/// Fits a map with at most `max_pieces` pieces to `(φ1, τ*)` points.
pub fn fit_horizon_map(points: &[(f64, f64)], max_pieces: usize) -> Result<HorizonMap> {
    if points.len() < 2 {
        return Err(Error::Regression(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    if max_pieces == 0 {
        return Err(Error::Regression("max_pieces must be positive".into()));
    }
    if points.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(Error::Regression("points must be finite".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (starts, _) =
        segment(&x, &y, max_pieces).ok_or_else(|| Error::Regression("no admissible segmentation".into()))?;
    let n = x.len();
    let mut pieces = Vec::with_capacity(starts.len());
    for (s, &i) in starts.iter().enumerate() {
        let j = starts.get(s + 1).copied().unwrap_or(n);
        let (theta0, theta1, sse) = line_fit(&x[i..j], &y[i..j]);
        let lo = if s == 0 { 0.0 } else { 0.5 * (x[i - 1] + x[i]) };
        let hi = if j == n { None } else { Some(0.5 * (x[j - 1] + x[j])) };
        pieces.push(Piece {
            lo,
            hi,
            theta0,
            theta1,
            r2: r_squared(&y[i..j], sse),
            points: j - i,
        });
    }
    let r2_avg = pieces.iter().map(|p| p.r2 * p.points as f64).sum::<f64>() / n as f64;
    Ok(HorizonMap {
        basis: BASIS.into(),
        pieces,
        r2_avg,
    })
}
