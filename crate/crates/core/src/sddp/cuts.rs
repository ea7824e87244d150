use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affine minorant `β·x + α` of an expected cost-to-go function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub beta: Vec<f64>,
    pub alpha: f64,
    pub birth_iteration: usize,
}

impl Cut {
    pub fn new(beta: Vec<f64>, alpha: f64, birth_iteration: usize) -> Self {
        Cut {
            beta,
            alpha,
            birth_iteration,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.alpha + self.beta.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

/// Cut collections, one per approximated cost-to-go function.
///
/// For a `τ`-stage problem, `stages[k]` approximates the cost-to-go of
/// stage `k + 2`, so there are `τ - 1` collections. A stationary pool has a
/// single shared collection.
#[derive(Debug, Clone, PartialEq)]
pub struct CutPool {
    pub stages: Vec<Vec<Cut>>,
    pub floor: f64,
    pub dim: usize,
}

impl CutPool {
    pub fn for_horizon(horizon: usize, dim: usize, floor: f64) -> Self {
        CutPool {
            stages: vec![Vec::new(); horizon.saturating_sub(1)],
            floor,
            dim,
        }
    }

    pub fn shared(dim: usize, floor: f64) -> Self {
        CutPool {
            stages: vec![Vec::new()],
            floor,
            dim,
        }
    }

    /// Cuts approximating the cost-to-go of stage `t` (1-based, `t >= 2`).
    pub fn stage(&self, t: usize) -> &[Cut] {
        &self.stages[t - 2]
    }

    pub fn stage_mut(&mut self, t: usize) -> &mut Vec<Cut> {
        &mut self.stages[t - 2]
    }

    /// `max(floor, max_ℓ β_ℓ·x + α_ℓ)` over a cut collection.
    pub fn value_of(cuts: &[Cut], floor: f64, x: &[f64]) -> f64 {
        cuts.iter().map(|c| c.eval(x)).fold(floor, f64::max)
    }

    pub fn value(&self, t: usize, x: &[f64]) -> f64 {
        Self::value_of(self.stage(t), self.floor, x)
    }

    pub fn len(&self) -> usize {
        self.stages.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the pool as a delimited table preceded by `#` metadata lines:
    /// one row per cut with `collection, birth, alpha, beta_0, …`.
    pub fn save(&self, path: &Path, comment: &[(String, String)]) -> Result<()> {
        let mut buf: Vec<u8> = Vec::new();
        writeln!(buf, "# floor={}", self.floor).ok();
        writeln!(buf, "# dim={}", self.dim).ok();
        writeln!(buf, "# collections={}", self.stages.len()).ok();
        for (k, v) in comment {
            writeln!(buf, "# {k}={v}").ok();
        }
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            let mut header = vec!["collection".to_string(), "birth".into(), "alpha".into()];
            header.extend((0..self.dim).map(|k| format!("beta_{k}")));
            w.write_record(&header)?;
            for (s, cuts) in self.stages.iter().enumerate() {
                for c in cuts {
                    let mut row = vec![s.to_string(), c.birth_iteration.to_string(), c.alpha.to_string()];
                    row.extend(c.beta.iter().map(f64::to_string));
                    w.write_record(&row)?;
                }
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    /// Reads a pool written by [`CutPool::save`] together with its extra
    /// metadata entries.
    pub fn load(path: &Path) -> Result<(CutPool, Vec<(String, String)>)> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let schema = |msg: String| Error::Schema {
            path: path.to_path_buf(),
            msg,
        };
        let mut meta = Vec::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            if let Some((k, v)) = body.split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
        }
        let get = |key: &str| -> Result<String> {
            meta.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| schema(format!("missing `{key}` metadata")))
        };
        let floor: f64 = get("floor")?.parse().map_err(|_| schema("bad floor".into()))?;
        let dim: usize = get("dim")?.parse().map_err(|_| schema("bad dim".into()))?;
        let n: usize = get("collections")?
            .parse()
            .map_err(|_| schema("bad collections".into()))?;
        let mut pool = CutPool {
            stages: vec![Vec::new(); n],
            floor,
            dim,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 3 + dim {
                return Err(schema(format!("row has {} fields, expected {}", rec.len(), 3 + dim)));
            }
            let num =
                |i: usize| -> Result<f64> { rec[i].parse().map_err(|_| schema(format!("bad number `{}`", &rec[i]))) };
            let s: usize = rec[0].parse().map_err(|_| schema("bad collection".into()))?;
            if s >= n {
                return Err(schema(format!("collection {s} out of range")));
            }
            let birth: usize = rec[1].parse().map_err(|_| schema("bad birth".into()))?;
            let beta = (3..3 + dim).map(num).collect::<Result<Vec<_>>>()?;
            pool.stages[s].push(Cut::new(beta, num(2)?, birth));
        }
        let known = ["floor", "dim", "collections"];
        meta.retain(|(k, _)| !known.contains(&k.as_str()));
        Ok((pool, meta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_respects_floor() {
        let mut p = CutPool::for_horizon(3, 1, 0.0);
        assert_eq!(p.value(2, &[5.0]), 0.0);
        p.stage_mut(2).push(Cut::new(vec![-1.0], 3.0, 1));
        assert_eq!(p.value(2, &[1.0]), 2.0);
        assert_eq!(p.value(2, &[5.0]), 0.0);
        assert_eq!(p.value(3, &[1.0]), 0.0);
    }

    #[test]
    fn snapshot_round_trip() {
        let mut p = CutPool::for_horizon(3, 2, -1.5);
        p.stage_mut(2).push(Cut::new(vec![0.1, -2.0 / 3.0], 1e-17, 4));
        p.stage_mut(3).push(Cut::new(vec![3.0, 0.0], 12345.678, 9));
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("pool.csv");
        p.save(&f, &[("horizon".into(), "3".into())]).unwrap();
        let (q, meta) = CutPool::load(&f).unwrap();
        assert_eq!(p, q);
        assert_eq!(meta, vec![("horizon".to_string(), "3".to_string())]);
    }
}
