use crate::error::{Error, Result};

/// Graded nodes `t_j = T (j/N)^r` on `[0, T]`, optionally followed by a
/// geometric extension `T q^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMesh {
    pub endpoint: f64,
    pub intervals: usize,
    pub grading: f64,
    pub extension: Option<GeometricExtension>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricExtension {
    pub ratio: f64,
    pub count: usize,
    pub t_max: f64,
}

impl GradedMesh {
    pub fn new(endpoint: f64, intervals: usize, grading: f64) -> Result<Self> {
        if !(endpoint > 0.0 && endpoint.is_finite()) {
            return Err(Error::Domain(format!("mesh endpoint must be positive, got {endpoint}")));
        }
        if intervals == 0 {
            return Err(Error::Domain("mesh needs at least one interval".into()));
        }
        if !(grading >= 1.0 && grading.is_finite()) {
            return Err(Error::Domain(format!("grading exponent must be at least 1, got {grading}")));
        }
        Ok(GradedMesh {
            endpoint,
            intervals,
            grading,
            extension: None,
        })
    }

    /// Appends geometric nodes `T q, T q², …` up to `t_max`. The ratio is
    /// shrunk (never grown) so that the last node lands on `t_max` exactly.
    pub fn extended_to(mut self, t_max: f64, ratio: f64) -> Result<Self> {
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(Error::Domain(format!("geometric ratio must exceed 1, got {ratio}")));
        }
        if !t_max.is_finite() {
            return Err(Error::Domain(format!("final time must be finite, got {t_max}")));
        }
        self.extension = if t_max > self.endpoint {
            let span = (t_max / self.endpoint).ln();
            let count = (span / ratio.ln() - 1e-9).ceil().max(1.0) as usize;
            let ratio = (span / count as f64).exp();
            Some(GeometricExtension { ratio, count, t_max })
        } else {
            None
        };
        Ok(self)
    }

    pub fn graded_nodes(&self) -> Vec<f64> {
        let n = self.intervals as f64;
        (0..=self.intervals)
            .map(|j| {
                if j == self.intervals {
                    self.endpoint
                } else {
                    self.endpoint * (j as f64 / n).powf(self.grading)
                }
            })
            .collect()
    }

    pub fn nodes(&self) -> Vec<f64> {
        let mut nodes = self.graded_nodes();
        if let Some(ext) = self.extension {
            nodes.extend(geometric_nodes(self.endpoint, ext.ratio, ext.count, Some(ext.t_max)));
        }
        nodes
    }

    pub fn final_time(&self) -> f64 {
        self.extension.map_or(self.endpoint, |ext| ext.t_max)
    }
}

/// `start q, start q², …` (`count` nodes), with the last clamped to `clamp`.
pub fn geometric_nodes(start: f64, ratio: f64, count: usize, clamp: Option<f64>) -> Vec<f64> {
    let mut out: Vec<f64> = (1..=count).map(|k| start * ratio.powf(k as f64)).collect();
    if let (Some(last), Some(limit)) = (out.last_mut(), clamp) {
        if *last > limit || (limit - *last) <= 1e-9 * limit {
            *last = limit;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_nodes_increase_from_zero() {
        let m = GradedMesh::new(10.0, 64, 4.0).unwrap();
        let nodes = m.nodes();
        assert_eq!(nodes.len(), 65);
        assert_eq!(nodes[0], 0.0);
        assert_eq!(*nodes.last().unwrap(), 10.0);
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn extension_reaches_t_max() {
        let m = GradedMesh::new(10.0, 16, 2.0).unwrap().extended_to(1e6, 1.25).unwrap();
        let nodes = m.nodes();
        assert_eq!(*nodes.last().unwrap(), 1e6);
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(m.final_time(), 1e6);
        let tail = &nodes[17..];
        let q = m.extension.unwrap().ratio;
        assert!(q <= 1.25 && q > 1.24);
        assert!(tail.windows(2).all(|w| (w[1] / w[0] - q).abs() < 1e-12));
    }

    #[test]
    fn invalid_meshes() {
        assert!(GradedMesh::new(0.0, 4, 2.0).is_err());
        assert!(GradedMesh::new(1.0, 0, 2.0).is_err());
        assert!(GradedMesh::new(1.0, 4, 0.5).is_err());
        assert!(GradedMesh::new(1.0, 4, 2.0).unwrap().extended_to(10.0, 1.0).is_err());
    }
}
