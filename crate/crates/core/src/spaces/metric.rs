use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Carrier;
use crate::algebra::AxiomCheck;
use crate::error::{Error, Result};
use crate::CMP_TOL;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    /// d(x, y) = max{x, y} for x != y, 0 on the diagonal.
    MaxPoint,
    Table,
}

/// Points and their distance matrix.
type DistanceTable = (Vec<f64>, Vec<Vec<f64>>);

#[derive(Debug, Clone, PartialEq)]
pub struct BaseMetric {
    kind: MetricKind,
    table: Option<Arc<DistanceTable>>,
}

impl BaseMetric {
    pub fn euclidean() -> Self {
        BaseMetric {
            kind: MetricKind::Euclidean,
            table: None,
        }
    }

    pub fn max_point() -> Self {
        BaseMetric {
            kind: MetricKind::MaxPoint,
            table: None,
        }
    }

    /// Distance table over listed points; `d[i][j]` is d(points[i], points[j]).
    pub fn table(points: Vec<f64>, d: Vec<Vec<f64>>) -> Result<Self> {
        if d.len() != points.len() || d.iter().any(|row| row.len() != points.len()) {
            return Err(Error::Invalid(
                "distance table must be square over the points".into(),
            ));
        }
        if let Some(v) = d.iter().flatten().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::Invalid(format!(
                "distance {v} is not a finite nonnegative number"
            )));
        }
        Ok(BaseMetric {
            kind: MetricKind::Table,
            table: Some(Arc::new((points, d))),
        })
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "euclidean" => Ok(Self::euclidean()),
            "max" => Ok(Self::max_point()),
            _ => Err(Error::UnknownId {
                kind: "metric",
                id: id.into(),
            }),
        }
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            MetricKind::Euclidean => "euclidean",
            MetricKind::MaxPoint => "max",
            MetricKind::Table => "table",
        }
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(match self.kind {
            MetricKind::Euclidean => (x - y).abs(),
            MetricKind::MaxPoint => {
                if x == y {
                    0.0
                } else {
                    x.max(y)
                }
            }
            MetricKind::Table => {
                let (pts, d) = &**self.table.as_ref().expect("table metric");
                let i = pts
                    .iter()
                    .position(|&p| p == x)
                    .ok_or(Error::NotInCarrier(x))?;
                let j = pts
                    .iter()
                    .position(|&p| p == y)
                    .ok_or(Error::NotInCarrier(y))?;
                d[i][j]
            }
        })
    }
}

/// Metric axioms on carrier pairs and the triangle inequality on triples:
/// exhaustive for finite carriers, `triple_samples` seeded draws otherwise.
pub fn metric_axiom_check(
    d: &BaseMetric,
    carrier: &Carrier,
    triple_samples: usize,
    seed: u64,
) -> Result<Vec<AxiomCheck>> {
    let pts = &carrier.points;
    let mut zero = None;
    let mut sym = None;
    let mut pos = None;
    for &x in pts {
        let dxx = d.eval(x, x)?;
        if zero.is_none() && dxx != 0.0 {
            zero = Some((vec![x], vec![dxx]));
        }
        for &y in pts {
            let (a, b) = (d.eval(x, y)?, d.eval(y, x)?);
            if sym.is_none() && (a - b).abs() > CMP_TOL {
                sym = Some((vec![x, y], vec![a, b]));
            }
            if pos.is_none() && x != y && !(a > 0.0) {
                pos = Some((vec![x, y], vec![a]));
            }
        }
    }
    let mut tri = None;
    for [x, y, z] in triples(carrier, triple_samples, seed) {
        let (xz, xy, yz) = (d.eval(x, z)?, d.eval(x, y)?, d.eval(y, z)?);
        if xz > xy + yz + CMP_TOL {
            tri = Some((vec![x, y, z], vec![xz, xy + yz]));
            break;
        }
    }
    Ok(vec![
        AxiomCheck::from_first("d(x,x) = 0", zero),
        AxiomCheck::from_first("symmetry", sym),
        AxiomCheck::from_first("d(x,y) > 0 for x != y", pos),
        AxiomCheck::from_first("triangle", tri),
    ])
}

/// All ordered triples of a finite carrier, or `n` seeded draws from an interval.
pub(crate) fn triples(carrier: &Carrier, n: usize, seed: u64) -> Vec<[f64; 3]> {
    if carrier.is_finite() {
        let p = &carrier.points;
        let mut out = Vec::with_capacity(p.len().pow(3));
        for &x in p {
            for &y in p {
                for &z in p {
                    out.push([x, y, z]);
                }
            }
        }
        out
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                [
                    carrier.sample(&mut rng),
                    carrier.sample(&mut rng),
                    carrier.sample(&mut rng),
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_metric_values() {
        let d = BaseMetric::max_point();
        assert_eq!(d.eval(1.0, 1.5).unwrap(), 1.5);
        assert_eq!(d.eval(0.7, 0.7).unwrap(), 0.0);
        let c = Carrier::interval(0.0, 3.0, 31).unwrap();
        let checks = metric_axiom_check(&d, &c, 500, 1).unwrap();
        assert!(
            checks.iter().all(|c| c.verdict.is_satisfied()),
            "{checks:?}"
        );
    }

    #[test]
    fn bad_table_triangle() {
        let pts = vec![0.0, 1.0, 2.0];
        let d = BaseMetric::table(
            pts.clone(),
            vec![
                vec![0.0, 1.0, 5.0],
                vec![1.0, 0.0, 1.0],
                vec![5.0, 1.0, 0.0],
            ],
        )
        .unwrap();
        let c = Carrier::finite(&pts).unwrap();
        let checks = metric_axiom_check(&d, &c, 0, 0).unwrap();
        assert!(!checks[3].verdict.is_satisfied());
        assert_eq!(checks[3].witness.as_deref(), Some(&[0.0, 1.0, 2.0][..]));
        assert!(d.eval(0.5, 0.0).is_err());
    }
}
