use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{BaseMetric, Carrier};
use crate::algebra::TNorm;
use crate::error::{Error, Result};

/// M over listed points and a t-grid: `values[i][j][k] = M(points[i], points[j], t_grid[k])`.
/// Linear in t between nodes, constant beyond the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyTable {
    pub points: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub values: Vec<Vec<Vec<f64>>>,
}

impl FuzzyTable {
    pub fn new(points: Vec<f64>, t_grid: Vec<f64>, values: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let t = FuzzyTable {
            points,
            t_grid,
            values,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: FuzzyTable =
            serde_json::from_str(text).map_err(|e| Error::Invalid(format!("fuzzy table: {e}")))?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if n == 0 || self.t_grid.is_empty() {
            return Err(Error::Invalid(
                "fuzzy table needs points and a t-grid".into(),
            ));
        }
        Carrier::finite(&self.points)?;
        if self.t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite()))
            || self.t_grid.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Invalid(
                "fuzzy table t-grid must be positive and increasing".into(),
            ));
        }
        let k = self.t_grid.len();
        if self.values.len() != n
            || self
                .values
                .iter()
                .any(|row| row.len() != n || row.iter().any(|col| col.len() != k))
        {
            return Err(Error::Invalid(format!(
                "fuzzy table values must have shape {n} x {n} x {k}"
            )));
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let i = self
            .points
            .iter()
            .position(|&p| p == x)
            .ok_or(Error::NotInCarrier(x))?;
        let j = self
            .points
            .iter()
            .position(|&p| p == y)
            .ok_or(Error::NotInCarrier(y))?;
        let v = &self.values[i][j];
        let g = &self.t_grid;
        let k = g.partition_point(|&s| s < t);
        Ok(if k == 0 {
            v[0]
        } else if k == g.len() {
            v[g.len() - 1]
        } else {
            let w = (t - g[k - 1]) / (g[k] - g[k - 1]);
            v[k - 1] + w * (v[k] - v[k - 1])
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// t / (t + d)
    Standard(BaseMetric),
    /// exp(-d / t)
    Exponential(BaseMetric),
    Table(Arc<FuzzyTable>),
}

impl Provenance {
    pub fn id(&self) -> String {
        match self {
            Provenance::Standard(d) => format!("standard:{}", d.id()),
            Provenance::Exponential(d) => format!("exp:{}", d.id()),
            Provenance::Table(_) => "table".into(),
        }
    }
}

/// A carrier with a fuzzy metric M, its t-norm and the declared attributes.
#[derive(Debug, Clone)]
pub struct FuzzySpace {
    pub carrier: Carrier,
    pub tnorm: TNorm,
    pub provenance: Provenance,
    /// Declared strongness; `axiom_check` reports the sampled verdict separately.
    pub strong: bool,
    /// Assumed attribute, never verified.
    pub complete: bool,
}

pub fn standard_fuzzy_metric(carrier: Carrier, d: BaseMetric) -> FuzzySpace {
    FuzzySpace {
        carrier,
        tnorm: TNorm::product(),
        provenance: Provenance::Standard(d),
        strong: true,
        complete: true,
    }
}

pub fn exponential_fuzzy_metric(carrier: Carrier, d: BaseMetric) -> FuzzySpace {
    FuzzySpace {
        carrier,
        tnorm: TNorm::product(),
        provenance: Provenance::Exponential(d),
        strong: true,
        complete: true,
    }
}

impl FuzzySpace {
    /// Space over the table's points with a declared t-norm and strongness.
    pub fn from_table(table: FuzzyTable, tnorm: TNorm, strong: bool) -> Result<Self> {
        Ok(FuzzySpace {
            carrier: Carrier::finite(&table.points)?,
            tnorm,
            provenance: Provenance::Table(Arc::new(table)),
            strong,
            complete: true,
        })
    }

    /// `standard:<metric>`, `exp:<metric>` or `table:<path>` (path relative to `base`).
    pub fn from_constructor(id: &str, carrier: Carrier, base: Option<&Path>) -> Result<Self> {
        let unknown = || Error::UnknownId {
            kind: "space constructor",
            id: id.to_string(),
        };
        let (head, arg) = id.split_once(':').ok_or_else(unknown)?;
        match head {
            "standard" => Ok(standard_fuzzy_metric(carrier, BaseMetric::from_id(arg)?)),
            "exp" => Ok(exponential_fuzzy_metric(carrier, BaseMetric::from_id(arg)?)),
            "table" => {
                let p = Path::new(arg);
                let p = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.to_path_buf(),
                };
                let table = FuzzyTable::load(&p)?;
                if let Some(x) = carrier.points.iter().find(|x| !table.points.contains(x)) {
                    return Err(Error::NotInCarrier(*x));
                }
                let mut s = Self::from_table(table, TNorm::product(), false)?;
                s.carrier = carrier;
                Ok(s)
            }
            _ => Err(unknown()),
        }
    }

    /// M(x, y, t), with t > 0 and table lookups checked.
    pub fn m(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain {
                what: "t",
                value: t,
                domain: "(0, inf)",
            });
        }
        Ok(match &self.provenance {
            Provenance::Standard(d) => {
                let d = d.eval(x, y)?;
                t / (t + d)
            }
            Provenance::Exponential(d) => (-d.eval(x, y)? / t).exp(),
            Provenance::Table(tab) => tab.eval(x, y, t)?,
        })
    }

    /// Unchecked M for hot loops over validated inputs; NaN where `m` would fail.
    pub fn nearness(&self, x: f64, y: f64, t: f64) -> f64 {
        self.m(x, y, t).unwrap_or(f64::NAN)
    }

    pub fn constructor_id(&self) -> String {
        self.provenance.id()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn standard_examples() {
        let c = Carrier::interval(0.0, 3.0, 31).unwrap();
        let s = standard_fuzzy_metric(c.clone(), BaseMetric::max_point());
        assert!(close(s.m(1.0, 1.5, 1.0).unwrap(), 0.4));
        assert_eq!(s.m(0.7, 0.7, 0.01).unwrap(), 1.0);
        let e = standard_fuzzy_metric(c, BaseMetric::euclidean());
        assert!(close(e.m(0.0, 1.0, 1.0).unwrap(), 0.5));
        assert!(e.m(0.0, 1.0, 0.0).is_err());
        assert!(s.strong && s.tnorm.id() == "product");
    }

    #[test]
    fn exponential_examples() {
        let c = Carrier::finite(&[0.0, 1.0, 2.0, 5.0]).unwrap();
        let s = exponential_fuzzy_metric(c, BaseMetric::euclidean());
        assert!((s.m(0.0, 5.0, 1.0).unwrap() - 6.7379e-3).abs() < 1e-7);
        assert_eq!(s.m(2.0, 2.0, 3.0).unwrap(), 1.0);
        let vals: Vec<f64> = crate::grid::default_t_grid()
            .iter()
            .map(|&t| s.m(0.0, 1.0, t).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn table_interpolates() {
        let t = FuzzyTable::new(
            vec![0.0, 1.0],
            vec![1.0, 3.0],
            vec![
                vec![vec![1.0, 1.0], vec![0.2, 0.6]],
                vec![vec![0.2, 0.6], vec![1.0, 1.0]],
            ],
        )
        .unwrap();
        assert!(close(t.eval(0.0, 1.0, 2.0).unwrap(), 0.4));
        assert_eq!(t.eval(0.0, 1.0, 0.5).unwrap(), 0.2);
        assert_eq!(t.eval(0.0, 1.0, 9.0).unwrap(), 0.6);
        assert!(t.eval(0.0, 2.0, 1.0).is_err());
        assert!(FuzzyTable::new(vec![0.0], vec![1.0], vec![vec![vec![1.0, 1.0]]]).is_err());
    }
}
