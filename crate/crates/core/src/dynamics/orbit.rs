use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::contractions::SelfMap;
use crate::error::{Error, Result};
use crate::spaces::FuzzySpace;

pub const DEFAULT_MAX_LEN: usize = 10_000;
pub const DEFAULT_STOP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// x_{n+1} = x_n exactly.
    Fixed,
    /// min over t of M(x_n, x_{n+1}, t) exceeded 1 - stop_tolerance.
    Tolerance,
    MaxLen,
    /// Built from given points, not by iteration.
    External,
}

/// A sequence x_0, ..., x_L with its consecutive-step nearness per grid t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub x0: f64,
    pub points: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// steps[k][n] = M(x_n, x_{n+1}, t_grid[k]).
    pub steps: Vec<Vec<f64>>,
    /// Last step value per t, the running estimate of lim M(x_n, x_{n+1}, t).
    pub limits: Vec<f64>,
    pub stop: StopReason,
    /// The last point is a fixed point of the map (x_L = x_{L-1} = T x_L).
    pub stabilized: bool,
}

impl OrbitTrace {
    /// Number of steps L (points has L + 1 entries).
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() < 2
    }

    pub fn last(&self) -> f64 {
        *self.points.last().expect("non-empty trace")
    }

    /// Trace over given points (no map); the step series is still computed.
    pub fn from_points(space: &FuzzySpace, points: Vec<f64>, t_grid: &[f64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Invalid("a trace needs at least two points".into()));
        }
        let mut trace = OrbitTrace {
            x0: points[0],
            points,
            t_grid: t_grid.to_vec(),
            steps: vec![Vec::new(); t_grid.len()],
            limits: Vec::new(),
            stop: StopReason::External,
            stabilized: false,
        };
        for n in 0..trace.len() {
            for (k, &t) in t_grid.iter().enumerate() {
                let v = space.m(trace.points[n], trace.points[n + 1], t)?;
                trace.steps[k].push(v);
            }
        }
        trace.finish();
        Ok(trace)
    }

    /// The sub-trace x_start, ..., x_L, keeping the stop data.
    pub fn window(&self, start: usize) -> OrbitTrace {
        let start = start.min(self.len().saturating_sub(1));
        let mut w = self.clone();
        w.points = self.points[start..].to_vec();
        w.x0 = w.points[0];
        w.steps = self.steps.iter().map(|s| s[start..].to_vec()).collect();
        w
    }

    fn finish(&mut self) {
        self.limits = self
            .steps
            .iter()
            .map(|s| s.last().copied().unwrap_or(1.0))
            .collect();
    }

    /// Rows (n, x_n, M(x_n, x_{n+1}, t) per grid t) as CSV.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        write!(w, "n,x")?;
        for t in &self.t_grid {
            write!(w, ",t={t}")?;
        }
        writeln!(w)?;
        for n in 0..self.len() {
            write!(w, "{n},{}", self.points[n])?;
            for s in &self.steps {
                write!(w, ",{}", s[n])?;
            }
            writeln!(w)?;
        }
        writeln!(
            w,
            "{},{}{}",
            self.len(),
            self.last(),
            ",".repeat(self.t_grid.len())
        )
    }
}

/// x_{n+1} = T x_n from x0 until a fixed point, the stop tolerance or `max_len` steps.
pub fn picard_orbit(
    space: &FuzzySpace,
    map: &SelfMap,
    x0: f64,
    t_grid: &[f64],
    max_len: usize,
    stop_tolerance: f64,
) -> Result<OrbitTrace> {
    if !space.carrier.contains(x0) {
        return Err(Error::NotInCarrier(x0));
    }
    if max_len < 1 {
        return Err(Error::Invalid("max_len must be at least 1".into()));
    }
    let mut points = vec![x0];
    let mut steps = vec![Vec::new(); t_grid.len()];
    let mut stop = StopReason::MaxLen;
    let mut x = x0;
    for _ in 0..max_len {
        let y = map.eval(x)?;
        if !space.carrier.contains(y) {
            return Err(Error::NotInCarrier(y));
        }
        let mut min_step = f64::INFINITY;
        for (k, &t) in t_grid.iter().enumerate() {
            let v = space.m(x, y, t)?;
            steps[k].push(v);
            min_step = min_step.min(v);
        }
        points.push(y);
        if y == x {
            stop = StopReason::Fixed;
            break;
        }
        if min_step > 1.0 - stop_tolerance {
            stop = StopReason::Tolerance;
            break;
        }
        x = y;
    }
    let mut trace = OrbitTrace {
        x0,
        points,
        t_grid: t_grid.to_vec(),
        steps,
        limits: Vec::new(),
        stop,
        stabilized: stop == StopReason::Fixed,
    };
    trace.finish();
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::default_t_grid;
    use crate::spaces::{exponential_fuzzy_metric, standard_fuzzy_metric, BaseMetric, Carrier};

    #[test]
    fn four_point_orbit() {
        let s = exponential_fuzzy_metric(
            Carrier::finite(&[0.0, 1.0, 2.0, 5.0]).unwrap(),
            BaseMetric::euclidean(),
        );
        let tr = picard_orbit(
            &s,
            &SelfMap::perm_0_1_2_5(),
            1.0,
            &default_t_grid(),
            100,
            1e-9,
        )
        .unwrap();
        assert_eq!(tr.points, vec![1.0, 5.0, 2.0, 0.0, 0.0]);
        assert_eq!(tr.stop, StopReason::Fixed);
        assert!(tr.stabilized);
        let fixed = picard_orbit(
            &s,
            &SelfMap::perm_0_1_2_5(),
            0.0,
            &default_t_grid(),
            100,
            1e-9,
        )
        .unwrap();
        assert_eq!(fixed.points, vec![0.0, 0.0]);
        assert_eq!(fixed.len(), 1);
        assert!(picard_orbit(&s, &SelfMap::perm_0_1_2_5(), 3.0, &[1.0], 10, 1e-9).is_err());
    }

    #[test]
    fn step_map_orbit() {
        let s = standard_fuzzy_metric(
            Carrier::interval(0.0, 3.0, 61).unwrap(),
            BaseMetric::max_point(),
        );
        let tr = picard_orbit(&s, &SelfMap::phi_step(), 0.7, &[1.0], 60, 1e-9).unwrap();
        assert_eq!(tr.points[0], 0.7);
        for n in 1..=60 {
            assert!((tr.points[n] - 1.0 / (n as f64 + 1.0)).abs() < 1e-15, "{n}");
        }
        assert_eq!(tr.stop, StopReason::MaxLen);
        // strictly increasing step series
        assert!(tr.steps[0].windows(2).all(|w| w[1] > w[0]));
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,x,t=1\n0,0.7,"));
        assert_eq!(text.lines().count(), 62);
    }
}
