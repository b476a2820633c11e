use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::algebra::{Gauge, Generator, TNorm};
use crate::contractions::{MParams, PairSampling, SelfMap};
use crate::dynamics::{Route, ScaleSequence, SolverConfig};
use crate::error::{Error, Result, SchemaError};
use crate::grid::{default_r_grid, default_t_grid, parse_grid_spec, parse_number};
use crate::spaces::{Carrier, FuzzySpace};

/// Built-in scenario documents, by name.
pub const BUILTIN: [(&str, &str); 3] = [
    ("ex61", include_str!("../../scenarios/ex61.toml")),
    ("ex62", include_str!("../../scenarios/ex62.toml")),
    ("ex63", include_str!("../../scenarios/ex63.toml")),
];

#[derive(Debug, Clone)]
pub struct SolverSpec {
    pub route: Route,
    pub x0: Option<f64>,
    pub max_len: Option<usize>,
    pub stop_tolerance: Option<f64>,
    pub tail_tolerance: Option<f64>,
    pub scales: Option<ScaleSequence>,
    pub cauchy_window: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub space: FuzzySpace,
    pub map: SelfMap,
    /// Declared continuity of the map.
    pub continuity: Option<bool>,
    pub psi: Option<Gauge>,
    pub phi: Option<Gauge>,
    pub eta: Option<Generator>,
    pub params: Option<MParams>,
    pub t_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub solver: SolverSpec,
}

impl Scenario {
    pub fn solver_config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        let s = &self.solver;
        SolverConfig {
            t_grid: self.t_grid.clone(),
            r_grid: self.r_grid.clone(),
            max_len: s.max_len.unwrap_or(d.max_len),
            stop_tolerance: s.stop_tolerance.unwrap_or(d.stop_tolerance),
            tail_tolerance: s.tail_tolerance.unwrap_or(d.tail_tolerance),
            scales: s.scales.unwrap_or(d.scales),
            params: self.params,
            psi: self.psi.clone(),
            continuity: self.continuity,
            cauchy_window: s.cauchy_window.unwrap_or(d.cauchy_window),
            sampling: PairSampling::with_seed(self.seed),
        }
    }
}

/// A built-in name such as `ex63`, or a path to a TOML document.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if let Some((_, text)) = BUILTIN.iter().find(|(n, _)| *n == name_or_path) {
        return parse_scenario(text, None);
    }
    let path = PathBuf::from(name_or_path);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_scenario(&text, path.parent())
}

/// Parse and validate; every schema problem is reported with its key path.
pub fn parse_scenario(text: &str, base: Option<&Path>) -> Result<Scenario> {
    let doc: Table = text.parse().map_err(|e: toml::de::Error| {
        Error::Schema(vec![SchemaError::new(
            "<document>",
            e.message().to_string(),
        )])
    })?;
    let mut w = Walker::default();
    let scenario = w.scenario(&doc, base);
    match scenario {
        Some(s) if w.errors.is_empty() => Ok(s),
        _ => Err(Error::Schema(w.errors)),
    }
}

#[derive(Default)]
struct Walker {
    errors: Vec<SchemaError>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Walker {
    fn err(&mut self, path: impl Into<String>, msg: impl Into<String>) {
        self.errors.push(SchemaError::new(path, msg));
    }

    fn known(&mut self, t: &Table, path: &str, keys: &[&str]) {
        for k in t.keys() {
            if !keys.contains(&k.as_str()) {
                self.err(join(path, k), "unknown key");
            }
        }
    }

    fn table<'a>(&mut self, t: &'a Table, path: &str, key: &str) -> Option<&'a Table> {
        match t.get(key) {
            Some(Value::Table(x)) => Some(x),
            Some(_) => {
                self.err(join(path, key), "expected a table");
                None
            }
            None => {
                self.err(join(path, key), "missing key");
                None
            }
        }
    }

    fn string<'a>(
        &mut self,
        t: &'a Table,
        path: &str,
        key: &str,
        required: bool,
    ) -> Option<&'a str> {
        match t.get(key) {
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.err(join(path, key), "expected a string");
                None
            }
            None => {
                if required {
                    self.err(join(path, key), "missing key");
                }
                None
            }
        }
    }

    fn boolean(&mut self, t: &Table, path: &str, key: &str) -> Option<bool> {
        match t.get(key) {
            Some(Value::Boolean(b)) => Some(*b),
            Some(_) => {
                self.err(join(path, key), "expected true or false");
                None
            }
            None => None,
        }
    }

    /// Integer, float or a fraction string like "5/7".
    fn number_value(&mut self, v: &Value, path: &str) -> Option<f64> {
        let n = match v {
            Value::Integer(i) => Some(*i as f64),
            Value::Float(f) if f.is_finite() => Some(*f),
            Value::String(s) => parse_number(s).ok(),
            _ => None,
        };
        if n.is_none() {
            self.err(path, "expected a number");
        }
        n
    }

    fn number(&mut self, t: &Table, path: &str, key: &str) -> Option<f64> {
        let v = t.get(key)?;
        self.number_value(v, &join(path, key))
    }

    fn count(&mut self, t: &Table, path: &str, key: &str) -> Option<usize> {
        match t.get(key) {
            Some(Value::Integer(i)) if *i >= 1 => Some(*i as usize),
            Some(_) => {
                self.err(join(path, key), "expected a positive integer");
                None
            }
            None => None,
        }
    }

    fn scenario(&mut self, doc: &Table, base: Option<&Path>) -> Option<Scenario> {
        self.known(
            doc,
            "",
            &["name", "seed", "space", "map", "gauges", "grids", "solver"],
        );
        let name = self
            .string(doc, "", "name", false)
            .unwrap_or("scenario")
            .to_string();
        let seed = match doc.get("seed") {
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(_) => {
                self.err("seed", "expected a nonnegative integer");
                0
            }
            None => 0,
        };
        let space = self
            .table(doc, "", "space")
            .and_then(|t| self.space(t, base));
        let map = self
            .table(doc, "", "map")
            .and_then(|t| self.map(t, space.as_ref()));
        let (psi, phi, eta, params) = match doc.get("gauges") {
            Some(Value::Table(t)) => self.gauges(t),
            Some(_) => {
                self.err("gauges", "expected a table");
                (None, None, None, None)
            }
            None => (None, None, None, None),
        };
        let (t_grid, r_grid) = match doc.get("grids") {
            Some(Value::Table(t)) => self.grids(t),
            Some(_) => {
                self.err("grids", "expected a table");
                (default_t_grid(), default_r_grid())
            }
            None => (default_t_grid(), default_r_grid()),
        };
        let solver = match doc.get("solver") {
            Some(Value::Table(t)) => self.solver(t),
            Some(_) => {
                self.err("solver", "expected a table");
                None
            }
            None => Some(SolverSpec {
                route: Route::Auto,
                x0: None,
                max_len: None,
                stop_tolerance: None,
                tail_tolerance: None,
                scales: None,
                cauchy_window: None,
            }),
        };
        let (map, continuity) = map?;
        Some(Scenario {
            name,
            seed,
            space: space?,
            map,
            continuity,
            psi,
            phi,
            eta,
            params,
            t_grid,
            r_grid,
            solver: solver?,
        })
    }

    fn carrier(&mut self, v: Option<&Value>) -> Option<Carrier> {
        const P: &str = "space.carrier";
        let Some(Value::Table(t)) = v else {
            self.err(
                P,
                if v.is_some() {
                    "expected a table"
                } else {
                    "missing key"
                },
            );
            return None;
        };
        self.known(t, P, &["points", "interval", "samples"]);
        match (t.get("points"), t.get("interval")) {
            (Some(Value::Array(a)), None) => {
                let pts: Vec<Option<f64>> = a
                    .iter()
                    .enumerate()
                    .map(|(i, v)| self.number_value(v, &format!("{P}.points[{i}]")))
                    .collect();
                let pts: Option<Vec<f64>> = pts.into_iter().collect();
                match Carrier::finite(&pts?) {
                    Ok(c) => Some(c),
                    Err(e) => {
                        self.err(format!("{P}.points"), e.to_string());
                        None
                    }
                }
            }
            (None, Some(Value::Array(a))) if a.len() == 2 => {
                let lo = self.number_value(&a[0], &format!("{P}.interval[0]"));
                let hi = self.number_value(&a[1], &format!("{P}.interval[1]"));
                let n = self.count(t, P, "samples").unwrap_or(61);
                match Carrier::interval(lo?, hi?, n) {
                    Ok(c) => Some(c),
                    Err(e) => {
                        self.err(format!("{P}.interval"), e.to_string());
                        None
                    }
                }
            }
            (None, Some(_)) => {
                self.err(format!("{P}.interval"), "expected [lo, hi]");
                None
            }
            (Some(_), None) => {
                self.err(format!("{P}.points"), "expected an array of numbers");
                None
            }
            _ => {
                self.err(P, "give exactly one of `points` or `interval`");
                None
            }
        }
    }

    fn space(&mut self, t: &Table, base: Option<&Path>) -> Option<FuzzySpace> {
        const P: &str = "space";
        self.known(
            t,
            P,
            &[
                "carrier",
                "metric",
                "constructor",
                "tnorm",
                "complete",
                "strong",
            ],
        );
        let carrier = self.carrier(t.get("carrier"));
        let metric = self.string(t, P, "metric", false).unwrap_or("euclidean");
        let ctor = self.string(t, P, "constructor", true);
        let tnorm = match self.string(t, P, "tnorm", false).map(TNorm::from_id) {
            Some(Ok(n)) => Some(n),
            Some(Err(e)) => {
                self.err("space.tnorm", e.to_string());
                None
            }
            None => Some(TNorm::product()),
        };
        let complete = self.boolean(t, P, "complete");
        let strong = self.boolean(t, P, "strong");
        let ctor = ctor?;
        let id = if ctor.starts_with("table:") {
            ctor.to_string()
        } else {
            format!("{ctor}:{metric}")
        };
        let path =
            if ctor.starts_with("table:") || crate::spaces::BaseMetric::from_id(metric).is_ok() {
                "space.constructor"
            } else {
                "space.metric"
            };
        let mut space = match FuzzySpace::from_constructor(&id, carrier?, base) {
            Ok(s) => s,
            Err(e) => {
                self.err(path, e.to_string());
                return None;
            }
        };
        space.tnorm = tnorm?;
        // completeness is an assumption, never checked
        space.complete = complete.unwrap_or(false);
        if let Some(s) = strong {
            space.strong = s;
        }
        Some(space)
    }

    fn map(&mut self, t: &Table, space: Option<&FuzzySpace>) -> Option<(SelfMap, Option<bool>)> {
        const P: &str = "map";
        self.known(t, P, &["named", "table", "expression", "continuous"]);
        let continuity = self.boolean(t, P, "continuous");
        let given: Vec<&str> = ["named", "table", "expression"]
            .into_iter()
            .filter(|k| t.contains_key(*k))
            .collect();
        if given.len() != 1 {
            self.err(P, "give exactly one of `named`, `table` or `expression`");
            return None;
        }
        let map = match given[0] {
            "named" => {
                let id = self.string(t, P, "named", true)?;
                SelfMap::from_id(id)
                    .map_err(|e| self.err("map.named", e.to_string()))
                    .ok()?
            }
            "expression" => {
                let src = self.string(t, P, "expression", true)?;
                SelfMap::expression(src)
                    .map_err(|e| self.err("map.expression", e.to_string()))
                    .ok()?
            }
            _ => {
                let Some(Value::Array(rows)) = t.get("table") else {
                    self.err("map.table", "expected an array of [x, Tx] pairs");
                    return None;
                };
                let mut entries = Vec::new();
                for (i, row) in rows.iter().enumerate() {
                    let path = format!("map.table[{i}]");
                    match row.as_array().map(|r| r.as_slice()) {
                        Some([x, y]) => {
                            let x = self.number_value(x, &path);
                            let y = self.number_value(y, &path);
                            if let (Some(x), Some(y)) = (x, y) {
                                entries.push((x, y));
                            }
                        }
                        _ => self.err(path, "expected a pair [x, Tx]"),
                    }
                }
                if let Some(space) = space {
                    for &p in &space.carrier.points {
                        if !entries.iter().any(|e| e.0 == p) {
                            self.err("map.table", format!("no image given for point {p}"));
                        }
                    }
                }
                SelfMap::table(entries)
            }
        };
        if let Some(space) = space {
            if let Err(e) = map.validate(&space.carrier) {
                self.err(P, e.to_string());
            }
        }
        Some((map, continuity))
    }

    fn gauge(&mut self, t: &Table, key: &str) -> Option<Gauge> {
        let id = self.string(t, "gauges", key, false)?;
        Gauge::from_id(id)
            .map_err(|e| self.err(join("gauges", key), e.to_string()))
            .ok()
    }

    fn gauges(
        &mut self,
        t: &Table,
    ) -> (
        Option<Gauge>,
        Option<Gauge>,
        Option<Generator>,
        Option<MParams>,
    ) {
        self.known(t, "gauges", &["psi", "phi", "eta", "params"]);
        let psi = self.gauge(t, "psi");
        let phi = self.gauge(t, "phi");
        let eta = self.gauge(t, "eta").and_then(|g| {
            Generator::new(g)
                .map_err(|e| self.err("gauges.eta", e.to_string()))
                .ok()
        });
        let params = match t.get("params") {
            Some(Value::Table(p)) => {
                self.known(p, "gauges.params", &["alpha", "beta"]);
                let a = self.number(p, "gauges.params", "alpha").unwrap_or(0.0);
                let b = self.number(p, "gauges.params", "beta").unwrap_or(0.0);
                MParams::new(a, b)
                    .map_err(|e| self.err("gauges.params", e.to_string()))
                    .ok()
            }
            Some(_) => {
                self.err("gauges.params", "expected a table with alpha and beta");
                None
            }
            None => None,
        };
        (psi, phi, eta, params)
    }

    fn grid(&mut self, t: &Table, key: &str) -> Option<Vec<f64>> {
        let path = join("grids", key);
        let v = t.get(key)?;
        let grid = match v {
            Value::String(s) if s == "default" => return None,
            Value::String(s) => parse_grid_spec(s)
                .map_err(|e| self.err(&path, e.to_string()))
                .ok()?,
            Value::Array(a) => {
                let vals: Vec<Option<f64>> = a
                    .iter()
                    .enumerate()
                    .map(|(i, v)| self.number_value(v, &format!("{path}[{i}]")))
                    .collect();
                vals.into_iter().collect::<Option<Vec<f64>>>()?
            }
            _ => {
                self.err(&path, "expected a grid spec string or an array of numbers");
                return None;
            }
        };
        if grid.is_empty() {
            self.err(&path, "grid is empty");
        }
        Some(grid)
    }

    fn grids(&mut self, t: &Table) -> (Vec<f64>, Vec<f64>) {
        self.known(t, "grids", &["t", "r"]);
        let tg = self.grid(t, "t").unwrap_or_else(default_t_grid);
        let rg = self.grid(t, "r").unwrap_or_else(default_r_grid);
        for (i, &v) in tg.iter().enumerate() {
            if !(v > 0.0) {
                self.err(format!("grids.t[{i}]"), "t must be positive");
            }
        }
        for (i, &v) in rg.iter().enumerate() {
            if !(v > 0.0 && v < 1.0) {
                self.err(format!("grids.r[{i}]"), "r must lie in (0,1)");
            }
        }
        (tg, rg)
    }

    fn solver(&mut self, t: &Table) -> Option<SolverSpec> {
        const P: &str = "solver";
        self.known(
            t,
            P,
            &[
                "route",
                "x0",
                "max_len",
                "stop_tolerance",
                "tail_tolerance",
                "i_max",
                "scale_t",
                "cauchy_window",
            ],
        );
        let route = match self.string(t, P, "route", false) {
            Some(r) => match Route::from_id(r) {
                Some(r) => Some(r),
                None => {
                    self.err("solver.route", format!("unknown route `{r}`"));
                    None
                }
            },
            None => Some(Route::Auto),
        };
        let x0 = self.number(t, P, "x0");
        let max_len = self.count(t, P, "max_len");
        let tol = |w: &mut Self, key: &str| {
            let v = w.number(t, P, key)?;
            if v > 0.0 && v < 1.0 {
                Some(v)
            } else {
                w.err(join(P, key), "tolerance must lie in (0,1)");
                None
            }
        };
        let stop_tolerance = tol(self, "stop_tolerance");
        let tail_tolerance = tol(self, "tail_tolerance");
        let i_max = self.count(t, P, "i_max");
        let scale_t = self.number(t, P, "scale_t");
        if scale_t.is_some_and(|s| !(s > 0.0)) {
            self.err("solver.scale_t", "t must be positive");
        }
        let scales = (i_max.is_some() || scale_t.is_some()).then(|| {
            let d = ScaleSequence::default();
            ScaleSequence {
                t: scale_t.unwrap_or(d.t),
                i_max: i_max.unwrap_or(d.i_max),
            }
        });
        Some(SolverSpec {
            route: route?,
            x0,
            max_len,
            stop_tolerance,
            tail_tolerance,
            scales,
            cauchy_window: self.count(t, P, "cauchy_window"),
        })
    }
}
