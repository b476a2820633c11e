use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::Gauge;
use crate::error::{Error, Result};
use crate::expr::{Env, Expr};
use crate::grid::parse_number;
use crate::spaces::{Carrier, FuzzySpace};

#[derive(Debug, Clone)]
pub enum MapKind {
    /// x -> y over listed points.
    Table(Vec<(f64, f64)>),
    /// The step gauge on [0, inf) used as a self-map.
    PhiStep,
    Identity,
    Const(f64),
    Expr(Arc<Expr>),
}

/// A self-map T of the carrier.
#[derive(Debug, Clone)]
pub struct SelfMap {
    kind: MapKind,
    id: String,
}

impl SelfMap {
    pub fn phi_step() -> Self {
        SelfMap {
            kind: MapKind::PhiStep,
            id: "phi-step".into(),
        }
    }

    /// 0 -> 0, 1 -> 5, 2 -> 0, 5 -> 2.
    pub fn perm_0_1_2_5() -> Self {
        Self::table_named(
            vec![(0.0, 0.0), (1.0, 5.0), (2.0, 0.0), (5.0, 2.0)],
            "perm-0-1-2-5",
        )
    }

    pub fn identity() -> Self {
        SelfMap {
            kind: MapKind::Identity,
            id: "identity".into(),
        }
    }

    pub fn constant(c: f64) -> Self {
        SelfMap {
            kind: MapKind::Const(c),
            id: format!("const:{c}"),
        }
    }

    pub fn expression(src: &str) -> Result<Self> {
        let e = Expr::parse(src)?;
        if let Some(v) = e.free_vars().into_iter().find(|v| *v != "x") {
            return Err(Error::Invalid(format!(
                "map expression may only use `x`, found `{v}`"
            )));
        }
        Ok(SelfMap {
            kind: MapKind::Expr(Arc::new(e)),
            id: format!("expr:{src}"),
        })
    }

    pub fn table(entries: Vec<(f64, f64)>) -> Self {
        Self::table_named(entries, "table")
    }

    fn table_named(entries: Vec<(f64, f64)>, id: &str) -> Self {
        SelfMap {
            kind: MapKind::Table(entries),
            id: id.into(),
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        let id = id.trim();
        match id {
            "phi-step" => return Ok(Self::phi_step()),
            "perm-0-1-2-5" => return Ok(Self::perm_0_1_2_5()),
            "identity" => return Ok(Self::identity()),
            _ => {}
        }
        if let Some(c) = id.strip_prefix("const:") {
            return Ok(Self::constant(parse_number(c)?));
        }
        if let Some(src) = id.strip_prefix("expr:") {
            return Self::expression(src);
        }
        Err(Error::UnknownId {
            kind: "map",
            id: id.into(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        match &self.kind {
            MapKind::Table(t) => t
                .iter()
                .find(|(a, _)| *a == x)
                .map(|p| p.1)
                .ok_or(Error::NotInCarrier(x)),
            MapKind::PhiStep => Gauge::step_phi().eval(x),
            MapKind::Identity => Ok(x),
            MapKind::Const(c) => Ok(*c),
            MapKind::Expr(e) => e.eval(&Env::x(x)),
        }
    }

    /// T^n x.
    pub fn iterate(&self, x: f64, n: usize) -> Result<f64> {
        (0..n).try_fold(x, |v, _| self.eval(v))
    }

    /// Every carrier point maps into the carrier (exact membership when finite).
    pub fn validate(&self, carrier: &Carrier) -> Result<()> {
        for &x in &carrier.points {
            let y = self.eval(x)?;
            if !carrier.contains(y) {
                return Err(Error::Invalid(format!(
                    "map `{}` sends {x} to {y}, outside the carrier",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Exponents of the generalized comparison value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MParams {
    pub alpha: f64,
    pub beta: f64,
}

impl MParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::Invalid(format!(
                "alpha = {alpha}, beta = {beta} must be finite and nonnegative"
            )));
        }
        Ok(MParams { alpha, beta })
    }

    pub fn zero() -> Self {
        MParams {
            alpha: 0.0,
            beta: 0.0,
        }
    }
}

/// M(x,y,t) * M(x,Tx,t)^alpha * M(y,Ty,t)^beta, real powers inside each factor
/// and the space's t-norm between factors.
pub fn m_value(
    space: &FuzzySpace,
    map: &SelfMap,
    params: MParams,
    x: f64,
    y: f64,
    t: f64,
) -> Result<f64> {
    let mxy = space.m(x, y, t)?;
    let mx = space.m(x, map.eval(x)?, t)?.powf(params.alpha);
    let my = space.m(y, map.eval(y)?, t)?.powf(params.beta);
    let star = |a, b| space.tnorm.eval(a, b);
    Ok(star(star(mxy, mx), my))
}
